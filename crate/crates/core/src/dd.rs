//! Double-double arithmetic for 3×3 group elements.
//!
//! The genus-2 relator multiplies eight matrices whose partial products reach norms
//! of several thousand, so entrywise f64 rounding of the generators alone moves
//! the relator by about 1e-9. Representations therefore carry their generators
//! with a second word of precision and round only when handing matrices out.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::Matrix3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Multiplication by a power of two, exact.
    pub fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let y = Dd::new(self.hi.sqrt());
        y + (self - y * y) / (y + y)
    }

    pub fn exp(self) -> Self {
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::new(k)).ldexp(-10);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for n in 1..14 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..10 {
            sum = sum * sum;
        }
        sum.ldexp(k as i32)
    }

    /// (sinh x, cosh x).
    pub fn sinh_cosh(self) -> (Self, Self) {
        if self.hi.abs() < 0.5 {
            let x2 = self * self;
            let mut term = self;
            let mut s = self;
            for n in 1..20 {
                term = term * x2 / Dd::new(((2 * n) * (2 * n + 1)) as f64);
                s = s + term;
            }
            (s, (Dd::ONE + s * s).sqrt())
        } else {
            let e = self.exp();
            let ei = Dd::ONE / e;
            ((e - ei).ldexp(-1), (e + ei).ldexp(-1))
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// A 3×3 matrix of double-doubles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdMat3(pub [[Dd; 3]; 3]);

impl Default for DdMat3 {
    fn default() -> Self {
        DdMat3([[Dd::ZERO; 3]; 3])
    }
}

impl DdMat3 {
    pub fn identity() -> Self {
        let mut m = Self::default();
        for i in 0..3 {
            m.0[i][i] = Dd::ONE;
        }
        m
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> Dd) -> Self {
        let mut m = Self::default();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_f64(a: &Matrix3<f64>) -> Self {
        Self::from_fn(|i, j| Dd::new(a[(i, j)]))
    }

    /// Exact split into rounded part and remainder.
    pub fn from_parts(hi: &Matrix3<f64>, lo: &Matrix3<f64>) -> Self {
        Self::from_fn(|i, j| Dd::new(hi[(i, j)]) + Dd::new(lo[(i, j)]))
    }

    pub fn to_f64(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[i][j].to_f64())
    }

    /// Remainder after rounding to f64.
    pub fn lo_part(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| (self.0[i][j] - Dd::new(self.0[i][j].to_f64())).to_f64())
    }

    pub fn scale(&self, s: Dd) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    /// e♯ Aᵀ e♯.
    pub fn sharp(&self) -> Self {
        Self::from_fn(|i, j| {
            let v = self.0[j][i];
            if (i == 2) != (j == 2) {
                -v
            } else {
                v
            }
        })
    }

    pub fn trace(&self) -> Dd {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = Dd::ZERO;
        for row in &self.0 {
            for v in row {
                s = s + *v * *v;
            }
        }
        s.sqrt().to_f64()
    }

    pub fn det(&self) -> Dd {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse through the adjugate.
    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let d = self.det();
        let c = |a: usize, b: usize, c: usize, e: usize| m[a][b] * m[c][e] - m[a][e] * m[c][b];
        let adj = [
            [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
            [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
            [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
        ];
        Self::from_fn(|i, j| adj[i][j] / d)
    }

    /// exp by scaling and squaring of the Taylor series.
    pub fn exp(&self) -> Self {
        let n = self.to_f64().norm();
        let s = if n > 0.25 { (n / 0.25).log2().ceil() as i32 } else { 0 };
        let a = Self::from_fn(|i, j| self.0[i][j].ldexp(-s));
        let mut term = Self::identity();
        let mut sum = Self::identity();
        for k in 1..24 {
            term = (term * a).scale(Dd::ONE / Dd::new(k as f64));
            sum = sum + term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }
}

impl Add for DdMat3 {
    type Output = DdMat3;
    fn add(self, b: DdMat3) -> DdMat3 {
        DdMat3::from_fn(|i, j| self.0[i][j] + b.0[i][j])
    }
}

impl Sub for DdMat3 {
    type Output = DdMat3;
    fn sub(self, b: DdMat3) -> DdMat3 {
        DdMat3::from_fn(|i, j| self.0[i][j] - b.0[i][j])
    }
}

impl Mul for DdMat3 {
    type Output = DdMat3;
    fn mul(self, b: DdMat3) -> DdMat3 {
        DdMat3::from_fn(|i, j| self.0[i][0] * b.0[0][j] + self.0[i][1] * b.0[1][j] + self.0[i][2] * b.0[2][j])
    }
}
