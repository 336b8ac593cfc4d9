//! Linear algebra in R^{2,1} with the form (+,+,−) and in so(2,1).
//!
//! Points, tangent vectors and Lie algebra elements are plain nalgebra values;
//! the predicates below check the invariants where they matter.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::tol;

/// A vector in R^{2,1}.
pub type MinkVec = Vector3<f64>;
/// An element of so(2,1): traceless with A♯ = −A.
pub type LieAlg = Matrix3<f64>;
/// An element of SO⁺(2,1).
pub type GroupElem = Matrix3<f64>;

/// e♯ = diag(1, 1, −1).
pub fn e_sharp() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
}

/// The hyperboloid base point (0, 0, 1).
pub fn base_point() -> MinkVec {
    MinkVec::new(0.0, 0.0, 1.0)
}

/// B₂₃ = B₃₂ = 1: unit speed translation along the y axis through the base point.
pub fn b_std() -> LieAlg {
    Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0)
}

/// a₁₃ = a₃₁ = 1: translation along the x axis.
pub fn b_perp_std() -> LieAlg {
    Matrix3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

/// d₁₂ = −d₂₁ = 1: rotation about the base point.
pub fn n_hat_std() -> LieAlg {
    Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
}

#[inline]
pub fn mink_dot(x: &MinkVec, y: &MinkVec) -> f64 {
    x.x * y.x + x.y * y.y - x.z * y.z
}

/// X♯ as a column, i.e. e♯X.
#[inline]
pub fn flat(x: &MinkVec) -> MinkVec {
    MinkVec::new(x.x, x.y, -x.z)
}

/// X × Y = Y X♯ − X Y♯.
pub fn cross(x: &MinkVec, y: &MinkVec) -> LieAlg {
    y * flat(x).transpose() - x * flat(y).transpose()
}

/// (X × Y) v without forming the matrix.
#[inline]
pub fn cross_apply(x: &MinkVec, y: &MinkVec, v: &MinkVec) -> MinkVec {
    y * mink_dot(x, v) - x * mink_dot(y, v)
}

/// A♯ = e♯ Aᵀ e♯.
pub fn sharp(a: &Matrix3<f64>) -> Matrix3<f64> {
    let mut s = a.transpose();
    for i in 0..3 {
        for j in 0..3 {
            if (i == 2) != (j == 2) {
                s[(i, j)] = -s[(i, j)];
            }
        }
    }
    s
}

/// Inverse of a group element, g⁻¹ = g♯.
pub fn group_inv(g: &GroupElem) -> GroupElem {
    sharp(g)
}

/// Killing form Tr(AB), summed so that the result is bitwise symmetric in A and B.
pub fn killing(a: &LieAlg, b: &LieAlg) -> f64 {
    let mut s = a[(0, 0)] * b[(0, 0)] + a[(1, 1)] * b[(1, 1)] + a[(2, 2)] * b[(2, 2)];
    for i in 0..3 {
        for j in (i + 1)..3 {
            s += a[(i, j)] * b[(j, i)] + a[(j, i)] * b[(i, j)];
        }
    }
    s
}

/// Ad(g)A = g A g⁻¹.
pub fn ad(g: &GroupElem, a: &LieAlg) -> LieAlg {
    g * a * group_inv(g)
}

pub fn is_on_hyperboloid(x: &MinkVec, tol: f64) -> bool {
    (mink_dot(x, x) + 1.0).abs() <= tol && x.z > 0.0
}

pub fn check_hyperboloid(x: &MinkVec) -> Result<()> {
    if is_on_hyperboloid(x, tol::HYPERBOLOID * (1.0 + x.z * x.z)) {
        Ok(())
    } else {
        Err(Error::NotOnHyperboloid {
            norm: mink_dot(x, x),
            z: x.z,
        })
    }
}

pub fn is_lie_alg(a: &Matrix3<f64>, tol: f64) -> bool {
    let scale = 1.0 + a.norm();
    (sharp(a) + a).norm() <= tol * scale && a.trace().abs() <= tol * scale
}

pub fn is_group_elem(g: &Matrix3<f64>, tol: f64) -> bool {
    let e = e_sharp();
    let scale = 1.0 + g.norm_squared();
    (g.transpose() * e * g - e).norm() <= tol * scale
        && (g.determinant() - 1.0).abs() <= tol * scale
        && g[(2, 2)] > 0.0
}

pub fn check_group_elem(g: &Matrix3<f64>) -> Result<()> {
    if is_group_elem(g, tol::GROUP) {
        Ok(())
    } else {
        Err(Error::NotGroupElem(format!(
            "det {:.3e}, z-entry {:.3e}",
            g.determinant(),
            g[(2, 2)]
        )))
    }
}

/// Scale a timelike vector back onto the upper sheet.
pub fn normalize_hyperboloid(y: &MinkVec) -> MinkVec {
    let n = (-mink_dot(y, y)).sqrt();
    if y.z >= 0.0 {
        y / n
    } else {
        -y / n
    }
}

/// Π(X)v = v + (v,X)♯ X.
pub fn project_tangent(x: &MinkVec, v: &MinkVec) -> Result<MinkVec> {
    check_hyperboloid(x)?;
    Ok(project_tangent_unchecked(x, v))
}

#[inline]
pub fn project_tangent_unchecked(x: &MinkVec, v: &MinkVec) -> MinkVec {
    v + x * mink_dot(v, x)
}

/// Hyperbolic distance between two points of the hyperboloid.
pub fn distance(x: &MinkVec, y: &MinkVec) -> f64 {
    (-mink_dot(x, y)).max(1.0).acosh()
}

/// Coefficients (f1, f2) with exp A = I + f1 A + f2 A², given k = ½ Tr A².
fn exp_coeffs(k: f64) -> (f64, f64) {
    if k.abs() < tol::EXP_TAYLOR {
        (1.0 + k / 6.0 + k * k / 120.0, 0.5 + k / 24.0 + k * k / 720.0)
    } else if k > 0.0 {
        let th = k.sqrt();
        (th.sinh() / th, (th.cosh() - 1.0) / k)
    } else {
        let th = (-k).sqrt();
        (th.sin() / th, (1.0 - th.cos()) / (-k))
    }
}

/// Matrix exponential on so(2,1), using A³ = kA with k = ½ Tr A².
pub fn exp_so21(a: &LieAlg) -> GroupElem {
    let a2 = a * a;
    let k = 0.5 * a2.trace();
    let (f1, f2) = exp_coeffs(k);
    Matrix3::identity() + a * f1 + a2 * f2
}

/// Logarithm of a group element near its one-parameter subgroup.
///
/// Uses g − g⁻¹ = 2 f(k) A, which holds for every branch of `exp_so21`.
/// Elliptic elements are only handled for rotation angles below π.
pub fn log_so21(g: &GroupElem) -> LieAlg {
    let c = 0.5 * (g.trace() - 1.0);
    let odd = (g - group_inv(g)) * 0.5;
    let factor = if (c - 1.0).abs() < 1e-12 {
        1.0
    } else if c > 1.0 {
        let l = c.acosh();
        l / l.sinh()
    } else {
        let th = c.clamp(-1.0, 1.0).acos();
        th / th.sin()
    };
    odd * factor
}

/// Unit speed geodesic γ(t) = cosh t X + sinh t v.
pub fn geodesic(x: &MinkVec, v: &MinkVec, t: f64) -> Result<MinkVec> {
    check_hyperboloid(x)?;
    let vv = mink_dot(v, v);
    let vx = mink_dot(v, x);
    let scale = 1.0 + x.norm() * v.norm();
    if (vv - 1.0).abs() > 1e-9 * scale || vx.abs() > 1e-9 * scale {
        return Err(Error::BadTangent(format!("(v,v) = {vv}, (v,X) = {vx}")));
    }
    Ok(x * t.cosh() + v * t.sinh())
}

/// The generator v × X of the geodesic through X with velocity v.
pub fn geodesic_generator(x: &MinkVec, v: &MinkVec) -> LieAlg {
    cross(v, x)
}

/// The Lorentz cross map ι(x)v = e♯(x ×_E v), an Ad-equivariant isomorphism R^{2,1} → so(2,1).
///
/// ι(x) annihilates x and (ι(x), ι(y)) = 2(x, y)♯.
pub fn iota(x: &MinkVec) -> LieAlg {
    Matrix3::new(0.0, -x.z, x.y, x.z, 0.0, -x.x, x.y, -x.x, 0.0)
}

/// Inverse of [`iota`].
pub fn iota_inv(a: &LieAlg) -> MinkVec {
    MinkVec::new(-a[(2, 1)], a[(0, 2)], a[(1, 0)])
}

/// e♯(v ×_E X): the unit tangent at X turning v by a quarter turn.
#[inline]
pub fn rotate_tangent(x: &MinkVec, v: &MinkVec) -> MinkVec {
    flat(&v.cross(x))
}

/// The Lie algebra frame (B, B⊥, n̂) attached to an oriented geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub b: LieAlg,
    pub b_perp: LieAlg,
    pub n_hat: LieAlg,
}

impl Frame {
    /// Coordinates (b, a, z) with A = bB + aB⊥ + z n̂.
    pub fn coords(&self, a: &LieAlg) -> (f64, f64, f64) {
        (
            0.5 * killing(a, &self.b),
            0.5 * killing(a, &self.b_perp),
            -0.5 * killing(a, &self.n_hat),
        )
    }

    pub fn compose(&self, b: f64, a: f64, z: f64) -> LieAlg {
        self.b * b + self.b_perp * a + self.n_hat * z
    }

    pub fn gram(&self) -> Matrix3<f64> {
        let m = [self.b, self.b_perp, self.n_hat];
        Matrix3::from_fn(|i, j| killing(&m[i], &m[j]))
    }

    pub fn conjugate(&self, g: &GroupElem) -> Frame {
        Frame {
            b: ad(g, &self.b),
            b_perp: ad(g, &self.b_perp),
            n_hat: ad(g, &self.n_hat),
        }
    }
}

/// Frame at a point X of the axis of the hyperbolic generator B.
pub fn frame_at(b: &LieAlg, x: &MinkVec) -> Result<Frame> {
    check_hyperboloid(x)?;
    if !is_lie_alg(b, tol::LIE) {
        return Err(Error::InvalidFrame("generator is not in so(2,1)".into()));
    }
    let bb = killing(b, b);
    if (bb - 2.0).abs() > 1e-9 {
        return Err(Error::InvalidFrame(format!("(B,B) = {bb}, expected 2")));
    }
    let v = b * x;
    let vv = mink_dot(&v, &v);
    if (vv - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidFrame(format!(
            "base point is off the axis, |BX|² = {vv}"
        )));
    }
    let w = rotate_tangent(x, &v);
    Ok(Frame {
        b: *b,
        b_perp: cross(&w, x),
        n_hat: -iota(x),
    })
}

/// The point of the axis of a hyperbolic generator B closest to `near`.
pub fn axis_point(b: &LieAlg, near: &MinkVec) -> MinkVec {
    // ker B is spanned by ι⁻¹(B); the axis is the hyperboloid slice of its orthogonal plane.
    let k = iota_inv(b);
    let y = near - k * (mink_dot(near, &k) / mink_dot(&k, &k));
    normalize_hyperboloid(&y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    pub(crate) fn exp_series(a: &LieAlg, terms: usize) -> Matrix3<f64> {
        let mut sum = Matrix3::identity();
        let mut term = Matrix3::identity();
        for n in 1..terms {
            term = term * a / n as f64;
            sum += term;
        }
        sum
    }

    fn lie(b: f64, a: f64, z: f64) -> LieAlg {
        b_std() * b + b_perp_std() * a + n_hat_std() * z
    }

    fn hyp_point(x: f64, y: f64) -> MinkVec {
        MinkVec::new(x, y, (1.0 + x * x + y * y).sqrt())
    }

    #[test]
    fn dot_examples() {
        let x0 = base_point();
        assert_eq!(mink_dot(&x0, &x0), -1.0);
        let e1 = MinkVec::new(1.0, 0.0, 0.0);
        assert_eq!(mink_dot(&e1, &e1), 1.0);
        let p = MinkVec::new(0.0, 1f64.sinh(), 1f64.cosh());
        assert_abs_diff_eq!(mink_dot(&p, &x0), -1f64.cosh(), epsilon = 1e-15);
    }

    #[test]
    fn cross_examples() {
        let x0 = base_point();
        assert_eq!(cross(&x0, &x0), Matrix3::zeros());
        assert_eq!(cross(&MinkVec::new(0.0, 1.0, 0.0), &x0), b_std());
        assert_eq!(cross(&MinkVec::new(1.0, 0.0, 0.0), &x0), b_perp_std());
    }

    #[test]
    fn projection_examples() {
        let x0 = base_point();
        let p = |v: MinkVec| project_tangent(&x0, &v).unwrap();
        assert_eq!(p(MinkVec::new(0.0, 0.0, 1.0)), MinkVec::zeros());
        assert_eq!(p(MinkVec::new(1.0, 0.0, 0.0)), MinkVec::new(1.0, 0.0, 0.0));
        assert_eq!(p(MinkVec::new(2.0, 3.0, 5.0)), MinkVec::new(2.0, 3.0, 0.0));
        assert!(project_tangent(&MinkVec::new(1.0, 0.0, 0.0), &x0).is_err());
    }

    #[test]
    fn killing_examples() {
        assert_eq!(killing(&b_std(), &b_std()), 2.0);
        assert_eq!(killing(&n_hat_std(), &n_hat_std()), -2.0);
        assert_eq!(killing(&b_std(), &b_perp_std()), 0.0);
    }

    #[test]
    fn exp_examples() {
        assert_eq!(exp_so21(&Matrix3::zeros()), Matrix3::identity());
        let t: f64 = 0.8;
        let want = Matrix3::new(
            1.0,
            0.0,
            0.0,
            0.0,
            t.cosh(),
            t.sinh(),
            0.0,
            t.sinh(),
            t.cosh(),
        );
        assert_abs_diff_eq!(exp_so21(&(b_std() * t)), want, epsilon = 1e-14);
        let a = n_hat_std() * std::f64::consts::FRAC_PI_2;
        assert_abs_diff_eq!(exp_so21(&a), exp_series(&a, 30), epsilon = 1e-12);
        let r = exp_so21(&a);
        assert_abs_diff_eq!(r * MinkVec::new(1.0, 0.0, 0.0), MinkVec::new(0.0, -1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn exp_taylor_branch_is_continuous() {
        for eps in [1e-5, 3e-5, 1e-4, 2e-4] {
            let a = lie(eps, 0.3 * eps, eps * 0.99);
            assert_abs_diff_eq!(exp_so21(&a), exp_series(&a, 20), epsilon = 1e-15);
        }
        let para = b_std() + n_hat_std();
        assert_abs_diff_eq!(exp_so21(&para), exp_series(&para, 30), epsilon = 1e-13);
    }

    #[test]
    fn geodesic_examples() {
        let x0 = base_point();
        let v = MinkVec::new(0.0, 1.0, 0.0);
        let t: f64 = 1.3;
        assert_abs_diff_eq!(
            geodesic(&x0, &v, t).unwrap(),
            MinkVec::new(0.0, t.sinh(), t.cosh()),
            epsilon = 1e-15
        );
        assert_eq!(geodesic(&x0, &v, 0.0).unwrap(), x0);
        let g2 = geodesic(&x0, &v, 2.0).unwrap();
        assert_abs_diff_eq!(distance(&x0, &g2), 2.0, epsilon = 1e-12);
        assert!(geodesic(&x0, &MinkVec::new(0.0, 2.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn frame_standard() {
        let f = frame_at(&b_std(), &base_point()).unwrap();
        assert_eq!(f.b, b_std());
        assert_eq!(f.b_perp, b_perp_std());
        assert_eq!(f.n_hat, n_hat_std());
        assert_abs_diff_eq!(
            f.gram(),
            Matrix3::from_diagonal(&Vector3::new(2.0, 2.0, -2.0)),
            epsilon = 1e-15
        );
        assert!(frame_at(&n_hat_std(), &base_point()).is_err());
        assert!(frame_at(&b_std(), &hyp_point(0.0, 0.5)).is_ok());
        assert!(frame_at(&b_std(), &hyp_point(0.5, 0.0)).is_err());
    }

    #[test]
    fn log_round_trip() {
        for a in [lie(2.0, 0.3, -0.4), lie(0.1, 0.2, 1.5), b_std() + n_hat_std(), lie(1e-7, 0.0, 0.0)] {
            let g = exp_so21(&a);
            assert_abs_diff_eq!(log_so21(&g), a, epsilon = 1e-10);
        }
    }

    #[test]
    fn iota_properties() {
        let x = MinkVec::new(0.3, -1.2, 2.0);
        let y = MinkVec::new(-0.7, 0.4, 0.1);
        assert_abs_diff_eq!(iota(&x) * x, MinkVec::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(killing(&iota(&x), &iota(&y)), 2.0 * mink_dot(&x, &y), epsilon = 1e-14);
        assert_eq!(iota_inv(&iota(&x)), x);
        assert!(is_lie_alg(&iota(&x), 1e-15));
    }

    #[test]
    fn axis_point_lies_on_axis() {
        let g = exp_so21(&lie(0.2, 0.5, -0.3));
        let b = ad(&g, &b_std());
        let p = axis_point(&b, &hyp_point(1.0, -2.0));
        assert!(frame_at(&b, &p).is_ok());
        assert_abs_diff_eq!((group_inv(&g) * p).x, 0.0, epsilon = 1e-12);
    }

    fn arb_lie(r: f64) -> impl Strategy<Value = LieAlg> {
        (-r..r, -r..r, -r..r).prop_map(|(b, a, z)| lie(b, a, z))
    }

    fn arb_point() -> impl Strategy<Value = MinkVec> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y)| hyp_point(x, y))
    }

    fn arb_vec() -> impl Strategy<Value = MinkVec> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| MinkVec::new(x, y, z))
    }

    proptest! {
        #[test]
        fn cross_antisymmetric(x in arb_vec(), y in arb_vec()) {
            prop_assert!((cross(&x, &y) + cross(&y, &x)).norm() <= 1e-14);
            prop_assert!(is_lie_alg(&cross(&x, &y), 1e-13));
        }

        #[test]
        fn cross_equivariant(x in arb_vec(), y in arb_vec(), a in arb_lie(1.0)) {
            let g = exp_so21(&a);
            let lhs = cross(&(g * x), &(g * y));
            let rhs = ad(&g, &cross(&x, &y));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn projection_idempotent_self_adjoint(x in arb_point(), v in arb_vec(), w in arb_vec()) {
            let pv = project_tangent(&x, &v).unwrap();
            let ppv = project_tangent(&x, &pv).unwrap();
            let scale = 1.0 + x.norm_squared() * v.norm();
            prop_assert!((ppv - pv).norm() <= 1e-12 * scale);
            prop_assert!(mink_dot(&pv, &x).abs() <= 1e-12 * scale);
            let pw = project_tangent(&x, &w).unwrap();
            prop_assert!((mink_dot(&pv, &w) - mink_dot(&v, &pw)).abs() <= 1e-11 * scale * (1.0 + w.norm()));
        }

        #[test]
        fn exp_matches_series(a in arb_lie(2.8)) {
            let e = exp_so21(&a);
            let s = exp_series(&a, 60);
            prop_assert!((e - s).norm() <= 1e-12 * e.norm());
            prop_assert!(is_group_elem(&e, 1e-12));
        }

        #[test]
        fn exp_one_parameter(a in arb_lie(1.0), s in -1.5..1.5f64, t in -1.5..1.5f64) {
            let lhs = exp_so21(&(a * (s + t)));
            let rhs = exp_so21(&(a * s)) * exp_so21(&(a * t));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        }

        #[test]
        fn geodesic_generator_constant(x in arb_point(), th in 0.0..6.28f64, t in -2.0..2.0f64) {
            let v0 = MinkVec::new(th.cos(), th.sin(), 0.0);
            let v = project_tangent(&x, &v0).unwrap();
            let v = v / mink_dot(&v, &v).sqrt();
            let y = geodesic(&x, &v, t).unwrap();
            let vy = x * t.sinh() + v * t.cosh();
            let b0 = geodesic_generator(&x, &v);
            let bt = geodesic_generator(&y, &vy);
            prop_assert!((b0 - bt).norm() <= 1e-11 * (1.0 + b0.norm()));
            prop_assert!((killing(&b0, &b0) - 2.0).abs() <= 1e-11);
            prop_assert!((distance(&x, &y) - t.abs()).abs() <= 1e-8);
            prop_assert!((exp_so21(&(b0 * t)) * x - y).norm() <= 1e-10 * y.norm());
        }

        #[test]
        fn frame_equivariant(a in arb_lie(1.0), y in -1.0..1.0f64) {
            let g = exp_so21(&a);
            let x = hyp_point(0.0, y);
            let f = frame_at(&b_std(), &x).unwrap();
            let fg = frame_at(&ad(&g, &b_std()), &(g * x)).unwrap();
            let want = f.conjugate(&g);
            prop_assert!((fg.b - want.b).norm() <= 1e-11 * (1.0 + want.b.norm()));
            prop_assert!((fg.b_perp - want.b_perp).norm() <= 1e-11 * (1.0 + want.b_perp.norm()));
            prop_assert!((fg.n_hat - want.n_hat).norm() <= 1e-11 * (1.0 + want.n_hat.norm()));
            let gram = fg.gram();
            prop_assert!((gram - Matrix3::from_diagonal(&Vector3::new(2.0, 2.0, -2.0))).norm() <= 1e-10);
        }
    }
}
