//! Twisted 1-cocycles π₁ → so(2,1) over Ad∘σ.
//!
//! A cocycle is stored by its generator values and extended by
//! α(γ₁γ₂) = α(γ₁) + Ad(σ(γ₁)) α(γ₂). Cohomology classes are never formed;
//! callers compare classes by pairing with multicurve measures.

use serde::{Deserialize, Serialize};

use crate::dd::{Dd, DdMat3};
use crate::error::{Error, Result};
use crate::fuchsian::{Gen, SurfaceGroupRep, Word};
use crate::lorentz::LieAlg;
use crate::tol;

/// Generator values are kept as a rounded part `values` plus a hidden remainder, so
/// that closed-form cocycles stay tangent to double-double accuracy. Editing `values`
/// in place adds to the represented value; the remainder is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct Cocycle {
    pub rep: SurfaceGroupRep,
    pub values: [LieAlg; 4],
    lo: [LieAlg; 4],
}

impl Cocycle {
    /// Checks relator tangency against [`tol::TANGENCY`].
    pub fn new(rep: SurfaceGroupRep, values: [LieAlg; 4]) -> Result<Self> {
        let c = Self::new_unchecked(rep, values);
        let r = c.relator_tangency();
        if r > tol::TANGENCY {
            return Err(Error::Relator(r));
        }
        Ok(c)
    }

    pub fn new_unchecked(rep: SurfaceGroupRep, values: [LieAlg; 4]) -> Self {
        Self {
            rep,
            values,
            lo: [LieAlg::zeros(); 4],
        }
    }

    pub fn from_dd(rep: SurfaceGroupRep, values: [DdMat3; 4]) -> Self {
        Self {
            rep,
            values: values.map(|v| v.to_f64()),
            lo: values.map(|v| v.lo_part()),
        }
    }

    pub fn value_dd(&self, g: Gen) -> DdMat3 {
        let k = g.index();
        DdMat3::from_parts(&self.values[k], &self.lo[k])
    }

    /// Remainders dropped when rounding the generator values.
    pub fn lo_parts(&self) -> &[LieAlg; 4] {
        &self.lo
    }

    pub fn zero(rep: &SurfaceGroupRep) -> Self {
        Self::new_unchecked(rep.clone(), [LieAlg::zeros(); 4])
    }

    pub fn value(&self, g: Gen) -> &LieAlg {
        &self.values[g.index()]
    }

    pub fn evaluate(&self, w: &Word) -> LieAlg {
        evaluate_cocycle(self, w)
    }

    pub fn relator_tangency(&self) -> f64 {
        relator_tangency(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let c = Dd::new(c);
        Self::from_dd(self.rep.clone(), Gen::ALL.map(|g| self.value_dd(g).scale(c)))
    }

    pub fn add(&self, other: &Cocycle) -> Result<Self> {
        if !self.rep.same_as(&other.rep, 1e-12) {
            return Err(Error::RepMismatch);
        }
        Ok(Self::from_dd(
            self.rep.clone(),
            Gen::ALL.map(|g| self.value_dd(g) + other.value_dd(g)),
        ))
    }
}

/// Cocycle rule, accumulated in double-double precision.
pub fn evaluate_cocycle(alpha: &Cocycle, w: &Word) -> LieAlg {
    let rep = &alpha.rep;
    let mut prefix = DdMat3::identity();
    let mut prefix_inv = DdMat3::identity();
    let mut acc = DdMat3::default();
    for l in w.letters() {
        let v = alpha.value_dd(l.gen);
        // α(g⁻¹) = −Ad(σ(g)⁻¹) α(g)
        let piece = if l.inv {
            let gi = *rep.generator_inv_dd(l.gen);
            let g = *rep.generator_dd(l.gen);
            (gi * v * g).scale(-Dd::ONE)
        } else {
            v
        };
        acc = acc + prefix * piece * prefix_inv;
        prefix = prefix * *rep.letter_dd(*l);
        prefix_inv = *rep.letter_dd(l.inverse()) * prefix_inv;
    }
    acc.to_f64()
}

/// ‖α([a1,b1][a2,b2])‖_F.
pub fn relator_tangency(alpha: &Cocycle) -> f64 {
    evaluate_cocycle(alpha, &Word::relator()).norm()
}

/// α(γ) = A0 − Ad(σ(γ)) A0.
pub fn coboundary(a0: &LieAlg, sigma: &SurfaceGroupRep) -> Cocycle {
    let a = DdMat3::from_f64(a0);
    let values = Gen::ALL.map(|g| {
        let m = *sigma.generator_dd(g);
        let mi = *sigma.generator_inv_dd(g);
        a - m * a * mi
    });
    Cocycle::from_dd(sigma.clone(), values)
}

/// α(g) = (d/ds σ_s(g)) σ(g)⁻¹ at s = 0 by central differences.
///
/// Uses the symmetric five-point stencil on ±step and ±2·step, so the truncation
/// error is O(step⁴). Every sampled member must satisfy the representation
/// invariants. A relator tangency above 1e-6 is reported as a warning.
pub fn differentiate_family<F>(family: F, step: f64) -> Result<Cocycle>
where
    F: Fn(f64) -> SurfaceGroupRep,
{
    let s0 = family(0.0).validated()?;
    let samples = [2.0, 1.0, -1.0, -2.0].map(|k| family(k * step).validated());
    let [p2, p1, m1, m2] = samples;
    let (p2, p1, m1, m2) = (p2?, p1?, m1?, m2?);
    let inv12h = Dd::ONE / Dd::new(12.0 * step);
    let eight = Dd::new(8.0);
    let values = Gen::ALL.map(|g| {
        let d = (*m2.generator_dd(g) - *p2.generator_dd(g)
            + (*p1.generator_dd(g) - *m1.generator_dd(g)).scale(eight))
        .scale(inv12h);
        d * *s0.generator_inv_dd(g)
    });
    let c = Cocycle::from_dd(s0, values);
    let r = c.relator_tangency();
    if r > 1e-6 {
        log::warn!("finite-difference cocycle has relator tangency {r:e}");
    }
    Ok(c)
}

/// Serialized cocycle: generator values plus a reference to the representation file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocycleFile {
    pub rep: String,
    pub values: Vec<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values_lo: Option<Vec<[[f64; 3]; 3]>>,
}

fn to_rows(m: &LieAlg) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

impl CocycleFile {
    pub fn from_cocycle(c: &Cocycle, rep_ref: impl Into<String>) -> Self {
        CocycleFile {
            rep: rep_ref.into(),
            values: c.values.iter().map(to_rows).collect(),
            values_lo: c
                .lo
                .iter()
                .any(|m| m.norm() > 0.0)
                .then(|| c.lo.iter().map(to_rows).collect()),
        }
    }

    /// Rebuilds the cocycle over an already loaded representation and checks tangency.
    pub fn into_cocycle(self, rep: SurfaceGroupRep) -> Result<Cocycle> {
        if self.values.len() != 4 {
            return Err(Error::Config(format!("expected 4 cocycle values, found {}", self.values.len())));
        }
        let lo = self.values_lo.unwrap_or_else(|| vec![[[0.0; 3]; 3]; 4]);
        if lo.len() != 4 {
            return Err(Error::Config(format!("expected 4 cocycle remainders, found {}", lo.len())));
        }
        let v = Gen::ALL.map(|g| {
            let k = g.index();
            DdMat3::from_parts(
                &LieAlg::from_fn(|i, j| self.values[k][i][j]),
                &LieAlg::from_fn(|i, j| lo[k][i][j]),
            )
        });
        let c = Cocycle::from_dd(rep, v);
        let r = c.relator_tangency();
        if r > tol::TANGENCY {
            return Err(Error::Relator(r));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{octagon_representation, Letter};
    use crate::lorentz::{b_perp_std, b_std, n_hat_std};
    use proptest::prelude::*;

    fn lie(b: f64, a: f64, z: f64) -> LieAlg {
        b_std() * b + b_perp_std() * a + n_hat_std() * z
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Ad(σ(w)) in double-double, rounded at the end.
    fn ad_word(rep: &SurfaceGroupRep, w: &Word, a: &LieAlg) -> LieAlg {
        // the adjugate loses all digits for long words, so invert letter by letter
        (rep.evaluate_dd(w) * DdMat3::from_f64(a) * rep.evaluate_dd(&w.inverse())).to_f64()
    }

    #[test]
    fn trivial_values() {
        let rep = octagon_representation();
        let z = Cocycle::zero(&rep);
        assert_eq!(z.evaluate(&w("a1 b2 A2")), LieAlg::zeros());
        let c = coboundary(&lie(0.3, -0.2, 0.5), &rep);
        assert_eq!(c.evaluate(&Word::empty()), LieAlg::zeros());
        assert_eq!(coboundary(&LieAlg::zeros(), &rep).values, [LieAlg::zeros(); 4]);
        assert_eq!(z.relator_tangency(), 0.0);
        assert!(c.relator_tangency() <= 1e-12);
    }

    #[test]
    fn coboundary_matches_definition_on_words() {
        let rep = octagon_representation();
        let a0 = lie(0.3, -0.2, 0.5);
        let c = coboundary(&a0, &rep);
        for s in ["a1 b1", "A2 b2 a1", "B1 B1 a2"] {
            let want = a0 - ad_word(&rep, &w(s), &a0);
            assert!((c.evaluate(&w(s)) - want).norm() <= 1e-10 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn random_values_are_not_tangent() {
        let rep = octagon_representation();
        let c = Cocycle::new_unchecked(rep.clone(), [lie(1.0, 0.0, 0.0), lie(0.0, 1.0, 0.0), lie(0.0, 0.0, 1.0), lie(0.5, 0.5, 0.5)]);
        assert!(c.relator_tangency() > 0.1);
        assert!(Cocycle::new(rep, c.values).is_err());
    }

    #[test]
    fn constant_family_gives_zero() {
        let rep = octagon_representation();
        let c = differentiate_family(|_| rep.clone(), 1e-4).unwrap();
        assert!(c.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn conjugation_family_is_coboundary() {
        let rep = octagon_representation();
        let a0 = lie(0.2, 0.4, -0.3);
        let fam = |s: f64| rep.conjugate_dd(&DdMat3::from_f64(&(a0 * s)).exp());
        let c = differentiate_family(fam, 1e-4).unwrap();
        // d/ds e^{sA} g e^{-sA} g⁻¹ = A − Ad(g) A
        let cb = coboundary(&a0, &rep);
        for k in 0..4 {
            let scale = 1.0 + cb.values[k].norm();
            assert!((c.values[k] - cb.values[k]).norm() <= 1e-6 * scale);
        }
        assert!(c.relator_tangency() <= 1e-8);
    }

    #[test]
    fn inverse_rule() {
        let rep = octagon_representation();
        let c = coboundary(&lie(0.1, 0.7, 0.2), &rep);
        let word = w("a1 B2 a2");
        let lhs = c.evaluate(&word.inverse());
        let rhs = -ad_word(&rep, &word.inverse(), &c.evaluate(&word));
        assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn json_round_trip() {
        let rep = octagon_representation();
        let c = coboundary(&lie(0.1, 0.7, 0.2), &rep);
        let f = CocycleFile::from_cocycle(&c, "rep.json");
        let s = serde_json::to_string(&f).unwrap();
        let back: CocycleFile = serde_json::from_str(&s).unwrap();
        assert_eq!(back.into_cocycle(rep).unwrap(), c);
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..8, 0..6).prop_map(|v| Word::new(v.into_iter().map(Letter::from_code)))
    }

    proptest! {
        #[test]
        fn cocycle_identity(u in arb_word(), v in arb_word(), b in -1.0..1.0f64, a in -1.0..1.0f64, z in -1.0..1.0f64) {
            let rep = octagon_representation();
            // a coboundary plus a non-tangent perturbation still obeys the cocycle rule on the free group
            let mut c = coboundary(&lie(b, a, z), &rep);
            c.values[2] += lie(0.3, 0.1, -0.2);
            let lhs = c.evaluate(&u.concat(&v));
            let rhs = c.evaluate(&u) + ad_word(&rep, &u, &c.evaluate(&v));
            let amp = rep.evaluate(&u).norm().powi(2) * c.evaluate(&v).norm();
            prop_assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + amp + lhs.norm()));
        }

        #[test]
        fn every_bracketing_agrees(x in arb_word(), y in arb_word(), z in arb_word()) {
            let rep = octagon_representation();
            let mut c = coboundary(&lie(0.2, -0.4, 0.1), &rep);
            c.values[1] += lie(-0.1, 0.2, 0.3);
            let left = c.evaluate(&x.concat(&y)) + ad_word(&rep, &x.concat(&y), &c.evaluate(&z));
            let right = c.evaluate(&x) + ad_word(&rep, &x, &c.evaluate(&y.concat(&z)));
            // rounding of α(z) is amplified by Ad(σ(xy)); the two sides may cancel heavily
            let amp = rep.evaluate(&x.concat(&y)).norm().powi(2) * c.evaluate(&z).norm()
                + rep.evaluate(&x).norm().powi(2) * c.evaluate(&y.concat(&z)).norm();
            prop_assert!((left - right).norm() <= 1e-13 * (1.0 + amp + left.norm()));
        }
    }
}
