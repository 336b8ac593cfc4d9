//! Periodic 1D rig: domain group ⟨e^{aB}⟩ acting on its axis, target group ⟨e^{bB}⟩.
//!
//! The domain circle of length a is cut into n equal arcs. Unknowns y₀..y_{n−1} on the
//! hyperboloid with y_n = e^{bB} y₀; the energy Σ (a/n)(dᵢ/(a/n))^p with dᵢ = d(yᵢ, yᵢ₊₁)
//! is minimized by equally spaced points on the axis, stretch b/a.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{b_perp_std, b_std, base_point, exp_so21, mink_dot, GroupElem, MinkVec};

use super::solver::{minimize_problem, Evaluation, Outcome, Problem, SolveOptions};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CylinderRig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

fn chord_distance(y: &MinkVec, z: &MinkVec) -> f64 {
    let e = z - y;
    2.0 * (mink_dot(&e, &e).max(0.0).sqrt() / 2.0).asinh()
}

impl CylinderRig {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && n >= 3) {
            return Err(Error::Config(format!("cylinder rig needs a, b > 0 and n ≥ 3 (a={a}, b={b}, n={n})")));
        }
        Ok(Self { a, b, n })
    }

    pub fn spacing(&self) -> f64 {
        self.a / self.n as f64
    }

    pub fn holonomy(&self) -> GroupElem {
        exp_so21(&(b_std() * self.b))
    }

    /// xᵢ = e^{(ia/n)B} X₀.
    pub fn domain_points(&self) -> Vec<MinkVec> {
        (0..self.n).map(|i| exp_so21(&(b_std() * (i as f64 * self.spacing()))) * base_point()).collect()
    }

    /// Exact minimizer yᵢ = e^{(ib/n)B} X₀.
    pub fn linear_map(&self) -> Vec<MinkVec> {
        let step = self.b / self.n as f64;
        (0..self.n).map(|i| exp_so21(&(b_std() * (i as f64 * step))) * base_point()).collect()
    }

    /// Identity vertex positions pushed off the axis by a seeded transverse perturbation.
    pub fn perturbed_identity(&self, amplitude: f64, seed: u64) -> Vec<MinkVec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.domain_points()
            .into_iter()
            .map(|x| exp_so21(&(b_perp_std() * rng.gen_range(-amplitude..=amplitude))) * x)
            .collect()
    }

    fn distances(&self, pts: &[MinkVec]) -> Vec<f64> {
        let last = self.holonomy() * pts[0];
        (0..self.n)
            .map(|i| chord_distance(&pts[i], if i + 1 == self.n { &last } else { &pts[i + 1] }))
            .collect()
    }

    /// dᵢ / (a/n) on every arc.
    pub fn stretches(&self, pts: &[MinkVec]) -> Vec<f64> {
        let h = self.spacing();
        self.distances(pts).into_iter().map(|d| d / h).collect()
    }

    /// (J_p / a)^{1/p}.
    pub fn normalized_root(&self, energy: f64, p: u32) -> f64 {
        (energy / self.a).powf(1.0 / p as f64)
    }

    pub fn minimize(&self, init: Vec<MinkVec>, p: u32, opts: &SolveOptions) -> Result<Outcome> {
        minimize_problem(self, init, p, opts)
    }
}

impl Problem for CylinderRig {
    fn len(&self) -> usize {
        self.n
    }

    fn step_cap(&self) -> f64 {
        0.25 * self.spacing()
    }

    fn energy(&self, pts: &[MinkVec], p: u32) -> Result<f64> {
        super::energy::half_power(p)?;
        let h = self.spacing();
        Ok(self.distances(pts).iter().map(|d| h * (d / h).powi(p as i32)).sum())
    }

    fn evaluate(&self, pts: &[MinkVec], p: u32) -> Result<Evaluation> {
        super::energy::half_power(p)?;
        let h = self.spacing();
        let hol = self.holonomy();
        let last = hol * pts[0];
        let mut grad = vec![Vector3::zeros(); self.n];
        let mut diag = vec![0.0; self.n];
        let mut energy = 0.0;
        let pf = p as f64;
        for i in 0..self.n {
            let (y, z) = (pts[i], if i + 1 == self.n { last } else { pts[i + 1] });
            let d = chord_distance(&y, &z);
            let r = d / h;
            energy += h * r.powi(p as i32);
            // d = acosh(−(y, z)), ∂d/∂y = −J z / sinh d
            let de = pf * r.powi(p as i32 - 1) / d.sinh().max(f64::MIN_POSITIVE);
            let gy = -MinkVec::new(z.x, z.y, -z.z) * de;
            let gz = -MinkVec::new(y.x, y.y, -y.z) * de;
            let curv = pf * (pf - 1.0) * r.powi(p as i32 - 2) / h;
            grad[i] += gy;
            diag[i] += curv;
            let j = (i + 1) % self.n;
            grad[j] += if i + 1 == self.n { hol.transpose() * gz } else { gz };
            diag[j] += curv;
        }
        Ok(Evaluation { energy, grad, diag })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_density() {
        let rig = CylinderRig::new(2.0, 3.0, 32).unwrap();
        let y = rig.linear_map();
        for s in rig.stretches(&y) {
            assert!((s - 1.5).abs() < 1e-12);
        }
        let j = rig.energy(&y, 4).unwrap();
        assert!((j / rig.a - 1.5f64.powi(4)).abs() < 1e-10);
    }

    #[test]
    fn gradient_vanishes_at_linear_map() {
        let rig = CylinderRig::new(2.0, 3.0, 16).unwrap();
        let y = rig.linear_map();
        let ev = rig.evaluate(&y, 8).unwrap();
        let rg = super::super::solver::riemannian_gradient(&y, &ev.grad);
        let s = super::super::solver::stationarity(&rg, &ev.diag, ev.energy, 8);
        assert!(s < 1e-10, "{s}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rig = CylinderRig::new(2.0, 3.0, 8).unwrap();
        let y = rig.perturbed_identity(0.2, 3);
        for p in [2, 4, 8] {
            let ev = rig.evaluate(&y, p).unwrap();
            for c in 0..rig.n {
                for dir in [MinkVec::new(1.0, 0.0, 0.0), MinkVec::new(0.0, 1.0, 0.0), MinkVec::new(0.0, 0.0, 1.0)] {
                    let h = 1e-6;
                    let tangent = crate::lorentz::project_tangent_unchecked(&y[c], &dir);
                    let mut at = y.clone();
                    let mut bt = y.clone();
                    at[c] += tangent * h;
                    bt[c] -= tangent * h;
                    let fdt = (rig.energy(&at, p).unwrap() - rig.energy(&bt, p).unwrap()) / (2.0 * h);
                    let ant = ev.grad[c].dot(&tangent);
                    // difference quotient carries rounding noise of order E·ε/h
                    let noise = 1e-9 * ev.energy;
                    assert!((fdt - ant).abs() <= 1e-6 * (1.0 + ant.abs()) + noise, "p={p} c={c}: {fdt} vs {ant}");
                }
            }
        }
    }
}
