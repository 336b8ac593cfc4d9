//! Weighted multicurves and their standard Lie algebra valued transverse measures.
//!
//! Simplicity and disjointness of the curves are not checked. The curated sets used
//! in tests are the four generators and short words built from disjoint handles;
//! other input is trusted as given.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::fuchsian::{axis_generator, translation_length, SurfaceGroupRep, Word};
use crate::lorentz::{
    ad, axis_point, base_point, cross, exp_so21, frame_at, killing, rotate_tangent, LieAlg, MinkVec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveWeight {
    pub word: Word,
    pub weight: f64,
}

/// A finite set of weighted closed curves. Serializes as `[{word, weight}, ...]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightedMulticurve {
    pub curves: Vec<CurveWeight>,
}

impl WeightedMulticurve {
    /// Checks positivity of weights, non-trivial words and pairwise non-conjugacy in the free group.
    pub fn new(curves: Vec<(Word, f64)>) -> Result<Self> {
        let mc = Self {
            curves: curves
                .into_iter()
                .map(|(word, weight)| CurveWeight { word, weight })
                .collect(),
        };
        mc.validate()?;
        Ok(mc)
    }

    pub fn single(word: Word, weight: f64) -> Result<Self> {
        Self::new(vec![(word, weight)])
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.curves.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::Multicurve(format!("weight of {} is {}", c.word, c.weight)));
            }
            if c.word.cyclic_reduce().is_empty() {
                return Err(Error::Multicurve("trivial curve".into()));
            }
            for d in &self.curves[..i] {
                if c.word.free_conjugate(&d.word) || c.word.free_conjugate(&d.word.inverse()) {
                    return Err(Error::Multicurve(format!("{} and {} are the same curve", c.word, d.word)));
                }
            }
        }
        Ok(())
    }

    /// Checks that every curve is hyperbolic under the representation.
    pub fn validate_for(&self, rep: &SurfaceGroupRep) -> Result<()> {
        for c in &self.curves {
            translation_length(&rep.evaluate(&c.word))?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            curves: self
                .curves
                .iter()
                .map(|cw| CurveWeight {
                    word: cw.word.clone(),
                    weight: cw.weight * c,
                })
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().cloned());
        let mc = Self { curves };
        mc.validate()?;
        Ok(mc)
    }
}

/// One closed geodesic of a measure: unit generator, weight, length and a point on the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub b: LieAlg,
    pub weight: f64,
    pub length: f64,
    pub word: Word,
    pub axis_point: MinkVec,
}

/// dw = Σ b_i B_i δ_i over a weighted multicurve.
#[derive(Debug, Clone, PartialEq)]
pub struct LieValuedMeasure {
    pub atoms: Vec<Atom>,
    pub rep: SurfaceGroupRep,
}

pub fn standard_measure(mc: &WeightedMulticurve, sigma: &SurfaceGroupRep) -> Result<LieValuedMeasure> {
    mc.validate()?;
    let atoms = mc
        .curves
        .iter()
        .map(|c| {
            let g = sigma.evaluate(&c.word);
            let b = axis_generator(&g)?;
            Ok(Atom {
                length: translation_length(&g)?,
                axis_point: axis_point(&b, &base_point()),
                b,
                weight: c.weight,
                word: c.word.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LieValuedMeasure {
        atoms,
        rep: sigma.clone(),
    })
}

/// Total variation 2 Σ b_i l_i.
pub fn mass(m: &LieValuedMeasure) -> f64 {
    2.0 * m.atoms.iter().map(|a| a.weight * a.length).sum::<f64>()
}

/// Σ b_i l_ρ(γ_i).
pub fn length(mc: &WeightedMulticurve, rep: &SurfaceGroupRep) -> Result<f64> {
    mc.curves
        .iter()
        .map(|c| Ok(c.weight * translation_length(&rep.evaluate(&c.word))?))
        .sum()
}

/// Σ b_i (B_i, α(γ_i)).
pub fn pair(m: &LieValuedMeasure, xi: &Cocycle) -> Result<f64> {
    if !m.rep.same_as(&xi.rep, 1e-12) {
        return Err(Error::RepMismatch);
    }
    Ok(m
        .atoms
        .iter()
        .map(|a| a.weight * killing(&a.b, &xi.evaluate(&a.word)))
        .sum())
}

/// Value of a test form along the atoms by midpoint quadrature.
///
/// The form is given per atom and arclength parameter as a 2×2 matrix ξ acting on the
/// orthonormal frame (γ′, n) along the geodesic: φ(γ′) = (ξ₁₁ γ′ + ξ₂₁ n) × γ.
/// It is admissible when the largest singular value of ξ is at most 1, which bounds
/// |φ(v)| by √2 |v| in the Killing norm.
pub fn test_form_value<F>(m: &LieValuedMeasure, xi: F, cells: usize) -> f64
where
    F: Fn(usize, f64) -> Matrix2<f64>,
{
    m.atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let h = a.length / cells as f64;
            let mut s = 0.0;
            for c in 0..cells {
                let t = (c as f64 + 0.5) * h;
                let g = exp_so21(&(a.b * t)) * a.axis_point;
                let v = a.b * g;
                let n = rotate_tangent(&g, &v);
                let x = xi(i, t);
                let w = v * x[(0, 0)] + n * x[(1, 0)];
                s += killing(&cross(&w, &g), &a.b) * h;
            }
            a.weight * s
        })
        .sum()
}

/// Largest singular value of a 2×2 matrix.
pub fn spectral_norm(x: &Matrix2<f64>) -> f64 {
    let a = x.transpose() * x;
    let tr = a.trace();
    let det = a.determinant();
    (0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt())).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityMass {
    /// Best value over all forms tried.
    pub value: f64,
    /// Value of the form ξ = [[1,0],[0,0]] aligned with every atom.
    pub optimal: f64,
    /// Best value among the random admissible forms.
    pub sampled_max: f64,
    pub samples: usize,
}

/// Lower bound on the mass by pairing with admissible test forms.
pub fn mass_by_duality(m: &LieValuedMeasure, samples: usize, seed: u64) -> DualityMass {
    const CELLS: usize = 32;
    let optimal = test_form_value(m, |_, _| Matrix2::new(1.0, 0.0, 0.0, 0.0), CELLS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_max = 0.0f64;
    for _ in 0..samples {
        let fields: Vec<Vec<Matrix2<f64>>> = m
            .atoms
            .iter()
            .map(|_| {
                (0..CELLS)
                    .map(|_| {
                        let x = Matrix2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                        let s: f64 = rng.gen_range(0.0..1.0);
                        x * (s / spectral_norm(&x).max(1e-300))
                    })
                    .collect()
            })
            .collect();
        let v = test_form_value(
            m,
            |i, t| {
                let c = ((t / m.atoms[i].length) * CELLS as f64) as usize;
                fields[i][c.min(CELLS - 1)]
            },
            CELLS,
        );
        sampled_max = sampled_max.max(v);
    }
    DualityMass {
        value: optimal.max(sampled_max),
        optimal,
        sampled_max,
        samples,
    }
}

/// ‖Ad(e^{−tB})A − (Ad(e^{−tB})A X) × X‖_F for X on the axis of B.
///
/// With (b, a, z) the frame coordinates of A this equals √2 |z cosh t + a sinh t|.
pub fn frame_invariance_defect(a: &LieAlg, b: &LieAlg, x: &MinkVec, t: f64) -> Result<f64> {
    frame_at(b, x)?;
    let at = ad(&exp_so21(&(b * -t)), a);
    let v = at * x;
    Ok((at - cross(&v, x)).norm())
}

/// Measure export: one record per atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomRecord {
    pub word: Word,
    pub matrix: [[f64; 3]; 3],
    pub weight: f64,
    pub length: f64,
}

impl LieValuedMeasure {
    pub fn export(&self) -> Vec<AtomRecord> {
        self.atoms
            .iter()
            .map(|a| AtomRecord {
                word: a.word.clone(),
                matrix: [0, 1, 2].map(|i| [0, 1, 2].map(|j| a.b[(i, j)])),
                weight: a.weight,
                length: a.length,
            })
            .collect()
    }
}
