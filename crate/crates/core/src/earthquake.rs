//! Twist deformations along the handle generators and their infinitesimal cocycles.
//!
//! Positive twist moves along +B, with B the unit generator returned by
//! [`axis_generator`](crate::fuchsian::axis_generator) for the twist curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::Cocycle;
use crate::dd::{Dd, DdMat3};
use crate::error::{Error, Result};
use crate::fuchsian::{translation_length, Gen, SurfaceGroupRep, Word};
use crate::lamination::{length, pair, standard_measure, WeightedMulticurve};
use crate::lorentz::killing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub curve: Gen,
    pub t: f64,
}

/// The generator rewritten by a twist along `curve`.
pub fn partner(curve: Gen) -> Gen {
    match curve {
        Gen::A1 => Gen::B1,
        Gen::B1 => Gen::A1,
        Gen::A2 => Gen::B2,
        Gen::B2 => Gen::A2,
    }
}

/// Parses a curve name, accepting only the four handle generators.
pub fn parse_curve(s: &str) -> Result<Gen> {
    s.trim()
        .parse::<Gen>()
        .map_err(|_| Error::UnsupportedCurve(s.to_string()))
}

/// Unit generator of σ(curve), carried in double-double precision.
pub fn axis_generator_dd(rep: &SurfaceGroupRep, curve: Gen) -> Result<DdMat3> {
    let g = *rep.generator_dd(curve);
    let gi = *rep.generator_inv_dd(curve);
    translation_length(rep.generator(curve))?;
    let c = (g.trace() - Dd::ONE).ldexp(-1);
    let s = (c * c - Dd::ONE).sqrt();
    Ok((g - gi).scale(Dd::ONE / (s + s)))
}

/// Fenchel–Nielsen twist of σ along one handle generator.
pub fn twist(sigma: &SurfaceGroupRep, spec: TwistSpec) -> Result<SurfaceGroupRep> {
    let b = axis_generator_dd(sigma, spec.curve)?.scale(Dd::new(spec.t));
    let e = b.exp();
    let ei = b.scale(-Dd::ONE).exp();
    let p = partner(spec.curve);
    let g = *sigma.generator_dd(p) * e;
    let gi = ei * *sigma.generator_inv_dd(p);
    Ok(sigma
        .with_generator_dd(p, g, gi)
        .with_label(format!("{}+tw({},{})", sigma.label, spec.curve.name(), spec.t)))
}

/// d/dt of the twist family at t = 0, scaled by `weight`.
pub fn earthquake_cocycle(sigma: &SurfaceGroupRep, curve: Gen, weight: f64) -> Result<Cocycle> {
    let b = axis_generator_dd(sigma, curve)?;
    let p = partner(curve);
    let m = *sigma.generator_dd(p);
    let mi = *sigma.generator_inv_dd(p);
    let mut values = [DdMat3::default(); 4];
    values[p.index()] = (m * b * mi).scale(Dd::new(weight));
    Ok(Cocycle::from_dd(sigma.clone(), values))
}

/// Σ b_i ½ (ξ(γ_i), B_i).
pub fn length_derivative(sigma: &SurfaceGroupRep, mc: &WeightedMulticurve, xi: &Cocycle) -> Result<f64> {
    if !sigma.same_as(&xi.rep, 1e-12) {
        return Err(Error::RepMismatch);
    }
    let m = standard_measure(mc, sigma)?;
    Ok(m
        .atoms
        .iter()
        .map(|a| a.weight * 0.5 * killing(&xi.evaluate(&a.word), &a.b))
        .sum())
}

/// Fourth-order central difference of f at 0.
pub fn central_difference<F: Fn(f64) -> Result<f64>>(f: F, h: f64) -> Result<f64> {
    let (p2, p1, m1, m2) = (f(2.0 * h)?, f(h)?, f(-h)?, f(-2.0 * h)?);
    Ok((m2 - p2 + 8.0 * (p1 - m1)) / (12.0 * h))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

impl DualityReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel_err = if scale < 1e-12 { (lhs - rhs).abs() } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, rel_err }
    }
}

/// Finite-difference length change under the twist against the cocycle formula.
pub fn duality_check(
    sigma: &SurfaceGroupRep,
    mc: &WeightedMulticurve,
    curve: Gen,
    weight: f64,
    step: f64,
) -> Result<DualityReport> {
    let lhs = central_difference(
        |t| {
            length(
                mc,
                &twist(
                    sigma,
                    TwistSpec {
                        curve,
                        t: weight * t,
                    },
                )?,
            )
        },
        step,
    )?;
    let rhs = length_derivative(sigma, mc, &earthquake_cocycle(sigma, curve, weight)?)?;
    Ok(DualityReport::new(lhs, rhs))
}

/// Runs duality_check for every ordered pair of distinct handle generators.
pub fn duality_table(sigma: &SurfaceGroupRep, step: f64) -> Result<Vec<(Gen, Gen, DualityReport)>> {
    let pairs: Vec<(Gen, Gen)> = Gen::ALL
        .iter()
        .flat_map(|&m| Gen::ALL.iter().filter(move |&&c| c != m).map(move |&c| (m, c)))
        .collect();
    pairs
        .par_iter()
        .map(|&(m, c)| {
            let mc = WeightedMulticurve::single(Word::gen(m), 1.0)?;
            Ok((m, c, duality_check(sigma, &mc, c, 1.0, step)?))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WolpertReport {
    pub curve1: Gen,
    pub curve2: Gen,
    /// ∂l(curve1)/∂t(curve2).
    pub d12: f64,
    /// ∂l(curve2)/∂t(curve1).
    pub d21: f64,
    pub abs_diff: f64,
}

/// Compares the two mixed length-twist derivatives by finite differences.
pub fn wolpert_reciprocity(sigma: &SurfaceGroupRep, curve1: Gen, curve2: Gen, step: f64) -> Result<WolpertReport> {
    let dl = |measured: Gen, twisted: Gen| {
        central_difference(
            |t| translation_length(&twist(sigma, TwistSpec { curve: twisted, t })?.evaluate(&Word::gen(measured))),
            step,
        )
    };
    let d12 = dl(curve1, curve2)?;
    let d21 = dl(curve2, curve1)?;
    Ok(WolpertReport {
        curve1,
        curve2,
        d12,
        d21,
        abs_diff: (d12 - d21).abs(),
    })
}

/// Pairing form of the length derivative, ½ ⟨dw, ξ⟩.
pub fn half_pairing(sigma: &SurfaceGroupRep, mc: &WeightedMulticurve, xi: &Cocycle) -> Result<f64> {
    Ok(0.5 * pair(&standard_measure(mc, sigma)?, xi)?)
}
