//! Noether currents, energy-momentum tensor and the finite-p identities between them.
//!
//! Per triangle, with orthonormal domain frame ε₁, ε₂ and D = du(ε) projected to the
//! tangent plane at the target centroid y, Q = DᵀJD and p = 2k:
//! U = κ D, S = κ^{p−1} D Q^{k−1}, |S| = κ^p Tr Q^k,
//! T = Sᵀ J U − |S|/p · I, V = *(S × y), W = *(T × x), ω = ε × x.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::cocycle::Cocycle;
use crate::error::Result;
use crate::fuchsian::{side_pairing_words, Gen, SurfaceGroupRep, Word};
use crate::lamination::{pair, standard_measure, WeightedMulticurve};
use crate::lorentz::{ad, cross, killing, mink_dot, normalize_hyperboloid, project_tangent_unchecked, LieAlg, MinkVec};
use crate::mesh::{closedness_mean, closedness_residual, loop_cocycle, DiscreteOneForm, FundamentalMesh};

use super::energy::{mat_pow, TriGeom};

/// Currents and frames on one triangle. Index i refers to the frame vector εᵢ.
#[derive(Debug, Clone)]
pub struct TriangleCurrents {
    pub target_centroid: MinkVec,
    pub domain_centroid: MinkVec,
    /// εᵢ projected to the tangent plane at the domain centroid.
    pub frame: [MinkVec; 2],
    pub u: [MinkVec; 2],
    pub s: [MinkVec; 2],
    /// |S| from the projected differential.
    pub s_norm: f64,
    pub t: Matrix2<f64>,
    pub v: [LieAlg; 2],
    pub w: [LieAlg; 2],
    pub omega: [LieAlg; 2],
}

/// Currents on one triangle from target positions `y` and κ.
pub fn triangle_currents(g: &TriGeom, y: [MinkVec; 3], kappa: f64, p: u32) -> TriangleCurrents {
    let k = p / 2;
    let yc = normalize_hyperboloid(&(y[0] + y[1] + y[2]));
    let xc = g.centroid;
    let (f1, f2) = (y[1] - y[0], y[2] - y[0]);
    let d = [
        project_tangent_unchecked(&yc, &(f1 * g.r[(0, 0)])),
        project_tangent_unchecked(&yc, &(f1 * g.r[(0, 1)] + f2 * g.r[(1, 1)])),
    ];
    let q = Matrix2::new(mink_dot(&d[0], &d[0]), mink_dot(&d[0], &d[1]), mink_dot(&d[1], &d[0]), mink_dot(&d[1], &d[1]));
    let qk1 = mat_pow(&q, k - 1);
    let kp = kappa.powi(p as i32);
    let ks = kp / kappa;
    let s_norm = kp * (qk1 * q).trace();
    let u = [d[0] * kappa, d[1] * kappa];
    let s = [
        (d[0] * qk1[(0, 0)] + d[1] * qk1[(1, 0)]) * ks,
        (d[0] * qk1[(0, 1)] + d[1] * qk1[(1, 1)]) * ks,
    ];
    let mut t = Matrix2::from_fn(|i, j| mink_dot(&s[i], &u[j]));
    t -= Matrix2::identity() * (s_norm / p as f64);
    let frame = g.frame.map(|e| project_tangent_unchecked(&xc, &e));
    let row = |i: usize| frame[0] * t[(i, 0)] + frame[1] * t[(i, 1)];
    TriangleCurrents {
        target_centroid: yc,
        domain_centroid: xc,
        frame,
        u,
        s,
        s_norm,
        t,
        v: [-cross(&s[1], &yc), cross(&s[0], &yc)],
        w: [-cross(&row(1), &xc), cross(&row(0), &xc)],
        omega: [cross(&frame[0], &xc), cross(&frame[1], &xc)],
    }
}

/// Averages per-triangle frame values into an edge form twisted by `rep`.
///
/// A triangle value φ(εᵢ) becomes φ(e₁), φ(e₂) on the chords through R⁻¹; interior edges
/// average their two triangles, paired boundary edges average across the side pairing.
pub fn assemble_form(mesh: &FundamentalMesh, geoms: &[TriGeom], values: &[[LieAlg; 2]], rep: &SurfaceGroupRep) -> DiscreteOneForm {
    let mut sum = vec![LieAlg::zeros(); mesh.edges.len()];
    let mut count = vec![0usize; mesh.edges.len()];
    for (g, v) in geoms.iter().zip(values) {
        let ri = g.r_inv;
        let e1 = v[0] * ri[(0, 0)] + v[1] * ri[(1, 0)];
        let e2 = v[0] * ri[(0, 1)] + v[1] * ri[(1, 1)];
        let [a, b, c] = g.verts;
        for (from, to, val) in [(a, b, e1), (b, c, e2 - e1), (c, a, -e2)] {
            let id = mesh.edge_id(from, to).expect("triangle edge");
            sum[id] += if from < to { val } else { -val };
            count[id] += 1;
        }
    }
    let mut values: Vec<LieAlg> = sum.iter().zip(&count).map(|(s, &n)| s / n.max(1) as f64).collect();
    let words = side_pairing_words();
    let gk = words.clone().map(|w| rep.evaluate(&w));
    let gk_inv = words.map(|w| rep.evaluate(&w.inverse()));
    let directed = |values: &[LieAlg], a: usize, b: usize| {
        let id = mesh.edge_id(a, b).expect("boundary edge");
        if a < b { values[id] } else { -values[id] }
    };
    for bp in &mesh.boundary_pairs {
        let here = directed(&values, bp.edge[0], bp.edge[1]);
        let there = directed(&values, bp.partner[0], bp.partner[1]);
        let avg = (here + ad(&gk[bp.side], &there)) * 0.5;
        let back = ad(&gk_inv[bp.side], &avg);
        let (e, f) = (bp.edge, bp.partner);
        values[mesh.edge_id(e[0], e[1]).unwrap()] = if e[0] < e[1] { avg } else { -avg };
        values[mesh.edge_id(f[0], f[1]).unwrap()] = if f[0] < f[1] { back } else { -back };
    }
    DiscreteOneForm { values, rep: rep.clone() }
}

/// Closedness of an assembled current: worst and area-weighted mean normalized circulation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Closedness {
    pub max: f64,
    pub mean: f64,
}

impl Closedness {
    pub fn of(form: &DiscreteOneForm, mesh: &FundamentalMesh) -> Self {
        Self { max: closedness_residual(form, mesh), mean: closedness_mean(form, mesh) }
    }
}

/// Finite-p relation diagnostics for one stage.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RelationReport {
    pub p: u32,
    /// max over triangles of |−2T − X − (2/p)|S| I| with X_ij = (*V(εᵢ), U_j × y)♯.
    pub stress_identity: f64,
    /// max over triangles of |−2T − X|, the identity without the trace term, relative to |S|.
    pub stress_trace_term: f64,
    /// Σ area |*(ω ∧ W)♯ − 2|S|| / Σ area 2|S|.
    pub omega_w_gap: f64,
    /// Share of Σ area |S| carried by triangles with s₁ ≥ 0.9 max s₁.
    pub concentration: f64,
}

/// Per-triangle stress deviations (with, without the trace term).
pub fn stress_deviation(c: &TriangleCurrents, p: u32) -> (f64, f64) {
    let y = c.target_centroid;
    // *V(ε₁) = −V(ε₂), *V(ε₂) = V(ε₁)
    let star_v = [-c.v[1], c.v[0]];
    let x = Matrix2::from_fn(|i, j| killing(&star_v[i], &cross(&c.u[j], &y)));
    let lhs = -2.0 * c.t - x;
    let corrected = lhs - Matrix2::identity() * (2.0 * c.s_norm / p as f64);
    (corrected.abs().max(), lhs.abs().max() / c.s_norm.max(f64::MIN_POSITIVE))
}

/// *(ω ∧ W)♯ on one triangle.
pub fn omega_wedge_w(c: &TriangleCurrents) -> f64 {
    killing(&c.omega[0], &c.w[1]) - killing(&c.omega[1], &c.w[0])
}

/// Share of Σ area·density on triangles with s₁ ≥ `level`·max s₁.
pub fn concentration(areas: &[f64], density: &[f64], s1: &[f64], level: f64) -> f64 {
    let top = s1.iter().cloned().fold(0.0, f64::max);
    let (mut hit, mut all) = (0.0, 0.0);
    for i in 0..areas.len() {
        let m = areas[i] * density[i];
        all += m;
        if s1[i] >= level * top {
            hit += m;
        }
    }
    if all > 0.0 { hit / all } else { 0.0 }
}

/// Cocycle class of a closed current together with trust diagnostics.
#[derive(Debug, Clone)]
pub struct CurrentCocycle {
    pub cocycle: Cocycle,
    pub closedness: Closedness,
    pub relator_tangency: f64,
    /// Closedness below `TRUST_CLOSEDNESS`.
    pub trusted: bool,
    /// Pairing with the standard measure of each handle curve, taken over the form's representation.
    pub pairings: Vec<(String, f64)>,
}

pub const TRUST_CLOSEDNESS: f64 = 0.1;

/// α(g) = integral of the form along a path from the base vertex to its g-translate.
pub fn extract_cocycle_from_current(form: &DiscreteOneForm, mesh: &FundamentalMesh) -> Result<CurrentCocycle> {
    let cocycle = loop_cocycle(form, mesh, 0)?;
    let closedness = Closedness::of(form, mesh);
    let mut pairings = Vec::new();
    for g in Gen::ALL {
        let mc = WeightedMulticurve::single(Word::gen(g), 1.0)?;
        let m = standard_measure(&mc, &form.rep)?;
        pairings.push((g.name().to_string(), pair(&m, &cocycle)?));
    }
    Ok(CurrentCocycle {
        relator_tangency: cocycle.relator_tangency(),
        trusted: closedness.max <= TRUST_CLOSEDNESS,
        closedness,
        cocycle,
        pairings,
    })
}

/// Trapezoid-rule form of the σ-equivariant function ι(x):
/// φ(a → b) = ι(½(P_a + P_b)(x_b − x_a)) = (1 + δ/2) ι(x_b − x_a), δ = cosh d(a, b) − 1.
pub fn manufactured_gradient(mesh: &FundamentalMesh) -> DiscreteOneForm {
    DiscreteOneForm::from_fn(mesh, &mesh.sigma, |a, b| {
        let (xa, xb) = (mesh.vertices[a], mesh.vertices[b]);
        let delta = -mink_dot(&xa, &xb) - 1.0;
        crate::lorentz::iota(&(xb - xa)) * (1.0 + 0.5 * delta)
    })
}
