//! Discrete p-Schatten energy on the triangulated octagon.
//!
//! On a triangle with domain chords e₁, e₂ and target chords f₁, f₂ the differential
//! is the linear map eᵢ ↦ fᵢ. With Gram matrices C = [(eᵢ,eⱼ)] and F = [(fᵢ,fⱼ)] the
//! squared singular values are the eigenvalues of M = C⁻¹F, so for p = 2k
//! TrQ(du)^p = s₁^p + s₂^p = Tr M^k, a polynomial in the target points.

use nalgebra::{Matrix2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fuchsian::SurfaceGroupRep;
use crate::lorentz::{mink_dot, normalize_hyperboloid, GroupElem, MinkVec};
use crate::mesh::FundamentalMesh;

use super::solver::{Evaluation, Problem};

/// Per-triangle domain data, fixed for the lifetime of a mesh.
#[derive(Debug, Clone)]
pub struct TriGeom {
    pub verts: [usize; 3],
    pub area: f64,
    pub cinv: Matrix2<f64>,
    /// Orthonormal chord frame εᵢ = Σⱼ eⱼ R_{ji}.
    pub r: Matrix2<f64>,
    pub r_inv: Matrix2<f64>,
    /// Normalized domain centroid.
    pub centroid: MinkVec,
    pub frame: [MinkVec; 2],
}

fn gram(u: &MinkVec, v: &MinkVec) -> Matrix2<f64> {
    Matrix2::new(mink_dot(u, u), mink_dot(u, v), mink_dot(v, u), mink_dot(v, v))
}

impl TriGeom {
    pub fn new(t: usize, verts: [usize; 3], x: [MinkVec; 3], area: f64) -> Result<Self> {
        let (e1, e2) = (x[1] - x[0], x[2] - x[0]);
        let c = gram(&e1, &e2);
        let cinv = c.try_inverse().ok_or(Error::DegenerateTriangle(t))?;
        if c.determinant() <= 0.0 || area <= 0.0 {
            return Err(Error::DegenerateTriangle(t));
        }
        let n1 = c[(0, 0)].sqrt();
        let proj = c[(0, 1)] / n1;
        let n2 = (c[(1, 1)] - proj * proj).sqrt();
        let r = Matrix2::new(1.0 / n1, -proj / (n1 * n2), 0.0, 1.0 / n2);
        let r_inv = r.try_inverse().ok_or(Error::DegenerateTriangle(t))?;
        let frame = [e1 * r[(0, 0)], e1 * r[(0, 1)] + e2 * r[(1, 1)]];
        Ok(Self {
            verts,
            area,
            cinv,
            r,
            r_inv,
            centroid: normalize_hyperboloid(&(x[0] + x[1] + x[2])),
            frame,
        })
    }
}

pub fn triangle_geometry(mesh: &FundamentalMesh) -> Result<Vec<TriGeom>> {
    mesh.triangles
        .iter()
        .enumerate()
        .map(|(t, &v)| TriGeom::new(t, v, v.map(|i| mesh.vertices[i]), mesh.areas[t]))
        .collect()
}

pub(crate) fn mat_pow(m: &Matrix2<f64>, mut n: u32) -> Matrix2<f64> {
    let mut out = Matrix2::identity();
    let mut b = *m;
    while n > 0 {
        if n & 1 == 1 {
            out *= b;
        }
        b *= b;
        n >>= 1;
    }
    out
}

pub(crate) fn half_power(p: u32) -> Result<u32> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::Solver(format!("p = {p} must be an even integer ≥ 2")));
    }
    Ok(p / 2)
}

/// Singular values (s₁ ≥ s₂) of the differential on one triangle.
pub fn singular_values(g: &TriGeom, y: [MinkVec; 3]) -> (f64, f64) {
    let f = gram(&(y[1] - y[0]), &(y[2] - y[0]));
    let m = g.cinv * f;
    let t = 0.5 * m.trace();
    let disc = (t * t - m.determinant()).max(0.0).sqrt();
    ((t + disc).max(0.0).sqrt(), (t - disc).max(0.0).sqrt())
}

/// Tr M^k on one triangle.
pub fn triangle_density(g: &TriGeom, y: [MinkVec; 3], k: u32) -> f64 {
    let f = gram(&(y[1] - y[0]), &(y[2] - y[0]));
    mat_pow(&(g.cinv * f), k).trace()
}

/// Tr M^k, its partial derivatives in the three target points, and Tr M^{k−1}.
pub fn triangle_terms(g: &TriGeom, y: [MinkVec; 3], k: u32) -> (f64, [Vector3<f64>; 3], f64) {
    let (f1, f2) = (y[1] - y[0], y[2] - y[0]);
    let m = g.cinv * gram(&f1, &f2);
    let mk1 = mat_pow(&m, k - 1);
    let val = (mk1 * m).trace();
    let gm = mk1 * g.cinv;
    let h = (gm + gm.transpose()) * k as f64;
    let jf1 = MinkVec::new(f1.x, f1.y, -f1.z);
    let jf2 = MinkVec::new(f2.x, f2.y, -f2.z);
    let d1 = jf1 * h[(0, 0)] + jf2 * h[(0, 1)];
    let d2 = jf1 * h[(1, 0)] + jf2 * h[(1, 1)];
    (val, [-(d1 + d2), d1, d2], mk1.trace())
}

/// J_p of a ρ-equivariant map on the mesh, in the unknowns of one point per vertex class.
pub struct MeshEnergy<'a> {
    pub mesh: &'a FundamentalMesh,
    pub geoms: Vec<TriGeom>,
    pub transports: Vec<GroupElem>,
    pub rho: SurfaceGroupRep,
    cap: f64,
}

impl<'a> MeshEnergy<'a> {
    pub fn new(mesh: &'a FundamentalMesh, rho: &SurfaceGroupRep) -> Result<Self> {
        Ok(Self {
            mesh,
            geoms: triangle_geometry(mesh)?,
            transports: mesh.transports(rho),
            rho: rho.clone(),
            cap: 0.25 * min_edge(mesh),
        })
    }

    /// Chart positions u(v) = ρ(h_v) U[class v].
    pub fn chart(&self, pts: &[MinkVec]) -> Vec<MinkVec> {
        self.transports
            .iter()
            .zip(&self.mesh.class)
            .map(|(t, &c)| t * pts[c])
            .collect()
    }

    fn tri_points(&self, chart: &[MinkVec], g: &TriGeom) -> [MinkVec; 3] {
        g.verts.map(|v| chart[v])
    }

    pub fn densities(&self, pts: &[MinkVec], p: u32) -> Result<Vec<f64>> {
        let k = half_power(p)?;
        let chart = self.chart(pts);
        Ok(self
            .geoms
            .par_iter()
            .map(|g| triangle_density(g, self.tri_points(&chart, g), k))
            .collect())
    }

    pub fn singular_values(&self, pts: &[MinkVec]) -> Vec<(f64, f64)> {
        let chart = self.chart(pts);
        self.geoms
            .iter()
            .map(|g| singular_values(g, self.tri_points(&chart, g)))
            .collect()
    }
}

fn min_edge(mesh: &FundamentalMesh) -> f64 {
    mesh.edges
        .iter()
        .map(|&[a, b]| crate::lorentz::distance(&mesh.vertices[a], &mesh.vertices[b]))
        .fold(f64::INFINITY, f64::min)
}

impl Problem for MeshEnergy<'_> {
    fn len(&self) -> usize {
        self.mesh.n_classes()
    }

    fn step_cap(&self) -> f64 {
        self.cap
    }

    fn energy(&self, pts: &[MinkVec], p: u32) -> Result<f64> {
        let d = self.densities(pts, p)?;
        Ok(d.iter().zip(&self.geoms).map(|(d, g)| d * g.area).sum())
    }

    fn evaluate(&self, pts: &[MinkVec], p: u32) -> Result<Evaluation> {
        let k = half_power(p)?;
        let chart = self.chart(pts);
        let per_tri: Vec<(f64, [Vector3<f64>; 3], f64)> = self
            .geoms
            .par_iter()
            .map(|g| triangle_terms(g, self.tri_points(&chart, g), k))
            .collect();
        let n = self.len();
        let mut energy = 0.0;
        let mut chart_grad = vec![Vector3::zeros(); chart.len()];
        let mut chart_diag = vec![0.0; chart.len()];
        for (g, (val, grads, tr1)) in self.geoms.iter().zip(&per_tri) {
            energy += g.area * val;
            let scale = g.area * k as f64 * tr1 * g.cinv.trace();
            for i in 0..3 {
                chart_grad[g.verts[i]] += grads[i] * g.area;
                chart_diag[g.verts[i]] += scale;
            }
        }
        let mut grad = vec![Vector3::zeros(); n];
        let mut diag = vec![0.0; n];
        for (v, &c) in self.mesh.class.iter().enumerate() {
            grad[c] += self.transports[v].transpose() * chart_grad[v];
            diag[c] += chart_diag[v];
        }
        Ok(Evaluation { energy, grad, diag })
    }
}

/// One point per vertex class together with the target representation.
#[derive(Debug, Clone)]
pub struct EquivariantMap {
    pub points: Vec<MinkVec>,
    pub rho: SurfaceGroupRep,
}

impl EquivariantMap {
    pub fn new(mesh: &FundamentalMesh, rho: &SurfaceGroupRep, points: Vec<MinkVec>) -> Result<Self> {
        if points.len() != mesh.n_classes() {
            return Err(Error::Solver(format!("{} points for {} vertex classes", points.len(), mesh.n_classes())));
        }
        for x in &points {
            crate::lorentz::check_hyperboloid(x)?;
        }
        Ok(Self { points, rho: rho.clone() })
    }

    /// u(x_r) = x_r on representatives, extended ρ-equivariantly. For ρ = σ this is the identity.
    pub fn from_domain(mesh: &FundamentalMesh, rho: &SurfaceGroupRep) -> Self {
        Self {
            points: mesh.representatives.iter().map(|&r| mesh.vertices[r]).collect(),
            rho: rho.clone(),
        }
    }

    pub fn identity(mesh: &FundamentalMesh) -> Self {
        Self::from_domain(mesh, &mesh.sigma)
    }

    pub fn chart_points(&self, mesh: &FundamentalMesh) -> Vec<MinkVec> {
        mesh.words
            .iter()
            .zip(&mesh.class)
            .map(|(w, &c)| self.rho.evaluate(w) * self.points[c])
            .collect()
    }

    /// max ‖u(x_e) − ρ(g_k) u(x_e′)‖ over paired boundary vertices.
    pub fn equivariance_defect(&self, mesh: &FundamentalMesh) -> f64 {
        let chart = self.chart_points(mesh);
        let gk = crate::fuchsian::side_pairing_words().map(|w| self.rho.evaluate(&w));
        mesh.boundary_pairs
            .iter()
            .flat_map(|bp| (0..2).map(move |i| (bp.side, bp.edge[i], bp.partner[i])))
            .map(|(k, v, w)| (chart[v] - gk[k] * chart[w]).norm() / chart[v].norm())
            .fold(0.0, f64::max)
    }
}

/// J_p(u) = Σ_T area_T (s₁^p + s₂^p).
pub fn energy_jp(mesh: &FundamentalMesh, u: &EquivariantMap, p: u32) -> Result<f64> {
    MeshEnergy::new(mesh, &u.rho)?.energy(&u.points, p)
}
