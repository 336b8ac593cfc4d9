//! Discrete equivariant p-Schatten harmonic maps with continuation in p.

pub mod currents;
pub mod cylinder;
pub mod energy;
pub mod solver;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::earthquake::{parse_curve, twist, TwistSpec};
use crate::error::{Error, Result};
use crate::fuchsian::SurfaceGroupRep;
use crate::lorentz::{check_hyperboloid, MinkVec};
use crate::mesh::{DiscreteOneForm, FundamentalMesh};

pub use currents::{
    assemble_form, concentration, extract_cocycle_from_current, manufactured_gradient, omega_wedge_w, stress_deviation,
    triangle_currents, Closedness, CurrentCocycle, RelationReport, TriangleCurrents,
};
pub use cylinder::CylinderRig;
pub use energy::{energy_jp, EquivariantMap, MeshEnergy, TriGeom};
pub use solver::{minimize_problem, Evaluation, IterRecord, Outcome, Problem, SolveOptions};

/// Solver health for one stage.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Residuals {
    pub stationarity: f64,
    pub equivariance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub precision_floor: bool,
    pub line_search_failed: bool,
    pub closedness_v: Option<Closedness>,
    pub closedness_w: Option<Closedness>,
}

impl Residuals {
    /// Converged, or stopped at the rounding floor of the energy.
    pub fn healthy(&self) -> bool {
        self.converged || self.precision_floor
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub map: EquivariantMap,
    pub p: u32,
    pub energy: f64,
    /// J_p^{-1/p}.
    pub kappa: f64,
    /// Scale making the p-Schatten norm of U exactly 1; set by `density_and_currents`.
    pub current_kappa: f64,
    pub area: f64,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    /// κ^p Tr Q(du)^p per triangle; Σ area·density = 1.
    pub density: Vec<f64>,
    pub v: Option<DiscreteOneForm>,
    pub w: Option<DiscreteOneForm>,
    pub t: Vec<Matrix2<f64>>,
    pub currents: Vec<TriangleCurrents>,
    pub residuals: Residuals,
    pub log: Vec<IterRecord>,
}

impl SolveResult {
    /// (J_p / Area)^{1/p}.
    pub fn normalized_root(&self) -> f64 {
        (self.energy / self.area).powf(1.0 / self.p as f64)
    }

    /// ((s₁^p + s₂^p)/2) averaged over area, to the 1/p: a power mean, non-decreasing in p.
    pub fn power_mean(&self) -> f64 {
        (self.energy / (2.0 * self.area)).powf(1.0 / self.p as f64)
    }

    pub fn max_s1(&self) -> f64 {
        self.s1.iter().cloned().fold(0.0, f64::max)
    }

    pub fn concentration(&self, areas: &[f64]) -> f64 {
        concentration(areas, &self.density, &self.s1, 0.9)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            p: self.p,
            energy: self.energy,
            points: self.map.points.iter().map(|x| [x.x, x.y, x.z]).collect(),
        }
    }
}

/// Minimizes J_p over ρ-equivariant maps starting from `init`.
pub fn minimize(mesh: &FundamentalMesh, rho: &SurfaceGroupRep, p: u32, init: &EquivariantMap, opts: &SolveOptions) -> Result<SolveResult> {
    energy::half_power(p)?;
    if !init.rho.same_as(rho, 1e-12) {
        return Err(Error::Solver("initial map is equivariant for a different representation".into()));
    }
    let problem = MeshEnergy::new(mesh, rho)?;
    let out = minimize_problem(&problem, init.points.clone(), p, opts)?;
    if !out.energy.is_finite() {
        return Err(Error::Solver(format!("energy diverged at p = {p}")));
    }
    let map = EquivariantMap { points: out.points, rho: rho.clone() };
    let kappa = out.energy.powf(-1.0 / p as f64);
    let kp = 1.0 / out.energy;
    let density = problem.densities(&map.points, p)?.into_iter().map(|d| d * kp).collect();
    let (s1, s2) = problem.singular_values(&map.points).into_iter().unzip();
    Ok(SolveResult {
        residuals: Residuals {
            stationarity: out.stationarity,
            equivariance: map.equivariance_defect(mesh),
            iterations: out.iterations,
            converged: out.converged,
            precision_floor: out.precision_floor,
            line_search_failed: out.line_search_failed,
            closedness_v: None,
            closedness_w: None,
        },
        map,
        p,
        energy: out.energy,
        kappa,
        current_kappa: kappa,
        area: mesh.total_area(),
        s1,
        s2,
        density,
        v: None,
        w: None,
        t: Vec::new(),
        currents: Vec::new(),
        log: out.log,
    })
}

/// Solves along an increasing schedule of even p, each stage warm-started from the last.
pub fn p_continuation(
    mesh: &FundamentalMesh,
    rho: &SurfaceGroupRep,
    schedule: &[u32],
    init: Option<EquivariantMap>,
    opts: &SolveOptions,
) -> Result<Vec<SolveResult>> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("p schedule {schedule:?} must be non-empty and increasing")));
    }
    let mut current = init.unwrap_or_else(|| EquivariantMap::from_domain(mesh, rho));
    let mut out = Vec::with_capacity(schedule.len());
    for &p in schedule {
        let r = minimize(mesh, rho, p, &current, opts)?;
        log::info!("p = {p}: J = {:.6e}, root = {:.6}, iters = {}", r.energy, r.normalized_root(), r.residuals.iterations);
        current = r.map.clone();
        out.push(r);
    }
    Ok(out)
}

/// Fills in V, W, T and per-triangle currents with closedness residuals.
pub fn density_and_currents(mesh: &FundamentalMesh, mut r: SolveResult) -> Result<SolveResult> {
    let problem = MeshEnergy::new(mesh, &r.map.rho)?;
    let chart = problem.chart(&r.map.points);
    // U is scaled by its own p-Schatten norm, which agrees with J^{-1/p} up to the
    // difference between chord and tangent-projected differentials.
    let raw: f64 = problem
        .geoms
        .iter()
        .map(|g| g.area * triangle_currents(g, g.verts.map(|v| chart[v]), 1.0, r.p).s_norm)
        .sum();
    let kappa_u = raw.powf(-1.0 / r.p as f64);
    if !kappa_u.is_finite() {
        return Err(Error::Solver(format!("current norm {raw:e} cannot be normalized")));
    }
    let cur: Vec<TriangleCurrents> = problem
        .geoms
        .iter()
        .map(|g| triangle_currents(g, g.verts.map(|v| chart[v]), kappa_u, r.p))
        .collect();
    r.current_kappa = kappa_u;
    let v = assemble_form(mesh, &problem.geoms, &cur.iter().map(|c| c.v).collect::<Vec<_>>(), &r.map.rho);
    let w = assemble_form(mesh, &problem.geoms, &cur.iter().map(|c| c.w).collect::<Vec<_>>(), &mesh.sigma);
    r.residuals.closedness_v = Some(Closedness::of(&v, mesh));
    r.residuals.closedness_w = Some(Closedness::of(&w, mesh));
    r.t = cur.iter().map(|c| c.t).collect();
    r.v = Some(v);
    r.w = Some(w);
    r.currents = cur;
    Ok(r)
}

/// Stress identity, ω ∧ W versus 2|S|, and the concentration of |S| on the top stretch set.
pub fn relation_checks(mesh: &FundamentalMesh, r: &SolveResult) -> Result<RelationReport> {
    if r.currents.len() != mesh.triangles.len() {
        return Err(Error::Solver("relation checks need density_and_currents first".into()));
    }
    let (mut dev, mut trace_term) = (0.0f64, 0.0f64);
    let (mut gap, mut mass) = (0.0, 0.0);
    for (c, (&area, &dens)) in r.currents.iter().zip(mesh.areas.iter().zip(&r.density)) {
        let (a, b) = stress_deviation(c, r.p);
        dev = dev.max(a);
        trace_term = trace_term.max(b);
        gap += area * (omega_wedge_w(c) - 2.0 * dens).abs();
        mass += area * 2.0 * dens;
    }
    Ok(RelationReport {
        p: r.p,
        stress_identity: dev,
        stress_trace_term: trace_term,
        omega_w_gap: gap / mass,
        concentration: r.concentration(&mesh.areas),
    })
}

/// Hyperboloid points of a stage, enough to warm-start a later run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Checkpoint {
    pub p: u32,
    pub energy: f64,
    pub points: Vec<[f64; 3]>,
}

impl Checkpoint {
    pub fn to_map(&self, mesh: &FundamentalMesh, rho: &SurfaceGroupRep) -> Result<EquivariantMap> {
        let pts: Vec<MinkVec> = self.points.iter().map(|p| MinkVec::new(p[0], p[1], p[2])).collect();
        for x in &pts {
            check_hyperboloid(x)?;
        }
        EquivariantMap::new(mesh, rho, pts)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TargetSpec {
    Identity,
    Twist { curve: String, t: f64 },
    Cylinder {
        a: f64,
        b: f64,
        #[serde(default = "default_cylinder_n")]
        n: usize,
    },
}

fn default_cylinder_n() -> usize {
    64
}

impl TargetSpec {
    /// Target representation for surface targets.
    pub fn representation(&self, sigma: &SurfaceGroupRep) -> Result<SurfaceGroupRep> {
        match self {
            TargetSpec::Identity => Ok(sigma.clone()),
            TargetSpec::Twist { curve, t } => twist(sigma, TwistSpec { curve: parse_curve(curve)?, t: *t }),
            TargetSpec::Cylinder { .. } => Err(Error::Config("cylinder target has no surface representation".into())),
        }
    }
}

fn default_schedule() -> Vec<u32> {
    vec![2, 4, 8, 16, 32, 64]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_level")]
    pub mesh_level: usize,
    #[serde(default = "default_schedule")]
    pub p_schedule: Vec<u32>,
    pub target: TargetSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_level() -> usize {
    3
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    20_000
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_schedule.is_empty() || self.p_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("p_schedule must be non-empty and increasing".into()));
        }
        for &p in &self.p_schedule {
            energy::half_power(p).map_err(|e| Error::Config(e.to_string()))?;
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tol must be positive and max_iter non-zero".into()));
        }
        if self.mesh_level > 6 {
            return Err(Error::Config(format!("mesh_level {} too fine", self.mesh_level)));
        }
        if let TargetSpec::Cylinder { a, b, n } = self.target {
            CylinderRig::new(a, b, n)?;
        }
        Ok(())
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::octagon_representation;
    use crate::mesh::build_octagon_mesh;

    #[test]
    fn config_roundtrip_and_validation() {
        let c: SolveConfig = serde_json::from_str(r#"{"mesh_level":2,"target":{"type":"twist","curve":"a1","t":0.5},"seed":3}"#).unwrap();
        assert_eq!(c.p_schedule, vec![2, 4, 8, 16, 32, 64]);
        c.validate().unwrap();
        let back: SolveConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let bad: SolveConfig = serde_json::from_str(r#"{"p_schedule":[4,3],"target":{"type":"identity"}}"#).unwrap();
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<SolveConfig>(r#"{"target":{"type":"nope"}}"#).is_err());
    }

    #[test]
    fn identity_stage_is_normalized() {
        let sigma = octagon_representation();
        let mesh = build_octagon_mesh(&sigma, 2).unwrap();
        let init = EquivariantMap::identity(&mesh);
        let opts = SolveOptions { max_iter: 50, ..Default::default() };
        let r = minimize(&mesh, &sigma, 4, &init, &opts).unwrap();
        assert!(r.energy <= energy_jp(&mesh, &init, 4).unwrap());
        let total: f64 = r.density.iter().zip(&mesh.areas).map(|(d, a)| d * a).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let r = density_and_currents(&mesh, r).unwrap();
        let rep = relation_checks(&mesh, &r).unwrap();
        assert!(rep.stress_identity < 1e-10, "{rep:?}");
        assert!(r.residuals.equivariance < 1e-10);
    }

    #[test]
    fn zero_form_gives_zero_cocycle() {
        let sigma = octagon_representation();
        let mesh = build_octagon_mesh(&sigma, 1).unwrap();
        let z = DiscreteOneForm::zero(&mesh, &sigma);
        let c = extract_cocycle_from_current(&z, &mesh).unwrap();
        for g in crate::fuchsian::Gen::ALL {
            assert_eq!(c.cocycle.value(g).norm(), 0.0);
        }
        assert!(c.trusted);
    }

    #[test]
    fn checkpoint_restores_map() {
        let sigma = octagon_representation();
        let mesh = build_octagon_mesh(&sigma, 1).unwrap();
        let init = EquivariantMap::identity(&mesh);
        let r = minimize(&mesh, &sigma, 2, &init, &SolveOptions { max_iter: 5, ..Default::default() }).unwrap();
        let cp: Checkpoint = serde_json::from_str(&serde_json::to_string(&r.checkpoint()).unwrap()).unwrap();
        let m = cp.to_map(&mesh, &sigma).unwrap();
        assert_eq!(m.points, r.map.points);
    }
}
