use std::path::Path;

use serde::{Deserialize, Serialize};
use stretchlab::fuchsian::{k_bound_enumerated, octagon_representation, KBound};
use stretchlab::lorentz::MinkVec;
use stretchlab::mesh::{build_octagon_mesh, write_mesh_json};
use stretchlab::pharmonic::{
    density_and_currents, minimize, relation_checks, Checkpoint, CylinderRig, EquivariantMap, RelationReport, Residuals,
    SolveConfig, TargetSpec,
};

use crate::envelope::{emit, ensure_dir, load, write_json, CliResult, Failure};

/// Word length used for the K lower bound in summaries.
const K_WORDS: usize = 6;

#[derive(Debug, Serialize, Deserialize)]
pub struct StageSummary {
    pub p: u32,
    pub energy: f64,
    pub kappa: f64,
    /// (J_p / Area)^{1/p}; for the cylinder, Area is the domain length a.
    pub normalized_root: f64,
    /// (J_p / (2 Area))^{1/p} on surfaces, equal to normalized_root on the cylinder.
    pub power_mean: f64,
    pub max_s1: f64,
    pub min_s1: f64,
    pub residuals: Residuals,
    pub relations: Option<RelationReport>,
    pub csv: String,
    pub checkpoint: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveSummary {
    pub config: SolveConfig,
    pub target_label: String,
    pub triangles: usize,
    pub vertex_classes: usize,
    pub area: f64,
    pub k_lb: Option<KBound>,
    pub stages: Vec<StageSummary>,
    pub healthy: bool,
}

fn read_checkpoint(path: &Path) -> CliResult<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map(Some).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, rows: impl Iterator<Item = (f64, f64, f64, f64)>) -> CliResult<()> {
    let wrap = |e: csv::Error| Failure::Numeric(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(["id", "area", "s1", "s2", "density"]).map_err(wrap)?;
    for (i, (a, s1, s2, d)) in rows.enumerate() {
        w.serialize((i, a, s1, s2, d)).map_err(wrap)?;
    }
    w.flush().map_err(|e| Failure::Numeric(e.to_string()))
}

pub fn solve(config: &Path, out: &Path, resume: bool) -> CliResult<()> {
    let cfg = load::<SolveConfig>(config)?;
    cfg.config.validate()?;
    ensure_dir(out)?;
    let summary = match cfg.config.target {
        TargetSpec::Cylinder { a, b, n } => solve_cylinder(&cfg.config, CylinderRig::new(a, b, n)?, out, resume)?,
        _ => solve_surface(&cfg.config, out, resume)?,
    };
    let healthy = summary.healthy;
    emit(out, "solve", &cfg.hash, healthy, summary, || "a stage stopped before convergence".into()).map_err(|f| match f {
        Failure::Threshold(m) => Failure::Numeric(m),
        other => other,
    })
}

fn solve_surface(cfg: &SolveConfig, out: &Path, resume: bool) -> CliResult<SolveSummary> {
    let sigma = octagon_representation();
    let rho = cfg.target.representation(&sigma)?;
    let mesh = build_octagon_mesh(&sigma, cfg.mesh_level)?;
    write_mesh_json(&out.join("mesh.json"), &mesh)?;
    let opts = cfg.options();
    let mut current = EquivariantMap::from_domain(&mesh, &rho);
    let mut stages = Vec::new();
    for &p in &cfg.p_schedule {
        let cp_name = format!("checkpoint_p{p}.json");
        if resume {
            if let Some(cp) = read_checkpoint(&out.join(&cp_name))? {
                current = cp.to_map(&mesh, &rho)?;
            }
        }
        let r = density_and_currents(&mesh, minimize(&mesh, &rho, p, &current, &opts)?)?;
        let rel = relation_checks(&mesh, &r)?;
        let csv_name = format!("stage_p{p}.csv");
        write_csv(
            &out.join(&csv_name),
            (0..r.s1.len()).map(|t| (mesh.areas[t], r.s1[t], r.s2[t], r.density[t])),
        )?;
        write_json(&out.join(&cp_name), &r.checkpoint())?;
        stages.push(StageSummary {
            p,
            energy: r.energy,
            kappa: r.kappa,
            normalized_root: r.normalized_root(),
            power_mean: r.power_mean(),
            max_s1: r.max_s1(),
            min_s1: r.s1.iter().cloned().fold(f64::INFINITY, f64::min),
            residuals: r.residuals.clone(),
            relations: Some(rel),
            csv: csv_name,
            checkpoint: cp_name,
        });
        current = r.map;
    }
    Ok(SolveSummary {
        config: cfg.clone(),
        target_label: rho.label.clone(),
        triangles: mesh.triangles.len(),
        vertex_classes: mesh.n_classes(),
        area: mesh.total_area(),
        k_lb: Some(k_bound_enumerated(K_WORDS, &sigma, &rho)),
        healthy: stages.iter().all(|s| s.residuals.healthy()),
        stages,
    })
}

fn solve_cylinder(cfg: &SolveConfig, rig: CylinderRig, out: &Path, resume: bool) -> CliResult<SolveSummary> {
    let opts = cfg.options();
    let mut current = rig.perturbed_identity(0.05, cfg.seed);
    let mut stages = Vec::new();
    for &p in &cfg.p_schedule {
        let cp_name = format!("checkpoint_p{p}.json");
        if resume {
            if let Some(cp) = read_checkpoint(&out.join(&cp_name))? {
                if cp.points.len() != rig.n {
                    return Err(Failure::Config(format!("{cp_name} has {} points, rig has {}", cp.points.len(), rig.n)));
                }
                current = cp.points.iter().map(|q| MinkVec::new(q[0], q[1], q[2])).collect();
            }
        }
        let o = rig.minimize(current.clone(), p, &opts)?;
        let stretch = rig.stretches(&o.points);
        let h = rig.spacing();
        let csv_name = format!("stage_p{p}.csv");
        write_csv(
            &out.join(&csv_name),
            stretch.iter().map(|&s| (h, s, 0.0, s.powi(p as i32) / o.energy)),
        )?;
        let cp = Checkpoint { p, energy: o.energy, points: o.points.iter().map(|x| [x.x, x.y, x.z]).collect() };
        write_json(&out.join(&cp_name), &cp)?;
        let root = rig.normalized_root(o.energy, p);
        stages.push(StageSummary {
            p,
            energy: o.energy,
            kappa: o.energy.powf(-1.0 / p as f64),
            normalized_root: root,
            power_mean: root,
            max_s1: stretch.iter().cloned().fold(0.0, f64::max),
            min_s1: stretch.iter().cloned().fold(f64::INFINITY, f64::min),
            residuals: Residuals {
                stationarity: o.stationarity,
                equivariance: 0.0,
                iterations: o.iterations,
                converged: o.converged,
                precision_floor: o.precision_floor,
                line_search_failed: o.line_search_failed,
                closedness_v: None,
                closedness_w: None,
            },
            relations: None,
            csv: csv_name,
            checkpoint: cp_name,
        });
        current = o.points;
    }
    Ok(SolveSummary {
        config: cfg.clone(),
        target_label: format!("cylinder a={} b={}", rig.a, rig.b),
        triangles: 0,
        vertex_classes: rig.n,
        area: rig.a,
        k_lb: None,
        healthy: stages.iter().all(|s| s.residuals.healthy()),
        stages,
    })
}

#[derive(Debug, Serialize)]
pub struct TrendRow {
    pub p: u32,
    pub normalized_root: f64,
    pub power_mean: f64,
    pub max_s1: f64,
    pub concentration: Option<f64>,
    pub omega_w_gap: Option<f64>,
    /// normalized_root − K_lb.
    pub k_margin: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TrendTable {
    pub target: String,
    pub rows: Vec<TrendRow>,
    /// Power means non-decreasing in p, up to 1e−6 relative.
    pub power_mean_monotone: bool,
    /// Concentration at the last stage above the first stage with p ≥ 8.
    pub concentration_grows: Option<bool>,
    /// Every stage at or above K_lb − 0.02.
    pub above_k_lb: Option<bool>,
    pub pass: bool,
}

/// Trend checks over the `result` of a solve envelope.
pub fn trend_table(envelope: &serde_json::Value) -> Result<TrendTable, String> {
    let summary: SolveSummary =
        serde_json::from_value(envelope.get("result").cloned().ok_or("missing `result`")?).map_err(|e| e.to_string())?;
    let k = summary.k_lb.as_ref().map(|k| k.value);
    let rows: Vec<TrendRow> = summary
        .stages
        .iter()
        .map(|s| TrendRow {
            p: s.p,
            normalized_root: s.normalized_root,
            power_mean: s.power_mean,
            max_s1: s.max_s1,
            concentration: s.relations.as_ref().map(|r| r.concentration),
            omega_w_gap: s.relations.as_ref().map(|r| r.omega_w_gap),
            k_margin: k.map(|k| s.normalized_root - k),
        })
        .collect();
    let power_mean_monotone = rows.windows(2).all(|w| w[1].power_mean >= w[0].power_mean * (1.0 - 1e-6));
    let conc: Vec<(u32, f64)> = rows.iter().filter(|r| r.p >= 8).filter_map(|r| r.concentration.map(|c| (r.p, c))).collect();
    let concentration_grows = (conc.len() >= 2).then(|| conc.last().unwrap().1 > conc[0].1);
    let above_k_lb = k.map(|_| rows.iter().all(|r| r.k_margin.unwrap() >= -0.02));
    let pass = power_mean_monotone && concentration_grows.unwrap_or(true) && above_k_lb.unwrap_or(true);
    Ok(TrendTable {
        target: summary.target_label,
        rows,
        power_mean_monotone,
        concentration_grows,
        above_k_lb,
        pass,
    })
}
