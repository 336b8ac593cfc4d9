use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stretchlab::cocycle::coboundary;
use stretchlab::earthquake::{duality_table, half_pairing, wolpert_reciprocity, DualityReport, WolpertReport};
use stretchlab::fuchsian::{k_bound_enumerated, octagon_representation, translation_length, Gen, KBound, SurfaceGroupRep, Word};
use stretchlab::lamination::{length, mass, mass_by_duality, standard_measure, WeightedMulticurve};
use stretchlab::lorentz::{b_perp_std, b_std, n_hat_std};
use stretchlab::pharmonic::TargetSpec;
use stretchlab::tol::FD_STEP;

use crate::envelope::{emit, ensure_dir, load, write_json, CliResult, Failure};

fn identity() -> TargetSpec {
    TargetSpec::Identity
}

fn target_rep(t: &TargetSpec) -> CliResult<(SurfaceGroupRep, SurfaceGroupRep)> {
    let sigma = octagon_representation();
    let rho = t.representation(&sigma)?;
    Ok((sigma, rho))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepConfig {
    #[serde(default = "identity")]
    target: TargetSpec,
}

#[derive(Serialize)]
struct RepReport {
    label: String,
    relator_residual: f64,
    generator_lengths: Vec<(Gen, f64)>,
    files: Vec<String>,
}

pub fn rep(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<RepConfig>(config)?;
    ensure_dir(out)?;
    let (sigma, rho) = target_rep(&cfg.config.target)?;
    write_json(&out.join("sigma.json"), &sigma)?;
    write_json(&out.join("rho.json"), &rho)?;
    let lengths = Gen::ALL
        .iter()
        .map(|&g| Ok((g, translation_length(rho.generator(g))?)))
        .collect::<stretchlab::Result<Vec<_>>>()?;
    let residual = rho.relator_residual();
    let pass = residual <= stretchlab::tol::RELATOR;
    let report = RepReport {
        label: rho.label.clone(),
        relator_residual: residual,
        generator_lengths: lengths,
        files: vec!["sigma.json".into(), "rho.json".into()],
    };
    emit(out, "rep", &cfg.hash, pass, report, || format!("relator residual {residual:.3e}"))
}

fn generator_words() -> Vec<Word> {
    Gen::ALL.iter().map(|&g| Word::gen(g)).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LengthConfig {
    #[serde(default = "identity")]
    target: TargetSpec,
    #[serde(default = "generator_words")]
    words: Vec<Word>,
}

#[derive(Serialize)]
struct LengthRow {
    word: Word,
    length_sigma: f64,
    length_rho: f64,
    ratio: f64,
}

pub fn length_cmd(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<LengthConfig>(config)?;
    ensure_dir(out)?;
    let (sigma, rho) = target_rep(&cfg.config.target)?;
    let rows = cfg
        .config
        .words
        .iter()
        .map(|w| {
            let ls = translation_length(&sigma.evaluate(w))?;
            let lr = translation_length(&rho.evaluate(w))?;
            Ok(LengthRow { word: w.clone(), length_sigma: ls, length_rho: lr, ratio: lr / ls })
        })
        .collect::<stretchlab::Result<Vec<_>>>()?;
    emit(out, "length", &cfg.hash, true, rows, String::new)
}

fn default_max_len() -> usize {
    6
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KboundConfig {
    #[serde(default = "identity")]
    target: TargetSpec,
    #[serde(default = "default_max_len")]
    max_len: usize,
}

pub fn kbound(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<KboundConfig>(config)?;
    if cfg.config.max_len == 0 || cfg.config.max_len > 10 {
        return Err(Failure::Config(format!("max_len {} outside 1..=10", cfg.config.max_len)));
    }
    ensure_dir(out)?;
    let (sigma, rho) = target_rep(&cfg.config.target)?;
    let k: KBound = k_bound_enumerated(cfg.config.max_len, &sigma, &rho);
    emit(out, "kbound", &cfg.hash, true, k, String::new)
}

fn fd_step() -> f64 {
    FD_STEP
}
fn duality_threshold() -> f64 {
    1e-6
}
fn coboundary_threshold() -> f64 {
    1e-10
}
fn default_samples() -> usize {
    8
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DualityConfig {
    #[serde(default = "fd_step")]
    step: f64,
    #[serde(default = "duality_threshold")]
    threshold: f64,
    #[serde(default = "coboundary_threshold")]
    coboundary_threshold: f64,
    #[serde(default = "default_samples")]
    coboundary_samples: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct DualityRow {
    measured: Gen,
    twisted: Gen,
    #[serde(flatten)]
    report: DualityReport,
}

#[derive(Serialize)]
struct DualityResult {
    cases: Vec<DualityRow>,
    max_rel_err: f64,
    max_coboundary_pairing: f64,
}

pub fn duality(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<DualityConfig>(config)?;
    let c = &cfg.config;
    if !(c.step > 0.0) {
        return Err(Failure::Config("step must be positive".into()));
    }
    ensure_dir(out)?;
    let sigma = octagon_representation();
    let cases: Vec<DualityRow> = duality_table(&sigma, c.step)?
        .into_iter()
        .map(|(measured, twisted, report)| DualityRow { measured, twisted, report })
        .collect();
    let max_rel_err = cases.iter().map(|r| r.report.rel_err).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut max_cob = 0.0f64;
    for _ in 0..c.coboundary_samples {
        let a0 = b_std() * rng.gen_range(-1.0..1.0) + b_perp_std() * rng.gen_range(-1.0..1.0) + n_hat_std() * rng.gen_range(-1.0..1.0);
        let xi = coboundary(&a0, &sigma);
        for w in generator_words() {
            let mc = WeightedMulticurve::single(w, 1.0)?;
            max_cob = max_cob.max(half_pairing(&sigma, &mc, &xi)?.abs());
        }
    }
    let pass = max_rel_err <= c.threshold && max_cob <= c.coboundary_threshold;
    let res = DualityResult { cases, max_rel_err, max_coboundary_pairing: max_cob };
    emit(out, "duality", &cfg.hash, pass, res, || {
        format!("duality rel err {max_rel_err:.3e}, coboundary pairing {max_cob:.3e}")
    })
}

fn mass_threshold() -> f64 {
    1e-12
}
fn mass_duality_threshold() -> f64 {
    1e-9
}
fn mass_samples() -> usize {
    64
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MassConfig {
    #[serde(default)]
    multicurves: Vec<WeightedMulticurve>,
    /// Additional random multicurves on the handle generators.
    #[serde(default)]
    random: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "mass_samples")]
    samples: usize,
    #[serde(default = "mass_threshold")]
    threshold: f64,
    #[serde(default = "mass_duality_threshold")]
    duality_threshold: f64,
}

#[derive(Serialize)]
struct MassRow {
    multicurve: WeightedMulticurve,
    mass: f64,
    twice_length: f64,
    abs_err: f64,
    duality_optimal: f64,
    duality_sampled_max: f64,
    duality_gap: f64,
}

/// Random non-empty subset of the handle generators with weights in (0.1, 3).
pub fn random_multicurve(rng: &mut ChaCha8Rng) -> stretchlab::Result<WeightedMulticurve> {
    let mut curves = Vec::new();
    while curves.is_empty() {
        for g in Gen::ALL {
            if rng.gen_bool(0.5) {
                curves.push((Word::gen(g), rng.gen_range(0.1..3.0)));
            }
        }
    }
    WeightedMulticurve::new(curves)
}

pub fn mass_cmd(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<MassConfig>(config)?;
    let c = &cfg.config;
    ensure_dir(out)?;
    let sigma = octagon_representation();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut all = c.multicurves.clone();
    for _ in 0..c.random {
        all.push(random_multicurve(&mut rng)?);
    }
    let mut rows = Vec::new();
    for mc in all {
        mc.validate()?;
        let m = standard_measure(&mc, &sigma)?;
        let ms = mass(&m);
        let two_l = 2.0 * length(&mc, &sigma)?;
        let d = mass_by_duality(&m, c.samples, rng.gen());
        rows.push(MassRow {
            abs_err: (ms - two_l).abs(),
            duality_gap: (d.optimal - ms).abs(),
            duality_optimal: d.optimal,
            duality_sampled_max: d.sampled_max,
            multicurve: mc,
            mass: ms,
            twice_length: two_l,
        });
    }
    let worst = rows.iter().map(|r| r.abs_err / (1.0 + r.twice_length)).fold(0.0, f64::max);
    let worst_dual = rows.iter().map(|r| r.duality_gap / (1.0 + r.mass)).fold(0.0, f64::max);
    let over = rows.iter().any(|r| r.duality_sampled_max > r.mass * (1.0 + 1e-12));
    let pass = worst <= c.threshold && worst_dual <= c.duality_threshold && !over;
    emit(out, "mass", &cfg.hash, pass, rows, || {
        format!("mass vs 2·length {worst:.3e}, duality gap {worst_dual:.3e}, sampled form above mass: {over}")
    })
}


fn wolpert_threshold() -> f64 {
    1e-5
}

fn all_pairs() -> Vec<(Gen, Gen)> {
    let g = Gen::ALL;
    (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (g[i], g[j]))).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WolpertConfig {
    #[serde(default = "all_pairs")]
    pairs: Vec<(Gen, Gen)>,
    #[serde(default = "fd_step")]
    step: f64,
    #[serde(default = "wolpert_threshold")]
    threshold: f64,
}

pub fn wolpert(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<WolpertConfig>(config)?;
    let c = &cfg.config;
    ensure_dir(out)?;
    let sigma = octagon_representation();
    let rows = c
        .pairs
        .iter()
        .map(|&(a, b)| wolpert_reciprocity(&sigma, a, b, c.step))
        .collect::<stretchlab::Result<Vec<WolpertReport>>>()?;
    let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    emit(out, "wolpert", &cfg.hash, worst <= c.threshold, rows, || format!("reciprocity defect {worst:.3e}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportConfig {
    /// Path to a `solve.json` written by the solve command.
    summary: PathBuf,
}

pub fn report(config: &Path, out: &Path) -> CliResult<()> {
    let cfg = load::<ReportConfig>(config)?;
    ensure_dir(out)?;
    let path = if cfg.config.summary.is_relative() {
        config.parent().unwrap_or(Path::new(".")).join(&cfg.config.summary)
    } else {
        cfg.config.summary.clone()
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let summary: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let table = crate::solve::trend_table(&summary).map_err(Failure::Config)?;
    let pass = table.pass;
    emit(out, "report", &cfg.hash, pass, table, || "trend checks failed".into())
}
