//! Preconditioned Riemannian gradient descent on a product of hyperboloids.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lorentz::{mink_dot, normalize_hyperboloid, project_tangent_unchecked, MinkVec};

/// Energy, Euclidean gradient in ambient coordinates and a positive diagonal preconditioner.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: f64,
    pub grad: Vec<Vector3<f64>>,
    pub diag: Vec<f64>,
}

/// An energy on n points of the hyperboloid.
pub trait Problem: Sync {
    fn len(&self) -> usize;
    fn energy(&self, pts: &[MinkVec], p: u32) -> Result<f64>;
    fn evaluate(&self, pts: &[MinkVec], p: u32) -> Result<Evaluation>;
    /// Largest hyperbolic displacement of a single point per step.
    fn step_cap(&self) -> f64 {
        0.1
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub log_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 20_000, armijo: 1e-4, max_backtracks: 50, log_every: 25 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub energy: f64,
    pub stationarity: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub points: Vec<MinkVec>,
    pub energy: f64,
    pub stationarity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stopped because the predicted decrease fell below the rounding level of the energy.
    pub precision_floor: bool,
    pub line_search_failed: bool,
    pub log: Vec<IterRecord>,
}

/// Riemannian gradient P_U(J g) at each point.
pub fn riemannian_gradient(pts: &[MinkVec], grad: &[Vector3<f64>]) -> Vec<MinkVec> {
    pts.iter()
        .zip(grad)
        .map(|(u, g)| project_tangent_unchecked(u, &MinkVec::new(g.x, g.y, -g.z)))
        .collect()
}

/// sqrt(Σ |grad_c|² / d_c / (p E)): scale-free stationarity used as stopping test.
pub fn stationarity(rg: &[MinkVec], diag: &[f64], energy: f64, p: u32) -> f64 {
    let s: f64 = rg
        .iter()
        .zip(diag)
        .map(|(g, d)| mink_dot(g, g).max(0.0) / d.max(f64::MIN_POSITIVE))
        .sum();
    (s / (p as f64 * energy).max(f64::MIN_POSITIVE)).sqrt()
}

fn retract(pts: &[MinkVec], dir: &[MinkVec], a: f64) -> Vec<MinkVec> {
    pts.iter().zip(dir).map(|(u, d)| normalize_hyperboloid(&(u + d * a))).collect()
}

/// Minimizes `problem` from `init`. Accepted steps never increase the energy; when the line
/// search fails the best iterate is returned with `line_search_failed` set.
pub fn minimize_problem<P: Problem + ?Sized>(problem: &P, init: Vec<MinkVec>, p: u32, opts: &SolveOptions) -> Result<Outcome> {
    let mut x = init;
    let mut ev = problem.evaluate(&x, p)?;
    let mut rg = riemannian_gradient(&x, &ev.grad);
    let mut alpha: f64 = 1.0;
    let mut log = Vec::new();
    let mut converged = false;
    let mut failed = false;
    let mut floor = false;
    let mut iterations = 0;
    let mut stat = stationarity(&rg, &ev.diag, ev.energy, p);
    let cap = problem.step_cap();
    for it in 0..opts.max_iter {
        iterations = it;
        if stat <= opts.tol {
            converged = true;
            break;
        }
        let dir: Vec<MinkVec> = rg.iter().zip(&ev.diag).map(|(g, d)| -g / d.max(f64::MIN_POSITIVE)).collect();
        let slope: f64 = rg.iter().zip(&dir).map(|(g, d)| mink_dot(g, d)).sum();
        let longest = dir.iter().map(|d| mink_dot(d, d).max(0.0).sqrt()).fold(0.0, f64::max);
        let mut a = alpha.min(cap / longest.max(f64::MIN_POSITIVE));
        if a * slope.abs() <= 1e3 * f64::EPSILON * ev.energy.abs() {
            floor = true;
            break;
        }
        let mut accepted = None;
        let mut last_change = f64::INFINITY;
        for _ in 0..opts.max_backtracks {
            let trial = retract(&x, &dir, a);
            let e = problem.energy(&trial, p)?;
            if e <= ev.energy + opts.armijo * a * slope {
                accepted = Some(trial);
                break;
            }
            last_change = (e - ev.energy).abs();
            a *= 0.5;
        }
        let Some(trial) = accepted else {
            failed = true;
            // tiny steps that change the energy only at rounding level: nothing left to gain
            floor = last_change <= 1e3 * f64::EPSILON * ev.energy.abs();
            break;
        };
        let next = problem.evaluate(&trial, p)?;
        let next_rg = riemannian_gradient(&trial, &next.grad);
        let (mut sds, mut sy) = (0.0, 0.0);
        for c in 0..x.len() {
            let s = trial[c] - x[c];
            let y = next_rg[c] - project_tangent_unchecked(&trial[c], &rg[c]);
            sds += next.diag[c] * mink_dot(&s, &s);
            sy += mink_dot(&s, &y);
        }
        alpha = if sy > 0.0 { (sds / sy).clamp(1e-8, 1e8) } else { (2.0 * a).min(1e8) };
        x = trial;
        ev = next;
        rg = next_rg;
        stat = stationarity(&rg, &ev.diag, ev.energy, p);
        if opts.log_every > 0 && it % opts.log_every == 0 {
            log.push(IterRecord { iter: it, energy: ev.energy, stationarity: stat, step: a });
        }
        iterations = it + 1;
    }
    if stat <= opts.tol {
        converged = true;
    }
    log.push(IterRecord { iter: iterations, energy: ev.energy, stationarity: stat, step: 0.0 });
    Ok(Outcome {
        points: x,
        energy: ev.energy,
        stationarity: stat,
        iterations,
        converged,
        precision_floor: floor,
        line_search_failed: failed,
        log,
    })
}
