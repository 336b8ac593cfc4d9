use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stretchlab::earthquake::{twist, TwistSpec};
use stretchlab::fuchsian::{octagon_representation, Gen, SurfaceGroupRep};
use stretchlab::lorentz::{b_perp_std, b_std, exp_so21, n_hat_std, project_tangent, MinkVec};
use stretchlab::mesh::{build_octagon_mesh, FundamentalMesh};
use stretchlab::pharmonic::{
    density_and_currents, minimize, relation_checks, solver, EquivariantMap, MeshEnergy, Problem, SolveOptions,
};

fn twisted() -> SurfaceGroupRep {
    twist(&octagon_representation(), TwistSpec { curve: Gen::A1, t: 0.5 }).unwrap()
}

fn jitter(points: &[MinkVec], amp: f64, seed: u64) -> Vec<MinkVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    points
        .iter()
        .map(|x| {
            let a = b_std() * rng.gen_range(-amp..amp) + b_perp_std() * rng.gen_range(-amp..amp) + n_hat_std() * rng.gen_range(-amp..amp);
            exp_so21(&a) * x
        })
        .collect()
}

fn mesh(level: usize) -> FundamentalMesh {
    build_octagon_mesh(&octagon_representation(), level).unwrap()
}

#[test]
fn descent_and_equivariance_over_a_long_run() {
    let mesh = mesh(2);
    let rho = twisted();
    let start = EquivariantMap::from_domain(&mesh, &rho);
    let init = EquivariantMap::new(&mesh, &rho, jitter(&start.points, 0.05, 1)).unwrap();
    let opts = SolveOptions { tol: 0.0, max_iter: 10_000, log_every: 1, ..Default::default() };
    let r = minimize(&mesh, &rho, 8, &init, &opts).unwrap();
    assert!(r.log.len() > 10);
    for w in r.log.windows(2) {
        assert!(w[1].energy <= w[0].energy, "energy rose from {} to {} at {}", w[0].energy, w[1].energy, w[1].iter);
    }
    assert!(r.map.equivariance_defect(&mesh) <= 1e-10, "{}", r.map.equivariance_defect(&mesh));
}

#[test]
fn kappa_normalizes_the_current() {
    let mesh = mesh(2);
    let rho = twisted();
    for p in [2, 8, 32] {
        let r = minimize(&mesh, &rho, p, &EquivariantMap::from_domain(&mesh, &rho), &SolveOptions::default()).unwrap();
        let r = density_and_currents(&mesh, r).unwrap();
        let total: f64 = r.density.iter().zip(&mesh.areas).map(|(d, a)| d * a).sum();
        assert!((total - 1.0).abs() <= 1e-12, "p={p}: {total}");
        let schatten: f64 = r.currents.iter().zip(&mesh.areas).map(|(c, a)| c.s_norm * a).sum();
        assert!((schatten - 1.0).abs() <= 1e-12, "p={p}: {schatten}");
    }
}

#[test]
fn refinement_lowers_identity_stationarity() {
    let sigma = octagon_representation();
    let stat = |level| {
        let m = mesh(level);
        let e = MeshEnergy::new(&m, &sigma).unwrap();
        let id = EquivariantMap::identity(&m);
        let ev = e.evaluate(&id.points, 8).unwrap();
        let rg = solver::riemannian_gradient(&id.points, &ev.grad);
        solver::stationarity(&rg, &ev.diag, ev.energy, 8)
    };
    let (a, b) = (stat(2), stat(3));
    assert!(b < a, "{b} vs {a}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_central_differences(seed in 0u64..1000, p in prop::sample::select(vec![2u32, 4, 8, 16])) {
        let mesh = mesh(1);
        let rho = twisted();
        let e = MeshEnergy::new(&mesh, &rho).unwrap();
        let base = jitter(&EquivariantMap::from_domain(&mesh, &rho).points, 0.1, seed);
        let ev = e.evaluate(&base, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let i = rng.gen_range(0..base.len());
        let raw = MinkVec::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let dir: Vector3<f64> = project_tangent(&base[i], &raw).unwrap();
        let h = 1e-4;
        let at = |s: f64| {
            let mut q = base.clone();
            q[i] += dir * s;
            e.energy(&q, p).unwrap()
        };
        let fd = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        let an = ev.grad[i].dot(&dir);
        prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()) + 1e-10 * ev.energy, "fd {} vs {}", fd, an);
    }

    #[test]
    fn stress_relation_holds_off_critical_points(seed in 0u64..1000, p in prop::sample::select(vec![2u32, 4, 8, 64])) {
        let mesh = mesh(1);
        let rho = twisted();
        let pts = jitter(&EquivariantMap::from_domain(&mesh, &rho).points, 0.2, seed);
        let init = EquivariantMap::new(&mesh, &rho, pts).unwrap();
        let opts = SolveOptions { max_iter: 0, ..Default::default() };
        let r = density_and_currents(&mesh, minimize(&mesh, &rho, p, &init, &opts).unwrap()).unwrap();
        let rel = relation_checks(&mesh, &r).unwrap();
        prop_assert!(rel.stress_identity <= 1e-10, "{}", rel.stress_identity);
    }
}
