use std::f64::consts::PI;

use dsl_core::field::{make_grid, ComplexField};
use dsl_core::nls::{evolve_with_snapshots, NlsConvention};
use dsl_core::pilotwave::*;
use dsl_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sixteen_modes() -> BoxWaveFunction2D {
    BoxWaveFunction2D::equal_weight_random_phases(PI, 1.0, 4, 2024).unwrap()
}

fn rejection_sample<F: Fn(f64) -> f64>(lo: f64, hi: f64, bound: f64, density: F, m: usize, seed: u64) -> Vec<[f64; 1]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let x = lo + (hi - lo) * rng.random::<f64>();
        if rng.random::<f64>() * bound < density(x) {
            out.push([x]);
        }
    }
    out
}

#[test]
fn eigenmode_cell_means_match_exact_integrals() {
    let b = BoxWaveFunction2D::single_mode(PI, 1.0, 3, 2).unwrap();
    let grid = CoarseGrid::new([0.0, 0.0], [PI, PI], 16).unwrap();
    let quad = grid.cell_means(|p| b.psi(0.0, p).norm_sqr());
    let h = grid.cell_width(0);
    let exact: Vec<f64> = (0..grid.cell_count())
        .map(|c| {
            let o = grid.cell_origin(c);
            b.mode_cell_integral(3, 2, (o[0], o[0] + h), (o[1], o[1] + h))
        })
        .collect();
    let exact = grid.from_cell_integrals(exact).unwrap();
    for (a, e) in quad.iter().zip(&exact) {
        assert!((a - e).abs() < 1e-10, "{a} vs {e}");
    }
}

#[test]
fn single_mode_h_function_is_constant() {
    let wave = BoxWaveFunction2D::single_mode(PI, 1.0, 2, 1).unwrap();
    let cfg = RelaxationConfig { samples: 400, cells: 8, t_final: wave.period(), records: 4, tol: 1e-8, seed: 3 };
    let s = relaxation_experiment(&wave, InitialDensity::BoxMode { m: 1, k: 1 }, &cfg).unwrap();
    for h in &s.h_bar {
        assert!((h - s.h_bar[0]).abs() < 1e-12, "{:?}", s.h_bar);
    }
    assert_eq!(s.failed_fraction(), 0.0);
}

#[test]
fn equilibrium_is_preserved_by_box_dynamics() {
    let wave = sixteen_modes();
    let grid = CoarseGrid::new([0.0, 0.0], [PI, PI], 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let bound = wave.density_bound(0.0);
    let mut start = Vec::with_capacity(10_000);
    while start.len() < 10_000 {
        let p = [rng.random::<f64>() * PI, rng.random::<f64>() * PI];
        if p[0] > 0.0 && p[1] > 0.0 && rng.random::<f64>() * bound < wave.psi(0.0, &p).norm_sqr() {
            start.push(p);
        }
    }
    let ens = TrajectoryEnsemble::new(start, 0.0, 17).unwrap();
    let out = integrate_ensemble(&ens, &wave, 4.0 * PI, 1e-8).unwrap();
    let psi2 = grid.cell_means(|p| wave.psi(4.0 * PI, p).norm_sqr());
    let floor = SamplingFloor::new(&psi2, grid.cell_measure(), 10_000);
    let l1 = coarse_l1_distance(&grid.histogram(out.active_positions()), &psi2, grid.cell_measure()).unwrap();
    assert!(l1 < floor.l1, "L1 {l1} floor {}", floor.l1);
    assert_eq!(out.failed_count(), 0);
}

#[test]
fn equilibrium_is_preserved_by_nls_dynamics() {
    // K |psi|^2 with K = 1/N for a Gaussian that reshapes under the focusing flow
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let psi0 = ComplexField::from_fn(grid, 0.0, |z| Complex64::new(1.5 * (-z * z / 4.0).exp(), 0.0)).unwrap();
    let norm = psi0.norm();
    let run = evolve_with_snapshots(&psi0, 2.0, 1e-3, NlsConvention::UnitDispersion, 1000, Some(10)).unwrap();
    let wave = SnapshotWave::new(&run.snapshots, NlsConvention::UnitDispersion.guidance_mass()).unwrap();
    let m = 10_000;
    let start = rejection_sample(-12.0, 12.0, 2.25, |z| (1.5 * (-z * z / 4.0f64).exp()).powi(2), m, 5);
    let coarse = CoarseGrid::new([-12.0], [12.0], 32).unwrap();
    let mut ens = TrajectoryEnsemble::new(start, 0.0, 5).unwrap();
    for t in [0.5, 1.0, 1.5, 2.0] {
        ens = integrate_to(&ens, &wave, t, 1e-9).unwrap();
        let psi2 = coarse.cell_means(|p| wave.psi(t, p).norm_sqr() / norm);
        let floor = SamplingFloor::new(&psi2, coarse.cell_measure(), m);
        let l1 = coarse_l1_distance(&coarse.histogram(ens.active_positions()), &psi2, coarse.cell_measure()).unwrap();
        assert!(l1 < 2.0 * floor.l1, "t {t}: L1 {l1} floor {}", floor.l1);
    }
    assert!(ens.failed_fraction() < 0.01);
}

#[test]
fn accelerations_follow_quantum_force() {
    let modes = vec![
        BoxMode { m: 1, k: 1, coeff: Complex64::new(0.6, 0.0) },
        BoxMode { m: 2, k: 1, coeff: Complex64::from_polar(0.8, 0.9) },
    ];
    let wave = BoxWaveFunction2D::new(PI, 1.0, modes).unwrap();
    let h = 1e-3;
    let tc = 0.7;
    for x0 in [[1.0, 1.2], [2.1, 1.9], [0.8, 2.4]] {
        let path = trajectory(x0, &wave, 0.0, &[tc - h, tc, tc + h], 1e-13).unwrap();
        let x = path[1];
        let e = 1e-4;
        for d in 0..2 {
            let acc = (path[2][d] - 2.0 * path[1][d] + path[0][d]) / (h * h);
            let (mut xp, mut xm) = (x, x);
            xp[d] += e;
            xm[d] -= e;
            let force = -(quantum_potential_at(&wave, tc, &xp).unwrap() - quantum_potential_at(&wave, tc, &xm).unwrap()) / (2.0 * e);
            assert!((acc - force).abs() < 1e-4 * (1.0 + force.abs()), "x0 {x0:?} axis {d}: {acc} vs {force}");
        }
    }
}

#[test]
fn continuity_holds_for_free_branches() {
    let wave = FreeGaussianBranches::new(
        vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        vec![-8.0, 8.0],
        1.0,
        1.0,
    )
    .unwrap();
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let snap = |t: f64| ComplexField::from_fn(grid, t, |z| wave.psi(t, &[z])).unwrap();
    let residual = |dt: f64| continuity_residual(&snap(1.0 - dt), &snap(1.0), &snap(1.0 + dt), dt, 1.0).unwrap();
    let (coarse, fine) = (residual(1e-2), residual(5e-3));
    assert!(coarse < 1e-4);
    assert!((coarse / fine - 4.0).abs() < 0.2, "ratio {}", coarse / fine);
}

#[test]
fn branch_frequencies_follow_weights() {
    let c = [0.3f64.sqrt(), 0.7f64.sqrt()].map(|v| Complex64::new(v, 0.0));
    let out = branch_experiment(&BranchSetup::two_branch(c[0], c[1], 4000, 8)).unwrap();
    assert_eq!(out.crossings, 0);
    assert_eq!(out.failed, 0);
    for i in 0..2 {
        assert!((out.frequencies[i] - out.weights[i]).abs() < 3.0 * out.standard_errors[i]);
    }
}

#[test]
fn symmetric_branches_split_evenly() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let out = branch_experiment(&BranchSetup::two_branch(Complex64::new(s, 0.0), Complex64::new(0.0, s), 4000, 9)).unwrap();
    assert_eq!(out.crossings, 0);
    assert!((out.frequencies[0] - out.frequencies[1]).abs() < 3.0 * 2.0 * out.standard_errors[0]);
}

#[test]
fn nls_branches_trap_particles() {
    let c = [0.3f64.sqrt(), 0.7f64.sqrt()].map(|v| Complex64::new(v, 0.0));
    let mut setup = BranchSetup::two_branch(c[0], c[1], 2000, 10);
    setup.dynamics = BranchDynamics::Nls { convention: NlsConvention::UnitDispersion, amplitude: 1.0, dt: 1e-3 };
    setup.horizon = 1.0;
    let out = branch_experiment(&setup).unwrap();
    assert_eq!(out.crossings, 0);
    for i in 0..2 {
        assert!((out.frequencies[i] - out.weights[i]).abs() < 3.0 * out.standard_errors[i]);
    }
}

#[test]
fn runs_are_reproducible() {
    let c = [0.3f64.sqrt(), 0.7f64.sqrt()].map(|v| Complex64::new(v, 0.0));
    let setup = BranchSetup::two_branch(c[0], c[1], 500, 4);
    assert_eq!(branch_experiment(&setup).unwrap(), branch_experiment(&setup).unwrap());
}
