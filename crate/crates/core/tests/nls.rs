use dsl_core::field::{field_distance, make_grid, observables, ComplexField, Metric};
use dsl_core::nls::*;
use dsl_core::resonance::{basin_integrals, hump_analysis};
use dsl_core::Complex64;

#[test]
fn colliding_solitons_keep_their_norms() {
    let grid = make_grid(2048, -60.0, 60.0).unwrap();
    let left = SolitonParams::new(1.0, 10.0, 1.0).unwrap();
    let right = SolitonParams::new(0.7, -7.0, -1.0).unwrap();
    let psi0 = ComplexField::from_fn(grid, 0.0, |z| left.value(z, 0.0) + right.value(z, 0.0)).unwrap();
    let run = evolve(&psi0, 20.0, 1e-3, NlsConvention::UnitDispersion, 1000).unwrap();
    assert!(run.norm_drift < 1e-12);
    let density = run.final_field.density();
    let humps = hump_analysis(&density, &grid, 0.05, run.final_field.time()).unwrap();
    assert_eq!(humps.len(), 2, "{humps:?}");
    let shares = basin_integrals(&density, &grid, &humps);
    // the faster-moving lambda = 1 soliton ends on the right
    assert!((shares[1] / 4.0 - 1.0).abs() < 0.01, "{shares:?}");
    assert!((shares[0] / 2.8 - 1.0).abs() < 0.01, "{shares:?}");
}

#[test]
fn boosting_commutes_with_evolution() {
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let v = 1.5;
    let moving = soliton_exact(&SolitonParams::new(1.0, 0.0, v).unwrap(), &grid, 0.0);
    let still = soliton_exact(&SolitonParams::at_rest(1.0).unwrap(), &grid, 0.0);
    let a = evolve(&moving, 1.0, 1e-3, NlsConvention::UnitDispersion, 1000).unwrap().final_field;
    let b = evolve(&still, 1.0, 1e-3, NlsConvention::UnitDispersion, 1000).unwrap().final_field;
    // Galilean map psi(z, t) -> psi(z - v t, t) exp(i(v z/2 - v^2 t/4))
    let t = 1.0;
    let shifted = b.interpolate(&grid.points().map(|z| z - v * t).collect::<Vec<_>>());
    let boosted = ComplexField::new(
        grid,
        grid.points()
            .zip(shifted)
            .map(|(z, c)| c * Complex64::from_polar(1.0, 0.5 * v * z - 0.25 * v * v * t))
            .collect(),
        t,
    )
    .unwrap();
    assert!(field_distance(&a, &boosted, Metric::Linf).unwrap() < 1e-8);
}

#[test]
fn centre_moves_with_p_over_n() {
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let psi0 = soliton_exact(&SolitonParams::new(0.8, 4.0, -0.6).unwrap(), &grid, 0.0);
    let run = evolve(&psi0, 2.0, 1e-3, NlsConvention::UnitDispersion, 100).unwrap();
    for w in run.records.windows(3) {
        let dr = (w[2].obs.center_r.unwrap() - w[0].obs.center_r.unwrap()) / (w[2].time - w[0].time);
        let pn = w[1].obs.momentum_p / w[1].obs.norm_n;
        assert!((dr - pn).abs() < 1e-6, "{dr} vs {pn}");
    }
}

#[test]
fn gaussian_pulse_conserves_norm() {
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let psi0 = ComplexField::from_fn(grid, 0.0, |z| Complex64::new(2.0 * (-z * z).exp(), 0.0)).unwrap();
    let run = evolve(&psi0, 5.0, 1e-3, NlsConvention::UnitDispersion, 100).unwrap();
    assert!(run.norm_drift < 1e-12);
    let n0 = observables(&psi0, 1.0).norm_n;
    assert!((n0 - 4.0 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
    // a bound hump survives at the origin
    assert!(run.final_field.values()[512].norm() > 1.0);
}

#[test]
fn energy_drift_shrinks_faster_than_dt_squared() {
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let psi0 = soliton_exact(&SolitonParams::new(1.0, 0.0, 0.5).unwrap(), &grid, 0.0);
    let coarse = evolve(&psi0, 2.0, 1e-3, NlsConvention::UnitDispersion, 10).unwrap().energy_drift;
    let fine = evolve(&psi0, 2.0, 5e-4, NlsConvention::UnitDispersion, 10).unwrap().energy_drift;
    assert!(coarse / fine > 4.0, "ratio {}", coarse / fine);
}

#[test]
fn self_focusing_soliton_is_stationary() {
    // i psi_xi + psi_tt/2 + |psi|^2 psi = 0 has sech(tau) e^{i xi/2}
    let grid = make_grid(1024, -40.0, 40.0).unwrap();
    let psi0 = ComplexField::from_fn(grid, 0.0, |t| Complex64::new(1.0 / t.cosh(), 0.0)).unwrap();
    let run = evolve(&psi0, 2.0, 1e-3, NlsConvention::SelfFocusing, 100).unwrap();
    let exact = ComplexField::from_fn(grid, 2.0, |t| Complex64::from_polar(1.0 / t.cosh(), 1.0)).unwrap();
    assert!(field_distance(&run.final_field, &exact, Metric::Linf).unwrap() < 1e-6);
}
