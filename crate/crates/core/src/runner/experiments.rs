use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::config::*;
use super::output::OutputSet;
use crate::born::{self, BipartiteState, CMatrix};
use crate::derrick::{self, DilationFamily};
use crate::field::{make_grid, shape_distance, ComplexField, Metric};
use crate::nls::{self, NlsConvention, SolitonParams};
use crate::pilotwave::{self, BoxWaveFunction2D, BranchDynamics, BranchSetup, InitialDensity, RelaxationConfig, SampleStatus};
use crate::resonance::{self, ResonanceParams};
use crate::sn::{self, RadialField, RadialGrid, SnParams};
use crate::Result;

pub(super) type Metrics = Map<String, Value>;

fn metrics(value: Value) -> Metrics {
    match value {
        Value::Object(m) => m,
        _ => unreachable!("metrics are built from object literals"),
    }
}

fn convention(tag: &str) -> NlsConvention {
    match tag {
        "self-focusing" => NlsConvention::SelfFocusing,
        _ => NlsConvention::UnitDispersion,
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

pub(super) fn nls_run(p: &NlsRunParams, out: &mut OutputSet) -> Result<Metrics> {
    let grid = make_grid(p.n, p.z_min, p.z_max)?;
    let conv = convention(&p.convention);
    let soliton = SolitonParams::new(p.lambda, p.delta, p.boost_v)?;
    let psi0 = match p.profile.as_str() {
        "soliton" => nls::soliton_exact(&soliton, &grid, 0.0),
        _ => ComplexField::from_fn(grid, 0.0, |z| Complex64::from_polar(p.amplitude * (-z * z).exp(), 0.5 * p.boost_v * z))?,
    };
    let run = nls::evolve(&psi0, p.t_final, p.dt, conv, p.record_every)?;

    let rows = run.records.iter().map(|r| {
        let o = &r.obs;
        vec![r.time.into(), o.norm_n.into(), o.momentum_p.into(), o.kinetic_ek.into(), o.potential_ep.into(), o.energy_e.into(), o.center_r.into()]
    });
    out.csv("observables.csv", &["time", "N", "P", "E_K", "E_P", "E", "R"], rows)?;
    run.final_field.save_snapshot(&out.path_for("final_field.dat"))?;

    // The closed-form soliton solves the unit-dispersion equation only.
    let shape_error = if p.profile == "soliton" && conv == NlsConvention::UnitDispersion {
        let exact = nls::soliton_exact(&soliton, &grid, run.final_field.time());
        Some(shape_distance(&run.final_field, &exact, Metric::Linf)?)
    } else {
        None
    };
    let last = run.records.last().expect("evolve records the initial state");
    Ok(metrics(json!({
        "norm_drift": run.norm_drift,
        "energy_drift": run.energy_drift,
        "shape_error_linf": shape_error,
        "final_time": last.time,
        "final_norm": last.obs.norm_n,
        "final_energy": last.obs.energy_e,
    })))
}

pub(super) fn derrick_scan(p: &DerrickScanParams, out: &mut OutputSet) -> Result<Metrics> {
    let grid = make_grid(p.n, p.z_min, p.z_max)?;
    let soliton = SolitonParams::at_rest(p.lambda)?;
    let field = nls::soliton_exact(&soliton, &grid, 0.0);
    let params = linspace(p.param_min, p.param_max, p.points);
    let mut m = Metrics::new();
    for family in DilationFamily::ALL {
        let curve = derrick::energy_curve(&field, family, &params)?;
        let name = format!("curve_{}.csv", family.symbol());
        out.csv(&name, &["param", "N", "E_K", "E_P", "E"], curve.iter().map(|c| vec![c.param.into(), c.n.into(), c.e_k.into(), c.e_p.into(), c.e.into()]))?;
        m.insert(format!("curve_points_{}", family.symbol()), json!(curve.len()));
    }
    let beta = soliton.beta();
    let report = derrick::stationarity_check(&field, beta);
    let numeric_zeta = derrick::numeric_derrick_derivative(&field)?;
    let numeric_xi = derrick::numeric_action_derivative(&field, beta)?;
    let mut scaling = serde_json::to_value(report)?;
    scaling["numeric_d_e_zeta_at_1"] = json!(numeric_zeta);
    scaling["numeric_d_a_xi_at_1"] = json!(numeric_xi);
    out.json("scaling_report.json", &scaling)?;
    m.insert("virial_residual".into(), json!(report.virial_residual));
    m.insert("derrick_residual".into(), json!(report.derrick_residual));
    m.insert("d2_e_zeta_at_1".into(), json!(report.d2_e_zeta_at_1));
    m.insert("numeric_d_e_zeta_at_1".into(), json!(numeric_zeta));
    m.insert("numeric_d_a_xi_at_1".into(), json!(numeric_xi));
    Ok(m)
}

pub(super) fn sn_ground(p: &SnGroundParams, out: &mut OutputSet) -> Result<Metrics> {
    let params = SnParams::new(p.hbar, p.mass, p.grav)?;
    let grid = RadialGrid::new(p.n, p.r_max)?;
    let g = sn::sn_ground_state(&params, p.norm, &grid, p.tol)?;
    out.json("ground_state.json", &g.to_json())?;
    Ok(metrics(json!({
        "energy": g.energy,
        "kinetic": g.kinetic,
        "potential": g.potential,
        "eigenvalue": g.eigenvalue,
        "virial_residual": g.virial_residual,
        "scaling_law_energy": params.ground_energy_law(p.norm),
        "iterations": g.iterations,
        "converged": g.converged,
    })))
}

fn trend(series: &[f64]) -> &'static str {
    let rising = series.windows(2).all(|w| w[1] >= w[0]);
    let falling = series.windows(2).all(|w| w[1] <= w[0]);
    match (rising, falling) {
        (true, true) => "constant",
        (true, false) => "spreading",
        (false, true) => "contracting",
        (false, false) => "oscillating",
    }
}

pub(super) fn sn_run(p: &SnRunParams, out: &mut OutputSet) -> Result<Metrics> {
    let params = SnParams::new(p.hbar, p.mass, p.grav)?;
    let grid = RadialGrid::new(p.n, p.r_max)?;
    let psi0 = match p.initial.as_str() {
        "ground-state" => sn::sn_ground_state(&params, p.norm, &grid, 1e-12)?.field,
        _ => RadialField::gaussian(grid, p.rms_radius, p.norm)?,
    };
    let run = sn::sn_evolve(&psi0, &params, p.t_final, p.dt, p.record_every)?;
    let rows = run.records.iter().map(|r| {
        let e = &r.energies;
        vec![r.time.into(), e.norm.into(), e.kinetic.into(), e.potential.into(), e.total.into(), r.rms_radius.into()]
    });
    out.csv("sn_observables.csv", &["time", "N", "E_K", "E_P", "E", "rms_radius"], rows)?;
    let rms: Vec<f64> = run.records.iter().map(|r| r.rms_radius).collect();
    let verdict = sn::collapse_criterion(rms[0], &params)?;
    Ok(metrics(json!({
        "initial_rms": rms[0],
        "final_rms": rms[rms.len() - 1],
        "min_rms": rms.iter().copied().fold(f64::INFINITY, f64::min),
        "max_rms": rms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "initial_energy": run.records[0].energies.total,
        "trend": trend(&rms),
        "predicted_collapse": verdict.collapses,
        "collapse_threshold": verdict.threshold,
        "norm_drift": run.norm_drift,
        "energy_drift": run.energy_drift,
        "boundary_warning": run.boundary_warning,
    })))
}

pub(super) fn relaxation(p: &RelaxationParams, seed: u64, out: &mut OutputSet) -> Result<Metrics> {
    let wave = BoxWaveFunction2D::equal_weight_random_phases(p.side, p.mass, p.modes_per_axis, p.phase_seed)?;
    let rho0 = match p.initial.as_str() {
        "equilibrium" => InitialDensity::Equilibrium,
        _ => InitialDensity::BoxMode { m: p.initial_m, k: p.initial_k },
    };
    let cfg = RelaxationConfig {
        samples: p.samples,
        cells: p.cells,
        t_final: p.periods * wave.period(),
        records: p.records,
        tol: p.tol,
        seed,
    };
    let s = pilotwave::relaxation_experiment(&wave, rho0, &cfg)?;
    let rows = (0..s.times.len()).map(|i| vec![s.times[i].into(), s.h_bar[i].into(), s.l1[i].into(), s.failed_counts[i].into()]);
    out.csv("h_series.csv", &["time", "H_bar", "L1", "failed_count"], rows)?;
    let ens = &s.final_ensemble;
    let rows = ens.positions().iter().zip(ens.status()).enumerate().map(|(i, (x, st))| {
        let status = if *st == SampleStatus::Active { "active" } else { "failed" };
        vec![i.into(), x[0].into(), x[1].into(), status.into()]
    });
    out.csv("ensemble_final.csv", &["index", "x", "y", "status"], rows)?;
    Ok(metrics(json!({
        "period": wave.period(),
        "h_initial": s.initial_h(),
        "h_final": s.final_h(),
        "h_ratio": s.final_h() / s.initial_h(),
        "h_floor": s.floor.h_bar,
        "l1_initial": s.l1[0],
        "l1_final": s.l1[s.l1.len() - 1],
        "l1_floor": s.floor.l1,
        "failed_fraction": s.failed_fraction(),
    })))
}

pub(super) fn branch(p: &BranchParams, seed: u64, out: &mut OutputSet) -> Result<Metrics> {
    let phases: Vec<f64> = (0..p.weights.len()).map(|i| p.phases.get(i).copied().unwrap_or(0.0)).collect();
    if p.phases.len() > p.weights.len() {
        return Err(crate::Error::InvalidArgument("more phases than branch weights".into()));
    }
    if p.weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(crate::Error::InvalidArgument("branch weights must be non-negative".into()));
    }
    let coeffs = p.weights.iter().zip(&phases).map(|(w, ph)| Complex64::from_polar(w.sqrt(), *ph)).collect();
    let dynamics = match p.dynamics.as_str() {
        "free" => BranchDynamics::Free { mass: p.mass },
        other => BranchDynamics::Nls { convention: convention(other), amplitude: p.amplitude, dt: p.dt },
    };
    let setup = BranchSetup {
        coeffs,
        centers: p.centers.clone(),
        width: p.width,
        dynamics,
        horizon: p.horizon,
        samples: p.samples,
        seed,
        tol: p.tol,
        dead_zone: p.dead_zone,
    };
    let o = pilotwave::branch_experiment(&setup)?;
    let rows = (0..o.counts.len()).map(|i| {
        vec![i.into(), p.centers[i].into(), o.weights[i].into(), o.counts[i].into(), o.frequencies[i].into(), o.standard_errors[i].into()]
    });
    out.csv("branches.csv", &["branch", "center", "weight", "count", "frequency", "standard_error"], rows)?;
    let rows = o.ensemble_initial.iter().zip(&o.ensemble_final).enumerate().map(|(i, (a, b))| vec![i.into(), (*a).into(), (*b).into()]);
    out.csv("ensemble.csv", &["index", "z_initial", "z_final"], rows)?;
    let max_z = o
        .frequencies
        .iter()
        .zip(&o.weights)
        .zip(&o.standard_errors)
        .map(|((f, w), se)| if *se > 0.0 { (f - w).abs() / se } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(metrics(json!({
        "frequencies": o.frequencies,
        "weights": o.weights,
        "max_standard_score": max_z,
        "crossings": o.crossings,
        "failed": o.failed,
    })))
}

pub(super) fn signaling_scan(p: &SignalingScanParams, seed: Option<u64>, out: &mut OutputSet) -> Result<Metrics> {
    let state = match p.state.as_str() {
        "bell" => BipartiteState::bell(),
        "custom" => BipartiteState::from_real(p.d_a, p.d_b, &p.coeffs)?,
        _ => BipartiteState::schmidt_example(),
    };
    let unitaries: Vec<CMatrix> = match p.unitaries.as_str() {
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.expect("validated: random unitaries need a seed"));
            std::iter::once(CMatrix::identity(state.dim_a(), state.dim_a()))
                .chain((0..p.random_count).map(|_| born::random_unitary(state.dim_a(), &mut rng)))
                .collect()
        }
        _ => vec![CMatrix::identity(state.dim_a(), state.dim_a()), born::hadamard()],
    };
    let scan = born::gap_scan(&state, &unitaries, &p.exponents)?;
    out.csv("gap_scan.csv", &["p", "gap"], scan.iter().map(|(e, g)| vec![(*e).into(), (*g).into()]))?;
    let points: Vec<Value> = scan.iter().map(|(e, g)| json!({"p": e, "gap": g})).collect();
    Ok(metrics(json!({
        "unitaries": unitaries.len(),
        "gaps": points,
        "max_gap": scan.iter().map(|s| s.1).fold(0.0, f64::max),
    })))
}

pub(super) fn resonance(p: &ResonanceRunParams, out: &mut OutputSet) -> Result<Metrics> {
    let params = ResonanceParams::new(p.k, p.delta)?;
    let grid = make_grid(p.n, p.x_min, p.x_max)?;
    let pair = |v: &[f64], what: &str| -> Result<(f64, f64)> {
        match v {
            [a, b] if a < b => Ok((*a, *b)),
            _ => Err(crate::Error::InvalidArgument(format!("{what} must be two increasing times"))),
        }
    };
    let shift = params.fission_time_shift().unwrap_or(0.0);
    let (pre, post) = (pair(&p.pre_times, "pre_times")?, pair(&p.post_times, "post_times")?);
    let summary = resonance::track_resonance(&params, &grid, (pre.0 + shift, pre.1 + shift), (post.0 + shift, post.1 + shift), p.noise_floor)?;

    for (i, &t) in p.profile_times.iter().enumerate() {
        let u = resonance::resonant_field(&grid, t + shift, &params);
        out.csv(&format!("profile_{i}.csv"), &["x", "u"], u.iter().enumerate().map(|(j, v)| vec![grid.point(j).into(), (*v).into()]))?;
    }
    let rows = summary.snapshots.iter().flat_map(|s| {
        s.entries.iter().map(move |h| vec![s.extraction_time.into(), h.position.into(), h.height.into(), h.width.into()])
    });
    out.csv("humps.csv", &["t", "position", "height", "width"], rows)?;
    let k = p.k;
    Ok(metrics(json!({
        "time_shift": shift,
        "pre_speed": summary.pre_speed,
        "expected_pre_speed": summary.expected_pre_speed,
        "pre_height": summary.pre_height,
        "post_hump_count": summary.post_hump_count,
        "post_speeds": summary.post_speeds,
        "expected_post_speeds": [summary.expected_post_speeds.0, summary.expected_post_speeds.1],
        "post_heights": summary.post_heights,
        "closed_form_heights": [k * k, (1.0 - k) * (1.0 - k)],
        "mode_params": [k, 1.0 - k],
    })))
}
