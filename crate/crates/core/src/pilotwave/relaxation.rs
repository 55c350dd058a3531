use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{coarse_l1_distance, h_function, integrate_to, BoxWaveFunction2D, CoarseGrid, GuidingWave, SamplingFloor, TrajectoryEnsemble};
use crate::{Error, Result};

/// Starting density of a relaxation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialDensity {
    /// `|phi_mk|^2` of a single box eigenmode.
    BoxMode { m: u32, k: u32 },
    /// `|psi(0)|^2` of the guiding wave itself.
    Equilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationConfig {
    pub samples: usize,
    pub cells: usize,
    pub t_final: f64,
    pub records: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationSeries {
    pub times: Vec<f64>,
    pub h_bar: Vec<f64>,
    pub l1: Vec<f64>,
    pub failed_counts: Vec<usize>,
    pub floor: SamplingFloor,
    pub samples: usize,
    #[serde(skip)]
    pub final_ensemble: TrajectoryEnsemble<2>,
}

impl RelaxationSeries {
    pub fn initial_h(&self) -> f64 {
        self.h_bar[0]
    }

    pub fn final_h(&self) -> f64 {
        *self.h_bar.last().expect("series has at least one record")
    }

    pub fn failed_fraction(&self) -> f64 {
        *self.failed_counts.last().unwrap_or(&0) as f64 / self.samples as f64
    }
}

/// Rejection sampling in the box; sample `i` uses stream `i` of `seed`.
fn sample_box<F: Fn(&[f64; 2]) -> f64>(side: f64, bound: f64, density: F, samples: usize, seed: u64) -> Vec<[f64; 2]> {
    (0..samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            loop {
                let p = [rng.random::<f64>() * side, rng.random::<f64>() * side];
                if p[0] > 0.0 && p[1] > 0.0 && rng.random::<f64>() * bound < density(&p) {
                    return p;
                }
            }
        })
        .collect()
}

/// Samples `rho0`, moves the ensemble under `wave`, and records the
/// coarse-grained H-function at `records + 1` equally spaced times.
pub fn relaxation_experiment(
    wave: &BoxWaveFunction2D,
    rho0: InitialDensity,
    config: &RelaxationConfig,
) -> Result<RelaxationSeries> {
    if config.records == 0 || !(config.t_final > 0.0) {
        return Err(Error::InvalidArgument("relaxation needs t_final > 0 and records >= 1".into()));
    }
    let side = wave.side();
    let grid = CoarseGrid::new([0.0, 0.0], [side, side], config.cells)?;
    let start = match rho0 {
        InitialDensity::BoxMode { m, k } => {
            let mode = BoxWaveFunction2D::single_mode(side, wave.mass(), m, k)?;
            sample_box(side, 4.0 / (side * side), |p| mode.psi(0.0, p).norm_sqr(), config.samples, config.seed)
        }
        InitialDensity::Equilibrium => {
            sample_box(side, wave.density_bound(0.0), |p| wave.psi(0.0, p).norm_sqr(), config.samples, config.seed)
        }
    };
    let mut ensemble = TrajectoryEnsemble::new(start, 0.0, config.seed)?;

    let psi2_at = |t: f64| grid.cell_means(|p| wave.psi(t, p).norm_sqr());
    let floor = SamplingFloor::new(&psi2_at(0.0), grid.cell_measure(), config.samples);
    let mut series = RelaxationSeries {
        times: Vec::new(),
        h_bar: Vec::new(),
        l1: Vec::new(),
        failed_counts: Vec::new(),
        floor,
        samples: config.samples,
        final_ensemble: ensemble.clone(),
    };
    for r in 0..=config.records {
        let t = config.t_final * r as f64 / config.records as f64;
        if r > 0 {
            ensemble = integrate_to(&ensemble, wave, t, config.tol)?;
            log::debug!("relaxation record {r}/{} at t = {t:.3}", config.records);
        }
        let psi2 = psi2_at(t);
        let rho = grid.histogram(ensemble.active_positions());
        series.times.push(t);
        series.h_bar.push(h_function(&rho, &psi2, grid.cell_measure())?);
        series.l1.push(coarse_l1_distance(&rho, &psi2, grid.cell_measure())?);
        series.failed_counts.push(ensemble.failed_count());
    }
    let failed = ensemble.failed_count();
    series.final_ensemble = ensemble;
    if failed * 100 >= config.samples {
        return Err(Error::InvalidRun { failed, total: config.samples });
    }
    Ok(series)
}
