use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{integrate_to, FreeGaussianBranches, GuidingWave, SampleStatus, SnapshotWave, TrajectoryEnsemble};
use crate::field::{make_grid, ComplexField};
use crate::nls::{evolve_with_snapshots, NlsConvention};
use crate::{Error, Result};

/// Minimum centre separation, in branch widths.
const MIN_SEPARATION: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BranchDynamics {
    /// Free Schrödinger flow with the given mass, evaluated in closed form.
    Free { mass: f64 },
    /// NLS flow of `amplitude · Σ c_n g_n`; the ensemble follows `K |psi|^2`
    /// with `K = amplitude^-2`.
    Nls { convention: NlsConvention, amplitude: f64, dt: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSetup {
    pub coeffs: Vec<Complex64>,
    pub centers: Vec<f64>,
    pub width: f64,
    pub dynamics: BranchDynamics,
    pub horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Half-width, in branch widths, of the band around each midpoint where no
    /// branch is assigned.
    pub dead_zone: f64,
}

impl BranchSetup {
    /// Two Gaussian branches at ±8 of unit width under free flow.
    pub fn two_branch(c0: Complex64, c1: Complex64, samples: usize, seed: u64) -> Self {
        Self {
            coeffs: vec![c0, c1],
            centers: vec![-8.0, 8.0],
            width: 1.0,
            dynamics: BranchDynamics::Free { mass: 1.0 },
            horizon: 2.0,
            samples,
            seed,
            tol: 1e-8,
            dead_zone: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchOutcome {
    pub counts: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub weights: Vec<f64>,
    pub failed: usize,
    pub crossings: usize,
    pub ensemble_initial: Vec<f64>,
    pub ensemble_final: Vec<f64>,
}

fn nearest(centers: &[f64], z: f64, dead_zone: f64) -> Option<usize> {
    let mut order: Vec<usize> = (0..centers.len()).collect();
    order.sort_by(|&a, &b| (z - centers[a]).abs().total_cmp(&(z - centers[b]).abs()));
    let best = order[0];
    if let Some(&second) = order.get(1) {
        let mid = 0.5 * (centers[best] + centers[second]);
        if (z - mid).abs() < dead_zone {
            return None;
        }
    }
    Some(best)
}

/// Draws `samples` points from a 1D density tabulated on a uniform grid by
/// inverting its piecewise-linear cumulative distribution. Sample `i` uses
/// stream `i` of the seeded generator.
pub(crate) fn sample_tabulated(xs: &[f64], density: &[f64], samples: usize, seed: u64) -> Vec<[f64; 1]> {
    let mut cdf = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let total = *cdf.last().expect("non-empty table");
    (0..samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let target = rng.random::<f64>() * total;
            let j = cdf.partition_point(|&c| c < target).clamp(1, xs.len() - 1);
            let span = cdf[j] - cdf[j - 1];
            let f = if span > 0.0 { (target - cdf[j - 1]) / span } else { 0.5 };
            [xs[j - 1] + f * (xs[j] - xs[j - 1])]
        })
        .collect()
}

/// Samples `K |psi(0)|^2`, follows each particle for `horizon` and assigns
/// it to the nearest branch centre.
pub fn branch_experiment(setup: &BranchSetup) -> Result<BranchOutcome> {
    let n = setup.coeffs.len();
    if n < 1 || setup.centers.len() != n {
        return Err(Error::InvalidArgument("one coefficient per branch centre required".into()));
    }
    let weight: f64 = setup.coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (weight - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!("branch weights sum to {weight}, expected 1")));
    }
    if !(setup.width > 0.0 && setup.horizon > 0.0 && setup.tol > 0.0) {
        return Err(Error::InvalidArgument("width, horizon and tol must be > 0".into()));
    }
    let mut sorted = setup.centers.clone();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[1] - w[0] < MIN_SEPARATION * setup.width) {
        return Err(Error::BranchOverlap(format!(
            "centres {} and {} are closer than {MIN_SEPARATION} widths",
            w[0], w[1]
        )));
    }

    let lo = sorted[0] - 12.0 * setup.width;
    let hi = sorted[n - 1] + 12.0 * setup.width;
    let table_n = 1 << 16;
    let xs: Vec<f64> = (0..=table_n).map(|i| lo + (hi - lo) * i as f64 / table_n as f64).collect();
    let free = FreeGaussianBranches::new(setup.coeffs.clone(), setup.centers.clone(), setup.width, 1.0)?;
    let density: Vec<f64> = xs.iter().map(|&x| free.psi(0.0, &[x]).norm_sqr()).collect();
    let start = sample_tabulated(&xs, &density, setup.samples, setup.seed);
    let ensemble = TrajectoryEnsemble::new(start, 0.0, setup.seed)?;

    let dead = setup.dead_zone * setup.width;
    let finished = match setup.dynamics {
        BranchDynamics::Free { mass } => {
            let wave = FreeGaussianBranches::new(setup.coeffs.clone(), setup.centers.clone(), setup.width, mass)?;
            integrate_to(&ensemble, &wave, setup.horizon, setup.tol)?
        }
        BranchDynamics::Nls { convention, amplitude, dt } => {
            if !(amplitude > 0.0) {
                return Err(Error::InvalidArgument("NLS amplitude must be > 0".into()));
            }
            let center = 0.5 * (sorted[0] + sorted[n - 1]);
            let half = 0.5 * (sorted[n - 1] - sorted[0]) + 30.0 * setup.width;
            let grid = make_grid(1024, center - half, center + half)?;
            let initial = ComplexField::from_fn(grid, 0.0, |z| free.psi(0.0, &[z]) * amplitude)?;
            let snapshot_every = ((0.01 / dt).round() as usize).max(1);
            let run = evolve_with_snapshots(&initial, setup.horizon, dt, convention, usize::MAX, Some(snapshot_every))?;
            let wave = SnapshotWave::new(&run.snapshots, convention.guidance_mass())?;
            integrate_to(&ensemble, &wave, setup.horizon.min(wave.t_end()), setup.tol)?
        }
    };

    let mut counts = vec![0usize; n];
    let mut failed = 0;
    let mut crossings = 0;
    for ((x0, x1), status) in ensemble.positions().iter().zip(finished.positions()).zip(finished.status()) {
        if *status == SampleStatus::Failed {
            failed += 1;
            continue;
        }
        match (nearest(&setup.centers, x0[0], dead), nearest(&setup.centers, x1[0], dead)) {
            (_, None) | (None, _) => failed += 1,
            (Some(a), Some(b)) => {
                if a != b {
                    crossings += 1;
                }
                counts[b] += 1;
            }
        }
    }
    let assigned = (setup.samples - failed).max(1) as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / assigned).collect();
    let standard_errors = frequencies.iter().map(|f| (f * (1.0 - f) / assigned).sqrt()).collect();
    Ok(BranchOutcome {
        counts,
        frequencies,
        standard_errors,
        weights: setup.coeffs.iter().map(|c| c.norm_sqr()).collect(),
        failed,
        crossings,
        ensemble_initial: ensemble.positions().iter().map(|p| p[0]).collect(),
        ensemble_final: finished.positions().iter().map(|p| p[0]).collect(),
    })
}
