use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{guidance_velocity, GuidingWave};
use crate::{Error, Result};

/// Consecutive rejected steps after which a trajectory counts as stuck.
const MAX_REJECTIONS: usize = 1000;
/// Accepted steps per integration call after which a trajectory counts as
/// trapped (it has spiralled onto a moving node).
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    Active,
    Failed,
}

/// Equally weighted sample positions sharing one time tag.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble<const D: usize> {
    positions: Vec<[f64; D]>,
    status: Vec<SampleStatus>,
    time_tag: f64,
    rng_seed: u64,
}

impl<const D: usize> TrajectoryEnsemble<D> {
    pub const MIN_SAMPLES: usize = 100;

    pub fn new(positions: Vec<[f64; D]>, time_tag: f64, rng_seed: u64) -> Result<Self> {
        if positions.len() < Self::MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "an ensemble needs at least {} samples, got {}",
                Self::MIN_SAMPLES,
                positions.len()
            )));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("ensemble positions must be finite".into()));
        }
        let status = vec![SampleStatus::Active; positions.len()];
        Ok(Self { positions, status, time_tag, rng_seed })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; D]] {
        &self.positions
    }

    pub fn status(&self) -> &[SampleStatus] {
        &self.status
    }

    pub fn time_tag(&self) -> f64 {
        self.time_tag
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn active_positions(&self) -> impl Iterator<Item = &[f64; D]> {
        self.positions.iter().zip(&self.status).filter(|(_, s)| **s == SampleStatus::Active).map(|(p, _)| p)
    }

    pub fn failed_count(&self) -> usize {
        self.status.iter().filter(|s| **s == SampleStatus::Failed).count()
    }

    pub fn failed_fraction(&self) -> f64 {
        self.failed_count() as f64 / self.len() as f64
    }

    pub fn mark_failed(&mut self, index: usize) {
        self.status[index] = SampleStatus::Failed;
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a, const D: usize, W: GuidingWave<D> + ?Sized> {
    wave: &'a W,
    tol: f64,
}

impl<const D: usize, W: GuidingWave<D> + ?Sized> Stepper<'_, D, W> {
    fn velocity(&self, t: f64, x: &[f64; D]) -> Option<[f64; D]> {
        if !self.wave.contains(x) {
            return None;
        }
        guidance_velocity(self.wave, t, x)
    }

    /// Advances `x` from `t` to `t_end`; `None` if the trajectory got stuck.
    fn advance(&self, mut x: [f64; D], mut t: f64, t_end: f64, h: &mut f64) -> Option<[f64; D]> {
        if t_end <= t {
            return Some(x);
        }
        let mut k = [[0.0; D]; 7];
        k[0] = self.velocity(t, &x)?;
        let mut rejections = 0;
        let mut steps = 0;
        while t < t_end {
            let last = *h >= t_end - t;
            let step = if last { t_end - t } else { *h };
            if !(step > 1e-14 * (1.0 + t.abs())) || rejections > MAX_REJECTIONS || steps > MAX_STEPS {
                return None;
            }
            match self.try_step(&x, t, step, &mut k) {
                Some((y, err)) if err <= 1.0 => {
                    x = y;
                    t = if last { t_end } else { t + step };
                    k[0] = k[6];
                    rejections = 0;
                    steps += 1;
                    let grow = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
                    if !last || grow < 1.0 {
                        *h = step * grow.clamp(0.2, 5.0);
                    }
                }
                Some((_, err)) => {
                    rejections += 1;
                    *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                }
                None => {
                    rejections += 1;
                    *h = step * 0.25;
                }
            }
        }
        Some(x)
    }

    fn try_step(&self, x: &[f64; D], t: f64, h: f64, k: &mut [[f64; D]; 7]) -> Option<([f64; D], f64)> {
        let mut y = *x;
        for s in 1..7 {
            let mut stage = *x;
            for d in 0..D {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[d];
                }
                stage[d] += h * acc;
            }
            k[s] = self.velocity(t + C[s] * h, &stage)?;
            if s == 6 {
                y = stage;
            }
        }
        let mut err: f64 = 0.0;
        for d in 0..D {
            let e: f64 = (0..7).map(|s| E[s] * k[s][d]).sum::<f64>() * h;
            err = err.max(e.abs() / (self.tol * (1.0 + x[d].abs().max(y[d].abs()))));
        }
        Some((y, err))
    }
}

fn initial_step(span: f64, tol: f64) -> f64 {
    (0.1 * tol.powf(0.2)).min(span.max(1e-12))
}

/// Moves every active sample from the ensemble's time tag to `t_end`.
/// Stuck samples are marked failed; no error is raised here.
pub fn integrate_to<const D: usize, W: GuidingWave<D> + ?Sized>(
    ens: &TrajectoryEnsemble<D>,
    wave: &W,
    t_end: f64,
    tol: f64,
) -> Result<TrajectoryEnsemble<D>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    if !(t_end >= ens.time_tag) {
        return Err(Error::InvalidArgument(format!("cannot integrate backwards from {} to {t_end}", ens.time_tag)));
    }
    let stepper = Stepper { wave, tol };
    let t0 = ens.time_tag;
    let moved: Vec<Option<[f64; D]>> = ens
        .positions
        .par_iter()
        .zip(&ens.status)
        .map(|(x, s)| match s {
            SampleStatus::Active => {
                let mut h = initial_step(t_end - t0, tol);
                stepper.advance(*x, t0, t_end, &mut h)
            }
            SampleStatus::Failed => None,
        })
        .collect();
    let mut out = ens.clone();
    out.time_tag = t_end;
    for (i, m) in moved.into_iter().enumerate() {
        match m {
            Some(x) => out.positions[i] = x,
            None => out.status[i] = SampleStatus::Failed,
        }
    }
    Ok(out)
}

/// [`integrate_to`] plus the validity rule: at least 99% of samples must survive.
pub fn integrate_ensemble<const D: usize, W: GuidingWave<D> + ?Sized>(
    ens: &TrajectoryEnsemble<D>,
    wave: &W,
    t_final: f64,
    tol: f64,
) -> Result<TrajectoryEnsemble<D>> {
    let out = integrate_to(ens, wave, t_final, tol)?;
    let failed = out.failed_count();
    if failed * 100 >= out.len() {
        return Err(Error::InvalidRun { failed, total: out.len() });
    }
    Ok(out)
}

/// Positions of one trajectory at the sorted `times`, starting from `x0` at `t0`.
pub fn trajectory<const D: usize, W: GuidingWave<D> + ?Sized>(
    x0: [f64; D],
    wave: &W,
    t0: f64,
    times: &[f64],
    tol: f64,
) -> Result<Vec<[f64; D]>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidArgument("trajectory times must be sorted and not before t0".into()));
    }
    let stepper = Stepper { wave, tol };
    let mut out = Vec::with_capacity(times.len());
    let (mut x, mut t) = (x0, t0);
    let mut h = initial_step(times.last().map_or(0.0, |&e| e - t0), tol);
    for &target in times {
        x = stepper
            .advance(x, t, target, &mut h)
            .ok_or_else(|| Error::InvalidState(format!("trajectory from {x0:?} got stuck before t = {target}")))?;
        t = target;
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pilotwave::{BoxWaveFunction2D, PlaneWave1D};
    use approx::assert_relative_eq;

    #[test]
    fn plane_wave_moves_rigidly() {
        let wave = PlaneWave1D::new(2.0, 1.0).unwrap();
        let start: Vec<[f64; 1]> = (0..100).map(|i| [i as f64 * 0.1]).collect();
        let ens = TrajectoryEnsemble::new(start.clone(), 0.0, 0).unwrap();
        let out = integrate_ensemble(&ens, &wave, 1.0, 1e-10).unwrap();
        for (a, b) in out.positions().iter().zip(&start) {
            assert_relative_eq!(a[0], b[0] + 2.0, max_relative = 1e-12);
        }
        assert_eq!(out.time_tag(), 1.0);
    }

    #[test]
    fn eigenmode_trajectories_are_stationary() {
        let wave = BoxWaveFunction2D::single_mode(1.0, 1.0, 2, 1).unwrap();
        let start: Vec<[f64; 2]> = (0..100).map(|i| [0.0507 + 0.009 * i as f64, 0.3]).collect();
        let ens = TrajectoryEnsemble::new(start.clone(), 0.0, 0).unwrap();
        let out = integrate_ensemble(&ens, &wave, 3.0, 1e-8).unwrap();
        for (a, b) in out.positions().iter().zip(&start) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn undersized_ensemble_rejected() {
        assert!(TrajectoryEnsemble::new(vec![[0.0]; 99], 0.0, 0).is_err());
    }

    #[test]
    fn samples_leaving_the_domain_fail() {
        let wave = BoxWaveFunction2D::single_mode(1.0, 1.0, 1, 1).unwrap();
        let mut start = vec![[0.5, 0.5]; 100];
        start[3] = [1.5, 0.5];
        let ens = TrajectoryEnsemble::new(start, 0.0, 0).unwrap();
        let out = integrate_to(&ens, &wave, 1.0, 1e-8).unwrap();
        assert_eq!(out.failed_count(), 1);
        assert_eq!(out.status()[3], SampleStatus::Failed);
        assert!(matches!(integrate_ensemble(&ens, &wave, 1.0, 1e-8), Err(Error::InvalidRun { failed: 1, total: 100 })));
    }
}
