//! Resonant solitary wave `u = 4 ∂²_x log(1 + e^θ1 + e^θ2)` and hump extraction.
//!
//! With `θ1 = k³t − kx` and `θ2 = (1 + 3k(k−1))t − x + δ` the wave is a
//! single hump of height 1 for `t → −∞` that fissions into humps of heights
//! `k²` and `(1−k)²` travelling at those same speeds.

use serde::Serialize;

use crate::field::Grid1D;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceParams {
    k: f64,
    delta: f64,
}

impl ResonanceParams {
    pub fn new(k: f64, delta: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::InvalidArgument(format!("resonance parameter k must lie in (0, 1), got {k}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidArgument("delta must be finite".into()));
        }
        Ok(Self { k, delta })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Speed `1 + 3k(k−1)` of the incoming hump.
    pub fn pre_decay_speed(&self) -> f64 {
        1.0 + 3.0 * self.k * (self.k - 1.0)
    }

    /// `(k², (1−k)²)`: speeds, and also peak heights, of the two products.
    pub fn decay_speeds(&self) -> (f64, f64) {
        (self.k * self.k, (1.0 - self.k).powi(2))
    }

    /// The parameters `k` and `1 − k` attached to the decay products.
    pub fn mode_params(&self) -> (f64, f64) {
        (self.k, 1.0 - self.k)
    }

    /// Time `t0` with `u(x, t; delta) = u(x - k² t0, t - t0; 0)`: changing
    /// `delta` translates the whole wave, fission included. `None` at
    /// `k = 1/2`, where both products share one speed.
    pub fn fission_time_shift(&self) -> Option<f64> {
        let d = (1.0 - 2.0 * self.k) * (1.0 - self.k);
        (d != 0.0).then(|| -self.delta / d)
    }

    fn phases(&self, x: f64, t: f64) -> (f64, f64) {
        let k = self.k;
        (k * k * k * t - k * x, self.pre_decay_speed() * t - x + self.delta)
    }
}

/// Closed-form value `4 (F''F − F'²) / F²` at one point.
///
/// Every exponential is shifted by `max(0, θ1, θ2)` so no term overflows.
pub fn resonant_value(x: f64, t: f64, params: &ResonanceParams) -> f64 {
    let (a, b) = params.phases(x, t);
    let k = params.k;
    let m = a.max(b).max(0.0);
    let f = (-m).exp() + (a - m).exp() + (b - m).exp();
    let num = k * k * (a - 2.0 * m).exp() + (b - 2.0 * m).exp() + (1.0 - k).powi(2) * (a + b - 2.0 * m).exp();
    4.0 * num / (f * f)
}

pub fn resonant_field(grid: &Grid1D, t: f64, params: &ResonanceParams) -> Vec<f64> {
    grid.points().map(|x| resonant_value(x, t, params)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hump {
    pub position: f64,
    pub height: f64,
    /// Full width at half height.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HumpList {
    pub entries: Vec<Hump>,
    pub extraction_time: f64,
}

impl HumpList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.entries.iter().map(|h| h.position).collect()
    }

    pub fn heights(&self) -> Vec<f64> {
        self.entries.iter().map(|h| h.height).collect()
    }
}

/// Local maxima of `values` above `noise_floor`, in increasing position.
///
/// The peak is refined by the parabola through the three samples around it;
/// the width is the distance between the linearly interpolated half-height
/// crossings. When a neighbouring hump intervenes before the half height is
/// reached, the crossing is replaced by the intervening minimum.
pub fn hump_analysis(values: &[f64], grid: &Grid1D, noise_floor: f64, time: f64) -> Result<HumpList> {
    if !(noise_floor > 0.0) {
        return Err(Error::InvalidArgument(format!("noise floor must be > 0, got {noise_floor}")));
    }
    if values.len() != grid.n() {
        return Err(Error::GridMismatch(format!("{} samples on a grid of {}", values.len(), grid.n())));
    }
    let dz = grid.dz();
    let mut entries = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if !(c > noise_floor && c > l && c >= r) {
            continue;
        }
        let curv = l - 2.0 * c + r;
        let shift = if curv < 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
        let height = c - 0.25 * (l - r) * shift;
        let half = 0.5 * height;
        let left = crossing(values, i, half, -1);
        let right = crossing(values, i, half, 1);
        entries.push(Hump { position: grid.point(i) + shift * dz, height, width: (right - left) * dz });
    }
    Ok(HumpList { entries, extraction_time: time })
}

/// Fractional index where `values` first drops below `level` walking from
/// `start` in direction `dir`, stopping at a local minimum or the array end.
fn crossing(values: &[f64], start: usize, level: f64, dir: isize) -> f64 {
    let mut i = start as isize;
    loop {
        let j = i + dir;
        if j < 0 || j as usize >= values.len() {
            return i as f64;
        }
        let (vi, vj) = (values[i as usize], values[j as usize]);
        if vj <= level {
            return i as f64 + dir as f64 * (vi - level) / (vi - vj);
        }
        if vj > vi {
            return i as f64;
        }
        i = j;
    }
}

/// Rectangle-rule integral of `values` over each hump's basin, the basins
/// being separated by the minimum between consecutive humps.
pub fn basin_integrals(values: &[f64], grid: &Grid1D, humps: &HumpList) -> Vec<f64> {
    let dz = grid.dz();
    let index = |x: f64| (((x - grid.z_min()) / dz).round().max(0.0) as usize).min(values.len() - 1);
    let mut cuts = vec![0];
    for pair in humps.entries.windows(2) {
        let (a, b) = (index(pair[0].position), index(pair[1].position));
        let lowest = (a..=b).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(a);
        cuts.push(lowest);
    }
    cuts.push(values.len());
    cuts.windows(2).map(|w| values[w[0]..w[1]].iter().sum::<f64>() * dz).collect()
}

/// Speeds and heights from hump tracking at two early and two late times.
/// Heights are taken at the outermost times, farthest from the fission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceSummary {
    pub k: f64,
    pub delta: f64,
    pub pre_speed: f64,
    pub pre_height: f64,
    /// Faster product first.
    pub post_speeds: Vec<f64>,
    pub post_heights: Vec<f64>,
    pub post_hump_count: usize,
    pub mode_param: (f64, f64),
    pub expected_pre_speed: f64,
    pub expected_post_speeds: (f64, f64),
    #[serde(skip)]
    pub snapshots: Vec<HumpList>,
}

/// Tracks the humps of the resonant wave on `grid` between `pre.0` and `pre.1`
/// (one hump expected) and between `post.0` and `post.1` (the products).
pub fn track_resonance(
    params: &ResonanceParams,
    grid: &Grid1D,
    pre: (f64, f64),
    post: (f64, f64),
    noise_floor: f64,
) -> Result<ResonanceSummary> {
    let at = |t: f64| hump_analysis(&resonant_field(grid, t, params), grid, noise_floor, t);
    let snapshots = [pre.0, pre.1, post.0, post.1].into_iter().map(at).collect::<Result<Vec<_>>>()?;
    let (p0, p1, q0, q1) = (&snapshots[0], &snapshots[1], &snapshots[2], &snapshots[3]);
    if p0.len() != 1 || p1.len() != 1 {
        return Err(Error::InvalidState(format!(
            "expected one incoming hump, found {} and {}",
            p0.len(),
            p1.len()
        )));
    }
    if q0.len() != q1.len() || q0.is_empty() {
        return Err(Error::InvalidState(format!("hump count changed between {} and {}", post.0, post.1)));
    }
    let pre_speed = (p1.entries[0].position - p0.entries[0].position) / (pre.1 - pre.0);
    let mut post_speeds: Vec<f64> = q0
        .entries
        .iter()
        .zip(&q1.entries)
        .map(|(a, b)| (b.position - a.position) / (post.1 - post.0))
        .collect();
    let mut post_heights = q1.heights();
    post_speeds.reverse();
    post_heights.reverse();
    Ok(ResonanceSummary {
        k: params.k,
        delta: params.delta,
        pre_speed,
        pre_height: p0.entries[0].height,
        post_speeds,
        post_heights,
        post_hump_count: q1.len(),
        mode_param: params.mode_params(),
        expected_pre_speed: params.pre_decay_speed(),
        expected_post_speeds: params.decay_speeds(),
        snapshots,
    })
}
