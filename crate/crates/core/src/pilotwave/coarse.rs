use serde::Serialize;

use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Uniform `m^D` partition of the box `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseGrid<const D: usize> {
    lower: [f64; D],
    upper: [f64; D],
    m: usize,
}

impl<const D: usize> CoarseGrid<D> {
    pub fn new(lower: [f64; D], upper: [f64; D], m: usize) -> Result<Self> {
        if m < 8 {
            return Err(Error::InvalidGrid(format!("coarse grid needs m >= 8 cells per axis, got {m}")));
        }
        if (0..D).any(|d| !(upper[d] > lower[d]) || !lower[d].is_finite() || !upper[d].is_finite()) {
            return Err(Error::InvalidGrid("coarse grid bounds must be finite with upper > lower".into()));
        }
        Ok(Self { lower, upper, m })
    }

    pub fn cells_per_axis(&self) -> usize {
        self.m
    }

    pub fn cell_count(&self) -> usize {
        self.m.pow(D as u32)
    }

    pub fn cell_width(&self, d: usize) -> f64 {
        (self.upper[d] - self.lower[d]) / self.m as f64
    }

    pub fn cell_measure(&self) -> f64 {
        (0..D).map(|d| self.cell_width(d)).product()
    }

    pub fn lower(&self) -> [f64; D] {
        self.lower
    }

    pub fn upper(&self) -> [f64; D] {
        self.upper
    }

    /// Flat cell index, first axis fastest; `None` outside the grid.
    pub fn cell_of(&self, x: &[f64; D]) -> Option<usize> {
        let mut index = 0;
        let mut stride = 1;
        for d in 0..D {
            let u = (x[d] - self.lower[d]) / self.cell_width(d);
            if !(u >= 0.0 && u < self.m as f64) {
                return None;
            }
            index += (u as usize).min(self.m - 1) * stride;
            stride *= self.m;
        }
        Some(index)
    }

    /// Lower corner of a flat cell index.
    pub fn cell_origin(&self, mut index: usize) -> [f64; D] {
        let mut out = [0.0; D];
        for (d, o) in out.iter_mut().enumerate() {
            *o = self.lower[d] + (index % self.m) as f64 * self.cell_width(d);
            index /= self.m;
        }
        out
    }

    /// Normalised histogram density of the given points; points outside are ignored.
    pub fn histogram<'a, I: IntoIterator<Item = &'a [f64; D]>>(&self, samples: I) -> Vec<f64> {
        let mut counts = vec![0.0; self.cell_count()];
        let mut total = 0.0;
        for x in samples {
            if let Some(c) = self.cell_of(x) {
                counts[c] += 1.0;
                total += 1.0;
            }
        }
        if total > 0.0 {
            let scale = 1.0 / (total * self.cell_measure());
            counts.iter_mut().for_each(|c| *c *= scale);
        }
        counts
    }

    /// Cell-mean of `density`, by 8-point Gauss-Legendre per axis, normalised to integrate to 1.
    pub fn cell_means<F: Fn(&[f64; D]) -> f64>(&self, density: F) -> Vec<f64> {
        let mut out = vec![0.0; self.cell_count()];
        let points = 8usize.pow(D as u32);
        for (c, slot) in out.iter_mut().enumerate() {
            let origin = self.cell_origin(c);
            let mut acc = 0.0;
            for q in 0..points {
                let mut x = [0.0; D];
                let mut w = 1.0;
                let mut r = q;
                for d in 0..D {
                    let (node, weight) = GL8[r % 8];
                    r /= 8;
                    let h = self.cell_width(d);
                    x[d] = origin[d] + 0.5 * h * (node + 1.0);
                    w *= 0.5 * weight;
                }
                acc += w * density(&x);
            }
            *slot = acc;
        }
        normalise(&mut out, self.cell_measure());
        out
    }

    /// Cell-mean of a density given as exact cell integrals, normalised.
    pub fn from_cell_integrals(&self, integrals: Vec<f64>) -> Result<Vec<f64>> {
        if integrals.len() != self.cell_count() {
            return Err(Error::GridMismatch(format!("{} integrals for {} cells", integrals.len(), self.cell_count())));
        }
        let mut out: Vec<f64> = integrals.iter().map(|v| v / self.cell_measure()).collect();
        normalise(&mut out, self.cell_measure());
        Ok(out)
    }
}

fn normalise(values: &mut [f64], measure: f64) {
    let total: f64 = values.iter().sum::<f64>() * measure;
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    }
}

/// `H = Σ rho ln(rho / psi2) · cell_measure`; cells with `rho = 0` add nothing.
/// Returns `+∞` if `psi2` vanishes where `rho` does not.
pub fn h_function(rho_bar: &[f64], psi2_bar: &[f64], cell_measure: f64) -> Result<f64> {
    if rho_bar.len() != psi2_bar.len() {
        return Err(Error::GridMismatch(format!("{} vs {} cells", rho_bar.len(), psi2_bar.len())));
    }
    let mut h = 0.0;
    for (&r, &p) in rho_bar.iter().zip(psi2_bar) {
        if r > 0.0 {
            if p <= 0.0 {
                return Ok(f64::INFINITY);
            }
            h += r * (r / p).ln();
        }
    }
    // Non-negative for normalised inputs; clip round-off.
    Ok((h * cell_measure).max(0.0))
}

/// `Σ |rho - psi2| · cell_measure`.
pub fn coarse_l1_distance(rho_bar: &[f64], psi2_bar: &[f64], cell_measure: f64) -> Result<f64> {
    if rho_bar.len() != psi2_bar.len() {
        return Err(Error::GridMismatch(format!("{} vs {} cells", rho_bar.len(), psi2_bar.len())));
    }
    Ok(rho_bar.iter().zip(psi2_bar).map(|(a, b)| (a - b).abs()).sum::<f64>() * cell_measure)
}

/// Levels reached by `M` exact samples of a known distribution, at four
/// standard deviations above the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingFloor {
    /// `2M H ~ chi^2_{C-1}`: floor `(C - 1 + 4 sqrt(2 (C - 1))) / (2M)`.
    pub h_bar: f64,
    /// Half-normal approximation of `Σ |p̂_i - p_i|`.
    pub l1: f64,
}

impl SamplingFloor {
    pub fn new(psi2_bar: &[f64], cell_measure: f64, samples: usize) -> Self {
        let m = samples as f64;
        let occupied = psi2_bar.iter().filter(|&&p| p > 0.0).count().max(1) as f64;
        let dof = occupied - 1.0;
        let h_bar = (dof + 4.0 * (2.0 * dof).sqrt()) / (2.0 * m);
        let (mut mean, mut var) = (0.0, 0.0);
        for &p in psi2_bar {
            let p = (p * cell_measure).clamp(0.0, 1.0);
            let s2 = p * (1.0 - p) / m;
            mean += s2.sqrt() * (2.0 / std::f64::consts::PI).sqrt();
            var += s2 * (1.0 - 2.0 / std::f64::consts::PI);
        }
        Self { h_bar, l1: mean + 4.0 * var.sqrt() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_validation_and_indexing() {
        assert!(CoarseGrid::new([0.0], [1.0], 4).is_err());
        assert!(CoarseGrid::new([0.0, 1.0], [1.0, 1.0], 8).is_err());
        let g = CoarseGrid::new([0.0, 0.0], [2.0, 1.0], 8).unwrap();
        assert_eq!(g.cell_count(), 64);
        assert_eq!(g.cell_of(&[0.3, 0.9]), Some(1 + 7 * 8));
        assert_eq!(g.cell_of(&[2.0, 0.5]), None);
        assert_eq!(g.cell_origin(1 + 7 * 8), [0.25, 0.875]);
    }

    #[test]
    fn uniform_samples_fill_cells_evenly() {
        let g = CoarseGrid::new([0.0, 0.0], [1.0, 1.0], 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..64_000).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let h = g.histogram(&pts);
        let total: f64 = h.iter().sum::<f64>() * g.cell_measure();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        // 1000 expected per cell, Poisson spread about 3%
        assert!(h.iter().all(|&v| (v - 1.0).abs() < 0.15));
    }

    #[test]
    fn cell_constant_density_is_identity() {
        let g = CoarseGrid::new([0.0], [1.0], 8).unwrap();
        let levels: Vec<f64> = (0..8).map(|i| (i + 1) as f64 / 4.5).collect();
        let c = g.cell_means(|x| levels[g.cell_of(x).unwrap()]);
        for (a, b) in c.iter().zip(&levels) {
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn h_function_values() {
        let rho = [0.25; 4];
        assert_eq!(h_function(&rho, &rho, 1.0).unwrap(), 0.0);
        let conc = [1.0, 0.0, 0.0, 0.0];
        assert_relative_eq!(h_function(&conc, &rho, 1.0).unwrap(), 4f64.ln(), max_relative = 1e-15);
        assert_eq!(h_function(&rho, &conc, 1.0).unwrap(), f64::INFINITY);
        assert!(h_function(&rho, &conc[..3], 1.0).is_err());
    }

    #[test]
    fn floors_bound_exact_sampling() {
        let g = CoarseGrid::new([0.0], [1.0], 16).unwrap();
        let uniform = vec![1.0; 16];
        let floor = SamplingFloor::new(&uniform, g.cell_measure(), 10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let pts: Vec<[f64; 1]> = (0..10_000).map(|_| [rng.random::<f64>()]).collect();
            let h = g.histogram(&pts);
            assert!(h_function(&h, &uniform, g.cell_measure()).unwrap() < floor.h_bar);
            assert!(coarse_l1_distance(&h, &uniform, g.cell_measure()).unwrap() < floor.l1);
        }
    }
}
