use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GuidingWave, LocalWave};
use crate::{Error, Result};

const MAX_MODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxMode {
    pub m: u32,
    pub k: u32,
    pub coeff: Complex64,
}

/// Superposition of eigenmodes `(2/L) sin(m pi x/L) sin(k pi y/L)` of the
/// square box `[0, L]^2`, each rotating with `E_mk = pi^2 (m^2 + k^2) / (2 mass L^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxWaveFunction2D {
    side_l: f64,
    mass: f64,
    modes: Vec<BoxMode>,
    max_index: usize,
    amplitude_sum: f64,
}

impl BoxWaveFunction2D {
    pub fn new(side_l: f64, mass: f64, modes: Vec<BoxMode>) -> Result<Self> {
        if !(side_l > 0.0 && side_l.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument("box side and mass must be > 0".into()));
        }
        if modes.is_empty() || modes.len() > MAX_MODES {
            return Err(Error::InvalidArgument(format!("between 1 and {MAX_MODES} modes required, got {}", modes.len())));
        }
        for (i, a) in modes.iter().enumerate() {
            if a.m == 0 || a.k == 0 || a.m > 64 || a.k > 64 {
                return Err(Error::InvalidArgument(format!("mode indices must lie in 1..=64, got ({}, {})", a.m, a.k)));
            }
            if modes[..i].iter().any(|b| b.m == a.m && b.k == a.k) {
                return Err(Error::InvalidArgument(format!("mode ({}, {}) listed twice", a.m, a.k)));
            }
        }
        let weight: f64 = modes.iter().map(|c| c.coeff.norm_sqr()).sum();
        if (weight - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mode weights sum to {weight}, expected 1")));
        }
        let max_index = modes.iter().map(|c| c.m.max(c.k) as usize).max().unwrap_or(1);
        let amplitude_sum = modes.iter().map(|c| c.coeff.norm()).sum();
        Ok(Self { side_l, mass, modes, max_index, amplitude_sum })
    }

    /// The `n x n` lowest modes with equal weight and phases drawn from `seed`.
    pub fn equal_weight_random_phases(side_l: f64, mass: f64, n: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = 1.0 / n as f64;
        let modes = (1..=n)
            .flat_map(|m| (1..=n).map(move |k| (m, k)))
            .map(|(m, k)| BoxMode { m, k, coeff: Complex64::from_polar(amp, rng.random_range(0.0..2.0 * PI)) })
            .collect();
        Self::new(side_l, mass, modes)
    }

    pub fn single_mode(side_l: f64, mass: f64, m: u32, k: u32) -> Result<Self> {
        Self::new(side_l, mass, vec![BoxMode { m, k, coeff: Complex64::new(1.0, 0.0) }])
    }

    pub fn side(&self) -> f64 {
        self.side_l
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn modes(&self) -> &[BoxMode] {
        &self.modes
    }

    /// `pi^2 / (2 mass L^2)`; every mode energy is an integer multiple of it.
    pub fn energy_unit(&self) -> f64 {
        PI * PI / (2.0 * self.mass * self.side_l * self.side_l)
    }

    pub fn mode_energy(&self, m: u32, k: u32) -> f64 {
        self.energy_unit() * (m * m + k * k) as f64
    }

    /// Recurrence time `4 mass L^2 / pi` after which `psi` returns to itself.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.energy_unit()
    }

    /// `|phi_mk|^2` integrated over `[x0, x1] x [y0, y1]`.
    pub fn mode_cell_integral(&self, m: u32, k: u32, x: (f64, f64), y: (f64, f64)) -> f64 {
        let l = self.side_l;
        // ∫ sin^2(a s) ds = s/2 - sin(2 a s)/(4 a)
        let prim = |n: u32, s: f64| {
            let a = n as f64 * PI / l;
            0.5 * s - (2.0 * a * s).sin() / (4.0 * a)
        };
        4.0 / (l * l) * (prim(m, x.1) - prim(m, x.0)) * (prim(k, y.1) - prim(k, y.0))
    }

    /// `sin(n pi s / L)` and `cos(n pi s / L)` for n = 0..=max_index.
    fn harmonics(&self, s: f64) -> ([f64; 65], [f64; 65]) {
        let (s1, c1) = (PI * s / self.side_l).sin_cos();
        let mut sn = [0.0; 65];
        let mut cn = [0.0; 65];
        cn[0] = 1.0;
        for n in 1..=self.max_index {
            sn[n] = sn[n - 1] * c1 + cn[n - 1] * s1;
            cn[n] = cn[n - 1] * c1 - sn[n - 1] * s1;
        }
        (sn, cn)
    }

    /// `exp(-i E_1 t n^2)` for n = 0..=max_index, so a mode rotates by `r[m] r[k]`.
    fn rotations(&self, t: f64) -> [Complex64; 65] {
        let w = Complex64::from_polar(1.0, -self.energy_unit() * t);
        let w2 = w * w;
        let mut out = [Complex64::new(1.0, 0.0); 65];
        let mut odd = w;
        for n in 1..=self.max_index {
            out[n] = out[n - 1] * odd;
            odd *= w2;
        }
        out
    }

    fn evaluate(&self, t: f64, p: &[f64; 2], second: bool) -> (Complex64, [Complex64; 2], [Complex64; 2]) {
        let (sx, cx) = self.harmonics(p[0]);
        let (sy, cy) = self.harmonics(p[1]);
        let rot = self.rotations(t);
        let norm = 2.0 / self.side_l;
        let q = PI / self.side_l;
        let mut psi = Complex64::new(0.0, 0.0);
        let mut grad = [Complex64::new(0.0, 0.0); 2];
        let mut lap = [Complex64::new(0.0, 0.0); 2];
        for mode in &self.modes {
            let (m, k) = (mode.m as usize, mode.k as usize);
            let a = mode.coeff * rot[m] * rot[k] * norm;
            let phi = sx[m] * sy[k];
            psi += a * phi;
            grad[0] += a * (m as f64 * q * cx[m] * sy[k]);
            grad[1] += a * (k as f64 * q * sx[m] * cy[k]);
            if second {
                lap[0] -= a * ((m as f64 * q).powi(2) * phi);
                lap[1] -= a * ((k as f64 * q).powi(2) * phi);
            }
        }
        (psi, grad, lap)
    }
}

impl GuidingWave<2> for BoxWaveFunction2D {
    fn masses(&self) -> [f64; 2] {
        [self.mass; 2]
    }

    fn local(&self, t: f64, x: &[f64; 2]) -> LocalWave<2> {
        let (psi, grad, _) = self.evaluate(t, x, false);
        LocalWave { psi, grad }
    }

    fn second_derivatives(&self, t: f64, x: &[f64; 2]) -> Option<[Complex64; 2]> {
        Some(self.evaluate(t, x, true).2)
    }

    fn density_bound(&self, _t: f64) -> f64 {
        (2.0 * self.amplitude_sum / self.side_l).powi(2)
    }

    fn contains(&self, x: &[f64; 2]) -> bool {
        x.iter().all(|&c| c > 0.0 && c < self.side_l)
    }
}
