use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GuidingWave, LocalWave};
use crate::field::{ComplexField, Spectral};
use crate::{Error, Result};

/// `e^{i k z}` on the whole line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave1D {
    k: f64,
    mass: f64,
}

impl PlaneWave1D {
    pub fn new(k: f64, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument("plane wave needs finite k and mass > 0".into()));
        }
        Ok(Self { k, mass })
    }
}

impl GuidingWave<1> for PlaneWave1D {
    fn masses(&self) -> [f64; 1] {
        [self.mass]
    }

    fn local(&self, t: f64, x: &[f64; 1]) -> LocalWave<1> {
        let psi = Complex64::from_polar(1.0, self.k * x[0] - 0.5 * self.k * self.k / self.mass * t);
        LocalWave { psi, grad: [psi * Complex64::new(0.0, self.k)] }
    }

    fn second_derivatives(&self, t: f64, x: &[f64; 1]) -> Option<[Complex64; 1]> {
        Some([-self.k * self.k * self.psi(t, x)])
    }

    fn density_bound(&self, _t: f64) -> f64 {
        1.0
    }

    fn contains(&self, x: &[f64; 1]) -> bool {
        x[0].is_finite()
    }
}

/// `Σ c_n g_n(z, t)` with each `g_n` a freely spreading Gaussian of initial
/// density width `w` centred at `z_n`:
/// `g = (2 pi w^2)^{-1/4} (1 + i tau)^{-1/2} exp(-(z - z_n)^2 / (4 w^2 (1 + i tau)))`,
/// `tau = t / (2 m w^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeGaussianBranches {
    coeffs: Vec<Complex64>,
    centers: Vec<f64>,
    width: f64,
    mass: f64,
    reach: f64,
}

impl FreeGaussianBranches {
    pub fn new(coeffs: Vec<Complex64>, centers: Vec<f64>, width: f64, mass: f64) -> Result<Self> {
        if coeffs.len() != centers.len() || coeffs.is_empty() {
            return Err(Error::InvalidArgument("one coefficient per branch centre required".into()));
        }
        if !(width > 0.0 && mass > 0.0) {
            return Err(Error::InvalidArgument("width and mass must be > 0".into()));
        }
        let reach = centers.iter().fold(0.0f64, |a, z| a.max(z.abs())) + 60.0 * width;
        Ok(Self { coeffs, centers, width, mass, reach })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Standard deviation of each branch density at time `t`.
    pub fn width_at(&self, t: f64) -> f64 {
        let tau = t / (2.0 * self.mass * self.width * self.width);
        self.width * (1.0 + tau * tau).sqrt()
    }

    fn terms(&self, t: f64, z: f64) -> (Complex64, Complex64, Complex64) {
        let w2 = self.width * self.width;
        let spread = Complex64::new(1.0, t / (2.0 * self.mass * w2));
        let pre = (2.0 * PI * w2).powf(-0.25) / spread.sqrt();
        let mut psi = Complex64::new(0.0, 0.0);
        let mut d1 = Complex64::new(0.0, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        for (c, z0) in self.coeffs.iter().zip(&self.centers) {
            let u = z - z0;
            let a = 1.0 / (4.0 * w2 * spread);
            let g = c * pre * (-u * u * a).exp();
            let slope = -2.0 * u * a;
            psi += g;
            d1 += g * slope;
            d2 += g * (slope * slope - 2.0 * a);
        }
        (psi, d1, d2)
    }
}

impl GuidingWave<1> for FreeGaussianBranches {
    fn masses(&self) -> [f64; 1] {
        [self.mass]
    }

    fn local(&self, t: f64, x: &[f64; 1]) -> LocalWave<1> {
        let (psi, d1, _) = self.terms(t, x[0]);
        LocalWave { psi, grad: [d1] }
    }

    fn second_derivatives(&self, t: f64, x: &[f64; 1]) -> Option<[Complex64; 1]> {
        Some([self.terms(t, x[0]).2])
    }

    fn density_bound(&self, t: f64) -> f64 {
        let amp: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        amp * amp / ((2.0 * PI).sqrt() * self.width_at(t))
    }

    fn contains(&self, x: &[f64; 1]) -> bool {
        x[0].abs() < self.reach
    }
}

/// A 1D wave known at equally spaced snapshot times: cubic Hermite in space
/// from samples and spectral slopes, linear in time.
#[derive(Debug, Clone)]
pub struct SnapshotWave {
    snapshots: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    t0: f64,
    dt: f64,
    z_min: f64,
    dz: f64,
    mass: f64,
    bound: f64,
}

impl SnapshotWave {
    pub fn new(snapshots: &[ComplexField], mass: f64) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::InvalidArgument("at least two snapshots are needed".into()));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be > 0, got {mass}")));
        }
        let grid = *snapshots[0].grid();
        if snapshots.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch("snapshots live on different grids".into()));
        }
        let t0 = snapshots[0].time();
        let dt = snapshots[1].time() - t0;
        let uneven = snapshots
            .windows(2)
            .any(|w| ((w[1].time() - w[0].time()) - dt).abs() > 1e-9 * dt.abs().max(1e-300));
        if !(dt > 0.0) || uneven {
            return Err(Error::InvalidArgument("snapshots must be equally spaced in time".into()));
        }
        let spectral = Spectral::new(grid);
        let mut stored = Vec::with_capacity(snapshots.len());
        let mut bound: f64 = 0.0;
        for s in snapshots {
            bound = bound.max(s.max_modulus().powi(2));
            stored.push((s.values().to_vec(), spectral.derivative(s.values(), 1)?));
        }
        Ok(Self { snapshots: stored, t0, dt, z_min: grid.z_min(), dz: grid.dz(), mass, bound })
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.snapshots.len() - 1) as f64
    }

    fn spatial(&self, slot: usize, z: f64) -> (Complex64, Complex64) {
        let (vals, slopes) = &self.snapshots[slot];
        let n = vals.len();
        let s = (z - self.z_min) / self.dz;
        let i = s.floor();
        let u = s - i;
        let i0 = (i as i64).rem_euclid(n as i64) as usize;
        let i1 = (i0 + 1) % n;
        let (p0, p1, m0, m1) = (vals[i0], vals[i1], slopes[i0] * self.dz, slopes[i1] * self.dz);
        let (u2, u3) = (u * u, u * u * u);
        let value = p0 * (2.0 * u3 - 3.0 * u2 + 1.0) + m0 * (u3 - 2.0 * u2 + u) + p1 * (3.0 * u2 - 2.0 * u3) + m1 * (u3 - u2);
        let slope = (p0 * (6.0 * u2 - 6.0 * u) + m0 * (3.0 * u2 - 4.0 * u + 1.0) + p1 * (6.0 * u - 6.0 * u2) + m1 * (3.0 * u2 - 2.0 * u))
            / self.dz;
        (value, slope)
    }
}

impl GuidingWave<1> for SnapshotWave {
    fn masses(&self) -> [f64; 1] {
        [self.mass]
    }

    fn local(&self, t: f64, x: &[f64; 1]) -> LocalWave<1> {
        let last = self.snapshots.len() - 1;
        let s = ((t - self.t0) / self.dt).clamp(0.0, last as f64);
        let j = (s.floor() as usize).min(last.saturating_sub(1));
        let f = s - j as f64;
        let (a, da) = self.spatial(j, x[0]);
        let (b, db) = self.spatial(j + 1, x[0]);
        LocalWave { psi: a * (1.0 - f) + b * f, grad: [da * (1.0 - f) + db * f] }
    }

    fn density_bound(&self, _t: f64) -> f64 {
        self.bound
    }

    fn contains(&self, x: &[f64; 1]) -> bool {
        let n = self.snapshots[0].0.len() as f64;
        x[0] > self.z_min && x[0] < self.z_min + n * self.dz
    }
}
