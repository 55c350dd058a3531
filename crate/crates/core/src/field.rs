//! Periodic 1D grids, sampled complex fields and their NLS observables.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};
use serde::{Deserialize, Serialize};

use crate::numfmt::fmt_f64;
use crate::{Error, Result};

/// Uniform periodic grid on `[z_min, z_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    z_min: f64,
    z_max: f64,
}

impl Grid1D {
    pub fn new(n: usize, z_min: f64, z_max: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "sample count {n} must be a power of two >= 8"
            )));
        }
        if !(z_min.is_finite() && z_max.is_finite()) || z_max <= z_min {
            return Err(Error::InvalidGrid(format!(
                "degenerate domain [{z_min}, {z_max})"
            )));
        }
        Ok(Self { n, z_min, z_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn length(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn dz(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.z_min + self.z_max)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Angular wavenumbers in FFT order; the Nyquist entry is `-k_max`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.length();
        let n = self.n as isize;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk })
            .collect()
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dz()
    }

    fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n && self.z_min == other.z_min && self.z_max == other.z_max
    }
}

/// Forward/inverse FFT pair for one grid size, with unnormalised forward
/// transform and a `1/n` inverse.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid1D) -> Self {
        // The SIMD kernels carry a systematic norm bias of ~1e-16 per
        // transform, which accumulates over long runs.
        let mut planner = FftPlannerScalar::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
            k: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.grid.n as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Applies `multiplier(k)` in Fourier space.
    pub fn apply<F: Fn(usize, f64) -> Complex64>(&self, data: &mut [Complex64], multiplier: F) {
        self.forward(data);
        for (j, (c, &k)) in data.iter_mut().zip(&self.k).enumerate() {
            *c *= multiplier(j, k);
        }
        self.inverse(data);
    }

    /// `order`-th derivative. The unpaired Nyquist mode is dropped for odd
    /// orders so that real fields stay real.
    pub fn derivative(&self, values: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
        let nyquist = self.grid.n / 2;
        let mut out = values.to_vec();
        match order {
            1 => self.apply(&mut out, |j, k| {
                if j == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k)
                }
            }),
            2 => self.apply(&mut out, |_, k| Complex64::new(-k * k, 0.0)),
            other => return Err(Error::UnsupportedOrder(other)),
        }
        Ok(out)
    }
}

/// Complex samples on a [`Grid1D`] plus the simulation time of the snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid1D,
    values: Vec<Complex64>,
    time: f64,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Grid1D, time: f64, f: F) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.n()], time: 0.0 }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// `|psi|^2` at every sample.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus among the first and last few samples, relative to the
    /// field maximum (0 for a zero field).
    pub fn edge_level(&self) -> f64 {
        let peak = self.max_modulus();
        if peak == 0.0 {
            return 0.0;
        }
        let m = 4.min(self.values.len());
        let n = self.values.len();
        let edge = self.values[..m]
            .iter()
            .chain(&self.values[n - m..])
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    pub fn map<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.point(i), c))
            .collect();
        Self { grid: self.grid, values, time: self.time }
    }

    /// Mirror image about the domain center: sample `i` goes to `n - i`.
    pub fn reflect(&self) -> Self {
        let n = self.values.len();
        let values = (0..n).map(|i| self.values[(n - i) % n]).collect();
        Self { grid: self.grid, values, time: self.time }
    }

    /// Evaluates the trigonometric interpolant at the given points. Points
    /// outside `[z_min, z_max)` evaluate to zero: localized fields only.
    pub fn interpolate(&self, points: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut spectrum = self.values.clone();
        Spectral::new(self.grid).forward(&mut spectrum);
        let dk = 2.0 * PI / self.grid.length();
        let half = n / 2;
        let inv_n = 1.0 / n as f64;
        points
            .iter()
            .map(|&z| {
                if z < self.grid.z_min || z >= self.grid.z_max {
                    return Complex64::new(0.0, 0.0);
                }
                let x = z - self.grid.z_min;
                let step = Complex64::from_polar(1.0, dk * x);
                let mut w = Complex64::new(1.0, 0.0);
                let mut acc = spectrum[0];
                for j in 1..half {
                    w *= step;
                    acc += spectrum[j] * w + spectrum[n - j] * w.conj();
                }
                acc += spectrum[half] * (dk * half as f64 * x).cos();
                acc * inv_n
            })
            .collect()
    }

    /// Rectangle-rule integral of `f(z, psi)`.
    pub fn integrate<F: Fn(f64, Complex64) -> f64>(&self, f: F) -> f64 {
        let dz = self.grid.dz();
        self.values
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.point(i), c))
            .sum::<f64>()
            * dz
    }

    pub fn norm(&self) -> f64 {
        self.integrate(|_, c| c.norm_sqr())
    }

    pub(crate) fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    /// Writes the snapshot text format: a `# n z_min z_max time` header
    /// followed by one `z re im` line per sample.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {} {} {} {}",
            self.grid.n,
            fmt_f64(self.grid.z_min),
            fmt_f64(self.grid.z_max),
            fmt_f64(self.time)
        )?;
        for (i, c) in self.values.iter().enumerate() {
            writeln!(out, "{} {} {}", fmt_f64(self.grid.point(i)), fmt_f64(c.re), fmt_f64(c.im))?;
        }
        Ok(())
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_snapshot(file)
    }

    pub fn read_snapshot<R: BufRead>(input: R, source: &Path) -> Result<Self> {
        let bad = |message: String| Error::Parse { path: source.to_path_buf(), message };
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
        let fields: Vec<&str> = header
            .strip_prefix('#')
            .ok_or_else(|| bad("header must start with '#'".into()))?
            .split_whitespace()
            .collect();
        if fields.len() != 4 {
            return Err(bad(format!("header needs 4 fields, found {}", fields.len())));
        }
        let n: usize = fields[0].parse().map_err(|e| bad(format!("n: {e}")))?;
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| bad(format!("{what}: {e}")))
        };
        let grid = Grid1D::new(n, num(fields[1], "z_min")?, num(fields[2], "z_max")?)?;
        let time = num(fields[3], "time")?;
        let mut values = Vec::with_capacity(n);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(bad(format!("line {}: expected `z re im`", row + 2)));
            }
            values.push(Complex64::new(num(cols[1], "re")?, num(cols[2], "im")?));
        }
        if values.len() != n {
            return Err(bad(format!("expected {n} samples, found {}", values.len())));
        }
        Self::new(grid, values, time)
    }

    pub fn load_snapshot(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_snapshot(file, path)
    }
}

pub fn make_grid(n: usize, z_min: f64, z_max: f64) -> Result<Grid1D> {
    Grid1D::new(n, z_min, z_max)
}

pub fn spectral_derivative(field: &ComplexField, order: u32) -> Result<ComplexField> {
    let values = Spectral::new(field.grid).derivative(&field.values, order)?;
    Ok(ComplexField { grid: field.grid, values, time: field.time })
}

/// Noether charges of a snapshot. `center_r` is `None` for a zero field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub norm_n: f64,
    pub momentum_p: f64,
    pub kinetic_ek: f64,
    pub potential_ep: f64,
    pub energy_e: f64,
    pub center_r: Option<f64>,
}

/// `N`, `P`, `E_K`, `E_P = -(g/2)∫|psi|^4`, `E` and `R` by the rectangle rule.
///
/// `P = i∫(psi ∂psi* - psi* ∂psi)dz`, so that `dR/ds = P/N` under
/// `i psi_s + psi_zz + |psi|^2 psi = 0`.
pub fn observables(field: &ComplexField, nonlinearity_coupling: f64) -> ObservableRecord {
    let spectral = Spectral::new(field.grid);
    let dpsi = spectral
        .derivative(&field.values, 1)
        .expect("first derivative is always supported");
    observables_with(field, &dpsi, nonlinearity_coupling)
}

pub(crate) fn observables_with(
    field: &ComplexField,
    dpsi: &[Complex64],
    g: f64,
) -> ObservableRecord {
    let dz = field.grid.dz();
    let mut norm = 0.0;
    let mut kinetic = 0.0;
    let mut quartic = 0.0;
    let mut momentum = 0.0;
    let mut first_moment = 0.0;
    for (i, (&psi, &d)) in field.values.iter().zip(dpsi).enumerate() {
        let rho = psi.norm_sqr();
        norm += rho;
        kinetic += d.norm_sqr();
        quartic += rho * rho;
        // i(psi d* - psi* d) = 2 Im(psi* d)
        momentum += 2.0 * (psi.conj() * d).im;
        first_moment += field.grid.point(i) * rho;
    }
    let norm_n = norm * dz;
    let kinetic_ek = kinetic * dz;
    let potential_ep = -0.5 * g * quartic * dz;
    ObservableRecord {
        norm_n,
        momentum_p: momentum * dz,
        kinetic_ek,
        potential_ep,
        energy_e: kinetic_ek + potential_ep,
        center_r: (norm_n > 0.0).then(|| first_moment * dz / norm_n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L2,
    Linf,
}

pub fn field_distance(a: &ComplexField, b: &ComplexField, metric: Metric) -> Result<f64> {
    a.check_same_grid(b)?;
    let diffs = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr());
    Ok(match metric {
        Metric::L2 => (diffs.sum::<f64>() * a.grid.dz()).sqrt(),
        Metric::Linf => diffs.fold(0.0, f64::max).sqrt(),
    })
}

/// Distance after removing the best-fit global phase: `min_θ ‖a e^{iθ} − b‖`,
/// with θ taken from `arg <a, b>`.
pub fn shape_distance(a: &ComplexField, b: &ComplexField, metric: Metric) -> Result<f64> {
    a.check_same_grid(b)?;
    let overlap: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    let rotated = a.map(|_, c| c * phase);
    field_distance(&rotated, b, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    fn soliton(grid: Grid1D) -> ComplexField {
        ComplexField::from_fn(grid, 0.0, |z| Complex64::new(2f64.sqrt() * sech(z), 0.0)).unwrap()
    }

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(8, 0.0, 8.0).unwrap();
        assert_eq!(g.dz(), 1.0);
        assert_eq!(g.points().collect::<Vec<_>>(), (0..8).map(f64::from).collect::<Vec<_>>());
        assert_eq!(make_grid(1024, -40.0, 40.0).unwrap().dz(), 0.078125);
        assert!(matches!(make_grid(12, 0.0, 1.0), Err(Error::InvalidGrid(_))));
        assert!(make_grid(4, 0.0, 1.0).is_err());
        assert!(make_grid(16, 1.0, 1.0).is_err());
    }

    #[test]
    fn fourier_eigenfunction_derivative() {
        let g = make_grid(64, 0.0, 2.0 * PI).unwrap();
        let k = 5.0;
        let f = ComplexField::from_fn(g, 0.0, |z| Complex64::from_polar(1.0, k * z)).unwrap();
        let d = spectral_derivative(&f, 1).unwrap();
        for (a, b) in d.values().iter().zip(f.values()) {
            assert!((a - Complex64::new(0.0, k) * b).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_has_zero_second_derivative() {
        let g = make_grid(32, -1.0, 1.0).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |_| Complex64::new(3.0, -1.0)).unwrap();
        let d = spectral_derivative(&f, 2).unwrap();
        assert!(d.values().iter().all(|c| c.norm() < 1e-13));
        assert!(matches!(spectral_derivative(&f, 3), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        // Oracle: centered 3-point differences, accurate to O(dz^2).
        let g = make_grid(2048, -30.0, 30.0).unwrap();
        let f = soliton(g);
        let d2 = spectral_derivative(&f, 2).unwrap();
        let dz = g.dz();
        let v = f.values();
        let n = v.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let fd = (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) / (dz * dz);
            worst = worst.max((fd - d2.values()[i]).norm());
        }
        // leading FD error is dz^2/12 * max|psi''''| with max|psi''''| = 5*sqrt(2)
        assert!(worst < dz * dz / 12.0 * 5.0 * 2f64.sqrt() * 1.05, "worst {worst}");
        assert!(worst > 0.0);
    }

    #[test]
    fn soliton_observables() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        let o = observables(&soliton(g), 1.0);
        assert_relative_eq!(o.norm_n, 4.0, max_relative = 1e-12);
        assert_relative_eq!(o.kinetic_ek, 4.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(o.potential_ep, -8.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(o.energy_e, -4.0 / 3.0, max_relative = 1e-12);
        assert_eq!(o.energy_e, o.kinetic_ek + o.potential_ep);
        assert!(o.momentum_p.abs() < 1e-13);
    }

    #[test]
    fn zero_and_gaussian() {
        let g = make_grid(256, -10.0, 10.0).unwrap();
        let o = observables(&ComplexField::zeros(g), 1.0);
        assert_eq!((o.norm_n, o.momentum_p, o.energy_e), (0.0, 0.0, 0.0));
        assert_eq!(o.center_r, None);
        let gauss = ComplexField::from_fn(g, 0.0, |z| Complex64::new((-z * z).exp(), 0.0)).unwrap();
        assert_relative_eq!(observables(&gauss, 1.0).norm_n, (PI / 2.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn distances() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        let f = soliton(g);
        assert_eq!(field_distance(&f, &f, Metric::L2).unwrap(), 0.0);
        let neg = f.map(|_, c| -c);
        assert_relative_eq!(
            field_distance(&f, &neg, Metric::Linf).unwrap(),
            2.0 * f.max_modulus(),
            max_relative = 1e-15
        );
        // Shift by one sample; oracle is an independent direct sum.
        let dz = g.dz();
        let shifted =
            ComplexField::from_fn(g, 0.0, |z| Complex64::new(2f64.sqrt() * sech(z - dz), 0.0)).unwrap();
        let direct: f64 = g
            .points()
            .map(|z| (2f64.sqrt() * (sech(z) - sech(z - dz))).powi(2))
            .sum::<f64>()
            * dz;
        let d = field_distance(&f, &shifted, Metric::L2).unwrap();
        assert!(d > 0.0);
        assert_relative_eq!(d, direct.sqrt(), max_relative = 1e-12);
        let other = ComplexField::zeros(make_grid(512, -40.0, 40.0).unwrap());
        assert!(matches!(field_distance(&f, &other, Metric::L2), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn interpolation_reproduces_samples_and_midpoints() {
        let g = make_grid(512, -30.0, 30.0).unwrap();
        let f = soliton(g);
        let at_nodes = f.interpolate(&g.points().collect::<Vec<_>>());
        for (a, b) in at_nodes.iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let mids: Vec<f64> = g.points().map(|z| z + 0.5 * g.dz()).take(500).collect();
        for (z, v) in mids.iter().zip(f.interpolate(&mids)) {
            assert!((v.re - 2f64.sqrt() * sech(*z)).abs() < 1e-10);
        }
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let g = make_grid(64, -5.0, 5.0).unwrap();
        let f = ComplexField::from_fn(g, 0.123456789, |z| Complex64::new(z.sin() / 3.0, 1e-200 * z)).unwrap();
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# 64 -5 5 0.123456789\n"));
        let back = ComplexField::read_snapshot(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, f);
        let mut again = Vec::new();
        back.write_snapshot(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn malformed_snapshot_rejected() {
        let err = ComplexField::read_snapshot(&b"# 8 0 1 0\n0 1 0\n"[..], Path::new("x")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    fn band_limited(coeffs: &[(i32, f64, f64)]) -> ComplexField {
        let g = make_grid(64, -PI, PI).unwrap();
        ComplexField::from_fn(g, 0.0, |z| {
            coeffs
                .iter()
                .map(|&(k, re, im)| Complex64::new(re, im) * Complex64::from_polar(1.0, k as f64 * z))
                .sum()
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn global_phase_invariance(theta in -PI..PI, re in -1.0..1.0f64, im in -1.0..1.0f64) {
            let f = band_limited(&[(0, 0.5, 0.0), (1, re, im), (-3, 0.2, 0.1), (7, im, re)]);
            let rotated = f.map(|_, c| c * Complex64::from_polar(1.0, theta));
            let a = observables(&f, 1.0);
            let b = observables(&rotated, 1.0);
            for (x, y) in [(a.norm_n, b.norm_n), (a.momentum_p, b.momentum_p), (a.kinetic_ek, b.kinetic_ek),
                           (a.potential_ep, b.potential_ep), (a.energy_e, b.energy_e),
                           (a.center_r.unwrap(), b.center_r.unwrap())] {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn parseval_kinetic_energy(c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, c3 in -1.0..1.0f64) {
            let f = band_limited(&[(2, c1, c2), (-5, c3, 0.3), (11, 0.1, c1)]);
            let ek = observables(&f, 1.0).kinetic_ek;
            let g = *f.grid();
            let mut spec = f.values().to_vec();
            Spectral::new(g).forward(&mut spec);
            let n = g.n() as f64;
            let parseval: f64 = spec.iter().zip(g.wavenumbers()).map(|(c, k)| k * k * c.norm_sqr()).sum::<f64>()
                * g.length() / (n * n);
            prop_assert!((ek - parseval).abs() <= 1e-12 * parseval.max(1e-300));
        }

        #[test]
        fn reflection_symmetry(shift in -3.0..3.0f64, v in -2.0..2.0f64) {
            let g = make_grid(512, -40.0, 40.0).unwrap();
            let f = ComplexField::from_fn(g, 0.0, |z| {
                Complex64::from_polar(2f64.sqrt() * sech(z - shift), 0.5 * v * z)
            }).unwrap();
            let r = f.reflect();
            let a = observables(&f, 1.0);
            let b = observables(&r, 1.0);
            let c = g.center();
            prop_assert!((a.norm_n - b.norm_n).abs() < 1e-12);
            prop_assert!((a.kinetic_ek - b.kinetic_ek).abs() < 1e-10);
            prop_assert!((a.potential_ep - b.potential_ep).abs() < 1e-12);
            prop_assert!((a.momentum_p + b.momentum_p).abs() < 1e-10);
            prop_assert!(((a.center_r.unwrap() - c) + (b.center_r.unwrap() - c)).abs() < 1e-10);
        }
    }
}
