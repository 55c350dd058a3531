//! Spherically symmetric Schrödinger-Newton equation
//!
//! `i hbar psi_t = -(hbar^2 / 2m) Δpsi + Phi psi`,
//! `Phi(r) = -G m^2 ∫ |psi(r')|^2 / |r - r'| d^3r'`.
//!
//! The radial problem is solved for `u = r psi` on a cell-centered grid with
//! `u(0) = u(r_max) = 0` imposed by odd reflection about both ends. The
//! kinetic operator is the 3-point Laplacian, applied exactly in time through
//! the sine basis that diagonalises it.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Collapse-criterion prefactor `(1.14)^3`.
pub const COLLAPSE_FACTOR: f64 = 1.14 * 1.14 * 1.14;

/// Ground-state energy coefficient `e` in `E = -(e/3) N^3 G^2 M^5 / hbar^2`.
pub const GROUND_STATE_E: f64 = 0.163;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    n: usize,
    r_max: f64,
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        if n < 64 {
            return Err(Error::InvalidGrid(format!("radial grid needs n >= 64, got {n}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max must be > 0, got {r_max}")));
        }
        Ok(Self { n, r_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n as f64
    }

    /// Cell center `(i + 1/2) dr`.
    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.r(i))
    }

    /// Quadrature weight `4 pi r_i^2 dr` of cell `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let r = self.r(i);
        4.0 * PI * r * r * self.dr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnParams {
    pub hbar: f64,
    pub mass: f64,
    pub grav: f64,
}

impl SnParams {
    pub fn new(hbar: f64, mass: f64, grav: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("grav", grav)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { hbar, mass, grav })
    }

    pub fn unit() -> Self {
        Self { hbar: 1.0, mass: 1.0, grav: 1.0 }
    }

    /// `-(e/3) N^3 G^2 M^5 / hbar^2`.
    pub fn ground_energy_law(&self, norm: f64) -> f64 {
        -(GROUND_STATE_E / 3.0) * norm.powi(3) * self.grav.powi(2) * self.mass.powi(5) / self.hbar.powi(2)
    }
}

/// Radial wave function `psi(r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<Complex64>,
    time: f64,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!("{} values for {} cells", values.len(), grid.n())));
        }
        if values.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("radial field has non-finite samples".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F) -> Result<Self> {
        Self::new(grid, grid.radii().map(f).collect(), 0.0)
    }

    /// Gaussian `exp(-r^2 / 2 sigma^2)` with the requested r.m.s. radius and norm.
    pub fn gaussian(grid: RadialGrid, rms_radius: f64, norm: f64) -> Result<Self> {
        if !(rms_radius > 0.0 && norm > 0.0) {
            return Err(Error::InvalidArgument("Gaussian needs rms_radius > 0 and norm > 0".into()));
        }
        let sigma = rms_radius * (2.0f64 / 3.0).sqrt();
        let mut f = Self::from_fn(grid, |r| Complex64::new((-r * r / (2.0 * sigma * sigma)).exp(), 0.0))?;
        f.renormalize(norm);
        Ok(f)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, c)| c.norm_sqr() * self.grid.weight(i)).sum()
    }

    pub fn rms_radius(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        let m2: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.r(i).powi(2) * c.norm_sqr() * self.grid.weight(i))
            .sum();
        (m2 / n).sqrt()
    }

    /// Fraction of the norm within the outer 5% of the grid.
    pub fn edge_fraction(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        let start = (0.95 * self.grid.n() as f64) as usize;
        let edge: f64 = (start..self.grid.n()).map(|i| self.values[i].norm_sqr() * self.grid.weight(i)).sum();
        edge / n
    }

    fn renormalize(&mut self, target: f64) {
        let n = self.norm();
        if n > 0.0 {
            let s = (target / n).sqrt();
            self.values.iter_mut().for_each(|c| *c *= s);
        }
    }
}

/// `Phi(r) = -G m^2 [ (1/r) ∫_0^r rho 4 pi s^2 ds + ∫_r^{r_max} rho 4 pi s ds ]`,
/// integrating the piecewise-constant cell density exactly.
pub fn radial_poisson(density: &[f64], grid: &RadialGrid, params: &SnParams) -> Result<Vec<f64>> {
    if density.len() != grid.n() {
        return Err(Error::GridMismatch(format!("{} density samples for {} cells", density.len(), grid.n())));
    }
    if let Some((index, &value)) = density.iter().enumerate().find(|(_, &d)| !(d >= 0.0)) {
        return Err(Error::NegativeDensity { index, value });
    }
    let dr = grid.dr();
    let n = grid.n();
    let edge = |i: usize| i as f64 * dr;
    // contributions of cell i split at its center
    let mut inner = vec![0.0; n];
    let mut enclosed = 0.0;
    for i in 0..n {
        let (lo, c, hi) = (edge(i), grid.r(i), edge(i + 1));
        let rho = density[i];
        inner[i] = enclosed + rho * 4.0 * PI / 3.0 * (c.powi(3) - lo.powi(3));
        enclosed += rho * 4.0 * PI / 3.0 * (hi.powi(3) - lo.powi(3));
    }
    let mut outer = vec![0.0; n];
    let mut beyond = 0.0;
    for i in (0..n).rev() {
        let (lo, c, hi) = (edge(i), grid.r(i), edge(i + 1));
        let rho = density[i];
        outer[i] = beyond + rho * 2.0 * PI * (hi * hi - c * c);
        beyond += rho * 2.0 * PI * (hi * hi - lo * lo);
    }
    let coupling = params.grav * params.mass * params.mass;
    Ok((0..n).map(|i| -coupling * (inner[i] / grid.r(i) + outer[i])).collect())
}

/// `E_P = (1/2) ∫ Phi |psi|^2 d^3r`, always `<= 0`.
pub fn self_energy(field: &RadialField, params: &SnParams) -> f64 {
    let rho = field.density();
    let phi = radial_poisson(&rho, &field.grid, params).expect("|psi|^2 is non-negative");
    potential_energy(&rho, &phi, &field.grid)
}

fn potential_energy(rho: &[f64], phi: &[f64], grid: &RadialGrid) -> f64 {
    0.5 * rho.iter().zip(phi).enumerate().map(|(i, (r, p))| r * p * grid.weight(i)).sum::<f64>()
}

/// `(hbar^2 / 2m) ∫ |∇psi|^2 d^3r` for the 3-point Laplacian acting on `u = r psi`.
pub fn kinetic_energy(field: &RadialField, params: &SnParams) -> f64 {
    let g = field.grid;
    let dr = g.dr();
    let u: Vec<Complex64> = field.values.iter().enumerate().map(|(i, c)| c * g.r(i)).collect();
    let n = u.len();
    let mut acc = 0.0;
    for i in 0..n {
        let left = if i == 0 { -u[0] } else { u[i - 1] };
        let right = if i + 1 == n { -u[n - 1] } else { u[i + 1] };
        let lap = (left - 2.0 * u[i] + right) / (dr * dr);
        acc -= (u[i].conj() * lap).re;
    }
    params.hbar * params.hbar / (2.0 * params.mass) * 4.0 * PI * dr * acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnEnergies {
    pub norm: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

impl SnEnergies {
    pub fn of(field: &RadialField, params: &SnParams) -> Self {
        let kinetic = kinetic_energy(field, params);
        let potential = self_energy(field, params);
        Self { norm: field.norm(), kinetic, potential, total: kinetic + potential }
    }

    /// `|2 E_K + E_P| / |E_P|`.
    pub fn virial_residual(&self) -> f64 {
        (2.0 * self.kinetic + self.potential).abs() / self.potential.abs()
    }
}

#[derive(Debug, Clone)]
pub struct SnGroundState {
    pub field: RadialField,
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub norm: f64,
    /// Lowest eigenvalue of the self-consistent Hamiltonian.
    pub eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub virial_residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GroundStateJson {
    #[serde(rename = "N")]
    n: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "E_K")]
    e_k: f64,
    #[serde(rename = "E_P")]
    e_p: f64,
    iterations: usize,
    converged: bool,
}

impl SnGroundState {
    /// `{N, E, E_K, E_P, iterations, converged}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GroundStateJson {
            n: self.norm,
            e: self.energy,
            e_k: self.kinetic,
            e_p: self.potential,
            iterations: self.iterations,
            converged: self.converged,
        })
        .expect("plain struct serialises")
    }
}

const GROUND_STATE_MAX_ITERATIONS: usize = 200_000;

/// Nodeless stationary state with norm `norm_target`.
///
/// Each iteration refreshes `Phi` from the current density, takes one
/// backward-Euler imaginary-time step `(1 + dtau H / hbar) u' = u` and
/// renormalises. The step `dtau = hbar / (2 |min Phi|)` keeps the system
/// positive definite. The fixed point is an exact eigenvector of the discrete
/// self-consistent Hamiltonian, independent of `dtau`.
pub fn sn_ground_state(params: &SnParams, norm_target: f64, grid: &RadialGrid, tol: f64) -> Result<SnGroundState> {
    if !(norm_target > 0.0 && tol > 0.0) {
        return Err(Error::InvalidArgument("norm_target and tol must be > 0".into()));
    }
    let n = grid.n();
    let dr = grid.dr();
    let kin = params.hbar * params.hbar / (2.0 * params.mass * dr * dr);

    // Initial guess: Gaussian at the natural length hbar^2 / (G m^3 N), kept inside the grid.
    let natural = params.hbar.powi(2) / (params.grav * params.mass.powi(3) * norm_target);
    let mut field = RadialField::gaussian(*grid, (3.0 * natural).min(0.2 * grid.r_max()), norm_target)?;
    let mut u: Vec<f64> = field.values.iter().enumerate().map(|(i, c)| c.re * grid.r(i)).collect();

    let mut previous = f64::NAN;
    let mut iterations = 0;
    let mut converged_energy = false;
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    while iterations < GROUND_STATE_MAX_ITERATIONS {
        iterations += 1;
        let rho: Vec<f64> = u.iter().enumerate().map(|(i, x)| (x / grid.r(i)).powi(2)).collect();
        let phi = radial_poisson(&rho, grid, params)?;
        let phi_min = phi.iter().cloned().fold(0.0, f64::min);
        let dtau = if phi_min < 0.0 { params.hbar / (2.0 * phi_min.abs()) } else { params.hbar / kin };
        let s = dtau / params.hbar;
        for i in 0..n {
            let ends = if i == 0 || i + 1 == n { 3.0 } else { 2.0 };
            diag[i] = 1.0 + s * (ends * kin + phi[i]);
        }
        rhs.copy_from_slice(&u);
        solve_symmetric_tridiagonal(&diag, -s * kin, &mut rhs);
        u.copy_from_slice(&rhs);
        let scale = (norm_target / (4.0 * PI * dr * u.iter().map(|x| x * x).sum::<f64>())).sqrt();
        u.iter_mut().for_each(|x| *x *= scale);

        field = RadialField::new(*grid, u.iter().enumerate().map(|(i, x)| Complex64::new(x / grid.r(i), 0.0)).collect(), 0.0)?;
        let energy = SnEnergies::of(&field, params).total;
        if ((energy - previous) / energy).abs() < tol {
            converged_energy = true;
            break;
        }
        previous = energy;
    }

    let e = SnEnergies::of(&field, params);
    let rho = field.density();
    let phi = radial_poisson(&rho, grid, params)?;
    let eigenvalue = (e.kinetic + 2.0 * potential_energy(&rho, &phi, grid)) / e.norm;
    let virial_residual = e.virial_residual();
    let converged = converged_energy && virial_residual < 1e-4;
    if !converged {
        log::warn!(
            "ground state search stopped after {iterations} iterations (energy converged: {converged_energy}, virial {virial_residual:.3e})"
        );
    }
    Ok(SnGroundState {
        field,
        energy: e.total,
        kinetic: e.kinetic,
        potential: e.potential,
        norm: e.norm,
        eigenvalue,
        iterations,
        converged,
        virial_residual,
    })
}

/// Thomas algorithm for a symmetric tridiagonal system with constant
/// off-diagonal; solves in place.
fn solve_symmetric_tridiagonal(diag: &[f64], off: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = off / beta;
        beta = diag[i] - off * c[i - 1];
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Kinetic propagator `exp(-i (hbar / 2m) κ² dt)` applied through the odd
/// extension of `u` to period `2 r_max`.
struct KineticPropagator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    phases: Vec<Complex64>,
    buffer: Vec<Complex64>,
}

impl KineticPropagator {
    fn new(grid: &RadialGrid, params: &SnParams, dt: f64) -> Self {
        let n = grid.n();
        let m = 2 * n;
        let mut planner = FftPlannerScalar::new();
        let dr = grid.dr();
        let dk = PI / grid.r_max();
        let phases = (0..m)
            .map(|j| {
                let jj = if j <= n { j as f64 } else { j as f64 - m as f64 };
                let kappa2 = (2.0 / dr * (0.5 * jj * dk * dr).sin()).powi(2);
                Complex64::from_polar(1.0 / m as f64, -params.hbar / (2.0 * params.mass) * kappa2 * dt)
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            phases,
            buffer: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    fn apply(&mut self, u: &mut [Complex64]) {
        let n = u.len();
        for i in 0..n {
            self.buffer[i] = u[i];
            self.buffer[2 * n - 1 - i] = -u[i];
        }
        self.forward.process(&mut self.buffer);
        for (b, p) in self.buffer.iter_mut().zip(&self.phases) {
            *b *= p;
        }
        self.inverse.process(&mut self.buffer);
        u.copy_from_slice(&self.buffer[..n]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnRecord {
    pub time: f64,
    pub energies: SnEnergies,
    pub rms_radius: f64,
}

#[derive(Debug, Clone)]
pub struct SnRun {
    pub records: Vec<SnRecord>,
    pub final_field: RadialField,
    pub norm_drift: f64,
    pub energy_drift: f64,
    /// Set when more than 1e-3 of the norm reached the outer 5% of the grid.
    pub boundary_warning: bool,
}

/// Strang split-step evolution: half potential kick, exact kinetic flow,
/// potential refreshed from the new density, half kick.
pub fn sn_evolve(field: &RadialField, params: &SnParams, t_final: f64, dt: f64, record_every: usize) -> Result<SnRun> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    if !(t_final > 0.0) || record_every == 0 {
        return Err(Error::InvalidArgument("t_final must be > 0 and record_every >= 1".into()));
    }
    let grid = field.grid;
    let n = grid.n();
    let steps = (t_final / dt).round().max(1.0) as usize;
    let mut kinetic = KineticPropagator::new(&grid, params, dt);
    let radii: Vec<f64> = grid.radii().collect();

    let record = |f: &RadialField| SnRecord { time: f.time, energies: SnEnergies::of(f, params), rms_radius: f.rms_radius() };
    let mut current = field.clone();
    let mut records = vec![record(&current)];
    let mut boundary_warning = current.edge_fraction() > 1e-3;

    let mut phi = radial_poisson(&current.density(), &grid, params)?;
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let half = 0.5 * dt / params.hbar;
    for step in 1..=steps {
        for i in 0..n {
            u[i] = current.values[i] * Complex64::from_polar(radii[i], -half * phi[i]);
        }
        kinetic.apply(&mut u);
        for i in 0..n {
            current.values[i] = u[i] / radii[i];
        }
        phi = radial_poisson(&current.density(), &grid, params)
            .map_err(|_| Error::NonFinite { time: field.time + step as f64 * dt })?;
        for i in 0..n {
            current.values[i] *= Complex64::from_polar(1.0, -half * phi[i]);
        }
        current.time = field.time + step as f64 * dt;
        if step % record_every == 0 || step == steps {
            if current.values.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::NonFinite { time: current.time });
            }
            records.push(record(&current));
            boundary_warning |= current.edge_fraction() > 1e-3;
        }
    }
    if boundary_warning {
        log::warn!("density reached the outer 5% of the radial grid; reflections may contaminate the run");
    }
    let r0 = records[0].energies;
    let norm_drift = records.iter().map(|r| (r.energies.norm - r0.norm).abs() / r0.norm).fold(0.0, f64::max);
    let e_scale = if r0.total != 0.0 { r0.total.abs() } else { 1.0 };
    let energy_drift = records.iter().map(|r| (r.energies.total - r0.total).abs() / e_scale).fold(0.0, f64::max);
    Ok(SnRun { records, final_field: current, norm_drift, energy_drift, boundary_warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseVerdict {
    pub collapses: bool,
    pub threshold: f64,
}

/// Predicted collapse `sqrt(<r^2>) <= (1.14)^3 hbar^2 / (G M^3)`.
pub fn collapse_criterion(rms_radius: f64, params: &SnParams) -> Result<CollapseVerdict> {
    if !(rms_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("rms radius must be > 0, got {rms_radius}")));
    }
    let threshold = COLLAPSE_FACTOR * params.hbar.powi(2) / (params.grav * params.mass.powi(3));
    Ok(CollapseVerdict { collapses: rms_radius <= threshold, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_invariants() {
        assert!(RadialGrid::new(32, 1.0).is_err());
        assert!(RadialGrid::new(64, 0.0).is_err());
        let g = RadialGrid::new(100, 10.0).unwrap();
        assert_eq!(g.r(0), 0.05);
        assert!(SnParams::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn uniform_ball_potential() {
        // a lies on a cell edge; interior oracle -G m^2 2 pi rho0 (a^2 - r^2/3)
        let g = RadialGrid::new(1024, 2.0).unwrap();
        let a = 1.0;
        let rho0 = 0.7;
        let rho: Vec<f64> = g.radii().map(|r| if r < a { rho0 } else { 0.0 }).collect();
        let phi = radial_poisson(&rho, &g, &SnParams::unit()).unwrap();
        for (i, r) in g.radii().enumerate() {
            let expect = if r < a {
                -2.0 * PI * rho0 * (a * a - r * r / 3.0)
            } else {
                -rho0 * 4.0 * PI / 3.0 * a.powi(3) / r
            };
            assert_relative_eq!(phi[i], expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn shell_monopole_and_zero() {
        let g = RadialGrid::new(512, 50.0).unwrap();
        let mut rho = vec![0.0; 512];
        rho[10] = 2.0;
        let dr = g.dr();
        let weight = 2.0 * 4.0 * PI / 3.0 * ((11.0 * dr).powi(3) - (10.0 * dr).powi(3));
        let phi = radial_poisson(&rho, &g, &SnParams::unit()).unwrap();
        for i in 400..512 {
            assert_relative_eq!(phi[i], -weight / g.r(i), max_relative = 1e-8);
        }
        assert!(radial_poisson(&vec![0.0; 512], &g, &SnParams::unit()).unwrap().iter().all(|&p| p == 0.0));
        rho[3] = -1.0;
        assert!(matches!(radial_poisson(&rho, &g, &SnParams::unit()), Err(Error::NegativeDensity { index: 3, .. })));
    }

    #[test]
    fn uniform_ball_self_energy() {
        let g = RadialGrid::new(2048, 2.0).unwrap();
        let a = 1.0;
        let mut f = RadialField::from_fn(g, |r| Complex64::new(if r < a { 1.0 } else { 0.0 }, 0.0)).unwrap();
        f.renormalize(1.0);
        assert_relative_eq!(self_energy(&f, &SnParams::unit()), -0.6 / a, max_relative = 1e-5);
        let zero = RadialField::from_fn(g, |_| Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(self_energy(&zero, &SnParams::unit()), 0.0);
    }

    #[test]
    fn self_energy_is_quadratic_in_density() {
        let g = RadialGrid::new(512, 20.0).unwrap();
        let f = RadialField::gaussian(g, 2.0, 1.0).unwrap();
        let mut scaled = f.clone();
        scaled.renormalize(3.0);
        let p = SnParams::unit();
        assert_relative_eq!(self_energy(&scaled, &p), 9.0 * self_energy(&f, &p), max_relative = 1e-12);
        assert!(self_energy(&f, &p) < 0.0);
    }

    #[test]
    fn gaussian_energies_match_closed_forms() {
        // E_K = 3 N / (4 sigma^2), E_P = -N^2 / (sqrt(2 pi) sigma) for hbar = G = m = 1
        let g = RadialGrid::new(4096, 40.0).unwrap();
        let rms = 2.0;
        let f = RadialField::gaussian(g, rms, 1.0).unwrap();
        let sigma = rms * (2.0f64 / 3.0).sqrt();
        let e = SnEnergies::of(&f, &SnParams::unit());
        assert_relative_eq!(f.rms_radius(), rms, max_relative = 1e-8);
        assert_relative_eq!(e.kinetic, 0.75 / (sigma * sigma), max_relative = 1e-5);
        assert_relative_eq!(e.potential, -1.0 / ((2.0 * PI).sqrt() * sigma), max_relative = 1e-5);
    }

    #[test]
    fn collapse_thresholds() {
        let p = SnParams::unit();
        let v = collapse_criterion(1.0, &p).unwrap();
        assert!(v.collapses);
        assert_relative_eq!(v.threshold, 1.481544, max_relative = 1e-6);
        assert!(!collapse_criterion(2.0, &p).unwrap().collapses);
        let heavy = SnParams::new(1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(collapse_criterion(1.0, &heavy).unwrap().threshold, v.threshold / 8.0, max_relative = 1e-14);
        assert!(collapse_criterion(0.0, &p).is_err());
    }

    #[test]
    fn kinetic_step_is_unitary_and_free_wave_spreads() {
        let g = RadialGrid::new(4096, 60.0).unwrap();
        let p = SnParams::new(1.0, 1.0, 1e-12).unwrap();
        let f = RadialField::gaussian(g, 1.0, 1.0).unwrap();
        let run = sn_evolve(&f, &p, 2.0, 1e-2, 50).unwrap();
        assert!(run.norm_drift < 1e-12);
        // free Gaussian: <r^2>(t) = <r^2>(0) + (3/2)(t / sigma)^2 hbar^2/m^2 ... with sigma^2 = 2/3 rms^2
        let sigma2: f64 = 2.0 / 3.0;
        let expect = (1.0 + 1.5 * 4.0 / sigma2).sqrt();
        assert_relative_eq!(run.final_field.rms_radius(), expect, max_relative = 1e-3);
    }
}
