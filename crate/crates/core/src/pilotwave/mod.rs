//! de Broglie-Bohm guidance in units with `hbar = 1`.
//!
//! A guiding wave is anything that can report `psi` and its gradient at an
//! arbitrary space-time point ([`GuidingWave`]). Particles move with
//! `v = Im(psi* ∇psi) / (m |psi|^2)`, integrated per trajectory with an
//! adaptive Dormand-Prince scheme ([`integrate_ensemble`]). Ensembles are
//! compared with `|psi|^2` on a [`CoarseGrid`] through the coarse-grained
//! H-function.

mod box2d;
mod branches;
mod coarse;
mod ensemble;
mod relaxation;
mod waves;

pub use box2d::{BoxMode, BoxWaveFunction2D};
pub use branches::{branch_experiment, BranchDynamics, BranchOutcome, BranchSetup};
pub use coarse::{coarse_l1_distance, h_function, CoarseGrid, SamplingFloor};
pub use ensemble::{integrate_ensemble, integrate_to, trajectory, SampleStatus, TrajectoryEnsemble};
pub use relaxation::{relaxation_experiment, InitialDensity, RelaxationConfig, RelaxationSeries};
pub use waves::{FreeGaussianBranches, PlaneWave1D, SnapshotWave};

use num_complex::Complex64;

use crate::field::{ComplexField, Spectral};
use crate::{Error, Result};

/// Relative node threshold: `|psi|^2 < NODE_EPSILON * density_bound` is a node.
pub const NODE_EPSILON: f64 = 1e-12;

/// `psi` and its gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalWave<const D: usize> {
    pub psi: Complex64,
    pub grad: [Complex64; D],
}

pub trait GuidingWave<const D: usize>: Sync {
    /// Mass attached to each coordinate.
    fn masses(&self) -> [f64; D];

    fn local(&self, t: f64, x: &[f64; D]) -> LocalWave<D>;

    /// `∂²psi/∂x_d²` for each coordinate, when available.
    fn second_derivatives(&self, _t: f64, _x: &[f64; D]) -> Option<[Complex64; D]> {
        None
    }

    /// An upper bound on `|psi|^2` at time `t`, used to scale the node threshold.
    fn density_bound(&self, t: f64) -> f64;

    fn contains(&self, x: &[f64; D]) -> bool;

    fn psi(&self, t: f64, x: &[f64; D]) -> Complex64 {
        self.local(t, x).psi
    }
}

/// Guidance velocity at one point, `None` at a node.
pub fn guidance_velocity<const D: usize, W: GuidingWave<D> + ?Sized>(
    wave: &W,
    t: f64,
    x: &[f64; D],
) -> Option<[f64; D]> {
    let l = wave.local(t, x);
    let rho = l.psi.norm_sqr();
    if !(rho >= NODE_EPSILON * wave.density_bound(t)) {
        return None;
    }
    let masses = wave.masses();
    let mut v = [0.0; D];
    for d in 0..D {
        v[d] = (l.psi.conj() * l.grad[d]).im / (masses[d] * rho);
    }
    Some(v)
}

/// `Q = -Σ_d (1/2m_d) R_dd / R` with `R_dd / R = Re(psi_dd/psi) + Im(psi_d/psi)^2`.
pub fn quantum_potential_at<const D: usize, W: GuidingWave<D> + ?Sized>(
    wave: &W,
    t: f64,
    x: &[f64; D],
) -> Option<f64> {
    let l = wave.local(t, x);
    if !(l.psi.norm_sqr() >= NODE_EPSILON * wave.density_bound(t)) {
        return None;
    }
    let second = wave.second_derivatives(t, x)?;
    let masses = wave.masses();
    let mut q = 0.0;
    for d in 0..D {
        let r_dd = (second[d] / l.psi).re + (l.grad[d] / l.psi).im.powi(2);
        q -= r_dd / (2.0 * masses[d]);
    }
    Some(q)
}

fn node_threshold(field: &ComplexField) -> f64 {
    NODE_EPSILON * field.max_modulus().powi(2)
}

/// `Im(psi* psi_z) / (m |psi|^2)` on the grid, with spectral `psi_z`.
/// Samples below the node threshold are `None`.
pub fn velocity_field(psi: &ComplexField, mass: f64) -> Result<Vec<Option<f64>>> {
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be > 0, got {mass}")));
    }
    let dpsi = Spectral::new(*psi.grid()).derivative(psi.values(), 1)?;
    let eps = node_threshold(psi);
    Ok(psi
        .values()
        .iter()
        .zip(&dpsi)
        .map(|(p, d)| {
            let rho = p.norm_sqr();
            (rho >= eps && rho > 0.0).then(|| (p.conj() * d).im / (mass * rho))
        })
        .collect())
}

/// Quantum potential of a single-coordinate field; `masses` must hold one entry.
pub fn quantum_potential(psi: &ComplexField, masses: &[f64]) -> Result<Vec<Option<f64>>> {
    let &[mass] = masses else {
        return Err(Error::InvalidArgument(format!("a 1D field takes one mass, got {}", masses.len())));
    };
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be > 0, got {mass}")));
    }
    let spectral = Spectral::new(*psi.grid());
    let d1 = spectral.derivative(psi.values(), 1)?;
    let d2 = spectral.derivative(psi.values(), 2)?;
    let eps = node_threshold(psi);
    Ok(psi
        .values()
        .iter()
        .zip(d1.iter().zip(&d2))
        .map(|(p, (a, b))| {
            (p.norm_sqr() >= eps && p.norm_sqr() > 0.0).then(|| -((b / p).re + (a / p).im.powi(2)) / (2.0 * mass))
        })
        .collect())
}

/// L2 norm of `∂_t|psi|^2 + ∂_z(|psi|^2 v)` at the middle of three equally
/// spaced snapshots, with the current `Im(psi* psi_z)/m` taken spectrally.
pub fn continuity_residual(
    prev: &ComplexField,
    mid: &ComplexField,
    next: &ComplexField,
    dt: f64,
    mass: f64,
) -> Result<f64> {
    if !(dt > 0.0 && mass > 0.0) {
        return Err(Error::InvalidArgument("dt and mass must be > 0".into()));
    }
    for f in [prev, next] {
        if f.grid() != mid.grid() {
            return Err(Error::GridMismatch("snapshots live on different grids".into()));
        }
    }
    let spectral = Spectral::new(*mid.grid());
    let d = spectral.derivative(mid.values(), 1)?;
    let current: Vec<Complex64> =
        mid.values().iter().zip(&d).map(|(p, dp)| Complex64::new((p.conj() * dp).im / mass, 0.0)).collect();
    let div = spectral.derivative(&current, 1)?;
    let dz = mid.grid().dz();
    let sum: f64 = (0..mid.values().len())
        .map(|i| {
            let drho = (next.values()[i].norm_sqr() - prev.values()[i].norm_sqr()) / (2.0 * dt);
            (drho + div[i].re).powi(2)
        })
        .sum();
    Ok((sum * dz).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_grid;
    use approx::assert_relative_eq;

    #[test]
    fn plane_wave_velocity_is_k() {
        let g = make_grid(64, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |z| Complex64::from_polar(1.0, 3.0 * z)).unwrap();
        for v in velocity_field(&f, 1.0).unwrap() {
            assert_relative_eq!(v.unwrap(), 3.0, max_relative = 1e-12);
        }
        for q in quantum_potential(&f, &[1.0]).unwrap() {
            assert!(q.unwrap().abs() < 1e-10);
        }
        assert!(quantum_potential(&f, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn real_gaussian_has_zero_velocity_and_known_potential() {
        let g = make_grid(512, -20.0, 20.0).unwrap();
        let sigma: f64 = 1.3;
        let f = ComplexField::from_fn(g, 0.0, |z| Complex64::new((-z * z / (4.0 * sigma * sigma)).exp(), 0.0)).unwrap();
        let v = velocity_field(&f, 1.0).unwrap();
        let q = quantum_potential(&f, &[1.0]).unwrap();
        for (i, z) in g.points().enumerate() {
            if z.abs() < 6.0 {
                assert!(v[i].unwrap().abs() < 1e-12);
                // R''/R = z^2/(4 sigma^4) - 1/(2 sigma^2)
                let expect = -0.5 * (z * z / (4.0 * sigma.powi(4)) - 1.0 / (2.0 * sigma * sigma));
                assert!((q[i].unwrap() - expect).abs() < 1e-8, "z {z}");
            }
        }
    }

    #[test]
    fn nodes_are_flagged() {
        let g = make_grid(64, -1.0, 1.0).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |z| Complex64::new(z, 0.0)).unwrap();
        let v = velocity_field(&f, 1.0).unwrap();
        assert!(v[32].is_none());
        assert!(velocity_field(&f, 0.0).is_err());
    }
}
