//! Dilation families and the scaling identities of stationary NLS states.
//!
//! With `E_K = ∫|phi'|^2` and `E_P = -(1/2)∫|phi|^4`:
//!
//! * amplitude-preserving `phi(zeta Z)` gives `E_zeta = zeta E_K + E_P / zeta`;
//! * norm-preserving `xi^{-1/2} phi(Z / xi)` gives
//!   `A_xi = gamma N + E_K / xi^2 + E_P / xi`;
//! * `eta^{-1} phi(Z / eta)` maps stationary states to stationary states.

use serde::{Deserialize, Serialize};

use crate::field::{observables, ComplexField, Spectral};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DilationFamily {
    /// `phi(zeta Z)`
    AmplitudePreserving,
    /// `xi^{-1/2} phi(Z / xi)`
    NormPreserving,
    /// `eta^{-1} phi(Z / eta)`
    StationaryRescale,
}

impl DilationFamily {
    pub const ALL: [DilationFamily; 3] = [
        DilationFamily::AmplitudePreserving,
        DilationFamily::NormPreserving,
        DilationFamily::StationaryRescale,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            DilationFamily::AmplitudePreserving => "zeta",
            DilationFamily::NormPreserving => "xi",
            DilationFamily::StationaryRescale => "eta",
        }
    }

    /// `(coordinate factor s, amplitude factor a)` with `new(Z) = a * old(s Z)`.
    fn factors(self, param: f64) -> (f64, f64) {
        match self {
            DilationFamily::AmplitudePreserving => (param, 1.0),
            DilationFamily::NormPreserving => (1.0 / param, param.powf(-0.5)),
            DilationFamily::StationaryRescale => (1.0 / param, 1.0 / param),
        }
    }
}

/// Fraction of spectral energy that a squeeze by `s > 1` would push past Nyquist.
fn aliased_fraction(field: &ComplexField, s: f64) -> f64 {
    if s <= 1.0 {
        return 0.0;
    }
    let mut spec = field.values().to_vec();
    let spectral = Spectral::new(*field.grid());
    spectral.forward(&mut spec);
    let cutoff = field.grid().k_max() / s;
    let (mut above, mut total) = (0.0, 0.0);
    for (c, &k) in spec.iter().zip(spectral.wavenumbers()) {
        let e = c.norm_sqr();
        total += e;
        if k.abs() > cutoff {
            above += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        above / total
    }
}

/// Applies a dilation about `Z = 0`, resampling by band-limited interpolation.
pub fn dilate(field: &ComplexField, family: DilationFamily, param: f64) -> Result<ComplexField> {
    if !(param > 0.0 && param.is_finite()) {
        return Err(Error::InvalidArgument(format!("dilation parameter must be > 0, got {param}")));
    }
    if param == 1.0 {
        return Ok(field.clone());
    }
    let (s, a) = family.factors(param);
    let fraction = aliased_fraction(field, s);
    if fraction > 1e-20 {
        return Err(Error::Aliasing { param, fraction });
    }
    let targets: Vec<f64> = field.grid().points().map(|z| s * z).collect();
    let values = field.interpolate(&targets).into_iter().map(|c| c * a).collect();
    ComplexField::new(*field.grid(), values, field.time())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub param: f64,
    pub n: f64,
    pub e_k: f64,
    pub e_p: f64,
    pub e: f64,
}

pub fn energy_curve(
    field: &ComplexField,
    family: DilationFamily,
    params: &[f64],
) -> Result<Vec<CurvePoint>> {
    if params.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("curve parameters must be sorted".into()));
    }
    params
        .iter()
        .map(|&param| {
            let o = observables(&dilate(field, family, param)?, 1.0);
            Ok(CurvePoint { param, n: o.norm_n, e_k: o.kinetic_ek, e_p: o.potential_ep, e: o.energy_e })
        })
        .collect()
}

/// Closed-form curve values from the undilated `E_K`, `E_P`.
pub fn analytic_energy(family: DilationFamily, param: f64, e_k: f64, e_p: f64) -> f64 {
    match family {
        DilationFamily::AmplitudePreserving => param * e_k + e_p / param,
        DilationFamily::NormPreserving => e_k / (param * param) + e_p / param,
        // eta^{-1} phi(Z/eta): E_K scales as eta^{-3}, E_P as eta^{-3}
        DilationFamily::StationaryRescale => (e_k + e_p) / param.powi(3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// `dE_zeta/dzeta` at 1, equal to `E_K - E_P`.
    pub d_e_zeta_at_1: f64,
    /// `2 E_P`
    pub d2_e_zeta_at_1: f64,
    /// `dA_xi/dxi` at 1, equal to `-(2 E_K + E_P)`.
    pub d_a_xi_at_1: f64,
    pub virial_residual: f64,
    pub derrick_residual: f64,
    pub gamma: f64,
}

pub fn stationarity_check(field: &ComplexField, beta: f64) -> ScalingReport {
    let o = observables(field, 1.0);
    let (ek, ep) = (o.kinetic_ek, o.potential_ep);
    ScalingReport {
        d_e_zeta_at_1: ek - ep,
        d2_e_zeta_at_1: 2.0 * ep,
        d_a_xi_at_1: -(2.0 * ek + ep),
        virial_residual: 2.0 * ek + ep,
        derrick_residual: ek - ep,
        gamma: beta,
    }
}

/// Centered difference at `at` with relative step `rel_step`, refined by one
/// Richardson extrapolation (step halving).
pub fn richardson_derivative<F>(f: F, at: f64, rel_step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let central = |h: f64| -> Result<f64> { Ok((f(at + h)? - f(at - h)?) / (2.0 * h)) };
    let h = rel_step * at.abs().max(1.0);
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Numerical `dE_zeta/dzeta` at `zeta = 1` from dilated observables.
pub fn numeric_derrick_derivative(field: &ComplexField) -> Result<f64> {
    richardson_derivative(
        |zeta| Ok(observables(&dilate(field, DilationFamily::AmplitudePreserving, zeta)?, 1.0).energy_e),
        1.0,
        1e-4,
    )
}

/// Numerical `dA_xi/dxi` at `xi = 1` with `A_xi = gamma N + E(xi)`.
pub fn numeric_action_derivative(field: &ComplexField, gamma: f64) -> Result<f64> {
    richardson_derivative(
        |xi| {
            let o = observables(&dilate(field, DilationFamily::NormPreserving, xi)?, 1.0);
            Ok(gamma * o.norm_n + o.energy_e)
        },
        1.0,
        1e-4,
    )
}
