//! Bipartite pure states, reduced density matrices and collapse averaging.
//!
//! Alice holds the row index of the coefficient matrix `alpha_ij`, Bob the
//! column index. Bob's reduced state after Alice measures (and forgets the
//! outcome) is compared across Alice's local choices; a trace-one difference
//! between two such averages is a signal.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Tolerance for the normalisation, Hermiticity and trace invariants.
pub const STATE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a density matrix.
pub const EIGEN_TOL: f64 = -1e-10;
/// Largest entry of `U^† U - I` accepted for a unitary.
pub const UNITARY_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

/// `(d_A x d_B)` coefficient matrix of a normalised pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    coeffs: CMatrix,
}

impl BipartiteState {
    pub fn new(coeffs: CMatrix) -> Result<Self> {
        if coeffs.nrows() < 2 || coeffs.ncols() < 2 {
            return Err(Error::InvalidState(format!(
                "both parties need dimension >= 2, got {}x{}",
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidState("coefficients must be finite".into()));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("sum of |alpha_ij|^2 is {norm}, expected 1")));
        }
        Ok(Self { coeffs })
    }

    /// Builds the state from row-major real coefficients.
    pub fn from_real(d_a: usize, d_b: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d_a * d_b {
            return Err(Error::InvalidState(format!("{} values for a {d_a}x{d_b} state", values.len())));
        }
        Self::new(CMatrix::from_row_iterator(d_a, d_b, values.iter().map(|&v| Complex64::new(v, 0.0))))
    }

    /// `a ⊗ b`, with both factors normalised first.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        let na = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nb = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(na > 0.0 && nb > 0.0) {
            return Err(Error::InvalidState("product factors must be non-zero".into()));
        }
        Self::new(CMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j] / (na * nb)))
    }

    /// `(|00> + |11>) / sqrt 2`.
    pub fn bell() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(2, 2, &[s, 0.0, 0.0, s]).expect("Bell state is normalised")
    }

    /// `diag(1/sqrt 3, sqrt(2/3))`, the unequal Schmidt state used throughout the tests.
    pub fn schmidt_example() -> Self {
        Self::from_real(2, 2, &[(1.0f64 / 3.0).sqrt(), 0.0, 0.0, (2.0f64 / 3.0).sqrt()]).expect("normalised")
    }

    /// Complex Gaussian coefficients, normalised.
    pub fn random<R: Rng + ?Sized>(d_a: usize, d_b: usize, rng: &mut R) -> Result<Self> {
        let mut m = complex_gaussian(d_a, d_b, rng);
        let norm = m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        m.unscale_mut(norm);
        Self::new(m)
    }

    pub fn coeffs(&self) -> &CMatrix {
        &self.coeffs
    }

    pub fn dim_a(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.coeffs.ncols()
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let herm = (&entries - entries.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let rho = Self { entries };
        let lowest = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if lowest < EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(rho)
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_part(&self.entries).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest `|eigenvalue|` of `self - other`.
    pub fn spectral_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_dims(other)?;
        let diff = hermitian_part(&(&self.entries - &other.entries));
        Ok(diff.symmetric_eigenvalues().iter().fold(0.0, |m, e| m.max(e.abs())))
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_dims(other)?;
        Ok((&self.entries - &other.entries).norm())
    }

    fn check_dims(&self, other: &DensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidState(format!("dimensions {} and {} differ", self.dim(), other.dim())));
        }
        Ok(())
    }
}

/// Outcome weights `n_i^p / Σ_k n_k^p` for conditional norms `n_i`; `p = 2` is the Born rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseRule {
    exponent_p: f64,
}

impl CollapseRule {
    pub fn new(exponent_p: f64) -> Result<Self> {
        if !(exponent_p > 0.0 && exponent_p.is_finite()) {
            return Err(Error::InvalidArgument(format!("collapse exponent must be finite and > 0, got {exponent_p}")));
        }
        Ok(Self { exponent_p })
    }

    pub fn born() -> Self {
        Self { exponent_p: 2.0 }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent_p
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary from the QR factorisation of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = complex_gaussian(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rj = r[(j, j)];
        let phase = if rj.norm() > 0.0 { rj / rj.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s].map(|v| Complex64::new(v, 0.0)))
}

/// Largest entry of `U^† U - I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `rho^B_ab = Σ_i alpha_ia conj(alpha_ib)`.
pub fn partial_trace_a(state: &BipartiteState) -> DensityMatrix {
    let a = state.coeffs();
    let rho = a.transpose() * a.map(|c| c.conj());
    DensityMatrix { entries: hermitian_part(&rho) }
}

/// Applies `U ⊗ 1`: `alpha'_kj = Σ_i U_ki alpha_ij`.
pub fn rotate_alice(state: &BipartiteState, unitary: &CMatrix) -> Result<BipartiteState> {
    if unitary.nrows() != state.dim_a() {
        return Err(Error::InvalidArgument(format!(
            "unitary is {}x{}, Alice's dimension is {}",
            unitary.nrows(),
            unitary.ncols(),
            state.dim_a()
        )));
    }
    let defect = unitarity_defect(unitary);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(BipartiteState { coeffs: unitary * state.coeffs() })
}

/// Bob's state averaged over Alice's outcomes in the basis selected by
/// `alice_unitary`, with outcome weights given by `rule`.
pub fn measure_average(state: &BipartiteState, alice_unitary: &CMatrix, rule: CollapseRule) -> Result<DensityMatrix> {
    let rotated = rotate_alice(state, alice_unitary)?;
    let a = rotated.coeffs();
    let norms: Vec<f64> = (0..a.nrows()).map(|i| a.row(i).norm()).collect();
    let total: f64 = norms.iter().map(|n| n.powf(rule.exponent_p)).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidState("all conditional Bob states vanish".into()));
    }
    let d = a.ncols();
    let mut rho = CMatrix::zeros(d, d);
    for (i, &n) in norms.iter().enumerate() {
        if n == 0.0 {
            continue;
        }
        let weight = n.powf(rule.exponent_p) / total;
        let b = a.row(i).transpose();
        rho += (&b * b.adjoint()) * Complex64::new(weight / (n * n), 0.0);
    }
    Ok(DensityMatrix { entries: hermitian_part(&rho) })
}

/// Largest spectral distance between the averaged Bob states of any two of
/// Alice's measurement choices.
pub fn signaling_gap(state: &BipartiteState, unitaries: &[CMatrix], rule: CollapseRule) -> Result<f64> {
    if unitaries.len() < 2 {
        return Err(Error::InvalidArgument(format!("at least two unitaries required, got {}", unitaries.len())));
    }
    let averages = unitaries.iter().map(|u| measure_average(state, u, rule)).collect::<Result<Vec<_>>>()?;
    let mut gap: f64 = 0.0;
    for (i, a) in averages.iter().enumerate() {
        for b in &averages[i + 1..] {
            gap = gap.max(a.spectral_distance(b)?);
        }
    }
    Ok(gap)
}

/// Signaling gaps for each exponent in `exponents`, same state and unitaries.
pub fn gap_scan(state: &BipartiteState, unitaries: &[CMatrix], exponents: &[f64]) -> Result<Vec<(f64, f64)>> {
    exponents.iter().map(|&p| Ok((p, signaling_gap(state, unitaries, CollapseRule::new(p)?)?))).collect()
}
