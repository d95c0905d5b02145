//! Phase-space and information diagnostics of ensemble density matrices.

mod entropy;
mod wigner;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qsd::StateVector;

pub use entropy::{
    entropy_series, entropy_with_error, min_entropy_over_period, von_neumann_entropy, EntropyEstimate,
    MinEntropy, PeriodEntropyOptions, EIGEN_CLAMP, MIN_START,
};
pub use wigner::{
    negativity_refined, negativity_volume, wigner, wigner_coefficient, GridSpec, WignerGrid, WIGNER_BOUND,
};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
/// Most negative eigenvalue tolerated as statistical or truncation slack.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-8;

/// Validated density matrix: Hermitian, unit trace, positive up to slack.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if dim == 0 || m.ncols() != dim {
            return Err(Error::InvalidDensity(format!("matrix is {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let herm = hermiticity_defect(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("hermiticity defect {herm:e}")));
        }
        let trace: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace}")));
        }
        let mut eigenvalues: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let min = *eigenvalues.last().unwrap();
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e}")));
        }
        Ok(Self { m, eigenvalues })
    }

    pub fn from_state(state: &StateVector) -> Result<Self> {
        let c = nalgebra::DVector::from_column_slice(state.coeffs());
        Self::new(&c * c.adjoint())
    }

    /// Diagonal matrix with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = nalgebra::DVector::from_iterator(populations.len(), populations.iter().map(|&p| Complex64::new(p, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `rho_{nm} = <n|rho|m>`.
    pub fn entry(&self, n: usize, m: usize) -> Complex64 {
        self.m[(n, m)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.m)
    }
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
