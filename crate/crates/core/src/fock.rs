//! Truncated Fock-space operators, the rotating-frame Hamiltonian and the
//! Lindblad channels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::params::{Frame, SystemParams};

/// Dense complex operator on the Fock levels `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(pub DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// Largest entrywise `|A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.0 - self.0.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

/// Annihilation operator with `<n-1|a|n> = sqrt(n)`.
pub fn annihilation_matrix(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    let mut m = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(OperatorMatrix(m))
}

pub fn creation_matrix(dim: usize) -> Result<OperatorMatrix> {
    Ok(annihilation_matrix(dim)?.adjoint())
}

pub fn number_matrix(dim: usize) -> Result<OperatorMatrix> {
    check_dim(dim)?;
    Ok(OperatorMatrix(DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })))
}

/// Tridiagonal storage of the Hamiltonian: a static real diagonal plus the
/// drive band, which is the only time-dependent part.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianBand {
    frame: Frame,
    params: SystemParams,
    diagonal: Vec<f64>,
    sqrt_n: Vec<f64>,
}

impl HamiltonianBand {
    pub fn new(params: &SystemParams, dim: usize, frame: Frame) -> Result<Self> {
        check_dim(dim)?;
        let linear = match frame {
            Frame::Omega1 => params.delta,
            Frame::Omega2 => params.delta - params.delta_mod,
        };
        let diagonal = (0..dim)
            .map(|n| {
                let n = n as f64;
                linear * n + params.chi * n * n
            })
            .collect();
        let sqrt_n = (0..dim).map(|n| (n as f64).sqrt()).collect();
        Ok(Self { frame, params: *params, diagonal, sqrt_n })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// `Delta' n + chi n^2` for each level.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Complex drive amplitude `f(t)` multiplying `a^dagger`.
    pub fn drive(&self, t: f64) -> Complex64 {
        let p = &self.params;
        match self.frame {
            Frame::Omega1 => p.omega1 + p.omega2 * Complex64::from_polar(1.0, -p.delta_mod * t),
            Frame::Omega2 => p.omega2 + p.omega1 * Complex64::from_polar(1.0, p.delta_mod * t),
        }
    }

    /// `out = H(t) psi`.
    pub fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let f = self.drive(t);
        self.apply_parts(f, psi, out, true);
    }

    /// `out = (f a^dagger + f* a) psi`, the drive part only.
    pub fn apply_drive(&self, f: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_parts(f, psi, out, false);
    }

    fn apply_parts(&self, f: Complex64, psi: &[Complex64], out: &mut [Complex64], with_diag: bool) {
        let dim = self.dim();
        let fc = f.conj();
        for n in 0..dim {
            let mut acc = if with_diag { psi[n] * self.diagonal[n] } else { Complex64::new(0.0, 0.0) };
            if n > 0 {
                acc += f * self.sqrt_n[n] * psi[n - 1];
            }
            if n + 1 < dim {
                acc += fc * self.sqrt_n[n + 1] * psi[n + 1];
            }
            out[n] = acc;
        }
    }

    pub fn to_matrix(&self, t: f64) -> OperatorMatrix {
        let dim = self.dim();
        let f = self.drive(t);
        let mut m = DMatrix::zeros(dim, dim);
        for n in 0..dim {
            m[(n, n)] = Complex64::new(self.diagonal[n], 0.0);
            if n + 1 < dim {
                m[(n + 1, n)] = f * self.sqrt_n[n + 1];
                m[(n, n + 1)] = f.conj() * self.sqrt_n[n + 1];
            }
        }
        OperatorMatrix(m)
    }
}

/// Rotating-frame Hamiltonian `H(t)/hbar` as a dense matrix.
pub fn hamiltonian_at(t: f64, params: &SystemParams, dim: usize, frame: Frame) -> Result<OperatorMatrix> {
    Ok(HamiltonianBand::new(params, dim, frame)?.to_matrix(t))
}

/// Which ladder operator a dissipation channel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lowering,
    Raising,
}

/// A Lindblad operator `L = amplitude * a` or `amplitude * a^dagger`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladChannel {
    pub ladder: Ladder,
    pub amplitude: f64,
}

impl LindbladChannel {
    /// `out = L psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let dim = psi.len();
        let c = self.amplitude;
        match self.ladder {
            Ladder::Lowering => {
                for n in 0..dim - 1 {
                    out[n] = psi[n + 1] * (c * ((n + 1) as f64).sqrt());
                }
                out[dim - 1] = Complex64::new(0.0, 0.0);
            }
            Ladder::Raising => {
                out[0] = Complex64::new(0.0, 0.0);
                for n in 1..dim {
                    out[n] = psi[n - 1] * (c * (n as f64).sqrt());
                }
            }
        }
    }

    /// `out = L^dagger L psi`, diagonal in the Fock basis.
    pub fn apply_dagger_l(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let dim = psi.len();
        let c2 = self.amplitude * self.amplitude;
        for n in 0..dim {
            let w = match self.ladder {
                Ladder::Lowering => n as f64,
                // a a^dagger on the truncated basis: the top level has no partner
                Ladder::Raising => {
                    if n + 1 < dim {
                        (n + 1) as f64
                    } else {
                        0.0
                    }
                }
            };
            out[n] = psi[n] * (c2 * w);
        }
    }

    pub fn to_matrix(&self, dim: usize) -> Result<OperatorMatrix> {
        let base = match self.ladder {
            Ladder::Lowering => annihilation_matrix(dim)?,
            Ladder::Raising => creation_matrix(dim)?,
        };
        Ok(OperatorMatrix(base.0 * Complex64::new(self.amplitude, 0.0)))
    }
}

/// Dissipation channels `sqrt((N+1) gamma) a` and, for a thermal bath, `sqrt(N gamma) a^dagger`.
pub fn lindblad_channels(params: &SystemParams) -> Result<Vec<LindbladChannel>> {
    if params.n_bath < 0.0 || !params.n_bath.is_finite() {
        return Err(invalid("n_bath", format!("must be non-negative, got {}", params.n_bath)));
    }
    if !(params.gamma >= 0.0) {
        return Err(invalid("gamma", format!("must be non-negative, got {}", params.gamma)));
    }
    let mut out = vec![LindbladChannel {
        ladder: Ladder::Lowering,
        amplitude: ((params.n_bath + 1.0) * params.gamma).sqrt(),
    }];
    if params.n_bath > 0.0 {
        out.push(LindbladChannel { ladder: Ladder::Raising, amplitude: (params.n_bath * params.gamma).sqrt() });
    }
    Ok(out)
}

/// Dense Lindblad operators on `dim` levels.
pub fn lindblad_operators(params: &SystemParams, dim: usize) -> Result<Vec<OperatorMatrix>> {
    check_dim(dim)?;
    lindblad_channels(params)?.iter().map(|c| c.to_matrix(dim)).collect()
}
