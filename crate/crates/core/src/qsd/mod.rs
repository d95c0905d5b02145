//! Quantum state diffusion: stochastic pure-state trajectories in the
//! truncated Fock basis and their ensemble average.

mod ensemble;
mod exact;
mod trajectory;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{lindblad_channels, HamiltonianBand, LindbladChannel};
use crate::params::{Frame, SystemParams};

pub use ensemble::{
    accumulate, density_from, mean_excitation, run_ensemble, run_ensemble_checkpointed, trajectory_seed,
    EnsembleAccumulator, EnsembleConfig, EnsembleResult, GroupedAccumulator, Moments,
};
pub use exact::ExactSum;
pub use trajectory::{
    run_trajectory, run_trajectory_with, NoiseSource, SampleSpec, TrajectoryConfig, TrajectoryRecord, MAX_STEP_NORM,
};

/// Occupation of the top levels above which a run is aborted.
pub const TAIL_ALARM: f64 = 1e-6;
/// Number of top levels whose occupation is monitored.
pub const TAIL_LEVELS: usize = 3;

/// Normalized pure state over Fock levels `0..dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    coeffs: Vec<Complex64>,
}

impl StateVector {
    pub fn vacuum(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[0] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(invalid("n", format!("level {n} outside a {dim}-level basis")));
        }
        let mut s = Self::vacuum(dim)?;
        s.coeffs[0] = Complex64::new(0.0, 0.0);
        s.coeffs[n] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Normalizes the given amplitudes.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidDimension(coeffs.len()));
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("coeffs", "state must have a finite non-zero norm"));
        }
        Ok(Self { coeffs: coeffs.into_iter().map(|c| c / norm).collect() })
    }

    /// Coherent state `|beta>` truncated to `dim` levels and renormalized.
    pub fn coherent(dim: usize, beta: Complex64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(dim);
        let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
        for n in 0..dim {
            if n > 0 {
                c *= beta / (n as f64).sqrt();
            }
            coeffs.push(c);
        }
        Self::from_coeffs(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<psi| a^dagger a |psi>`.
    pub fn mean_number(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// Occupation of the top `levels` Fock states.
    pub fn tail_occupation(&self, levels: usize) -> f64 {
        let start = self.dim().saturating_sub(levels);
        self.coeffs[start..].iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Complex Wiener increment for one dissipation channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseIncrement(pub Complex64);

/// Fills `out` with `(g1 + i g2) sqrt(dt/2)`, `g1, g2` standard normal, so that
/// `E[dxi] = 0`, `E[dxi^2] = 0` and `E[|dxi|^2] = dt`.
pub fn fill_wiener<R: Rng + ?Sized>(rng: &mut R, dt: f64, out: &mut [Complex64]) {
    let s = (0.5 * dt).sqrt();
    for z in out.iter_mut() {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(g1 * s, g2 * s);
    }
}

pub fn wiener_increments<R: Rng + ?Sized>(rng: &mut R, dt: f64, n_channels: usize) -> Vec<NoiseIncrement> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n_channels];
    fill_wiener(rng, dt, &mut buf);
    buf.into_iter().map(NoiseIncrement).collect()
}

/// Time discretization of the state-diffusion equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Plain Euler–Maruyama on the full equation.
    Euler,
    /// Strang-split Hamiltonian part: the diagonal `Delta n + chi n^2` phase is
    /// applied exactly in two half steps around a fourth-order Taylor step of
    /// the drive; dissipation and noise then take an Euler–Maruyama step.
    #[default]
    SplitStep,
}

/// Reusable stepping workspace for one parameter set.
#[derive(Debug, Clone)]
pub struct QsdStepper {
    band: HamiltonianBand,
    channels: Vec<LindbladChannel>,
    scheme: Scheme,
    dt: f64,
    half_phase: Vec<Complex64>,
    tmp: Vec<Complex64>,
    tmp2: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl QsdStepper {
    pub fn new(params: &SystemParams, dim: usize, frame: Frame, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        let band = HamiltonianBand::new(params, dim, frame)?;
        let channels = lindblad_channels(params)?;
        let half_phase = band.diagonal().iter().map(|&e| Complex64::from_polar(1.0, -0.5 * e * dt)).collect();
        let zero = vec![Complex64::new(0.0, 0.0); dim];
        Ok(Self { band, channels, scheme, dt, half_phase, tmp: zero.clone(), tmp2: zero.clone(), acc: zero })
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.band.dim()
    }

    /// Upper bound on `dt * ||H||` for the part of the Hamiltonian that the
    /// scheme integrates explicitly.
    pub fn explicit_step_norm(&self, params: &SystemParams) -> f64 {
        let dim = self.dim();
        let drive = 2.0 * (params.omega1 + params.omega2) * ((dim - 1) as f64).sqrt();
        match self.scheme {
            Scheme::Euler => {
                let diag = self.band.diagonal().iter().fold(0.0f64, |m, e| m.max(e.abs()));
                self.dt * (diag + drive)
            }
            Scheme::SplitStep => self.dt * drive,
        }
    }

    /// Advances `psi` from `t` to `t + dt` and renormalizes it.
    pub fn step(&mut self, psi: &mut [Complex64], t: f64, noise: &[Complex64]) -> Result<()> {
        debug_assert_eq!(noise.len(), self.channels.len());
        let dt = self.dt;
        let minus_i = Complex64::new(0.0, -1.0);
        match self.scheme {
            Scheme::Euler => {
                self.band.apply(t, psi, &mut self.tmp);
                for (a, h) in self.acc.iter_mut().zip(&self.tmp) {
                    *a = minus_i * dt * h;
                }
                self.add_dissipation(psi, noise);
                for (p, a) in psi.iter_mut().zip(&self.acc) {
                    *p += a;
                }
            }
            Scheme::SplitStep => {
                for (p, ph) in psi.iter_mut().zip(&self.half_phase) {
                    *p *= ph;
                }
                let f = self.band.drive(t + 0.5 * dt);
                // psi <- sum_k (-i dt H_d)^k / k! psi, k <= 4
                self.tmp.copy_from_slice(psi);
                for k in 1..=4 {
                    self.band.apply_drive(f, &self.tmp, &mut self.tmp2);
                    let c = minus_i * (dt / k as f64);
                    for ((term, next), p) in self.tmp.iter_mut().zip(&self.tmp2).zip(psi.iter_mut()) {
                        *term = c * next;
                        *p += *term;
                    }
                }
                for (p, ph) in psi.iter_mut().zip(&self.half_phase) {
                    *p *= ph;
                }
                self.acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
                self.add_dissipation(psi, noise);
                for (p, a) in psi.iter_mut().zip(&self.acc) {
                    *p += a;
                }
            }
        }
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NumericalBlowup { step: 0, t });
        }
        let inv = 1.0 / norm;
        psi.iter_mut().for_each(|c| *c *= inv);
        Ok(())
    }

    // acc += -1/2 (L^dag L - 2<L^dag> L + <L><L^dag>) psi dt + (L - <L>) psi dxi
    fn add_dissipation(&mut self, psi: &[Complex64], noise: &[Complex64]) {
        let dt = self.dt;
        for (ch, &dxi) in self.channels.iter().zip(noise) {
            if ch.amplitude == 0.0 {
                continue;
            }
            ch.apply(psi, &mut self.tmp);
            ch.apply_dagger_l(psi, &mut self.tmp2);
            let mean_l: Complex64 = psi.iter().zip(&self.tmp).map(|(p, l)| p.conj() * l).sum();
            let mean_ld = mean_l.conj();
            let m2 = mean_l.norm_sqr();
            for n in 0..psi.len() {
                let drift = self.tmp2[n] - 2.0 * mean_ld * self.tmp[n] + m2 * psi[n];
                self.acc[n] += -0.5 * dt * drift + (self.tmp[n] - mean_l * psi[n]) * dxi;
            }
        }
    }
}

/// One Euler–Maruyama step of the state-diffusion equation, renormalized.
pub fn qsd_step(
    state: &StateVector,
    t: f64,
    dt: f64,
    params: &SystemParams,
    frame: Frame,
    noise: &[NoiseIncrement],
) -> Result<StateVector> {
    let mut stepper = QsdStepper::new(params, state.dim(), frame, dt, Scheme::Euler)?;
    if noise.len() != stepper.n_channels() {
        return Err(invalid("noise", format!("expected {} increments, got {}", stepper.n_channels(), noise.len())));
    }
    let dxi: Vec<Complex64> = noise.iter().map(|n| n.0).collect();
    let mut psi = state.coeffs.clone();
    stepper.step(&mut psi, t, &dxi)?;
    Ok(StateVector { coeffs: psi })
}
