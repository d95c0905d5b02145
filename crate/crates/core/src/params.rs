//! Physical parameters of the two-tone driven Kerr oscillator.
//!
//! All rates and frequencies are expressed in units of the decay rate, so the
//! default `gamma = 1` fixes the time unit to `1/gamma`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameter tuple `(chi, Delta, delta, Omega1, Omega2, gamma, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Kerr anharmonicity `chi`.
    pub chi: f64,
    /// Detuning `Delta = w0 - w1` of the oscillator from the first drive.
    pub delta: f64,
    /// Drive frequency difference `delta = w2 - w1` (the modulation frequency).
    pub delta_mod: f64,
    /// Rabi frequency of the first drive.
    pub omega1: f64,
    /// Rabi frequency of the second drive.
    pub omega2: f64,
    /// Energy decay rate.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Mean thermal occupation of the bath.
    #[serde(default)]
    pub n_bath: f64,
}

fn default_gamma() -> f64 {
    1.0
}

/// Interaction picture in which the Hamiltonian is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Rotating at the first drive frequency; the second drive carries `e^{-i delta t}`.
    #[default]
    #[serde(alias = "FRAME_OMEGA1")]
    Omega1,
    /// Rotating at the second drive frequency; the first drive carries `e^{+i delta t}`.
    #[serde(alias = "FRAME_OMEGA2")]
    Omega2,
}

impl SystemParams {
    /// Parameters with `gamma = 1` and a vacuum bath.
    pub fn new(chi: f64, delta: f64, delta_mod: f64, omega1: f64, omega2: f64) -> Self {
        Self { chi, delta, delta_mod, omega1, omega2, gamma: 1.0, n_bath: 0.0 }
    }

    pub fn with_omega2(mut self, omega2: f64) -> Self {
        self.omega2 = omega2;
        self
    }

    pub fn with_delta_mod(mut self, delta_mod: f64) -> Self {
        self.delta_mod = delta_mod;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("chi", self.chi),
            ("delta", self.delta),
            ("delta_mod", self.delta_mod),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("gamma", self.gamma),
            ("n_bath", self.n_bath),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if self.omega1 < 0.0 {
            return Err(invalid("omega1", format!("must be non-negative, got {}", self.omega1)));
        }
        if self.omega2 < 0.0 {
            return Err(invalid("omega2", format!("must be non-negative, got {}", self.omega2)));
        }
        if self.n_bath < 0.0 {
            return Err(invalid("n_bath", format!("must be non-negative, got {}", self.n_bath)));
        }
        Ok(())
    }

    /// Stroboscopic period `2 pi / delta`.
    pub fn modulation_period(&self) -> Result<f64> {
        if self.delta_mod == 0.0 || !self.delta_mod.is_finite() {
            return Err(invalid("delta_mod", "must be non-zero for a stroboscopic period"));
        }
        Ok(2.0 * PI / self.delta_mod.abs())
    }

    /// Suggested Fock truncation `ceil(4 n + 20)` with `n = ((Omega1 + Omega2)/gamma)^2`.
    ///
    /// This is the classical worst case and grossly overestimates the strongly
    /// anharmonic regimes; it is advisory only.
    pub fn suggested_dim(&self) -> usize {
        let n = ((self.omega1 + self.omega2) / self.gamma).powi(2);
        (4.0 * n + 20.0).ceil() as usize
    }

    /// Strongly anharmonic chaotic regime: `chi = 0.7, Delta = -15, Omega1 = Omega2 = 10.2, delta = 5`.
    pub fn strong_kerr() -> Self {
        Self::new(0.7, -15.0, 5.0, 10.2, 10.2)
    }

    /// `chi = 0.5, Delta = -25, Omega1 = Omega2 = 25, delta = 15`.
    pub fn intermediate_kerr() -> Self {
        Self::new(0.5, -25.0, 15.0, 25.0, 25.0)
    }

    /// Quasiclassical regime: `chi = 0.1, Delta = -15, Omega1 = Omega2 = 27, delta = 5`.
    pub fn weak_kerr() -> Self {
        Self::new(0.1, -15.0, 5.0, 27.0, 27.0)
    }
}
