//! Wigner function in the Fock basis.
//!
//! `W(X, Y) = sum_{n,m} rho_{nm} W_{mn}(r, theta)` with `X + iY = r e^{i theta}`,
//! where `W_{mn}` is the Wigner transform of `|n><m|`. For `m = n + k` it is
//! `(2/pi) (-1)^n sqrt(n!/m!) e^{ik theta} (2r)^k e^{-2r^2} L_n^k(4r^2)`; the
//! other branch follows from Hermiticity.

use std::f64::consts::{FRAC_2_PI, LN_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DensityMatrix;
use crate::classical::amplitude_bound;
use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;

/// `|W| <= 2/pi` for any state.
pub const WIGNER_BOUND: f64 = FRAC_2_PI;

const LOG_UNDERFLOW: f64 = -700.0;
const RESCALE: f64 = 1e100;
const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Walks `psi_n = sqrt(n!/(n+k)!) L_n^k(x)` upward in `n`, keeping the values
/// bounded by folding large magnitudes into a log scale.
struct LaguerreWalk {
    k: f64,
    x: f64,
    n: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
}

impl LaguerreWalk {
    /// `log_prefactor` is the log of everything multiplying `psi_n` except its sign.
    fn new(k: usize, x: f64, log_prefactor: f64) -> Self {
        Self { k: k as f64, x, n: 0, prev: 0.0, cur: 1.0, log_scale: log_prefactor }
    }

    fn advance(&mut self) {
        let n = self.n as f64;
        let next = ((2.0 * n + 1.0 + self.k - self.x) * self.cur - (n * (n + self.k)).sqrt() * self.prev)
            / ((n + 1.0) * (n + 1.0 + self.k)).sqrt();
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        if self.cur.abs() > RESCALE {
            self.prev /= RESCALE;
            self.cur /= RESCALE;
            self.log_scale += RESCALE.ln();
        }
    }

    /// Current term including prefactor, or zero when it underflows.
    fn value(&self) -> f64 {
        if self.cur == 0.0 {
            return 0.0;
        }
        let log_mag = self.log_scale + self.cur.abs().ln();
        if log_mag < LOG_UNDERFLOW {
            0.0
        } else {
            self.cur.signum() * log_mag.exp()
        }
    }
}

fn half_log_factorial(k: usize) -> f64 {
    0.5 * (2..=k).map(|i| (i as f64).ln()).sum::<f64>()
}

/// Log of `(2/pi) (2r)^k e^{-2r^2} / sqrt(k!)`.
fn log_prefactor(k: usize, r: f64, half_log_fact_k: f64) -> f64 {
    let power = if k == 0 { 0.0 } else { k as f64 * (LN_2 + r.ln()) };
    FRAC_2_PI.ln() + power - 2.0 * r * r - half_log_fact_k
}

/// Coefficient `W_{mn}(r, theta)`, the Wigner transform of `|n><m|`.
///
/// Satisfies `W_{nm} = conj(W_{mn})` exactly.
pub fn wigner_coefficient(m: usize, n: usize, r: f64, theta: f64) -> Complex64 {
    if n > m {
        return wigner_coefficient(n, m, r, theta).conj();
    }
    let k = m - n;
    if k > 0 && r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut walk = LaguerreWalk::new(k, 4.0 * r * r, log_prefactor(k, r, half_log_factorial(k)));
    for _ in 0..n {
        walk.advance();
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::from_polar(sign * walk.value(), k as f64 * theta)
}

/// Rectangular sampling grid in `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square grid `[-half_width, half_width]^2` with `n x n` points.
    pub fn square(half_width: f64, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width, nx: n, ny: n }
    }

    /// 256x256 square of half-width `1.1 max(bound, 4 + sqrt(dim))`.
    pub fn default_for(params: &SystemParams, dim: usize) -> Self {
        let half = 1.1 * amplitude_bound(params).max(4.0 + (dim as f64).sqrt());
        Self::square(half, 256)
    }

    /// Same extents at a different resolution.
    pub fn with_resolution(self, nx: usize, ny: usize) -> Self {
        Self { nx, ny, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 16 {
            return Err(invalid("nx", format!("{} < 16", self.nx)));
        }
        if self.ny < 16 {
            return Err(invalid("ny", format!("{} < 16", self.ny)));
        }
        for (name, lo, hi) in [("x_max", self.x_min, self.x_max), ("y_max", self.y_min, self.y_max)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(invalid(name, format!("extent [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }
}

/// Wigner function samples; `values[j * nx + i] = W(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    /// Riemann sum `sum W dX dY`.
    pub normalization: f64,
    /// False when the normalization is off by more than 1e-2, i.e. the grid
    /// misses part of the state.
    pub normalized: bool,
}

impl WignerGrid {
    pub fn spec(&self) -> GridSpec {
        GridSpec { x_min: self.x_min, x_max: self.x_max, y_min: self.y_min, y_max: self.y_max, nx: self.nx, ny: self.ny }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn cell_area(&self) -> f64 {
        let s = self.spec();
        s.dx() * s.dy()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `W(X, Y)` and the imaginary residue left by any non-Hermitian part of `rho`.
fn wigner_point(rho: &DensityMatrix, half_log_fact: &[f64], x: f64, y: f64) -> (f64, f64) {
    let dim = rho.dim();
    let r = x.hypot(y);
    let theta = y.atan2(x);
    let xx = 4.0 * r * r;
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..dim {
        if k > 0 && r == 0.0 {
            break;
        }
        let phase = Complex64::from_polar(1.0, k as f64 * theta);
        let mut walk = LaguerreWalk::new(k, xx, log_prefactor(k, r, half_log_fact[k]));
        for n in 0..dim - k {
            if n > 0 {
                walk.advance();
            }
            let v = walk.value();
            if v == 0.0 {
                continue;
            }
            let w = phase * if n % 2 == 0 { v } else { -v };
            let upper = rho.entry(n, n + k);
            if k == 0 {
                re += upper.re * w.re;
                im += upper.im * w.re;
            } else {
                let lower = rho.entry(n + k, n);
                re += 2.0 * (upper * w).re;
                im += ((upper - lower.conj()) * w).im;
            }
        }
    }
    (re, im)
}

/// Samples the Wigner function of `rho` on `spec`.
///
/// Fails if `rho` leaves an imaginary residue above 1e-9 anywhere.
pub fn wigner(rho: &DensityMatrix, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let half_log_fact: Vec<f64> = (0..rho.dim()).map(half_log_factorial).collect();
    let rows: Vec<(Vec<f64>, f64)> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            let y = spec.y(j);
            let mut row = Vec::with_capacity(spec.nx);
            let mut worst = 0.0f64;
            for i in 0..spec.nx {
                let (w, im) = wigner_point(rho, &half_log_fact, spec.x(i), y);
                row.push(w);
                worst = worst.max(im.abs());
            }
            (row, worst)
        })
        .collect();
    let residue = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::InvalidDensity(format!("Wigner imaginary residue {residue:e}")));
    }
    let values: Vec<f64> = rows.into_iter().flat_map(|r| r.0).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidDensity(format!("non-finite Wigner value {bad}")));
    }
    let normalization = values.iter().sum::<f64>() * spec.dx() * spec.dy();
    Ok(WignerGrid {
        x_min: spec.x_min,
        x_max: spec.x_max,
        y_min: spec.y_min,
        y_max: spec.y_max,
        nx: spec.nx,
        ny: spec.ny,
        values,
        normalization,
        normalized: (normalization - 1.0).abs() <= 1e-2,
    })
}

/// Phase-space volume of the negative part, `sum |min(W, 0)| dX dY`.
pub fn negativity_volume(grid: &WignerGrid) -> f64 {
    grid.values.iter().map(|&w| (-w).max(0.0)).sum::<f64>() * grid.cell_area()
}

/// Negativity volume on `spec` together with a refinement error estimate,
/// the change against the same extents at half the resolution.
pub fn negativity_refined(rho: &DensityMatrix, spec: &GridSpec) -> Result<(f64, f64)> {
    let fine = negativity_volume(&wigner(rho, spec)?);
    let coarse_spec = spec.with_resolution(spec.nx.div_ceil(2).max(16), spec.ny.div_ceil(2).max(16));
    let coarse = negativity_volume(&wigner(rho, &coarse_spec)?);
    Ok((fine, (fine - coarse).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsd::StateVector;

    use crate::oracles;

    #[test]
    fn origin_values() {
        assert!((wigner_coefficient(0, 0, 0.0, 0.0).re - FRAC_2_PI).abs() < 1e-15);
        assert!((wigner_coefficient(1, 1, 0.0, 0.0).re + FRAC_2_PI).abs() < 1e-15);
        assert_eq!(wigner_coefficient(3, 1, 0.0, 0.4), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn conjugate_symmetry_exact() {
        for (m, n) in [(0, 3), (5, 2), (7, 7), (20, 1)] {
            let a = wigner_coefficient(m, n, 1.3, 0.7);
            let b = wigner_coefficient(n, m, 1.3, 0.7);
            assert_eq!(a, b.conj());
        }
    }

    #[test]
    fn matches_quadrature_oracle() {
        let q = oracles::WignerQuadrature::new();
        for &(m, n, r, th) in &[(1, 0, 0.5, std::f64::consts::FRAC_PI_3), (4, 2, 1.1, -0.3), (0, 6, 2.0, 2.5)] {
            let got = wigner_coefficient(m, n, r, th);
            let want = q.coefficient(m, n, r, th);
            assert!((got - want).norm() < 1e-8, "({m},{n}) {got} vs {want}");
        }
    }

    #[test]
    fn high_index_stays_finite() {
        for &(m, n, r) in &[(300, 250, 9.0), (299, 0, 12.0), (200, 200, 10.0), (250, 10, 0.01)] {
            let w = wigner_coefficient(m, n, r, 0.2);
            assert!(w.norm().is_finite() && w.norm() <= FRAC_2_PI + 1e-9, "{m} {n} {r}: {w}");
        }
    }

    #[test]
    fn vacuum_gaussian() {
        let rho = DensityMatrix::from_state(&StateVector::vacuum(6).unwrap()).unwrap();
        let g = wigner(&rho, &GridSpec::square(3.0, 33)).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (x, y) = (g.spec().x(i), g.spec().y(j));
                let want = FRAC_2_PI * (-2.0 * (x * x + y * y)).exp();
                assert!((g.at(i, j) - want).abs() < 1e-10);
            }
        }
        assert!(g.normalized);
        assert!(negativity_volume(&g) < 1e-6);
    }

    #[test]
    fn coherent_peak() {
        let rho = DensityMatrix::from_state(&StateVector::coherent(40, Complex64::new(1.5, 0.0)).unwrap()).unwrap();
        let spec = GridSpec { x_min: 1.0, x_max: 2.0, y_min: -0.5, y_max: 0.5, nx: 21, ny: 21 };
        let g = wigner(&rho, &spec).unwrap();
        assert!((g.at(10, 10) - FRAC_2_PI).abs() < 1e-4);
        assert!((g.max() - g.at(10, 10)).abs() < 1e-12);
    }

    #[test]
    fn fock_one_negativity() {
        let rho = DensityMatrix::from_state(&StateVector::fock(4, 1).unwrap()).unwrap();
        let g = wigner(&rho, &GridSpec::square(4.0, 256)).unwrap();
        let want = oracles::fock1_negativity();
        assert!((negativity_volume(&g) - want).abs() < 1e-3);
        assert!((g.normalization - 1.0).abs() < 1e-2);
        assert!(g.min() >= -FRAC_2_PI - 0.05);
    }

    #[test]
    fn grid_validation() {
        let rho = DensityMatrix::from_state(&StateVector::vacuum(3).unwrap()).unwrap();
        assert!(wigner(&rho, &GridSpec::square(2.0, 8)).is_err());
        assert!(wigner(&rho, &GridSpec::square(0.0, 16)).is_err());
        let g = wigner(&rho, &GridSpec::square(0.5, 16)).unwrap();
        assert!(!g.normalized);
    }
}
