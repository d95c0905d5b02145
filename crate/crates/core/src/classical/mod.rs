//! Semiclassical amplitude equation: trajectories, stroboscopic sections,
//! largest Lyapunov exponent, the drive-limited amplitude bound and the
//! scaling symmetry.

mod dopri;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::SystemParams;

pub use dopri::{DenseStep, Dopri5};

/// Default relative tolerance of the classical integrator.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of modulation periods discarded before recording.
pub const DEFAULT_SKIP_PERIODS: usize = 200;
/// `|lambda_max|` below this fraction of `gamma` is treated as inconclusive.
pub const CHAOS_THRESHOLD: f64 = 0.02;

/// Phase-space point `X = Re alpha`, `Y = Im alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn radius(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Stroboscopic samples `alpha(t0 + n T)` for `skipped < n <= skipped + len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSet {
    pub t0: f64,
    pub period: f64,
    pub skipped: usize,
    pub points: Vec<PhasePoint>,
}

impl PoincareSet {
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.radius()).fold(0.0, f64::max)
    }

    /// Largest distance between any two points (exact, quadratic).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max((p.x - q.x).hypot(p.y - q.y));
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda_max: f64,
    pub n_renorm: usize,
    pub converged: bool,
}

/// Classification of a Lyapunov estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Chaotic,
    Regular,
    Inconclusive,
}

impl Regime {
    pub fn classify(lambda_max: f64, gamma: f64) -> Self {
        if lambda_max > CHAOS_THRESHOLD * gamma {
            Regime::Chaotic
        } else if lambda_max < -CHAOS_THRESHOLD * gamma {
            Regime::Regular
        } else {
            Regime::Inconclusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Chaotic => "chaotic",
            Regime::Regular => "regular",
            Regime::Inconclusive => "inconclusive",
        }
    }
}

/// Right-hand side of the amplitude equation
/// `d alpha/dt = -gamma/2 alpha - i (Delta + chi (1 + 2|alpha|^2)) alpha - i (Omega1 + Omega2 e^{-i delta t})`.
pub fn classical_rhs(alpha: Complex64, t: f64, params: &SystemParams) -> Complex64 {
    let w = params.delta + params.chi * (1.0 + 2.0 * alpha.norm_sqr());
    let drive = params.omega1 + params.omega2 * Complex64::from_polar(1.0, -params.delta_mod * t);
    -0.5 * params.gamma * alpha - Complex64::i() * (w * alpha + drive)
}

// Same field on (x, y), inlined for the integrator hot loop.
#[inline]
fn rhs_xy(t: f64, x: f64, y: f64, p: &SystemParams) -> (f64, f64, f64) {
    let w = p.delta + p.chi * (1.0 + 2.0 * (x * x + y * y));
    let (s, c) = (p.delta_mod * t).sin_cos();
    let fr = p.omega1 + p.omega2 * c;
    let fi = -p.omega2 * s;
    (-0.5 * p.gamma * x + w * y + fi, -0.5 * p.gamma * y - w * x - fr, w)
}

/// `(|Omega1| + |Omega2|) / gamma`, the largest amplitude any post-transient
/// trajectory can reach.
pub fn amplitude_bound(params: &SystemParams) -> f64 {
    (params.omega1.abs() + params.omega2.abs()) / params.gamma
}

/// Parameters for which `lambda * alpha(t)` solves the amplitude equation
/// whenever `alpha(t)` solves it for `params`.
pub fn scaling_transform(params: &SystemParams, lambda: f64) -> Result<SystemParams> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be a positive real, got {lambda}")));
    }
    let l2 = lambda * lambda;
    Ok(SystemParams {
        chi: params.chi / l2,
        delta: params.delta + params.chi * (1.0 - 1.0 / l2),
        omega1: lambda * params.omega1,
        omega2: lambda * params.omega2,
        ..*params
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 1e-14 && tol <= 1e-3) {
        return Err(invalid("tol", format!("must lie in (1e-14, 1e-3], got {tol}")));
    }
    Ok(())
}

// Absolute floor proportional to the attractor scale, so the error control
// commutes with the amplitude scaling symmetry.
fn amplitude_scale(params: &SystemParams, alpha0: Complex64) -> f64 {
    let s = amplitude_bound(params) + alpha0.norm();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

fn solver2(params: &SystemParams, alpha0: Complex64, tol: f64) -> Dopri5<2> {
    let atol = tol * amplitude_scale(params, alpha0);
    Dopri5::new(tol, [atol; 2])
}

/// Integrates the amplitude equation on `[t0, t1]` and returns dense-output
/// samples at `sample_times` (which must lie in `[t0, t1]`, ascending).
pub fn integrate_classical(
    alpha0: Complex64,
    t0: f64,
    t1: f64,
    params: &SystemParams,
    tol: f64,
    sample_times: &[f64],
) -> Result<Vec<(f64, PhasePoint)>> {
    if !(t1 > t0) {
        return Err(invalid("t1", format!("must exceed t0 = {t0}, got {t1}")));
    }
    check_tol(tol)?;
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("sample_times", "must be ascending"));
    }
    if let (Some(&first), Some(&last)) = (sample_times.first(), sample_times.last()) {
        if first < t0 || last > t1 {
            return Err(invalid("sample_times", format!("must lie in [{t0}, {t1}]")));
        }
    }
    let p = *params;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next = 0usize;
    while next < sample_times.len() && sample_times[next] <= t0 {
        out.push((sample_times[next], PhasePoint::from_complex(alpha0)));
        next += 1;
    }
    let f = move |t: f64, y: &[f64; 2]| {
        let (dx, dy, _) = rhs_xy(t, y[0], y[1], &p);
        [dx, dy]
    };
    solver2(params, alpha0, tol).integrate(f, t0, [alpha0.re, alpha0.im], t1, |step, _| {
        let end = step.t + step.h;
        while next < sample_times.len() && sample_times[next] <= end {
            let s = sample_times[next];
            let y = step.eval(s);
            out.push((s, PhasePoint { x: y[0], y: y[1] }));
            next += 1;
        }
    })?;
    Ok(out)
}

/// `n + 1` equally spaced sample times covering `[t0, t1]`.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|k| if k == n { t1 } else { t0 + (t1 - t0) * k as f64 / n as f64 }).collect()
}

/// Poincaré section at `t_n = t0 + n 2pi/delta`, keeping `n_skip < n <= n_skip + n_points`.
///
/// The trajectory is integrated continuously and the section is read from the
/// dense output, so the points coincide with [`integrate_classical`] samples.
pub fn poincare_section(
    params: &SystemParams,
    alpha0: Complex64,
    t0: f64,
    n_points: usize,
    n_skip: usize,
    tol: f64,
) -> Result<PoincareSet> {
    params.validate()?;
    let period = params.modulation_period()?;
    let mut set = PoincareSet { t0, period, skipped: n_skip, points: Vec::with_capacity(n_points) };
    if n_points == 0 {
        return Ok(set);
    }
    let times: Vec<f64> = (n_skip + 1..=n_skip + n_points).map(|n| t0 + period * n as f64).collect();
    let t1 = *times.last().unwrap();
    set.points = integrate_classical(alpha0, t0, t1, params, tol, &times)?.into_iter().map(|(_, p)| p).collect();
    Ok(set)
}

/// Settings for the tangent-space Lyapunov estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    /// Total integration time, transient included.
    pub t_total: f64,
    /// Leading time discarded before the tangent vector is tracked.
    pub transient: f64,
    pub renorm_period: f64,
    pub tol: f64,
}

impl LyapunovOptions {
    /// One renormalization per modulation period, 200 transient periods, then
    /// `measured_periods` periods of measurement.
    pub fn for_params(params: &SystemParams, measured_periods: usize) -> Result<Self> {
        let period = params.modulation_period()?;
        let transient = DEFAULT_SKIP_PERIODS as f64 * period;
        Ok(Self {
            t_total: transient + measured_periods as f64 * period,
            transient,
            renorm_period: period,
            tol: DEFAULT_TOL,
        })
    }
}

// Growth rates from the first renormalizations are dropped while the tangent
// vector aligns with the most unstable direction.
const TANGENT_ALIGN_SEGMENTS: usize = 10;
const CONVERGENCE_WINDOW: f64 = 0.05;

/// Largest Lyapunov exponent by co-integrating the linearized flow and
/// renormalizing the tangent vector every `renorm_period` (Benettin's method).
pub fn lyapunov_max(params: &SystemParams, alpha0: Complex64, opts: &LyapunovOptions) -> Result<LyapunovEstimate> {
    params.validate()?;
    check_tol(opts.tol)?;
    if !(opts.renorm_period > 0.0) {
        return Err(invalid("renorm_period", "must be positive"));
    }
    if !(opts.transient >= 0.0) {
        return Err(invalid("transient", "must be non-negative"));
    }
    let measured = opts.t_total - opts.transient;
    let n_segments = (measured / opts.renorm_period + 1e-9).floor() as usize;
    if n_segments < 100 + TANGENT_ALIGN_SEGMENTS {
        return Err(invalid(
            "t_total",
            format!("need at least {} renormalization periods after the transient", 100 + TANGENT_ALIGN_SEGMENTS),
        ));
    }

    let p = *params;
    let mut alpha = alpha0;
    if opts.transient > 0.0 {
        let f = move |t: f64, y: &[f64; 2]| {
            let (dx, dy, _) = rhs_xy(t, y[0], y[1], &p);
            [dx, dy]
        };
        let (y, _) = solver2(params, alpha0, opts.tol).integrate(f, 0.0, [alpha0.re, alpha0.im], opts.transient, |_, _| {})?;
        alpha = Complex64::new(y[0], y[1]);
    }

    let scale = amplitude_scale(params, alpha0);
    let solver = Dopri5::<4>::new(opts.tol, [opts.tol * scale, opts.tol * scale, opts.tol, opts.tol]);
    let four_chi = 4.0 * p.chi;
    let f = move |t: f64, s: &[f64; 4]| {
        let (x, y, u, v) = (s[0], s[1], s[2], s[3]);
        let (dx, dy, w) = rhs_xy(t, x, y, &p);
        let g = -0.5 * p.gamma;
        let jxx = g + four_chi * x * y;
        let jxy = w + four_chi * y * y;
        let jyx = -w - four_chi * x * x;
        let jyy = g - four_chi * x * y;
        [dx, dy, jxx * u + jxy * v, jyx * u + jyy * v]
    };

    let mut state = [alpha.re, alpha.im, 1.0, 0.0];
    let mut t = opts.transient;
    let mut rates = Vec::with_capacity(n_segments);
    for _ in 0..n_segments {
        let t_next = t + opts.renorm_period;
        let (s, _) = solver.integrate(f, t, state, t_next, |_, _| {})?;
        let norm = s[2].hypot(s[3]);
        rates.push(norm.ln() / opts.renorm_period);
        state = [s[0], s[1], s[2] / norm, s[3] / norm];
        t = t_next;
    }

    let used = &rates[TANGENT_ALIGN_SEGMENTS..];
    let n = used.len();
    let mean_of = |k: usize| used[..k].iter().sum::<f64>() / k as f64;
    let lambda_max = mean_of(n);
    let spread = [n / 2, (3 * n) / 4]
        .iter()
        .map(|&k| (mean_of(k) - lambda_max).abs())
        .fold(0.0, f64::max);
    let converged = n >= 100 && spread < CONVERGENCE_WINDOW * params.gamma;
    Ok(LyapunovEstimate { lambda_max, n_renorm: n, converged })
}

/// Bisects `[lo, hi]` for a sign change of `f`, which must differ in sign at
/// the ends. Returns the final bracket after `iterations` halvings.
pub fn bisect_sign_change(
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(invalid("bracket", format!("no sign change on [{lo}, {hi}]: {f_lo:.4} and {f_hi:.4}")));
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}
