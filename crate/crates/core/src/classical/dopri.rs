//! Dormand–Prince 5(4) with the fourth-order continuous extension.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive integrator for `y' = f(t, y)` on a fixed-size real state.
///
/// The error norm is the max over components of
/// `|err_i| / (atol_i + rtol * max(|y_i|, |y_new_i|))`.
pub struct Dopri5<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub h_min: f64,
    pub max_steps: usize,
}

/// Polynomial coefficients of one accepted step, valid on `[t, t + h]`.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t: f64,
    pub h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.r[0][i]
                + s * (self.r[1][i] + s1 * (self.r[2][i] + s * (self.r[3][i] + s1 * self.r[4][i])));
        }
        y
    }
}

impl<const N: usize> Dopri5<N> {
    pub fn new(rtol: f64, atol: [f64; N]) -> Self {
        Self { rtol, atol, h_min: 1e-14, max_steps: 50_000_000 }
    }

    /// Integrates from `t0` to `t1`, calling `on_step` after every accepted step.
    /// Returns the state at `t1` and the number of accepted steps.
    pub fn integrate<F, S>(&self, f: F, t0: f64, y0: [f64; N], t1: f64, mut on_step: S) -> Result<([f64; N], usize)>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        S: FnMut(&DenseStep<N>, &[f64; N]),
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let span = t1 - t0;
        let mut h = self.initial_step(&f, t, &y, &k1, span);
        let mut accepted = 0usize;
        let mut fac_old: f64 = 1e-4;
        let mut last_rejected = false;
        let mut steps = 0usize;

        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepUnderflow { t, h });
            }
            if h < self.h_min * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, h });
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }

            let mut yt = [0.0; N];
            for i in 0..N {
                yt[i] = y[i] + h * A21 * k1[i];
            }
            let k2 = f(t + C2 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = f(t + C3 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = f(t + C4 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = f(t + C5 * h, &yt);
            for i in 0..N {
                yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let t_new = if last { t1 } else { t + h };
            let k6 = f(t_new, &yt);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let k7 = f(t_new, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol[i] + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h *= 0.1;
                last_rejected = true;
                continue;
            }

            // PI step-size control (Hairer's beta = 0.04)
            let fac11 = err.powf(0.2 - 0.04 * 0.75);
            let mut fac = fac11 / fac_old.powf(0.04);
            fac = (fac / 0.9).clamp(0.1, 5.0);
            let h_new = h / fac;

            if err <= 1.0 {
                fac_old = err.max(1e-4);
                let mut r = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    r[0][i] = y[i];
                    r[1][i] = ydiff;
                    r[2][i] = bspl;
                    r[3][i] = ydiff - h * k7[i] - bspl;
                    r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                let step = DenseStep { t, h, r };
                t = t_new;
                y = y_new;
                k1 = k7;
                accepted += 1;
                on_step(&step, &y);
                h = if last_rejected { h_new.min(h) } else { h_new };
                last_rejected = false;
            } else {
                h = h / (fac11 / 0.9).min(10.0);
                last_rejected = true;
            }
        }
        Ok((y, accepted))
    }

    fn initial_step<F>(&self, f: &F, t: f64, y: &[f64; N], k1: &[f64; N], span: f64) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol[i] + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (k1[i] / sc).powi(2);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span.abs());
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = y[i] + h0 * k1[i];
        }
        let k2 = f(t + h0, &y1);
        let mut d2: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol[i] + self.rtol * y[i].abs();
            d2 += ((k2[i] - k1[i]) / sc).powi(2);
        }
        d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let solver = Dopri5::<2>::new(1e-10, [1e-12; 2]);
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut worst: f64 = 0.0;
        let (y, n) = solver
            .integrate(f, 0.0, [1.0, 0.0], 10.0, |step, _| {
                for k in 1..4 {
                    let tq = step.t + step.h * k as f64 / 4.0;
                    let yq = step.eval(tq);
                    worst = worst.max((yq[0] - tq.cos()).abs()).max((yq[1] + tq.sin()).abs());
                }
            })
            .unwrap();
        assert!(n > 10);
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!(worst < 1e-8, "dense output error {worst}");
    }

    #[test]
    fn dense_output_matches_endpoints() {
        let solver = Dopri5::<1>::new(1e-8, [1e-10]);
        solver
            .integrate(|t, y| [-2.0 * y[0] + t], 0.0, [1.0], 3.0, |step, y| {
                assert!((step.eval(step.t + step.h)[0] - y[0]).abs() < 1e-12);
            })
            .unwrap();
    }
}
