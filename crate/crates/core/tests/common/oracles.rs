//! Independent reference computations used only by tests.
//!
//! Nothing here calls into the library, so the file can be included both from
//! unit tests inside the crate and from integration tests.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w));
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `<m|D(beta)|n>` by the finite normal-ordered sum; fine for `m, n <= 20`.
pub fn displacement_element(m: usize, n: usize, beta: Complex64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..=m.min(n) {
        let c = (factorial(m) * factorial(n)).sqrt() / (factorial(k) * factorial(m - k) * factorial(n - k));
        s += beta.powu((m - k) as u32) * (-beta.conj()).powu((n - k) as u32) * c;
    }
    s * (-0.5 * beta.norm_sqr()).exp()
}

/// Wigner transform of `|n><m|` from its characteristic function,
/// `(1/pi^2) int d^2 xi e^{alpha xi* - alpha* xi} <m|D(xi)|n>`, integrated in
/// polar coordinates.
pub struct WignerQuadrature {
    radial: Vec<(f64, f64)>,
    n_angle: usize,
}

impl WignerQuadrature {
    pub fn new() -> Self {
        Self { radial: gauss_legendre(220, 0.0, 18.0), n_angle: 256 }
    }

    pub fn coefficient(&self, m: usize, n: usize, r: f64, theta: f64) -> Complex64 {
        let alpha = Complex64::from_polar(r, theta);
        let dphi = 2.0 * PI / self.n_angle as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for &(rho, w) in &self.radial {
            let mut ring = Complex64::new(0.0, 0.0);
            for j in 0..self.n_angle {
                let xi = Complex64::from_polar(rho, j as f64 * dphi);
                let kernel = (alpha * xi.conj() - alpha.conj() * xi).exp();
                ring += kernel * displacement_element(m, n, xi);
            }
            total += ring * (w * rho * dphi);
        }
        total / (PI * PI)
    }
}

/// Negative volume of the Fock-1 Wigner function
/// `(2/pi)(4r^2 - 1) e^{-2r^2}`, integrated analytically over `r < 1/2`.
pub fn fock1_negativity() -> f64 {
    let a = 0.25f64;
    let e = (-2.0 * a).exp();
    let i0 = (1.0 - e) / 2.0;
    let i1 = 0.25 - e * (a / 2.0 + 0.25);
    2.0 * (i0 - 4.0 * i1)
}

/// Coherent-state Wigner function `(2/pi) e^{-2|alpha - beta|^2}`.
pub fn coherent_wigner(beta: Complex64, x: f64, y: f64) -> f64 {
    2.0 / PI * (-2.0 * (Complex64::new(x, y) - beta).norm_sqr()).exp()
}

/// Lindblad master equation for the driven Kerr oscillator with a vacuum bath,
/// integrated from the vacuum with classical RK4 on the dense density matrix.
/// Frame rotating with the first drive.
#[allow(clippy::too_many_arguments)]
pub fn master_equation(
    chi: f64,
    delta: f64,
    delta_mod: f64,
    omega1: f64,
    omega2: f64,
    gamma: f64,
    dim: usize,
    t_end: f64,
    dt: f64,
) -> DMatrix<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let a = DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { Complex64::new((j as f64).sqrt(), 0.0) } else { zero });
    let ad = a.adjoint();
    let num = &ad * &a;
    let h0 = &num * Complex64::new(delta, 0.0) + &num * &num * Complex64::new(chi, 0.0);
    let ham = |t: f64| {
        let f = Complex64::new(omega1, 0.0) + Complex64::from_polar(omega2, -delta_mod * t);
        &h0 + &ad * f + &a * f.conj()
    };
    let ll = &ad * &a * Complex64::new(gamma, 0.0);
    let rhs = |t: f64, rho: &DMatrix<Complex64>| {
        let h = ham(t);
        let i = Complex64::new(0.0, 1.0);
        -(&h * rho - rho * &h) * i + (&a * rho * &ad) * Complex64::new(gamma, 0.0)
            - (&ll * rho + rho * &ll) * Complex64::new(0.5, 0.0)
    };
    let mut rho = DMatrix::from_element(dim, dim, zero);
    rho[(0, 0)] = Complex64::new(1.0, 0.0);
    let steps = (t_end / dt).round() as usize;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = rhs(t, &rho);
        let k2 = rhs(t + 0.5 * dt, &(&rho + &k1 * half));
        let k3 = rhs(t + 0.5 * dt, &(&rho + &k2 * half));
        let k4 = rhs(t + dt, &(&rho + &k3 * full));
        rho += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
    }
    rho
}

/// `-Tr(rho ln rho)` from the Hermitian part of `rho`.
pub fn entropy(rho: &DMatrix<Complex64>) -> f64 {
    let h = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().filter(|&&p| p > 1e-12).map(|&p| -p * p.ln()).sum()
}

/// Mean excitation `sum_n n rho_nn`.
pub fn mean_number(rho: &DMatrix<Complex64>) -> f64 {
    (0..rho.nrows()).map(|n| n as f64 * rho[(n, n)].re).sum()
}
