//! Shared oracle helpers for the integration tests.
//!
//! Everything here is deliberately independent of the adaptive ODE engine:
//! Green's functions come from the closed-form constant-drive exponential
//! composed over schedule segments, and integrals use Gauss-Legendre
//! quadrature.

use num_complex::Complex64;
use sqz_core::mat2::Mat2;
use sqz_core::propagator::green_constant;
use sqz_core::schedule::DriveSchedule;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `G(t | t_in)` for a piecewise-constant schedule, composed from the
/// closed-form segment exponentials (no adaptive integration involved).
pub fn green_piecewise(schedule: &DriveSchedule, t_in: f64, t: f64) -> Mat2 {
    assert!(t >= t_in);
    let mut bounds = vec![t_in];
    bounds.extend(schedule.breakpoints_in(t_in, t));
    bounds.push(t);
    let mut g = Mat2::identity();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let sample = schedule.sample(0.5 * (a + b)).unwrap();
        g = green_constant(&sample, b - a).g * g;
    }
    g
}

/// Second-moment matrix at `t1` by direct Gauss-Legendre quadrature of the
/// Green's-function integral form:
///
/// `S(t1) = (kappa/2) int_{t0}^{t1} G(t1|t') G(t1|t')^dag dt'
///          + G(t1|t0) S(t0) G(t1|t0)^dag`.
pub fn moment_matrix_integral_oracle(
    schedule: &DriveSchedule,
    s0: Mat2,
    t0: f64,
    t1: f64,
) -> Mat2 {
    let g_full = green_piecewise(schedule, t0, t1);
    let mut s = g_full * s0 * g_full.adjoint();

    let mut bounds = vec![t0];
    bounds.extend(schedule.breakpoints_in(t0, t1));
    bounds.push(t1);
    let gl = gauss_legendre(32);
    let kappa = schedule.kappa();
    for w in bounds.windows(2) {
        // Cap panel length so 32 nodes stay converged on the exponentials.
        let mut a = w[0];
        while a < w[1] {
            let b = (a + 0.5).min(w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &(x, wt) in &gl {
                let tp = mid + half * x;
                let g = green_piecewise(schedule, tp, t1);
                let gg = g * g.adjoint();
                s = s + gg.scale(Complex64::new(wt * half * kappa / 2.0, 0.0));
            }
            a = b;
        }
    }
    s
}
