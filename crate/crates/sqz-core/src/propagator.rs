//! Drift matrix and Green's-function propagation.
//!
//! The ensemble-averaged evolution of `(alpha, alpha*)` is generated by the
//! drift matrix
//!
//! ```text
//! M(t) = [ -kappa/2 - i Omega      -eps(t)/2        ]
//!        [ -conj(eps(t))/2         -kappa/2 + i Omega ]
//! ```
//!
//! which is Hermitian exactly when `Omega = 0`. The Green's function solves
//! `dG(t|t_in)/dt = M(t) G(t|t_in)` with `G(t_in|t_in) = 1`; correlators for
//! earlier second arguments are obtained by symmetry, never by backward
//! integration.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::ode;
use crate::schedule::{DriveSample, DriveSchedule, Side};

/// Tolerances for the adaptive Dormand-Prince 5(4) integrator.
///
/// Defaults are two orders tighter than the 1e-8 closed-form comparisons the
/// engine is validated against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY }
    }
}

impl IntegratorConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || !(self.max_step > 0.0) {
            return Err(Error::InvalidArgument(
                "integrator tolerances and max_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Green's function `G(t | t_in)` of the drift dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenFunction {
    pub g: Mat2,
    pub t_in: f64,
    pub t: f64,
}

/// Drift matrix at one instant.
pub fn evolution_matrix(sample: &DriveSample) -> Mat2 {
    let diag = Complex64::new(-sample.kappa / 2.0, -sample.detuning);
    let off = -sample.pump / 2.0;
    Mat2::new(diag, off, off.conj(), diag.conj())
}

struct GreenRhs<'a> {
    schedule: &'a DriveSchedule,
}

impl ode::Rhs<8> for GreenRhs<'_> {
    fn eval(&self, t: f64, side: Side, y: &[f64; 8]) -> Result<[f64; 8]> {
        let m = evolution_matrix(&self.schedule.sample_side(t, side)?);
        Ok((m * Mat2::from_reals(y)).to_reals())
    }
}

/// Numerically integrates `G(t | t_in)` to each grid time.
///
/// The grid must be strictly ascending with `t_grid[0] >= t_in`; integration
/// restarts at every schedule breakpoint.
pub fn propagate_green(
    schedule: &DriveSchedule,
    t_in: f64,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<GreenFunction>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let t_last = t_grid[t_grid.len() - 1];
    if !schedule.covers(t_in, t_last) {
        return Err(Error::Domain { t: t_last });
    }
    let breaks = schedule.breakpoints_in(t_in, t_last);
    let rhs = GreenRhs { schedule };
    let mut out: Vec<GreenFunction> =
        t_grid.iter().map(|&t| GreenFunction { g: Mat2::identity(), t_in, t }).collect();
    ode::integrate_grid(
        &rhs,
        t_in,
        Mat2::identity().to_reals(),
        t_grid,
        &breaks,
        cfg,
        &mut |i, t, y| {
            out[i] = GreenFunction { g: Mat2::from_reals(y), t_in, t };
        },
    )?;
    Ok(out)
}

/// Propagates an arbitrary 2-vector under the drift dynamics; used for the
/// correlator column vector.
pub(crate) fn propagate_vector(
    schedule: &DriveSchedule,
    t_in: f64,
    v0: [Complex64; 2],
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<[Complex64; 2]>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let t_last = t_grid[t_grid.len() - 1];
    if !schedule.covers(t_in, t_last) {
        return Err(Error::Domain { t: t_last });
    }
    let breaks = schedule.breakpoints_in(t_in, t_last);
    let rhs = |t: f64, side: Side, y: &[f64; 4]| -> Result<[f64; 4]> {
        let m = evolution_matrix(&schedule.sample_side(t, side)?);
        let v = [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])];
        let d = m.mul_vec(v);
        Ok([d[0].re, d[0].im, d[1].re, d[1].im])
    };
    let mut out = alloc::vec![[Complex64::new(0.0, 0.0); 2]; t_grid.len()];
    ode::integrate_grid(
        &rhs,
        t_in,
        [v0[0].re, v0[0].im, v0[1].re, v0[1].im],
        t_grid,
        &breaks,
        cfg,
        &mut |i, _t, y| {
            out[i] = [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])];
        },
    )?;
    Ok(out)
}

/// Closed-form `exp(M dt)` for constant drive parameters.
///
/// Writes `M = -(kappa/2) I + N` with `N^2 = ((|eps|^2 - 4 Omega^2)/4) I`, so
/// `exp(M dt) = e^{-kappa dt/2} [cosh(x) I + sinch(x) N dt]` with
/// `x = eps_gap dt / 2`. The series form of `sinch` takes over for small
/// arguments, which also covers the degenerate case `|eps|^2 = 4 Omega^2`
/// where the eigenvector construction would hit 0/0.
pub fn green_constant(sample: &DriveSample, dt: f64) -> GreenFunction {
    debug_assert!(dt >= 0.0);
    let n = Mat2::new(
        Complex64::new(0.0, -sample.detuning),
        -sample.pump / 2.0,
        -sample.pump.conj() / 2.0,
        Complex64::new(0.0, sample.detuning),
    );
    let gap_sq = Complex64::new(
        sample.pump.norm_sqr() - 4.0 * sample.detuning * sample.detuning,
        0.0,
    );
    let x = gap_sq.sqrt() * (dt / 2.0);
    let (cosh_x, sinch_x) = if x.norm() < 1e-4 {
        let x2 = x * x;
        (
            Complex64::new(1.0, 0.0) + x2 * 0.5 + x2 * x2 / 24.0,
            Complex64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0,
        )
    } else {
        (x.cosh(), x.sinh() / x)
    };
    let decay = (-sample.kappa * dt / 2.0).exp();
    let mut g = Mat2::identity().scale(cosh_x) + n.scale(sinch_x * dt);
    g = g.scale(Complex64::new(decay, 0.0));
    if dt == 0.0 {
        g = Mat2::identity();
    }
    GreenFunction { g, t_in: 0.0, t: dt }
}
