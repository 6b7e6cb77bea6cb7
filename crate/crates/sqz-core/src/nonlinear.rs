//! Weakly nonlinear resonator with coherent drive, mapped onto the linear
//! engine.
//!
//! The field splits into a classical center and Gaussian fluctuations,
//! `alpha = alpha_c + delta_alpha`. The center follows the classical
//! equation
//!
//! ```text
//! alpha_c' = -i [omega_r(|alpha_c|^2) - omega_rf] alpha_c
//!            - (kappa/2) alpha_c - (eps/2) alpha_c* - i eps_c
//! ```
//!
//! and the fluctuations obey the linear model with the replacements
//!
//! ```text
//! Omega -> omega_r(n) - omega_rf + (d omega_r/dn) n,      n = |alpha_c|^2
//! eps   -> eps + 2i (d omega_r/dn) alpha_c^2
//! ```
//!
//! The effective drive is tabulated densely along the center trajectory and
//! exposed as an ordinary [`DriveSchedule`], so the whole linear pipeline
//! (moments, correlators, decomposition) applies unchanged to `delta_alpha`
//! and `delta_f = f - sqrt(kappa_out) alpha_c`.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::correlators::{correlator_grid, CorrelatorTable};
use crate::error::{Error, Result};
use crate::moments::{evolve_moments, initial_moments, InitialStateSpec};
use crate::ode;
use crate::propagator::IntegratorConfig;
use crate::schedule::{CubicTable, DriveSchedule, PumpSpec, QuadratureSchedule, Side, TimeFunction};

/// Photon-number dependence of the resonator frequency,
/// `omega_r(n) = sum_k coeffs[k] n^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyPolynomial {
    coeffs: Vec<f64>,
}

impl FrequencyPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "frequency polynomial needs at least one finite coefficient".into(),
            ));
        }
        Ok(FrequencyPolynomial { coeffs })
    }

    /// Kerr resonator `omega_r(n) = omega_0 + chi n`.
    pub fn kerr(omega_0: f64, chi: f64) -> Self {
        FrequencyPolynomial { coeffs: alloc::vec![omega_0, chi] }
    }

    pub fn eval(&self, n: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * n + c;
        }
        acc
    }

    /// `d omega_r / dn`.
    pub fn slope(&self, n: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * n + c * k as f64;
        }
        acc
    }
}

/// Weakly nonlinear, coherently driven resonator.
#[derive(Clone, Debug)]
pub struct NonlinearResonator {
    pub omega_r: FrequencyPolynomial,
    /// Rotating-frame frequency; the drive frequency is the natural choice.
    pub omega_rf: f64,
    /// Coherent drive `eps_c(t)` as real/imaginary parts.
    pub drive_re: TimeFunction,
    pub drive_im: TimeFunction,
    /// Supplies the parametric pump, decay rates, bath, and amplifier mode.
    pub base: DriveSchedule,
}

impl NonlinearResonator {
    pub fn coherent_drive(&self, t: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.drive_re.eval(t)?, self.drive_im.eval(t)?))
    }

    /// Classical drift of the full nonlinear field; also the center equation.
    pub fn classical_drift(&self, t: f64, alpha: Complex64) -> Result<Complex64> {
        let s = self.base.sample(t)?;
        let eps_c = self.coherent_drive(t)?;
        let detune = self.omega_r.eval(alpha.norm_sqr()) - self.omega_rf;
        Ok(-(Complex64::new(s.kappa / 2.0, detune)) * alpha
            - s.pump / 2.0 * alpha.conj()
            - Complex64::i() * eps_c)
    }

    fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = self.base.breakpoints_in(a, b);
        self.drive_re.breakpoints_in(a, b, &mut out);
        self.drive_im.breakpoints_in(a, b, &mut out);
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup();
        out
    }
}

/// Classical field center at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenterState {
    pub alpha_c: Complex64,
    pub t: f64,
}

struct CenterRhs<'a> {
    res: &'a NonlinearResonator,
}

impl ode::Rhs<2> for CenterRhs<'_> {
    fn eval(&self, t: f64, _side: Side, y: &[f64; 2]) -> Result<[f64; 2]> {
        let d = self.res.classical_drift(t, Complex64::new(y[0], y[1]))?;
        Ok([d.re, d.im])
    }
}

/// Integrates the center trajectory to each grid time.
pub fn evolve_center(
    res: &NonlinearResonator,
    c0: &CenterState,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<CenterState>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let t_last = t_grid[t_grid.len() - 1];
    let breaks = res.breakpoints_in(c0.t, t_last);
    let rhs = CenterRhs { res };
    let mut out = alloc::vec![CenterState { alpha_c: Complex64::new(0.0, 0.0), t: 0.0 }; t_grid.len()];
    ode::integrate_grid(
        &rhs,
        c0.t,
        [c0.alpha_c.re, c0.alpha_c.im],
        t_grid,
        &breaks,
        cfg,
        &mut |i, t, y| {
            out[i] = CenterState { alpha_c: Complex64::new(y[0], y[1]), t };
        },
    )?;
    Ok(out)
}

/// Effective detuning and pump seen by the fluctuations around a center:
/// `Omega_eff = omega_r(n) - omega_rf + (d omega_r/dn) n` and
/// `eps_eff = eps + 2i (d omega_r/dn) alpha_c^2`, with `n = |alpha_c|^2`.
pub fn effective_drive(res: &NonlinearResonator, center: &CenterState) -> Result<(f64, Complex64)> {
    let n = center.alpha_c.norm_sqr();
    let slope = res.omega_r.slope(n);
    let omega_eff = res.omega_r.eval(n) - res.omega_rf + slope * n;
    let eps = res.base.sample(center.t)?.pump;
    let eps_eff = eps + Complex64::new(0.0, 2.0 * slope) * center.alpha_c * center.alpha_c;
    Ok((omega_eff, eps_eff))
}

/// Tabulates the effective drive along the center trajectory as an ordinary
/// schedule covering `[c0.t, t_end]` (plus padding), on a uniform grid of
/// spacing at most `0.01 / kappa`.
pub fn effective_schedule(
    res: &NonlinearResonator,
    c0: &CenterState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<(DriveSchedule, Vec<CenterState>)> {
    if !(t_end > c0.t) {
        return Err(Error::InvalidArgument("t_end must exceed the center start time".into()));
    }
    let kappa = res.base.kappa();
    let span = t_end - c0.t;
    let dt = (0.01 / kappa).max(span / 20_000.0);
    let n = (span / dt).ceil() as usize + 2;
    let grid: Vec<f64> = (0..=n).map(|i| c0.t + dt * i as f64).collect();
    let centers = evolve_center(res, c0, &grid, cfg)?;

    let mut omega = Vec::with_capacity(centers.len());
    let mut eps_re = Vec::with_capacity(centers.len());
    let mut eps_im = Vec::with_capacity(centers.len());
    for c in &centers {
        let (o, e) = effective_drive(res, c)?;
        omega.push(o);
        eps_re.push(e.re);
        eps_im.push(e.im);
    }
    let schedule = DriveSchedule::new(
        TimeFunction::Spline(CubicTable::from_samples(c0.t, dt, omega)?),
        PumpSpec::Cartesian {
            re: TimeFunction::Spline(CubicTable::from_samples(c0.t, dt, eps_re)?),
            im: TimeFunction::Spline(CubicTable::from_samples(c0.t, dt, eps_im)?),
        },
        kappa,
        res.base.kappa_out(),
        res.base.n_bath(),
        res.base.amplifier(),
    )?;
    Ok((schedule, centers))
}

/// Output of the nonlinear pipeline.
#[derive(Clone, Debug)]
pub struct NonlinearRun {
    /// Fluctuation correlators (`delta_f = f - sqrt(kappa_out) alpha_c`).
    pub table: CorrelatorTable,
    /// Effective linear schedule used for the fluctuations.
    pub effective: DriveSchedule,
    /// Center states at the `t1` grid.
    pub centers: Vec<CenterState>,
    /// Gaussian-validity gate `max |d omega_r/dn| (m_abs - 1/2) / kappa`;
    /// treat values above 0.1 as suspect.
    pub validity_metric: f64,
}

/// Full nonlinear pipeline: center evolution, effective schedule, then the
/// linear engine for the fluctuation correlators.
#[allow(clippy::too_many_arguments)]
pub fn nonlinear_correlators(
    res: &NonlinearResonator,
    quad_schedule: &QuadratureSchedule,
    c0: &CenterState,
    t1_grid: &[f64],
    tau_grid: &[f64],
    spec: &InitialStateSpec,
    t0: f64,
    cfg: &IntegratorConfig,
) -> Result<NonlinearRun> {
    if t1_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::InvalidArgument("empty correlator grid".into()));
    }
    if c0.t > t0 {
        return Err(Error::InvalidArgument(
            "center trajectory must start at or before the moment anchor t0".into(),
        ));
    }
    let t_end = t1_grid[t1_grid.len() - 1] + tau_grid[tau_grid.len() - 1];
    let (effective, _dense) = effective_schedule(res, c0, t_end, cfg)?;
    let table = correlator_grid(&effective, quad_schedule, t1_grid, tau_grid, spec, t0, cfg)?;

    let centers = evolve_center(res, c0, t1_grid, cfg)?;
    let m0 = initial_moments(spec, t0)?;
    let moments = evolve_moments(&effective, &m0, t1_grid, cfg)?;
    let mut gate = 0.0f64;
    for (c, m) in centers.iter().zip(&moments) {
        let s = res.omega_r.slope(c.alpha_c.norm_sqr()).abs();
        gate = gate.max(s * (m.m_abs - 0.5) / res.base.kappa());
    }
    Ok(NonlinearRun { table, effective, centers, validity_metric: gate })
}
