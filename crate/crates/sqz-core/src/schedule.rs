//! Time-dependent drive configuration.
//!
//! A [`DriveSchedule`] collects everything the propagating-field model needs
//! at a given instant: detuning `Omega(t)`, complex pump `eps(t)`, decay
//! rates, bath occupation, and the amplifier mode. All functions of time are
//! piecewise (constant / step / linear / dense cubic table) and immutable
//! after construction, so schedules can be shared freely across threads.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One-sided evaluation at a discontinuity. Schedules are right-continuous,
/// so [`Side::Above`] is the default; [`Side::Below`] is used by the
/// integrator for the final stage of a step that ends exactly on a jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// Piecewise scalar function of time.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeFunction {
    Constant(f64),
    /// Right-continuous step function: value is `initial` before the first
    /// step time, then `steps[i].1` for `t >= steps[i].0`. Step times must be
    /// strictly increasing.
    Steps { initial: f64, steps: Vec<(f64, f64)> },
    /// Piecewise-linear interpolation through sorted knots `(t, v)`. Outside
    /// the knot range the value clamps to the end knots when `clamp` is set,
    /// otherwise evaluation is a domain error.
    Lerp { knots: Vec<(f64, f64)>, clamp: bool },
    /// Dense cubic (Hermite) table, used for smooth tabulated data such as
    /// effective drives derived from a center trajectory. Domain error
    /// outside the knot range.
    Spline(CubicTable),
}

impl TimeFunction {
    /// Linear ramp from `(t0, v0)` to `(t1, v1)`, held constant outside.
    pub fn ramp(t0: f64, v0: f64, t1: f64, v1: f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidArgument(format!(
                "ramp requires t1 > t0, got [{t0}, {t1}]"
            )));
        }
        Ok(TimeFunction::Lerp {
            knots: alloc::vec![(t0, v0), (t1, v1)],
            clamp: true,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_side(t, Side::Above)
    }

    pub fn eval_side(&self, t: f64, side: Side) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain { t });
        }
        match self {
            TimeFunction::Constant(v) => Ok(*v),
            TimeFunction::Steps { initial, steps } => {
                let mut v = *initial;
                for &(st, sv) in steps {
                    let passed = match side {
                        Side::Above => t >= st,
                        Side::Below => t > st,
                    };
                    if passed {
                        v = sv;
                    } else {
                        break;
                    }
                }
                Ok(v)
            }
            TimeFunction::Lerp { knots, clamp } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t < first.0 {
                    return if *clamp { Ok(first.1) } else { Err(Error::Domain { t }) };
                }
                if t > last.0 {
                    return if *clamp { Ok(last.1) } else { Err(Error::Domain { t }) };
                }
                let idx = knots.partition_point(|&(kt, _)| kt <= t);
                if idx == knots.len() {
                    return Ok(last.1);
                }
                let (t0, v0) = knots[idx - 1];
                let (t1, v1) = knots[idx];
                if t1 == t0 {
                    return Ok(v1);
                }
                let u = (t - t0) / (t1 - t0);
                Ok(v0 + (v1 - v0) * u)
            }
            TimeFunction::Spline(table) => table.eval(t),
        }
    }

    /// True where evaluation at any `t` in `[a, b]` cannot fail.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        match self {
            TimeFunction::Constant(_) | TimeFunction::Steps { .. } => true,
            TimeFunction::Lerp { knots, clamp } => {
                *clamp || (knots[0].0 <= a && knots[knots.len() - 1].0 >= b)
            }
            TimeFunction::Spline(table) => table.t0 <= a && table.t_end() >= b,
        }
    }

    /// Appends the discontinuity / kink times inside the open interval
    /// `(a, b)`; the integrator restarts at each of them.
    pub fn breakpoints_in(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        match self {
            TimeFunction::Constant(_) => {}
            TimeFunction::Steps { steps, .. } => {
                out.extend(steps.iter().map(|&(t, _)| t).filter(|&t| t > a && t < b));
            }
            TimeFunction::Lerp { knots, .. } => {
                out.extend(knots.iter().map(|&(t, _)| t).filter(|&t| t > a && t < b));
            }
            // Cubic tables are C^1-smooth; no restarts needed.
            TimeFunction::Spline(_) => {}
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TimeFunction::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument("non-finite constant".into()));
                }
            }
            TimeFunction::Steps { initial, steps } => {
                if !initial.is_finite() || steps.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite step data".into()));
                }
                if steps.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidArgument(
                        "step times must be strictly increasing".into(),
                    ));
                }
            }
            TimeFunction::Lerp { knots, .. } => {
                if knots.is_empty() {
                    return Err(Error::InvalidArgument("lerp needs at least one knot".into()));
                }
                if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite knot".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidArgument(
                        "lerp knots must be strictly increasing in time".into(),
                    ));
                }
            }
            TimeFunction::Spline(_) => {}
        }
        Ok(())
    }
}

/// Uniformly spaced cubic Hermite table with finite-difference slopes.
///
/// Evaluation is exact (bitwise) on constant data, which keeps reduction
/// checks between tabulated and analytic schedules honest.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicTable {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CubicTable {
    /// Builds a table from uniformly spaced samples starting at `t0`.
    pub fn from_samples(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || values.len() < 2 {
            return Err(Error::InvalidArgument(
                "cubic table needs dt > 0 and at least two samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite table value".into()));
        }
        let n = values.len();
        let v = &values;
        // Fourth-order difference stencils (one-sided at the edges) keep the
        // Hermite interpolation error at O(dt^4) across the whole table.
        let slope_at = |i: usize| -> f64 {
            if n < 5 {
                return if i == 0 {
                    (v[1] - v[0]) / dt
                } else if i == n - 1 {
                    (v[n - 1] - v[n - 2]) / dt
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * dt)
                };
            }
            if i == 0 {
                (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * dt)
            } else if i == 1 {
                (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * dt)
            } else if i + 2 == n {
                -(-3.0 * v[n - 1] - 10.0 * v[n - 2] + 18.0 * v[n - 3] - 6.0 * v[n - 4] + v[n - 5])
                    / (12.0 * dt)
            } else if i + 1 == n {
                -(-25.0 * v[n - 1] + 48.0 * v[n - 2] - 36.0 * v[n - 3] + 16.0 * v[n - 4]
                    - 3.0 * v[n - 5])
                    / (12.0 * dt)
            } else {
                (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dt)
            }
        };
        let slopes: Vec<f64> = (0..n).map(slope_at).collect();
        Ok(CubicTable { t0, dt, values, slopes })
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.values.len() - 1) as f64
    }

    fn eval(&self, t: f64) -> Result<f64> {
        let end = self.t_end();
        // Small tolerance at the ends absorbs roundoff in grid construction.
        let slack = 1e-9 * self.dt;
        if t < self.t0 - slack || t > end + slack {
            return Err(Error::Domain { t });
        }
        let x = ((t - self.t0) / self.dt).floor();
        let i = (x.max(0.0) as usize).min(self.values.len() - 2);
        let u = (t - (self.t0 + self.dt * i as f64)) / self.dt;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        // Hermite written about v0 so constant data reproduces exactly.
        let du = v1 - v0;
        let u2 = u * u;
        let u3 = u2 * u;
        Ok(v0
            + du * (3.0 * u2 - 2.0 * u3)
            + self.dt * (m0 * (u - 2.0 * u2 + u3) + m1 * (u3 - u2)))
    }
}

/// Parametric pump amplitude, either as magnitude/phase functions or as
/// real/imaginary parts (the latter is what tabulated effective drives use).
#[derive(Clone, Debug, PartialEq)]
pub enum PumpSpec {
    Polar { magnitude: TimeFunction, phase: TimeFunction },
    Cartesian { re: TimeFunction, im: TimeFunction },
}

impl PumpSpec {
    pub fn constant(eps: Complex64) -> Self {
        PumpSpec::Cartesian {
            re: TimeFunction::Constant(eps.re),
            im: TimeFunction::Constant(eps.im),
        }
    }

    fn eval_side(&self, t: f64, side: Side) -> Result<Complex64> {
        match self {
            PumpSpec::Polar { magnitude, phase } => {
                let m = magnitude.eval_side(t, side)?;
                if m < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "pump magnitude {m} < 0 at t = {t}"
                    )));
                }
                Ok(Complex64::from_polar(m, phase.eval_side(t, side)?))
            }
            PumpSpec::Cartesian { re, im } => {
                Ok(Complex64::new(re.eval_side(t, side)?, im.eval_side(t, side)?))
            }
        }
    }

    fn breakpoints_in(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        match self {
            PumpSpec::Polar { magnitude, phase } => {
                magnitude.breakpoints_in(a, b, out);
                phase.breakpoints_in(a, b, out);
            }
            PumpSpec::Cartesian { re, im } => {
                re.breakpoints_in(a, b, out);
                im.breakpoints_in(a, b, out);
            }
        }
    }

    fn covers(&self, a: f64, b: f64) -> bool {
        match self {
            PumpSpec::Polar { magnitude, phase } => magnitude.covers(a, b) && phase.covers(a, b),
            PumpSpec::Cartesian { re, im } => re.covers(a, b) && im.covers(a, b),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PumpSpec::Polar { magnitude, phase } => {
                magnitude.validate()?;
                phase.validate()
            }
            PumpSpec::Cartesian { re, im } => {
                re.validate()?;
                im.validate()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplifierMode {
    PhaseSensitive,
    PhasePreserving,
}

/// Instantaneous drive parameters entering the drift matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSample {
    /// `Omega(t) = omega_r(t) - omega_d`, rad/s.
    pub detuning: f64,
    /// `eps(t) = |eps| e^{i theta}`, rad/s.
    pub pump: Complex64,
    /// Total energy decay rate, rad/s.
    pub kappa: f64,
}

/// Full time-dependent system configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSchedule {
    detuning: TimeFunction,
    pump: PumpSpec,
    kappa: f64,
    kappa_out: f64,
    n_bath: f64,
    amplifier: AmplifierMode,
}

impl DriveSchedule {
    pub fn new(
        detuning: TimeFunction,
        pump: PumpSpec,
        kappa: f64,
        kappa_out: f64,
        n_bath: f64,
        amplifier: AmplifierMode,
    ) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be > 0, got {kappa}")));
        }
        if !(kappa_out > 0.0) || kappa_out > kappa {
            return Err(Error::InvalidArgument(format!(
                "kappa_out must satisfy 0 < kappa_out <= kappa, got kappa_out = {kappa_out}, \
                 kappa = {kappa}"
            )));
        }
        if !(n_bath >= 0.0) || !n_bath.is_finite() {
            return Err(Error::InvalidArgument(format!("n_bath must be >= 0, got {n_bath}")));
        }
        detuning.validate()?;
        pump.validate()?;
        Ok(DriveSchedule { detuning, pump, kappa, kappa_out, n_bath, amplifier })
    }

    /// Constant drive at base normalization (`kappa_out = kappa`, zero bath,
    /// phase-sensitive amplification).
    pub fn constant(detuning: f64, pump: Complex64, kappa: f64) -> Result<Self> {
        DriveSchedule::new(
            TimeFunction::Constant(detuning),
            PumpSpec::constant(pump),
            kappa,
            kappa,
            0.0,
            AmplifierMode::PhaseSensitive,
        )
    }

    /// Abrupt pump-phase jump at `t = 0`: `theta(t) = 0` for `t < 0` and
    /// `theta_after` for `t >= 0`, with constant magnitude and zero detuning.
    pub fn phase_jump(pump_magnitude: f64, theta_after: f64, kappa: f64) -> Result<Self> {
        if !(pump_magnitude >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pump magnitude must be >= 0, got {pump_magnitude}"
            )));
        }
        DriveSchedule::new(
            TimeFunction::Constant(0.0),
            PumpSpec::Polar {
                magnitude: TimeFunction::Constant(pump_magnitude),
                phase: TimeFunction::Steps { initial: 0.0, steps: alloc::vec![(0.0, theta_after)] },
            },
            kappa,
            kappa,
            0.0,
            AmplifierMode::PhaseSensitive,
        )
    }

    pub fn with_kappa_out(mut self, kappa_out: f64) -> Result<Self> {
        if !(kappa_out > 0.0) || kappa_out > self.kappa {
            return Err(Error::InvalidArgument(format!(
                "kappa_out must satisfy 0 < kappa_out <= kappa, got {kappa_out}"
            )));
        }
        self.kappa_out = kappa_out;
        Ok(self)
    }

    pub fn with_n_bath(mut self, n_bath: f64) -> Result<Self> {
        if !(n_bath >= 0.0) {
            return Err(Error::InvalidArgument(format!("n_bath must be >= 0, got {n_bath}")));
        }
        self.n_bath = n_bath;
        Ok(self)
    }

    pub fn with_amplifier(mut self, amplifier: AmplifierMode) -> Self {
        self.amplifier = amplifier;
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_out(&self) -> f64 {
        self.kappa_out
    }

    pub fn n_bath(&self) -> f64 {
        self.n_bath
    }

    pub fn amplifier(&self) -> AmplifierMode {
        self.amplifier
    }

    /// `1 + 2 n_bath`, the thermal scaling of all smooth correlators.
    pub fn thermal_factor(&self) -> f64 {
        1.0 + 2.0 * self.n_bath
    }

    /// Doubles the equal-time singularity for phase-preserving readout.
    pub fn amplifier_factor(&self) -> f64 {
        match self.amplifier {
            AmplifierMode::PhaseSensitive => 1.0,
            AmplifierMode::PhasePreserving => 2.0,
        }
    }

    /// Samples `(Omega, eps, kappa)` at time `t` (right-continuous at jumps).
    pub fn sample(&self, t: f64) -> Result<DriveSample> {
        self.sample_side(t, Side::Above)
    }

    pub fn sample_side(&self, t: f64, side: Side) -> Result<DriveSample> {
        Ok(DriveSample {
            detuning: self.detuning.eval_side(t, side)?,
            pump: self.pump.eval_side(t, side)?,
            kappa: self.kappa,
        })
    }

    /// Flags every grid instant where `|eps(t)|^2 >= kappa^2 + 4 Omega(t)^2`.
    /// Advisory for time-dependent drives; the bound is exact only for
    /// constant parameters.
    pub fn check_stability(&self, t_grid: &[f64]) -> Result<Vec<(f64, bool)>> {
        if t_grid.is_empty() {
            return Err(Error::InvalidArgument("empty stability grid".into()));
        }
        let mut flags = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let s = self.sample(t)?;
            let violated = s.pump.norm_sqr() >= s.kappa * s.kappa + 4.0 * s.detuning * s.detuning;
            flags.push((t, violated));
        }
        Ok(flags)
    }

    /// Sorted, deduplicated discontinuity times in the open interval `(a, b)`.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.detuning.breakpoints_in(a, b, &mut out);
        self.pump.breakpoints_in(a, b, &mut out);
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup();
        out
    }

    /// True when every time function is defined on all of `[a, b]`.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        self.detuning.covers(a, b) && self.pump.covers(a, b)
    }
}

/// Amplified quadrature angle `phi(t)`, interpreted modulo `2 pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSchedule {
    phi: TimeFunction,
}

impl QuadratureSchedule {
    pub fn new(phi: TimeFunction) -> Result<Self> {
        phi.validate()?;
        Ok(QuadratureSchedule { phi })
    }

    pub fn constant(phi: f64) -> Self {
        QuadratureSchedule { phi: TimeFunction::Constant(phi) }
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.phi.eval(t)
    }

    pub fn phi_side(&self, t: f64, side: Side) -> Result<f64> {
        self.phi.eval_side(t, side)
    }

    pub fn breakpoints_in(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        self.phi.breakpoints_in(a, b, out);
    }
}
