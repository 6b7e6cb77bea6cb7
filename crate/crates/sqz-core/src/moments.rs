//! Intracavity second-moment propagation.
//!
//! The Hermitian moment matrix
//!
//! ```text
//! S = [ <|alpha|^2>    <alpha^2>  ]
//!     [ <alpha*^2>    <|alpha|^2> ]
//! ```
//!
//! obeys the Lyapunov-form ODE `dS/dt = M S + S M^T* + (kappa/2) I` at base
//! normalization (vacuum-level noise). This differential route composes with
//! adaptive stepping; the equivalent Green's-function integral form is kept
//! as an independent test oracle, not as a code path.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::ode;
use crate::propagator::{evolution_matrix, IntegratorConfig};
use crate::schedule::{DriveSchedule, Side};

/// Second moments of the intracavity field fluctuations at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentState {
    /// `<alpha^2(t)>`.
    pub m_aa: Complex64,
    /// `<|alpha(t)|^2>`, bounded below by the vacuum floor 1/2.
    pub m_abs: f64,
    pub t: f64,
}

impl MomentState {
    /// Checks the vacuum floor and the Gaussian uncertainty bound
    /// `m_abs^2 >= |m_aa|^2 + 1/4`.
    pub fn validate(&self) -> Result<()> {
        if !self.m_abs.is_finite() || !self.m_aa.is_finite() {
            return Err(Error::InvalidArgument("non-finite moments".into()));
        }
        if self.m_abs < 0.5 {
            return Err(Error::InvalidArgument(format!(
                "<|alpha|^2> = {} violates the vacuum floor 1/2",
                self.m_abs
            )));
        }
        if self.m_abs * self.m_abs < self.m_aa.norm_sqr() + 0.25 - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "moments ({}, {}) violate m_abs^2 >= |m_aa|^2 + 1/4",
                self.m_aa, self.m_abs
            )));
        }
        Ok(())
    }

    pub(crate) fn matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::new(self.m_abs, 0.0),
            self.m_aa,
            self.m_aa.conj(),
            Complex64::new(self.m_abs, 0.0),
        )
    }

    pub(crate) fn from_matrix(s: &Mat2, t: f64) -> Self {
        MomentState {
            m_aa: (s.0[0][1] + s.0[1][0].conj()) * 0.5,
            m_abs: (s.0[0][0].re + s.0[1][1].re) * 0.5,
            t,
        }
    }
}

/// Initial intracavity state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialStateSpec {
    Vacuum,
    Thermal { n: f64 },
    SqueezedVacuum { r: f64, angle: f64 },
    Custom { m_aa: Complex64, m_abs: f64 },
}

/// Second moments of the given state at time `t0`.
pub fn initial_moments(spec: &InitialStateSpec, t0: f64) -> Result<MomentState> {
    let state = match *spec {
        InitialStateSpec::Vacuum => MomentState { m_aa: Complex64::new(0.0, 0.0), m_abs: 0.5, t: t0 },
        InitialStateSpec::Thermal { n } => {
            if !(n >= 0.0) {
                return Err(Error::InvalidArgument(format!("thermal occupation {n} < 0")));
            }
            MomentState { m_aa: Complex64::new(0.0, 0.0), m_abs: n + 0.5, t: t0 }
        }
        InitialStateSpec::SqueezedVacuum { r, angle } => {
            // Standard single-mode squeeze-operator moments:
            // <a^2> = -e^{i angle} sinh r cosh r, <a^t a> = sinh^2 r.
            let sh = r.sinh();
            let ch = r.cosh();
            MomentState {
                m_aa: -Complex64::from_polar(sh * ch, angle),
                m_abs: sh * sh + 0.5,
                t: t0,
            }
        }
        InitialStateSpec::Custom { m_aa, m_abs } => MomentState { m_aa, m_abs, t: t0 },
    };
    state.validate()?;
    Ok(state)
}

struct MomentRhs<'a> {
    schedule: &'a DriveSchedule,
}

impl ode::Rhs<8> for MomentRhs<'_> {
    fn eval(&self, t: f64, side: Side, y: &[f64; 8]) -> Result<[f64; 8]> {
        let sample = self.schedule.sample_side(t, side)?;
        let m = evolution_matrix(&sample);
        let s = Mat2::from_reals(y);
        let mut d = m * s + s * m.adjoint();
        let pump_in = Complex64::new(sample.kappa / 2.0, 0.0);
        d.0[0][0] += pump_in;
        d.0[1][1] += pump_in;
        Ok(d.to_reals())
    }
}

/// Propagates the full 2x2 moment matrix to each grid time.
///
/// Hermiticity and equal diagonals are preserved by the dynamics, not
/// enforced; property tests check them.
pub fn evolve_moment_matrix(
    schedule: &DriveSchedule,
    s0: Mat2,
    t0: f64,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Mat2>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    let t_last = t_grid[t_grid.len() - 1];
    if !schedule.covers(t0, t_last) {
        return Err(Error::Domain { t: t_last });
    }
    let breaks = schedule.breakpoints_in(t0, t_last);
    let rhs = MomentRhs { schedule };
    let mut out = alloc::vec![Mat2::zeros(); t_grid.len()];
    ode::integrate_grid(&rhs, t0, s0.to_reals(), t_grid, &breaks, cfg, &mut |i, _t, y| {
        out[i] = Mat2::from_reals(y);
    })?;
    Ok(out)
}

/// Evolves moments from `m0` to each grid time (grid ascending, starting at
/// or after `m0.t`).
pub fn evolve_moments(
    schedule: &DriveSchedule,
    m0: &MomentState,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<MomentState>> {
    m0.validate()?;
    let mats = evolve_moment_matrix(schedule, m0.matrix(), m0.t, t_grid, cfg)?;
    Ok(mats
        .iter()
        .zip(t_grid)
        .map(|(s, &t)| MomentState::from_matrix(s, t))
        .collect())
}

/// Relaxation interval after which the initial state is forgotten to below
/// 1e-8: `max(20/kappa_slow, 20/kappa)` with `kappa_slow` the slowest moment
/// decay rate `kappa - Re(eps_gap)` sampled over `probe`.
pub fn relaxation_time(schedule: &DriveSchedule, probe: &[f64]) -> Result<f64> {
    let mut slow = schedule.kappa();
    for &t in probe {
        let s = schedule.sample(t)?;
        let gap_sq = s.pump.norm_sqr() - 4.0 * s.detuning * s.detuning;
        let re_gap = if gap_sq > 0.0 { gap_sq.sqrt() } else { 0.0 };
        let rate = s.kappa - re_gap;
        if rate <= 0.0 {
            return Err(Error::Unstable {
                eps_mag: s.pump.norm(),
                kappa: s.kappa,
                omega: s.detuning,
            });
        }
        slow = slow.min(rate);
    }
    Ok((20.0 / slow).max(20.0 / schedule.kappa()))
}
