//! Output-field correlators `K_ff`, `K_ff*` and the measured quadrature
//! correlator.
//!
//! For `t2 >= t1` the column vector `(K_ff, K_ff*)^T` solves the same ODE as
//! the Green's function, seeded at `t2 = t1 + 0` by
//! `kappa (<alpha^2(t1)>, <|alpha(t1)|^2> - 1/2)^T`. Values for `t2 < t1`
//! come from the symmetry relations, never from backward integration.
//!
//! The engine computes everything at base normalization (`kappa_out = kappa`,
//! zero bath, phase-sensitive readout); [`apply_scalings`] applies the exact
//! multiplicative rules for the general case. Equal-time singularities are
//! carried symbolically in `delta_weight`.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moments::{evolve_moments, initial_moments, InitialStateSpec, MomentState};
use crate::propagator::{propagate_vector, IntegratorConfig};
use crate::schedule::{DriveSchedule, QuadratureSchedule};

/// Smooth parts of `K_ff(t1, t2)` and `K_ff*(t1, t2)` plus the coefficient of
/// `delta(t2 - t1)` carried by `K_ff*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelatorPair {
    pub k_ff: Complex64,
    pub k_ffstar: Complex64,
    /// Weight of `delta(t2 - t1)` in `K_ff*`; nonzero only at coincidence.
    pub delta_weight: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Measured quadrature correlator `K_{phi1 phi2}(t1, t2)`: smooth value plus
/// the coefficient of `delta(t2 - t1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureCorrelator {
    pub smooth: f64,
    pub delta_weight: f64,
}

/// Initial condition `kappa (<alpha^2>, <|alpha|^2> - 1/2)^T` for the
/// correlator ODE at `t2 = t1 + 0`.
pub fn correlator_initial(m: &MomentState, kappa: f64) -> [Complex64; 2] {
    [m.m_aa * kappa, Complex64::new((m.m_abs - 0.5) * kappa, 0.0)]
}

/// Correlator pair at `(t1, t1 + tau)` for every requested lag, at base
/// normalization. `tau_grid` must be ascending and nonnegative; a leading
/// `tau = 0` entry returns the one-sided limit `t2 -> t1 + 0` together with
/// the base singular weight 1/2 (doubled for phase-preserving readout).
pub fn correlator_pair(
    schedule: &DriveSchedule,
    t1: f64,
    tau_grid: &[f64],
    m_at_t1: &MomentState,
    cfg: &IntegratorConfig,
) -> Result<Vec<CorrelatorPair>> {
    if m_at_t1.t != t1 {
        return Err(Error::InvalidArgument(format!(
            "moments are anchored at t = {}, expected t1 = {t1}",
            m_at_t1.t
        )));
    }
    if tau_grid.is_empty() {
        return Ok(Vec::new());
    }
    if tau_grid[0] < 0.0 {
        return Err(Error::InvalidArgument("tau grid must be nonnegative".into()));
    }
    let v0 = correlator_initial(m_at_t1, schedule.kappa());
    let base_delta = 0.5 * schedule.amplifier_factor();

    let mut pairs = Vec::with_capacity(tau_grid.len());
    let mut ode_grid: Vec<f64> = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        if tau == 0.0 {
            pairs.push(CorrelatorPair {
                k_ff: v0[0],
                k_ffstar: v0[1],
                delta_weight: base_delta,
                t1,
                t2: t1,
            });
        } else {
            ode_grid.push(t1 + tau);
        }
    }
    if !ode_grid.is_empty() {
        let propagated = propagate_vector(schedule, t1, v0, &ode_grid, cfg)?;
        for (v, &t2) in propagated.iter().zip(&ode_grid) {
            pairs.push(CorrelatorPair {
                k_ff: v[0],
                k_ffstar: v[1],
                delta_weight: 0.0,
                t1,
                t2,
            });
        }
    }
    pairs.sort_by(|a, b| a.t2.partial_cmp(&b.t2).unwrap());
    Ok(pairs)
}

/// Swaps the time arguments using the exact symmetry relations:
/// `K_ff` is symmetric, `K_ff*` conjugates.
pub fn extend_symmetric(pair: &CorrelatorPair) -> CorrelatorPair {
    CorrelatorPair {
        k_ff: pair.k_ff,
        k_ffstar: pair.k_ffstar.conj(),
        delta_weight: pair.delta_weight,
        t1: pair.t2,
        t2: pair.t1,
    }
}

/// Applies the output-coupling, thermal, and amplifier rules to a pair
/// computed at base normalization: smooth parts are multiplied by
/// `(kappa_out/kappa) (1 + 2 n_bath)`, while the singular weight becomes
/// `(n_bath + 1/2)` (doubled for phase-preserving readout) and is *not*
/// scaled by `kappa_out/kappa`.
pub fn apply_scalings(pair: &CorrelatorPair, schedule: &DriveSchedule) -> CorrelatorPair {
    let factor = (schedule.kappa_out() / schedule.kappa()) * schedule.thermal_factor();
    let delta_weight = if pair.delta_weight != 0.0 {
        (schedule.n_bath() + 0.5) * schedule.amplifier_factor()
    } else {
        0.0
    };
    CorrelatorPair {
        k_ff: pair.k_ff * factor,
        k_ffstar: pair.k_ffstar * factor,
        delta_weight,
        t1: pair.t1,
        t2: pair.t2,
    }
}

/// Assembles the measured quadrature correlator from a (scaled) pair:
///
/// ```text
/// K_{phi1 phi2} = (1/2) Re[K_ff e^{-i(phi1+phi2)}]
///               + (1/2) Re[K_ff* e^{-i(phi1-phi2)}]
/// ```
///
/// The 1/2 prefactor also halves the singular weight, giving
/// `(1/4)(1 + 2 n_bath)` per quadrature in the phase-sensitive case.
pub fn quadrature_correlator(pair: &CorrelatorPair, phi1: f64, phi2: f64) -> QuadratureCorrelator {
    let sum = Complex64::from_polar(1.0, -(phi1 + phi2));
    let diff = Complex64::from_polar(1.0, -(phi1 - phi2));
    QuadratureCorrelator {
        smooth: 0.5 * (pair.k_ff * sum).re + 0.5 * (pair.k_ffstar * diff).re,
        delta_weight: pair.delta_weight / 2.0,
    }
}

/// One evaluated grid cell: scaled pair plus the quadrature assembly at
/// `phi1 = phi(t1)`, `phi2 = phi(t1 + tau)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub t1: f64,
    pub tau: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub pair: CorrelatorPair,
    pub quad: QuadratureCorrelator,
}

/// Dense correlator table over a `(t1, tau)` grid, row order t1-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTable {
    pub t1_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub cells: Vec<GridCell>,
}

impl CorrelatorTable {
    pub fn cell(&self, i_t1: usize, i_tau: usize) -> &GridCell {
        &self.cells[i_t1 * self.tau_grid.len() + i_tau]
    }
}

/// Full table over `(t1, tau)`: moments are evolved once from `(spec, t0)`
/// across the ascending `t1_grid` and reused; each `t1` owns one independent
/// correlator integration over the lag grid. Scalings are applied.
pub fn correlator_grid(
    schedule: &DriveSchedule,
    quad_schedule: &QuadratureSchedule,
    t1_grid: &[f64],
    tau_grid: &[f64],
    spec: &InitialStateSpec,
    t0: f64,
    cfg: &IntegratorConfig,
) -> Result<CorrelatorTable> {
    if t1_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::InvalidArgument("empty correlator grid".into()));
    }
    if t1_grid.windows(2).any(|w| w[1] <= w[0]) || tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grids must be strictly ascending".into()));
    }
    let m0 = initial_moments(spec, t0)?;
    let moments = evolve_moments(schedule, &m0, t1_grid, cfg)?;
    let mut cells = Vec::with_capacity(t1_grid.len() * tau_grid.len());
    for (&t1, m) in t1_grid.iter().zip(&moments) {
        let pairs = correlator_pair(schedule, t1, tau_grid, m, cfg)?;
        let phi1 = quad_schedule.phi(t1)?;
        for (pair, &tau) in pairs.iter().zip(tau_grid) {
            let scaled = apply_scalings(pair, schedule);
            let phi2 = quad_schedule.phi(t1 + tau)?;
            cells.push(GridCell {
                t1,
                tau,
                phi1,
                phi2,
                pair: scaled,
                quad: quadrature_correlator(&scaled, phi1, phi2),
            });
        }
    }
    Ok(CorrelatorTable {
        t1_grid: t1_grid.to_vec(),
        tau_grid: tau_grid.to_vec(),
        cells,
    })
}

/// Scaled correlator pair at arbitrary time order: evaluates forward from
/// the earlier time and applies [`extend_symmetric`] when `t_a > t_b`.
pub fn correlator_at(
    schedule: &DriveSchedule,
    spec: &InitialStateSpec,
    t0: f64,
    t_a: f64,
    t_b: f64,
    cfg: &IntegratorConfig,
) -> Result<CorrelatorPair> {
    let (lo, hi) = if t_a <= t_b { (t_a, t_b) } else { (t_b, t_a) };
    let m0 = initial_moments(spec, t0)?;
    let m = evolve_moments(schedule, &m0, &[lo], cfg)?[0];
    let pair = correlator_pair(schedule, lo, &[hi - lo], &m, cfg)?[0];
    let scaled = apply_scalings(&pair, schedule);
    Ok(if t_a <= t_b { scaled } else { extend_symmetric(&scaled) })
}
