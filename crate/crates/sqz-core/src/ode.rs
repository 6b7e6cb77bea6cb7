//! Embedded Dormand-Prince 5(4) stepper with breakpoint-aware grid output.
//!
//! The state is a fixed-size real vector; callers pack complex matrices into
//! it. Integration restarts at every declared breakpoint so step control
//! never straddles a parameter jump, and the final stage of a step that ends
//! exactly on a breakpoint is evaluated as a left limit.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::propagator::IntegratorConfig;
use crate::schedule::Side;

/// Right-hand side with one-sided evaluation at discontinuities.
pub(crate) trait Rhs<const N: usize> {
    fn eval(&self, t: f64, side: Side, y: &[f64; N]) -> Result<[f64; N]>;
}

impl<F, const N: usize> Rhs<N> for F
where
    F: Fn(f64, Side, &[f64; N]) -> Result<[f64; N]>,
{
    fn eval(&self, t: f64, side: Side, y: &[f64; N]) -> Result<[f64; N]> {
        self(t, side, y)
    }
}

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (identical to the last A row; stage 7 is unused here).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `t0` and emits the state at every grid time.
///
/// `grid` must be strictly ascending with `grid[0] >= t0`; `breaks` must be
/// sorted. `emit(i, t, y)` is called once per grid index in order.
pub(crate) fn integrate_grid<const N: usize, R: Rhs<N>>(
    rhs: &R,
    t0: f64,
    y0: [f64; N],
    grid: &[f64],
    breaks: &[f64],
    cfg: &IntegratorConfig,
    emit: &mut dyn FnMut(usize, f64, &[f64; N]),
) -> Result<()> {
    cfg.validate()?;
    if grid.is_empty() {
        return Ok(());
    }
    if grid[0] < t0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "grid starts at {} before t0 = {t0}",
            grid[0]
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly ascending".into()));
    }

    let mut t = t0;
    let mut y = y0;
    let mut gi = 0;
    while gi < grid.len() && grid[gi] == t {
        emit(gi, t, &y);
        gi += 1;
    }
    if gi == grid.len() {
        return Ok(());
    }

    let t_final = grid[grid.len() - 1];
    // Stops are grid points plus interior breakpoints, merged in order.
    let mut stops: Vec<f64> = Vec::with_capacity(grid.len() - gi + breaks.len());
    stops.extend_from_slice(&grid[gi..]);
    stops.extend(breaks.iter().copied().filter(|&b| b > t && b < t_final));
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();

    let span = t_final - t;
    let mut h = (span / 64.0).min(cfg.max_step);

    for &stop in &stops {
        // A stop that is a breakpoint ends its segment; evaluation at the
        // stop time inside this segment takes the left limit.
        let is_break = breaks.binary_search_by(|b| b.partial_cmp(&stop).unwrap()).is_ok();
        loop {
            if t >= stop {
                break;
            }
            // A gap below time resolution cannot change the state; jump it.
            if stop - t <= 16.0 * f64::EPSILON * t.abs().max(stop.abs()).max(1.0) {
                break;
            }
            let mut step = h.min(stop - t).min(cfg.max_step);
            loop {
                let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
                if step < min_step {
                    return Err(Error::Convergence { t_from: t, t_to: stop });
                }
                let side_at = |st: f64| if is_break && st >= stop { Side::Below } else { Side::Above };
                let mut k = [[0.0; N]; 7];
                k[0] = rhs.eval(t, side_at(t), &y)?;
                for s in 1..7 {
                    let mut ys = y;
                    for j in 0..s {
                        let a = A[s][j];
                        if a != 0.0 {
                            for i in 0..N {
                                ys[i] += step * a * k[j][i];
                            }
                        }
                    }
                    let ts = if s >= 5 { (t + step).min(stop) } else { t + C[s] * step };
                    k[s] = rhs.eval(ts, side_at(ts), &ys)?;
                }
                let mut y_new = y;
                let mut err_sq = 0.0;
                for i in 0..N {
                    let mut dy = 0.0;
                    let mut e = 0.0;
                    for s in 0..7 {
                        dy += B5[s] * k[s][i];
                        e += E[s] * k[s][i];
                    }
                    y_new[i] += step * dy;
                    let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                    let r = step * e / scale;
                    err_sq += r * r;
                }
                let err = (err_sq / N as f64).sqrt();
                if err <= 1.0 {
                    t += step;
                    y = y_new;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h = (step * grow).min(cfg.max_step);
                    break;
                }
                step *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            // Snap to the stop when the remaining gap is below resolution.
            if stop - t < 16.0 * f64::EPSILON * stop.abs().max(1.0) {
                t = stop;
            }
        }
        t = stop;
        while gi < grid.len() && grid[gi] == stop {
            emit(gi, t, &y);
            gi += 1;
        }
    }
    debug_assert_eq!(gi, grid.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let rhs = |_t: f64, _side: Side, y: &[f64; 1]| Ok([-0.5 * y[0]]);
        let grid = [1.0, 2.0, 4.0];
        let mut got = [0.0; 3];
        integrate_grid(
            &rhs,
            0.0,
            [1.0],
            &grid,
            &[],
            &IntegratorConfig::default(),
            &mut |i, _t, y| got[i] = y[0],
        )
        .unwrap();
        for (i, &t) in grid.iter().enumerate() {
            assert!((got[i] - (-0.5 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn piecewise_jump_is_resolved() {
        // dy/dt = a(t) y with a jumping from -1 to +1 at t = 1.
        let rhs = |t: f64, side: Side, y: &[f64; 1]| {
            let a = match side {
                Side::Above if t >= 1.0 => 1.0,
                Side::Below if t > 1.0 => 1.0,
                _ => -1.0,
            };
            Ok([a * y[0]])
        };
        let mut out = 0.0;
        integrate_grid(
            &rhs,
            0.0,
            [1.0],
            &[2.0],
            &[1.0],
            &IntegratorConfig::default(),
            &mut |_, _, y| out = y[0],
        )
        .unwrap();
        assert!((out - 1.0f64).abs() < 1e-9, "got {out}");
    }

    #[test]
    fn impossible_tolerance_reports_convergence_failure() {
        let rhs = |t: f64, _side: Side, y: &[f64; 1]| Ok([y[0] * t.sin()]);
        let cfg = IntegratorConfig { rel_tol: 1e-300, abs_tol: 1e-300, max_step: f64::INFINITY };
        let err = integrate_grid(&rhs, 0.0, [1.0], &[10.0], &[], &cfg, &mut |_, _, _| {});
        assert!(matches!(err, Err(Error::Convergence { .. })));
    }
}
