//! Deterministic statistics of the integrated signal
//! `R = integral w(t) f_phi(t) dt`.
//!
//! The variance splits into a smooth double integral of the quadrature
//! correlator over the `(t1, tau >= 0)` half-plane (doubled by symmetry) and
//! an exactly integrated singular term:
//!
//! ```text
//! <R^2> = 2 iint_{t2 > t1} w(t1) w(t2) K_smooth dt1 dt2
//!       + int w(t)^2 (1/4)(1 + 2 n_bath) (amplifier factor) dt
//! ```
//!
//! The smooth part uses iterated Simpson quadrature with Richardson
//! refinement. Quadrature segments are split at every weight, drive, and
//! quadrature-angle breakpoint, with one-sided evaluation at segment ends,
//! so the composite rule keeps its full order on piecewise-defined inputs.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use crate::correlators::{apply_scalings, correlator_pair, quadrature_correlator};
use crate::error::{Error, Result};
use crate::moments::{evolve_moments, initial_moments, InitialStateSpec, MomentState};
use crate::propagator::IntegratorConfig;
use crate::schedule::{DriveSchedule, QuadratureSchedule, Side, TimeFunction};

/// Integration weight `w(t)`, zero outside its support.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    shape: TimeFunction,
    start: f64,
    end: f64,
}

impl WeightFunction {
    pub fn new(shape: TimeFunction, start: f64, end: f64) -> Result<Self> {
        if !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidArgument("weight support must be a finite interval".into()));
        }
        if !shape.covers(start, end) {
            return Err(Error::InvalidArgument(
                "weight shape is not defined on its whole support".into(),
            ));
        }
        Ok(WeightFunction { shape, start, end })
    }

    pub fn constant(value: f64, start: f64, end: f64) -> Result<Self> {
        WeightFunction::new(TimeFunction::Constant(value), start, end)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_side(t, Side::Above)
    }

    /// One-sided value; the support boundaries count as discontinuities.
    pub fn eval_side(&self, t: f64, side: Side) -> Result<f64> {
        if t < self.start || t > self.end {
            return Ok(0.0);
        }
        if (t == self.start && side == Side::Below) || (t == self.end && side == Side::Above) {
            return Ok(0.0);
        }
        self.shape.eval_side(t, side)
    }

    /// Same support, values multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let shape = match &self.shape {
            TimeFunction::Constant(v) => TimeFunction::Constant(v * c),
            TimeFunction::Steps { initial, steps } => TimeFunction::Steps {
                initial: initial * c,
                steps: steps.iter().map(|&(t, v)| (t, v * c)).collect(),
            },
            TimeFunction::Lerp { knots, clamp } => TimeFunction::Lerp {
                knots: knots.iter().map(|&(t, v)| (t, v * c)).collect(),
                clamp: *clamp,
            },
            TimeFunction::Spline(_) => {
                unimplemented!("scaled spline weights are not used")
            }
        };
        WeightFunction { shape, start: self.start, end: self.end }
    }

    fn breakpoints_in(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        self.shape.breakpoints_in(a, b, out);
        for t in [self.start, self.end] {
            if t > a && t < b {
                out.push(t);
            }
        }
    }
}

/// Controls the Simpson/Richardson refinement of the smooth double integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResolution {
    /// Outer panel count of the coarsest pass.
    pub initial_panels: usize,
    /// Absolute tolerance on the smooth part.
    pub tol: f64,
    /// Maximum number of panel doublings.
    pub max_refinements: usize,
}

impl Default for QuadratureResolution {
    fn default() -> Self {
        QuadratureResolution { initial_panels: 64, tol: 1e-7, max_refinements: 6 }
    }
}

/// Variance (or covariance) of the integrated signal, with the singular and
/// smooth contributions reported separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceReport {
    pub total: f64,
    pub smooth_part: f64,
    pub delta_part: f64,
    /// Richardson error estimate of the smooth part at the accepted level.
    pub quadrature_error: f64,
}

/// `<R^2>` for one weight function.
pub fn integrated_variance(
    schedule: &DriveSchedule,
    quad_schedule: &QuadratureSchedule,
    weight: &WeightFunction,
    spec: &InitialStateSpec,
    t0: f64,
    cfg: &IntegratorConfig,
    res: &QuadratureResolution,
) -> Result<VarianceReport> {
    cross_covariance(schedule, quad_schedule, weight, weight, spec, t0, cfg, res)
}

/// `<R_a R_b>` for two weight functions (equal weights give the variance).
#[allow(clippy::too_many_arguments)]
pub fn cross_covariance(
    schedule: &DriveSchedule,
    quad_schedule: &QuadratureSchedule,
    weight_a: &WeightFunction,
    weight_b: &WeightFunction,
    spec: &InitialStateSpec,
    t0: f64,
    cfg: &IntegratorConfig,
    res: &QuadratureResolution,
) -> Result<VarianceReport> {
    let lo = weight_a.start().min(weight_b.start());
    let hi = weight_a.end().max(weight_b.end());
    if t0 > lo {
        return Err(Error::InvalidArgument(
            "moment anchor t0 must not be later than the weight support".into(),
        ));
    }

    let delta_part = delta_term(schedule, weight_a, weight_b)?;

    let mut cuts = schedule.breakpoints_in(lo, hi);
    quad_schedule.breakpoints_in(lo, hi, &mut cuts);
    weight_a.breakpoints_in(lo, hi, &mut cuts);
    weight_b.breakpoints_in(lo, hi, &mut cuts);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let job = SmoothJob {
        schedule,
        quad_schedule,
        weight_a,
        weight_b,
        spec,
        t0,
        cfg,
        lo,
        hi,
        cuts,
    };

    let mut panels = res.initial_panels.max(2);
    let mut coarse = job.integrate(panels)?;
    let mut refined_value = coarse;
    for _ in 0..res.max_refinements {
        panels *= 2;
        let fine = job.integrate(panels)?;
        let refined_err = (fine - coarse).abs() / 15.0;
        refined_value = fine + (fine - coarse) / 15.0;
        if refined_err <= res.tol {
            return Ok(VarianceReport {
                total: refined_value + delta_part,
                smooth_part: refined_value,
                delta_part,
                quadrature_error: refined_err,
            });
        }
        coarse = fine;
    }
    Err(Error::Accuracy { estimate: coarse + delta_part, refined: refined_value + delta_part })
}

/// Exact integral of `w_a(t) w_b(t)` times the singular quadrature weight.
/// Simpson per breakpoint segment is exact for the piecewise-constant and
/// piecewise-linear weights the engine supports.
fn delta_term(
    schedule: &DriveSchedule,
    weight_a: &WeightFunction,
    weight_b: &WeightFunction,
) -> Result<f64> {
    let lo = weight_a.start().max(weight_b.start());
    let hi = weight_a.end().min(weight_b.end());
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts = alloc::vec![lo, hi];
    weight_a.breakpoints_in(lo, hi, &mut cuts);
    weight_b.breakpoints_in(lo, hi, &mut cuts);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let f_lo = weight_a.eval_side(a, Side::Above)? * weight_b.eval_side(a, Side::Above)?;
        let f_mid = weight_a.eval(mid)? * weight_b.eval(mid)?;
        let f_hi = weight_a.eval_side(b, Side::Below)? * weight_b.eval_side(b, Side::Below)?;
        acc += (b - a) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
    }
    // Per-quadrature singular weight (1/4)(1 + 2 n_bath) x amplifier factor.
    let delta_weight = 0.25 * schedule.thermal_factor() * schedule.amplifier_factor();
    Ok(acc * delta_weight)
}

/// One uniform Simpson piece of a segmented composite rule.
#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    h: f64,
    nodes: usize,
}

/// Composite-Simpson grid over `[lo, hi]` split at `cuts`; node times are
/// deduplicated at the joints for consumers that need an ascending grid.
struct PieceGrid {
    pieces: Vec<Piece>,
    times: Vec<f64>,
}

impl PieceGrid {
    fn build(lo: f64, hi: f64, cuts: &[f64], h_target: f64) -> PieceGrid {
        let mut bounds = alloc::vec![lo];
        bounds.extend(cuts.iter().copied().filter(|&c| c > lo && c < hi));
        bounds.push(hi);
        let mut pieces = Vec::with_capacity(bounds.len() - 1);
        let mut times: Vec<f64> = Vec::new();
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let mut m = ((len / h_target).ceil() as usize).max(2);
            if m % 2 == 1 {
                m += 1;
            }
            let h = len / m as f64;
            pieces.push(Piece { a, b, h, nodes: m + 1 });
            for i in 0..=m {
                let t = if i == m { b } else { a + h * i as f64 };
                if times.last() != Some(&t) {
                    times.push(t);
                }
            }
        }
        PieceGrid { pieces, times }
    }

    /// Visits every (time, side, simpson weight, unique-time index).
    fn visit(&self, mut f: impl FnMut(f64, Side, f64, usize) -> Result<()>) -> Result<()> {
        let mut cursor = 0usize;
        for piece in &self.pieces {
            let m = piece.nodes - 1;
            for i in 0..piece.nodes {
                let t = if i == m { piece.b } else { piece.a + piece.h * i as f64 };
                while self.times[cursor] < t {
                    cursor += 1;
                }
                let side = if i == m { Side::Below } else { Side::Above };
                let coeff = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                f(t, side, coeff * piece.h / 3.0, cursor)?;
            }
        }
        Ok(())
    }
}

struct SmoothJob<'a> {
    schedule: &'a DriveSchedule,
    quad_schedule: &'a QuadratureSchedule,
    weight_a: &'a WeightFunction,
    weight_b: &'a WeightFunction,
    spec: &'a InitialStateSpec,
    t0: f64,
    cfg: &'a IntegratorConfig,
    lo: f64,
    hi: f64,
    cuts: Vec<f64>,
}

impl SmoothJob<'_> {
    /// Iterated Simpson over the triangle `lo <= t1 <= t2 <= hi` of
    /// `[w_a(t1) w_b(t2) + w_b(t1) w_a(t2)] K_smooth(t1, t2)`.
    fn integrate(&self, panels: usize) -> Result<f64> {
        let h_target = (self.hi - self.lo) / (2 * panels) as f64;
        let outer = PieceGrid::build(self.lo, self.hi, &self.cuts, h_target);

        let m0 = initial_moments(self.spec, self.t0)?;
        let moments = evolve_moments(self.schedule, &m0, &outer.times, self.cfg)?;

        let mut acc = 0.0;
        outer.visit(|t1, side, w_outer, idx| {
            acc += w_outer * self.inner_integral(t1, side, &moments[idx], h_target)?;
            Ok(())
        })?;
        Ok(acc)
    }

    fn inner_integral(
        &self,
        t1: f64,
        side1: Side,
        m1: &MomentState,
        h_target: f64,
    ) -> Result<f64> {
        let wa1 = self.weight_a.eval_side(t1, side1)?;
        let wb1 = self.weight_b.eval_side(t1, side1)?;
        if wa1 == 0.0 && wb1 == 0.0 {
            return Ok(0.0);
        }
        let span = self.hi - t1;
        if span <= 0.0 {
            return Ok(0.0);
        }
        let phi1 = self.quad_schedule.phi_side(t1, side1)?;

        let tau_cuts: Vec<f64> =
            self.cuts.iter().filter(|&&c| c > t1 && c < self.hi).map(|&c| c - t1).collect();
        let inner = PieceGrid::build(0.0, span, &tau_cuts, h_target);

        let mut m_anchor = *m1;
        m_anchor.t = t1;
        let pairs = correlator_pair(self.schedule, t1, &inner.times, &m_anchor, self.cfg)?;

        let mut acc = 0.0;
        inner.visit(|tau, side2, w_inner, idx| {
            let t2 = t1 + tau;
            let scaled = apply_scalings(&pairs[idx], self.schedule);
            let phi2 = self.quad_schedule.phi_side(t2, side2)?;
            let k = quadrature_correlator(&scaled, phi1, phi2).smooth;
            let w = wa1 * self.weight_b.eval_side(t2, side2)?
                + wb1 * self.weight_a.eval_side(t2, side2)?;
            acc += w_inner * w * k;
            Ok(())
        })?;
        Ok(acc)
    }
}
