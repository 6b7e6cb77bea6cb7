//! Stochastic-trajectory oracle.
//!
//! Euler-Maruyama integration of the complex Langevin model: the intracavity
//! fluctuation obeys
//!
//! ```text
//! alpha' = -(kappa/2 + i Omega) alpha - (eps/2) alpha*
//!          + sqrt(kappa_out) v + sqrt(kappa - kappa_out) v_add
//! ```
//!
//! with complex Gaussian noise of per-component variance
//! `(n_bath + 1/2) / (2 dt)` per step, and the recorded output is
//! `f = -v + sqrt(kappa_out) alpha` using the *same* noise sample `v` — the
//! anticorrelation between `v` and `alpha` is the physics of the outgoing
//! field. A control mode with an independent output noise stream is provided
//! as a negative control; it must fail the closed-form comparisons.
//!
//! Every trajectory draws from its own counter-keyed ChaCha stream, so
//! ensembles are bitwise reproducible regardless of execution order or
//! worker count. Ensemble runs are chunked; chunk accumulators merge in
//! index order.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::moments::{initial_moments, InitialStateSpec};
use crate::nonlinear::NonlinearResonator;
use crate::schedule::{DriveSchedule, QuadratureSchedule};
use crate::signal::WeightFunction;

/// Ensemble and discretization settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    /// Euler-Maruyama step; keep `dt * kappa_+ <~ 0.05`.
    pub dt: f64,
    pub n_traj: u64,
    pub seed: u64,
    pub t_start: f64,
    pub t_end: f64,
    /// Intracavity state sampled at `t_start` (Wigner distribution).
    pub init: InitialStateSpec,
    pub output_noise: OutputNoise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputNoise {
    /// Physical model: output reuses the drive noise sample.
    Anticorrelated,
    /// Negative control: output noise from an independent stream.
    IndependentControl,
}

impl McConfig {
    pub fn new(dt: f64, n_traj: u64, seed: u64, t_start: f64, t_end: f64) -> Self {
        McConfig {
            dt,
            n_traj,
            seed,
            t_start,
            t_end,
            init: InitialStateSpec::Vacuum,
            output_noise: OutputNoise::Anticorrelated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        if self.n_traj < 2 {
            return Err(Error::InvalidArgument("need at least two trajectories".into()));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidArgument("t_end must exceed t_start".into()));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).ceil() as usize
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.t_start + self.dt * k as f64
    }

    /// Snaps `t` to the nearest step index; errors outside the window.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.t_start) / self.dt;
        let k = x.round();
        if k < 0.0 || k > self.step_count() as f64 {
            return Err(Error::Domain { t });
        }
        Ok(k as usize)
    }

    /// True when `dt * kappa_+` exceeds 0.05 anywhere on the probe grid.
    pub fn step_warning(&self, schedule: &DriveSchedule, probe: &[f64]) -> Result<bool> {
        for &t in probe {
            let s = schedule.sample(t)?;
            if self.dt * (s.kappa + s.pump.norm()) > 0.05 {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Drift model for the trajectory walker.
#[derive(Clone, Copy)]
pub enum Drift<'a> {
    Linear(&'a DriveSchedule),
    /// Full nonlinear classical drift; the linearization never enters here,
    /// which is what makes nonlinear cross-checks independent.
    Nonlinear(&'a NonlinearResonator),
}

impl Drift<'_> {
    fn schedule(&self) -> &DriveSchedule {
        match self {
            Drift::Linear(s) => s,
            Drift::Nonlinear(r) => &r.base,
        }
    }

    fn eval(&self, t: f64, alpha: Complex64) -> Result<Complex64> {
        match self {
            Drift::Linear(s) => {
                let d = s.sample(t)?;
                Ok(-(Complex64::new(d.kappa / 2.0, d.detuning)) * alpha
                    - d.pump / 2.0 * alpha.conj())
            }
            Drift::Nonlinear(r) => r.classical_drift(t, alpha),
        }
    }
}

/// One recorded step of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub t: f64,
    pub alpha: Complex64,
    pub f: Complex64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn lane_rng(seed: u64, traj: u64, lane: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed ^ splitmix(traj.wrapping_add(splitmix(lane))))
}

fn normal(rng: &mut ChaCha12Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Samples an initial field from the Gaussian with the spec's moments.
fn sample_initial(spec: &InitialStateSpec, rng: &mut ChaCha12Rng) -> Result<Complex64> {
    let m = initial_moments(spec, 0.0)?;
    // Component covariance from <alpha^2> and <|alpha|^2>.
    let var_x = (m.m_abs + m.m_aa.re) / 2.0;
    let var_y = (m.m_abs - m.m_aa.re) / 2.0;
    let cov = m.m_aa.im / 2.0;
    let (z1, z2) = (normal(rng), normal(rng));
    if var_x <= 0.0 {
        return Ok(Complex64::new(0.0, var_y.max(0.0).sqrt() * z1));
    }
    let a11 = var_x.sqrt();
    let a21 = cov / a11;
    let a22 = (var_y - a21 * a21).max(0.0).sqrt();
    Ok(Complex64::new(a11 * z1, a21 * z1 + a22 * z2))
}

/// Walks one trajectory, invoking `on_step(k, t, alpha, f)` for every step
/// index in `0..=k_last`.
fn walk(
    drift: &Drift<'_>,
    cfg: &McConfig,
    traj: u64,
    k_last: usize,
    on_step: &mut dyn FnMut(usize, f64, Complex64, Complex64),
) -> Result<()> {
    let schedule = drift.schedule();
    let kappa = schedule.kappa();
    let kappa_out = schedule.kappa_out();
    let sqrt_kout = kappa_out.sqrt();
    let sqrt_kloss = (kappa - kappa_out).max(0.0).sqrt();
    let has_loss = kappa_out < kappa;
    let sigma = ((schedule.n_bath() + 0.5) / (2.0 * cfg.dt)).sqrt();
    let dt = cfg.dt;

    let mut rng_v = lane_rng(cfg.seed, traj, 0);
    let mut rng_loss = lane_rng(cfg.seed, traj, 1);
    let mut rng_ind = lane_rng(cfg.seed, traj, 2);

    let mut alpha = sample_initial(&cfg.init, &mut rng_v)?;
    for k in 0..=k_last {
        let t = cfg.time_at(k);
        let v = Complex64::new(sigma * normal(&mut rng_v), sigma * normal(&mut rng_v));
        let v_out = match cfg.output_noise {
            OutputNoise::Anticorrelated => v,
            OutputNoise::IndependentControl => {
                Complex64::new(sigma * normal(&mut rng_ind), sigma * normal(&mut rng_ind))
            }
        };
        on_step(k, t, alpha, -v_out + sqrt_kout * alpha);
        if k == k_last {
            break;
        }
        let mut kick = sqrt_kout * v;
        if has_loss {
            let v_add = Complex64::new(sigma * normal(&mut rng_loss), sigma * normal(&mut rng_loss));
            kick += sqrt_kloss * v_add;
        }
        alpha += (drift.eval(t, alpha)? + kick) * dt;
    }
    Ok(())
}

/// Full sampled path of one trajectory; mainly for inspection and replay
/// tests. Ensemble statistics use the accumulators below instead.
pub fn simulate_trajectory(
    schedule: &DriveSchedule,
    cfg: &McConfig,
    traj_index: u64,
) -> Result<Vec<TrajectoryStep>> {
    cfg.validate()?;
    let n = cfg.step_count();
    let mut path = Vec::with_capacity(n + 1);
    walk(&Drift::Linear(schedule), cfg, traj_index, n, &mut |_, t, alpha, f| {
        path.push(TrajectoryStep { t, alpha, f });
    })?;
    Ok(path)
}

/// Scalar ensemble estimate with its standard error (`sample std / sqrt(n)`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

/// Complex ensemble estimate with per-component standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McComplexEstimate {
    pub mean: Complex64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub n: u64,
}

impl McComplexEstimate {
    /// Largest per-component z-score against a reference value.
    pub fn max_z(&self, reference: Complex64) -> f64 {
        let zr = (self.mean.re - reference.re).abs() / self.std_error_re.max(f64::MIN_POSITIVE);
        let zi = (self.mean.im - reference.im).abs() / self.std_error_im.max(f64::MIN_POSITIVE);
        zr.max(zi)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct ScalarAcc {
    sum: f64,
    sum_sq: f64,
}

impl ScalarAcc {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &ScalarAcc) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn finalize(&self, n: u64) -> McEstimate {
        let nf = n as f64;
        let mean = self.sum / nf;
        let var = ((self.sum_sq - self.sum * self.sum / nf) / (nf - 1.0)).max(0.0);
        McEstimate { mean, std_error: (var / nf).sqrt(), n }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct ComplexAcc {
    re: ScalarAcc,
    im: ScalarAcc,
}

impl ComplexAcc {
    fn push(&mut self, z: Complex64) {
        self.re.push(z.re);
        self.im.push(z.im);
    }

    fn merge(&mut self, other: &ComplexAcc) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    fn finalize(&self, n: u64) -> McComplexEstimate {
        let re = self.re.finalize(n);
        let im = self.im.finalize(n);
        McComplexEstimate {
            mean: Complex64::new(re.mean, im.mean),
            std_error_re: re.std_error,
            std_error_im: im.std_error,
            n,
        }
    }
}

/// Correlator estimates over a `(t1, tau)` grid, t1-major, at the snapped
/// step times.
#[derive(Clone, Debug)]
pub struct PairEstimates {
    pub t1: Vec<f64>,
    pub tau: Vec<f64>,
    pub ff: Vec<McComplexEstimate>,
    pub ffstar: Vec<McComplexEstimate>,
}

impl PairEstimates {
    pub fn at(&self, i_t1: usize, i_tau: usize) -> (&McComplexEstimate, &McComplexEstimate) {
        let idx = i_t1 * self.tau.len() + i_tau;
        (&self.ff[idx], &self.ffstar[idx])
    }
}

/// Mergeable accumulator for `<f(t1) f(t1+tau)>` and `<f(t1) f*(t1+tau)>`
/// over a time grid.
///
/// The `tau = 0` column of the `ff*` estimate carries the singular part as
/// `smooth + (n_bath + 1/2)/dt` and must not be compared against smooth
/// values; multiply by `dt` to estimate the delta weight instead.
#[derive(Clone)]
pub struct PairAccumulator {
    t1_idx: Vec<usize>,
    tau_steps: Vec<usize>,
    sample_idx: Vec<usize>,
    slot_of_idx: Vec<usize>,
    /// Deterministic per-sample subtraction (e.g. `sqrt(kappa_out) alpha_c`).
    subtract: Option<Vec<Complex64>>,
    ff: Vec<ComplexAcc>,
    ffstar: Vec<ComplexAcc>,
    n: u64,
}

impl PairAccumulator {
    pub fn new(cfg: &McConfig, t1_grid: &[f64], tau_grid: &[f64]) -> Result<Self> {
        cfg.validate()?;
        if t1_grid.is_empty() || tau_grid.is_empty() {
            return Err(Error::InvalidArgument("empty estimation grid".into()));
        }
        let t1_idx: Vec<usize> = t1_grid.iter().map(|&t| cfg.index_of(t)).collect::<Result<_>>()?;
        let tau_steps: Vec<usize> = tau_grid
            .iter()
            .map(|&tau| {
                if tau < 0.0 {
                    return Err(Error::InvalidArgument("tau must be nonnegative".into()));
                }
                Ok((tau / cfg.dt).round() as usize)
            })
            .collect::<Result<_>>()?;
        let mut sample_idx: Vec<usize> = Vec::new();
        for &i in &t1_idx {
            for &dj in &tau_steps {
                let j = i + dj;
                if j > cfg.step_count() {
                    return Err(Error::Domain { t: cfg.time_at(j) });
                }
                sample_idx.push(j);
            }
            sample_idx.push(i);
        }
        sample_idx.sort_unstable();
        sample_idx.dedup();
        let max_idx = *sample_idx.last().unwrap();
        let mut slot_of_idx = alloc::vec![usize::MAX; max_idx + 1];
        for (slot, &k) in sample_idx.iter().enumerate() {
            slot_of_idx[k] = slot;
        }
        let cells = t1_idx.len() * tau_steps.len();
        Ok(PairAccumulator {
            t1_idx,
            tau_steps,
            sample_idx,
            slot_of_idx,
            subtract: None,
            ff: alloc::vec![ComplexAcc::default(); cells],
            ffstar: alloc::vec![ComplexAcc::default(); cells],
            n: 0,
        })
    }

    /// Snapped sample times for the deterministic per-sample subtraction.
    pub fn sample_times(&self, cfg: &McConfig) -> Vec<f64> {
        self.sample_idx.iter().map(|&k| cfg.time_at(k)).collect()
    }

    /// Installs values to subtract from `f` at each sample time (aligned with
    /// [`Self::sample_times`]).
    pub fn set_subtraction(&mut self, values: Vec<Complex64>) -> Result<()> {
        if values.len() != self.sample_idx.len() {
            return Err(Error::InvalidArgument("subtraction length mismatch".into()));
        }
        self.subtract = Some(values);
        Ok(())
    }

    /// Simulates trajectories `range` and accumulates their products.
    pub fn run(&mut self, drift: &Drift<'_>, cfg: &McConfig, range: Range<u64>) -> Result<()> {
        let k_last = *self.sample_idx.last().unwrap();
        let mut samples = alloc::vec![Complex64::new(0.0, 0.0); self.sample_idx.len()];
        for traj in range {
            let mut cursor = 0usize;
            let sample_idx = &self.sample_idx;
            let slot_samples = &mut samples;
            walk(drift, cfg, traj, k_last, &mut |k, _t, _alpha, f| {
                if cursor < sample_idx.len() && sample_idx[cursor] == k {
                    slot_samples[cursor] = f;
                    cursor += 1;
                }
            })?;
            if let Some(sub) = &self.subtract {
                for (s, d) in samples.iter_mut().zip(sub) {
                    *s -= d;
                }
            }
            let mut cell = 0usize;
            for &i in &self.t1_idx {
                let f1 = samples[self.slot_of_idx[i]];
                for &dj in &self.tau_steps {
                    let f2 = samples[self.slot_of_idx[i + dj]];
                    self.ff[cell].push(f1 * f2);
                    self.ffstar[cell].push(f1 * f2.conj());
                    cell += 1;
                }
            }
            self.n += 1;
        }
        Ok(())
    }

    /// Empty accumulator over the same grid (for per-chunk accumulation).
    pub fn fresh(&self) -> PairAccumulator {
        let mut out = self.clone();
        for a in out.ff.iter_mut().chain(out.ffstar.iter_mut()) {
            *a = ComplexAcc::default();
        }
        out.n = 0;
        out
    }

    /// Merges another accumulator built over the same grid.
    pub fn merge(&mut self, other: &PairAccumulator) {
        debug_assert_eq!(self.t1_idx, other.t1_idx);
        debug_assert_eq!(self.tau_steps, other.tau_steps);
        for (a, b) in self.ff.iter_mut().zip(&other.ff) {
            a.merge(b);
        }
        for (a, b) in self.ffstar.iter_mut().zip(&other.ffstar) {
            a.merge(b);
        }
        self.n += other.n;
    }

    pub fn finalize(&self, cfg: &McConfig) -> PairEstimates {
        PairEstimates {
            t1: self.t1_idx.iter().map(|&k| cfg.time_at(k)).collect(),
            tau: self.tau_steps.iter().map(|&d| d as f64 * cfg.dt).collect(),
            ff: self.ff.iter().map(|a| a.finalize(self.n)).collect(),
            ffstar: self.ffstar.iter().map(|a| a.finalize(self.n)).collect(),
        }
    }
}

/// Canonical trajectory chunk size. Ensemble sums are always reduced chunk
/// by chunk in index order, so serial runs and parallel runs over the same
/// chunk grid produce bitwise-identical estimates for any worker count.
pub const ENSEMBLE_CHUNK: u64 = 1024;

/// Splits `0..n_traj` into the canonical chunks.
pub fn chunk_ranges(n_traj: u64) -> impl Iterator<Item = Range<u64>> {
    (0..n_traj.div_ceil(ENSEMBLE_CHUNK))
        .map(move |c| (c * ENSEMBLE_CHUNK)..((c + 1) * ENSEMBLE_CHUNK).min(n_traj))
}

/// Serial ensemble estimate of `(K_ff, K_ff*)` at one `t1` over a lag grid.
pub fn estimate_correlator_pair(
    schedule: &DriveSchedule,
    cfg: &McConfig,
    t1: f64,
    tau_grid: &[f64],
) -> Result<PairEstimates> {
    estimate_correlator_grid(schedule, cfg, &[t1], tau_grid)
}

/// Serial ensemble estimate over a full `(t1, tau)` grid.
pub fn estimate_correlator_grid(
    schedule: &DriveSchedule,
    cfg: &McConfig,
    t1_grid: &[f64],
    tau_grid: &[f64],
) -> Result<PairEstimates> {
    let mut acc = PairAccumulator::new(cfg, t1_grid, tau_grid)?;
    let drift = Drift::Linear(schedule);
    for range in chunk_ranges(cfg.n_traj) {
        let mut chunk = acc.fresh();
        chunk.run(&drift, cfg, range)?;
        acc.merge(&chunk);
    }
    Ok(acc.finalize(cfg))
}

/// Mergeable accumulator for the integrated signal
/// `R = sum w(t_k) Re[e^{-i phi(t_k)} f(t_k)] dt`; estimates `<R^2>`.
#[derive(Clone)]
pub struct VarianceAccumulator {
    k_first: usize,
    /// `w(t_k) dt` and `e^{-i phi(t_k)}` per step in the support.
    weights: Vec<(f64, Complex64)>,
    /// Deterministic offset subtracted from every per-trajectory `R`
    /// (the integrated center signal in nonlinear runs).
    r_offset: f64,
    /// Power sums of R up to fourth order.
    s: [f64; 4],
    n: u64,
}

impl VarianceAccumulator {
    pub fn new(
        quad_schedule: &QuadratureSchedule,
        weight: &WeightFunction,
        cfg: &McConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if weight.start() < cfg.t_start || weight.end() > cfg.t_end {
            return Err(Error::InvalidArgument(
                "weight support must lie inside the simulated window".into(),
            ));
        }
        let k_first = cfg.index_of(weight.start())?;
        let k_end = cfg.index_of(weight.end())?;
        let mut weights = Vec::with_capacity(k_end - k_first + 1);
        for k in k_first..=k_end {
            let t = cfg.time_at(k);
            let w = weight.eval(t)?;
            let phase = Complex64::from_polar(1.0, -quad_schedule.phi(t)?);
            weights.push((w * cfg.dt, phase));
        }
        Ok(VarianceAccumulator { k_first, weights, r_offset: 0.0, s: [0.0; 4], n: 0 })
    }

    /// Step times of the support window, for computing a center offset.
    pub fn support_times(&self, cfg: &McConfig) -> Vec<f64> {
        (0..self.weights.len()).map(|i| cfg.time_at(self.k_first + i)).collect()
    }

    /// Subtracts the integrated deterministic signal
    /// `sum w(t_k) Re[e^{-i phi_k} sqrt(kappa_out) alpha_c(t_k)] dt` from
    /// every trajectory's `R`, given the center field at the support times.
    pub fn set_center_offset(&mut self, center: &[Complex64], sqrt_kappa_out: f64) -> Result<()> {
        if center.len() != self.weights.len() {
            return Err(Error::InvalidArgument("center offset length mismatch".into()));
        }
        self.r_offset = self
            .weights
            .iter()
            .zip(center)
            .map(|(&(wdt, phase), &ac)| wdt * (phase * ac * sqrt_kappa_out).re)
            .sum();
        Ok(())
    }

    pub fn run(&mut self, drift: &Drift<'_>, cfg: &McConfig, range: Range<u64>) -> Result<()> {
        let k_last = self.k_first + self.weights.len() - 1;
        for traj in range {
            let mut r = -self.r_offset;
            let k_first = self.k_first;
            let weights = &self.weights;
            walk(drift, cfg, traj, k_last, &mut |k, _t, _alpha, f| {
                if k >= k_first {
                    let (wdt, phase) = weights[k - k_first];
                    r += wdt * (phase * f).re;
                }
            })?;
            let r2 = r * r;
            self.s[0] += r;
            self.s[1] += r2;
            self.s[2] += r2 * r;
            self.s[3] += r2 * r2;
            self.n += 1;
        }
        Ok(())
    }

    pub fn fresh(&self) -> VarianceAccumulator {
        let mut out = self.clone();
        out.s = [0.0; 4];
        out.n = 0;
        out
    }

    pub fn merge(&mut self, other: &VarianceAccumulator) {
        for (a, b) in self.s.iter_mut().zip(&other.s) {
            *a += b;
        }
        self.n += other.n;
    }

    /// `<R^2>` with its standard error.
    pub fn finalize(&self) -> McEstimate {
        let nf = self.n as f64;
        let mean = self.s[1] / nf;
        let var = ((self.s[3] - self.s[1] * self.s[1] / nf) / (nf - 1.0)).max(0.0);
        McEstimate { mean, std_error: (var / nf).sqrt(), n: self.n }
    }

    /// Central variance `<R^2> - <R>^2`, robust against a residual mean in
    /// nonlinear runs (the center split is only approximate there).
    pub fn finalize_central(&self) -> McEstimate {
        let nf = self.n as f64;
        let m1 = self.s[0] / nf;
        let var = ((self.s[1] - self.s[0] * self.s[0] / nf) / (nf - 1.0)).max(0.0);
        // Standard error of the variance estimate from the central fourth
        // moment.
        let m2 = self.s[1] / nf;
        let m3 = self.s[2] / nf;
        let m4 = self.s[3] / nf;
        let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        let se = ((mu4 - var * var).max(0.0) / nf).sqrt();
        McEstimate { mean: var, std_error: se, n: self.n }
    }
}

/// Serial ensemble estimate of `<R^2>` for one weight function.
pub fn estimate_integrated_variance(
    schedule: &DriveSchedule,
    quad_schedule: &QuadratureSchedule,
    weight: &WeightFunction,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let mut acc = VarianceAccumulator::new(quad_schedule, weight, cfg)?;
    let drift = Drift::Linear(schedule);
    for range in chunk_ranges(cfg.n_traj) {
        let mut chunk = acc.fresh();
        chunk.run(&drift, cfg, range)?;
        acc.merge(&chunk);
    }
    Ok(acc.finalize())
}

/// Mergeable accumulator for the ensemble mean of `alpha` at fixed times;
/// used to check that fluctuations stay centered in nonlinear runs.
#[derive(Clone)]
pub struct MeanFieldAccumulator {
    idx: Vec<usize>,
    acc: Vec<ComplexAcc>,
    n: u64,
}

impl MeanFieldAccumulator {
    pub fn new(cfg: &McConfig, times: &[f64]) -> Result<Self> {
        cfg.validate()?;
        let mut idx: Vec<usize> = times.iter().map(|&t| cfg.index_of(t)).collect::<Result<_>>()?;
        idx.sort_unstable();
        idx.dedup();
        let acc = alloc::vec![ComplexAcc::default(); idx.len()];
        Ok(MeanFieldAccumulator { idx, acc, n: 0 })
    }

    pub fn times(&self, cfg: &McConfig) -> Vec<f64> {
        self.idx.iter().map(|&k| cfg.time_at(k)).collect()
    }

    pub fn run(&mut self, drift: &Drift<'_>, cfg: &McConfig, range: Range<u64>) -> Result<()> {
        let k_last = *self.idx.last().unwrap();
        for traj in range {
            let mut cursor = 0usize;
            let idx = &self.idx;
            let acc = &mut self.acc;
            walk(drift, cfg, traj, k_last, &mut |k, _t, alpha, _f| {
                if cursor < idx.len() && idx[cursor] == k {
                    acc[cursor].push(alpha);
                    cursor += 1;
                }
            })?;
            self.n += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &MeanFieldAccumulator) {
        for (a, b) in self.acc.iter_mut().zip(&other.acc) {
            a.merge(b);
        }
        self.n += other.n;
    }

    pub fn finalize(&self) -> Vec<McComplexEstimate> {
        self.acc.iter().map(|a| a.finalize(self.n)).collect()
    }
}
