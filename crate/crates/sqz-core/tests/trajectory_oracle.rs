//! Trajectory-ensemble cross-checks beyond the acceptance presets: window
//! variances, output-coupling and thermal scaling physics, and the weakly
//! nonlinear pipeline.
//!
//! The nonlinear checks integrate the *full* classical drift (no
//! linearization anywhere on the stochastic side), subtract the
//! deterministic center, and must reproduce the fluctuation correlators
//! predicted by the effective linear schedule for weak Kerr nonlinearity.

use num_complex::Complex64;
use sqz_core::correlators::correlator_pair;
use sqz_core::moments::{evolve_moments, initial_moments, InitialStateSpec};
use sqz_core::montecarlo::{
    Drift, McConfig, MeanFieldAccumulator, PairAccumulator, VarianceAccumulator,
};
use sqz_core::nonlinear::{
    effective_schedule, evolve_center, CenterState, FrequencyPolynomial, NonlinearResonator,
};
use sqz_core::propagator::IntegratorConfig;
use sqz_core::schedule::{DriveSchedule, QuadratureSchedule, TimeFunction};
use sqz_core::signal::{integrated_variance, QuadratureResolution, WeightFunction};

const CFG: IntegratorConfig =
    IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn weak_kerr() -> NonlinearResonator {
    NonlinearResonator {
        omega_r: FrequencyPolynomial::kerr(0.0, 0.02),
        omega_rf: 0.0,
        drive_re: TimeFunction::Constant(0.5),
        drive_im: TimeFunction::Constant(0.0),
        base: DriveSchedule::constant(0.0, c(0.0, 0.0), 1.0).unwrap(),
    }
}

fn run_chunks<F: FnMut(u64, u64)>(n: u64, mut f: F) {
    let chunk = 1024;
    let mut a = 0;
    while a < n {
        let b = (a + chunk).min(n);
        f(a, b);
        a = b;
    }
}

#[test]
fn fluctuations_stay_centered_for_weak_nonlinearity() {
    // The center split neglects the fluctuation back-action on the mean, an
    // O(chi (m_abs - 1/2)) effect, so the consistency check needs a chi weak
    // enough for that bias to sit inside the ensemble statistics.
    let res = NonlinearResonator {
        omega_r: FrequencyPolynomial::kerr(0.0, 0.005),
        omega_rf: 0.0,
        drive_re: TimeFunction::Constant(0.5),
        drive_im: TimeFunction::Constant(0.0),
        base: DriveSchedule::constant(0.0, c(0.0, 0.0), 1.0).unwrap(),
    };
    let cfg = McConfig::new(0.01, 20_000, 77, -30.0, 10.0);
    let drift = Drift::Nonlinear(&res);
    let mut acc = MeanFieldAccumulator::new(&cfg, &[0.0, 5.0, 10.0]).unwrap();
    run_chunks(cfg.n_traj, |a, b| acc.run(&drift, &cfg, a..b).unwrap());
    let times = acc.times(&cfg);
    let centers = evolve_center(
        &res,
        &CenterState { alpha_c: c(0.0, 0.0), t: -30.0 },
        &times,
        &CFG,
    )
    .unwrap();
    for (est, center) in acc.finalize().iter().zip(&centers) {
        let z = est.max_z(center.alpha_c);
        assert!(z < 4.5, "<delta alpha> off by {z:.2} sigma at t = {}", center.t);
    }
}

#[test]
fn nonlinear_trajectories_match_linearized_correlators() {
    let res = weak_kerr();
    let dt = 0.01;
    let cfg = McConfig::new(dt, 30_000, 78, -30.0, 3.0);
    let t1 = 0.0;
    let taus: Vec<f64> = (1..=6).map(|k| k as f64 * 50.0 * dt).collect();

    // The linearization gate should flag this drive as comfortably weak.
    let gate_run = sqz_core::nonlinear::nonlinear_correlators(
        &res,
        &QuadratureSchedule::constant(0.0),
        &CenterState { alpha_c: c(0.0, 0.0), t: -30.0 },
        &[f64::max(t1, 0.5)],
        &[0.5],
        &InitialStateSpec::Vacuum,
        -30.0,
        &CFG,
    )
    .unwrap();
    assert!(gate_run.validity_metric > 0.0 && gate_run.validity_metric < 0.1);

    let mut acc = PairAccumulator::new(&cfg, &[t1], &taus).unwrap();
    // Subtract sqrt(kappa_out) alpha_c at the sample times.
    let sample_times = acc.sample_times(&cfg);
    let centers = evolve_center(
        &res,
        &CenterState { alpha_c: c(0.0, 0.0), t: -30.0 },
        &sample_times,
        &CFG,
    )
    .unwrap();
    let sqrt_kout = res.base.kappa_out().sqrt();
    acc.set_subtraction(centers.iter().map(|s| s.alpha_c * sqrt_kout).collect())
        .unwrap();
    let drift = Drift::Nonlinear(&res);
    run_chunks(cfg.n_traj, |a, b| acc.run(&drift, &cfg, a..b).unwrap());
    let est = acc.finalize(&cfg);

    // Engine prediction from the effective linear schedule.
    let (schedule, _) = effective_schedule(
        &res,
        &CenterState { alpha_c: c(0.0, 0.0), t: -30.0 },
        4.0,
        &CFG,
    )
    .unwrap();
    let m0 = initial_moments(&InitialStateSpec::Vacuum, -30.0).unwrap();
    let m = evolve_moments(&schedule, &m0, &[est.t1[0]], &CFG).unwrap()[0];
    let pairs = correlator_pair(&schedule, est.t1[0], &est.tau, &m, &CFG).unwrap();
    for (j, pair) in pairs.iter().enumerate() {
        let (ff, ffstar) = est.at(0, j);
        assert!(ff.max_z(pair.k_ff) < 4.5, "K_ff at tau index {j}");
        assert!(ffstar.max_z(pair.k_ffstar) < 4.5, "K_ff* at tau index {j}");
    }
}

#[test]
fn linear_steady_window_variance_matches_engine() {
    // Squeezed-quadrature window variance of the plain parametric drive:
    // trajectories vs the deterministic double integral. The engine value
    // carries the finite-window boundary term, so this is the honest
    // comparison target (the T -> infinity rate is (1/4)(k-/k+)^2).
    let schedule = DriveSchedule::constant(0.0, c(0.5, 0.0), 1.0).unwrap();
    let quad = QuadratureSchedule::constant(0.0);
    let w = WeightFunction::constant(1.0, 0.0, 30.0).unwrap();
    let cfg = McConfig::new(0.01 / 1.5, 10_000, 91, -15.0, 30.0);
    let mut acc = VarianceAccumulator::new(&quad, &w, &cfg).unwrap();
    let drift = Drift::Linear(&schedule);
    run_chunks(cfg.n_traj, |a, b| acc.run(&drift, &cfg, a..b).unwrap());
    let mc = acc.finalize();

    let engine = integrated_variance(
        &schedule,
        &quad,
        &w,
        &InitialStateSpec::Vacuum,
        -15.0,
        &CFG,
        &QuadratureResolution { initial_panels: 64, tol: 1e-6, max_refinements: 6 },
    )
    .unwrap();
    let z = (mc.mean - engine.total).abs() / mc.std_error;
    assert!(z < 4.5, "window variance z = {z:.2}: mc {} vs engine {}", mc.mean, engine.total);
    // Strongly below the vacuum level: squeezing is resolved.
    assert!((30.0 / 4.0 - mc.mean) / mc.std_error > 10.0);
}

#[test]
fn tapped_line_and_thermal_bath_match_scaled_engine() {
    // kappa_out < kappa adds an internal loss port (extra noise stream) and
    // scales smooth correlators by kappa_out/kappa; a thermal bath scales
    // them by (1 + 2 n_bath) and lifts the singular weight. The window
    // variance separates both effects from the vacuum value by many sigma,
    // so this pins the scaling rules against the simulated physics.
    let schedule = DriveSchedule::constant(0.0, c(0.4, 0.0), 1.0)
        .unwrap()
        .with_kappa_out(0.6)
        .unwrap()
        .with_n_bath(0.5)
        .unwrap();
    let quad = QuadratureSchedule::constant(0.0);
    let w = WeightFunction::constant(1.0, 0.0, 20.0).unwrap();
    let cfg = McConfig::new(0.01 / 1.4, 8_000, 101, -15.0, 20.0);
    let mut acc = VarianceAccumulator::new(&quad, &w, &cfg).unwrap();
    let drift = Drift::Linear(&schedule);
    run_chunks(cfg.n_traj, |a, b| acc.run(&drift, &cfg, a..b).unwrap());
    let mc = acc.finalize();

    let engine = integrated_variance(
        &schedule,
        &quad,
        &w,
        &InitialStateSpec::Vacuum,
        -15.0,
        &CFG,
        &QuadratureResolution { initial_panels: 64, tol: 1e-6, max_refinements: 6 },
    )
    .unwrap();
    let z = (mc.mean - engine.total).abs() / mc.std_error;
    assert!(z < 4.5, "scaled engine vs MC: z = {z:.2} ({} vs {})", mc.mean, engine.total);

    // Mis-scaling either factor would miss by far more than the errors.
    let wrong_kout = engine.delta_part + engine.smooth_part / 0.6;
    assert!((mc.mean - wrong_kout).abs() / mc.std_error > 10.0);
    let wrong_thermal = engine.delta_part + engine.smooth_part / 2.0;
    assert!((mc.mean - wrong_thermal).abs() / mc.std_error > 10.0);
}

#[test]
fn self_generated_squeezing_shows_in_integrated_variance() {
    // Coherently driven Kerr resonator, no parametric pump: the measured
    // window variance must (a) agree with the linearized engine within
    // statistics and (b) differ from the vacuum value by many sigma at the
    // squeezed quadrature angle.
    let res = weak_kerr();
    let dt = 0.01;
    let window = 30.0;
    let cfg = McConfig::new(dt, 20_000, 79, -30.0, window);

    let c0 = CenterState { alpha_c: c(0.0, 0.0), t: -30.0 };
    let (schedule, _) = effective_schedule(&res, &c0, window + 1.0, &CFG).unwrap();
    // Squeezed quadrature angle from the steady effective pump.
    let theta = schedule.sample(0.0).unwrap().pump.arg();
    let quad = QuadratureSchedule::constant(theta / 2.0);
    let w = WeightFunction::constant(1.0, 0.0, window).unwrap();

    let mut acc = VarianceAccumulator::new(&quad, &w, &cfg).unwrap();
    let support = acc.support_times(&cfg);
    let centers = evolve_center(&res, &c0, &support, &CFG).unwrap();
    acc.set_center_offset(
        &centers.iter().map(|s| s.alpha_c).collect::<Vec<_>>(),
        res.base.kappa_out().sqrt(),
    )
    .unwrap();
    let drift = Drift::Nonlinear(&res);
    run_chunks(cfg.n_traj, |a, b| acc.run(&drift, &cfg, a..b).unwrap());
    // Central variance: the residual mean left by the approximate center
    // split must not contaminate the fluctuation statistics.
    let mc = acc.finalize_central();

    let engine = integrated_variance(
        &schedule,
        &quad,
        &w,
        &InitialStateSpec::Vacuum,
        -30.0,
        &CFG,
        &QuadratureResolution { initial_panels: 64, tol: 1e-6, max_refinements: 6 },
    )
    .unwrap();

    let z_engine = (mc.mean - engine.total).abs() / mc.std_error;
    assert!(z_engine < 4.5, "engine vs nonlinear MC: z = {z_engine:.2}");

    let z_vacuum = (mc.mean - window / 4.0).abs() / mc.std_error;
    assert!(
        z_vacuum > 10.0,
        "self-generated squeezing not resolved: z = {z_vacuum:.2}"
    );
    // And it is squeezing, not antisqueezing.
    assert!(mc.mean < window / 4.0);
}
