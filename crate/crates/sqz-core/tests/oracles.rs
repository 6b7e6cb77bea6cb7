//! Cross-module oracle checks: the ODE engine against independent
//! closed-form and quadrature routes.

mod common;

use num_complex::Complex64;
use sqz_core::analytic::{phase_jump, steady_general, SteadyParams};
use sqz_core::correlators::correlator_pair;
use sqz_core::decomposition::decompose;
use sqz_core::moments::{evolve_moment_matrix, evolve_moments, initial_moments, InitialStateSpec};
use sqz_core::propagator::IntegratorConfig;
use sqz_core::schedule::DriveSchedule;

const CFG: IntegratorConfig =
    IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Moments relaxed to the steady state of a constant schedule.
fn relaxed_moments(schedule: &DriveSchedule, t1: f64) -> sqz_core::moments::MomentState {
    let t0 = t1 - 120.0;
    let m0 = initial_moments(&InitialStateSpec::Vacuum, t0).unwrap();
    evolve_moments(schedule, &m0, &[t1], &CFG).unwrap()[0]
}

#[test]
fn lyapunov_moments_match_integral_form_constant_drive() {
    let schedule = DriveSchedule::constant(0.2, c(0.4, 0.3), 1.0).unwrap();
    let m0 = initial_moments(&InitialStateSpec::Thermal { n: 0.7 }, 0.0).unwrap();
    let s0 = {
        let grid = [0.0];
        evolve_moment_matrix(&schedule, matrix_of(&m0), 0.0, &grid, &CFG).unwrap()[0]
    };
    for &t1 in &[0.3, 1.0, 2.5, 6.0] {
        let ode = evolve_moment_matrix(&schedule, s0, 0.0, &[t1], &CFG).unwrap()[0];
        let oracle = common::moment_matrix_integral_oracle(&schedule, s0, 0.0, t1);
        assert!(ode.max_abs_diff(&oracle) < 1e-8, "t1 = {t1}: {:?}", ode.max_abs_diff(&oracle));
    }
}

#[test]
fn lyapunov_moments_match_integral_form_phase_jump() {
    let schedule = DriveSchedule::phase_jump(0.5, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
    let m0 = initial_moments(&InitialStateSpec::Vacuum, -2.0).unwrap();
    let s0 = matrix_of(&m0);
    for &t1 in &[-0.5, 0.25, 1.0, 3.0] {
        let ode = evolve_moment_matrix(&schedule, s0, -2.0, &[t1], &CFG).unwrap()[0];
        let oracle = common::moment_matrix_integral_oracle(&schedule, s0, -2.0, t1);
        assert!(ode.max_abs_diff(&oracle) < 1e-8, "t1 = {t1}");
    }
}

#[test]
fn lyapunov_moments_match_integral_form_randomized() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x0c17);
    for case in 0..8 {
        let kappa: f64 = rng.random_range(0.5..2.0);
        let omega: f64 = kappa * rng.random_range(-1.0..1.0);
        let mag: f64 = kappa * rng.random_range(0.0..0.9);
        let theta0: f64 = rng.random_range(-3.0..3.0);
        let schedule = if case % 2 == 0 {
            DriveSchedule::constant(omega, Complex64::from_polar(mag, theta0), kappa).unwrap()
        } else {
            // Pump-phase jump at t = 0 on top of the random magnitude.
            DriveSchedule::new(
                sqz_core::schedule::TimeFunction::Constant(omega),
                sqz_core::schedule::PumpSpec::Polar {
                    magnitude: sqz_core::schedule::TimeFunction::Constant(mag),
                    phase: sqz_core::schedule::TimeFunction::Steps {
                        initial: theta0,
                        steps: vec![(0.0, rng.random_range(-3.0..3.0))],
                    },
                },
                kappa,
                kappa,
                0.0,
                sqz_core::schedule::AmplifierMode::PhaseSensitive,
            )
            .unwrap()
        };
        let m0 = initial_moments(&InitialStateSpec::Thermal { n: rng.random_range(0.0..1.5) }, -1.5)
            .unwrap();
        let s0 = matrix_of(&m0);
        let t1 = rng.random_range(0.5..4.0);
        let ode = evolve_moment_matrix(&schedule, s0, -1.5, &[t1], &CFG).unwrap()[0];
        let oracle = common::moment_matrix_integral_oracle(&schedule, s0, -1.5, t1);
        assert!(ode.max_abs_diff(&oracle) < 1e-8, "case {case}: t1 = {t1}");
    }
}

fn matrix_of(m: &sqz_core::moments::MomentState) -> sqz_core::mat2::Mat2 {
    sqz_core::mat2::Mat2::new(
        c(m.m_abs, 0.0),
        m.m_aa,
        m.m_aa.conj(),
        c(m.m_abs, 0.0),
    )
}

#[test]
fn engine_matches_steady_closed_form_overdamped_and_underdamped() {
    let cases = [
        (0.0, c(0.5, 0.0), 1.0),              // overdamped, Fig. 2 parameters
        (0.1, c(0.4, 0.2), 1.3),              // overdamped, complex pump
        (1.0, c(0.5, 0.0), 1.0),              // underdamped
        (0.25, c(0.5, 0.0), 1.0),             // exactly degenerate |eps| = 2 Omega
    ];
    for (omega, eps, kappa) in cases {
        let schedule = DriveSchedule::constant(omega, eps, kappa).unwrap();
        let p = SteadyParams::new(kappa, eps, omega).unwrap();
        let t1 = 0.0;
        let m = relaxed_moments(&schedule, t1);
        let taus: Vec<f64> = (0..=60).map(|i| 0.1 * i as f64).collect();
        let pairs = correlator_pair(&schedule, t1, &taus, &m, &CFG).unwrap();
        for (pair, &tau) in pairs.iter().zip(&taus) {
            let reference = steady_general(&p, tau);
            assert!(
                (pair.k_ff - reference.k_ff).norm() < 1e-8,
                "omega={omega}, tau={tau}: {} vs {}",
                pair.k_ff,
                reference.k_ff
            );
            assert!((pair.k_ffstar - reference.k_ffstar).norm() < 1e-8);
        }
    }
}

#[test]
fn engine_matches_phase_jump_closed_form() {
    let theta = std::f64::consts::FRAC_PI_2;
    let schedule = DriveSchedule::phase_jump(0.5, theta, 1.0).unwrap();
    let m0 = initial_moments(&InitialStateSpec::Vacuum, -120.0).unwrap();
    for &t1 in &[0.25, 1.0, 2.0] {
        let m = evolve_moments(&schedule, &m0, &[t1], &CFG).unwrap()[0];
        let taus: Vec<f64> = (0..=60).map(|i| 0.1 * i as f64).collect();
        let pairs = correlator_pair(&schedule, t1, &taus, &m, &CFG).unwrap();
        for (pair, &tau) in pairs.iter().zip(&taus) {
            let reference = phase_jump(1.0, 0.5, theta, t1, tau).unwrap();
            assert!(
                (pair.k_ff - reference.k_ff).norm() < 1e-8,
                "t1={t1}, tau={tau}"
            );
            assert!((pair.k_ffstar - reference.k_ffstar).norm() < 1e-8);
        }
    }
}

#[test]
fn phase_jump_zero_lag_equals_propagated_moments() {
    // Closed form at tau -> 0+ must equal kappa (<alpha^2>, <|alpha|^2> - 1/2)
    // with the moments evolved through the jump.
    let theta = std::f64::consts::FRAC_PI_2;
    let schedule = DriveSchedule::phase_jump(0.5, theta, 1.0).unwrap();
    let m0 = initial_moments(&InitialStateSpec::Vacuum, -120.0).unwrap();
    for &t1 in &[0.0, 0.25, 1.0, 4.0] {
        let m = evolve_moments(&schedule, &m0, &[t1], &CFG).unwrap()[0];
        let reference = phase_jump(1.0, 0.5, theta, t1, 0.0).unwrap();
        assert!((reference.k_ff - m.m_aa).norm() < 1e-8, "t1={t1}");
        assert!((reference.k_ffstar - c(m.m_abs - 0.5, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn transient_angles_split_by_the_predicted_amount() {
    // Frozen from the closed forms: at kappa t1 = 0.25, tau = 1/kappa the
    // angle split is phi - psi = -0.39690, and the split grows to 0.86803
    // across tau in [0, 6].
    let theta = std::f64::consts::FRAC_PI_2;
    let at = |t1: f64, tau: f64| {
        let pair = phase_jump(1.0, 0.5, theta, t1, tau).unwrap();
        let p = decompose(&pair);
        p.phi - p.psi
    };
    let split = at(0.25, 1.0);
    assert!((split - (-0.396_897_962_889_738_2)).abs() < 1e-12, "split = {split}");

    let mut max_split = 0.0f64;
    for i in 0..=600 {
        max_split = max_split.max(at(0.25, 0.01 * i as f64).abs());
    }
    assert!((max_split - 0.868_026_691_624).abs() < 1e-9, "max = {max_split}");
    assert!(max_split > 0.1);

    // Steady state: angles coincide.
    let split_steady = at(40.0, 1.0);
    assert!(split_steady.abs() < 1e-12);
}
