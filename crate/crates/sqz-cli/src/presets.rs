//! Built-in run configurations.

use crate::config::{
    FnSpec, GridSpec, InitialStateSection, IntegratorSpec, McSpec, NonlinearSpec, OutputSpec,
    RunConfig, ScenarioSpec, ScheduleSpec, VarianceSpec,
};
use crate::CliError;

pub const PRESET_NAMES: [&str; 4] = ["vacuum", "steady", "fig2", "nonlinear-kerr"];

const HALF_PI: f64 = core::f64::consts::FRAC_PI_2;

fn base_schedule(pump: f64) -> ScheduleSpec {
    ScheduleSpec {
        kappa: 1.0,
        kappa_out: None,
        n_bath: 0.0,
        amplifier: crate::config::AmplifierSpec::PhaseSensitive,
        detuning: FnSpec::constant(0.0),
        pump_magnitude: FnSpec::constant(pump),
        pump_phase: FnSpec::constant(0.0),
    }
}

fn grids(t1: Vec<f64>) -> GridSpec {
    GridSpec { t1, tau_max: 6.0, tau_step: 0.05, phi: FnSpec::constant(0.0) }
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let config = match name {
        // Undriven resonator: all smooth correlators vanish; only the
        // equal-time singularity survives.
        "vacuum" => RunConfig {
            schedule: base_schedule(0.0),
            initial_state: InitialStateSection::default(),
            scenario: ScenarioSpec::Steady,
            grids: grids(vec![0.0]),
            integrator: IntegratorSpec::default(),
            mc: Some(McSpec { dt: 0.01, n_traj: 20_000, seed: 7, t_start: -10.0, t_end: 8.0 }),
            variance: Some(VarianceSpec {
                weight: FnSpec::constant(1.0),
                w_start: 0.0,
                w_end: 10.0,
                tol: 1e-9,
                initial_panels: 16,
                max_refinements: 4,
            }),
            nonlinear: None,
            output: OutputSpec::default(),
        },
        // Relaxed constant drive at |eps|/kappa = 0.5.
        "steady" => RunConfig {
            schedule: base_schedule(0.5),
            initial_state: InitialStateSection::default(),
            scenario: ScenarioSpec::Steady,
            grids: grids(vec![0.0]),
            integrator: IntegratorSpec::default(),
            mc: Some(McSpec {
                dt: 0.01 / 1.5,
                n_traj: 100_000,
                seed: 42,
                t_start: -20.0,
                t_end: 8.0,
            }),
            variance: Some(VarianceSpec {
                weight: FnSpec::constant(1.0),
                w_start: 0.0,
                w_end: 50.0,
                tol: 1e-6,
                initial_panels: 128,
                max_refinements: 5,
            }),
            nonlinear: None,
            output: OutputSpec::default(),
        },
        // Abrupt pump-phase jump by pi/2 at t = 0; the transient needs all
        // four squeezing parameters.
        "fig2" => RunConfig {
            schedule: base_schedule(0.5),
            initial_state: InitialStateSection::default(),
            scenario: ScenarioSpec::PhaseJump { pump_magnitude: 0.5, theta_after: HALF_PI },
            grids: grids(vec![0.25, 1.0, 2.0, 30.0]),
            integrator: IntegratorSpec::default(),
            mc: Some(McSpec {
                dt: 0.01 / 1.5,
                n_traj: 100_000,
                seed: 42,
                t_start: -20.0,
                t_end: 9.0,
            }),
            variance: Some(VarianceSpec {
                weight: FnSpec::constant(1.0),
                w_start: 0.0,
                w_end: 5.0,
                tol: 1e-7,
                initial_panels: 64,
                max_refinements: 6,
            }),
            nonlinear: None,
            output: OutputSpec::default(),
        },
        // Coherently driven weak Kerr resonator: squeezing is self-generated
        // without a parametric pump.
        "nonlinear-kerr" => RunConfig {
            schedule: base_schedule(0.0),
            initial_state: InitialStateSection { state: None, t0: Some(-30.0) },
            scenario: ScenarioSpec::Nonlinear,
            grids: GridSpec {
                t1: vec![0.0, 5.0],
                tau_max: 4.0,
                tau_step: 0.05,
                phi: FnSpec::constant(0.0),
            },
            integrator: IntegratorSpec::default(),
            mc: None,
            variance: None,
            nonlinear: Some(NonlinearSpec {
                omega_r_coeffs: vec![0.0, 0.02],
                omega_rf: 0.0,
                drive_re: FnSpec::constant(0.5),
                drive_im: FnSpec::constant(0.0),
                alpha_c0: [0.0, 0.0],
                center_t0: Some(-30.0),
            }),
            output: OutputSpec::default(),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset `{other}`; available: {}",
                PRESET_NAMES.join(", ")
            )));
        }
    };
    Ok(config)
}
