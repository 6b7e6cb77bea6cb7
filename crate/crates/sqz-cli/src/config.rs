//! Run configuration: TOML schema and resolution into engine objects.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sqz_core::moments::{relaxation_time, InitialStateSpec};
use sqz_core::nonlinear::{CenterState, FrequencyPolynomial, NonlinearResonator};
use sqz_core::propagator::IntegratorConfig;
use sqz_core::schedule::{
    AmplifierMode, DriveSchedule, PumpSpec, QuadratureSchedule, TimeFunction,
};
use sqz_core::signal::{QuadratureResolution, WeightFunction};

use crate::CliError;

/// Scalar function of time, as written in config files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    Constant { value: f64 },
    /// Right-continuous steps: `initial` before `times[0]`, then `values[i]`
    /// from `times[i]` on.
    Steps { initial: f64, times: Vec<f64>, values: Vec<f64> },
    /// Piecewise-linear through `(t[i], v[i])`; clamped outside when `clamp`.
    Lerp {
        t: Vec<f64>,
        v: Vec<f64>,
        #[serde(default)]
        clamp: bool,
    },
}

impl FnSpec {
    pub fn constant(value: f64) -> Self {
        FnSpec::Constant { value }
    }

    pub fn build(&self) -> Result<TimeFunction, CliError> {
        match self {
            FnSpec::Constant { value } => Ok(TimeFunction::Constant(*value)),
            FnSpec::Steps { initial, times, values } => {
                if times.len() != values.len() {
                    return Err(CliError::Config(
                        "steps: `times` and `values` must have equal length".into(),
                    ));
                }
                Ok(TimeFunction::Steps {
                    initial: *initial,
                    steps: times.iter().copied().zip(values.iter().copied()).collect(),
                })
            }
            FnSpec::Lerp { t, v, clamp } => {
                if t.len() != v.len() {
                    return Err(CliError::Config(
                        "lerp: `t` and `v` must have equal length".into(),
                    ));
                }
                Ok(TimeFunction::Lerp {
                    knots: t.iter().copied().zip(v.iter().copied()).collect(),
                    clamp: *clamp,
                })
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kappa: f64,
    /// Defaults to `kappa` (all decay through the measured line).
    pub kappa_out: Option<f64>,
    #[serde(default)]
    pub n_bath: f64,
    #[serde(default = "default_amplifier")]
    pub amplifier: AmplifierSpec,
    pub detuning: FnSpec,
    pub pump_magnitude: FnSpec,
    pub pump_phase: FnSpec,
}

fn default_amplifier() -> AmplifierSpec {
    AmplifierSpec::PhaseSensitive
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AmplifierSpec {
    PhaseSensitive,
    PhasePreserving,
}

impl From<AmplifierSpec> for AmplifierMode {
    fn from(a: AmplifierSpec) -> Self {
        match a {
            AmplifierSpec::PhaseSensitive => AmplifierMode::PhaseSensitive,
            AmplifierSpec::PhasePreserving => AmplifierMode::PhasePreserving,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    #[default]
    Vacuum,
    Thermal { n: f64 },
    SqueezedVacuum { r: f64, angle: f64 },
    Custom { m_aa_re: f64, m_aa_im: f64, m_abs: f64 },
}

impl InitialSpec {
    fn build(&self) -> InitialStateSpec {
        match *self {
            InitialSpec::Vacuum => InitialStateSpec::Vacuum,
            InitialSpec::Thermal { n } => InitialStateSpec::Thermal { n },
            InitialSpec::SqueezedVacuum { r, angle } => InitialStateSpec::SqueezedVacuum { r, angle },
            InitialSpec::Custom { m_aa_re, m_aa_im, m_abs } => InitialStateSpec::Custom {
                m_aa: Complex64::new(m_aa_re, m_aa_im),
                m_abs,
            },
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    #[serde(default, flatten)]
    pub state: Option<InitialSpec>,
    /// Anchor time of the initial state. Defaults to an automatic
    /// relaxation interval before the first `t1` (so the window starts in
    /// the schedule's asymptotic state).
    pub t0: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// Constant drive, automatically relaxed before the output window.
    Steady,
    /// Abrupt pump-phase jump at t = 0; overrides the schedule's pump and
    /// detuning.
    PhaseJump { pump_magnitude: f64, theta_after: f64 },
    /// Schedule taken verbatim; `initial_state.t0` is required.
    Custom,
    /// Weakly nonlinear resonator; requires the `[nonlinear]` section.
    Nonlinear,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t1: Vec<f64>,
    pub tau_max: f64,
    pub tau_step: f64,
    pub phi: FnSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec { rel_tol: 1e-10, abs_tol: 1e-12, max_step: None }
    }
}

impl IntegratorSpec {
    fn build(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub dt: f64,
    pub n_traj: u64,
    pub seed: u64,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSpec {
    pub weight: FnSpec,
    pub w_start: f64,
    pub w_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_panels")]
    pub initial_panels: usize,
    #[serde(default = "default_refinements")]
    pub max_refinements: usize,
}

fn default_tol() -> f64 {
    1e-7
}

fn default_panels() -> usize {
    64
}

fn default_refinements() -> usize {
    6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpec {
    /// `omega_r(n) = sum_k coeffs[k] n^k`.
    pub omega_r_coeffs: Vec<f64>,
    pub omega_rf: f64,
    pub drive_re: FnSpec,
    pub drive_im: FnSpec,
    /// Initial classical center `(Re, Im)`.
    pub alpha_c0: [f64; 2],
    /// Start time of the center trajectory; defaults to the moment anchor.
    pub center_t0: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
}

/// Full run configuration, one TOML file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub initial_state: InitialStateSection,
    pub scenario: ScenarioSpec,
    pub grids: GridSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub mc: Option<McSpec>,
    pub variance: Option<VarianceSpec>,
    pub nonlinear: Option<NonlinearSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

/// Everything the runners need, resolved and validated.
pub struct ResolvedRun {
    pub schedule: DriveSchedule,
    pub quad: QuadratureSchedule,
    pub t1_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub init: InitialStateSpec,
    pub t0: f64,
    pub integrator: IntegratorConfig,
    pub nonlinear: Option<(NonlinearResonator, CenterState)>,
    pub mc: Option<McSpec>,
    pub variance: Option<(WeightFunction, QuadratureResolution)>,
}

pub fn resolve(config: &RunConfig) -> Result<ResolvedRun, CliError> {
    let base_schedule = build_schedule(&config.schedule)?;
    let schedule = match &config.scenario {
        ScenarioSpec::PhaseJump { pump_magnitude, theta_after } => {
            DriveSchedule::phase_jump(*pump_magnitude, *theta_after, config.schedule.kappa)
                .map_err(|e| CliError::Config(e.to_string()))?
                .with_kappa_out(config.schedule.kappa_out.unwrap_or(config.schedule.kappa))
                .map_err(|e| CliError::Config(e.to_string()))?
                .with_n_bath(config.schedule.n_bath)
                .map_err(|e| CliError::Config(e.to_string()))?
                .with_amplifier(config.schedule.amplifier.into())
        }
        _ => base_schedule,
    };

    let t1_grid = config.grids.t1.clone();
    if t1_grid.is_empty() || t1_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("grids.t1 must be nonempty and strictly ascending".into()));
    }
    if !(config.grids.tau_step > 0.0) || !(config.grids.tau_max >= config.grids.tau_step) {
        return Err(CliError::Config("grids.tau_step and tau_max must be positive".into()));
    }
    let n_tau = (config.grids.tau_max / config.grids.tau_step).round() as usize;
    let tau_grid: Vec<f64> = (0..=n_tau).map(|i| config.grids.tau_step * i as f64).collect();

    let init = config.initial_state.state.clone().unwrap_or_default().build();

    let t0 = match (&config.scenario, config.initial_state.t0) {
        (_, Some(t0)) => t0,
        (ScenarioSpec::Custom, None) => {
            return Err(CliError::Config(
                "scenario `custom` requires initial_state.t0".into(),
            ));
        }
        _ => {
            // Relax long enough that the asymptotic state is reached to
            // below the closed-form comparison tolerances.
            let mut probe = vec![-1.0, 0.0];
            probe.extend(&t1_grid);
            let relax = relaxation_time(&schedule, &probe)
                .map_err(|e| CliError::Config(format!("cannot auto-relax: {e}")))?;
            t1_grid[0] - 1.25 * relax
        }
    };
    if t0 > t1_grid[0] {
        return Err(CliError::Config("initial_state.t0 must precede the first t1".into()));
    }

    let nonlinear = match &config.scenario {
        ScenarioSpec::Nonlinear => {
            let spec = config.nonlinear.as_ref().ok_or_else(|| {
                CliError::Config("scenario `nonlinear` requires the [nonlinear] section".into())
            })?;
            let res = NonlinearResonator {
                omega_r: FrequencyPolynomial::new(spec.omega_r_coeffs.clone())
                    .map_err(|e| CliError::Config(e.to_string()))?,
                omega_rf: spec.omega_rf,
                drive_re: spec.drive_re.build()?,
                drive_im: spec.drive_im.build()?,
                base: schedule.clone(),
            };
            let c0 = CenterState {
                alpha_c: Complex64::new(spec.alpha_c0[0], spec.alpha_c0[1]),
                t: spec.center_t0.unwrap_or(t0).min(t0),
            };
            Some((res, c0))
        }
        _ => None,
    };

    let variance = match &config.variance {
        Some(v) => {
            let weight = WeightFunction::new(v.weight.build()?, v.w_start, v.w_end)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let res = QuadratureResolution {
                initial_panels: v.initial_panels,
                tol: v.tol,
                max_refinements: v.max_refinements,
            };
            Some((weight, res))
        }
        None => None,
    };

    Ok(ResolvedRun {
        schedule,
        quad: QuadratureSchedule::new(config.grids.phi.build()?)
            .map_err(|e| CliError::Config(e.to_string()))?,
        t1_grid,
        tau_grid,
        init,
        t0,
        integrator: config.integrator.build(),
        nonlinear,
        mc: config.mc.clone(),
        variance,
    })
}

fn build_schedule(spec: &ScheduleSpec) -> Result<DriveSchedule, CliError> {
    DriveSchedule::new(
        spec.detuning.build()?,
        PumpSpec::Polar {
            magnitude: spec.pump_magnitude.build()?,
            phase: spec.pump_phase.build()?,
        },
        spec.kappa,
        spec.kappa_out.unwrap_or(spec.kappa),
        spec.n_bath,
        spec.amplifier.into(),
    )
    .map_err(|e| CliError::Config(e.to_string()))
}
