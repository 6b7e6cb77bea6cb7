//! Command implementations: deterministic tables, Monte Carlo comparisons,
//! and integrated-variance reports.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sqz_core::correlators::{correlator_grid, correlator_pair, CorrelatorTable};
use sqz_core::decomposition::decompose;
use sqz_core::moments::{evolve_moments, initial_moments};
use sqz_core::montecarlo::{
    chunk_ranges, Drift, McConfig, PairAccumulator, PairEstimates,
};
use sqz_core::nonlinear::nonlinear_correlators;
use sqz_core::signal::integrated_variance;

use crate::config::{resolve, ResolvedRun, RunConfig};
use crate::output::{fmt_f64, provenance_header, Table};
use crate::CliError;

pub struct RunPaths {
    pub out_dir: PathBuf,
}

impl RunPaths {
    pub fn new(config: &RunConfig, override_dir: Option<&Path>) -> RunPaths {
        let dir = override_dir
            .map(Path::to_path_buf)
            .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        RunPaths { out_dir: dir }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn warn_unstable(run: &ResolvedRun) -> Result<(), CliError> {
    let mut probe = run.t1_grid.clone();
    probe.push(run.t0);
    let flags = run.schedule.check_stability(&probe)?;
    if flags.iter().any(|&(_, violated)| violated) {
        eprintln!(
            "warning: |eps(t)|^2 >= kappa^2 + 4 Omega(t)^2 at sampled instants; \
             results may diverge (advisory for time-dependent drives)"
        );
    }
    Ok(())
}

/// `correlators` command: full (t1, tau) table with the squeezing
/// decomposition per row.
pub fn run_correlators(config: &RunConfig, out_dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let run = resolve(config)?;
    warn_unstable(&run)?;

    let table: CorrelatorTable = match &run.nonlinear {
        Some((res, c0)) => {
            let out = nonlinear_correlators(
                res,
                &run.quad,
                c0,
                &run.t1_grid,
                &run.tau_grid,
                &run.init,
                run.t0,
                &run.integrator,
            )?;
            if out.validity_metric > 0.1 {
                eprintln!(
                    "warning: Gaussian-linearization gate {:.3} exceeds 0.1; \
                     fluctuation results may be inaccurate",
                    out.validity_metric
                );
            }
            out.table
        }
        None => correlator_grid(
            &run.schedule,
            &run.quad,
            &run.t1_grid,
            &run.tau_grid,
            &run.init,
            run.t0,
            &run.integrator,
        )?,
    };

    let mut csv = Table::new(
        provenance_header("correlators", config),
        &[
            "t1",
            "tau",
            "phi1",
            "phi2",
            "re_kff",
            "im_kff",
            "re_kffstar",
            "im_kffstar",
            "delta_weight",
            "k_quad_smooth",
            "A",
            "B",
            "phi",
            "psi",
            "degenerate_flag",
        ],
    );
    for cell in &table.cells {
        let params = decompose(&cell.pair);
        csv.row(&[
            fmt_f64(cell.t1),
            fmt_f64(cell.tau),
            fmt_f64(cell.phi1),
            fmt_f64(cell.phi2),
            fmt_f64(cell.pair.k_ff.re),
            fmt_f64(cell.pair.k_ff.im),
            fmt_f64(cell.pair.k_ffstar.re),
            fmt_f64(cell.pair.k_ffstar.im),
            fmt_f64(cell.pair.delta_weight),
            fmt_f64(cell.quad.smooth),
            fmt_f64(params.a),
            fmt_f64(params.b),
            fmt_f64(params.phi),
            fmt_f64(params.psi),
            (params.degenerate as u8).to_string(),
        ]);
    }

    let paths = RunPaths::new(config, out_dir);
    let path = paths.file("correlators.csv");
    write_file(&path, &csv.finish())?;
    Ok(path)
}

/// Parallel ensemble estimation with the canonical chunk reduction; the
/// result is bitwise independent of the worker count.
fn parallel_pair_estimates(
    schedule: &sqz_core::schedule::DriveSchedule,
    cfg: &McConfig,
    t1_grid: &[f64],
    tau_grid: &[f64],
) -> Result<PairEstimates, CliError> {
    let template = PairAccumulator::new(cfg, t1_grid, tau_grid)?;
    let ranges: Vec<_> = chunk_ranges(cfg.n_traj).collect();
    let chunks: Result<Vec<PairAccumulator>, sqz_core::Error> = ranges
        .into_par_iter()
        .map(|range| {
            let mut acc = template.fresh();
            acc.run(&Drift::Linear(schedule), cfg, range)?;
            Ok(acc)
        })
        .collect();
    let mut total = template.fresh();
    for chunk in chunks? {
        total.merge(&chunk);
    }
    Ok(total.finalize(cfg))
}

/// `montecarlo` command: trajectory-ensemble estimates with z-scores against
/// the deterministic engine. Returns the worst |z|; callers map
/// `max |z| > 5` to exit code 1.
pub fn run_montecarlo(config: &RunConfig, out_dir: Option<&Path>) -> Result<(PathBuf, f64), CliError> {
    let run = resolve(config)?;
    let mc = run
        .mc
        .as_ref()
        .ok_or_else(|| CliError::Config("montecarlo requires the [mc] section".into()))?;
    if run.nonlinear.is_some() {
        return Err(CliError::Config(
            "montecarlo drives the linear model; use scenario steady/phase_jump/custom".into(),
        ));
    }
    if (run.schedule.kappa_out() - run.schedule.kappa()).abs() > 0.0 {
        // The tapped-line model is simulated (extra loss noise stream), so
        // estimates remain comparable to the scaled engine values.
        eprintln!("note: kappa_out < kappa; simulating the additional loss port");
    }
    let mut cfg = McConfig::new(mc.dt, mc.n_traj, mc.seed, mc.t_start, mc.t_end);
    // Trajectories sample the configured initial state at t_start; the
    // deterministic reference anchors the same state at t0. The two agree
    // once both are relaxed (or exactly, when t_start == t0).
    cfg.init = run.init;
    if mc.t_start != run.t0 {
        eprintln!(
            "note: mc.t_start = {} differs from the moment anchor t0 = {}; \
             comparisons assume both precede relaxation",
            mc.t_start, run.t0
        );
    }
    let mut probe = run.t1_grid.clone();
    probe.push(mc.t_start);
    if cfg.step_warning(&run.schedule, &probe)? {
        eprintln!("warning: dt * kappa_+ exceeds 0.05; discretization bias may be visible");
    }

    // tau = 0 carries the singular bin and is excluded from the smooth
    // comparison; estimate it separately.
    let tau_smooth: Vec<f64> =
        run.tau_grid.iter().copied().filter(|&tau| tau > 0.0).collect();
    let est = parallel_pair_estimates(&run.schedule, &cfg, &run.t1_grid, &tau_smooth)?;
    let delta_est = parallel_pair_estimates(&run.schedule, &cfg, &run.t1_grid, &[0.0])?;

    // Engine reference at the snapped Monte Carlo times.
    let m0 = initial_moments(&run.init, run.t0)?;
    let moments = evolve_moments(&run.schedule, &m0, &est.t1, &run.integrator)?;

    let mut csv = Table::new(
        provenance_header("montecarlo", config),
        &[
            "t1",
            "tau",
            "re_kff_mc",
            "se_re_kff",
            "im_kff_mc",
            "se_im_kff",
            "re_kffstar_mc",
            "se_re_kffstar",
            "im_kffstar_mc",
            "se_im_kffstar",
            "re_kff_engine",
            "im_kff_engine",
            "re_kffstar_engine",
            "im_kffstar_engine",
            "z_max",
        ],
    );
    let mut worst_z = 0.0f64;
    let mut typical_se = Vec::new();
    let mut scale = 0.0f64;
    for (i, m) in moments.iter().enumerate() {
        let pairs = correlator_pair(&run.schedule, est.t1[i], &est.tau, m, &run.integrator)?;
        for (j, pair) in pairs.iter().enumerate() {
            let scaled = sqz_core::correlators::apply_scalings(pair, &run.schedule);
            let (ff, ffstar) = est.at(i, j);
            let z = ff.max_z(scaled.k_ff).max(ffstar.max_z(scaled.k_ffstar));
            worst_z = worst_z.max(z);
            typical_se.push(ff.std_error_re);
            scale = scale.max(scaled.k_ff.norm()).max(scaled.k_ffstar.norm());
            csv.row(&[
                fmt_f64(est.t1[i]),
                fmt_f64(est.tau[j]),
                fmt_f64(ff.mean.re),
                fmt_f64(ff.std_error_re),
                fmt_f64(ff.mean.im),
                fmt_f64(ff.std_error_im),
                fmt_f64(ffstar.mean.re),
                fmt_f64(ffstar.std_error_re),
                fmt_f64(ffstar.mean.im),
                fmt_f64(ffstar.std_error_im),
                fmt_f64(scaled.k_ff.re),
                fmt_f64(scaled.k_ff.im),
                fmt_f64(scaled.k_ffstar.re),
                fmt_f64(scaled.k_ffstar.im),
                fmt_f64(z),
            ]);
        }
    }

    typical_se.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_se = typical_se[typical_se.len() / 2];
    // Errors comparable to the signal itself make the z-comparison
    // uninformative; flag it.
    let low_power = median_se > 2.0 * scale.max(f64::MIN_POSITIVE);
    csv.comment(&format!("summary: max_abs_z = {}", fmt_f64(worst_z)));
    csv.comment(&format!(
        "summary: low_power = {} (median std error {} vs engine scale {})",
        low_power,
        fmt_f64(median_se),
        fmt_f64(scale)
    ));
    for (i, &t1) in delta_est.t1.iter().enumerate() {
        let (_, ffstar0) = delta_est.at(i, 0);
        csv.comment(&format!(
            "delta_estimate at t1 = {}: {} +- {} (expected n_bath + 1/2 = {})",
            fmt_f64(t1),
            fmt_f64(ffstar0.mean.re * cfg.dt),
            fmt_f64(ffstar0.std_error_re * cfg.dt),
            fmt_f64(run.schedule.n_bath() + 0.5),
        ));
    }

    let paths = RunPaths::new(config, out_dir);
    let path = paths.file("montecarlo.csv");
    write_file(&path, &csv.finish())?;
    Ok((path, worst_z))
}

/// `variance` command: deterministic `<R^2>` report.
pub fn run_variance(config: &RunConfig, out_dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let run = resolve(config)?;
    let (weight, resolution) = run
        .variance
        .as_ref()
        .ok_or_else(|| CliError::Config("variance requires the [variance] section".into()))?;
    if run.nonlinear.is_some() {
        return Err(CliError::Config(
            "variance drives the linear model; use scenario steady/phase_jump/custom".into(),
        ));
    }
    let report = integrated_variance(
        &run.schedule,
        &run.quad,
        weight,
        &run.init,
        run.t0,
        &run.integrator,
        resolution,
    )?;

    let mut text = provenance_header("variance", config);
    text.push_str(&format!("total,{}\n", fmt_f64(report.total)));
    text.push_str(&format!("smooth_part,{}\n", fmt_f64(report.smooth_part)));
    text.push_str(&format!("delta_part,{}\n", fmt_f64(report.delta_part)));
    text.push_str(&format!("quadrature_error,{}\n", fmt_f64(report.quadrature_error)));

    let paths = RunPaths::new(config, out_dir);
    let path = paths.file("variance.csv");
    write_file(&path, &text)?;
    Ok(path)
}
