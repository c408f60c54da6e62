//! The four subcommands: simulate, verify, sweep, meanfield.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use hkdelay::analysis;
use hkdelay::meanfield::{self, MeanFieldExperiment, SourceDensity};
use hkdelay::{Simulation, Trajectory, WeightScheme};

use crate::config::{InfluenceSection, MeanFieldSourceKind, RunConfig};
use crate::output::{self, SweepRow};
use crate::CliError;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

fn run_from_config(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let params = cfg.model_params()?;
    let history = cfg.history()?;
    let sim = Simulation::init(params, &history, cfg.integrator())?;
    Ok(sim.run_until(cfg.integrator.t_end)?)
}

pub fn simulate(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    let traj = run_from_config(cfg)?;
    write_file(out_dir, "trajectory.csv", &output::trajectory_csv(&traj))?;
    write_file(out_dir, "summary.json", &output::summary_json(&traj))?;
    if !quiet {
        eprintln!(
            "simulate: t_final = {}, diameter = {:.3e}{}",
            traj.final_time(),
            traj.final_diameter(),
            match traj.consensus_time() {
                Some(t) => format!(", consensus at t = {t}"),
                None => String::new(),
            }
        );
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    if cfg.model.scheme == WeightScheme::NormalizedWithSelf {
        return Err(CliError::Unsupported(
            "verify: no certificate exists for scheme `normalized-with-self`".into(),
        ));
    }
    if cfg.integrator.t_end < 6.0 * cfg.model.tau {
        return Err(CliError::Config(format!(
            "config error: horizon too short for k=1 (t_end = {} < 6 tau = {})",
            cfg.integrator.t_end,
            6.0 * cfg.model.tau
        )));
    }
    let traj = run_from_config(cfg)?;
    let stay = analysis::stay_check(&traj);
    let directions = cfg.directions();
    let mut certificates = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    if !stay.pass {
        failures.push(format!(
            "stay bound violated (worst excess {:.3e})",
            stay.worst_excess
        ));
    }
    for (i, dir) in directions.iter().enumerate() {
        let report = analysis::contraction_report(&traj, dir)?;
        let cert = analysis::certificate(report.initial.min, report.initial.max, traj.params())?;
        let speed = analysis::speed_check(&traj, dir)?;
        if let Some(row) = report.first_failure() {
            failures.push(format!(
                "direction {i}: contraction row k = {} failed (D_k = {}, D_k+1 bound = {})",
                row.k, row.width, row.bound_rhs
            ));
        }
        if !speed.pass {
            failures.push(format!(
                "direction {i}: speed bound violated ({} > {})",
                speed.max_speed, speed.bound
            ));
        }
        let name = if directions.len() == 1 {
            "report.csv".to_string()
        } else {
            format!("report_{i}.csv")
        };
        write_file(out_dir, &name, &output::report_csv(&report))?;
        certificates.push(cert);
    }
    write_file(
        out_dir,
        "certificate.json",
        &output::certificates_json(&certificates),
    )?;
    if !quiet {
        eprintln!(
            "verify: {} direction(s), stay {}, {} failure(s)",
            directions.len(),
            if stay.pass { "ok" } else { "VIOLATED" },
            failures.len()
        );
    }
    if let Some(first) = failures.first() {
        return Err(CliError::Verification(format!("verify failed: {first}")));
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out_dir: &Path, jobs: Option<usize>, quiet: bool) -> Result<(), CliError> {
    let grid = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("config error: missing [sweep] section".into()))?;
    if grid.tau.is_empty() || grid.beta.is_empty() || grid.n_agents.is_empty() || grid.seeds.is_empty()
    {
        return Err(CliError::Config(
            "config error: [sweep] lists must be non-empty".into(),
        ));
    }
    if !matches!(cfg.model.influence, InfluenceSection::PowerLaw { .. }) {
        return Err(CliError::Config(
            "config error: [sweep].beta requires a power-law influence family".into(),
        ));
    }

    // Cartesian grid in listed order: tau, beta, n_agents, seed.
    let mut cells = Vec::new();
    for &tau in &grid.tau {
        for &beta in &grid.beta {
            for &n in &grid.n_agents {
                for &seed in &grid.seeds {
                    cells.push((tau, beta, n, seed));
                }
            }
        }
    }

    let run_cell = |&(tau, beta, n, seed): &(f64, f64, usize, u64)| -> SweepRow {
        let mut cell_cfg = cfg.clone();
        cell_cfg.model.tau = tau;
        cell_cfg.model.influence = InfluenceSection::PowerLaw { beta };
        cell_cfg.model.n_agents = n;
        cell_cfg.seed = Some(seed);
        let mut row = SweepRow {
            tau,
            beta,
            n_agents: n,
            seed,
            t_to_consensus: None,
            final_diameter: f64::NAN,
            min_gamma_tilde: None,
            status: "ok".into(),
        };
        match run_from_config(&cell_cfg) {
            Err(e) => row.status = format!("error: {e}"),
            Ok(traj) => {
                row.t_to_consensus = traj.consensus_time();
                row.final_diameter = traj.final_diameter();
                if cell_cfg.model.scheme != WeightScheme::NormalizedWithSelf {
                    let mut min_gt: Option<f64> = None;
                    for dir in cell_cfg.directions() {
                        match analysis::contraction_report(&traj, &dir) {
                            Err(e) => {
                                row.status = format!("error: {e}");
                                break;
                            }
                            Ok(report) => {
                                if !report.all_pass() {
                                    row.status = "verification-failed".into();
                                }
                                if let Some(g) = report.min_gamma_tilde() {
                                    min_gt =
                                        Some(min_gt.map_or(g, |cur: f64| cur.min(g)));
                                }
                            }
                        }
                    }
                    row.min_gamma_tilde = min_gt;
                }
            }
        }
        row
    };

    let rows: Vec<SweepRow> = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
            pool.install(|| cells.par_iter().map(run_cell).collect())
        }
        None => cells.par_iter().map(run_cell).collect(),
    };

    write_file(out_dir, "sweep.csv", &output::sweep_csv(&rows))?;
    let n_bad = rows.iter().filter(|r| r.status != "ok").count();
    if !quiet {
        eprintln!("sweep: {} cells, {} not ok", rows.len(), n_bad);
    }
    // Exit reflects the worst cell: integration failures dominate.
    if rows.iter().any(|r| r.status.contains("integration failed")) {
        return Err(CliError::Integration(format!(
            "sweep: {n_bad} cell(s) failed"
        )));
    }
    if n_bad > 0 {
        return Err(CliError::Verification(format!(
            "sweep: {n_bad} cell(s) not ok"
        )));
    }
    Ok(())
}

pub fn meanfield(cfg: &RunConfig, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    let section = cfg
        .meanfield
        .as_ref()
        .ok_or_else(|| CliError::Config("config error: missing [meanfield] section".into()))?;
    let source = match section.source {
        MeanFieldSourceKind::UniformBox => {
            let bounds = section.bounds.clone().ok_or_else(|| {
                CliError::Config(
                    "config error: [meanfield] source `uniform-box` needs field `box`".into(),
                )
            })?;
            SourceDensity::UniformBox(bounds)
        }
        MeanFieldSourceKind::Gaussian => {
            let (mean, scale, truncate) = match (&section.mean, section.scale, &section.truncate) {
                (Some(m), Some(s), Some(t)) => (m.clone(), s, t.clone()),
                _ => {
                    return Err(CliError::Config(
                        "config error: [meanfield] source `gaussian` needs `mean`, `scale` and `truncate`"
                            .into(),
                    ))
                }
            };
            SourceDensity::Gaussian {
                mean,
                scale,
                truncate,
            }
        }
    };
    if source.dim() != cfg.model.dim {
        return Err(CliError::Config(format!(
            "config error: [meanfield] source dimension {} does not match model dim {}",
            source.dim(),
            cfg.model.dim
        )));
    }
    let exp = MeanFieldExperiment {
        source,
        n_values: section.n_values.clone(),
        seeds: section.seeds.clone(),
        horizon: section.horizon,
        params: cfg.model_params()?,
        steps_per_delay: cfg.integrator.steps_per_delay,
        record_stride: cfg.integrator.record_stride,
        eps_consensus: cfg.analysis.eps_consensus,
    };
    let table = meanfield::run_meanfield(&exp)?;
    write_file(out_dir, "meanfield.csv", &output::meanfield_csv(&table))?;
    let eps = cfg.analysis.eps_consensus;
    let missed: Vec<String> = table
        .runs
        .iter()
        .filter(|r| r.final_diameter >= eps)
        .map(|r| format!("N = {}, seed = {}", r.n, r.seed))
        .collect();
    if !quiet {
        eprintln!(
            "meanfield: {} runs, {} missed the consensus threshold",
            table.runs.len(),
            missed.len()
        );
    }
    if !missed.is_empty() {
        return Err(CliError::Verification(format!(
            "meanfield: diameter above {eps} at the horizon for: {}",
            missed.join("; ")
        )));
    }
    Ok(())
}
