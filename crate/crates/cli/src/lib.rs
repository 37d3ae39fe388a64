//! `mfcd` command-line front end.

pub mod config;
pub mod output;

use std::fs;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use mfcd_core::diagnostics;
use mfcd_core::dynamics;
use mfcd_core::meanfield;
use mfcd_core::two_level::{self, ScheduledFields};
use mfcd_core::variational;
use mfcd_core::{Assist, EvolveOptions, ModelParams, TrajectoryRecord};
use rayon::prelude::*;
use serde::Serialize;

use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "mfcd", version, about = "Mean-field counter-diabatic annealing of the infinite-range Ising model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one annealing run and write its trajectory.
    Anneal(Overrides),
    /// Final and minimum fidelity as a function of N.
    SweepN(Overrides),
    /// Final and minimum fidelity as a function of t_f.
    SweepTf(Overrides),
    /// Mean-field magnetization and counter-diabatic field along the schedule.
    MeanfieldTrace(Overrides),
    /// Variational field against the mean-field field.
    VariationalCompare(Overrides),
    /// Single two-level system driven by the schedule.
    TwolevelDemo(Overrides),
    /// Invariant checks with measured defects.
    Diagnostics(Overrides),
}

/// A configuration the user must fix; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    let (name, flags, defaults): (&str, Overrides, &[f64]) = match cli.command {
        Command::Anneal(o) => ("anneal", o, &[]),
        Command::SweepN(o) => ("sweep-n", o, &[100.0, 300.0, 1000.0]),
        Command::SweepTf(o) => ("sweep-tf", o, &[0.1, 1.0, 10.0]),
        Command::MeanfieldTrace(o) => ("meanfield-trace", o, &[]),
        Command::VariationalCompare(o) => ("variational-compare", o, &[]),
        Command::TwolevelDemo(o) => ("twolevel-demo", o, &[]),
        Command::Diagnostics(o) => ("diagnostics", o, &[]),
    };
    let dry_run = flags.dry_run;
    let config = RunConfig::resolve(name, flags, defaults).map_err(|e| UsageError(format!("{e:#}")))?;
    if dry_run {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(0);
    }
    fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    match name {
        "anneal" => anneal(&config),
        "sweep-n" => sweep(&config, SweepAxis::Spins),
        "sweep-tf" => sweep(&config, SweepAxis::OperationTime),
        "meanfield-trace" => meanfield_trace(&config),
        "variational-compare" => variational_compare(&config),
        "twolevel-demo" => twolevel_demo(&config),
        _ => run_diagnostics(&config),
    }
}

fn evolve_options(config: &RunConfig) -> EvolveOptions {
    EvolveOptions {
        steps: config.steps,
        n_outputs: config.n_outputs,
        integrator: config.integrator,
        check_convergence: config.check_convergence,
        ..EvolveOptions::default()
    }
}

#[derive(Serialize)]
struct AnnealSummary<'a> {
    final_mz: f64,
    final_fidelity: f64,
    min_fidelity: f64,
    max_norm_defect: f64,
    steps: usize,
    step_halving_delta: Option<f64>,
    wall_time_seconds: f64,
    parameters: &'a RunConfig,
}

fn anneal(config: &RunConfig) -> anyhow::Result<i32> {
    let start = Instant::now();
    let record = dynamics::evolve(&config.params()?, &config.schedule()?, config.assist, &evolve_options(config))?;
    let wall = start.elapsed().as_secs_f64();
    let csv = config.out.join("anneal.csv");
    output::write_csv(
        &csv,
        &["s", "gamma", "theta_dot", "mx", "my", "mz", "fidelity", "norm_defect"],
        record
            .points
            .iter()
            .map(|p| vec![p.s, p.gamma, p.theta_dot, p.mx, p.my, p.mz, p.fidelity, p.norm_defect]),
    )?;
    let last = record.final_point();
    let summary = AnnealSummary {
        final_mz: last.mz,
        final_fidelity: last.fidelity,
        min_fidelity: record.min_fidelity(),
        max_norm_defect: record.max_norm_defect(),
        steps: record.steps,
        step_halving_delta: record.step_halving_delta,
        wall_time_seconds: wall,
        parameters: config,
    };
    output::write_json(&config.out.join("anneal.json"), &summary)?;
    if config.plot {
        output::write_plot_stub(&config.out.join("anneal.gp"), "anneal.csv", "s", &[(6, "mz"), (7, "fidelity")])?;
    }
    println!("final mz {} fidelity {}", output::format_number(last.mz), output::format_number(last.fidelity));
    Ok(0)
}

#[derive(Clone, Copy)]
enum SweepAxis {
    Spins,
    OperationTime,
}

fn sweep(config: &RunConfig, axis: SweepAxis) -> anyhow::Result<i32> {
    if config.values.is_empty() {
        return Err(UsageError("sweep needs at least one value".into()).into());
    }
    let (label, file) = match axis {
        SweepAxis::Spins => ("N", "sweep-n"),
        SweepAxis::OperationTime => ("t_f", "sweep-tf"),
    };
    let jobs = config
        .values
        .iter()
        .map(|&v| -> anyhow::Result<(f64, ModelParams, mfcd_core::Schedule)> {
            Ok(match axis {
                SweepAxis::Spins => {
                    if !(v >= 1.0 && v.fract() == 0.0) {
                        return Err(UsageError(format!("N = {v} is not a positive integer")).into());
                    }
                    (v, ModelParams::new(config.coupling, config.field, v as usize)?, config.schedule()?)
                }
                SweepAxis::OperationTime => (v, config.params()?, config.schedule_with_t_f(v)?),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let options = evolve_options(config);
    let records: Vec<TrajectoryRecord> = jobs
        .par_iter()
        .map(|(_, params, schedule)| dynamics::evolve(params, schedule, config.assist, &options))
        .collect::<Result<_, _>>()?;
    output::write_csv(
        &config.out.join(format!("{file}.csv")),
        &[label, "final_mz", "final_fidelity", "min_fidelity"],
        jobs.iter()
            .zip(&records)
            .map(|((v, _, _), r)| vec![*v, r.final_point().mz, r.final_point().fidelity, r.min_fidelity()]),
    )?;
    if config.plot {
        output::write_plot_stub(&config.out.join(format!("{file}.gp")), &format!("{file}.csv"), label, &[(3, "final fidelity"), (4, "min fidelity")])?;
    }
    Ok(0)
}

fn meanfield_trace(config: &RunConfig) -> anyhow::Result<i32> {
    let trace = meanfield::trace_meanfield(&config.params()?, &config.schedule()?, config.n_points)?;
    output::write_csv(
        &config.out.join("meanfield-trace.csv"),
        &["s", "gamma", "gamma_dot", "mz", "mz_dot", "theta_dot", "residual"],
        trace
            .iter()
            .map(|p| vec![p.s, p.gamma, p.gamma_dot, p.mz, p.mz_dot, p.theta_dot, p.residual]),
    )?;
    if config.plot {
        output::write_plot_stub(&config.out.join("meanfield-trace.gp"), "meanfield-trace.csv", "s", &[(4, "mz"), (6, "theta_dot")])?;
    }
    Ok(0)
}

fn variational_compare(config: &RunConfig) -> anyhow::Result<i32> {
    let rows = variational::compare_fields(&config.params()?, &config.schedule()?, config.n_points)?;
    output::write_csv(
        &config.out.join("variational-compare.csv"),
        &["s", "alpha", "theta_dot", "ratio"],
        rows.iter().map(|r| vec![r.s, r.alpha, r.theta_dot, r.ratio]),
    )?;
    if config.plot {
        output::write_plot_stub(&config.out.join("variational-compare.gp"), "variational-compare.csv", "s", &[(2, "alpha"), (3, "theta_dot")])?;
    }
    Ok(0)
}

fn twolevel_demo(config: &RunConfig) -> anyhow::Result<i32> {
    let schedule = config.schedule()?;
    let protocol = ScheduledFields { schedule, h: config.field };
    let steps = config.steps.unwrap_or_else(|| dynamics::EvolveOptions::default().resolved_steps(config.t_f));
    let trace = two_level::evolve_two_level(&protocol, config.t_f, steps, config.n_outputs, config.assist != Assist::None)?;
    output::write_csv(
        &config.out.join("twolevel-demo.csv"),
        &["s", "gamma", "h", "theta_dot", "fidelity"],
        trace.samples.iter().map(|p| vec![p.s, p.gamma, p.h, p.theta_dot, p.fidelity]),
    )?;
    if config.plot {
        output::write_plot_stub(&config.out.join("twolevel-demo.gp"), "twolevel-demo.csv", "s", &[(5, "fidelity")])?;
    }
    Ok(0)
}

fn run_diagnostics(config: &RunConfig) -> anyhow::Result<i32> {
    let report = diagnostics::run_diagnostics(&config.params()?)?;
    output::write_json(&config.out.join("diagnostics.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.all_passed { 0 } else { 1 })
}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}

