//! Run configuration: command-line flags over a flat TOML file over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use mfcd_core::{Assist, Integrator, ModelParams, Schedule, ScheduleKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Parses a kebab-case name into any enum that deserializes from one.
fn parse_name<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleName {
    Quintic,
    Linear,
    Custom,
}

/// Every configurable key. Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Flat TOML file with any of the keys below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    #[serde(skip)]
    pub dry_run: bool,

    /// Ising coupling J.
    #[arg(short = 'J', long)]
    pub coupling: Option<f64>,
    /// Longitudinal field h.
    #[arg(short = 'H', long)]
    pub field: Option<f64>,
    /// Number of spins N.
    #[arg(short = 'N', long)]
    pub spins: Option<usize>,
    /// Operation time t_f.
    #[arg(short = 'T', long)]
    pub t_f: Option<f64>,
    /// quintic, linear or custom.
    #[arg(long, value_parser = parse_name::<ScheduleName>)]
    pub schedule: Option<ScheduleName>,
    /// Coefficients of Γ(s)/J, lowest power first (custom schedule).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coefficients: Option<Vec<f64>>,
    /// none, mean-field, variational or exact-oracle.
    #[arg(long, value_parser = parse_name::<Assist>)]
    pub assist: Option<Assist>,
    /// exponential-midpoint or commutator-free4.
    #[arg(long, value_parser = parse_name::<Integrator>)]
    pub integrator: Option<Integrator>,
    /// Total integrator steps (default 10⁴ t_f).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output points along the trajectory.
    #[arg(long)]
    pub n_outputs: Option<usize>,
    /// Grid points for field traces.
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Sweep values (N or t_f).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Repeat runs at half the step and fail on a fidelity change above 10⁻⁸.
    #[arg(long)]
    #[serde(default)]
    pub check_convergence: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed recorded with the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a gnuplot script next to the data.
    #[arg(long)]
    #[serde(default)]
    pub plot: bool,
}

impl Overrides {
    fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            config: self.config,
            dry_run: self.dry_run,
            coupling: self.coupling.or(lower.coupling),
            field: self.field.or(lower.field),
            spins: self.spins.or(lower.spins),
            t_f: self.t_f.or(lower.t_f),
            schedule: self.schedule.or(lower.schedule),
            coefficients: self.coefficients.or(lower.coefficients),
            assist: self.assist.or(lower.assist),
            integrator: self.integrator.or(lower.integrator),
            steps: self.steps.or(lower.steps),
            n_outputs: self.n_outputs.or(lower.n_outputs),
            n_points: self.n_points.or(lower.n_points),
            values: self.values.or(lower.values),
            check_convergence: self.check_convergence || lower.check_convergence,
            out: self.out.or(lower.out),
            seed: self.seed.or(lower.seed),
            plot: self.plot || lower.plot,
        }
    }
}

/// Fully resolved settings for one subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub coupling: f64,
    pub field: f64,
    pub spins: usize,
    pub t_f: f64,
    pub schedule: ScheduleKind,
    pub assist: Assist,
    pub integrator: Integrator,
    pub steps: Option<usize>,
    pub n_outputs: usize,
    pub n_points: usize,
    pub values: Vec<f64>,
    pub check_convergence: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub plot: bool,
}

impl RunConfig {
    /// Merges flags, the optional config file and the defaults of `subcommand`.
    pub fn resolve(subcommand: &str, flags: Overrides, default_values: &[f64]) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(path) => load_file(path)?,
            None => Overrides::default(),
        };
        let o = flags.over(file);
        let schedule = match (o.schedule, o.coefficients) {
            (None | Some(ScheduleName::Quintic), None) => ScheduleKind::PolynomialQuintic,
            (Some(ScheduleName::Linear), None) => ScheduleKind::Linear,
            (None | Some(ScheduleName::Custom), Some(c)) => ScheduleKind::CustomCoefficients(c),
            (Some(ScheduleName::Custom), None) => bail!("custom schedule needs coefficients"),
            (Some(name), Some(_)) => bail!("coefficients only apply to the custom schedule, not {name:?}"),
        };
        let config = Self {
            subcommand: subcommand.to_owned(),
            coupling: o.coupling.unwrap_or(1.0),
            field: o.field.unwrap_or(1e-3),
            spins: o.spins.unwrap_or(1000),
            t_f: o.t_f.unwrap_or(1.0),
            schedule,
            assist: o.assist.unwrap_or(Assist::MeanField),
            integrator: o.integrator.unwrap_or_default(),
            steps: o.steps,
            n_outputs: o.n_outputs.unwrap_or(201),
            n_points: o.n_points.unwrap_or(1001),
            values: o.values.unwrap_or_else(|| default_values.to_vec()),
            check_convergence: o.check_convergence,
            out: o.out.unwrap_or_else(|| PathBuf::from("out")),
            seed: o.seed.unwrap_or(0),
            plot: o.plot,
        };
        config.params()?;
        config.schedule()?;
        Ok(config)
    }

    pub fn params(&self) -> anyhow::Result<ModelParams> {
        Ok(ModelParams::new(self.coupling, self.field, self.spins)?)
    }

    pub fn schedule(&self) -> anyhow::Result<Schedule> {
        Ok(Schedule::new(self.t_f, self.schedule.clone())?)
    }

    pub fn schedule_with_t_f(&self, t_f: f64) -> anyhow::Result<Schedule> {
        Ok(Schedule::new(t_f, self.schedule.clone())?)
    }
}

fn load_file(path: &Path) -> anyhow::Result<Overrides> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
}
