//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use olecar_core::engine::CostMode;

use crate::config::{
    BanditSimConfig, CacheSimConfig, EnvKind, PolicyChoice, RateChoice, RunConfig, SweepBase, SweepConfig,
    SweepParam, TraceFormat, TraceInput,
};
use crate::report::{read_config_echo, Format};
use crate::run::run;

/// Simulate OLeCaR and EXP4-DFDC, and write reports.
#[derive(Debug, Parser)]
#[command(name = "olecar", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay a trace through cache policies.
    CacheSim(CacheSimArgs),
    /// Run seeded bandit experiments against a synthetic environment.
    BanditSim(BanditSimArgs),
    /// Repeat a simulation for several values of one parameter.
    Sweep(SweepArgs),
    /// Re-run the configuration echoed in a report.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Report file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Leave time series out of the report.
    #[arg(long)]
    no_series: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Lru,
    Lfu,
    Lecar,
    Olecar,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CostModeArg {
    Dfdc,
    Legacy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceFormatArg {
    Lines,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvArg {
    Stochastic,
    Switching,
}

fn parse_rate(s: &str) -> Result<RateChoice, String> {
    s.parse()
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["trace", "synthetic"])))]
struct CacheSimArgs {
    /// Trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Generated phase trace, e.g. `mix:hot=30,scan=200,len=20000,share=0.5;zipf:keys=40,len=20000`.
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long, value_enum, default_value_t = TraceFormatArg::Lines)]
    trace_format: TraceFormatArg,
    /// Key column (0-based) for csv traces.
    #[arg(long, default_value_t = 0)]
    csv_column: usize,
    /// Skip the first row of a csv trace.
    #[arg(long)]
    csv_header: bool,
    #[arg(long)]
    cache_size: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::All)]
    policy: PolicyArg,
    /// FLOAT in (0, 1], `auto` (trace length as horizon) or `auto-stream`.
    #[arg(long, value_parser = parse_rate)]
    learning_rate: Option<RateChoice>,
    /// Eviction history size [default: cache size].
    #[arg(long)]
    history_size: Option<usize>,
    #[arg(long, value_enum)]
    cost_mode: Option<CostModeArg>,
    #[arg(long, value_enum)]
    importance_weighting: Option<Toggle>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

impl CacheSimArgs {
    fn config(&self) -> CacheSimConfig {
        let trace = match (&self.trace, &self.synthetic) {
            (Some(path), _) => TraceInput::File {
                path: path.to_string_lossy().into_owned(),
                format: match self.trace_format {
                    TraceFormatArg::Lines => TraceFormat::Lines,
                    TraceFormatArg::Csv => TraceFormat::Csv {
                        column: self.csv_column,
                        skip_header: self.csv_header,
                    },
                },
            },
            (None, Some(spec)) => TraceInput::Synthetic { spec: spec.clone() },
            (None, None) => unreachable!("clap requires a trace source"),
        };
        let policies = match self.policy {
            PolicyArg::Lru => vec![PolicyChoice::Lru],
            PolicyArg::Lfu => vec![PolicyChoice::Lfu],
            PolicyArg::Lecar => vec![PolicyChoice::Lecar],
            PolicyArg::Olecar => vec![PolicyChoice::Olecar],
            PolicyArg::All => PolicyChoice::ALL.to_vec(),
        };
        CacheSimConfig {
            trace,
            cache_size: self.cache_size,
            policies,
            learning_rate: self.learning_rate,
            history_size: self.history_size,
            cost_mode: self.cost_mode.map(|m| match m {
                CostModeArg::Dfdc => CostMode::Dfdc,
                CostModeArg::Legacy => CostMode::Legacy,
            }),
            importance_weighting: self.importance_weighting.map(|t| matches!(t, Toggle::On)),
            seed: self.seed,
            series: !self.output.no_series,
        }
    }
}

#[derive(Debug, Args)]
struct BanditSimArgs {
    /// Number of arms K.
    #[arg(long, default_value_t = 10)]
    arms: usize,
    /// Number of one-hot experts N, advising arms 0..N.
    #[arg(long, default_value_t = 4)]
    experts: usize,
    #[arg(long, default_value_t = 50_000)]
    horizon: u64,
    #[arg(long, value_enum, default_value_t = EnvArg::Stochastic)]
    env: EnvArg,
    /// Comma-separated mean cost per arm [default: 0.1 for arm 0, 0.5 otherwise].
    #[arg(long, value_delimiter = ',')]
    means: Option<Vec<f64>>,
    /// First round after the switch in a switching environment [default: T/2 + 1].
    #[arg(long)]
    switch_at: Option<u64>,
    /// Delays are uniform in [1, delay-max].
    #[arg(long, default_value_t = 20)]
    delay_max: u64,
    /// FLOAT in (0, 1] or `auto`.
    #[arg(long, value_parser = parse_rate, default_value = "auto")]
    learning_rate: RateChoice,
    /// Number of replicates.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[command(flatten)]
    output: OutputArgs,
}

impl BanditSimArgs {
    fn config(&self) -> BanditSimConfig {
        BanditSimConfig {
            arms: self.arms,
            experts: self.experts,
            horizon: self.horizon,
            env: match self.env {
                EnvArg::Stochastic => EnvKind::Stochastic,
                EnvArg::Switching => EnvKind::Switching,
            },
            means: self.means.clone(),
            switch_at: self.switch_at,
            delay_max: self.delay_max,
            learning_rate: self.learning_rate,
            seeds: self.seeds,
            seed_base: self.seed_base,
            series: !self.output.no_series,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParamArg {
    LearningRate,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    param: SweepParamArg,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[command(subcommand)]
    base: SweepBaseArgs,
}

#[derive(Debug, Subcommand)]
enum SweepBaseArgs {
    CacheSim(CacheSimArgs),
    BanditSim(BanditSimArgs),
}

#[derive(Debug, Args)]
struct RerunArgs {
    /// JSON or CSV report.
    #[arg(long)]
    report: PathBuf,
    /// Report file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("olecar: {msg}");
    code
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (config, out, format) = match cli.command {
        Command::CacheSim(a) => (RunConfig::CacheSim(a.config()), a.output.out, a.output.format),
        Command::BanditSim(a) => (RunConfig::BanditSim(a.config()), a.output.out, a.output.format),
        Command::Sweep(a) => {
            let mut values = Vec::new();
            for v in a.values.iter().filter(|v| !v.trim().is_empty()) {
                match v.parse::<RateChoice>() {
                    Ok(r) => values.push(r),
                    Err(msg) => return fail(2, msg),
                }
            }
            if values.is_empty() {
                return fail(2, "sweep needs at least one value");
            }
            let (base, output) = match a.base {
                SweepBaseArgs::CacheSim(b) => (SweepBase::CacheSim(b.config()), b.output),
                SweepBaseArgs::BanditSim(b) => (SweepBase::BanditSim(b.config()), b.output),
            };
            let param = match a.param {
                SweepParamArg::LearningRate => SweepParam::LearningRate,
            };
            (RunConfig::Sweep(SweepConfig { param, values, base }), output.out, output.format)
        }
        Command::Rerun(a) => {
            let text = match fs::read_to_string(&a.report) {
                Ok(t) => t,
                Err(e) => return fail(3, format_args!("cannot read {}: {e}", a.report.display())),
            };
            match read_config_echo(&text) {
                Ok(echo) => (echo.run, a.out, a.format),
                Err(e) => return fail(2, e),
            }
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(e.exit_code(), e),
    };
    match report.write(out.as_deref(), format) {
        Ok(()) => 0,
        Err(e) => fail(1, format_args!("cannot write report: {e}")),
    }
}
