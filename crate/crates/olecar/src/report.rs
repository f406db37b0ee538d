//! Report documents and their JSON and CSV renderings.
//!
//! Floating-point values are printed with 17 significant digits, which is
//! enough to round-trip every `f64`, so two identical runs give identical
//! bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use olecar_core::rng::RNG_ALGORITHM;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::config::RunConfig;

/// Tool name in the config echo.
pub const TOOL: &str = "olecar";
/// Crate version in the config echo.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Sign convention of every regret figure.
pub const REGRET_CONVENTION: &str = "C_A - C_best: cost of the learner minus cost of the best single expert";

const CONFIG_PREFIX: &str = "# config: ";

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Pretty-printed JSON.
    Json,
    /// CSV tables with `#` comment lines.
    Csv,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    /// Producing tool.
    pub tool: String,
    /// Tool version.
    pub version: String,
    /// Random generator used for sampling.
    pub rng: String,
    /// Regret sign convention.
    pub regret: String,
    /// The run itself.
    pub run: RunConfig,
}

impl ConfigEcho {
    /// Echo for `run` from this build.
    pub fn new(run: RunConfig) -> Self {
        ConfigEcho {
            tool: TOOL.into(),
            version: VERSION.into(),
            rng: RNG_ALGORITHM.into(),
            regret: REGRET_CONVENTION.into(),
            run,
        }
    }
}

/// One summary table row. Unused fields are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SummaryRow {
    /// Policy, aggregate or sweep label.
    pub label: String,
    /// Replicate seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Learning rate in effect at the end of the run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Cache hits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hits: Option<u64>,
    /// Cache misses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub misses: Option<u64>,
    /// Hits over requests.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_rate: Option<f64>,
    /// Cumulative cost of the run.
    pub c_a: f64,
    /// Cumulative cost of the best expert.
    pub c_best: f64,
    /// Best expert.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_expert: Option<String>,
    /// `c_a - c_best`.
    pub regret: f64,
    /// Standard error of the mean regret.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret_std_err: Option<f64>,
    /// `2 eta T + K ln N / eta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// `2 sqrt(2 K T ln N)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_bound: Option<f64>,
    /// Regret on undecayed costs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_regret: Option<f64>,
    /// Lowest regret of a sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<bool>,
}

/// Sampled time series of one run or aggregate.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeriesBlock {
    /// Which summary row this belongs to.
    pub label: String,
    /// Round numbers.
    pub round: Vec<u64>,
    /// Cumulative cost.
    pub cum_cost: Vec<f64>,
    /// Regret against the prefix best expert.
    pub regret: Vec<f64>,
    /// Normalized expert weights (empty rows for non-learning policies).
    pub weights: Vec<Vec<f64>>,
    /// Standard error of the mean regret.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret_std_err: Option<Vec<f64>>,
    /// Bound curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<f64>>,
}

/// A complete report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    /// Config echo.
    pub config: ConfigEcho,
    /// Summary rows.
    pub summary: Vec<SummaryRow>,
    /// Time series, if requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesBlock>>,
}

struct Digits17<F>(F);

macro_rules! forward {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        })*
    };
}

impl<F: Formatter> Formatter for Digits17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(number(value).as_bytes())
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    forward!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
}

/// `value` with 17 significant digits.
pub fn number(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        value.to_string()
    }
}

fn to_json<T: Serialize, F: Formatter>(value: &T, formatter: F) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(formatter));
    value.serialize(&mut ser).expect("report types serialize");
    out
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

type Column = (&'static str, fn(&SummaryRow) -> String);

const SUMMARY_COLUMNS: [Column; 15] = [
    ("label", |r| r.label.clone()),
    ("seed", |r| opt(&r.seed)),
    ("eta", |r| opt_num(r.eta)),
    ("hits", |r| opt(&r.hits)),
    ("misses", |r| opt(&r.misses)),
    ("hit_rate", |r| opt_num(r.hit_rate)),
    ("c_a", |r| number(r.c_a)),
    ("c_best", |r| number(r.c_best)),
    ("best_expert", |r| opt(&r.best_expert)),
    ("regret", |r| number(r.regret)),
    ("regret_std_err", |r| opt_num(r.regret_std_err)),
    ("bound", |r| opt_num(r.bound)),
    ("optimal_bound", |r| opt_num(r.optimal_bound)),
    ("raw_regret", |r| opt_num(r.raw_regret)),
    ("argmin", |r| opt(&r.argmin)),
];

fn csv_table(out: &mut Vec<u8>, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.flush().expect("in-memory write");
}

impl Report {
    /// Pretty JSON with top-level keys `config`, `summary` and `series`.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = to_json(self, PrettyFormatter::new());
        out.push(b'\n');
        out
    }

    /// CSV: config echo as a comment, the summary table, then one table per
    /// series block.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(format!("# {TOOL} report\n{CONFIG_PREFIX}").as_bytes());
        out.extend_from_slice(&to_json(&self.config, CompactFormatter));
        out.push(b'\n');

        let used: Vec<&Column> = SUMMARY_COLUMNS
            .iter()
            .filter(|(_, get)| self.summary.iter().any(|r| !get(r).is_empty()))
            .collect();
        let header: Vec<String> = used.iter().map(|(name, _)| name.to_string()).collect();
        let rows = self.summary.iter().map(|r| used.iter().map(|(_, get)| get(r)).collect());
        csv_table(&mut out, &header, rows);

        for block in self.series.iter().flatten() {
            let mut line = String::new();
            let _ = writeln!(line, "\n# series {}", block.label);
            out.extend_from_slice(line.as_bytes());
            let n = block.weights.iter().map(Vec::len).max().unwrap_or(0);
            let mut header: Vec<String> = ["round", "cum_cost", "regret"].map(String::from).to_vec();
            header.extend((1..=n).map(|i| format!("w_{i}")));
            if block.regret_std_err.is_some() {
                header.push("regret_std_err".into());
            }
            if block.bound.is_some() {
                header.push("bound".into());
            }
            let rows = (0..block.round.len()).map(|i| {
                let mut row = vec![
                    block.round[i].to_string(),
                    number(block.cum_cost[i]),
                    number(block.regret[i]),
                ];
                let w = block.weights.get(i).map(Vec::as_slice).unwrap_or(&[]);
                row.extend((0..n).map(|j| w.get(j).map(|&v| number(v)).unwrap_or_default()));
                if let Some(se) = &block.regret_std_err {
                    row.push(number(se[i]));
                }
                if let Some(b) = &block.bound {
                    row.push(number(b[i]));
                }
                row
            });
            csv_table(&mut out, &header, rows);
        }
        out
    }

    /// Rendering in `format`.
    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Write to `path`, or standard output when `None`.
    pub fn write(&self, path: Option<&Path>, format: Format) -> io::Result<()> {
        let bytes = self.render(format);
        match path {
            Some(p) => fs::write(p, bytes),
            None => io::stdout().lock().write_all(&bytes),
        }
    }
}

/// Failure to recover a config echo from a report.
#[derive(Debug, thiserror::Error)]
pub enum EchoError {
    /// JSON report without a usable `config` object.
    #[error("invalid config echo: {0}")]
    Json(#[from] serde_json::Error),
    /// CSV report without a `# config:` line.
    #[error("no config echo found in report")]
    NotFound,
}

/// Config echo of a JSON or CSV report.
pub fn read_config_echo(text: &str) -> Result<ConfigEcho, EchoError> {
    if text.trim_start().starts_with('{') {
        #[derive(Deserialize)]
        struct Outer {
            config: ConfigEcho,
        }
        return Ok(serde_json::from_str::<Outer>(text)?.config);
    }
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .ok_or(EchoError::NotFound)?;
    Ok(serde_json::from_str(line)?)
}
