//! Argument parsing and subcommand execution for the `risbc` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use risbc::export::{self, SimulationReport};
use risbc::planner::{self, Objective, SchemeRow, SweepParam};
use risbc::protocol::{self, ProtocolConfig};
use risbc::regions;
use risbc::{ChannelParams, Receiver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DECODE_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "risbc", version, about = "Rate regions and protocol simulation for double-RIS erasure broadcast networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constraints and vertices of all six rate regions.
    Regions(RegionsArgs),
    /// Monte Carlo simulation of the three-phase protocol.
    Simulate(SimulateArgs),
    /// Best association scheme for an objective.
    Optimize(OptimizeArgs),
    /// Comparison table across schemes.
    Compare(CompareArgs),
    /// Comparison tables over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Erasure probability with no RIS aid.
    #[arg(long = "delta-n", default_value_t = 0.8, allow_negative_numbers = true)]
    pub delta_n: f64,
    /// Erasure probability with one RIS.
    #[arg(long = "delta-s", default_value_t = 0.5, allow_negative_numbers = true)]
    pub delta_s: f64,
    /// Erasure probability with both RISs.
    #[arg(long = "delta-d", default_value_t = 0.3, allow_negative_numbers = true)]
    pub delta_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Phase fraction for the dynamic regions (default: balanced value).
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Outer-bound fraction with both RISs on receiver 1 (default: --eta).
    #[arg(long, allow_negative_numbers = true)]
    pub eta1: Option<f64>,
    /// Outer-bound fraction with both RISs on receiver 2 (default: --eta).
    #[arg(long, allow_negative_numbers = true)]
    pub eta2: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Nominal block length in slots.
    #[arg(long, default_value_t = 200_000)]
    pub n: u64,
    /// Packets per user (default: derived from n and eta).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "payload-len", default_value_t = 64)]
    pub payload_len: usize,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// `sum` or `weighted:W1,W2`.
    #[arg(long, default_value = "sum")]
    pub objective: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Fixed eta for the dynamic rows (default: balanced value per point).
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// One of delta_n, delta_s, delta_d, eta.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Task {
    Regions {
        params: ChannelParams,
        eta: f64,
        eta1: f64,
        eta2: f64,
    },
    Simulate {
        config: ProtocolConfig,
        trials: usize,
    },
    Optimize {
        params: ChannelParams,
        objective: Objective,
    },
    Compare {
        params: ChannelParams,
        eta: f64,
    },
    Sweep {
        params: ChannelParams,
        param: SweepParam,
        from: f64,
        to: f64,
        steps: usize,
        eta: Option<f64>,
    },
}

/// One-line diagnostic for rejected input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

type Usage<T> = Result<T, UsageError>;

fn usage<T>(msg: String) -> Usage<T> {
    Err(UsageError(msg))
}

fn open_interval(flag: &str, value: f64, hi: f64) -> Usage<f64> {
    if value > 0.0 && value < hi {
        Ok(value)
    } else {
        let interval = if hi == 1.0 { "(0, 1)" } else { "(0, 0.5)" };
        usage(format!("--{flag} must lie in {interval}, got {value}"))
    }
}

fn at_least(flag: &str, value: usize, min: usize) -> Usage<usize> {
    if value >= min {
        Ok(value)
    } else {
        usage(format!("--{flag} must be at least {min}, got {value}"))
    }
}

impl ChannelArgs {
    pub fn params(&self) -> Usage<ChannelParams> {
        let dn = open_interval("delta-n", self.delta_n, 1.0)?;
        let ds = open_interval("delta-s", self.delta_s, 1.0)?;
        let dd = open_interval("delta-d", self.delta_d, 1.0)?;
        ChannelParams::new(dn, ds, dd).map_err(|e| UsageError(e.to_string()))
    }
}

fn eta_or_balanced(eta: Option<f64>, params: &ChannelParams) -> Usage<f64> {
    match eta {
        Some(e) => open_interval("eta", e, 0.5),
        None => Ok(protocol::optimal_eta(params)),
    }
}

pub fn parse_objective(s: &str) -> Usage<Objective> {
    if s == "sum" {
        return Ok(Objective::Sum);
    }
    let bad = || UsageError(format!("--objective must be `sum` or `weighted:W1,W2`, got {s:?}"));
    let weights = s.strip_prefix("weighted:").ok_or_else(bad)?;
    let (a, b) = weights.split_once(',').ok_or_else(bad)?;
    let w1: f64 = a.trim().parse().map_err(|_| bad())?;
    let w2: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(w1 >= 0.0 && w2 >= 0.0 && w1.is_finite() && w2.is_finite()) || w1 + w2 == 0.0 {
        return Err(UsageError(format!(
            "--objective weights must be nonnegative and not both zero, got {s:?}"
        )));
    }
    Ok(Objective::Weighted(w1, w2))
}

impl Cli {
    /// Validates every flag before any work starts.
    pub fn into_config(self) -> Usage<RunConfig> {
        let (task, output, threads) = match self.command {
            Command::Regions(a) => {
                let params = a.channel.params()?;
                let eta = eta_or_balanced(a.eta, &params)?;
                let eta1 = open_interval("eta1", a.eta1.unwrap_or(eta), 0.5)?;
                let eta2 = open_interval("eta2", a.eta2.unwrap_or(eta), 0.5)?;
                (Task::Regions { params, eta, eta1, eta2 }, a.output, None)
            }
            Command::Simulate(a) => {
                let params = a.channel.params()?;
                let eta = eta_or_balanced(a.eta, &params)?;
                at_least("n", a.n as usize, 1)?;
                let trials = at_least("trials", a.trials, 1)?;
                let payload_len = at_least("payload-len", a.payload_len, 1)?;
                if let Some(t) = a.threads {
                    at_least("threads", t, 1)?;
                }
                let mut config = ProtocolConfig::new(params, a.n)
                    .with_eta(eta)
                    .with_seed(a.seed)
                    .with_payload_len(payload_len);
                if let Some(m) = a.m {
                    config = config.with_m(at_least("m", m, 1)?);
                }
                if let Err(e) = config.validate() {
                    let flags = if a.m.is_some() { "--n/--m" } else { "--n" };
                    return usage(format!("{flags}: {e}"));
                }
                (Task::Simulate { config, trials }, a.output, a.threads)
            }
            Command::Optimize(a) => {
                let params = a.channel.params()?;
                let objective = parse_objective(&a.objective)?;
                (Task::Optimize { params, objective }, a.output, None)
            }
            Command::Compare(a) => {
                let params = a.channel.params()?;
                let eta = eta_or_balanced(a.eta, &params)?;
                (Task::Compare { params, eta }, a.output, None)
            }
            Command::Sweep(a) => {
                let params = a.channel.params()?;
                let param: SweepParam = a
                    .param
                    .parse()
                    .map_err(|_| UsageError(format!("--param must be one of delta_n, delta_s, delta_d, eta, got {:?}", a.param)))?;
                let hi = if param == SweepParam::Eta { 0.5 } else { 1.0 };
                let from = open_interval("from", a.from, hi)?;
                let to = open_interval("to", a.to, hi)?;
                if from >= to {
                    return usage(format!("--from ({from}) must be below --to ({to})"));
                }
                let steps = at_least("steps", a.steps, 2)?;
                let eta = a.eta.map(|e| open_interval("eta", e, 0.5)).transpose()?;
                (Task::Sweep { params, param, from, to, steps, eta }, a.output, None)
            }
        };
        let default_format = match task {
            Task::Simulate { .. } => Format::Json,
            _ => Format::Csv,
        };
        Ok(RunConfig {
            task,
            out: output.out,
            format: output.format.unwrap_or(default_format),
            threads,
        })
    }
}

/// What a run produced: the document for `--out`/stdout, an optional line
/// for stdout alongside it, warnings, and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub document: String,
    pub summary_line: Option<String>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl RunOutput {
    fn document(document: String) -> Self {
        RunOutput {
            document,
            summary_line: None,
            warnings: Vec::new(),
            exit_code: EXIT_OK,
        }
    }
}

fn all_regions(params: &ChannelParams, eta: f64, eta1: f64, eta2: f64) -> risbc::Result<Vec<(SchemeRow, regions::RateRegion)>> {
    SchemeRow::ALL
        .iter()
        .map(|&s| {
            let region = match s {
                SchemeRow::DynamicOuter => regions::outer_region(params, eta1, eta2)?,
                SchemeRow::BothToUser1 => regions::both_to_user_region(params, Receiver::One),
                other => other.region(params, eta)?,
            };
            Ok((s, region))
        })
        .collect()
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn regions_json(rows: &[(SchemeRow, regions::RateRegion)]) -> String {
    let list: Vec<serde_json::Value> = rows
        .iter()
        .map(|(s, r)| {
            serde_json::json!({
                "scheme": s.label(),
                "constraints": r.constraints(),
                "vertices": r.vertices(),
            })
        })
        .collect();
    json(&serde_json::json!({
        "schema_version": export::SCHEMA_VERSION,
        "regions": list,
    }))
}

fn simulation_csv(report: &SimulationReport) -> String {
    let mut out = format!("# schema_version={}\n", export::SCHEMA_VERSION);
    out.push_str("trial,slots_phase1,slots_phase2,slots_phase3,total_slots,sum_rate,decode_ok\n");
    for (i, t) in report.per_trial.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            t.slots_phase1,
            t.slots_phase2,
            t.slots_phase3,
            t.total_slots,
            export::fmt_sig9(t.sum_rate),
            t.decode_ok
        );
    }
    out
}

/// Executes a validated configuration.
pub fn execute(config: &RunConfig) -> risbc::Result<RunOutput> {
    match &config.task {
        Task::Regions { params, eta, eta1, eta2 } => {
            let rows = all_regions(params, *eta, *eta1, *eta2)?;
            let document = match config.format {
                Format::Csv => export::regions_csv(rows.iter().map(|(s, r)| (s.label(), r))),
                Format::Json => regions_json(&rows),
            };
            let mut out = RunOutput::document(document);
            out.warnings = params.lint();
            Ok(out)
        }
        Task::Simulate { config: pc, trials } => {
            let summary = match config.threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| risbc::Error::InvalidConfig(e.to_string()))?
                    .install(|| protocol::monte_carlo(pc, *trials))?,
                None => protocol::monte_carlo(pc, *trials)?,
            };
            let report = SimulationReport::new(pc, &summary);
            let document = match config.format {
                Format::Json => json(&report),
                Format::Csv => simulation_csv(&report),
            };
            let mut out = RunOutput::document(document);
            out.warnings = pc.params.lint();
            if report.decode_failures() > 0 {
                out.exit_code = EXIT_DECODE_FAILURE;
                out.warnings
                    .push(format!("{} trial(s) failed to decode", report.decode_failures()));
            }
            Ok(out)
        }
        Task::Optimize { params, objective } => {
            let best = planner::best_schedule(params, *objective)?;
            let value_name = match objective {
                Objective::Sum => "sum_rate",
                Objective::Weighted(..) => "weighted",
            };
            let mut line = best.scheme.family().to_string();
            if let Some(eta) = best.eta {
                let _ = write!(line, " eta={eta:.6}");
            }
            let _ = write!(line, " {value_name}={:.6}", best.value);
            let rows = planner::compare_all(params, None)?;
            let document = match config.format {
                Format::Csv => export::compare_csv(&rows),
                Format::Json => json(&rows),
            };
            Ok(RunOutput {
                document,
                summary_line: Some(line),
                warnings: params.lint(),
                exit_code: EXIT_OK,
            })
        }
        Task::Compare { params, eta } => {
            let rows = planner::compare_all(params, Some(*eta))?;
            let document = match config.format {
                Format::Csv => export::compare_csv(&rows),
                Format::Json => json(&rows),
            };
            let mut out = RunOutput::document(document);
            out.warnings = params.lint();
            Ok(out)
        }
        Task::Sweep { params, param, from, to, steps, eta } => {
            let points = planner::sweep(params, *param, *from, *to, *steps, *eta)?;
            let document = match config.format {
                Format::Csv => export::sweep_csv(&points),
                Format::Json => json(&points),
            };
            Ok(RunOutput::document(document))
        }
    }
}
