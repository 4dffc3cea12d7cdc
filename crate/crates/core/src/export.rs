//! Output formats: regions CSV, planner CSV and the simulation JSON report.
//!
//! CSV files start with a `# schema_version=N` comment line, use `\n` line
//! endings and print numbers with 9 significant digits in C `%.9g` style.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::planner::{ComparisonRow, SweepPoint};
use crate::protocol::{MonteCarloSummary, ProtocolConfig, SimulationResult};
use crate::regions::RateRegion;

pub const SCHEMA_VERSION: u32 = 1;

pub const REGIONS_HEADER: &str = "scheme,kind,index,a1_or_r1,a2_or_r2,b";
pub const PLANNER_HEADER: &str = "sweep_value,scheme,max_sum_rate,sym_r1,sym_r2,max_r1,max_r2,eta";

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros removed,
/// exponent form outside `[1e-5, 1e9)`.
pub fn fmt_sig9(x: f64) -> String {
    const P: i32 = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn schema_line(out: &mut String) {
    let _ = writeln!(out, "# schema_version={SCHEMA_VERSION}");
}

/// Appends constraint and vertex rows of one region.
pub fn write_region_rows(out: &mut String, scheme: &str, region: &RateRegion) {
    for (i, c) in region.constraints().iter().enumerate() {
        let _ = writeln!(
            out,
            "{scheme},constraint,{i},{},{},{}",
            fmt_sig9(c.a1),
            fmt_sig9(c.a2),
            fmt_sig9(c.b)
        );
    }
    for (i, v) in region.vertices().iter().enumerate() {
        let _ = writeln!(out, "{scheme},vertex,{i},{},{},", fmt_sig9(v.r1), fmt_sig9(v.r2));
    }
}

pub fn regions_csv<'a>(regions: impl IntoIterator<Item = (&'a str, &'a RateRegion)>) -> String {
    let mut out = String::new();
    schema_line(&mut out);
    out.push_str(REGIONS_HEADER);
    out.push('\n');
    for (scheme, region) in regions {
        write_region_rows(&mut out, scheme, region);
    }
    out
}

fn planner_row(out: &mut String, sweep_value: Option<f64>, row: &ComparisonRow) {
    let opt = |x: Option<f64>| x.map(fmt_sig9).unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        opt(sweep_value),
        row.scheme.label(),
        fmt_sig9(row.max_sum_rate),
        fmt_sig9(row.symmetric_point.r1),
        fmt_sig9(row.symmetric_point.r2),
        fmt_sig9(row.max_r1),
        fmt_sig9(row.max_r2),
        opt(row.eta),
    );
}

/// Comparison table with an empty `sweep_value` column.
pub fn compare_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    schema_line(&mut out);
    out.push_str(PLANNER_HEADER);
    out.push('\n');
    for r in rows {
        planner_row(&mut out, None, r);
    }
    out
}

/// One block of rows per grid point.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::new();
    schema_line(&mut out);
    out.push_str(PLANNER_HEADER);
    out.push('\n');
    for pt in points {
        for r in &pt.rows {
            planner_row(&mut out, Some(pt.value), r);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub slots_phase1: u64,
    pub slots_phase2: u64,
    pub slots_phase3: u64,
    pub total_slots: u64,
    pub sum_rate: f64,
    pub decode_ok: bool,
}

impl From<&SimulationResult> for TrialRecord {
    fn from(r: &SimulationResult) -> Self {
        TrialRecord {
            slots_phase1: r.slots_phase1,
            slots_phase2: r.slots_phase2,
            slots_phase3: r.slots_phase3,
            total_slots: r.total_slots,
            sum_rate: r.sum_rate,
            decode_ok: r.decode_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub delta_n: f64,
    pub delta_s: f64,
    pub delta_d: f64,
}

/// Monte Carlo run as written by `risbc simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub params: ParamsRecord,
    pub eta: f64,
    pub n: u64,
    pub m: usize,
    pub trials: usize,
    pub per_trial: Vec<TrialRecord>,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_eta1: f64,
    pub mean_eta2: f64,
}

impl SimulationReport {
    pub fn new(config: &ProtocolConfig, summary: &MonteCarloSummary) -> Self {
        let ChannelParams {
            delta_n,
            delta_s,
            delta_d,
        } = config.params;
        SimulationReport {
            schema_version: SCHEMA_VERSION,
            params: ParamsRecord {
                delta_n,
                delta_s,
                delta_d,
            },
            eta: config.eta,
            n: config.n,
            m: config.m,
            trials: summary.trials,
            per_trial: summary.per_trial.iter().map(TrialRecord::from).collect(),
            mean_sum_rate: summary.mean_sum_rate,
            std_sum_rate: summary.std_sum_rate,
            mean_eta1: summary.mean_eta1,
            mean_eta2: summary.mean_eta2,
        }
    }

    pub fn decode_failures(&self) -> usize {
        self.per_trial.iter().filter(|t| !t.decode_ok).count()
    }
}
