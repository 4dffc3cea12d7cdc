//! Side-by-side comparison of association schemes and parameter sweeps.
//!
//! Results cover only the implemented scheme family (no RIS, neutral, both
//! surfaces to one user, dynamic). Whether some other time-varying
//! association does better is not answered here.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver};
use crate::error::{check_open, Error, Result};
use crate::protocol::optimal_eta;
use crate::regions::{self, RatePair, RateRegion, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeRow {
    NoRis,
    Neutral,
    BothToUser1,
    BothToUser2,
    DynamicOuter,
    DynamicAchievable,
}

impl SchemeRow {
    pub const ALL: [SchemeRow; 6] = [
        SchemeRow::NoRis,
        SchemeRow::Neutral,
        SchemeRow::BothToUser1,
        SchemeRow::BothToUser2,
        SchemeRow::DynamicOuter,
        SchemeRow::DynamicAchievable,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeRow::NoRis => "no_ris",
            SchemeRow::Neutral => "neutral",
            SchemeRow::BothToUser1 => "both_to_user1",
            SchemeRow::BothToUser2 => "both_to_user2",
            SchemeRow::DynamicOuter => "dynamic_outer",
            SchemeRow::DynamicAchievable => "dynamic_achievable",
        }
    }

    /// Association family, merging the two dynamic rows.
    pub fn family(self) -> &'static str {
        match self {
            SchemeRow::DynamicOuter | SchemeRow::DynamicAchievable => "dynamic",
            other => other.label(),
        }
    }

    pub fn is_dynamic(self) -> bool {
        matches!(self, SchemeRow::DynamicOuter | SchemeRow::DynamicAchievable)
    }

    pub fn region(self, params: &ChannelParams, eta: f64) -> Result<RateRegion> {
        Ok(match self {
            SchemeRow::NoRis => regions::no_ris_region(params),
            SchemeRow::Neutral => regions::neutral_region(params),
            SchemeRow::BothToUser1 => regions::both_to_user_region(params, Receiver::One),
            SchemeRow::BothToUser2 => regions::both_to_user_region(params, Receiver::Two),
            SchemeRow::DynamicOuter => regions::outer_region(params, eta, eta)?,
            SchemeRow::DynamicAchievable => regions::dynamic_achievable_region(params, eta)?,
        })
    }
}

impl fmt::Display for SchemeRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scheme: SchemeRow,
    pub max_sum_rate: f64,
    pub sum_rate_point: RatePair,
    pub symmetric_point: RatePair,
    pub max_r1: f64,
    pub max_r2: f64,
    pub eta: Option<f64>,
}

impl ComparisonRow {
    fn from_region(scheme: SchemeRow, region: &RateRegion, eta: Option<f64>) -> Self {
        let (sum_rate_point, max_sum_rate) = region.max_sum_rate();
        ComparisonRow {
            scheme,
            max_sum_rate,
            sum_rate_point,
            symmetric_point: region.symmetric_point(),
            max_r1: region.max_r1(),
            max_r2: region.max_r2(),
            eta,
        }
    }
}

/// One row per scheme in [`SchemeRow::ALL`] order. Dynamic rows use `eta`,
/// defaulting to the balanced fraction.
pub fn compare_all(params: &ChannelParams, eta: Option<f64>) -> Result<Vec<ComparisonRow>> {
    params.validate()?;
    let eta = eta.unwrap_or_else(|| optimal_eta(params));
    SchemeRow::ALL
        .iter()
        .map(|&s| {
            let region = s.region(params, eta)?;
            Ok(ComparisonRow::from_region(s, &region, s.is_dynamic().then_some(eta)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    Sum,
    Weighted(f64, f64),
}

impl Objective {
    fn value(&self, params: &ChannelParams, row: &ComparisonRow) -> Result<f64> {
        match *self {
            Objective::Sum => Ok(row.max_sum_rate),
            Objective::Weighted(w1, w2) => {
                let region = row.scheme.region(params, row.eta.unwrap_or(0.25))?;
                let p = region.max_weighted(w1, w2);
                Ok(w1 * p.r1 + w2 * p.r2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestSchedule {
    pub scheme: SchemeRow,
    pub eta: Option<f64>,
    pub value: f64,
}

/// Scheme maximizing `objective` with the balanced fraction; values within
/// the geometric tolerance count as ties and go to the earlier scheme.
pub fn best_schedule(params: &ChannelParams, objective: Objective) -> Result<BestSchedule> {
    if let Objective::Weighted(w1, w2) = objective {
        if !(w1 >= 0.0 && w2 >= 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "objective weights must be finite and nonnegative, got ({w1}, {w2})"
            )));
        }
    }
    let rows = compare_all(params, None)?;
    let scored = rows
        .iter()
        .map(|r| Ok((r, objective.value(params, r)?)))
        .collect::<Result<Vec<_>>>()?;
    let top = scored.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    let (row, value) = scored
        .into_iter()
        .find(|(_, v)| *v >= top - TOL)
        .expect("six rows");
    Ok(BestSchedule {
        scheme: row.scheme,
        eta: row.eta,
        value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    DeltaN,
    DeltaS,
    DeltaD,
    Eta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::DeltaN => "delta_n",
            SweepParam::DeltaS => "delta_s",
            SweepParam::DeltaD => "delta_d",
            SweepParam::Eta => "eta",
        }
    }

    fn check(self, value: f64) -> Result<f64> {
        match self {
            SweepParam::Eta => check_open("eta", "(0, 1/2)", value, 0.0, 0.5),
            _ => check_open(self.name(), "(0, 1)", value, 0.0, 1.0),
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta_n" | "delta-n" => Ok(SweepParam::DeltaN),
            "delta_s" | "delta-s" => Ok(SweepParam::DeltaS),
            "delta_d" | "delta-d" => Ok(SweepParam::DeltaD),
            "eta" => Ok(SweepParam::Eta),
            other => Err(Error::InvalidConfig(format!("unknown sweep parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Evaluates [`compare_all`] on `steps` evenly spaced values of `varying`,
/// endpoints included. Channel sweeps use `eta` if given, else each point's
/// balanced fraction.
pub fn sweep(
    template: &ChannelParams,
    varying: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    eta: Option<f64>,
) -> Result<Vec<SweepPoint>> {
    if steps < 2 {
        return Err(Error::InvalidConfig(format!("steps must be at least 2, got {steps}")));
    }
    varying.check(from)?;
    varying.check(to)?;
    if from >= to {
        return Err(Error::InvalidConfig(format!(
            "sweep range must be increasing, got {from} to {to}"
        )));
    }
    template.validate()?;
    (0..steps)
        .map(|i| {
            let value = if i == steps - 1 {
                to
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            };
            let mut params = *template;
            let mut point_eta = eta;
            match varying {
                SweepParam::DeltaN => params.delta_n = value,
                SweepParam::DeltaS => params.delta_s = value,
                SweepParam::DeltaD => params.delta_d = value,
                SweepParam::Eta => point_eta = Some(value),
            }
            Ok(SweepPoint {
                value,
                rows: compare_all(&params, point_eta)?,
            })
        })
        .collect()
}
