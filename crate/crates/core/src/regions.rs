//! Rate regions of the two-user network and 2-D polygon geometry on them.
//!
//! Every region is an intersection of half-planes `a1*R1 + a2*R2 <= b`
//! (with `a1, a2, b >= 0`) and the quadrant `R1, R2 >= 0`. Vertices are
//! derived on demand.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Receiver};
use crate::error::{check_open, Error, Result};

/// Geometric tolerance for membership and vertex deduplication.
pub const TOL: f64 = 1e-12;

/// Quantities that parametrize the outer bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub beta: f64,
    pub delta_bar_1: f64,
    pub delta_bar_2: f64,
    /// Whether `delta_s <= delta_n (1 - delta_d) / (1 - delta_n)`.
    pub first_branch: bool,
}

/// Boundary value of `delta_s` at which the two expressions for beta meet.
pub fn beta_threshold(params: &ChannelParams) -> f64 {
    params.delta_n * (1.0 - params.delta_d) / (1.0 - params.delta_n)
}

/// `(1 - delta_d delta_n) / (1 - delta_n)`: the weight on the weaker user
/// when one receiver has double aid and the other none.
pub fn double_aid_weight(params: &ChannelParams) -> f64 {
    (1.0 - params.delta_d * params.delta_n) / (1.0 - params.delta_n)
}

pub fn is_first_branch(params: &ChannelParams) -> bool {
    params.delta_s <= beta_threshold(params)
}

/// Both candidate values of beta, first branch then second.
pub fn beta_branches(params: &ChannelParams) -> (f64, f64) {
    (double_aid_weight(params), 1.0 + params.delta_s)
}

pub fn beta(params: &ChannelParams) -> f64 {
    let (first, second) = beta_branches(params);
    if is_first_branch(params) {
        first
    } else {
        second
    }
}

fn check_eta(name: &'static str, eta: f64) -> Result<f64> {
    check_open(name, "(0, 1/2)", eta, 0.0, 0.5)
}

/// Time-averaged erasure probabilities of the two receivers under the
/// dynamic schedule.
pub fn delta_bars(params: &ChannelParams, eta1: f64, eta2: f64) -> Result<(f64, f64)> {
    check_eta("eta1", eta1)?;
    check_eta("eta2", eta2)?;
    let rest = 1.0 - eta1 - eta2;
    let d1 = eta1 * params.delta_d + eta2 * params.delta_n + rest * params.delta_s;
    let d2 = eta1 * params.delta_n + eta2 * params.delta_d + rest * params.delta_s;
    Ok((d1, d2))
}

pub fn derived_params(params: &ChannelParams, eta1: f64, eta2: f64) -> Result<DerivedParams> {
    let (delta_bar_1, delta_bar_2) = delta_bars(params, eta1, eta2)?;
    Ok(DerivedParams {
        beta: beta(params),
        delta_bar_1,
        delta_bar_2,
        first_branch: is_first_branch(params),
    })
}

/// `a1 * R1 + a2 * R2 <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl Constraint {
    pub fn new(a1: f64, a2: f64, b: f64) -> Self {
        Constraint { a1, a2, b }
    }

    fn value(&self, p: RatePair) -> f64 {
        self.a1 * p.r1 + self.a2 * p.r2
    }

    /// Divided through by the R2 coefficient.
    pub fn normalized_by_r2(&self) -> Option<(f64, f64)> {
        (self.a2 > 0.0).then(|| (self.a1 / self.a2, self.b / self.a2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Self {
        RatePair { r1, r2 }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }

    pub fn scaled(&self, k: f64) -> Self {
        RatePair::new(self.r1 * k, self.r2 * k)
    }

    fn dist(&self, other: &RatePair) -> f64 {
        (self.r1 - other.r1).hypot(self.r2 - other.r2)
    }
}

/// Bounded convex polygon in the first quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    constraints: Vec<Constraint>,
}

impl RateRegion {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            if !(c.a1 >= 0.0 && c.a2 >= 0.0 && c.b >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "constraint coefficients must be nonnegative: {c:?}"
                )));
            }
        }
        let bounds_r1 = constraints.iter().any(|c| c.a1 > 0.0);
        let bounds_r2 = constraints.iter().any(|c| c.a2 > 0.0);
        if !(bounds_r1 && bounds_r2) {
            return Err(Error::UnboundedRegion);
        }
        Ok(RateRegion { constraints })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, p: RatePair) -> bool {
        p.r1 >= -TOL
            && p.r2 >= -TOL
            && self
                .constraints
                .iter()
                .all(|c| c.value(p) <= c.b + TOL * c.b.abs().max(1.0))
    }

    /// Vertices in counterclockwise order starting at the origin.
    pub fn vertices(&self) -> Vec<RatePair> {
        let mut lines: Vec<Constraint> = self.constraints.clone();
        lines.push(Constraint::new(-1.0, 0.0, 0.0));
        lines.push(Constraint::new(0.0, -1.0, 0.0));

        let mut found: Vec<RatePair> = Vec::new();
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (p, q) = (lines[i], lines[j]);
                let det = p.a1 * q.a2 - p.a2 * q.a1;
                if det.abs() < 1e-15 {
                    continue;
                }
                let r1 = (p.b * q.a2 - p.a2 * q.b) / det;
                let r2 = (p.a1 * q.b - p.b * q.a1) / det;
                // clean signed zeros and sub-tolerance noise on the axes
                let snap = |x: f64| if x.abs() < TOL { 0.0 } else { x };
                let v = RatePair::new(snap(r1), snap(r2));
                if self.contains(v) && found.iter().all(|w| w.dist(&v) > TOL) {
                    found.push(v);
                }
            }
        }

        let n = found.len() as f64;
        let cx = found.iter().map(|v| v.r1).sum::<f64>() / n;
        let cy = found.iter().map(|v| v.r2).sum::<f64>() / n;
        found.sort_by(|a, b| {
            let ta = (a.r2 - cy).atan2(a.r1 - cx);
            let tb = (b.r2 - cy).atan2(b.r1 - cx);
            ta.total_cmp(&tb)
        });
        if let Some(start) = found
            .iter()
            .position(|v| v.r1 == 0.0 && v.r2 == 0.0)
        {
            found.rotate_left(start);
        }
        found
    }

    /// Vertex maximizing `w1*R1 + w2*R2`; ties go to larger R1, then larger R2.
    pub fn max_weighted(&self, w1: f64, w2: f64) -> RatePair {
        let mut best: Option<(RatePair, f64)> = None;
        for v in self.vertices() {
            let val = w1 * v.r1 + w2 * v.r2;
            best = match best {
                None => Some((v, val)),
                Some((b, bv)) => {
                    let better = if (val - bv).abs() <= TOL {
                        (v.r1, v.r2) > (b.r1, b.r2)
                    } else {
                        val > bv
                    };
                    Some(if better { (v, val) } else { (b, bv) })
                }
            };
        }
        best.map(|(v, _)| v).unwrap_or_default()
    }

    pub fn max_sum_rate(&self) -> (RatePair, f64) {
        let p = self.max_weighted(1.0, 1.0);
        (p, p.sum())
    }

    /// Boundary point on the diagonal R1 = R2.
    pub fn symmetric_point(&self) -> RatePair {
        let t = self
            .constraints
            .iter()
            .filter(|c| c.a1 + c.a2 > 0.0)
            .map(|c| c.b / (c.a1 + c.a2))
            .fold(f64::INFINITY, f64::min);
        RatePair::new(t, t)
    }

    pub fn max_r1(&self) -> f64 {
        self.max_weighted(1.0, 0.0).r1
    }

    pub fn max_r2(&self) -> f64 {
        self.max_weighted(0.0, 1.0).r2
    }
}

/// Weighted-sum pair `{R1 + w2 R2 <= b2, w1 R1 + R2 <= b1}`.
fn pair_region(w2: f64, b2: f64, w1: f64, b1: f64) -> RateRegion {
    RateRegion::new(vec![Constraint::new(1.0, w2, b2), Constraint::new(w1, 1.0, b1)])
        .expect("weights and bounds are positive")
}

/// Capacity region of a homogeneous erasure broadcast channel with feedback.
fn homogeneous_region(delta: f64) -> RateRegion {
    let b = 1.0 - delta * delta;
    pair_region(1.0 + delta, b, 1.0 + delta, b)
}

/// Outer bound for the dynamic association with fractions `eta1`, `eta2`.
pub fn outer_region(params: &ChannelParams, eta1: f64, eta2: f64) -> Result<RateRegion> {
    let d = derived_params(params, eta1, eta2)?;
    Ok(pair_region(
        d.beta,
        d.beta * (1.0 - d.delta_bar_2),
        d.beta,
        d.beta * (1.0 - d.delta_bar_1),
    ))
}

pub fn no_ris_region(params: &ChannelParams) -> RateRegion {
    homogeneous_region(params.delta_n)
}

/// One surface per receiver for the whole block.
pub fn neutral_region(params: &ChannelParams) -> RateRegion {
    homogeneous_region(params.delta_s)
}

/// Both surfaces assist `user` for the whole block.
pub fn both_to_user_region(params: &ChannelParams, user: Receiver) -> RateRegion {
    let (strong, weak) = match user {
        Receiver::One => (params.delta_d, params.delta_n),
        Receiver::Two => (params.delta_n, params.delta_d),
    };
    let b = 1.0 - params.delta_d * params.delta_n;
    // R1 + (b / (1 - d2)) R2 <= b and (b / (1 - d1)) R1 + R2 <= b
    pair_region(b / (1.0 - weak), b, b / (1.0 - strong), b)
}

/// Region achieved by the three-phase protocol under the symmetric dynamic
/// association with fraction `eta`.
pub fn dynamic_achievable_region(params: &ChannelParams, eta: f64) -> Result<RateRegion> {
    check_eta("eta", eta)?;
    let w = double_aid_weight(params);
    let delta_bar = eta * (params.delta_d + params.delta_n) + (1.0 - 2.0 * eta) * params.delta_s;
    let b = w * (1.0 - delta_bar);
    Ok(pair_region(w, b, w, b))
}
