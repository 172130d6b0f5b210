//! The utility model: territory benefit, quadratic travel cost and the
//! shared predation risk inside the flocking window.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numfmt::round_sig;
use crate::params::GameParams;

/// Slack applied to the inclusive window test so that `t1 + 1 - t1` rounding
/// to a hair above 1 still counts as inside a unit window.
const WINDOW_SLACK: f64 = 1e-12;

/// An arrival time.
///
/// `JustBefore(t)` is the limit `t - ε` as `ε → 0⁺`. No ε is ever
/// materialized; every quantity involving it is evaluated at the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Exact(f64),
    JustBefore(f64),
}

impl Action {
    /// The limit point of the action.
    pub fn time(&self) -> f64 {
        match *self {
            Action::Exact(t) | Action::JustBefore(t) => t,
        }
    }

    pub fn is_just_before(&self) -> bool {
        matches!(self, Action::JustBefore(_))
    }

    /// Arrival order: `JustBefore(t)` is strictly earlier than `Exact(t)` and
    /// strictly later than every `Exact(s)` with `s < t`.
    pub fn cmp_arrival(&self, other: &Action) -> Ordering {
        match self.time().total_cmp(&other.time()) {
            Ordering::Equal => match (self, other) {
                (Action::JustBefore(_), Action::Exact(_)) => Ordering::Less,
                (Action::Exact(_), Action::JustBefore(_)) => Ordering::Greater,
                _ => Ordering::Equal,
            },
            ord => ord,
        }
    }

    fn shifted(&self, by: f64) -> Action {
        match *self {
            Action::Exact(t) => Action::Exact(t + by),
            Action::JustBefore(t) => Action::JustBefore(t + by),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActionRepr {
    Exact(f64),
    JustBefore { just_before: f64 },
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Action::Exact(t) => ActionRepr::Exact(round_sig(t)),
            Action::JustBefore(t) => ActionRepr::JustBefore {
                just_before: round_sig(t),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match ActionRepr::deserialize(d)? {
            ActionRepr::Exact(t) => Action::Exact(t),
            ActionRepr::JustBefore { just_before } => Action::JustBefore(just_before),
        })
    }
}

/// Joint action. The leader always commits to an exact time; only the
/// follower can use the limit action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProfile {
    pub t1: f64,
    pub t2: Action,
}

impl ArrivalProfile {
    pub fn new(t1: f64, t2: Action) -> Self {
        ArrivalProfile { t1, t2 }
    }

    pub fn exact(t1: f64, t2: f64) -> Self {
        ArrivalProfile {
            t1,
            t2: Action::Exact(t2),
        }
    }

    pub fn leader(&self) -> Action {
        Action::Exact(self.t1)
    }

    /// Both arrival times moved by `by`.
    pub fn shifted(&self, by: f64) -> Self {
        ArrivalProfile {
            t1: self.t1 + by,
            t2: self.t2.shifted(by),
        }
    }
}

/// How the two arrivals relate to the flocking window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlockKind {
    StrictFlock,
    Flock,
    NoFlock,
}

impl FlockKind {
    pub fn of(profile: &ArrivalProfile, w: f64) -> FlockKind {
        if profile.t2 == Action::Exact(profile.t1) {
            FlockKind::StrictFlock
        } else if in_window(profile, w) {
            FlockKind::Flock
        } else {
            FlockKind::NoFlock
        }
    }
}

/// Per-agent decomposition of the utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub benefit: f64,
    pub travel_cost: f64,
    pub risk: f64,
    pub total: f64,
}

impl UtilityBreakdown {
    fn assemble(benefit: f64, travel_cost: f64, risk: f64) -> Self {
        UtilityBreakdown {
            benefit,
            travel_cost,
            risk,
            total: benefit - travel_cost - risk,
        }
    }
}

/// Territory assignment: earlier arrival takes `E1`; an exact tie goes to
/// the stronger agent 1.
pub fn assign_benefit(profile: &ArrivalProfile, params: &GameParams) -> (f64, f64) {
    match profile.t2.cmp_arrival(&profile.leader()) {
        Ordering::Less => (params.e2, params.e1),
        _ => (params.e1, params.e2),
    }
}

/// `(t - t_o)^2 / beta + c_o`, evaluated at the limit point for
/// `JustBefore`.
pub fn travel_cost(t: Action, beta: f64, t_o: f64, c_o: f64) -> Result<f64> {
    if beta <= 0.0 || beta.is_nan() {
        return Err(Error::NonPositiveStrength(beta));
    }
    Ok(cost_unchecked(t.time(), beta, t_o, c_o))
}

#[inline]
fn cost_unchecked(t: f64, beta: f64, t_o: f64, c_o: f64) -> f64 {
    let d = t - t_o;
    d * d / beta + c_o
}

fn in_window(profile: &ArrivalProfile, w: f64) -> bool {
    if w == 0.0 {
        // strict flocking only: identical exact times
        return profile.t2 == Action::Exact(profile.t1);
    }
    let (a, b) = (profile.t1, profile.t2.time());
    let slack = WINDOW_SLACK * 1f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= w + slack
}

/// Each agent pays `r / n` where `n` counts the agents inside its window;
/// with two agents both pay the same amount.
pub fn predation_risk(profile: &ArrivalProfile, params: &GameParams) -> (f64, f64) {
    let risk = if in_window(profile, params.w) {
        params.r / 2.0
    } else {
        params.r
    };
    (risk, risk)
}

/// Full utility breakdown for both agents.
pub fn utility(
    profile: &ArrivalProfile,
    params: &GameParams,
) -> Result<(UtilityBreakdown, UtilityBreakdown)> {
    let c1 = travel_cost(profile.leader(), params.beta1, params.t_o, params.c_o1)?;
    let c2 = travel_cost(profile.t2, params.beta2, params.t_o, params.c_o2)?;
    let (e1, e2) = assign_benefit(profile, params);
    let (p1, p2) = predation_risk(profile, params);
    Ok((
        UtilityBreakdown::assemble(e1, c1, p1),
        UtilityBreakdown::assemble(e2, c2, p2),
    ))
}

/// Total utilities `(u1, u2)` for already validated parameters. Same
/// expression order as [`utility`], so the totals agree bit for bit.
#[inline]
pub fn payoffs(profile: &ArrivalProfile, params: &GameParams) -> (f64, f64) {
    let c1 = cost_unchecked(profile.t1, params.beta1, params.t_o, params.c_o1);
    let c2 = cost_unchecked(profile.t2.time(), params.beta2, params.t_o, params.c_o2);
    let (e1, e2) = assign_benefit(profile, params);
    let (p1, p2) = predation_risk(profile, params);
    (e1 - c1 - p1, e2 - c2 - p2)
}
