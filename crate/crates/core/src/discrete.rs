//! Discrete-time flock formation game: arrival times are `t_o - k` for
//! integer offsets `k`, with a unit window.

use std::cmp::Ordering;

use crate::continuous::leader_favorable;
use crate::error::{Error, Result};
use crate::game::{payoffs, Action, ArrivalProfile};
use crate::outcome::{CaseLabel, Diagnostics, SpeOutcome, SpeResult, SpeType, TiedResponses};
use crate::params::GameParams;
use crate::tolerance::Tolerances;

/// Integer offset before the optimal arrival time: `t = t_o - k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiscreteOffset(pub i64);

impl DiscreteOffset {
    pub fn time(self, t_o: f64) -> f64 {
        t_o - self.0 as f64
    }

    /// Offset of `t` when it lies on the integer lattice around `t_o`.
    pub fn of_time(t: f64, t_o: f64) -> Option<DiscreteOffset> {
        let k = t_o - t;
        (k.fract() == 0.0).then_some(DiscreteOffset(k as i64))
    }
}

/// How the follower's trail-versus-withdraw threshold on `k` is read.
///
/// `Resolved` is `sqrt(r * beta2 / 2) + 1`, the value obtained by comparing
/// trailing at `t_o - k + 1` against arriving alone at `t_o`. `Typeset` is
/// the alternative grouping `sqrt(r / 2) * beta2 + 1`; it is kept only so the
/// two readings can be compared against the utility model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdReading {
    #[default]
    Resolved,
    Typeset,
}

impl ThresholdReading {
    pub fn gate(self, r: f64, beta2: f64) -> f64 {
        match self {
            ThresholdReading::Resolved => (r * beta2 / 2.0).sqrt() + 1.0,
            ThresholdReading::Typeset => (r / 2.0).sqrt() * beta2 + 1.0,
        }
    }
}

/// The continuous quantity whose ceiling defines the deterrence offset.
pub(crate) fn deterrence_level(delta: f64, beta2: f64, r: f64) -> f64 {
    ((delta + r / 2.0) * beta2).sqrt().min(delta * beta2 / 4.0 + 1.0)
}

pub(crate) fn k_star_raw(delta: f64, beta2: f64, r: f64, tol: &Tolerances) -> i64 {
    tol.snapped_ceil(deterrence_level(delta, beta2, r)) as i64 - 1
}

/// Smallest leader offset at which the follower stops undercutting.
pub fn k_star(params: &GameParams) -> Result<i64> {
    params.validate()?;
    params.require_unit_window()?;
    Ok(k_star_raw(params.delta_e(), params.beta2, params.r, &Tolerances::default()))
}

/// Follower best responses to an integer leader time among `t1 - 1`,
/// `t1 + 1` (when not after `t_o`) and `t_o`, with utilities. Ties within
/// `EPS_TIE` are all returned, in arrival order.
pub fn follower_best_response_dt(t1: f64, params: &GameParams) -> Result<Vec<(Action, f64)>> {
    follower_best_response_dt_with(t1, params, &Tolerances::default())
}

pub fn follower_best_response_dt_with(
    t1: f64,
    params: &GameParams,
    tol: &Tolerances,
) -> Result<Vec<(Action, f64)>> {
    params.validate()?;
    match DiscreteOffset::of_time(t1, params.t_o) {
        Some(DiscreteOffset(k)) if k >= 0 => {}
        _ => {
            return Err(Error::InvalidParams(format!(
                "leader time {t1} is not t_o - k for an integer k >= 0"
            )))
        }
    }
    let mut candidates = vec![t1 - 1.0];
    if t1 + 1.0 < params.t_o {
        candidates.push(t1 + 1.0);
    }
    candidates.push(params.t_o);
    let scored: Vec<(Action, f64)> = candidates
        .into_iter()
        .map(|t2| (Action::Exact(t2), payoffs(&ArrivalProfile::exact(t1, t2), params).1))
        .collect();
    let best = scored.iter().map(|(_, u)| *u).fold(f64::NEG_INFINITY, f64::max);
    Ok(scored.into_iter().filter(|(_, u)| tol.tied(*u, best)).collect())
}

struct Conditions {
    delta_beta2: f64,
    k_star: i64,
    gate: f64,
    /// Squared comparator: `delta * beta1` in case 3.1, `(delta - r/2) * beta1` in 3.2.
    comparator_sq: f64,
    trailing: bool,
}

fn conditions(params: &GameParams, reading: ThresholdReading, tol: &Tolerances) -> Conditions {
    let d = params.delta_e();
    let k = k_star_raw(d, params.beta2, params.r, tol);
    let gate = reading.gate(params.r, params.beta2);
    let trailing = tol.cmp_cond(k as f64, gate) != Ordering::Greater;
    let comparator_sq = if trailing {
        d * params.beta1
    } else {
        ((d - params.r / 2.0) * params.beta1).max(0.0)
    };
    Conditions {
        delta_beta2: d * params.beta2,
        k_star: k,
        gate,
        comparator_sq,
        trailing,
    }
}

pub fn classify_case_dt(params: &GameParams) -> Result<CaseLabel> {
    classify_case_dt_with(params, ThresholdReading::Resolved, &Tolerances::default())
}

pub fn classify_case_dt_with(
    params: &GameParams,
    reading: ThresholdReading,
    tol: &Tolerances,
) -> Result<CaseLabel> {
    params.validate()?;
    params.require_unit_window()?;
    let c = conditions(params, reading, tol);
    if tol.cmp_cond(c.delta_beta2, 1.0) != Ordering::Greater {
        return Ok(CaseLabel::Dt1);
    }
    if tol.cmp_cond(c.delta_beta2, 4.0) != Ordering::Greater {
        return Ok(CaseLabel::Dt2);
    }
    let k_sq = (c.k_star * c.k_star) as f64;
    let label = match (c.trailing, tol.cmp_cond(k_sq, c.comparator_sq)) {
        (true, Ordering::Less) => CaseLabel::Dt31a,
        (true, Ordering::Greater) => CaseLabel::Dt31b,
        (true, Ordering::Equal) => CaseLabel::Dt31c,
        (false, Ordering::Less) => CaseLabel::Dt32a,
        (false, Ordering::Greater) => CaseLabel::Dt32b,
        (false, Ordering::Equal) => CaseLabel::Dt32c,
    };
    Ok(label)
}

pub fn solve_dt(params: &GameParams) -> Result<SpeResult> {
    solve_dt_with(params, &Tolerances::default())
}

pub fn solve_dt_with(params: &GameParams, tol: &Tolerances) -> Result<SpeResult> {
    let case = classify_case_dt_with(params, ThresholdReading::Resolved, tol)?;
    let c = conditions(params, ThresholdReading::Resolved, tol);
    let t_o = params.t_o;
    let k = c.k_star;
    let make = |k1: i64, k2: i64, tag: SpeType| {
        let profile = ArrivalProfile::exact(t_o - k1 as f64, t_o - k2 as f64);
        SpeOutcome::evaluate(profile, Some(tag), params).with_offsets(k1, k2)
    };
    let t3 = || make(k, k - 1, SpeType::DT3);
    let t4 = || make(k, 0, SpeType::DT4);
    let t5 = || make(0, 1, SpeType::DT5);

    let outcomes = match case {
        CaseLabel::Dt1 => vec![make(0, 0, SpeType::DT1)],
        CaseLabel::Dt2 => vec![make(1, 0, SpeType::DT2)],
        CaseLabel::Dt31a => vec![t3()],
        CaseLabel::Dt31b | CaseLabel::Dt32b => vec![t5()],
        CaseLabel::Dt31c => vec![t3(), t5()],
        CaseLabel::Dt32a => vec![t4()],
        CaseLabel::Dt32c => vec![t4(), t5()],
        _ => unreachable!("discrete classifier returned {case}"),
    };

    let mut diag = Diagnostics::default();
    diag.condition("delta_e_beta2", c.delta_beta2);
    diag.condition("deterrence_level", deterrence_level(params.delta_e(), params.beta2, params.r));
    diag.condition("k_star", k as f64);
    diag.condition("gate", c.gate);
    diag.condition("comparator", c.comparator_sq.sqrt());
    if case.code().starts_with("DT-3") {
        diag.tipping("k_star_time", t_o - k as f64);
    }
    for o in &outcomes {
        let tied = follower_best_response_dt_with(o.leader_time(), params, tol)?;
        if tied.len() > 1 {
            diag.follower_ties.push(TiedResponses {
                t1: o.t1,
                responses: tied.iter().map(|(a, _)| *a).collect(),
                u2: tied[0].1,
            });
        }
    }
    if params.is_degenerate() {
        diag.note("r = 0: flocking carries no benefit");
    }
    Ok(SpeResult::new(case, t_o, outcomes, diag))
}

/// Leader utility at integer time `t1 <= t_o` under the follower's
/// leader-favourable best response.
pub fn leader_value_dt(t1: f64, params: &GameParams) -> Result<f64> {
    let responses: Vec<Action> = follower_best_response_dt(t1, params)?
        .into_iter()
        .map(|(a, _)| a)
        .collect();
    let reply = leader_favorable(t1, &responses, params);
    Ok(payoffs(&ArrivalProfile::new(t1, reply), params).0)
}

/// Discrete labels for a sequence of territory gaps on top of `base`.
pub fn limit_large_gap(base: &GameParams, gaps: &[f64]) -> Result<Vec<CaseLabel>> {
    if gaps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRange("gaps must be strictly increasing".into()));
    }
    gaps.iter().map(|&g| classify_case_dt(&base.with_delta_e(g))).collect()
}
