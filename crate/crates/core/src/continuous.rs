//! Continuous-time flock formation game with a unit window.
//!
//! The follower's best reply to a leader time `t1 <= t_o` is one of three
//! actions: undercut by arriving just before the leader, trail the leader by
//! exactly one unit, or arrive alone at `t_o`. The leader picks the earliest
//! time at which the follower stops undercutting (the tipping point) unless
//! conceding the better territory pays more, in which case no pure
//! equilibrium exists.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::game::{payoffs, Action, ArrivalProfile};
use crate::outcome::{CaseLabel, Diagnostics, SpeOutcome, SpeResult, SpeType, TiedResponses};
use crate::params::GameParams;
use crate::tolerance::Tolerances;

/// Leader times at which the follower is indifferent between undercutting
/// and each of its withdrawal options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TippingPoints {
    /// Withdrawal to `t_o` while still inside the window.
    pub type1: f64,
    /// Withdrawal to `t_o` outside the window.
    pub type2: f64,
    /// Withdrawal to `t1 + 1`.
    pub type3: f64,
}

pub fn tipping_points(params: &GameParams) -> Result<TippingPoints> {
    params.validate()?;
    params.require_unit_window()?;
    let d = params.delta_e();
    let b2 = params.beta2;
    Ok(TippingPoints {
        type1: params.t_o - (b2 * d).sqrt(),
        type2: params.t_o - (b2 * (d + params.r / 2.0)).sqrt(),
        type3: params.t_o - (b2 * d + 1.0) / 2.0,
    })
}

/// Follower best responses to `t1` among the three candidate actions, with
/// the follower's utility. All members tied within `EPS_TIE` are returned,
/// in arrival order.
pub fn follower_best_response_ct(t1: f64, params: &GameParams) -> Result<Vec<(Action, f64)>> {
    follower_best_response_ct_with(t1, params, &Tolerances::default())
}

pub fn follower_best_response_ct_with(
    t1: f64,
    params: &GameParams,
    tol: &Tolerances,
) -> Result<Vec<(Action, f64)>> {
    params.validate()?;
    if t1 > params.t_o {
        return Err(Error::LeaderAfterOptimum { t1, t_o: params.t_o });
    }
    let mut candidates = vec![Action::JustBefore(t1)];
    if t1 + 1.0 < params.t_o {
        candidates.push(Action::Exact(t1 + 1.0));
    }
    candidates.push(Action::Exact(params.t_o));
    let scored: Vec<(Action, f64)> = candidates
        .into_iter()
        .map(|a| (a, payoffs(&ArrivalProfile::new(t1, a), params).1))
        .collect();
    let best = scored.iter().map(|(_, u)| *u).fold(f64::NEG_INFINITY, f64::max);
    Ok(scored.into_iter().filter(|(_, u)| tol.tied(*u, best)).collect())
}

/// Picks the tied response the leader likes best, then the latest one.
pub(crate) fn leader_favorable(t1: f64, responses: &[Action], params: &GameParams) -> Action {
    *responses
        .iter()
        .max_by(|a, b| {
            let ua = payoffs(&ArrivalProfile::new(t1, **a), params).0;
            let ub = payoffs(&ArrivalProfile::new(t1, **b), params).0;
            ua.total_cmp(&ub).then_with(|| a.cmp_arrival(b))
        })
        .expect("best response set is never empty")
}

/// Leader utility at `t1` when the follower resolves ties in the leader's
/// favour.
pub fn leader_value_ct(t1: f64, params: &GameParams) -> Result<f64> {
    let responses: Vec<Action> = follower_best_response_ct(t1, params)?
        .into_iter()
        .map(|(a, _)| a)
        .collect();
    let reply = leader_favorable(t1, &responses, params);
    Ok(payoffs(&ArrivalProfile::new(t1, reply), params).0)
}

struct Conditions {
    delta_beta2: f64,
    window_gate: f64,
    type3_lhs: f64,
    type3_rhs: f64,
    type2_lhs: f64,
    type2_rhs: f64,
}

impl Conditions {
    fn of(params: &GameParams) -> Self {
        let d = params.delta_e();
        let (b1, b2, r) = (params.beta1, params.beta2, params.r);
        let db2 = d * b2;
        Conditions {
            delta_beta2: db2,
            window_gate: (2.0 * r * b2).sqrt() + 1.0,
            type3_lhs: 4.0 * d * b1,
            type3_rhs: (db2 + 1.0) * (db2 + 1.0),
            type2_lhs: (d - r / 2.0) * b1,
            type2_rhs: (d + r / 2.0) * b2,
        }
    }

    fn type3_holds(&self, tol: &Tolerances) -> bool {
        tol.cmp_cond(self.type3_lhs, self.type3_rhs) != Ordering::Less
    }

    fn type2_holds(&self, tol: &Tolerances) -> bool {
        tol.cmp_cond(self.type2_lhs, self.type2_rhs) != Ordering::Less
    }

    fn record(&self, diag: &mut Diagnostics) {
        diag.condition("delta_e_beta2", self.delta_beta2);
        diag.condition("window_gate", self.window_gate);
        diag.condition("type3_lhs", self.type3_lhs);
        diag.condition("type3_rhs", self.type3_rhs);
        diag.condition("type2_lhs", self.type2_lhs);
        diag.condition("type2_rhs", self.type2_rhs);
    }
}

pub fn classify_case_ct(params: &GameParams) -> Result<CaseLabel> {
    classify_case_ct_with(params, &Tolerances::default())
}

pub fn classify_case_ct_with(params: &GameParams, tol: &Tolerances) -> Result<CaseLabel> {
    params.validate()?;
    params.require_unit_window()?;
    let c = Conditions::of(params);
    if tol.cmp_cond(c.delta_beta2, 1.0) != Ordering::Greater {
        return Ok(CaseLabel::Ct1);
    }
    let label = match tol.cmp_cond(c.delta_beta2, c.window_gate) {
        Ordering::Less if c.type3_holds(tol) => CaseLabel::Ct21a,
        Ordering::Less => CaseLabel::Ct21b,
        Ordering::Greater if c.type2_holds(tol) => CaseLabel::Ct22a,
        Ordering::Greater => CaseLabel::Ct22b,
        Ordering::Equal if c.type2_holds(tol) || c.type3_holds(tol) => CaseLabel::Ct23a,
        Ordering::Equal => CaseLabel::Ct23b,
    };
    Ok(label)
}

/// Indifference residuals at the tipping points where each applies; `None`
/// where the corresponding withdrawal option is not the relevant one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndifferenceResiduals {
    pub type1: Option<f64>,
    pub type2: Option<f64>,
    pub type3: Option<f64>,
}

impl IndifferenceResiduals {
    pub fn max(&self) -> f64 {
        [self.type1, self.type2, self.type3]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

pub fn indifference_residuals(params: &GameParams) -> Result<IndifferenceResiduals> {
    let tp = tipping_points(params)?;
    let t_o = params.t_o;
    let undercut = |t1: f64| payoffs(&ArrivalProfile::new(t1, Action::JustBefore(t1)), params).1;
    let stay = |t1: f64, t2: f64| payoffs(&ArrivalProfile::exact(t1, t2), params).1;

    let type1 = (t_o - tp.type1 <= 1.0).then(|| (undercut(tp.type1) - stay(tp.type1, t_o)).abs());
    let type2 = (t_o - tp.type2 > 1.0)
        .then(|| (undercut(tp.type2) - (params.e2 - params.r)).abs());
    let type3 = (tp.type3 + 1.0 <= t_o)
        .then(|| (undercut(tp.type3) - stay(tp.type3, tp.type3 + 1.0)).abs());
    Ok(IndifferenceResiduals { type1, type2, type3 })
}

pub fn solve_ct(params: &GameParams) -> Result<SpeResult> {
    solve_ct_with(params, &Tolerances::default())
}

pub fn solve_ct_with(params: &GameParams, tol: &Tolerances) -> Result<SpeResult> {
    let case = classify_case_ct_with(params, tol)?;
    let tp = tipping_points(params)?;
    let c = Conditions::of(params);
    let t_o = params.t_o;

    let type1 = || SpeOutcome::evaluate(ArrivalProfile::exact(tp.type1, t_o), Some(SpeType::CT1), params);
    let type2 = || SpeOutcome::evaluate(ArrivalProfile::exact(tp.type2, t_o), Some(SpeType::CT2), params);
    let type3 = || {
        SpeOutcome::evaluate(ArrivalProfile::exact(tp.type3, tp.type3 + 1.0), Some(SpeType::CT3), params)
    };

    let outcomes = match case {
        CaseLabel::Ct1 => vec![type1()],
        CaseLabel::Ct21a => vec![type3()],
        CaseLabel::Ct22a => vec![type2()],
        CaseLabel::Ct23a => {
            let mut both = Vec::new();
            if c.type2_holds(tol) {
                both.push(type2());
            }
            if c.type3_holds(tol) {
                both.push(type3());
            }
            both
        }
        _ => Vec::new(),
    };

    let mut diag = Diagnostics::default();
    diag.tipping("type1", tp.type1);
    diag.tipping("type2", tp.type2);
    diag.tipping("type3", tp.type3);
    c.record(&mut diag);
    let resign = payoffs(&ArrivalProfile::new(t_o, Action::JustBefore(t_o)), params).0;
    diag.condition("resignation_u1", resign);
    for (key, t1) in [("type1", tp.type1), ("type2", tp.type2), ("type3", tp.type3)] {
        if t1 <= t_o {
            diag.condition(&format!("leader_u1_at_{key}"), leader_value_ct(t1, params)?);
        }
    }
    let residuals = indifference_residuals(params)?;
    for (key, value) in [
        ("residual_type1", residuals.type1),
        ("residual_type2", residuals.type2),
        ("residual_type3", residuals.type3),
    ] {
        if let Some(v) = value {
            diag.condition(key, v);
        }
    }
    for o in &outcomes {
        let t1 = o.leader_time();
        let tied = follower_best_response_ct_with(t1, params, tol)?;
        if tied.len() > 1 {
            diag.follower_ties.push(TiedResponses {
                t1: o.t1,
                responses: tied.iter().map(|(a, _)| *a).collect(),
                u2: tied[0].1,
            });
        }
        if tol.cmp_cond(t1 + 1.0, t_o) == Ordering::Equal {
            diag.note("leader sits exactly one unit before t_o; trailing and arriving at t_o coincide");
        }
    }
    if case == CaseLabel::Ct23a || case == CaseLabel::Ct23b {
        diag.note("on the boundary where trailing and arriving alone tie for the follower");
    }
    if params.is_degenerate() {
        diag.note("r = 0: flocking carries no benefit");
    }
    Ok(SpeResult::new(case, t_o, outcomes, diag))
}

/// No arrival later than `t_o`.
pub fn check_prop1_ct(outcome: &SpeOutcome, t_o: f64) -> bool {
    outcome.leader_time() <= t_o && outcome.follower_time() <= t_o
}
