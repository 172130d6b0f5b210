//! Strict-flocking baseline: only identical arrival times share the risk
//! (`w = 0`). Two outcomes are possible, cooperation at `(t_o, t_o)` or
//! deterrence with the follower alone at `t_o`.

use std::cmp::Ordering;

use crate::error::Result;
use crate::game::{payoffs, Action, ArrivalProfile};
use crate::outcome::{CaseLabel, Diagnostics, SpeOutcome, SpeResult, SpeType};
use crate::params::GameParams;
use crate::tolerance::Tolerances;

/// Largest territory gap at which the follower still joins the leader at
/// `t_o` instead of undercutting: `u2(t_o, t_o) = E2 - r/2 >= E1 - r`.
pub fn cooperation_threshold(params: &GameParams) -> f64 {
    params.r / 2.0
}

pub fn solve_sfg(params: &GameParams) -> Result<SpeResult> {
    solve_sfg_with(params, &Tolerances::default())
}

pub fn solve_sfg_with(params: &GameParams, tol: &Tolerances) -> Result<SpeResult> {
    params.validate()?;
    let strict = params.with_window(0.0);
    let t_o = params.t_o;
    let d = params.delta_e();
    let threshold = cooperation_threshold(params);
    let deter_t1 = t_o - (d * params.beta2).sqrt();

    let mut diag = Diagnostics::default();
    diag.condition("delta_e", d);
    diag.condition("cooperation_threshold", threshold);
    diag.tipping("deterrence", deter_t1);

    let side = tol.cmp_cond(d, threshold);
    let (case, outcome) = if side != Ordering::Greater {
        if side == Ordering::Equal {
            diag.note("gap equals r/2: boundary assigned to cooperation");
        }
        let o = SpeOutcome::evaluate(ArrivalProfile::exact(t_o, t_o), Some(SpeType::SfgCoop), &strict);
        (CaseLabel::SfgCoop, o)
    } else {
        let o = SpeOutcome::evaluate(
            ArrivalProfile::exact(deter_t1, t_o),
            Some(SpeType::SfgDeter),
            &strict,
        );
        let undercut = payoffs(&ArrivalProfile::new(deter_t1, Action::JustBefore(deter_t1)), &strict).1;
        diag.condition("deterrence_residual", (undercut - o.u2).abs());
        diag.condition("leader_margin", o.u1 - (params.e2 - params.r));
        (CaseLabel::SfgDeter, o)
    };
    if params.is_degenerate() {
        diag.note("r = 0: flocking carries no benefit");
    }
    Ok(SpeResult::new(case, t_o, vec![outcome], diag))
}
