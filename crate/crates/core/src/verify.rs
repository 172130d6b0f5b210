//! Solver-versus-oracle comparison on single instances and seeded batches.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::continuous::{indifference_residuals, solve_ct};
use crate::discrete::solve_dt;
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::game::Action;
use crate::numfmt::format_sig;
use crate::oracle::{
    build_best_response_table_with, check_ct_step, resolve_table, GridSpec, OracleConfig, OracleResult, TieMode,
};
use crate::outcome::{CaseLabel, Game, SpeOutcome, SpeType};
use crate::params::GameParams;
use crate::sampling::draw_params;
use crate::sfg::solve_sfg;
use crate::tolerance::Tolerances;

/// Grid step for the continuous-game oracle.
pub const CT_STEP: f64 = 1.0 / 1024.0;
/// Grid step for the strict-flocking oracle.
pub const SFG_STEP: f64 = 1.0 / 256.0;
/// Utility agreement required between solver and oracle.
pub const UTILITY_TOL: f64 = 1e-9;
/// Largest accepted indifference residual at a tipping point.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Oracle grid step; `None` picks the per-game default.
    pub step: Option<f64>,
    pub exec: Execution,
    pub tol: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            step: None,
            exec: Execution::default(),
            tol: Tolerances::default(),
        }
    }
}

impl VerifyOptions {
    pub fn step_for(&self, game: Game) -> f64 {
        self.step.unwrap_or(match game {
            Game::Discrete => 1.0,
            Game::Continuous => CT_STEP,
            Game::StrictFlocking => SFG_STEP,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    pub params: GameParams,
    pub case: CaseLabel,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<String>,
    /// Follower ties at equilibrium leader times.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<String>,
    /// Oracle outcomes in any tie mode with an arrival after `t_o`.
    pub late_arrivals: usize,
    /// Outcomes the supportable-outcome criterion adds beyond the
    /// leader-favourable ones.
    pub extra_supportable: usize,
}

fn action_text(a: Action) -> String {
    match a {
        Action::Exact(t) => format_sig(t),
        Action::JustBefore(t) => format!("{}-", format_sig(t)),
    }
}

fn outcome_text(o: &SpeOutcome) -> String {
    format!("({}, {})", action_text(o.t1), action_text(o.t2))
}

fn outcomes_text(os: &[SpeOutcome]) -> String {
    let parts: Vec<String> = os.iter().map(outcome_text).collect();
    format!("[{}]", parts.join(", "))
}

fn tie_notes(oracle: &OracleResult) -> Vec<String> {
    oracle
        .ties_on_path()
        .iter()
        .map(|t| {
            let rs: Vec<String> = t.responses.iter().map(|a| action_text(*a)).collect();
            format!("follower tie at t1 = {}: {{{}}}", action_text(t.t1), rs.join(", "))
        })
        .collect()
}

/// Builds the table once and resolves it under both tie modes.
fn run_oracle(
    params: &GameParams,
    grid: GridSpec,
    config: &OracleConfig,
) -> Result<(OracleResult, OracleResult)> {
    let table = build_best_response_table_with(params, grid, config)?;
    let favorable = resolve_table(table.clone(), params, TieMode::LeaderFavorable, &config.tol);
    let supportable = resolve_table(table, params, TieMode::AllSupportable, &config.tol);
    Ok((favorable, supportable))
}

pub fn verify_instance(params: &GameParams, game: Game, options: &VerifyOptions) -> Result<InstanceReport> {
    params.validate()?;
    let step = options.step_for(game);
    let config = OracleConfig {
        just_before: game != Game::Discrete,
        exec: options.exec,
        tol: options.tol,
        ..OracleConfig::default()
    };
    let (solved, oracle_params, grid) = match game {
        Game::Discrete => (solve_dt(params)?, *params, GridSpec::unit(params)?),
        Game::Continuous => {
            check_ct_step(step)?;
            (solve_ct(params)?, *params, GridSpec::fine(params, step)?)
        }
        Game::StrictFlocking => {
            let strict = params.with_window(0.0);
            (solve_sfg(params)?, strict, GridSpec::fine(&strict, step)?)
        }
    };
    let (favorable, supportable) = run_oracle(&oracle_params, grid, &config)?;
    let mismatch = match game {
        Game::Discrete => compare_exact(&solved.outcomes, &favorable.outcomes),
        Game::Continuous => compare_continuous(params, &solved.outcomes, &favorable, step),
        Game::StrictFlocking => compare_strict(params, &solved.outcomes, &favorable, step),
    };
    let late = favorable.late_arrivals() + supportable.late_arrivals();
    let mismatch = match (mismatch, late) {
        (Some(m), _) => Some(m),
        (None, 0) => None,
        (None, n) => Some(format!("{n} oracle outcomes arrive after t_o")),
    };
    Ok(InstanceReport {
        trial: None,
        params: *params,
        case: solved.case,
        passed: mismatch.is_none(),
        mismatch,
        ties: tie_notes(&favorable),
        late_arrivals: late,
        extra_supportable: supportable.outcomes.len().saturating_sub(favorable.outcomes.len()),
    })
}

fn compare_exact(solved: &[SpeOutcome], oracle: &[SpeOutcome]) -> Option<String> {
    let same = solved.len() == oracle.len()
        && solved.iter().zip(oracle).all(|(a, b)| {
            a.t1 == b.t1
                && a.t2 == b.t2
                && (a.u1 - b.u1).abs() <= UTILITY_TOL
                && (a.u2 - b.u2).abs() <= UTILITY_TOL
        });
    (!same).then(|| format!("solver {} vs oracle {}", outcomes_text(solved), outcomes_text(oracle)))
}

fn compare_continuous(
    params: &GameParams,
    solved: &[SpeOutcome],
    oracle: &OracleResult,
    step: f64,
) -> Option<String> {
    if let Ok(res) = indifference_residuals(params) {
        if res.max() >= RESIDUAL_TOL {
            return Some(format!("indifference residual {} at a tipping point", res.max()));
        }
    }
    if solved.is_empty() {
        let cap = params.e2 - params.r / 2.0 + 10.0 * step;
        return (oracle.leader_value > cap).then(|| {
            format!(
                "no closed-form equilibrium but the grid leader reaches u1 = {} above the cap {}",
                oracle.leader_value, cap
            )
        });
    }
    let near = |a: &SpeOutcome, b: &SpeOutcome| {
        (a.leader_time() - b.leader_time()).abs() <= 4.0 * step
            && (a.follower_time() - b.follower_time()).abs() <= 4.0 * step
    };
    let unmatched: Vec<&SpeOutcome> = solved
        .iter()
        .filter(|s| !oracle.outcomes.iter().any(|o| near(s, o)))
        .collect();
    (!unmatched.is_empty()).then(|| {
        format!(
            "solver {} not within {} of oracle {}",
            outcomes_text(solved),
            4.0 * step,
            outcomes_text(&oracle.outcomes)
        )
    })
}

fn compare_strict(
    params: &GameParams,
    solved: &[SpeOutcome],
    oracle: &OracleResult,
    step: f64,
) -> Option<String> {
    let t_o = params.t_o;
    let coop = |o: &SpeOutcome| o.t1 == Action::Exact(t_o) && o.t2 == Action::Exact(t_o);
    let ok = match (solved, oracle.outcomes.as_slice()) {
        ([s], [o]) => match s.type_tag {
            Some(SpeType::SfgCoop) => coop(o),
            _ => {
                !coop(o)
                    && (s.leader_time() - o.leader_time()).abs() <= 2.0 * step
                    && (s.follower_time() - o.follower_time()).abs() <= 2.0 * step
            }
        },
        _ => false,
    };
    (!ok).then(|| format!("solver {} vs oracle {}", outcomes_text(solved), outcomes_text(&oracle.outcomes)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub game: Game,
    pub trials: usize,
    pub passed: usize,
    pub branch_hits: BTreeMap<String, usize>,
    /// Instances with a follower tie on the equilibrium path.
    pub tie_instances: usize,
    /// Instances where the supportable-outcome criterion admits more
    /// outcomes than leader-favourable resolution.
    pub supportable_divergences: usize,
    pub late_arrivals: usize,
    pub first_failure: Option<InstanceReport>,
    /// Tie notes of the first tied instance.
    pub tie_example: Vec<String>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.trials - self.passed
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.trials
    }

    fn from_reports(game: Game, reports: &[InstanceReport]) -> Self {
        let mut branch_hits = BTreeMap::new();
        for r in reports {
            *branch_hits.entry(r.case.code().to_string()).or_insert(0) += 1;
        }
        VerifyReport {
            game,
            trials: reports.len(),
            passed: reports.iter().filter(|r| r.passed).count(),
            branch_hits,
            tie_instances: reports.iter().filter(|r| !r.ties.is_empty()).count(),
            supportable_divergences: reports.iter().filter(|r| r.extra_supportable > 0).count(),
            late_arrivals: reports.iter().map(|r| r.late_arrivals).sum(),
            first_failure: reports.iter().find(|r| !r.passed).cloned(),
            tie_example: reports
                .iter()
                .find(|r| !r.ties.is_empty())
                .map(|r| r.ties.clone())
                .unwrap_or_default(),
        }
    }

    /// Human-readable report.
    pub fn render(&self) -> String {
        let what = match self.game {
            Game::Discrete => "exact matches",
            Game::Continuous => "within grid tolerance",
            Game::StrictFlocking => "matching type and time",
        };
        let mut out = format!("{}/{} {what}\n", self.passed, self.trials);
        let hits: Vec<String> = self.branch_hits.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!("branches: {}\n", hits.join(" ")));
        out.push_str(&format!("follower ties on path: {} instances\n", self.tie_instances));
        for note in &self.tie_example {
            out.push_str(&format!("  {note}\n"));
        }
        out.push_str(&format!(
            "supportable outcomes beyond leader-favourable: {} instances\n",
            self.supportable_divergences
        ));
        out.push_str(&format!("arrivals after t_o: {}\n", self.late_arrivals));
        if let Some(f) = &self.first_failure {
            out.push_str("first failure:\n");
            out.push_str(&serde_json::to_string_pretty(f).expect("report serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn verify_params(list: &[GameParams], game: Game, options: &VerifyOptions) -> Result<VerifyReport> {
    let inner = VerifyOptions {
        exec: Execution::Sequential,
        ..*options
    };
    let reports: Result<Vec<InstanceReport>> =
        exec::map_slice(options.exec, list, |p| verify_instance(p, game, &inner))
            .into_iter()
            .collect();
    Ok(VerifyReport::from_reports(game, &reports?))
}

/// Draws `trials` instances from the seeded generator and verifies each.
pub fn verify_random(game: Game, seed: u64, trials: u64, options: &VerifyOptions) -> Result<VerifyReport> {
    let inner = VerifyOptions {
        exec: Execution::Sequential,
        ..*options
    };
    let reports: Result<Vec<InstanceReport>> = exec::map_range(options.exec, 0, trials as i64 - 1, |i| {
        let p = draw_params(seed, i as u64);
        verify_instance(&p, game, &inner).map(|mut r| {
            r.trial = Some(i as u64);
            r
        })
    })
    .into_iter()
    .collect();
    Ok(VerifyReport::from_reports(game, &reports?))
}
