//! Exhaustive backward induction over a bounded arrival grid.
//!
//! Nothing here uses a closed-form result: the follower's reply to every
//! leader grid time is found by searching the whole grid, and the leader
//! then optimizes against that reply. The results are ground truth for the
//! discrete and strict-flocking games and a convergence check for the
//! continuous game.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{payoffs, Action, ArrivalProfile};
use crate::numfmt::{self, format_sig};
use crate::outcome::{Diagnostics, SpeOutcome, TiedResponses};
use crate::params::GameParams;
use crate::tolerance::Tolerances;

/// Grids at or below this many points are always searched exhaustively.
const SCAN_LIMIT: usize = 4096;

/// Arrival grid `{t_o - k * step : k_min <= k <= k_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    #[serde(serialize_with = "numfmt::serialize")]
    pub step: f64,
    pub k_min: i64,
    pub k_max: i64,
}

impl GridSpec {
    pub fn new(step: f64, k_min: i64, k_max: i64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if !(k_min < 0 && k_max > 0) {
            return Err(Error::InvalidGrid(format!(
                "need k_min < 0 < k_max, got [{k_min}, {k_max}]"
            )));
        }
        Ok(GridSpec { step, k_min, k_max })
    }

    /// Unit grid from two steps after `t_o` to the domination bound.
    pub fn unit(params: &GameParams) -> Result<Self> {
        params.validate()?;
        GridSpec::new(1.0, -2, choose_k_max(params, 1.0))
    }

    /// Grid of the given step covering two time units after `t_o`.
    pub fn fine(params: &GameParams, step: f64) -> Result<Self> {
        params.validate()?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        let k_min = -((2.0 / step).ceil() as i64).max(1);
        GridSpec::new(step, k_min, choose_k_max(params, step))
    }

    pub fn time(&self, t_o: f64, k: i64) -> f64 {
        t_o - k as f64 * self.step
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The window width in grid steps, when it is a whole number of steps.
    pub fn window_steps(&self, w: f64) -> Option<i64> {
        let n = (w / self.step).round();
        if (n * self.step - w).abs() <= 1e-12 * w.max(1.0) {
            Some(n as i64)
        } else {
            None
        }
    }
}

/// Smallest `K` with `(K * step)^2 / max(beta1, beta2) > e1 + r`, plus two.
/// Arriving earlier than `t_o - K * step` is strictly dominated for both
/// agents whatever the other does.
pub fn choose_k_max(params: &GameParams, step: f64) -> i64 {
    let beta = params.beta1.max(params.beta2);
    let bound = params.e1 + params.r;
    let exceeds = |k: i64| (k as f64 * step).powi(2) / beta > bound;
    let mut k = (((bound * beta).sqrt() / step).floor() as i64).max(1);
    while !exceeds(k) {
        k += 1;
    }
    while k > 1 && exceeds(k - 1) {
        k -= 1;
    }
    k + 2
}

/// How the follower's argmax is searched on each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FollowerSearch {
    /// Every grid point.
    Scan,
    /// One candidate per region of constant benefit and risk: the point of
    /// the region closest to `t_o`. Exact whenever adjacent grid points
    /// differ in cost by more than the tie tolerance.
    Segmented,
    /// `Scan` on small grids, `Segmented` where it is exact.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TieMode {
    /// Follower breaks ties for the leader, then by the latest time.
    LeaderFavorable,
    /// Every outcome a follower strategy can sustain by punishing deviations
    /// with the leader's worst best response.
    AllSupportable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Add the limit action `JustBefore(t1)` to every follower row.
    pub just_before: bool,
    pub search: FollowerSearch,
    pub exec: Execution,
    pub tol: Tolerances,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            just_before: false,
            search: FollowerSearch::Auto,
            exec: Execution::default(),
            tol: Tolerances::default(),
        }
    }
}

impl OracleConfig {
    pub fn continuous() -> Self {
        OracleConfig {
            just_before: true,
            ..OracleConfig::default()
        }
    }
}

/// One follower best response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub action: Action,
    /// Grid offset of the follower, `None` for the limit action.
    pub k2: Option<i64>,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseRow {
    pub k1: i64,
    pub t1: f64,
    /// Tied best responses in arrival order. Never empty.
    pub responses: Vec<Response>,
}

impl BestResponseRow {
    /// Best follower utility on the row.
    pub fn u2(&self) -> f64 {
        self.responses.iter().map(|r| r.u2).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_tied(&self) -> bool {
        self.responses.len() > 1
    }

    /// Highest leader utility, then latest arrival.
    pub fn leader_favorable(&self) -> &Response {
        self.responses
            .iter()
            .max_by(|a, b| a.u1.total_cmp(&b.u1).then_with(|| a.action.cmp_arrival(&b.action)))
            .expect("rows are never empty")
    }

    /// Lowest leader utility.
    pub fn leader_worst(&self) -> &Response {
        self.responses
            .iter()
            .min_by(|a, b| a.u1.total_cmp(&b.u1))
            .expect("rows are never empty")
    }
}

/// Follower argmax sets for every leader grid time, ordered by offset.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseTable {
    pub t_o: f64,
    pub grid: GridSpec,
    pub rows: Vec<BestResponseRow>,
}

impl BestResponseTable {
    pub fn row(&self, k1: i64) -> Option<&BestResponseRow> {
        if k1 < self.grid.k_min || k1 > self.grid.k_max {
            return None;
        }
        self.rows.get((k1 - self.grid.k_min) as usize)
    }

    /// CSV with columns `t1, br_times, br_utility`, one row per leader time
    /// from latest to earliest. Tied times are joined with `;` and the limit
    /// action is written `t-`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t1,br_times,br_utility\n");
        for row in &self.rows {
            let times: Vec<String> = row
                .responses
                .iter()
                .map(|r| match r.action {
                    Action::Exact(t) => format_sig(t),
                    Action::JustBefore(t) => format!("{}-", format_sig(t)),
                })
                .collect();
            out.push_str(&format!(
                "{},{},{}\n",
                format_sig(row.t1),
                times.join(";"),
                format_sig(row.u2())
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub t_o: f64,
    pub outcomes: Vec<SpeOutcome>,
    pub mode: TieMode,
    pub table: BestResponseTable,
    /// `max over t1 of min over BR(t1) of u1`.
    pub maxmin_u1: f64,
    /// Leader's best utility when the follower breaks ties in its favour.
    pub leader_value: f64,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    case: Option<()>,
    #[serde(serialize_with = "numfmt::serialize")]
    t_o: f64,
    outcomes: &'a [SpeOutcome],
    diagnostics: Diagnostics,
    mode: TieMode,
    #[serde(serialize_with = "numfmt::serialize")]
    maxmin_u1: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    leader_value: f64,
    grid: GridSpec,
}

impl OracleResult {
    /// Follower ties at each outcome's leader time.
    pub fn ties_on_path(&self) -> Vec<TiedResponses> {
        let mut seen = Vec::new();
        let mut ties = Vec::new();
        for o in &self.outcomes {
            let t1 = o.leader_time();
            if seen.contains(&t1.to_bits()) {
                continue;
            }
            seen.push(t1.to_bits());
            if let Some(row) = self.table.rows.iter().find(|r| r.t1 == t1) {
                if row.is_tied() {
                    ties.push(TiedResponses {
                        t1: Action::Exact(t1),
                        responses: row.responses.iter().map(|r| r.action).collect(),
                        u2: row.u2(),
                    });
                }
            }
        }
        ties
    }

    /// Outcomes with an arrival after `t_o`.
    pub fn late_arrivals(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| o.leader_time() > self.t_o || o.follower_time() > self.t_o)
            .count()
    }

    pub fn to_json(&self) -> String {
        let report = OracleReport {
            case: None,
            t_o: self.t_o,
            outcomes: &self.outcomes,
            diagnostics: Diagnostics {
                follower_ties: self.ties_on_path(),
                ..Diagnostics::default()
            },
            mode: self.mode,
            maxmin_u1: self.maxmin_u1,
            leader_value: self.leader_value,
            grid: self.table.grid,
        };
        serde_json::to_string_pretty(&report).expect("report serializes")
    }
}

pub fn build_best_response_table(params: &GameParams, grid: GridSpec) -> Result<BestResponseTable> {
    build_best_response_table_with(params, grid, &OracleConfig::default())
}

pub fn build_best_response_table_with(
    params: &GameParams,
    grid: GridSpec,
    config: &OracleConfig,
) -> Result<BestResponseTable> {
    params.validate()?;
    let grid = GridSpec::new(grid.step, grid.k_min, grid.k_max)?;
    let search = resolve_search(config.search, &grid, params, &config.tol);
    let window = grid.window_steps(params.w);
    let rows = exec::map_range(config.exec, grid.k_min, grid.k_max, |k1| {
        let t1 = grid.time(params.t_o, k1);
        let mut candidates: Vec<(Action, Option<i64>)> = match (search, window) {
            (FollowerSearch::Segmented, Some(w)) => segment_candidates(k1, w, &grid)
                .into_iter()
                .map(|k2| (Action::Exact(grid.time(params.t_o, k2)), Some(k2)))
                .collect(),
            _ => (grid.k_min..=grid.k_max)
                .map(|k2| (Action::Exact(grid.time(params.t_o, k2)), Some(k2)))
                .collect(),
        };
        if config.just_before {
            candidates.push((Action::JustBefore(t1), None));
        }
        best_responses(t1, k1, &candidates, params, &config.tol)
    });
    Ok(BestResponseTable {
        t_o: params.t_o,
        grid,
        rows,
    })
}

fn resolve_search(
    requested: FollowerSearch,
    grid: &GridSpec,
    params: &GameParams,
    tol: &Tolerances,
) -> FollowerSearch {
    let segmented_exact =
        grid.window_steps(params.w).is_some() && grid.step * grid.step / params.beta2 > tol.tie;
    match requested {
        FollowerSearch::Scan => FollowerSearch::Scan,
        FollowerSearch::Segmented | FollowerSearch::Auto
            if segmented_exact && (requested == FollowerSearch::Segmented || grid.len() > SCAN_LIMIT) =>
        {
            FollowerSearch::Segmented
        }
        _ => FollowerSearch::Scan,
    }
}

/// Offsets closest to zero in each follower region relative to `k1`:
/// earlier outside the window, earlier inside, simultaneous, later inside,
/// later outside.
fn segment_candidates(k1: i64, w: i64, grid: &GridSpec) -> Vec<i64> {
    let regions = [
        (k1 + w + 1, grid.k_max),
        (k1 + 1, k1 + w),
        (k1, k1),
        (k1 - w, k1 - 1),
        (grid.k_min, k1 - w - 1),
    ];
    regions
        .iter()
        .filter_map(|&(a, b)| {
            let (a, b) = (a.max(grid.k_min), b.min(grid.k_max));
            (a <= b).then(|| 0i64.clamp(a, b))
        })
        .collect()
}

fn best_responses(
    t1: f64,
    k1: i64,
    candidates: &[(Action, Option<i64>)],
    params: &GameParams,
    tol: &Tolerances,
) -> BestResponseRow {
    let scored: Vec<Response> = candidates
        .iter()
        .map(|&(action, k2)| {
            let (u1, u2) = payoffs(&ArrivalProfile::new(t1, action), params);
            Response { action, k2, u1, u2 }
        })
        .collect();
    let best = scored.iter().map(|r| r.u2).fold(f64::NEG_INFINITY, f64::max);
    let mut responses: Vec<Response> = scored.into_iter().filter(|r| tol.tied(r.u2, best)).collect();
    responses.sort_by(|a, b| a.action.cmp_arrival(&b.action));
    responses.dedup_by(|a, b| a.action == b.action);
    BestResponseRow { k1, t1, responses }
}

/// Equilibrium outcomes on the grid under the given tie mode, with the
/// follower restricted to grid times.
pub fn enumerate_spe(params: &GameParams, grid: GridSpec, mode: TieMode) -> Result<OracleResult> {
    enumerate_spe_with(params, grid, mode, &OracleConfig::default())
}

pub fn enumerate_spe_with(
    params: &GameParams,
    grid: GridSpec,
    mode: TieMode,
    config: &OracleConfig,
) -> Result<OracleResult> {
    let table = build_best_response_table_with(params, grid, config)?;
    Ok(resolve_table(table, params, mode, &config.tol))
}

/// Runs leader optimization on an already built table.
pub fn resolve_table(
    table: BestResponseTable,
    params: &GameParams,
    mode: TieMode,
    tol: &Tolerances,
) -> OracleResult {
    let leader_value = table
        .rows
        .iter()
        .map(|row| row.leader_favorable().u1)
        .fold(f64::NEG_INFINITY, f64::max);
    let maxmin_u1 = table
        .rows
        .iter()
        .map(|row| row.leader_worst().u1)
        .fold(f64::NEG_INFINITY, f64::max);
    let unit = table.grid.step == 1.0;
    let outcome = |row: &BestResponseRow, r: &Response| {
        let o = SpeOutcome::evaluate(ArrivalProfile::new(row.t1, r.action), None, params);
        match (unit, r.k2) {
            (true, Some(k2)) => o.with_offsets(row.k1, k2),
            _ => o,
        }
    };
    let mut outcomes: Vec<SpeOutcome> = match mode {
        TieMode::LeaderFavorable => table
            .rows
            .iter()
            .filter_map(|row| {
                let r = row.leader_favorable();
                (r.u1 >= leader_value - tol.tie).then(|| outcome(row, r))
            })
            .collect(),
        TieMode::AllSupportable => table
            .rows
            .iter()
            .flat_map(|row| {
                row.responses
                    .iter()
                    .filter(|r| r.u1 >= maxmin_u1 - tol.tie)
                    .map(move |r| (row, r))
            })
            .map(|(row, r)| outcome(row, r))
            .collect(),
    };
    outcomes.sort_by(SpeOutcome::sort_key);
    OracleResult {
        t_o: table.t_o,
        outcomes,
        mode,
        table,
        maxmin_u1,
        leader_value,
    }
}

/// Grid approximation of the continuous game: a fine grid with the limit
/// action `JustBefore(t1)` available to the follower on every row.
pub fn oracle_ct_approx(params: &GameParams, step: f64) -> Result<OracleResult> {
    oracle_ct_approx_with(params, step, TieMode::LeaderFavorable, &OracleConfig::continuous())
}

pub fn oracle_ct_approx_with(
    params: &GameParams,
    step: f64,
    mode: TieMode,
    config: &OracleConfig,
) -> Result<OracleResult> {
    params.validate()?;
    params.require_unit_window()?;
    check_ct_step(step)?;
    let grid = GridSpec::fine(params, step)?;
    enumerate_spe_with(params, grid, mode, config)
}

/// The continuous approximation needs `step <= 1/16` with `1 / step` whole,
/// so that `t1 + 1` lies on the grid.
pub fn check_ct_step(step: f64) -> Result<()> {
    let per_unit = 1.0 / step;
    if !(step > 0.0 && step <= 1.0 / 16.0) || (per_unit - per_unit.round()).abs() > 1e-9 {
        return Err(Error::InvalidGrid(format!(
            "continuous approximation needs step <= 1/16 dividing 1, got {step}"
        )));
    }
    Ok(())
}

/// Grid oracle for the strict-flocking game: window forced to zero and the
/// limit action available.
pub fn oracle_sfg_approx(params: &GameParams, step: f64) -> Result<OracleResult> {
    oracle_sfg_approx_with(params, step, TieMode::LeaderFavorable, &OracleConfig::continuous())
}

pub fn oracle_sfg_approx_with(
    params: &GameParams,
    step: f64,
    mode: TieMode,
    config: &OracleConfig,
) -> Result<OracleResult> {
    let strict = params.with_window(0.0);
    let grid = GridSpec::fine(&strict, step)?;
    enumerate_spe_with(&strict, grid, mode, config)
}
