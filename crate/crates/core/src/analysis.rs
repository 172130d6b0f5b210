//! Parameter-space maps over the territory gap: sweeps, the discrete-game
//! region boundaries and the qualitative comparison of the three games.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::continuous::solve_ct;
use crate::discrete::{classify_case_dt_with, deterrence_level, solve_dt, ThresholdReading};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{Action, FlockKind};
use crate::numfmt::{self, format_sig};
use crate::outcome::{CaseLabel, Game, SpeResult, SpeType};
use crate::params::GameParams;
use crate::sfg::solve_sfg;
use crate::tolerance::Tolerances;

/// All three solvers at one territory gap.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub delta_e: f64,
    pub ct: SpeResult,
    pub dt: SpeResult,
    pub sfg: SpeResult,
}

impl RegionRow {
    pub fn solve(base: &GameParams, delta_e: f64) -> Result<Self> {
        let p = base.with_delta_e(delta_e);
        Ok(RegionRow {
            delta_e,
            ct: solve_ct(&p)?,
            dt: solve_dt(&p)?,
            sfg: solve_sfg(&p)?,
        })
    }

    pub fn case_ct(&self) -> CaseLabel {
        self.ct.case
    }

    pub fn case_dt(&self) -> CaseLabel {
        self.dt.case
    }

    pub fn case_sfg(&self) -> CaseLabel {
        self.sfg.case
    }

    fn csv_fields(&self) -> Vec<String> {
        let times = |res: &SpeResult, leader: bool| {
            res.outcomes
                .iter()
                .map(|o| action_text(if leader { o.t1 } else { o.t2 }))
                .collect::<Vec<_>>()
                .join(";")
        };
        let flocks = self
            .dt
            .outcomes
            .iter()
            .map(|o| format!("{:?}", o.flock))
            .collect::<Vec<_>>()
            .join(";");
        vec![
            format_sig(self.delta_e),
            self.ct.case.to_string(),
            self.dt.case.to_string(),
            self.sfg.case.to_string(),
            times(&self.ct, true),
            times(&self.ct, false),
            times(&self.dt, true),
            times(&self.dt, false),
            times(&self.sfg, true),
            times(&self.sfg, false),
            flocks,
            self.ct.exists().to_string(),
        ]
    }
}

fn action_text(a: Action) -> String {
    match a {
        Action::Exact(t) => format_sig(t),
        Action::JustBefore(t) => format!("{}-", format_sig(t)),
    }
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "delta_e", "case_ct", "case_dt", "case_sfg", "ct_t1", "ct_t2", "dt_t1", "dt_t2", "sfg_t1", "sfg_t2",
    "dt_flock", "ct_exists",
];

/// Rows of a sweep as CSV records, header first.
pub fn sweep_records(rows: &[RegionRow]) -> Vec<Vec<String>> {
    let mut out = vec![SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect()];
    out.extend(rows.iter().map(RegionRow::csv_fields));
    out
}

/// Gaps `lo, lo + step, ...` up to `hi` inclusive, each computed directly
/// from its index.
pub fn delta_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(Error::InvalidRange(format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidRange(format!("step must be positive, got {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

pub fn sweep_delta_e(base: &GameParams, lo: f64, hi: f64, step: f64) -> Result<Vec<RegionRow>> {
    sweep_delta_e_with(base, lo, hi, step, Execution::default())
}

pub fn sweep_delta_e_with(
    base: &GameParams,
    lo: f64,
    hi: f64,
    step: f64,
    exec: Execution,
) -> Result<Vec<RegionRow>> {
    base.validate()?;
    base.require_unit_window()?;
    let deltas = delta_grid(lo, hi, step)?;
    exec::map_slice(exec, &deltas, |&d| RegionRow::solve(base, d))
        .into_iter()
        .collect()
}

/// Discrete-game boundaries in the gap `delta_e` for fixed strengths and
/// risk, inside the region `delta_e * beta2 > 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    /// Gap at which `k*` first exceeds the trailing gate, when in range.
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub gate: Option<f64>,
    /// Sign changes of `k* - sqrt(delta * beta1)` while `k*` is within the gate.
    #[serde(rename = "a", serialize_with = "numfmt::serialize_vec")]
    pub a_bounds: Vec<f64>,
    /// Sign changes of `k* - sqrt((delta - r/2) * beta1)` beyond the gate.
    #[serde(rename = "b", serialize_with = "numfmt::serialize_vec")]
    pub b_bounds: Vec<f64>,
    pub tol: f64,
}

impl BoundarySet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("boundaries serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    /// Every boundary, sorted and deduplicated.
    pub fn all(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .a_bounds
            .iter()
            .chain(&self.b_bounds)
            .chain(self.gate.iter())
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Discrete labels at the midpoint of every interval between
    /// consecutive boundaries in `(lo, hi)`.
    pub fn regions(
        &self,
        base: &GameParams,
        lo: f64,
        hi: f64,
        reading: ThresholdReading,
    ) -> Result<Vec<(f64, f64, CaseLabel)>> {
        let mut cuts = vec![lo];
        cuts.extend(self.all().into_iter().filter(|&x| x > lo && x < hi));
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let label = classify_case_dt_with(&base.with_delta_e(mid), reading, &Tolerances::default())?;
                Ok((w[0], w[1], label))
            })
            .collect()
    }
}

/// State of the discrete classification on one side of a point: the
/// deterrence offset, whether it is within the gate and the sign of
/// `k*^2` against the squared comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Side {
    k: i64,
    trailing: bool,
    sign: Ordering,
}

struct Structure {
    beta1: f64,
    beta2: f64,
    r: f64,
    gate: f64,
    tol: f64,
    cond: Tolerances,
}

impl Structure {
    fn level(&self, d: f64) -> f64 {
        deterrence_level(d, self.beta2, self.r)
    }

    fn trailing(&self, k: i64) -> bool {
        self.cond.cmp_cond(k as f64, self.gate) != Ordering::Greater
    }

    fn comparator_sq(&self, d: f64, trailing: bool) -> f64 {
        if trailing {
            d * self.beta1
        } else {
            (d - self.r / 2.0) * self.beta1
        }
    }

    /// Sign of `k^2` against the comparator at `d`, one-sided: the
    /// comparator increases with `d`, so an exact touch reads as `Greater`
    /// from the left and `Less` from the right.
    fn side(&self, k: i64, d: f64, from_left: bool) -> Side {
        let trailing = self.trailing(k);
        let c = self.comparator_sq(d, trailing);
        let ksq = (k * k) as f64;
        let sign = if (ksq - c).abs() <= self.beta1 * self.tol {
            if from_left {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else {
            ksq.total_cmp(&c)
        };
        Side { k, trailing, sign }
    }
}

/// Bisection for the point where an increasing `f` crosses zero in
/// `(lo, hi)`, to `tol`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn find_region_boundaries(base: &GameParams, lo: f64, hi: f64, tol: f64) -> Result<BoundarySet> {
    find_region_boundaries_with(base, lo, hi, tol, ThresholdReading::Resolved)
}

/// Walks the segments on which `k*` is constant. Inside a segment each
/// comparator is strictly increasing and crosses `k*` at most once; at a
/// segment's end `k*` steps up by one. Every point where the letter of the
/// discrete case changes is recorded, under `a` when the left side is within
/// the gate and under `b` otherwise.
pub fn find_region_boundaries_with(
    base: &GameParams,
    lo: f64,
    hi: f64,
    tol: f64,
    reading: ThresholdReading,
) -> Result<BoundarySet> {
    base.validate()?;
    base.require_unit_window()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidRange(format!("tol must be positive, got {tol}")));
    }
    let floor = 4.0 / base.beta2;
    if !(lo.is_finite() && hi.is_finite() && lo >= floor && lo < hi) {
        return Err(Error::InvalidRange(format!(
            "need {floor} <= lo < hi for the case-3 region, got ({lo}, {hi})"
        )));
    }
    let s = Structure {
        beta1: base.beta1,
        beta2: base.beta2,
        r: base.r,
        gate: reading.gate(base.r, base.beta2),
        tol,
        cond: Tolerances::default(),
    };

    // k* = n on (jump(n), jump(n + 1)] where jump(n) solves level = n
    let k_at = |d: f64| s.cond.snapped_ceil(s.level(d)) as i64 - 1;
    let mut jumps = Vec::new();
    let first = k_at(lo) + 1;
    let last = k_at(hi);
    for n in first..=last {
        let target = n as f64;
        let d = bisect(|d| s.level(d) - target, lo, hi, tol);
        if d > lo && d < hi {
            jumps.push((n, d));
        }
    }

    let mut set = BoundarySet {
        gate: None,
        a_bounds: Vec::new(),
        b_bounds: Vec::new(),
        tol,
    };
    let mut record = |left: Side, right: Side, d: f64| {
        if left.sign != right.sign {
            if left.trailing {
                set.a_bounds.push(d);
            } else {
                set.b_bounds.push(d);
            }
        }
    };

    let mut seg_lo = lo;
    let mut k = first - 1;
    let mut gate = None;
    for (n, d) in jumps.iter().copied().chain(std::iter::once((last + 1, hi))) {
        // comparator crossing strictly inside the segment (seg_lo, d)
        let trailing = s.trailing(k);
        let g = |x: f64| s.comparator_sq(x, trailing) - (k * k) as f64;
        if g(seg_lo + tol) < 0.0 && g(d - tol) > 0.0 {
            let x = bisect(g, seg_lo, d, tol);
            record(s.side(k, x, true), s.side(k, x, false), x);
        }
        if d < hi {
            let left = s.side(k, d, true);
            let right = s.side(n, d, false);
            if left.trailing && !right.trailing {
                gate = Some(d);
            }
            record(left, right, d);
        }
        seg_lo = d;
        k = n;
    }
    set.gate = gate;
    Ok(set)
}

/// Qualitative properties of one game over a sample of instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSummary {
    pub game: Game,
    pub instances: usize,
    /// Every instance has at least one pure equilibrium.
    pub existence: bool,
    /// No instance has more than one.
    pub uniqueness: bool,
    pub types: BTreeSet<SpeType>,
    pub strict_flock: bool,
    /// `t1 <= t2` in every outcome.
    pub leader_not_after: bool,
}

impl GameSummary {
    fn new(game: Game) -> Self {
        GameSummary {
            game,
            instances: 0,
            existence: true,
            uniqueness: true,
            types: BTreeSet::new(),
            strict_flock: false,
            leader_not_after: true,
        }
    }

    fn absorb(&mut self, res: &SpeResult) {
        self.instances += 1;
        self.existence &= res.exists();
        self.uniqueness &= res.outcomes.len() <= 1;
        for o in &res.outcomes {
            self.types.extend(o.type_tag);
            self.strict_flock |= o.flock == FlockKind::StrictFlock;
            self.leader_not_after &= o.t1.cmp_arrival(&o.t2) != Ordering::Greater;
        }
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<GameSummary>,
}

impl ComparisonTable {
    pub fn row(&self, game: Game) -> &GameSummary {
        self.rows.iter().find(|r| r.game == game).expect("all games present")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn records(&self) -> Vec<Vec<String>> {
        let yes_no = |b: bool| if b { "yes" } else { "no" }.to_string();
        let mut out = vec![vec![
            "game".to_string(),
            "existence".into(),
            "uniqueness".into(),
            "spe_types".into(),
            "strict_flock".into(),
            "t1_le_t2".into(),
            "instances".into(),
        ]];
        for r in &self.rows {
            out.push(vec![
                format!("{:?}", r.game),
                yes_no(r.existence),
                yes_no(r.uniqueness),
                r.type_count().to_string(),
                if r.strict_flock { "possible" } else { "never" }.into(),
                yes_no(r.leader_not_after),
                r.instances.to_string(),
            ]);
        }
        out
    }
}

pub fn compare_games(base: &GameParams, sample_gaps: &[f64]) -> Result<ComparisonTable> {
    compare_games_multi(std::slice::from_ref(base), sample_gaps)
}

/// Aggregates all three solvers over every base and gap.
pub fn compare_games_multi(bases: &[GameParams], sample_gaps: &[f64]) -> Result<ComparisonTable> {
    if sample_gaps.is_empty() || sample_gaps.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidRange("sample gaps must be positive and non-empty".into()));
    }
    let mut ct = GameSummary::new(Game::Continuous);
    let mut dt = GameSummary::new(Game::Discrete);
    let mut sfg = GameSummary::new(Game::StrictFlocking);
    for base in bases {
        let rows: Result<Vec<RegionRow>> = sample_gaps.iter().map(|&g| RegionRow::solve(base, g)).collect();
        for row in rows? {
            ct.absorb(&row.ct);
            dt.absorb(&row.dt);
            sfg.absorb(&row.sfg);
        }
    }
    Ok(ComparisonTable { rows: vec![sfg, ct, dt] })
}

/// A dense gap sample for `base`: a log-spaced grid over `[0.01, 1000]`
/// together with the continuous-game window boundary and the discrete
/// region boundaries, where the two-outcome cases live.
pub fn dense_gap_sample(base: &GameParams) -> Result<Vec<f64>> {
    let n = 2000;
    let (a, b) = (0.01f64.ln(), 1000f64.ln());
    let mut gaps: Vec<f64> = (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect();
    gaps.push(((2.0 * base.r * base.beta2).sqrt() + 1.0) / base.beta2);
    gaps.push(base.r / 2.0);
    let lo = 4.0 / base.beta2;
    if lo < 1000.0 {
        gaps.extend(find_region_boundaries(base, lo, 1000.0, 1e-12)?.all());
    }
    gaps.sort_by(f64::total_cmp);
    gaps.dedup();
    Ok(gaps)
}
