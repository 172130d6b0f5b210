//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::time::Instant;

use flock_core::analysis::{
    compare_games_multi, dense_gap_sample, find_region_boundaries, find_region_boundaries_with, BoundarySet,
};
use flock_core::continuous::indifference_residuals;
use flock_core::discrete::classify_case_dt_with;
use flock_core::oracle::{GridSpec, TieMode};
use flock_core::sampling::draw_params;
use flock_core::verify::{verify_params, verify_random, VerifyOptions, VerifyReport};
use flock_core::{
    classify_case_dt, enumerate_spe, k_star, solve_ct, solve_dt, solve_sfg, CaseLabel, Game, GameParams, SpeType,
    ThresholdReading, Tolerances,
};

const SEED: u64 = 0;
const CT_STEP: f64 = 1.0 / 1024.0;
const SFG_STEP: f64 = 1.0 / 256.0;

fn ex1() -> GameParams {
    GameParams::new(4.5, 4.0, 5.0, 3.0, 2.0, 10.0).unwrap()
}

fn params(beta1: f64, beta2: f64, delta: f64, e2: f64, r: f64) -> GameParams {
    GameParams::new(beta1, beta2, e2 + delta, e2, r, 10.0).unwrap()
}

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

/// One instance per discrete branch, including the two equality subcases.
fn constructed_discrete() -> Vec<GameParams> {
    let mut out = vec![
        ex1().with_delta_e(0.2),
        ex1().with_delta_e(0.5),
        ex1().with_delta_e(2.0),
        params(5.0, 4.0, 6.0, 3.0, 20.0),
        // delta * beta1 = 36 = k*^2 within the gate
        params(6.0, 4.0, 6.0, 3.0, 20.0),
        params(40.0, 4.0, 4.0, 3.0, 2.0),
        ex1().with_delta_e(4.0),
        // (delta - r/2) * beta1 = 16 = k*^2 beyond the gate
        params(16.0 / 3.0, 4.0, 4.0, 3.0, 2.0),
    ];
    // every comparator crossing of the reference instance is an equality subcase
    let set = find_region_boundaries(&ex1(), 1.0, 1000.0, 1e-12).unwrap();
    out.extend(set.all().into_iter().map(|d| ex1().with_delta_e(d)));
    out
}

fn criterion_1(reports: &mut Vec<VerifyReport>) -> Verdict {
    let start = Instant::now();
    let opts = VerifyOptions::default();
    let random = verify_random(Game::Discrete, SEED, 1000, &opts).unwrap();
    let constructed = verify_params(&constructed_discrete(), Game::Discrete, &opts).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut hit: BTreeSet<String> = random.branch_hits.keys().cloned().collect();
    hit.extend(constructed.branch_hits.keys().cloned());
    let missing: Vec<&str> = CaseLabel::of_game(Game::Discrete)
        .map(|c| c.code())
        .filter(|c| !hit.contains(*c))
        .collect();
    let passed = random.all_passed() && constructed.all_passed() && missing.is_empty() && elapsed < 10.0;
    let detail = format!(
        "random {}/{}, constructed {}/{}, branches missing {:?}, random hits {:?}, {:.2}s{}",
        random.passed,
        random.trials,
        constructed.passed,
        constructed.trials,
        missing,
        random.branch_hits,
        elapsed,
        first_failure(&[&random, &constructed]),
    );
    reports.push(random);
    reports.push(constructed);
    Verdict::new(passed, detail)
}

fn first_failure(reports: &[&VerifyReport]) -> String {
    reports
        .iter()
        .find_map(|r| r.first_failure.as_ref())
        .map(|f| format!("; first failure {}", serde_json::to_string(f).unwrap()))
        .unwrap_or_default()
}

fn criterion_2(reports: &mut Vec<VerifyReport>) -> Verdict {
    let start = Instant::now();
    let opts = VerifyOptions {
        step: Some(CT_STEP),
        ..VerifyOptions::default()
    };
    let report = verify_random(Game::Continuous, SEED, 200, &opts).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let passed = report.all_passed() && elapsed < 120.0;
    let detail = format!(
        "{}/{} within 4*step or under the resignation cap, branches {:?}, {:.1}s{}",
        report.passed,
        report.trials,
        report.branch_hits,
        elapsed,
        first_failure(&[&report]),
    );
    reports.push(report);
    Verdict::new(passed, detail)
}

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut applicable = 0;
    for i in 0..200 {
        let r = indifference_residuals(&draw_params(SEED, i)).unwrap();
        for v in [r.type1, r.type2, r.type3].into_iter().flatten() {
            applicable += 1;
            worst = worst.max(v);
        }
    }
    Verdict::new(
        worst < 1e-9 && applicable > 0,
        format!("{applicable} applicable tipping points, max residual {worst:e}"),
    )
}

fn criterion_4(reports: &[VerifyReport]) -> Verdict {
    let mut late: usize = reports.iter().map(|r| r.late_arrivals).sum();
    let mut runs = reports.iter().map(|r| r.trials).sum::<usize>();
    // explicit k_min = -2 unit grids in both modes
    for i in 0..200 {
        let p = draw_params(SEED, i);
        let grid = GridSpec::unit(&p).unwrap();
        assert_eq!(grid.k_min, -2);
        for mode in [TieMode::LeaderFavorable, TieMode::AllSupportable] {
            late += enumerate_spe(&p, grid, mode).unwrap().late_arrivals();
            runs += 1;
        }
    }
    Verdict::new(late == 0, format!("{late} arrivals after t_o across {runs} oracle runs"))
}

/// Discrete instances whose equilibrium is the leader conceding the better
/// territory, taken from three interior points of every DT5 region for a
/// few bases.
fn constructed_dt5() -> Vec<GameParams> {
    let bases = [
        ex1(),
        params(5.0, 4.0, 1.0, 3.0, 20.0),
        params(6.0, 2.0, 1.0, 2.0, 3.0),
        params(9.0, 8.0, 1.0, 5.0, 1.0),
    ];
    let mut out = Vec::new();
    for base in bases {
        let lo = 4.0 / base.beta2;
        let set = find_region_boundaries(&base, lo, 200.0, 1e-9).unwrap();
        for (a, b, label) in set.regions(&base, lo, 200.0, ThresholdReading::Resolved).unwrap() {
            if matches!(label, CaseLabel::Dt31b | CaseLabel::Dt32b) {
                out.extend([0.25, 0.5, 0.75].map(|f| base.with_delta_e(a + f * (b - a))));
            }
        }
    }
    out
}

fn criterion_5() -> Verdict {
    let mut ct_outcomes = 0;
    let mut ct_bad = 0;
    for i in 0..200 {
        for o in solve_ct(&draw_params(SEED, i)).unwrap().outcomes {
            ct_outcomes += 1;
            if !(o.leader_time() < o.follower_time()) {
                ct_bad += 1;
            }
        }
    }
    let dt5 = constructed_dt5();
    let mut dt5_bad = 0;
    for p in &dt5 {
        let res = solve_dt(p).unwrap();
        let ok = res.outcomes.len() == 1
            && res.outcomes[0].type_tag == Some(SpeType::DT5)
            && res.outcomes[0].leader_time() > res.outcomes[0].follower_time()
            && res.outcomes[0].u2 > res.outcomes[0].u1;
        if !ok {
            dt5_bad += 1;
        }
    }
    let oracle = verify_params(&dt5, Game::Discrete, &VerifyOptions::default()).unwrap();
    Verdict::new(
        ct_bad == 0 && ct_outcomes > 0 && dt5.len() >= 20 && dt5_bad == 0 && oracle.all_passed(),
        format!(
            "continuous t1 < t2 in {}/{} outcomes; {} constructed DT5 instances, {} violating t1 > t2 and u2 > u1, oracle {}/{}",
            ct_outcomes - ct_bad,
            ct_outcomes,
            dt5.len(),
            dt5_bad,
            oracle.passed,
            oracle.trials
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut notes = Vec::new();
    let mut passed = true;
    for gap in [1e3, 1e4, 1e6] {
        let p = ex1().with_delta_e(gap);
        let res = solve_dt(&p).unwrap();
        let k = k_star(&p).unwrap();
        let ok = res.case == CaseLabel::Dt32a
            && res.outcomes.len() == 1
            && res.outcomes[0].leader_time() == p.t_o - k as f64
            && res.outcomes[0].follower_time() == p.t_o;
        let oracle_ok = gap > 1e4 || {
            let o = enumerate_spe(&p, GridSpec::unit(&p).unwrap(), TieMode::LeaderFavorable).unwrap();
            o.outcomes.len() == 1 && o.outcomes[0].t1 == res.outcomes[0].t1 && o.outcomes[0].t2 == res.outcomes[0].t2
        };
        passed &= ok && oracle_ok;
        notes.push(format!("{gap:e}: {} k*={k}", res.case));
    }
    Verdict::new(passed, notes.join(", "))
}

fn check_region_sequence(set: &BoundarySet, reading: ThresholdReading) -> Result<(), String> {
    let base = ex1();
    let gate = set.gate.ok_or("gate not in range")?;
    let regions = set.regions(&base, 1.0, 1000.0, reading).map_err(|e| e.to_string())?;
    for (a, b, label) in &regions {
        let mid = 0.5 * (a + b);
        let allowed: &[CaseLabel] = if mid < gate {
            &[CaseLabel::Dt31a, CaseLabel::Dt31b]
        } else {
            &[CaseLabel::Dt32a, CaseLabel::Dt32b]
        };
        if !allowed.contains(label) {
            return Err(format!("{label} on ({a}, {b})"));
        }
    }
    for pair in regions.windows(2) {
        if pair[0].2 == pair[1].2 {
            return Err(format!("no change across {}", pair[0].1));
        }
    }
    let last_b = set.b_bounds.last().copied().ok_or("no b bounds")?;
    if regions.iter().any(|(a, _, l)| *a >= last_b && *l != CaseLabel::Dt32a) {
        return Err("beyond the last b bound the type is not DT4 only".into());
    }
    Ok(())
}

/// Each bound separates different labels at probes on either side, and the
/// unit-grid oracle agrees with the solver at every probe.
fn check_probes(set: &BoundarySet, reading: ThresholdReading) -> Result<(), String> {
    let base = ex1();
    let tol = Tolerances::default();
    for &d in set.a_bounds.iter().chain(&set.b_bounds) {
        let left = base.with_delta_e(d - 1e-6);
        let right = base.with_delta_e(d + 1e-6);
        let l = classify_case_dt_with(&left, reading, &tol).unwrap();
        let r = classify_case_dt_with(&right, reading, &tol).unwrap();
        if l == r {
            return Err(format!("same label {l} on both sides of {d}"));
        }
        for p in [left, right] {
            let solved = solve_dt(&p).unwrap();
            let oracle = enumerate_spe(&p, GridSpec::unit(&p).unwrap(), TieMode::LeaderFavorable).unwrap();
            let a: Vec<_> = solved.outcomes.iter().map(|o| (o.t1, o.t2)).collect();
            let b: Vec<_> = oracle.outcomes.iter().map(|o| (o.t1, o.t2)).collect();
            if a != b {
                return Err(format!("oracle disagrees at {}", p.delta_e()));
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Verdict {
    let base = ex1();
    let set = find_region_boundaries(&base, 1.0, 1000.0, 1e-9).unwrap();
    let golden = BoundarySet::from_json(include_str!("golden/boundaries_reference.json")).unwrap();
    let golden_ok = golden.a_bounds.len() == set.a_bounds.len()
        && golden.b_bounds.len() == set.b_bounds.len()
        && golden
            .all()
            .iter()
            .zip(set.all())
            .all(|(g, s)| (g - s).abs() <= 1e-8);
    let counts_ok = set.a_bounds.len() == 5 && set.b_bounds.len() == 5;
    let sequence = check_region_sequence(&set, ThresholdReading::Resolved);
    let probes = check_probes(&set, ThresholdReading::Resolved);

    let typeset =
        find_region_boundaries_with(&base, 1.0, 1000.0, 1e-9, ThresholdReading::Typeset).unwrap();
    let typeset_seq = check_region_sequence(&typeset, ThresholdReading::Typeset);
    Verdict::new(
        counts_ok && golden_ok && sequence.is_ok() && probes.is_ok(),
        format!(
            "resolved gate at {:?}: {} a-bounds, {} b-bounds (need 5 and 5), golden {}, sequence {:?}, probes {:?}; \
             typeset gate at {:?} gives {} a-bounds and {} b-bounds, sequence {:?}",
            set.gate,
            set.a_bounds.len(),
            set.b_bounds.len(),
            if golden_ok { "matches" } else { "differs" },
            sequence,
            probes,
            typeset.gate,
            typeset.a_bounds.len(),
            typeset.b_bounds.len(),
            typeset_seq,
        ),
    )
}

fn criterion_8() -> Verdict {
    let bases = [ex1(), GameParams::new(40.0, 4.0, 5.0, 3.0, 2.0, 10.0).unwrap()];
    let mut gaps = Vec::new();
    for b in &bases {
        gaps.extend(dense_gap_sample(b).unwrap());
    }
    let table = compare_games_multi(&bases, &gaps).unwrap();
    // existence, uniqueness, type count, strict flock, t1 <= t2
    let expected = [
        (Game::StrictFlocking, (true, true, 2, true, true)),
        (Game::Continuous, (false, false, 3, false, true)),
        (Game::Discrete, (true, false, 5, true, false)),
    ];
    let mut mismatches = Vec::new();
    for (game, want) in expected {
        let r = table.row(game);
        let got = (r.existence, r.uniqueness, r.type_count(), r.strict_flock, r.leader_not_after);
        if got != want {
            mismatches.push(format!("{game:?}: got {got:?}, want {want:?}"));
        }
    }
    Verdict::new(
        mismatches.is_empty(),
        format!(
            "{} gaps over {} bases; mismatches {:?}",
            gaps.len(),
            bases.len(),
            mismatches
        ),
    )
}

fn criterion_9() -> Verdict {
    let tol = Tolerances::default();
    let mut compared = 0;
    let mut resolved_bad = 0;
    let mut typeset_bad = 0;
    for i in 0..500 {
        let p = draw_params(SEED, i);
        let grid = GridSpec::unit(&p).unwrap();
        let trail = ThresholdReading::Resolved.gate(p.r, p.beta2);
        let typeset = ThresholdReading::Typeset.gate(p.r, p.beta2);
        for k1 in 2..grid.k_max {
            let t1 = p.t_o - k1 as f64;
            let u_trail = flock_core::game::payoffs(&flock_core::ArrivalProfile::exact(t1, t1 + 1.0), &p).1;
            let u_alone = flock_core::game::payoffs(&flock_core::ArrivalProfile::exact(t1, p.t_o), &p).1;
            let actual = if tol.tied(u_trail, u_alone) {
                std::cmp::Ordering::Equal
            } else {
                u_trail.total_cmp(&u_alone)
            };
            // trailing preferred while k1 is below the gate
            let predict = |gate: f64| tol.cmp_cond(gate, k1 as f64);
            compared += 1;
            if predict(trail) != actual {
                resolved_bad += 1;
            }
            if predict(typeset) != actual {
                typeset_bad += 1;
            }
        }
    }
    Verdict::new(
        resolved_bad == 0 && typeset_bad > 0,
        format!(
            "{compared} leader offsets over 500 instances: resolved reading {resolved_bad} counterexamples, \
             rejected reading {typeset_bad}"
        ),
    )
}

fn criterion_10(reports: &mut Vec<VerifyReport>) -> Verdict {
    let opts = VerifyOptions {
        step: Some(SFG_STEP),
        ..VerifyOptions::default()
    };
    let report = verify_random(Game::StrictFlocking, SEED, 200, &opts).unwrap();
    let mut coop = 0;
    let mut deter = 0;
    for i in 0..200 {
        match solve_sfg(&draw_params(SEED, i)).unwrap().case {
            CaseLabel::SfgCoop => coop += 1,
            _ => deter += 1,
        }
    }
    let passed = report.all_passed() && coop > 0 && deter > 0;
    let detail = format!(
        "{}/{} agree with the w = 0 oracle (cooperation {coop}, deterrence {deter}, step {SFG_STEP}){}",
        report.passed,
        report.trials,
        first_failure(&[&report]),
    );
    reports.push(report);
    Verdict::new(passed, detail)
}

fn main() {
    // sanity on the shared example before the long runs
    assert_eq!(classify_case_dt(&ex1()).unwrap(), CaseLabel::Dt31a);

    let mut reports = Vec::new();
    let mut verdicts: Vec<(u32, &str, Verdict)> = Vec::new();
    verdicts.push((1, "discrete solver equals unit-grid oracle", criterion_1(&mut reports)));
    verdicts.push((2, "continuous solver converges to the fine-grid oracle", criterion_2(&mut reports)));
    verdicts.push((3, "indifference residuals at tipping points", criterion_3()));
    verdicts.push((10, "strict-flocking threshold and deterrence time", criterion_10(&mut reports)));
    verdicts.push((4, "no arrival after t_o in any oracle outcome", criterion_4(&reports)));
    verdicts.push((5, "leader first in continuous time, DT5 first-mover disadvantage", criterion_5()));
    verdicts.push((6, "large gaps end in DT-3.2.a", criterion_6()));
    verdicts.push((7, "reference instance region boundaries", criterion_7()));
    verdicts.push((8, "qualitative comparison rows", criterion_8()));
    verdicts.push((9, "trailing threshold disambiguation", criterion_9()));
    verdicts.sort_by_key(|(n, _, _)| *n);

    let mut failed = 0;
    for (n, name, v) in &verdicts {
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}  {name}: {}", v.detail);
        failed += usize::from(!v.passed);
    }
    println!("{} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
