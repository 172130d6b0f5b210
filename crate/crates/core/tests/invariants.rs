use flock_core::analysis::sweep_delta_e_with;
use flock_core::oracle::{enumerate_spe_with, OracleConfig};
use flock_core::{solve_ct, solve_dt, solve_sfg, Execution, GameParams, GridSpec, TieMode};
use proptest::prelude::*;

fn arb_params() -> impl Strategy<Value = GameParams> {
    (0.5f64..20.0, 1.01f64..10.0, 1.0f64..10.0, 0.01f64..30.0, 0.1f64..10.0).prop_map(
        |(beta2, ratio, e2, delta, r)| {
            GameParams::new(beta2 * ratio, beta2, e2 + delta, e2, r, 10.0).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solver_outcomes_satisfy_invariants(params in arb_params()) {
        for res in [solve_ct(&params), solve_dt(&params), solve_sfg(&params)] {
            let res = res.unwrap();
            prop_assert!(res.validate_invariants(&params).is_ok(), "{:?}", res);
            for o in &res.outcomes {
                prop_assert!(o.leader_time() <= params.t_o && o.follower_time() <= params.t_o);
            }
        }
    }

    #[test]
    fn discrete_solver_never_leaves_an_empty_set(params in arb_params()) {
        prop_assert!(!solve_dt(&params).unwrap().outcomes.is_empty());
        prop_assert_eq!(solve_sfg(&params).unwrap().outcomes.len(), 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sequential_and_parallel_agree(params in arb_params()) {
        let grid = GridSpec::unit(&params).unwrap();
        let run = |exec| {
            let config = OracleConfig { exec, ..OracleConfig::default() };
            enumerate_spe_with(&params, grid, TieMode::AllSupportable, &config).unwrap().to_json()
        };
        prop_assert_eq!(run(Execution::Sequential), run(Execution::Parallel));

        let seq = sweep_delta_e_with(&params, 0.1, 5.0, 0.1, Execution::Sequential).unwrap();
        let par = sweep_delta_e_with(&params, 0.1, 5.0, 0.1, Execution::Parallel).unwrap();
        prop_assert_eq!(seq, par);
    }
}
