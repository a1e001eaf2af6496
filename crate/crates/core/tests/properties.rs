mod common;

use proptest::prelude::*;

use robust_rcpsp::adversary::{build_adversary_constraint_matrix, ghouila_houri_refute, TuVerdict};
use robust_rcpsp::heuristics::earliest_starts;
use robust_rcpsp::network::{minimal_forbidden_sets, verify_selection};
use robust_rcpsp::reference::{diamond_instance, seven_job_instance};
use robust_rcpsp::{
    lft_schedule, random_instance, solve_exact, warm_start, worst_case_makespan_dp, GeneratorConfig, SearchLimits,
    Selection,
};

#[test]
fn seven_job_catalog_matches_subset_enumeration() {
    let inst = seven_job_instance();
    let expected = vec![vec![1, 5], vec![2, 6], vec![3, 4, 5], vec![5, 6], vec![6, 7]];
    assert_eq!(common::forbidden_sets_by_subsets(&inst), expected);
    assert_eq!(minimal_forbidden_sets(&inst).unwrap().sets(), expected.as_slice());
}

#[test]
fn leading_rows_of_the_matrix_admit_a_signing() {
    // the first five rows are flow-conservation rows; they alone do not
    // refute total unimodularity
    let m = build_adversary_constraint_matrix(&diamond_instance(), &Selection::empty(), 1).unwrap();
    let rows: Vec<usize> = (0..5).collect();
    match ghouila_houri_refute(m.rows(), &rows).unwrap() {
        TuVerdict::Signed(s) => assert!(s.signs.is_some()),
        v => panic!("expected a signing, got {v:?}"),
    }
}

#[test]
fn nominal_dp_is_critical_path() {
    let inst = seven_job_instance();
    let es = earliest_starts(&inst);
    let sink = inst.sink();
    let dp = worst_case_makespan_dp(&inst, &Selection::empty(), 0).unwrap();
    assert_eq!(dp.value, es[sink]);
    assert!(dp.delayed.is_empty());
}

fn config() -> impl Strategy<Value = (GeneratorConfig, u64)> {
    (1usize..=7, 0usize..=2, 0.0f64..0.6, any::<u64>()).prop_map(|(jobs, resources, p, seed)| {
        (
            GeneratorConfig {
                jobs,
                resources,
                arc_probability: p,
                ..Default::default()
            },
            seed,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dp_agrees_with_subset_oracle((cfg, seed) in config(), gamma in 0usize..5) {
        let inst = random_instance(&cfg, seed);
        let dp = worst_case_makespan_dp(&inst, &Selection::empty(), gamma).unwrap();
        prop_assert_eq!(Some(dp.value), common::worst_case_by_subsets(&inst, &[], gamma));
        prop_assert!(dp.delayed.len() <= gamma);
        prop_assert_eq!(dp.path.first().copied(), Some(0));
        prop_assert_eq!(dp.path.last().copied(), Some(inst.sink()));
    }

    #[test]
    fn path_and_delays_realise_the_value((cfg, seed) in config(), gamma in 0usize..4) {
        let inst = random_instance(&cfg, seed);
        let dp = worst_case_makespan_dp(&inst, &Selection::empty(), gamma).unwrap();
        let length: i64 = dp.path.iter().map(|&i| {
            inst.nominal(i) + if dp.delayed.contains(&i) { inst.deviation(i) } else { 0 }
        }).sum();
        prop_assert_eq!(length, dp.value);
        for w in dp.path.windows(2) {
            prop_assert!(inst.has_arc(w[0], w[1]));
        }
    }

    #[test]
    fn lft_schedule_is_resource_feasible((cfg, seed) in config()) {
        let inst = random_instance(&cfg, seed);
        let s = lft_schedule(&inst);
        for &(i, j) in inst.arcs() {
            prop_assert!(s.start[i] + inst.nominal(i) <= s.start[j]);
        }
        for t in 0..s.makespan {
            for k in 0..inst.num_resources() {
                let used: i64 = inst.jobs()
                    .filter(|&i| s.start[i] <= t && t < s.start[i] + inst.nominal(i))
                    .map(|i| inst.requirement(i, k))
                    .sum();
                prop_assert!(used <= inst.capacity(k));
            }
        }
    }

    #[test]
    fn warm_start_selection_is_sufficient((cfg, seed) in config(), gamma in 0usize..3) {
        let inst = random_instance(&cfg, seed);
        let ws = warm_start(&inst, gamma);
        let catalog = minimal_forbidden_sets(&inst).unwrap();
        prop_assert!(verify_selection(&inst, &ws.selection, &catalog).is_sufficient());
        prop_assert_eq!(worst_case_makespan_dp(&inst, &ws.selection, gamma).unwrap().value, ws.ub);
    }

    #[test]
    fn exact_value_is_monotone_in_gamma((cfg, seed) in config()) {
        let inst = random_instance(&cfg, seed);
        let mut last = i64::MIN;
        for gamma in 0..=inst.num_jobs().min(3) {
            let res = solve_exact(&inst, gamma, SearchLimits::default(), None).unwrap();
            prop_assert!(res.is_optimal());
            prop_assert!(res.value >= last);
            last = res.value;
        }
    }
}
