mod common;

use convoy_core::graph::Digraph;
use convoy_core::tmo::{convoy_makespan, makespan, validate_routing, TmoInstance, TrainRouting, TrainSchedule};
use convoy_core::uncross::{leaders, potential, transition_arc, uncross, uncross_traced};
use proptest::prelude::*;

fn sched(path: &[usize], entry: &[i64]) -> TrainSchedule {
    TrainSchedule { path: path.to_vec(), entry: entry.to_vec() }
}

/// Three trains crossing on a shared middle arc; arcs A..G are ids 0..6.
fn crossing() -> (TmoInstance, TrainRouting) {
    let g =
        Digraph::from_triples(5, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (0, 1, 1), (2, 4, 1), (2, 3, 1)], 0, 4)
            .unwrap();
    let r = TrainRouting {
        trains: vec![
            sched(&[4, 1, 5], &[0, 1, 2]),
            sched(&[0, 1, 2, 3], &[0, 2, 3, 4]),
            sched(&[4, 1, 6, 3], &[1, 3, 4, 5]),
        ],
    };
    (TmoInstance::new(g, 1, 3).unwrap(), r)
}

#[test]
fn crossing_resolves_in_one_step() {
    let (inst, r) = crossing();
    validate_routing(&inst, &r).unwrap();
    assert_eq!(makespan(&inst, &r).unwrap(), 6);
    // the train finishing on arc D first reaches arc B behind train 0
    assert_eq!(transition_arc(&r, 1), Some((1, 1)));
    let (c, steps) = uncross_traced(&inst, &r).unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].leader, 1);
    assert_eq!(steps[0].transition_arc, 1);
    assert_eq!(c.paths, vec![vec![4, 1, 2, 3]]);
    assert_eq!(c.sigma, vec![3]);
    assert_eq!(convoy_makespan(&inst, &c).unwrap(), 6);
}

/// Train 2 runs the long chain and is overtaken; train 0 is first everywhere on its path.
fn chain() -> (TmoInstance, TrainRouting) {
    let g = Digraph::from_triples(
        8,
        &[(0, 4, 1), (4, 5, 1), (5, 6, 1), (6, 7, 1), (0, 2, 1), (2, 3, 1), (3, 5, 1), (0, 1, 1), (1, 2, 1), (3, 4, 1)],
        0,
        7,
    )
    .unwrap();
    let r = TrainRouting {
        trains: vec![
            sched(&[0, 1, 2, 3], &[0, 1, 2, 3]),
            sched(&[4, 5, 6, 2, 3], &[0, 1, 2, 3, 4]),
            sched(&[7, 8, 5, 9, 1, 2, 3], &[0, 1, 2, 3, 4, 5, 6]),
        ],
    };
    (TmoInstance::new(g, 1, 3).unwrap(), r)
}

#[test]
fn transition_arcs_on_the_chain() {
    let (inst, r) = chain();
    validate_routing(&inst, &r).unwrap();
    assert_eq!(leaders(&inst, &r), vec![(3, 0)]);
    assert_eq!(transition_arc(&r, 0), None);
    // arcs after (v4,v5) see trains 0 and 1 ahead, (v4,v5) only train 0
    assert_eq!(transition_arc(&r, 2), Some((4, 1)));
    let c = uncross(&inst, &r).unwrap();
    assert_eq!(c.paths, vec![vec![0, 1, 2, 3]]);
    assert_eq!(convoy_makespan(&inst, &c).unwrap(), 6);
    assert!(potential(&r) > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uncrossing_never_increases_makespan(seed in any::<u64>(), n in 2usize..6, extra in 0usize..6, d in 1u64..6, delta in 1i64..4) {
        let mut r = common::rng(seed);
        let g = common::random_dag(&mut r, n, n - 1 + extra, 0, 3);
        let inst = TmoInstance::new(g, delta, d).unwrap();
        let routing = common::random_feasible_routing(&mut r, &inst, 3);
        let before = makespan(&inst, &routing).unwrap();
        let (c, steps) = uncross_traced(&inst, &routing).unwrap();
        prop_assert!(convoy_makespan(&inst, &c).unwrap() <= before);
        prop_assert_eq!(c.sigma.iter().sum::<u64>(), d);
        for s in steps {
            prop_assert!(s.potential_after < s.potential_before);
        }
    }
}
