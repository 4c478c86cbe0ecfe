mod common;

use convoy_core::dp::{dp_solve, dp_solve_rounded, RoundingMode, Strategy, ThetaSet};
use convoy_core::gen::{bundle_chain, gen_instance, random_sp, GenKind, GenSpec};
use convoy_core::graph::{are_arc_disjoint, Arc, Digraph};
use convoy_core::io::{emit_convoy, emit_instance, emit_routing, parse_convoy, parse_instance, parse_routing, Names};
use convoy_core::maxflow::max_disjoint_paths;
use convoy_core::oracle::{exact_minmaxdp, OracleBudget};
use convoy_core::ratio::Epsilon;
use convoy_core::spdecomp::{decompose, ContractedTree, Label};
use convoy_core::tmo::{convoy_makespan, expand_convoy, makespan, validate_routing, TmoInstance};
use convoy_core::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn sp(seed: u64, m: usize) -> Digraph {
    random_sp(&mut common::rng(seed), m, 0, 20, 55, true).unwrap()
}

#[test]
fn wheatstone_is_not_series_parallel() {
    let g = Digraph::from_triples(4, &[(0, 1, 1), (0, 2, 1), (1, 2, 1), (1, 3, 1), (2, 3, 1)], 0, 3).unwrap();
    assert_eq!(decompose(&g).unwrap_err(), Error::NotSeriesParallel);
}

#[test]
fn bundle_chains_have_phi_one() {
    let g = bundle_chain(&[vec![1, 2], vec![0, 0, 3], vec![4, 4]]).unwrap();
    let t = decompose(&g).unwrap();
    assert_eq!(t.phi(), 1);
    let c = t.contract();
    assert_eq!(c.nodes[c.root].label, Label::S);
}

#[test]
fn generator_output_is_byte_identical_per_seed() {
    let spec = GenSpec {
        kind: GenKind::SpRandom { arcs: 15, tau_min: 0, tau_max: 9, parallel_bias: 50, shuffle: true },
        seed: 11,
        tmo: Some((2, 4)),
    };
    let a = gen_instance(&spec).unwrap();
    let b = gen_instance(&spec).unwrap();
    let emit = |x: &convoy_core::gen::Generated| emit_instance(x.graph(), None, Some((2, 4)));
    assert_eq!(emit(&a), emit(&b));
}

/// Canonical form without arc ids.
fn shape(t: &ContractedTree, x: usize) -> String {
    let n = &t.nodes[x];
    let mut parts: Vec<String> = n.children.iter().map(|&c| shape(t, c)).collect();
    match n.label {
        Label::Leaf(_) => "a".into(),
        Label::S => format!("S({})", parts.join(",")),
        Label::P => {
            parts.sort();
            format!("P({})", parts.join(","))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn shortest_paths_agree_with_distances(seed in any::<u64>(), n in 2usize..7, extra in 0usize..8) {
        let mut r = common::rng(seed);
        let g = common::random_dag(&mut r, n, n - 1 + extra, 0, 9);
        let (p, len) = g.shortest_path(g.source(), g.sink()).unwrap();
        prop_assert_eq!(g.check_st_path(&p).unwrap(), len);
        prop_assert_eq!(g.distances_from(g.source())[g.sink()], Some(len));
        prop_assert_eq!(g.distances_to(g.sink())[g.source()], Some(len));
    }

    #[test]
    fn random_sp_graphs_decompose(seed in any::<u64>(), m in 1usize..40) {
        let g = sp(seed, m);
        let t = decompose(&g).unwrap();
        let mut leaves: Vec<usize> = t.leaf_arcs()[t.root()].clone();
        leaves.sort();
        prop_assert_eq!(leaves, (0..m).collect::<Vec<_>>());
        prop_assert_eq!(t.len(), 2 * m - 1);
        prop_assert_eq!(t.phi(), t.phi_per_node()[t.root()]);
    }

    /// Renaming arcs does not change the contracted tree.
    #[test]
    fn contracted_form_ignores_arc_order(seed in any::<u64>(), m in 1usize..30) {
        let g = sp(seed, m);
        let mut arcs: Vec<Arc> = g.arcs().to_vec();
        arcs.shuffle(&mut common::rng(seed ^ 0xabc));
        let h = Digraph::new(g.num_nodes(), arcs, g.source(), g.sink()).unwrap();
        let (a, b) = (decompose(&g).unwrap(), decompose(&h).unwrap());
        prop_assert_eq!(shape(&a.contract(), a.contract().root), shape(&b.contract(), b.contract().root));
        prop_assert_eq!(a.phi(), b.phi());
    }

    #[test]
    fn expanded_convoys_are_feasible(seed in any::<u64>(), delta in 1i64..5) {
        let mut r = common::rng(seed);
        let n = r.gen_range(2..=6);
        let g = common::random_dag(&mut r, n, n + 3, 0, 6);
        let c = common::random_convoy(&mut r, &g, 3, 5);
        let inst = TmoInstance::new(g, delta, c.sigma.iter().sum()).unwrap();
        let routing = expand_convoy(&inst, &c).unwrap();
        prop_assert!(validate_routing(&inst, &routing).is_ok());
        prop_assert_eq!(makespan(&inst, &routing).unwrap(), convoy_makespan(&inst, &c).unwrap());
    }

    #[test]
    fn dp_profiles_are_valid_and_never_beat_the_oracle(seed in any::<u64>(), m in 1usize..16, kseed in any::<u8>()) {
        let g = sp(seed, m);
        let mu = max_disjoint_paths(&g, None);
        let k = 1 + kseed as usize % mu.min(5);
        let t = decompose(&g).unwrap();
        let opt = exact_minmaxdp(&g, k, &OracleBudget::default()).unwrap().max_length();
        for s in [Strategy::Balanced, Strategy::Phi, Strategy::Both] {
            let p = dp_solve(&g, &t, k, s, ThetaSet::Exact).unwrap();
            p.validate(&g, k).unwrap();
            prop_assert!(are_arc_disjoint(&p.paths));
            prop_assert!(p.max_length() >= opt);
            let capped = dp_solve(&g, &t, k, s, ThetaSet::UpTo(i64::MAX / 4)).unwrap();
            prop_assert_eq!(&capped, &p);
        }
        let eps = Epsilon::new(1, 4).unwrap();
        let p = dp_solve_rounded(&g, &t, k, Strategy::Both, eps, RoundingMode::Auto).unwrap();
        p.validate(&g, k).unwrap();
    }

    #[test]
    fn too_many_paths_is_infeasible(seed in any::<u64>(), m in 1usize..12) {
        let g = sp(seed, m);
        let mu = max_disjoint_paths(&g, None);
        let t = decompose(&g).unwrap();
        let is_infeasible = matches!(dp_solve(&g, &t, mu + 1, Strategy::Balanced, ThetaSet::Exact), Err(Error::Infeasible(_)));
        prop_assert!(is_infeasible);
    }

    #[test]
    fn json_round_trips(seed in any::<u64>(), delta in 1i64..5) {
        let mut r = common::rng(seed);
        let n = r.gen_range(2..=6);
        let g = common::random_dag(&mut r, n, n + 2, 0, 6);
        let c = common::random_convoy(&mut r, &g, 3, 3);
        let inst = TmoInstance::new(g.clone(), delta, c.sigma.iter().sum()).unwrap();
        let loaded = parse_instance(&emit_instance(&g, None, Some((delta, inst.trains)))).unwrap();
        prop_assert_eq!(&loaded.graph, &g);
        prop_assert_eq!(loaded.tmo().unwrap(), inst.clone());
        let names = Names::identity(&g);
        prop_assert_eq!(parse_convoy(&emit_convoy(&c, &names, None), &names).unwrap(), c.clone());
        let routing = expand_convoy(&inst, &c).unwrap();
        prop_assert_eq!(parse_routing(&emit_routing(&routing, &names, None), &names).unwrap(), routing);
    }
}
