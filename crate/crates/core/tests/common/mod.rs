#![allow(dead_code)]

use convoy_core::graph::{Arc, ArcPath, Digraph};
use convoy_core::oracle::enumerate_st_paths;
use convoy_core::tmo::{ConvoyRouting, TmoInstance, TrainRouting, TrainSchedule};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random acyclic graph on nodes `0..n` (source 0, sink n−1) with exactly `m` arcs; parallel arcs allowed.
pub fn random_dag(r: &mut ChaCha8Rng, n: usize, m: usize, tau_min: i64, tau_max: i64) -> Digraph {
    assert!(n >= 2 && m >= 1);
    loop {
        let mut arcs = Vec::with_capacity(m);
        // one direct-ish chain keeps the sink reachable most of the time
        let mut v = 0;
        while v < n - 1 && arcs.len() < m {
            let w = r.gen_range(v + 1..n);
            arcs.push(Arc { tail: v, head: w, tau: r.gen_range(tau_min..=tau_max) });
            v = w;
        }
        while arcs.len() < m {
            let a = r.gen_range(0..n - 1);
            let b = r.gen_range(a + 1..n);
            arcs.push(Arc { tail: a, head: b, tau: r.gen_range(tau_min..=tau_max) });
        }
        arcs.shuffle(r);
        if let Ok(g) = Digraph::new(n, arcs, 0, n - 1) {
            return g;
        }
    }
}

/// Earliest time `≥ t` at which an arc with the given entry times accepts another train.
pub fn earliest_slot(mut t: i64, taken: &[i64], delta: i64) -> i64 {
    loop {
        match taken.iter().find(|&&e| (e - t).abs() < delta) {
            Some(&e) => t = e + delta,
            None => return t,
        }
    }
}

/// Each train picks a random simple path and enters every arc as early as the headway allows,
/// after an optional random wait.
pub fn random_feasible_routing(r: &mut ChaCha8Rng, inst: &TmoInstance, max_wait: i64) -> TrainRouting {
    let g = &inst.graph;
    let paths = enumerate_st_paths(g, 100_000).expect("small graph");
    let mut taken: Vec<Vec<i64>> = vec![Vec::new(); g.num_arcs()];
    let mut trains = Vec::new();
    for _ in 0..inst.trains {
        let (_, p) = paths.choose(r).expect("sink reachable").clone();
        let mut t = 0;
        let mut entry = Vec::with_capacity(p.len());
        for &a in &p {
            let wait = if max_wait > 0 { r.gen_range(0..=max_wait) } else { 0 };
            let e = earliest_slot(t + wait, &taken[a], inst.delta);
            taken[a].push(e);
            entry.push(e);
            t = e + g.tau(a);
        }
        trains.push(TrainSchedule { path: p, entry });
    }
    TrainRouting { trains }
}

/// Random collection of arc-disjoint simple paths (at most `kmax`) with random train counts.
pub fn random_convoy(r: &mut ChaCha8Rng, g: &Digraph, kmax: usize, sigma_max: u64) -> ConvoyRouting {
    let mut paths: Vec<ArcPath> =
        enumerate_st_paths(g, 100_000).expect("small graph").into_iter().map(|x| x.1).collect();
    paths.shuffle(r);
    let mut used = vec![false; g.num_arcs()];
    let mut c = ConvoyRouting::default();
    for p in paths {
        if c.paths.len() == kmax {
            break;
        }
        if p.iter().any(|&a| used[a]) {
            continue;
        }
        for &a in &p {
            used[a] = true;
        }
        c.sigma.push(r.gen_range(1..=sigma_max));
        c.paths.push(p);
    }
    c
}
