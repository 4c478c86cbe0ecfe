//! Seeded random instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Arc, Digraph};
use crate::reduction::build_gadget_graph;
use crate::tmo::TmoInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenKind {
    /// Random series-parallel graph with `arcs` arcs, built from a random composition tree.
    SpRandom { arcs: usize, tau_min: i64, tau_max: i64, parallel_bias: u32, shuffle: bool },
    /// `bundles` groups of `width` parallel arcs in series, travel times drawn uniformly.
    BundleChain { bundles: usize, width: usize, tau_min: i64, tau_max: i64 },
    /// `k` bundles of `k` parallel arcs (one of length 1, the rest 0) plus a direct source-sink arc.
    BypassChain { k: usize, bypass_tau: i64 },
    /// A random series-parallel graph with the train-count gadget for `k` paths in front.
    GadgetDemo { arcs: usize, k: usize, trains: u64, delta: i64, tau_max: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub seed: u64,
    /// Headway and train count; when set the generator returns a train instance.
    pub tmo: Option<(i64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generated {
    Graph(Digraph),
    Tmo(TmoInstance),
}

impl Generated {
    pub fn graph(&self) -> &Digraph {
        match self {
            Generated::Graph(g) => g,
            Generated::Tmo(i) => &i.graph,
        }
    }
}

fn bad(msg: &str) -> Error {
    Error::InvalidParameter(msg.to_string())
}

fn check_taus(lo: i64, hi: i64) -> Result<()> {
    if lo < 0 || lo > hi {
        return Err(bad("travel time range must satisfy 0 <= min <= max"));
    }
    Ok(())
}

pub fn gen_instance(spec: &GenSpec) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let g = match spec.kind {
        GenKind::SpRandom { arcs, tau_min, tau_max, parallel_bias, shuffle } => {
            check_taus(tau_min, tau_max)?;
            if parallel_bias > 100 {
                return Err(bad("parallel bias is a percentage"));
            }
            random_sp(&mut rng, arcs, tau_min, tau_max, parallel_bias, shuffle)?
        }
        GenKind::BundleChain { bundles, width, tau_min, tau_max } => {
            check_taus(tau_min, tau_max)?;
            let taus: Vec<Vec<i64>> =
                (0..bundles).map(|_| (0..width).map(|_| rng.gen_range(tau_min..=tau_max)).collect()).collect();
            bundle_chain(&taus)?
        }
        GenKind::BypassChain { k, bypass_tau } => bypass_chain(k, Some(bypass_tau))?,
        GenKind::GadgetDemo { arcs, k, trains, delta, tau_max } => {
            check_taus(0, tau_max)?;
            let base = random_sp(&mut rng, arcs, 0, tau_max, 50, false)?;
            build_gadget_graph(&base, k, trains, delta)?.graph
        }
    };
    Ok(match spec.tmo {
        Some((delta, trains)) => Generated::Tmo(TmoInstance::new(g, delta, trains)?),
        None => Generated::Graph(g),
    })
}

/// Random series-parallel graph with exactly `m` arcs. Source 0 and sink 1 unless shuffled.
pub fn random_sp(
    rng: &mut ChaCha8Rng,
    m: usize,
    tau_min: i64,
    tau_max: i64,
    parallel_bias: u32,
    shuffle: bool,
) -> Result<Digraph> {
    if m == 0 {
        return Err(bad("need at least one arc"));
    }
    let mut n = 2;
    let mut arcs = Vec::with_capacity(m);
    // explicit stack of (arc budget, tail, head)
    let mut work = vec![(m, 0usize, 1usize)];
    while let Some((budget, s, t)) = work.pop() {
        if budget == 1 {
            arcs.push(Arc { tail: s, head: t, tau: rng.gen_range(tau_min..=tau_max) });
            continue;
        }
        let left = rng.gen_range(1..budget);
        if rng.gen_range(0..100) < parallel_bias {
            work.push((budget - left, s, t));
            work.push((left, s, t));
        } else {
            let mid = n;
            n += 1;
            work.push((budget - left, mid, t));
            work.push((left, s, mid));
        }
    }
    let (mut source, mut sink) = (0, 1);
    if shuffle {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for a in &mut arcs {
            a.tail = perm[a.tail];
            a.head = perm[a.head];
        }
        source = perm[0];
        sink = perm[1];
        arcs.shuffle(rng);
    }
    Digraph::new(n, arcs, source, sink)
}

/// Bundles in series; `taus[j]` lists the parallel arcs of bundle `j`.
pub fn bundle_chain(taus: &[Vec<i64>]) -> Result<Digraph> {
    if taus.is_empty() || taus.iter().any(|b| b.is_empty()) {
        return Err(bad("every bundle needs at least one arc"));
    }
    let mut arcs = Vec::new();
    for (j, bundle) in taus.iter().enumerate() {
        arcs.extend(bundle.iter().map(|&tau| Arc { tail: j, head: j + 1, tau }));
    }
    Digraph::new(taus.len() + 1, arcs, 0, taus.len())
}

/// `k` bundles of `k` arcs, one of length 1 each; with `bypass` a direct source-sink arc of that length.
pub fn bypass_chain(k: usize, bypass: Option<i64>) -> Result<Digraph> {
    if k == 0 {
        return Err(bad("k must be at least 1"));
    }
    let taus: Vec<Vec<i64>> = (0..k).map(|_| (0..k).map(|i| i64::from(i == 0)).collect()).collect();
    let chain = bundle_chain(&taus)?;
    match bypass {
        None => Ok(chain),
        Some(tau) => {
            let mut arcs = chain.arcs().to_vec();
            arcs.push(Arc { tail: 0, head: k, tau });
            Digraph::new(k + 1, arcs, 0, k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spdecomp::decompose;

    fn sp(arcs: usize, seed: u64, shuffle: bool) -> GenSpec {
        GenSpec {
            kind: GenKind::SpRandom { arcs, tau_min: 0, tau_max: 9, parallel_bias: 50, shuffle },
            seed,
            tmo: None,
        }
    }

    #[test]
    fn sp_random_is_deterministic_and_decomposable() {
        let a = gen_instance(&sp(20, 7, true)).unwrap();
        let b = gen_instance(&sp(20, 7, true)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.graph().num_arcs(), 20);
        decompose(a.graph()).unwrap();
        assert_ne!(a, gen_instance(&sp(20, 8, true)).unwrap());
    }

    #[test]
    fn bypass_chain_shape() {
        let g = bypass_chain(4, Some(3)).unwrap();
        assert_eq!(g.num_arcs(), 17);
        assert_eq!(g.arcs().iter().filter(|a| a.tau == 1).count(), 4);
        let chain = gen_instance(&GenSpec { kind: GenKind::BypassChain { k: 3, bypass_tau: 2 }, seed: 0, tmo: None }).unwrap();
        assert_eq!(chain.graph().num_arcs(), 10);
    }

    #[test]
    fn gadget_demo_arc_count() {
        let spec = GenSpec {
            kind: GenKind::GadgetDemo { arcs: 6, k: 2, trains: 5, delta: 3, tau_max: 4 },
            seed: 1,
            tmo: None,
        };
        assert_eq!(gen_instance(&spec).unwrap().graph().num_arcs(), 6 + 3 * 2);
    }

    #[test]
    fn rejects_bad_ranges() {
        let spec =
            GenSpec { kind: GenKind::BundleChain { bundles: 2, width: 2, tau_min: 3, tau_max: 1 }, seed: 0, tmo: None };
        assert!(gen_instance(&spec).is_err());
    }
}
