//! Train routing through a min-max disjoint paths solver.
//!
//! For a fixed number `k` of convoys, `d − k` bundles are put in front of the source. Each
//! bundle has one arc of length Δ and `k − 1` arcs of length 0, so a path that picks up `j`
//! Δ-arcs stands for a convoy of `j + 1` trains.

use crate::dp::{dp_solve, dp_solve_rounded, RoundingMode, Strategy, ThetaSet};
use crate::error::{Error, Result};
use crate::flow::solve_tmo_additive;
use crate::graph::{Arc, ArcId, ArcPath, Digraph, NodeId};
use crate::maxflow::max_disjoint_paths;
use crate::profile::PathProfile;
use crate::ratio::Epsilon;
use crate::spdecomp::decompose;
use crate::tmo::{convoy_makespan, validate_convoy, ConvoyRouting, TmoInstance};

/// Largest gadget the reduction will build.
pub const MAX_GADGET_ARCS: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub delta_arc: ArcId,
    pub zero_arcs: Vec<ArcId>,
}

/// The original graph with bundles prepended. Original arcs and nodes keep their ids;
/// gadget arcs use ids `m..`, gadget nodes ids `n..`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetGraph {
    pub graph: Digraph,
    pub original_arcs: usize,
    pub original_source: NodeId,
    pub k: usize,
    pub bundles: Vec<Bundle>,
}

impl GadgetGraph {
    pub fn is_delta_arc(&self, a: ArcId) -> bool {
        a >= self.original_arcs && (a - self.original_arcs).is_multiple_of(self.k.max(1))
    }
}

pub fn build_gadget_graph(g: &Digraph, k: usize, d: u64, delta: i64) -> Result<GadgetGraph> {
    if k == 0 || k as u64 > d {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= d, got k={k}, d={d}")));
    }
    let b = d - k as u64;
    if (b as u128) * (k as u128) > MAX_GADGET_ARCS {
        return Err(Error::BudgetExceeded(format!("gadget with {b} bundles of width {k}")));
    }
    let b = b as usize;
    if b == 0 {
        return Ok(GadgetGraph {
            graph: g.clone(),
            original_arcs: g.num_arcs(),
            original_source: g.source(),
            k,
            bundles: Vec::new(),
        });
    }
    let n = g.num_nodes();
    let m = g.num_arcs();
    let mut arcs: Vec<Arc> = g.arcs().to_vec();
    let mut bundles = Vec::with_capacity(b);
    // bundle j runs from node n + j to n + j + 1, the last one into the old source
    for j in 0..b {
        let tail = n + j;
        let head = if j + 1 == b { g.source() } else { n + j + 1 };
        let delta_arc = arcs.len();
        arcs.push(Arc { tail, head, tau: delta });
        let zero_arcs = (0..k - 1)
            .map(|_| {
                arcs.push(Arc { tail, head, tau: 0 });
                arcs.len() - 1
            })
            .collect();
        bundles.push(Bundle { delta_arc, zero_arcs });
    }
    debug_assert_eq!(arcs.len(), m + b * k);
    let graph = Digraph::new(n + b, arcs, n, g.sink())?;
    Ok(GadgetGraph { graph, original_arcs: m, original_source: g.source(), k, bundles })
}

/// Reads a convoy off a profile in the gadget graph: the original part of each path is the
/// convoy path, and the number of Δ-arcs picked up plus one is its train count.
pub fn minmaxdp_to_convoy(inst: &TmoInstance, gadget: &GadgetGraph, p: &PathProfile) -> Result<ConvoyRouting> {
    p.validate(&gadget.graph, gadget.k)?;
    let mut c = ConvoyRouting::default();
    for path in &p.paths {
        let original: ArcPath = path.iter().copied().filter(|&a| a < gadget.original_arcs).collect();
        let sigma = 1 + path.iter().filter(|&&a| gadget.is_delta_arc(a)).count() as u64;
        c.paths.push(original);
        c.sigma.push(sigma);
    }
    validate_convoy(inst, &c)?;
    Ok(c)
}

/// Builds the gadget for `c` and the profile encoding it. Path `i` takes the Δ-arcs of the
/// next `σ_i − 1` bundles and the lowest unused zero arc everywhere else.
pub fn convoy_to_minmaxdp(inst: &TmoInstance, c: &ConvoyRouting) -> Result<(GadgetGraph, PathProfile)> {
    validate_convoy(inst, c)?;
    let k = c.paths.len();
    let gadget = build_gadget_graph(&inst.graph, k, inst.trains, inst.delta)?;
    let mut owner = Vec::with_capacity(gadget.bundles.len());
    for (i, &s) in c.sigma.iter().enumerate() {
        owner.extend(std::iter::repeat_n(i, (s - 1) as usize));
    }
    let mut paths: Vec<ArcPath> = vec![Vec::new(); k];
    for (j, bundle) in gadget.bundles.iter().enumerate() {
        let mut zeros = bundle.zero_arcs.iter();
        for (i, path) in paths.iter_mut().enumerate() {
            if owner[j] == i {
                path.push(bundle.delta_arc);
            } else {
                path.push(*zeros.next().expect("k - 1 zero arcs per bundle"));
            }
        }
    }
    for (path, original) in paths.iter_mut().zip(&c.paths) {
        path.extend_from_slice(original);
    }
    let profile = PathProfile::new(&gadget.graph, paths)?;
    Ok((gadget, profile))
}

/// Anything that returns k arc-disjoint source-sink paths with small maximum length.
pub trait MinMaxDpSolver: Sync {
    fn solve(&self, g: &Digraph, k: usize) -> Result<PathProfile>;
}

/// The decomposition-tree DP as a black box.
#[derive(Debug, Clone, Copy)]
pub struct DpSolver {
    pub strategy: Strategy,
    /// `None` solves with exact totals.
    pub rounding: Option<(Epsilon, RoundingMode)>,
}

impl MinMaxDpSolver for DpSolver {
    fn solve(&self, g: &Digraph, k: usize) -> Result<PathProfile> {
        let tree = decompose(g)?;
        match self.rounding {
            None => dp_solve(g, &tree, k, self.strategy, ThetaSet::Exact),
            Some((eps, mode)) => dp_solve_rounded(g, &tree, k, self.strategy, eps, mode),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    /// Many trains: flow routing. `lower_bound` is a certified lower bound on the optimum
    /// and satisfies `Δ ≤ ε·lower_bound`.
    Flow { lower_bound: i64 },
    /// Gadget enumeration; `k` is the number of convoys in the returned routing.
    Gadget { k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlackboxReport {
    pub convoy: ConvoyRouting,
    pub makespan: i64,
    pub branch: Branch,
}

/// Lower bound on any routing's makespan: with at most `μ` disjoint paths some path carries
/// `⌈d/μ⌉` trains.
pub fn convoy_count_lower_bound(inst: &TmoInstance) -> Result<i64> {
    let g = &inst.graph;
    let mu = max_disjoint_paths(g, None) as u64;
    let dist = g.distances_from(g.source())[g.sink()].ok_or_else(|| Error::Infeasible("sink unreachable".into()))?;
    let per_path = inst.trains.div_ceil(mu);
    crate::tmo::convoy_path_makespan(dist, per_path, inst.delta)
}

/// Uses the flow routing when `d > m(1 + 1/ε)`, otherwise tries every convoy count through
/// the gadget and keeps the best (ties go to fewer convoys).
pub fn solve_tmo_blackbox(inst: &TmoInstance, epsilon: Epsilon, solver: &dyn MinMaxDpSolver) -> Result<BlackboxReport> {
    let g = &inst.graph;
    let m = g.num_arcs() as i128;
    let (en, ed) = (epsilon.num as i128, epsilon.den as i128);
    if (inst.trains as i128) * en > m * (en + ed) {
        let convoy = solve_tmo_additive(inst)?;
        let makespan = convoy_makespan(inst, &convoy)?;
        let lower_bound = convoy_count_lower_bound(inst)?;
        return Ok(BlackboxReport { convoy, makespan, branch: Branch::Flow { lower_bound } });
    }
    let mut best: Option<BlackboxReport> = None;
    let kmax = (g.num_arcs() as u64).min(inst.trains) as usize;
    for k in 1..=kmax {
        let gadget = build_gadget_graph(g, k, inst.trains, inst.delta)?;
        let profile = match solver.solve(&gadget.graph, k) {
            Ok(p) => p,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let convoy = minmaxdp_to_convoy(inst, &gadget, &profile)?;
        let makespan = convoy_makespan(inst, &convoy)?;
        if best.as_ref().is_none_or(|b| makespan < b.makespan) {
            best = Some(BlackboxReport { convoy, makespan, branch: Branch::Gadget { k } });
        }
    }
    best.ok_or_else(|| Error::Infeasible("no convoy count admits a routing".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gadget_shape() {
        let g = Digraph::from_triples(3, &[(0, 1, 2), (1, 2, 2), (0, 2, 5)], 0, 2).unwrap();
        let gd = build_gadget_graph(&g, 2, 5, 3).unwrap();
        assert_eq!(gd.graph.num_arcs(), (5 - 2) * 2 + 3);
        assert_eq!(gd.graph.source(), 3);
        assert_eq!(gd.bundles.len(), 3);
        assert!(gd.is_delta_arc(3) && !gd.is_delta_arc(4) && gd.is_delta_arc(5));
        let same = build_gadget_graph(&g, 2, 2, 3).unwrap();
        assert_eq!(same.graph, g);
        assert!(build_gadget_graph(&g, 3, 2, 3).is_err());
    }

    #[test]
    fn round_trip() {
        let g = Digraph::from_triples(3, &[(0, 1, 2), (1, 2, 2), (0, 2, 5)], 0, 2).unwrap();
        let inst = TmoInstance::new(g, 3, 5).unwrap();
        let c = ConvoyRouting { paths: vec![vec![0, 1], vec![2]], sigma: vec![3, 2] };
        let (gd, p) = convoy_to_minmaxdp(&inst, &c).unwrap();
        assert_eq!(p.max_length(), convoy_makespan(&inst, &c).unwrap());
        let back = minmaxdp_to_convoy(&inst, &gd, &p).unwrap();
        let mut a: Vec<_> = c.paths.iter().cloned().zip(c.sigma.iter().copied()).collect();
        let mut b: Vec<_> = back.paths.iter().cloned().zip(back.sigma.iter().copied()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn blackbox_small() {
        let g = Digraph::from_triples(3, &[(0, 1, 2), (1, 2, 2), (0, 2, 5)], 0, 2).unwrap();
        let inst = TmoInstance::new(g, 3, 3).unwrap();
        let solver = DpSolver { strategy: Strategy::Balanced, rounding: None };
        let r = solve_tmo_blackbox(&inst, Epsilon::new(1, 2).unwrap(), &solver).unwrap();
        // best: two trains on the length-4 path (4+3=7), one on the length-5 arc
        assert_eq!(r.makespan, 7);
        assert_eq!(r.branch, Branch::Gadget { k: 2 });
    }

    #[test]
    fn blackbox_many_trains_uses_flow() {
        let g = Digraph::from_triples(2, &[(0, 1, 4), (0, 1, 6)], 0, 1).unwrap();
        let inst = TmoInstance::new(g, 1, 40).unwrap();
        let solver = DpSolver { strategy: Strategy::Balanced, rounding: None };
        let eps = Epsilon::new(1, 2).unwrap();
        let r = solve_tmo_blackbox(&inst, eps, &solver).unwrap();
        let Branch::Flow { lower_bound } = r.branch else { panic!("expected flow branch") };
        // 20 trains per arc at best: 4 + 19
        assert_eq!(lower_bound, 23);
        assert!(2 * inst.delta <= lower_bound);
        // the split 21/19 over lengths 4 and 6 is optimal
        assert_eq!(r.makespan, 24);
    }
}
