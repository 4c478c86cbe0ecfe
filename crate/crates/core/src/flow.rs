//! Flows over time on unit-capacity arcs and the additive-Δ train routing built from them.
//!
//! Horizon convention: a temporally repeated flow with horizon `H` sends one unit per time
//! step along each path `P` for `H − τ(P)` steps, so its value is `Σ max(0, H − τ(P))`.

use crate::error::{Error, Result};
use crate::graph::{ArcId, ArcPath, Digraph};
use crate::tmo::{validate_convoy, ConvoyRouting, TmoInstance};

/// Arc-disjoint paths repeated over a horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporallyRepeatedFlow {
    pub horizon: i64,
    pub paths: Vec<ArcPath>,
    pub lengths: Vec<i64>,
}

impl TemporallyRepeatedFlow {
    pub fn value(&self) -> i128 {
        self.lengths.iter().map(|&l| (self.horizon as i128 - l as i128).max(0)).sum()
    }
}

/// Unit-capacity residual network for successive shortest paths.
struct Residual<'g> {
    g: &'g Digraph,
    flow: Vec<bool>,
}

impl<'g> Residual<'g> {
    fn new(g: &'g Digraph) -> Self {
        Residual { g, flow: vec![false; g.num_arcs()] }
    }

    /// Bellman-Ford over the residual graph; returns the cost and the arcs
    /// (`(arc, forward)`) of a cheapest augmenting path.
    fn shortest_augmenting(&self) -> Option<(i64, Vec<(ArcId, bool)>)> {
        let n = self.g.num_nodes();
        let mut dist: Vec<Option<i64>> = vec![None; n];
        let mut pred: Vec<Option<(ArcId, bool)>> = vec![None; n];
        dist[self.g.source()] = Some(0);
        for _ in 0..n {
            let mut changed = false;
            for (id, a) in self.g.arcs().iter().enumerate() {
                let (from, to, cost, fwd) =
                    if self.flow[id] { (a.head, a.tail, -a.tau, false) } else { (a.tail, a.head, a.tau, true) };
                if let Some(du) = dist[from] {
                    let nd = du + cost;
                    if dist[to].is_none_or(|dv| nd < dv) {
                        dist[to] = Some(nd);
                        pred[to] = Some((id, fwd));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let cost = dist[self.g.sink()]?;
        let mut path = Vec::new();
        let mut v = self.g.sink();
        while v != self.g.source() {
            let (id, fwd) = pred[v].expect("predecessor on shortest path");
            path.push((id, fwd));
            let a = self.g.arc(id);
            v = if fwd { a.tail } else { a.head };
        }
        path.reverse();
        Some((cost, path))
    }

    fn augment(&mut self, path: &[(ArcId, bool)]) {
        for &(id, fwd) in path {
            self.flow[id] = fwd;
        }
    }

    /// Splits the 0/1 flow into simple source-sink paths; cycles are dropped.
    fn decompose(mut self) -> Vec<ArcPath> {
        let g = self.g;
        let mut paths = Vec::new();
        loop {
            let mut walk: Vec<ArcId> = Vec::new();
            let mut nodes = vec![g.source()];
            let mut v = g.source();
            while v != g.sink() {
                let Some(&a) = g.out_arcs(v).iter().filter(|&&a| self.flow[a]).min() else { break };
                self.flow[a] = false;
                walk.push(a);
                v = g.arc(a).head;
                if let Some(k) = nodes.iter().position(|&u| u == v) {
                    // closed a cycle: discard it
                    walk.truncate(k);
                    nodes.truncate(k + 1);
                } else {
                    nodes.push(v);
                }
            }
            if v != g.sink() {
                break;
            }
            paths.push(walk);
        }
        paths
    }
}

/// Lengths of successive shortest augmenting paths until no augmenting path remains.
/// `value(H) = Σ_j max(0, H − c_j)`.
pub fn marginal_costs(g: &Digraph) -> Vec<i64> {
    let mut res = Residual::new(g);
    let mut costs = Vec::new();
    while let Some((c, path)) = res.shortest_augmenting() {
        res.augment(&path);
        costs.push(c);
    }
    costs
}

/// Maximum temporally repeated flow with the given horizon.
pub fn max_flow_over_time(g: &Digraph, horizon: i64) -> Result<TemporallyRepeatedFlow> {
    if horizon < 0 {
        return Err(Error::InvalidParameter("horizon must be nonnegative".into()));
    }
    let mut res = Residual::new(g);
    while let Some((c, path)) = res.shortest_augmenting() {
        if c >= horizon {
            break;
        }
        res.augment(&path);
    }
    let mut flow = TemporallyRepeatedFlow { horizon, paths: Vec::new(), lengths: Vec::new() };
    for p in res.decompose() {
        let len = g.path_length(&p)?;
        if len < horizon {
            flow.paths.push(p);
            flow.lengths.push(len);
        }
    }
    Ok(flow)
}

/// Value of the best flow over time with horizon `h`, from the marginal path costs.
pub fn value_at(costs: &[i64], h: i64) -> i128 {
    costs.iter().map(|&c| (h as i128 - c as i128).max(0)).sum()
}

/// Smallest horizon whose maximum flow over time reaches `demand`, found by binary search.
pub fn quickest_flow(g: &Digraph, demand: i128) -> Result<TemporallyRepeatedFlow> {
    if demand < 0 {
        return Err(Error::InvalidParameter("demand must be nonnegative".into()));
    }
    let costs = marginal_costs(g);
    let dist = *costs.first().ok_or_else(|| Error::Infeasible("sink unreachable".into()))?;
    if demand == 0 {
        return max_flow_over_time(g, 0);
    }
    let mut lo = dist as i128;
    let mut hi = lo + demand;
    if hi > i64::MAX as i128 {
        return Err(Error::Overflow("quickest flow horizon"));
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if value_at(&costs, mid as i64) >= demand {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    max_flow_over_time(g, lo as i64)
}

/// Trains a path of length `len` can carry so that the last one arrives by `deadline`.
pub fn sigma_for(deadline: i64, len: i64, delta: i64) -> u64 {
    if len > deadline {
        0
    } else {
        1 + ((deadline - len) / delta) as u64
    }
}

/// Convoy on the flow's paths with every train arriving by `horizon − 1`.
/// Surplus trains are removed from the slots with the latest arrival, longer paths first.
pub fn flow_to_convoy(inst: &TmoInstance, f: &TemporallyRepeatedFlow) -> Result<ConvoyRouting> {
    let deadline = f.horizon - 1;
    let delta = inst.delta;
    let count = |m: i64| -> u128 { f.lengths.iter().map(|&l| sigma_for(m, l, delta) as u128).sum() };
    let d = inst.trains as u128;
    if count(deadline) < d {
        return Err(Error::Infeasible(format!("flow carries only {} of {} trains", count(deadline), d)));
    }
    // smallest arrival bound that still fits all trains
    let lo_start = f.lengths.iter().copied().min().unwrap_or(0);
    let (mut lo, mut hi) = (lo_start, deadline);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if count(mid) >= d {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let m = lo;
    let mut sigma: Vec<u64> = f.lengths.iter().map(|&l| sigma_for(m, l, delta)).collect();
    let mut excess = count(m) - d;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse((f.lengths[i], i)));
    for i in order {
        if excess == 0 {
            break;
        }
        // the last slot on path i arrives exactly at m
        if sigma[i] > 0 && (m - f.lengths[i]) % delta == 0 {
            sigma[i] -= 1;
            excess -= 1;
        }
    }
    debug_assert_eq!(excess, 0);
    let mut c = ConvoyRouting::default();
    for (p, s) in f.paths.iter().zip(sigma) {
        if s > 0 {
            c.paths.push(p.clone());
            c.sigma.push(s);
        }
    }
    validate_convoy(inst, &c)?;
    Ok(c)
}

/// Convoy routing with makespan at most the optimum plus one headway.
pub fn solve_tmo_additive(inst: &TmoInstance) -> Result<ConvoyRouting> {
    let demand = (inst.delta as i128) * (inst.trains as i128);
    let quickest = quickest_flow(&inst.graph, demand)?;
    let extended = max_flow_over_time(&inst.graph, quickest.horizon.checked_add(1).ok_or(Error::Overflow("horizon"))?)?;
    flow_to_convoy(inst, &extended)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmo::convoy_makespan;

    #[test]
    fn single_arc_horizons() {
        let g = Digraph::from_triples(2, &[(0, 1, 3)], 0, 1).unwrap();
        assert_eq!(max_flow_over_time(&g, 3).unwrap().value(), 0);
        assert_eq!(max_flow_over_time(&g, 4).unwrap().value(), 1);
    }

    #[test]
    fn parallel_arcs() {
        let g = Digraph::from_triples(2, &[(0, 1, 1), (0, 1, 2)], 0, 1).unwrap();
        assert_eq!(max_flow_over_time(&g, 4).unwrap().value(), 5);
    }

    #[test]
    fn quickest_on_a_path() {
        let g = Digraph::from_triples(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)], 0, 3).unwrap();
        let f = quickest_flow(&g, 5).unwrap();
        assert_eq!(f.horizon, 8);
        assert_eq!(f.value(), 5);
        assert_eq!(quickest_flow(&g, 0).unwrap().horizon, 0);
    }

    #[test]
    fn sigma_formula() {
        assert_eq!(sigma_for(10, 4, 3), 3);
        assert_eq!(sigma_for(10, 10, 3), 1);
        assert_eq!(sigma_for(10, 11, 3), 0);
    }

    #[test]
    fn one_train_takes_the_shortest_path() {
        let g = Digraph::from_triples(3, &[(0, 2, 5), (0, 1, 1), (1, 2, 5)], 0, 2).unwrap();
        let inst = TmoInstance::new(g, 4, 1).unwrap();
        let c = solve_tmo_additive(&inst).unwrap();
        assert_eq!(c.paths, vec![vec![0]]);
        assert_eq!(convoy_makespan(&inst, &c).unwrap(), 5);
    }

    #[test]
    fn cheaper_flow_uses_reverse_arcs() {
        // the first shortest path 0-1-2-3 blocks both disjoint paths; the second augmentation cancels arc 1->2
        let g = Digraph::from_triples(4, &[(0, 1, 1), (1, 2, 0), (2, 3, 1), (0, 2, 3), (1, 3, 3)], 0, 3).unwrap();
        assert_eq!(marginal_costs(&g), vec![2, 6]);
        let f = max_flow_over_time(&g, 10).unwrap();
        let mut paths = f.paths.clone();
        paths.sort();
        assert_eq!(paths, vec![vec![0, 4], vec![3, 2]]);
        assert_eq!(f.value(), 12);
    }
}
