//! Exhaustive reference solvers for small instances.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{ArcId, ArcPath, Digraph};
use crate::maxflow::FlowNetwork;
use crate::profile::PathProfile;
use crate::tmo::{ConvoyRouting, TmoInstance};

/// Size limits checked before any search starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_arcs: usize,
    pub max_k: usize,
    /// Train limit for the full schedule search.
    pub max_trains: u64,
    /// Train limit for convoy splits (water-filling is linear in the train count).
    pub max_convoy_trains: u64,
    pub max_horizon: i64,
    pub max_simple_paths: usize,
    pub max_states: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_arcs: 16,
            max_k: 6,
            max_trains: 8,
            max_convoy_trains: 100_000,
            max_horizon: 64,
            max_simple_paths: 100_000,
            max_states: 20_000_000,
        }
    }
}

fn over(what: &str) -> Error {
    Error::BudgetExceeded(what.to_string())
}

/// All simple source-sink paths, sorted by (length, arc sequence).
pub fn enumerate_st_paths(g: &Digraph, limit: usize) -> Result<Vec<(i64, ArcPath)>> {
    let mut out = Vec::new();
    let mut on_path = vec![false; g.num_nodes()];
    let mut path: Vec<ArcId> = Vec::new();
    // explicit stack of (node, next out-arc index)
    let mut stack: Vec<(usize, usize)> = vec![(g.source(), 0)];
    on_path[g.source()] = true;
    while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
        if v == g.sink() {
            out.push(path.clone());
            if out.len() > limit {
                return Err(over("simple path enumeration"));
            }
            stack.pop();
            on_path[v] = false;
            path.pop();
            continue;
        }
        if let Some(&a) = g.out_arcs(v).get(*idx) {
            *idx += 1;
            let w = g.arc(a).head;
            if !on_path[w] {
                on_path[w] = true;
                path.push(a);
                stack.push((w, 0));
            }
        } else {
            stack.pop();
            on_path[v] = false;
            path.pop();
        }
    }
    let mut with_len: Vec<(i64, ArcPath)> =
        out.into_iter().map(|p| g.path_length(&p).map(|l| (l, p))).collect::<Result<_>>()?;
    with_len.sort();
    Ok(with_len)
}

fn masks(paths: &[(i64, ArcPath)]) -> Vec<u128> {
    paths.iter().map(|(_, p)| p.iter().fold(0u128, |m, &a| m | (1u128 << a))).collect()
}

/// Optimal k arc-disjoint paths by exhaustive search with a length bound.
pub fn exact_minmaxdp(g: &Digraph, k: usize, budget: &OracleBudget) -> Result<PathProfile> {
    if g.num_arcs() > budget.max_arcs.min(128) {
        return Err(over("arc count"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > budget.max_k {
        return Err(over("path count"));
    }
    let paths = enumerate_st_paths(g, budget.max_simple_paths)?;
    let ms = masks(&paths);
    let mut best: Option<(i64, Vec<usize>)> = None;
    let mut chosen = Vec::with_capacity(k);
    search_disjoint(&paths, &ms, k, 0, 0, &mut chosen, &mut best);
    let (_, idx) = best.ok_or_else(|| Error::Infeasible(format!("fewer than {k} arc-disjoint paths")))?;
    PathProfile::new(g, idx.into_iter().map(|i| paths[i].1.clone()).collect())
}

fn search_disjoint(
    paths: &[(i64, ArcPath)],
    ms: &[u128],
    k: usize,
    start: usize,
    used: u128,
    chosen: &mut Vec<usize>,
    best: &mut Option<(i64, Vec<usize>)>,
) {
    if chosen.len() == k {
        let val = paths[*chosen.last().expect("k >= 1")].0;
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            *best = Some((val, chosen.clone()));
        }
        return;
    }
    let need = k - chosen.len();
    for i in start..paths.len() {
        // paths are sorted by length: nothing later can beat the incumbent
        if best.as_ref().is_some_and(|(b, _)| paths[i].0 >= *b) {
            return;
        }
        if paths.len() - i < need {
            return;
        }
        if ms[i] & used != 0 {
            continue;
        }
        chosen.push(i);
        search_disjoint(paths, ms, k, i + 1, used | ms[i], chosen, best);
        chosen.pop();
    }
}

/// Best split of `d` trains over paths of the given lengths, each path carrying at least one.
/// Adds trains one at a time to the path whose next train would arrive earliest.
pub fn water_fill(lengths: &[i64], d: u64, delta: i64) -> Option<(Vec<u64>, i64)> {
    let k = lengths.len() as u64;
    if k == 0 || k > d {
        return None;
    }
    let mut sigma = vec![1u64; lengths.len()];
    let mut heap: BinaryHeap<Reverse<(i64, usize)>> =
        lengths.iter().enumerate().map(|(i, &l)| Reverse((l + delta, i))).collect();
    for _ in 0..d - k {
        let Reverse((t, i)) = heap.pop().expect("nonempty");
        sigma[i] += 1;
        heap.push(Reverse((t + delta, i)));
    }
    let makespan = lengths.iter().zip(&sigma).map(|(&l, &s)| l + (s as i64 - 1) * delta).max().unwrap_or(0);
    Some((sigma, makespan))
}

/// Smallest `M` such that paths with lengths `lens` (each allowed to carry zero trains) fit `d` trains.
fn relaxed_bound(lens: impl Iterator<Item = i64> + Clone, d: u64, delta: i64) -> i64 {
    let count = |m: i64| -> u128 { lens.clone().filter(|&l| l <= m).map(|l| 1 + ((m - l) / delta) as u128).sum() };
    let lo0 = lens.clone().min().unwrap_or(0);
    let (mut lo, mut hi) = (lo0, lo0 + delta * d as i64);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if count(mid) >= d as u128 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Optimal convoy routing over all arc-disjoint path collections (of size `k` only, if given).
pub fn exact_tmo_convoy_k(inst: &TmoInstance, k: Option<usize>, budget: &OracleBudget) -> Result<(ConvoyRouting, i64)> {
    let g = &inst.graph;
    if g.num_arcs() > budget.max_arcs.min(128) {
        return Err(over("arc count"));
    }
    if inst.trains > budget.max_convoy_trains {
        return Err(over("train count"));
    }
    let paths = enumerate_st_paths(g, budget.max_simple_paths)?;
    let ms = masks(&paths);
    let mut ctx = ConvoySearch { paths: &paths, ms: &ms, inst, k, best: None, chosen: Vec::new() };
    ctx.dfs(0, 0);
    let (val, idx, sigma) = ctx.best.ok_or_else(|| Error::Infeasible("no convoy routing".into()))?;
    let convoy = ConvoyRouting { paths: idx.iter().map(|&i| paths[i].1.clone()).collect(), sigma };
    Ok((convoy, val))
}

pub fn exact_tmo_convoy(inst: &TmoInstance, budget: &OracleBudget) -> Result<(ConvoyRouting, i64)> {
    exact_tmo_convoy_k(inst, None, budget)
}

struct ConvoySearch<'a> {
    paths: &'a [(i64, ArcPath)],
    ms: &'a [u128],
    inst: &'a TmoInstance,
    k: Option<usize>,
    best: Option<(i64, Vec<usize>, Vec<u64>)>,
    chosen: Vec<usize>,
}

impl ConvoySearch<'_> {
    fn dfs(&mut self, start: usize, used: u128) {
        let d = self.inst.trains;
        let delta = self.inst.delta;
        let size_ok = self.k.is_none_or(|k| self.chosen.len() == k);
        if !self.chosen.is_empty() && size_ok {
            let lens: Vec<i64> = self.chosen.iter().map(|&i| self.paths[i].0).collect();
            if let Some((sigma, val)) = water_fill(&lens, d, delta) {
                if self.best.as_ref().is_none_or(|(b, _, _)| val < *b) {
                    self.best = Some((val, self.chosen.clone(), sigma));
                }
            }
        }
        if self.chosen.len() as u64 >= d || self.k.is_some_and(|k| self.chosen.len() >= k) {
            return;
        }
        let compatible: Vec<usize> = (start..self.paths.len()).filter(|&i| self.ms[i] & used == 0).collect();
        if let Some(k) = self.k {
            if self.chosen.len() + compatible.len() < k {
                return;
            }
        }
        if let Some((b, _, _)) = &self.best {
            // relaxation: every compatible path may join, every path may stay empty
            let lens = self.chosen.iter().chain(&compatible).map(|&i| self.paths[i].0);
            let floor = self.chosen.iter().map(|&i| self.paths[i].0).max().unwrap_or(0);
            if relaxed_bound(lens, d, delta).max(floor) >= *b {
                return;
            }
        }
        for i in compatible {
            if self.ms[i] & used != 0 {
                continue;
            }
            self.chosen.push(i);
            self.dfs(i + 1, used | self.ms[i]);
            self.chosen.pop();
        }
    }
}

/// Search state at the start of one time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TrainState {
    /// Trains standing at each node (the sink is excluded: arrived trains are counted).
    waiting: Vec<u8>,
    /// Trains on arcs: (steps until arrival, head), sorted.
    transit: Vec<(u16, u16)>,
    /// Arcs still inside a headway window: (arc, steps until free), sorted.
    blocked: Vec<(u16, u16)>,
    arrived: u8,
}

/// Optimal makespan over all feasible routings, waiting included.
///
/// Searches time steps in order for every `M` from a lower bound upward; states whose trains
/// cannot reach the sink by `M` are discarded.
pub fn exact_tmo_full(inst: &TmoInstance, budget: &OracleBudget) -> Result<i64> {
    let g = &inst.graph;
    if g.num_arcs() > budget.max_arcs || g.num_arcs() > u16::MAX as usize || g.num_nodes() > u16::MAX as usize {
        return Err(over("arc count"));
    }
    if inst.trains > budget.max_trains || inst.trains > u8::MAX as u64 {
        return Err(over("train count"));
    }
    let d = inst.trains as i64;
    let delta = inst.delta;
    let dist = g.distances_to(g.sink());
    let sp = dist[g.source()].ok_or_else(|| Error::Infeasible("sink unreachable".into()))?;
    let upper = sp + (d - 1) * delta;
    if upper > budget.max_horizon {
        return Err(over("time horizon"));
    }
    if delta > u16::MAX as i64 || g.tau_max() > u16::MAX as i64 {
        return Err(over("time horizon"));
    }
    let lower = full_lower_bound(inst, &dist);
    let mut states_seen = 0usize;
    for m in lower..=upper {
        if layered_search(inst, &dist, m, budget, &mut states_seen)? {
            return Ok(m);
        }
    }
    Err(Error::Internal("single-file schedule on a shortest path was not found".into()))
}

/// Trains leaving the source or entering the sink through the same arc are spaced by Δ.
fn full_lower_bound(inst: &TmoInstance, dist: &[Option<i64>]) -> i64 {
    let g = &inst.graph;
    let from_s = g.distances_from(g.source());
    let out_lens: Vec<i64> =
        g.out_arcs(g.source()).iter().filter_map(|&a| dist[g.arc(a).head].map(|dh| g.tau(a) + dh)).collect();
    let in_lens: Vec<i64> =
        g.in_arcs(g.sink()).iter().filter_map(|&a| from_s[g.arc(a).tail].map(|ds| ds + g.tau(a))).collect();
    let a = relaxed_bound(out_lens.iter().copied(), inst.trains, inst.delta);
    let b = relaxed_bound(in_lens.iter().copied(), inst.trains, inst.delta);
    a.max(b)
}

fn layered_search(
    inst: &TmoInstance,
    dist: &[Option<i64>],
    horizon: i64,
    budget: &OracleBudget,
    seen_total: &mut usize,
) -> Result<bool> {
    let g = &inst.graph;
    let n = g.num_nodes();
    let t = g.sink();
    let d = inst.trains as u8;
    let mut waiting = vec![0u8; n];
    waiting[g.source()] = d;
    let start = TrainState { waiting, transit: Vec::new(), blocked: Vec::new(), arrived: 0 };
    let mut layer: HashSet<TrainState> = HashSet::from([start]);
    for theta in 0..=horizon {
        // all dispatch combinations at this time step
        let mut closed: HashSet<TrainState> = HashSet::new();
        let mut frontier: Vec<TrainState> = layer.drain().collect();
        for s in &frontier {
            closed.insert(s.clone());
        }
        while let Some(s) = frontier.pop() {
            if s.arrived == d {
                return Ok(true);
            }
            for v in 0..n {
                if s.waiting[v] == 0 {
                    continue;
                }
                for &a in g.out_arcs(v) {
                    if s.blocked.iter().any(|&(b, _)| b as usize == a) {
                        continue;
                    }
                    let arc = g.arc(a);
                    let mut ns = s.clone();
                    ns.waiting[v] -= 1;
                    if arc.tau == 0 {
                        if arc.head == t {
                            ns.arrived += 1;
                        } else {
                            ns.waiting[arc.head] += 1;
                        }
                    } else {
                        let pos = ns.transit.partition_point(|&x| x < (arc.tau as u16, arc.head as u16));
                        ns.transit.insert(pos, (arc.tau as u16, arc.head as u16));
                    }
                    let pos = ns.blocked.partition_point(|&(b, _)| (b as usize) < a);
                    ns.blocked.insert(pos, (a as u16, inst.delta as u16));
                    if !alive(&ns, theta, horizon, dist, inst) {
                        continue;
                    }
                    if closed.insert(ns.clone()) {
                        *seen_total += 1;
                        if *seen_total > budget.max_states {
                            return Err(over("search states"));
                        }
                        frontier.push(ns);
                    }
                }
            }
        }
        if theta == horizon {
            break;
        }
        // advance one step
        for mut s in closed {
            s.blocked.retain_mut(|(_, r)| {
                *r -= 1;
                *r > 0
            });
            let mut still = Vec::with_capacity(s.transit.len());
            for &(r, w) in &s.transit {
                if r == 1 {
                    if w as usize == t {
                        s.arrived += 1;
                    } else {
                        s.waiting[w as usize] += 1;
                    }
                } else {
                    still.push((r - 1, w));
                }
            }
            s.transit = still;
            if alive(&s, theta + 1, horizon, dist, inst) {
                layer.insert(s);
            }
        }
    }
    Ok(false)
}

/// Can every train still arrive by `horizon`? Trains waiting together at a node leave
/// at least Δ apart on each out-arc.
fn alive(s: &TrainState, theta: i64, horizon: i64, dist: &[Option<i64>], inst: &TmoInstance) -> bool {
    let g = &inst.graph;
    for (v, &c) in s.waiting.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let Some(dv) = dist[v] else { return false };
        let outdeg = g.out_arcs(v).len() as i64;
        if outdeg == 0 {
            return false;
        }
        let rounds = (c as i64 + outdeg - 1) / outdeg;
        if theta + dv + (rounds - 1) * inst.delta > horizon {
            return false;
        }
    }
    for &(r, w) in &s.transit {
        match dist[w as usize] {
            Some(dw) if theta + r as i64 + dw <= horizon => {}
            _ => return false,
        }
    }
    true
}

/// Maximum flow over time with the given horizon, computed on the time-expanded network.
/// A unit leaving `s` at step θ along an arc of length τ arrives at θ + τ, which must be below the horizon.
pub fn time_expanded_maxflow(g: &Digraph, horizon: i64, budget: &OracleBudget) -> Result<i64> {
    if horizon <= 0 {
        return Ok(0);
    }
    if horizon > budget.max_horizon.max(256) || (horizon as usize).saturating_mul(g.num_nodes()) > 2_000_000 {
        return Err(over("time-expanded network size"));
    }
    let h = horizon as usize;
    let n = g.num_nodes();
    let idx = |v: usize, th: usize| v * h + th;
    let mut net = FlowNetwork::new(n * h + 2);
    let (src, snk) = (n * h, n * h + 1);
    let big = i64::MAX / 4;
    for v in 0..n {
        for th in 0..h {
            if th + 1 < h {
                net.add_edge(idx(v, th), idx(v, th + 1), big);
            }
        }
    }
    for a in g.arcs() {
        for th in 0..h {
            let arr = th as i64 + a.tau;
            if arr < horizon {
                net.add_edge(idx(a.tail, th), idx(a.head, arr as usize), 1);
            }
        }
    }
    for th in 0..h {
        net.add_edge(src, idx(g.source(), th), big);
        net.add_edge(idx(g.sink(), th), snk, big);
    }
    Ok(net.max_flow(src, snk, big))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_diamond_paths() {
        let g = Digraph::from_triples(4, &[(0, 1, 1), (0, 2, 1), (1, 2, 0), (1, 3, 1), (2, 3, 1)], 0, 3).unwrap();
        let ps = enumerate_st_paths(&g, 100).unwrap();
        let got: Vec<ArcPath> = ps.into_iter().map(|(_, p)| p).collect();
        assert_eq!(got, vec![vec![0, 2, 4], vec![0, 3], vec![1, 4]]);
        assert!(enumerate_st_paths(&g, 2).is_err());
    }

    #[test]
    fn minmaxdp_examples() {
        let b = OracleBudget::default();
        let g = Digraph::from_triples(3, &[(0, 1, 2), (1, 2, 2), (0, 2, 5)], 0, 2).unwrap();
        assert_eq!(exact_minmaxdp(&g, 1, &b).unwrap().paths, vec![vec![0, 1]]);
        let g = Digraph::from_triples(2, &[(0, 1, 1), (0, 1, 0), (0, 1, 0)], 0, 1).unwrap();
        assert_eq!(exact_minmaxdp(&g, 3, &b).unwrap().max_length(), 1);
        assert!(matches!(exact_minmaxdp(&g, 4, &b), Err(Error::Infeasible(_))));
    }

    #[test]
    fn water_filling_split() {
        assert_eq!(water_fill(&[5, 2], 4, 2), Some((vec![1, 3], 6)));
        assert_eq!(water_fill(&[5, 2], 1, 2), None);
    }

    #[test]
    fn convoy_oracle_examples() {
        let b = OracleBudget::default();
        let g = Digraph::from_triples(3, &[(0, 2, 5), (0, 1, 1), (1, 2, 1)], 0, 2).unwrap();
        let inst = TmoInstance::new(g.clone(), 2, 4).unwrap();
        assert_eq!(exact_tmo_convoy(&inst, &b).unwrap().1, 6);
        let inst = TmoInstance::new(g, 2, 1).unwrap();
        let (c, v) = exact_tmo_convoy(&inst, &b).unwrap();
        assert_eq!((c.paths, v), (vec![vec![1, 2]], 2));
    }

    #[test]
    fn full_oracle_single_arc() {
        let g = Digraph::from_triples(2, &[(0, 1, 5)], 0, 1).unwrap();
        let inst = TmoInstance::new(g, 2, 3).unwrap();
        assert_eq!(exact_tmo_full(&inst, &OracleBudget::default()).unwrap(), 9);
    }

    #[test]
    fn full_oracle_uses_zero_arcs_within_a_step() {
        let g = Digraph::from_triples(3, &[(0, 1, 0), (1, 2, 0), (0, 2, 3)], 0, 2).unwrap();
        let inst = TmoInstance::new(g, 4, 2).unwrap();
        // one train through the zero arcs at time 0, the other on the direct arc: max(0, 3)
        assert_eq!(exact_tmo_full(&inst, &OracleBudget::default()).unwrap(), 3);
    }

    #[test]
    fn time_expanded_examples() {
        let b = OracleBudget::default();
        let g = Digraph::from_triples(2, &[(0, 1, 3)], 0, 1).unwrap();
        assert_eq!(time_expanded_maxflow(&g, 3, &b).unwrap(), 0);
        assert_eq!(time_expanded_maxflow(&g, 4, &b).unwrap(), 1);
        let g = Digraph::from_triples(2, &[(0, 1, 1), (0, 1, 2)], 0, 1).unwrap();
        assert_eq!(time_expanded_maxflow(&g, 4, &b).unwrap(), 5);
    }
}
