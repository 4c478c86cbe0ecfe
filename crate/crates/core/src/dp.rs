//! Dynamic program over a series-parallel decomposition tree for k arc-disjoint paths
//! with small maximum length.
//!
//! Cell `(tree node, k', θ')` holds a profile of `k'` paths through the node's subgraph with
//! total length `θ'`. Candidates come from greedy series/parallel composition of the
//! children's cells; the selection rule decides which candidate a cell keeps.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::maxflow::max_disjoint_paths;
use crate::profile::{balance_score, greedy_parallel, greedy_series, PathProfile};
use crate::ratio::{Epsilon, Frac};
use crate::spdecomp::{Composition, SpTree, TreeNodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Keep the candidate with the smallest balance score.
    Balanced,
    /// Series cells keep the smallest spread `p1 − pk'`, parallel cells the smallest `p1`.
    Phi,
    /// Run both rules and return the better result.
    Both,
}

/// Which totals θ' the table may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSet {
    /// Every total that actually occurs.
    Exact,
    /// Totals up to the bound.
    UpTo(i64),
}

/// Cells of one tree node, indexed by path count then total length.
pub type NodeTable = Vec<BTreeMap<i64, PathProfile>>;

/// All cells of a finished run, one table per tree node.
#[derive(Debug, Clone)]
pub struct DpTable {
    pub k: usize,
    pub tables: Vec<NodeTable>,
}

impl DpTable {
    pub fn cell(&self, node: usize, k: usize, theta: i64) -> Option<&PathProfile> {
        self.tables.get(node)?.get(k)?.get(&theta)
    }
}

/// Travel times and arc availability used inside one DP run.
struct Lengths<'a> {
    taus: &'a [i64],
    allowed: Option<&'a [bool]>,
}

fn score(strategy: Strategy, kind: Composition, lengths: &[i64]) -> Frac {
    match strategy {
        Strategy::Phi => match kind {
            Composition::Series => match (lengths.first(), lengths.last()) {
                (Some(a), Some(b)) => Frac::int((a - b) as i128),
                _ => Frac::int(0),
            },
            Composition::Parallel => Frac::int(lengths.first().copied().unwrap_or(0) as i128),
        },
        _ => balance_score(lengths),
    }
}

struct Best {
    score: Frac,
    lengths: Vec<i64>,
    left: (usize, i64),
    right: (usize, i64),
}

fn build(kind: Composition, lt: &NodeTable, rt: &NodeTable, b: &Best) -> Result<PathProfile> {
    let q = &lt[b.left.0][&b.left.1];
    let r = &rt[b.right.0][&b.right.1];
    match kind {
        Composition::Series => greedy_series(q, r),
        Composition::Parallel => Ok(greedy_parallel(q, r)),
    }
}

fn combine(
    kind: Composition,
    lt: &NodeTable,
    rt: &NodeTable,
    k: usize,
    strategy: Strategy,
    theta: ThetaSet,
) -> Result<NodeTable> {
    let mut best: Vec<HashMap<i64, Best>> = (0..=k).map(|_| HashMap::new()).collect();
    let mut buf: Vec<i64> = Vec::with_capacity(k);
    let mut offer = |kk: usize, th: i64, buf: &[i64], left: (usize, i64), right: (usize, i64)| -> Result<()> {
        if let ThetaSet::UpTo(bound) = theta {
            if th > bound {
                return Ok(());
            }
        }
        let sc = score(strategy, kind, buf);
        match best[kk].get_mut(&th) {
            None => {
                best[kk].insert(th, Best { score: sc, lengths: buf.to_vec(), left, right });
            }
            Some(cur) => {
                let ord = sc.cmp(&cur.score).then_with(|| buf.cmp(&cur.lengths[..]));
                let replace = match ord {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => {
                        let cand = Best { score: sc, lengths: buf.to_vec(), left, right };
                        let a = build(kind, lt, rt, &cand)?.arc_sequence();
                        let b = build(kind, lt, rt, cur)?.arc_sequence();
                        a < b
                    }
                };
                if replace {
                    *cur = Best { score: sc, lengths: buf.to_vec(), left, right };
                }
            }
        }
        Ok(())
    };
    match kind {
        Composition::Series => {
            for kk in 0..=k {
                for (&t1, q) in &lt[kk] {
                    for (&t2, r) in &rt[kk] {
                        buf.clear();
                        for i in 0..kk {
                            buf.push(
                                q.lengths[i].checked_add(r.lengths[kk - 1 - i]).ok_or(Error::Overflow("dp length"))?,
                            );
                        }
                        buf.sort_unstable_by(|a, b| b.cmp(a));
                        offer(kk, t1 + t2, &buf, (kk, t1), (kk, t2))?;
                    }
                }
            }
        }
        Composition::Parallel => {
            for (k1, lcells) in lt.iter().enumerate().take(k + 1) {
                for (k2, rcells) in rt.iter().enumerate().take(k + 1 - k1) {
                    for (&t1, q) in lcells {
                        for (&t2, r) in rcells {
                            buf.clear();
                            merge_desc(&q.lengths, &r.lengths, &mut buf);
                            offer(k1 + k2, t1 + t2, &buf, (k1, t1), (k2, t2))?;
                        }
                    }
                }
            }
        }
    }
    let mut out: NodeTable = vec![BTreeMap::new(); k + 1];
    for (kk, cells) in best.into_iter().enumerate() {
        for (th, b) in cells {
            out[kk].insert(th, build(kind, lt, rt, &b)?);
        }
    }
    Ok(out)
}

fn merge_desc(a: &[i64], b: &[i64], out: &mut Vec<i64>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] >= b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
}

fn check_tree(g: &Digraph, tree: &SpTree) -> Result<()> {
    for a in 0..g.num_arcs() {
        let node = tree.node(tree.leaf_of(a));
        let arc = g.arc(a);
        if node.kind != TreeNodeKind::Leaf(a) || (node.source, node.sink) != (arc.tail, arc.head) {
            return Err(Error::InvalidParameter("decomposition tree does not match the graph".into()));
        }
    }
    if tree.node(tree.root()).source != g.source() || tree.node(tree.root()).sink != g.sink() {
        return Err(Error::InvalidParameter("decomposition tree does not match the graph".into()));
    }
    Ok(())
}

/// Runs one selection rule bottom-up. Returns the root table and, if `keep`, every table.
fn run(
    tree: &SpTree,
    k: usize,
    strategy: Strategy,
    lengths: &Lengths<'_>,
    theta: ThetaSet,
    keep: bool,
) -> Result<(NodeTable, Vec<NodeTable>)> {
    let mut tables: Vec<NodeTable> = Vec::with_capacity(tree.len());
    for x in 0..tree.len() {
        let table = match tree.node(x).kind {
            TreeNodeKind::Leaf(a) => {
                let mut t: NodeTable = vec![BTreeMap::new(); k + 1];
                t[0].insert(0, PathProfile::default());
                let ok = lengths.allowed.is_none_or(|m| m[a]);
                if ok && k >= 1 && theta_ok(theta, lengths.taus[a]) {
                    t[1].insert(lengths.taus[a], PathProfile::from_parts(vec![vec![a]], vec![lengths.taus[a]]));
                }
                t
            }
            TreeNodeKind::Comp(c, l, r) => {
                let t = combine(c, &tables[l], &tables[r], k, strategy, theta)?;
                if !keep {
                    tables[l] = Vec::new();
                    tables[r] = Vec::new();
                }
                t
            }
        };
        tables.push(table);
    }
    let root = if keep { tables[tree.root()].clone() } else { std::mem::take(&mut tables[tree.root()]) };
    Ok((root, tables))
}

fn theta_ok(theta: ThetaSet, th: i64) -> bool {
    match theta {
        ThetaSet::Exact => true,
        ThetaSet::UpTo(b) => th <= b,
    }
}

/// Root cell with the smallest maximum length; ties go to the smaller total.
fn pick_root(root: &NodeTable, k: usize) -> Option<PathProfile> {
    root.get(k)?.iter().min_by_key(|(th, p)| (p.max_length(), **th)).map(|(_, p)| p.clone())
}

fn single_strategy(strategy: Strategy) -> Result<()> {
    if strategy == Strategy::Both {
        return Err(Error::InvalidParameter("a full table needs a single selection rule".into()));
    }
    Ok(())
}

fn precheck(g: &Digraph, tree: &SpTree, k: usize, allowed: Option<&[bool]>) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_tree(g, tree)?;
    let mu = max_disjoint_paths(g, allowed);
    if mu < k {
        return Err(Error::Infeasible(format!("only {mu} arc-disjoint paths exist, {k} requested")));
    }
    Ok(())
}

/// Every cell of the table for one selection rule (for inspection and tests).
pub fn dp_table(g: &Digraph, tree: &SpTree, k: usize, strategy: Strategy, theta: ThetaSet) -> Result<DpTable> {
    single_strategy(strategy)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_tree(g, tree)?;
    let taus: Vec<i64> = g.arcs().iter().map(|a| a.tau).collect();
    let (_, tables) = run(tree, k, strategy, &Lengths { taus: &taus, allowed: None }, theta, true)?;
    Ok(DpTable { k, tables })
}

/// One root profile per selection rule in `strategy`.
fn root_profiles(
    tree: &SpTree,
    k: usize,
    strategy: Strategy,
    lengths: &Lengths<'_>,
    theta: ThetaSet,
) -> Result<Vec<PathProfile>> {
    let rules: &[Strategy] = match strategy {
        Strategy::Both => &[Strategy::Balanced, Strategy::Phi],
        Strategy::Balanced => &[Strategy::Balanced],
        Strategy::Phi => &[Strategy::Phi],
    };
    let mut out = Vec::new();
    for &rule in rules {
        let (root, _) = run(tree, k, rule, lengths, theta, false)?;
        out.extend(pick_root(&root, k));
    }
    Ok(out)
}

/// First profile with the smallest maximum length.
fn best_of(ps: Vec<PathProfile>) -> Option<PathProfile> {
    let mut best: Option<PathProfile> = None;
    for p in ps {
        if best.as_ref().is_none_or(|b| p.max_length() < b.max_length()) {
            best = Some(p);
        }
    }
    best
}

/// k arc-disjoint paths chosen by the DP.
pub fn dp_solve(g: &Digraph, tree: &SpTree, k: usize, strategy: Strategy, theta: ThetaSet) -> Result<PathProfile> {
    precheck(g, tree, k, None)?;
    let taus: Vec<i64> = g.arcs().iter().map(|a| a.tau).collect();
    best_of(root_profiles(tree, k, strategy, &Lengths { taus: &taus, allowed: None }, theta)?)
        .ok_or_else(|| Error::Infeasible("no table entry at the root".into()))
}

/// When the rounding in [`dp_solve_rounded`] is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoundingMode {
    /// Skip rounding when exact totals are already within the rounded bound (`ε·τ_max ≤ m`).
    #[default]
    Auto,
    Always,
    /// Never round; identical to [`dp_solve`] with exact totals.
    Exact,
}

/// Guesses the longest arc of an optimal solution, drops longer arcs, scales the rest
/// to `⌈τ·m / (ε·τ̄)⌉`, solves, and keeps the guess whose paths are best under the true lengths.
pub fn dp_solve_rounded(
    g: &Digraph,
    tree: &SpTree,
    k: usize,
    strategy: Strategy,
    epsilon: Epsilon,
    mode: RoundingMode,
) -> Result<PathProfile> {
    precheck(g, tree, k, None)?;
    let m = g.num_arcs() as i128;
    let exact = match mode {
        RoundingMode::Exact => true,
        RoundingMode::Always => false,
        RoundingMode::Auto => (epsilon.num as i128) * (g.tau_max() as i128) <= m * epsilon.den as i128,
    };
    if exact {
        return dp_solve(g, tree, k, strategy, ThetaSet::Exact);
    }
    let (en, ed) = (epsilon.num as i128, epsilon.den as i128);
    // rounded arcs are at most ceil(m/ε), so totals stay below m·ceil(m/ε)
    let per_arc = (m * ed + en - 1) / en;
    let bound = i64::try_from(m * per_arc).map_err(|_| Error::Overflow("rounded totals"))?;
    let mut guesses: Vec<i64> = g.arcs().iter().map(|a| a.tau).collect();
    guesses.sort_unstable();
    guesses.dedup();
    let mut best: Option<PathProfile> = None;
    for &cap in &guesses {
        let allowed: Vec<bool> = g.arcs().iter().map(|a| a.tau <= cap).collect();
        if max_disjoint_paths(g, Some(&allowed)) < k {
            continue;
        }
        let taus: Vec<i64> = g
            .arcs()
            .iter()
            .map(|a| {
                if cap == 0 {
                    0
                } else {
                    let num = a.tau as i128 * ed * m;
                    let den = en * cap as i128;
                    ((num + den - 1) / den) as i64
                }
            })
            .collect();
        let lengths = Lengths { taus: &taus, allowed: Some(&allowed) };
        for p in root_profiles(tree, k, strategy, &lengths, ThetaSet::UpTo(bound))? {
            let true_p = p.remeasure(g)?;
            if best.as_ref().is_none_or(|b| true_p.max_length() < b.max_length()) {
                best = Some(true_p);
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("no rounding guess admits k paths".into()))
}
