//! Directed multigraph with integer travel times and the path helpers shared by all solvers.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type ArcId = usize;
/// Ordered list of arc ids.
pub type ArcPath = Vec<ArcId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub tau: i64,
}

/// Immutable two-terminal digraph. Arc ids are positions in `arcs`, node ids are `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
    source: NodeId,
    sink: NodeId,
    out: Vec<Vec<ArcId>>,
    inc: Vec<Vec<ArcId>>,
}

impl Digraph {
    pub fn new(n: usize, arcs: Vec<Arc>, source: NodeId, sink: NodeId) -> Result<Self> {
        if source >= n {
            return Err(Error::unknown_node(source));
        }
        if sink >= n {
            return Err(Error::unknown_node(sink));
        }
        if source == sink {
            return Err(Error::InvalidGraph("source equals sink".into()));
        }
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (id, a) in arcs.iter().enumerate() {
            if a.tail >= n || a.head >= n {
                return Err(Error::InvalidGraph(format!("arc {id} has an undeclared endpoint")));
            }
            if a.tau < 0 {
                return Err(Error::InvalidGraph(format!("arc {id} has negative travel time")));
            }
            out[a.tail].push(id);
            inc[a.head].push(id);
        }
        let g = Digraph { n, arcs, source, sink, out, inc };
        if !g.reachable_from(source)[sink] {
            return Err(Error::InvalidGraph("sink not reachable from source".into()));
        }
        Ok(g)
    }

    /// Convenience constructor from `(tail, head, tau)` triples.
    pub fn from_triples(n: usize, arcs: &[(NodeId, NodeId, i64)], source: NodeId, sink: NodeId) -> Result<Self> {
        let arcs = arcs.iter().map(|&(tail, head, tau)| Arc { tail, head, tau }).collect();
        Digraph::new(n, arcs, source, sink)
    }

    /// Same topology, new travel times.
    pub fn with_taus(&self, taus: &[i64]) -> Result<Self> {
        if taus.len() != self.arcs.len() {
            return Err(Error::InvalidParameter("travel time vector has wrong length".into()));
        }
        let arcs = self.arcs.iter().zip(taus).map(|(a, &tau)| Arc { tau, ..*a }).collect();
        Digraph::new(self.n, arcs, self.source, self.sink)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: ArcId) -> &Arc {
        &self.arcs[a]
    }

    pub fn tau(&self, a: ArcId) -> i64 {
        self.arcs[a].tau
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn out_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.inc[v]
    }

    pub fn tau_max(&self) -> i64 {
        self.arcs.iter().map(|a| a.tau).max().unwrap_or(0)
    }

    fn reachable_from(&self, v: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![v];
        seen[v] = true;
        while let Some(u) = stack.pop() {
            for &a in &self.out[u] {
                let w = self.arcs[a].head;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Exact length of a walk; checks arc ids and incidence.
    pub fn path_length(&self, p: &[ArcId]) -> Result<i64> {
        let mut total: i64 = 0;
        for (i, &a) in p.iter().enumerate() {
            if a >= self.arcs.len() {
                return Err(Error::unknown_arc(a));
            }
            if i > 0 && self.arcs[p[i - 1]].head != self.arcs[a].tail {
                return Err(Error::not_incident(p[i - 1], a));
            }
            total = total.checked_add(self.arcs[a].tau).ok_or(Error::Overflow("path length"))?;
        }
        Ok(total)
    }

    /// Node sequence visited by a nonempty walk (tail of the first arc first).
    pub fn path_nodes(&self, p: &[ArcId]) -> Vec<NodeId> {
        let mut nodes = Vec::with_capacity(p.len() + 1);
        if let Some(&first) = p.first() {
            nodes.push(self.arcs[first].tail);
        }
        nodes.extend(p.iter().map(|&a| self.arcs[a].head));
        nodes
    }

    /// Checks that `p` is a simple source-sink path and returns its length.
    pub fn check_st_path(&self, p: &[ArcId]) -> Result<i64> {
        if p.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        let len = self.path_length(p)?;
        if self.arcs[p[0]].tail != self.source {
            return Err(Error::InvalidPath("path does not start at the source".into()));
        }
        if self.arcs[p[p.len() - 1]].head != self.sink {
            return Err(Error::InvalidPath("path does not end at the sink".into()));
        }
        let mut seen = HashSet::new();
        for v in self.path_nodes(p) {
            if !seen.insert(v) {
                return Err(Error::InvalidPath(format!("path revisits node {v}")));
            }
        }
        Ok(len)
    }

    /// Distances to `to` from every node (`None` if `to` is unreachable).
    pub fn distances_to(&self, to: NodeId) -> Vec<Option<i64>> {
        self.dijkstra(to, true)
    }

    /// Distances from `from` to every node.
    pub fn distances_from(&self, from: NodeId) -> Vec<Option<i64>> {
        self.dijkstra(from, false)
    }

    fn dijkstra(&self, root: NodeId, reverse: bool) -> Vec<Option<i64>> {
        let mut dist: Vec<Option<i64>> = vec![None; self.n];
        let mut heap = BinaryHeap::new();
        dist[root] = Some(0);
        heap.push(Reverse((0i64, root)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u] != Some(d) {
                continue;
            }
            let adj = if reverse { &self.inc[u] } else { &self.out[u] };
            for &a in adj {
                let arc = &self.arcs[a];
                let w = if reverse { arc.tail } else { arc.head };
                let nd = d.saturating_add(arc.tau);
                if dist[w].is_none_or(|old| nd < old) {
                    dist[w] = Some(nd);
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist
    }

    /// Minimum-length simple path; among those, the lexicographically smallest arc-id sequence.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Option<(ArcPath, i64)> {
        if from >= self.n || to >= self.n {
            return None;
        }
        let dist = self.distances_to(to);
        let total = dist[from]?;
        let tight = |a: ArcId| -> bool {
            let arc = &self.arcs[a];
            match (dist[arc.tail], dist[arc.head]) {
                (Some(dt), Some(dh)) => dh.checked_add(arc.tau) == Some(dt),
                _ => false,
            }
        };
        let mut visited = vec![false; self.n];
        visited[from] = true;
        let mut path = Vec::new();
        let mut cur = from;
        while cur != to {
            let mut arcs: Vec<ArcId> = self.out[cur].iter().copied().filter(|&a| tight(a)).collect();
            arcs.sort_unstable();
            let next = arcs.into_iter().find(|&a| {
                let h = self.arcs[a].head;
                !visited[h] && self.tight_reach(h, to, &visited, &tight)
            })?;
            path.push(next);
            cur = self.arcs[next].head;
            visited[cur] = true;
        }
        Some((path, total))
    }

    fn tight_reach(&self, from: NodeId, to: NodeId, blocked: &[bool], tight: &dyn Fn(ArcId) -> bool) -> bool {
        let mut seen = blocked.to_vec();
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &a in &self.out[u] {
                let w = self.arcs[a].head;
                if !seen[w] && tight(a) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// Graphviz rendering; each path in `paths` gets its own color.
    pub fn to_dot(&self, paths: &[ArcPath]) -> String {
        const COLORS: [&str; 8] = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan"];
        let mut color_of = vec![None; self.arcs.len()];
        for (i, p) in paths.iter().enumerate() {
            for &a in p {
                if a < color_of.len() {
                    color_of[a] = Some(COLORS[i % COLORS.len()]);
                }
            }
        }
        let mut s = String::from("digraph G {\n  rankdir=LR;\n");
        let _ = writeln!(s, "  {} [shape=doublecircle,label=\"s\"];", self.source);
        let _ = writeln!(s, "  {} [shape=doublecircle,label=\"t\"];", self.sink);
        for (id, a) in self.arcs.iter().enumerate() {
            let style = match color_of[id] {
                Some(c) => format!(",color={c},penwidth=2"),
                None => String::new(),
            };
            let _ = writeln!(s, "  {} -> {} [label=\"a{}:{}\"{}];", a.tail, a.head, id, a.tau, style);
        }
        s.push_str("}\n");
        s
    }
}

/// True iff no arc occurs in two distinct paths (repeats inside one path are not checked here).
pub fn are_arc_disjoint(paths: &[ArcPath]) -> bool {
    let mut owner = std::collections::HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        for &a in p {
            if let Some(&j) = owner.get(&a) {
                if j != i {
                    return false;
                }
            } else {
                owner.insert(a, i);
            }
        }
    }
    true
}
