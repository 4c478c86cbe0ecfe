//! Static integer max-flow (Dinic).

use std::collections::VecDeque;

use crate::graph::Digraph;

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    head: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds `u -> v` with capacity `c`; returns the edge index (its reverse is `index ^ 1`).
    pub fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let e = self.head.len();
        self.head.push(v);
        self.cap.push(c);
        self.adj[u].push(e);
        self.head.push(u);
        self.cap.push(0);
        self.adj[v].push(e + 1);
        e
    }

    /// Residual capacity of edge `e`.
    pub fn residual(&self, e: usize) -> i64 {
        self.cap[e]
    }

    pub fn max_flow(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        let n = self.adj.len();
        let mut total = 0;
        while total < limit {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.head[e];
                    if self.cap[e] > 0 && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                break;
            }
            let mut it = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, limit - total, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                total += pushed;
                if total >= limit {
                    break;
                }
            }
        }
        total
    }

    fn augment(&mut self, s: usize, t: usize, want: i64, level: &[usize], it: &mut [usize]) -> i64 {
        // iterative DFS along the level graph
        let mut stack: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let f = stack.iter().map(|&e| self.cap[e]).min().unwrap_or(want).min(want);
                for &e in &stack {
                    self.cap[e] -= f;
                    self.cap[e ^ 1] += f;
                }
                return f;
            }
            let mut advanced = false;
            while it[u] < self.adj[u].len() {
                let e = self.adj[u][it[u]];
                let v = self.head[e];
                if self.cap[e] > 0 && level[v] == level[u].wrapping_add(1) {
                    stack.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                it[u] += 1;
            }
            if !advanced {
                if u == s {
                    return 0;
                }
                let e = stack.pop().expect("nonempty");
                u = self.head[e ^ 1];
                it[u] += 1;
            }
        }
    }
}

/// Maximum number of arc-disjoint source-sink paths, restricted to arcs where `allowed` is true.
pub fn max_disjoint_paths(g: &Digraph, allowed: Option<&[bool]>) -> usize {
    let mut net = FlowNetwork::new(g.num_nodes());
    for (id, a) in g.arcs().iter().enumerate() {
        if allowed.is_none_or(|m| m[id]) {
            net.add_edge(a.tail, a.head, 1);
        }
    }
    net.max_flow(g.source(), g.sink(), i64::MAX) as usize
}
