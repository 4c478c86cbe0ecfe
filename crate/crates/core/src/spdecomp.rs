//! Series-parallel recognition, binary and contracted decomposition trees, and the S-depth parameter φ.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{ArcId, Digraph, NodeId};

pub type TreeNodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Composition {
    Series,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeNodeKind {
    Leaf(ArcId),
    Comp(Composition, TreeNodeId, TreeNodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub kind: TreeNodeKind,
    pub source: NodeId,
    pub sink: NodeId,
}

/// Binary decomposition tree. Children always have smaller ids than their parent,
/// so iterating `0..len()` is a valid bottom-up order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpTree {
    nodes: Vec<TreeNode>,
    root: TreeNodeId,
    leaf_of: Vec<TreeNodeId>,
}

/// Bottom-up construction of an [`SpTree`] with endpoint checks.
#[derive(Debug, Default)]
pub struct SpTreeBuilder {
    nodes: Vec<TreeNode>,
}

impl SpTreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, arc: ArcId, source: NodeId, sink: NodeId) -> TreeNodeId {
        self.nodes.push(TreeNode { kind: TreeNodeKind::Leaf(arc), source, sink });
        self.nodes.len() - 1
    }

    pub fn compose(&mut self, c: Composition, left: TreeNodeId, right: TreeNodeId) -> Result<TreeNodeId> {
        let (l, r) = (self.nodes[left], self.nodes[right]);
        let (source, sink) = match c {
            Composition::Series if l.sink == r.source => (l.source, r.sink),
            Composition::Parallel if l.source == r.source && l.sink == r.sink => (l.source, l.sink),
            _ => return Err(Error::InvalidGraph("composition endpoints do not match".into())),
        };
        self.nodes.push(TreeNode { kind: TreeNodeKind::Comp(c, left, right), source, sink });
        Ok(self.nodes.len() - 1)
    }

    /// Finishes the tree for graph `g`: leaves must biject with arcs and endpoints must agree.
    pub fn finish(self, root: TreeNodeId, g: &Digraph) -> Result<SpTree> {
        let mut leaf_of = vec![usize::MAX; g.num_arcs()];
        for (id, n) in self.nodes.iter().enumerate() {
            if let TreeNodeKind::Leaf(a) = n.kind {
                if a >= g.num_arcs() || leaf_of[a] != usize::MAX {
                    return Err(Error::InvalidGraph(format!("leaf for arc {a} is unknown or repeated")));
                }
                let arc = g.arc(a);
                if (arc.tail, arc.head) != (n.source, n.sink) {
                    return Err(Error::InvalidGraph(format!("leaf for arc {a} has wrong endpoints")));
                }
                leaf_of[a] = id;
            }
        }
        if leaf_of.contains(&usize::MAX) {
            return Err(Error::InvalidGraph("some arc has no leaf".into()));
        }
        let r = &self.nodes[root];
        if (r.source, r.sink) != (g.source(), g.sink()) {
            return Err(Error::InvalidGraph("root endpoints differ from graph terminals".into()));
        }
        if root + 1 != self.nodes.len() {
            return Err(Error::InvalidGraph("root must be the last node built".into()));
        }
        Ok(SpTree { nodes: self.nodes, root, leaf_of })
    }
}

/// Which applicable reduction is taken first during recognition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReductionOrder {
    /// Smallest node id first, then smallest edge ids.
    #[default]
    Ascending,
    /// Largest node id first, then largest edge ids. Used to obtain a second bracketing.
    Descending,
}

/// Recognizes `g` as series-parallel and returns its decomposition tree.
pub fn decompose(g: &Digraph) -> Result<SpTree> {
    decompose_with(g, ReductionOrder::Ascending)
}

pub fn decompose_with(g: &Digraph, order: ReductionOrder) -> Result<SpTree> {
    let n = g.num_nodes();
    let (s, t) = (g.source(), g.sink());
    let mut b = SpTreeBuilder::new();
    // live edges: (tail, head, tree node)
    let mut edges: Vec<Option<(NodeId, NodeId, TreeNodeId)>> = Vec::with_capacity(g.num_arcs());
    let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut inn: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (id, a) in g.arcs().iter().enumerate() {
        let leaf = b.leaf(id, a.tail, a.head);
        edges.push(Some((a.tail, a.head, leaf)));
        out[a.tail].insert(id);
        inn[a.head].insert(id);
    }
    let mut work: BTreeSet<NodeId> = (0..n).collect();
    let pop = |w: &mut BTreeSet<NodeId>| match order {
        ReductionOrder::Ascending => w.pop_first(),
        ReductionOrder::Descending => w.pop_last(),
    };
    while let Some(v) = pop(&mut work) {
        // parallel merge among the out-edges of v
        let mut pair = None;
        {
            let mut by_head: Vec<(NodeId, usize)> = out[v].iter().map(|&e| (edges[e].expect("live").1, e)).collect();
            if order == ReductionOrder::Descending {
                by_head.sort_unstable_by(|x, y| y.cmp(x));
            } else {
                by_head.sort_unstable();
            }
            for w in by_head.windows(2) {
                if w[0].0 == w[1].0 {
                    pair = Some((w[0].1, w[1].1));
                    break;
                }
            }
        }
        if let Some((e1, e2)) = pair {
            let (tail, head, n1) = edges[e1].expect("live");
            let n2 = edges[e2].expect("live").2;
            let node = b.compose(Composition::Parallel, n1, n2)?;
            edges[e1] = Some((tail, head, node));
            edges[e2] = None;
            out[tail].remove(&e2);
            inn[head].remove(&e2);
            work.insert(v);
            work.insert(head);
            continue;
        }
        if v == s || v == t || inn[v].len() != 1 || out[v].len() != 1 {
            continue;
        }
        let e_in = *inn[v].first().expect("one");
        let e_out = *out[v].first().expect("one");
        if e_in == e_out {
            continue;
        }
        let (u, _, n1) = edges[e_in].expect("live");
        let (_, w, n2) = edges[e_out].expect("live");
        let node = b.compose(Composition::Series, n1, n2)?;
        let (keep, drop) = (e_in.min(e_out), e_in.max(e_out));
        out[u].remove(&e_in);
        inn[v].remove(&e_in);
        out[v].remove(&e_out);
        inn[w].remove(&e_out);
        edges[drop] = None;
        edges[keep] = Some((u, w, node));
        out[u].insert(keep);
        inn[w].insert(keep);
        work.insert(u);
        work.insert(w);
    }
    let live: Vec<_> = edges.iter().flatten().collect();
    match live.as_slice() {
        [&(tail, head, root)] if tail == s && head == t => {
            // the root is not necessarily the last node built; rebuild in post-order
            let mut nb = SpTreeBuilder::new();
            let r = copy_postorder(&b.nodes, root, &mut nb)?;
            nb.finish(r, g)
        }
        _ => Err(Error::NotSeriesParallel),
    }
}

fn copy_postorder(nodes: &[TreeNode], root: TreeNodeId, b: &mut SpTreeBuilder) -> Result<TreeNodeId> {
    // explicit stack: series chains can be long
    enum Step {
        Visit(TreeNodeId),
        Build(TreeNodeId),
    }
    let mut done: Vec<Option<TreeNodeId>> = vec![None; nodes.len()];
    let mut stack = vec![Step::Visit(root)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Visit(x) => match nodes[x].kind {
                TreeNodeKind::Leaf(a) => done[x] = Some(b.leaf(a, nodes[x].source, nodes[x].sink)),
                TreeNodeKind::Comp(_, l, r) => {
                    stack.push(Step::Build(x));
                    stack.push(Step::Visit(r));
                    stack.push(Step::Visit(l));
                }
            },
            Step::Build(x) => {
                if let TreeNodeKind::Comp(c, l, r) = nodes[x].kind {
                    done[x] = Some(b.compose(c, done[l].expect("built"), done[r].expect("built"))?);
                }
            }
        }
    }
    Ok(done[root].expect("root built"))
}

/// Label of a contracted-tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    S,
    P,
    Leaf(ArcId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractedNode {
    pub label: Label,
    pub children: Vec<usize>,
}

/// Decomposition tree with adjacent same-label compositions merged; labels alternate along every root-leaf path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractedTree {
    pub nodes: Vec<ContractedNode>,
    pub root: usize,
}

impl ContractedTree {
    /// Canonical string: series children keep their order along the path, parallel children are sorted.
    pub fn canonical_form(&self) -> String {
        fn go(t: &ContractedTree, x: usize) -> String {
            let n = &t.nodes[x];
            match n.label {
                Label::Leaf(a) => format!("a{a}"),
                Label::S => format!("S({})", n.children.iter().map(|&c| go(t, c)).collect::<Vec<_>>().join(",")),
                Label::P => {
                    let mut parts: Vec<String> = n.children.iter().map(|&c| go(t, c)).collect();
                    parts.sort();
                    format!("P({})", parts.join(","))
                }
            }
        }
        go(self, self.root)
    }

    /// Max number of S nodes on a root-leaf path.
    pub fn phi(&self) -> usize {
        fn go(t: &ContractedTree, x: usize) -> usize {
            let n = &t.nodes[x];
            let own = usize::from(n.label == Label::S);
            own + n.children.iter().map(|&c| go(t, c)).max().unwrap_or(0)
        }
        go(self, self.root)
    }

    /// Re-contracts (merging any adjacent equal labels); a no-op on trees produced by [`SpTree::contract`].
    pub fn contract(&self) -> ContractedTree {
        let mut out = ContractedTree { nodes: Vec::new(), root: 0 };
        fn go(t: &ContractedTree, x: usize, out: &mut ContractedTree) -> usize {
            let n = &t.nodes[x];
            let mut kids = Vec::new();
            let mut stack: Vec<usize> = n.children.iter().rev().copied().collect();
            while let Some(c) = stack.pop() {
                if t.nodes[c].label == n.label {
                    stack.extend(t.nodes[c].children.iter().rev());
                } else {
                    kids.push(go(t, c, out));
                }
            }
            out.nodes.push(ContractedNode { label: n.label, children: kids });
            out.nodes.len() - 1
        }
        out.root = go(self, self.root, &mut out);
        out
    }
}

/// Maximal same-label set of internal binary-tree nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub kind: Composition,
    pub root: TreeNodeId,
    /// Tree nodes hanging below the component, left to right.
    pub children: Vec<TreeNodeId>,
}

impl SpTree {
    pub fn root(&self) -> TreeNodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, x: TreeNodeId) -> &TreeNode {
        &self.nodes[x]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn leaf_of(&self, a: ArcId) -> TreeNodeId {
        self.leaf_of[a]
    }

    pub fn composition(&self, x: TreeNodeId) -> Option<Composition> {
        match self.nodes[x].kind {
            TreeNodeKind::Leaf(_) => None,
            TreeNodeKind::Comp(c, _, _) => Some(c),
        }
    }

    /// Parent of every node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<TreeNodeId>> {
        let mut p = vec![None; self.nodes.len()];
        for (x, n) in self.nodes.iter().enumerate() {
            if let TreeNodeKind::Comp(_, l, r) = n.kind {
                p[l] = Some(x);
                p[r] = Some(x);
            }
        }
        p
    }

    /// Arcs below each tree node, as membership lists.
    pub fn leaf_arcs(&self) -> Vec<Vec<ArcId>> {
        let mut sets: Vec<Vec<ArcId>> = vec![Vec::new(); self.nodes.len()];
        for x in 0..self.nodes.len() {
            match self.nodes[x].kind {
                TreeNodeKind::Leaf(a) => sets[x] = vec![a],
                TreeNodeKind::Comp(_, l, r) => {
                    let mut v = sets[l].clone();
                    v.extend_from_slice(&sets[r]);
                    sets[x] = v;
                }
            }
        }
        sets
    }

    pub fn contract(&self) -> ContractedTree {
        let mut out = ContractedTree { nodes: Vec::new(), root: 0 };
        let mut built: Vec<Option<usize>> = vec![None; self.nodes.len()];
        for x in 0..self.nodes.len() {
            let node = match self.nodes[x].kind {
                TreeNodeKind::Leaf(a) => ContractedNode { label: Label::Leaf(a), children: vec![] },
                TreeNodeKind::Comp(c, l, r) => {
                    let label = if c == Composition::Series { Label::S } else { Label::P };
                    let mut children = Vec::new();
                    for side in [l, r] {
                        let cn = built[side].expect("children first");
                        if out.nodes[cn].label == label {
                            children.extend(out.nodes[cn].children.clone());
                        } else {
                            children.push(cn);
                        }
                    }
                    ContractedNode { label, children }
                }
            };
            out.nodes.push(node);
            built[x] = Some(out.nodes.len() - 1);
        }
        out.root = built[self.root].expect("root");
        // drop nodes that were absorbed into a same-label parent
        compact(&out)
    }

    /// φ of the whole graph.
    pub fn phi(&self) -> usize {
        self.phi_per_node()[self.root]
    }

    /// φ of the subgraph below every tree node, computed on the binary tree
    /// by counting entries into S-components.
    pub fn phi_per_node(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.nodes.len()];
        for x in 0..self.nodes.len() {
            if let TreeNodeKind::Comp(c, l, r) = self.nodes[x].kind {
                let is_s = c == Composition::Series;
                let inner = |y: TreeNodeId| -> usize {
                    let child_s = self.composition(y) == Some(Composition::Series);
                    h[y] - usize::from(is_s && child_s)
                };
                h[x] = usize::from(is_s) + inner(l).max(inner(r));
            }
        }
        h
    }

    /// Maximal same-label components in pre-order of their roots.
    pub fn component_partition(&self) -> Vec<Component> {
        let mut comps = Vec::new();
        let mut roots = vec![self.root];
        while let Some(r) = roots.pop() {
            let Some(kind) = self.composition(r) else { continue };
            let children = self.left_to_right(r, kind);
            for &c in children.iter().rev() {
                roots.push(c);
            }
            comps.push(Component { kind, root: r, children });
        }
        comps
    }

    fn left_to_right(&self, r: TreeNodeId, kind: Composition) -> Vec<TreeNodeId> {
        let mut out = Vec::new();
        let mut stack = vec![r];
        while let Some(x) = stack.pop() {
            if x != r && self.composition(x) != Some(kind) {
                out.push(x);
                continue;
            }
            if let TreeNodeKind::Comp(_, l, rr) = self.nodes[x].kind {
                stack.push(rr);
                stack.push(l);
            }
        }
        out
    }

    /// Indented text dump.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((x, depth)) = stack.pop() {
            let n = &self.nodes[x];
            let label = match n.kind {
                TreeNodeKind::Leaf(a) => format!("arc {a}"),
                TreeNodeKind::Comp(Composition::Series, ..) => "S".to_string(),
                TreeNodeKind::Comp(Composition::Parallel, ..) => "P".to_string(),
            };
            let _ = writeln!(s, "{}{} [{} -> {}]", "  ".repeat(depth), label, n.source, n.sink);
            if let TreeNodeKind::Comp(_, l, r) = n.kind {
                stack.push((r, depth + 1));
                stack.push((l, depth + 1));
            }
        }
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph T {\n");
        for (x, n) in self.nodes.iter().enumerate() {
            let label = match n.kind {
                TreeNodeKind::Leaf(a) => format!("a{a}"),
                TreeNodeKind::Comp(Composition::Series, ..) => "S".into(),
                TreeNodeKind::Comp(Composition::Parallel, ..) => "P".into(),
            };
            let _ = writeln!(s, "  n{x} [label=\"{label}\"];");
            if let TreeNodeKind::Comp(_, l, r) = n.kind {
                let _ = writeln!(s, "  n{x} -> n{l};\n  n{x} -> n{r};");
            }
        }
        s.push_str("}\n");
        s
    }
}

fn compact(t: &ContractedTree) -> ContractedTree {
    let mut out = ContractedTree { nodes: Vec::new(), root: 0 };
    fn go(t: &ContractedTree, x: usize, out: &mut ContractedTree) -> usize {
        let kids: Vec<usize> = t.nodes[x].children.iter().map(|&c| go(t, c, out)).collect();
        out.nodes.push(ContractedNode { label: t.nodes[x].label, children: kids });
        out.nodes.len() - 1
    }
    out.root = go(t, t.root, &mut out);
    out
}
