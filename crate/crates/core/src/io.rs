//! JSON documents for instances and solutions (`"format": "convoy-opt/1"`).
//!
//! Node and arc identifiers in files may be integers or strings; they are mapped to dense
//! indices on load and written back unchanged.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Arc, ArcId, ArcPath, Digraph};
use crate::profile::PathProfile;
use crate::tmo::{ConvoyRouting, TmoInstance, TrainRouting, TrainSchedule};

pub const FORMAT: &str = "convoy-opt/1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ident {
    Int(i64),
    Str(String),
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ident::Int(v) => write!(f, "{v}"),
            Ident::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<Ident>,
    tail: Ident,
    head: Ident,
    tau: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<Ident>>,
    arcs: Vec<ArcDoc>,
    source: Ident,
    sink: Ident,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trains: Option<u64>,
}

/// External names of nodes and arcs, indexed by internal id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Names {
    pub nodes: Vec<Ident>,
    pub arcs: Vec<Ident>,
    arc_lookup: HashMap<String, ArcId>,
}

impl Names {
    /// Integer names equal to the internal ids.
    pub fn identity(g: &Digraph) -> Names {
        let nodes = (0..g.num_nodes()).map(|v| Ident::Int(v as i64)).collect();
        let arcs: Vec<Ident> = (0..g.num_arcs()).map(|a| Ident::Int(a as i64)).collect();
        Names::new(nodes, arcs).expect("integer names are distinct")
    }

    fn new(nodes: Vec<Ident>, arcs: Vec<Ident>) -> Result<Names> {
        let mut arc_lookup = HashMap::new();
        for (i, a) in arcs.iter().enumerate() {
            if arc_lookup.insert(a.to_string(), i).is_some() {
                return Err(Error::Parse(format!("duplicate arc id {a}")));
            }
        }
        Ok(Names { nodes, arcs, arc_lookup })
    }

    pub fn arc(&self, id: &Ident) -> Result<ArcId> {
        self.arc_by_key(&id.to_string())
    }

    fn arc_by_key(&self, key: &str) -> Result<ArcId> {
        self.arc_lookup.get(key).copied().ok_or_else(|| Error::Parse(format!("unknown arc id {key}")))
    }

    fn path(&self, ids: &[Ident]) -> Result<ArcPath> {
        ids.iter().map(|i| self.arc(i)).collect()
    }

    fn ids(&self, p: &[ArcId]) -> Vec<Ident> {
        p.iter().map(|&a| self.arcs[a].clone()).collect()
    }
}

/// A graph read from disk, optionally with train parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedInstance {
    pub graph: Digraph,
    pub names: Names,
    pub delta: Option<i64>,
    pub trains: Option<u64>,
}

impl LoadedInstance {
    pub fn tmo(&self) -> Result<TmoInstance> {
        match (self.delta, self.trains) {
            (Some(delta), Some(trains)) => TmoInstance::new(self.graph.clone(), delta, trains),
            _ => Err(Error::Parse("instance has no \"delta\"/\"trains\" fields".into())),
        }
    }
}

fn check_format(f: &str) -> Result<()> {
    if f != FORMAT {
        return Err(Error::Parse(format!("unsupported format {f:?}, expected {FORMAT:?}")));
    }
    Ok(())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn parse_instance(text: &str) -> Result<LoadedInstance> {
    let doc: InstanceDoc = parse_json(text)?;
    check_format(&doc.format)?;
    let mut node_ids: Vec<Ident> = Vec::new();
    let mut node_index: HashMap<Ident, usize> = HashMap::new();
    if let Some(nodes) = &doc.nodes {
        for id in nodes {
            if node_index.insert(id.clone(), node_ids.len()).is_some() {
                return Err(Error::Parse(format!("duplicate node {id}")));
            }
            node_ids.push(id.clone());
        }
    }
    let declared = doc.nodes.is_some();
    let mut intern = |id: &Ident, node_ids: &mut Vec<Ident>| -> Result<usize> {
        if let Some(&i) = node_index.get(id) {
            return Ok(i);
        }
        if declared {
            return Err(Error::Parse(format!("undeclared node {id}")));
        }
        node_index.insert(id.clone(), node_ids.len());
        node_ids.push(id.clone());
        Ok(node_ids.len() - 1)
    };
    let source = intern(&doc.source, &mut node_ids)?;
    let sink = intern(&doc.sink, &mut node_ids)?;
    let mut arcs = Vec::with_capacity(doc.arcs.len());
    let mut arc_ids = Vec::with_capacity(doc.arcs.len());
    for (i, a) in doc.arcs.iter().enumerate() {
        let tail = intern(&a.tail, &mut node_ids)?;
        let head = intern(&a.head, &mut node_ids)?;
        arcs.push(Arc { tail, head, tau: a.tau });
        arc_ids.push(a.id.clone().unwrap_or(Ident::Int(i as i64)));
    }
    let graph = Digraph::new(node_ids.len(), arcs, source, sink)?;
    Ok(LoadedInstance { graph, names: Names::new(node_ids, arc_ids)?, delta: doc.delta, trains: doc.trains })
}

pub fn emit_instance(g: &Digraph, names: Option<&Names>, tmo: Option<(i64, u64)>) -> String {
    let owned;
    let names = match names {
        Some(n) => n,
        None => {
            owned = Names::identity(g);
            &owned
        }
    };
    let doc = InstanceDoc {
        format: FORMAT.into(),
        nodes: Some(names.nodes.clone()),
        arcs: g
            .arcs()
            .iter()
            .enumerate()
            .map(|(i, a)| ArcDoc {
                id: Some(names.arcs[i].clone()),
                tail: names.nodes[a.tail].clone(),
                head: names.nodes[a.head].clone(),
                tau: a.tau,
            })
            .collect(),
        source: names.nodes[g.source()].clone(),
        sink: names.nodes[g.sink()].clone(),
        delta: tmo.map(|t| t.0),
        trains: tmo.map(|t| t.1),
    };
    to_json(&doc)
}

pub fn emit_tmo(inst: &TmoInstance, names: Option<&Names>) -> String {
    emit_instance(&inst.graph, names, Some((inst.delta, inst.trains)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvoyDoc {
    format: String,
    kind: String,
    paths: Vec<Vec<Ident>>,
    sigma: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    makespan: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainDoc {
    path: Vec<Ident>,
    entry: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoutingDoc {
    format: String,
    kind: String,
    trains: Vec<TrainDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    makespan: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    format: String,
    kind: String,
    paths: Vec<Vec<Ident>>,
    lengths: Vec<i64>,
    max_length: i64,
}

/// A solution file of any kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Convoy(ConvoyRouting),
    Routing(TrainRouting),
    Profile(PathProfile),
}

fn check_kind(kind: &str, want: &str) -> Result<()> {
    if kind != want {
        return Err(Error::Parse(format!("expected a {want:?} document, found {kind:?}")));
    }
    Ok(())
}

pub fn emit_convoy(c: &ConvoyRouting, names: &Names, makespan: Option<i64>) -> String {
    to_json(&ConvoyDoc {
        format: FORMAT.into(),
        kind: "convoy".into(),
        paths: c.paths.iter().map(|p| names.ids(p)).collect(),
        sigma: c.sigma.clone(),
        makespan,
    })
}

pub fn emit_routing(r: &TrainRouting, names: &Names, makespan: Option<i64>) -> String {
    let trains = r
        .trains
        .iter()
        .map(|t| TrainDoc {
            path: names.ids(&t.path),
            entry: t.path.iter().zip(&t.entry).map(|(&a, &e)| (names.arcs[a].to_string(), e)).collect(),
        })
        .collect();
    to_json(&RoutingDoc { format: FORMAT.into(), kind: "routing".into(), trains, makespan })
}

pub fn emit_profile(p: &PathProfile, names: &Names) -> String {
    to_json(&ProfileDoc {
        format: FORMAT.into(),
        kind: "profile".into(),
        paths: p.paths.iter().map(|q| names.ids(q)).collect(),
        lengths: p.lengths.clone(),
        max_length: p.max_length(),
    })
}

/// Reads any solution document; arc ids are resolved against `names`.
/// Stored lengths of a profile are re-measured in `g`.
pub fn parse_solution(text: &str, g: &Digraph, names: &Names) -> Result<Solution> {
    #[derive(Deserialize)]
    struct Peek {
        kind: Option<String>,
    }
    let peek: Peek = serde_json::from_str::<serde_json::Value>(text)
        .and_then(serde_json::from_value)
        .map_err(|e| Error::Parse(e.to_string()))?;
    match peek.kind.as_deref() {
        Some("convoy") => parse_convoy(text, names).map(Solution::Convoy),
        Some("routing") => parse_routing(text, names).map(Solution::Routing),
        Some("profile") => {
            let doc: ProfileDoc = parse_json(text)?;
            check_format(&doc.format)?;
            let paths = doc.paths.iter().map(|p| names.path(p)).collect::<Result<Vec<_>>>()?;
            let p = PathProfile::new(g, paths)?;
            if p.max_length() != doc.max_length {
                return Err(Error::Validation("stored max_length does not match the graph".into()));
            }
            Ok(Solution::Profile(p))
        }
        Some(other) => Err(Error::Parse(format!("unknown solution kind {other:?}"))),
        None => Err(Error::Parse("solution document lacks \"kind\"".into())),
    }
}

pub fn parse_convoy(text: &str, names: &Names) -> Result<ConvoyRouting> {
    let doc: ConvoyDoc = parse_json(text)?;
    check_format(&doc.format)?;
    check_kind(&doc.kind, "convoy")?;
    if doc.paths.len() != doc.sigma.len() {
        return Err(Error::Parse("paths and sigma differ in length".into()));
    }
    let paths = doc.paths.iter().map(|p| names.path(p)).collect::<Result<Vec<_>>>()?;
    Ok(ConvoyRouting { paths, sigma: doc.sigma })
}

pub fn parse_routing(text: &str, names: &Names) -> Result<TrainRouting> {
    let doc: RoutingDoc = parse_json(text)?;
    check_format(&doc.format)?;
    check_kind(&doc.kind, "routing")?;
    let mut trains = Vec::with_capacity(doc.trains.len());
    for (i, t) in doc.trains.iter().enumerate() {
        let path = names.path(&t.path)?;
        let mut by_arc: HashMap<ArcId, i64> = HashMap::new();
        for (k, &v) in &t.entry {
            by_arc.insert(names.arc_by_key(k)?, v);
        }
        if by_arc.len() != path.len() {
            return Err(Error::Parse(format!("train {i}: entry times must cover exactly the path arcs")));
        }
        let entry = path
            .iter()
            .map(|a| {
                by_arc
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::Parse(format!("train {i}: no entry time for arc {}", names.arcs[*a])))
            })
            .collect::<Result<Vec<_>>>()?;
        trains.push(TrainSchedule { path, entry });
    }
    Ok(TrainRouting { trains })
}
