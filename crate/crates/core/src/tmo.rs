//! Train makespan instances, general routings with entry times, and convoy routings.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{are_arc_disjoint, ArcId, ArcPath, Digraph};

/// Default upper bound on the number of trains [`expand_convoy`] will materialize.
pub const MATERIALIZATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmoInstance {
    pub graph: Digraph,
    /// Minimum gap between entry times of two trains on the same arc.
    pub delta: i64,
    pub trains: u64,
}

impl TmoInstance {
    pub fn new(graph: Digraph, delta: i64, trains: u64) -> Result<Self> {
        if delta < 1 {
            return Err(Error::InvalidParameter("headway must be at least 1".into()));
        }
        if trains < 1 {
            return Err(Error::InvalidParameter("need at least one train".into()));
        }
        Ok(TmoInstance { graph, delta, trains })
    }
}

/// One train: its path and the entry time on each arc of the path (aligned by position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainSchedule {
    pub path: ArcPath,
    pub entry: Vec<i64>,
}

impl TrainSchedule {
    pub fn entry_on(&self, a: ArcId) -> Option<i64> {
        self.path.iter().position(|&x| x == a).map(|i| self.entry[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainRouting {
    pub trains: Vec<TrainSchedule>,
}

/// Arc-disjoint paths, each carrying `sigma[i]` trains in single file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConvoyRouting {
    pub paths: Vec<ArcPath>,
    pub sigma: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Train entered `next` before finishing `arc`.
    Consistency {
        train: usize,
        arc: ArcId,
        next: ArcId,
    },
    /// Two trains entered `arc` closer than the headway.
    Headway {
        first: usize,
        second: usize,
        arc: ArcId,
    },
    NegativeEntry {
        train: usize,
        arc: ArcId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Consistency { train, arc, next } => {
                write!(f, "train {train}: enters arc {next} before leaving arc {arc}")
            }
            Violation::Headway { first, second, arc } => {
                write!(f, "trains {first} and {second} violate the headway on arc {arc}")
            }
            Violation::NegativeEntry { train, arc } => write!(f, "train {train}: negative entry time on arc {arc}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoutingError {
    /// Malformed input (wrong train count, unknown arc, path not from source to sink, ...).
    Structural(Error),
    /// Well-formed but violates consistency or headway.
    Infeasible(Vec<Violation>),
}

impl fmt::Display for RoutingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingError::Structural(e) => write!(f, "{e}"),
            RoutingError::Infeasible(v) => {
                write!(f, "{} violation(s)", v.len())?;
                for x in v {
                    write!(f, "; {x}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for RoutingError {}

fn check_structure(inst: &TmoInstance, r: &TrainRouting) -> Result<()> {
    if r.trains.len() as u64 != inst.trains {
        return Err(Error::Validation(format!("routing has {} trains, instance has {}", r.trains.len(), inst.trains)));
    }
    for (i, tr) in r.trains.iter().enumerate() {
        if tr.entry.len() != tr.path.len() {
            return Err(Error::Validation(format!("train {i}: entry times do not match the path")));
        }
        inst.graph.check_st_path(&tr.path).map_err(|e| Error::InvalidPath(format!("train {i}: {e}")))?;
    }
    Ok(())
}

/// Checks structure first, then every consistency and headway constraint.
pub fn validate_routing(inst: &TmoInstance, r: &TrainRouting) -> std::result::Result<(), RoutingError> {
    check_structure(inst, r).map_err(RoutingError::Structural)?;
    let g = &inst.graph;
    let mut violations = Vec::new();
    let mut users: HashMap<ArcId, Vec<(i64, usize)>> = HashMap::new();
    for (i, tr) in r.trains.iter().enumerate() {
        for (j, &a) in tr.path.iter().enumerate() {
            if tr.entry[j] < 0 {
                violations.push(Violation::NegativeEntry { train: i, arc: a });
            }
            if j + 1 < tr.path.len() && tr.entry[j].saturating_add(g.tau(a)) > tr.entry[j + 1] {
                violations.push(Violation::Consistency { train: i, arc: a, next: tr.path[j + 1] });
            }
            users.entry(a).or_default().push((tr.entry[j], i));
        }
    }
    let mut arcs: Vec<_> = users.into_iter().collect();
    arcs.sort_unstable_by_key(|(a, _)| *a);
    for (a, mut list) in arcs {
        list.sort_unstable();
        for w in list.windows(2) {
            if w[1].0 - w[0].0 < inst.delta {
                violations.push(Violation::Headway { first: w[0].1, second: w[1].1, arc: a });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(RoutingError::Infeasible(violations))
    }
}

/// Arrival time of the last train at the sink.
pub fn makespan(inst: &TmoInstance, r: &TrainRouting) -> Result<i64> {
    let mut best = 0i64;
    for tr in &r.trains {
        let (Some(&a), Some(&e)) = (tr.path.last(), tr.entry.last()) else {
            return Err(Error::InvalidPath("empty train path".into()));
        };
        best = best.max(e.checked_add(inst.graph.tau(a)).ok_or(Error::Overflow("makespan"))?);
    }
    Ok(best)
}

/// Checks paths, disjointness, and train counts of a convoy routing.
pub fn validate_convoy(inst: &TmoInstance, c: &ConvoyRouting) -> Result<()> {
    if c.paths.len() != c.sigma.len() {
        return Err(Error::Validation("paths and sigma differ in length".into()));
    }
    if c.paths.is_empty() {
        return Err(Error::Validation("convoy has no paths".into()));
    }
    for p in &c.paths {
        inst.graph.check_st_path(p)?;
    }
    if !are_arc_disjoint(&c.paths) {
        return Err(Error::Validation("convoy paths share an arc".into()));
    }
    if c.sigma.contains(&0) {
        return Err(Error::Validation("every path must carry at least one train".into()));
    }
    let total = c.sigma.iter().try_fold(0u64, |acc, &s| acc.checked_add(s)).ok_or(Error::Overflow("train count"))?;
    if total != inst.trains {
        return Err(Error::Validation(format!("convoy carries {total} trains, instance has {}", inst.trains)));
    }
    Ok(())
}

/// Closed-form makespan `max_i τ(P_i) + (σ_i − 1)Δ`; never materializes trains.
pub fn convoy_makespan(inst: &TmoInstance, c: &ConvoyRouting) -> Result<i64> {
    validate_convoy(inst, c)?;
    let mut best = 0i64;
    for (p, &s) in c.paths.iter().zip(&c.sigma) {
        best = best.max(convoy_path_makespan(inst.graph.path_length(p)?, s, inst.delta)?);
    }
    Ok(best)
}

/// `len + (sigma − 1)·delta` with overflow checks.
pub fn convoy_path_makespan(len: i64, sigma: u64, delta: i64) -> Result<i64> {
    let extra = i64::try_from(sigma.saturating_sub(1))
        .ok()
        .and_then(|s| s.checked_mul(delta))
        .ok_or(Error::Overflow("convoy makespan"))?;
    len.checked_add(extra).ok_or(Error::Overflow("convoy makespan"))
}

/// Materializes the convoy: trains on path `i` leave at `0, Δ, …` and never wait.
pub fn expand_convoy(inst: &TmoInstance, c: &ConvoyRouting) -> Result<TrainRouting> {
    expand_convoy_capped(inst, c, MATERIALIZATION_CAP)
}

pub fn expand_convoy_capped(inst: &TmoInstance, c: &ConvoyRouting, cap: u64) -> Result<TrainRouting> {
    validate_convoy(inst, c)?;
    if inst.trains > cap {
        return Err(Error::BudgetExceeded(format!("{} trains exceed the materialization cap {cap}", inst.trains)));
    }
    let g = &inst.graph;
    let mut trains = Vec::with_capacity(inst.trains as usize);
    for (p, &s) in c.paths.iter().zip(&c.sigma) {
        let mut offsets = Vec::with_capacity(p.len());
        let mut acc = 0i64;
        for &a in p {
            offsets.push(acc);
            acc += g.tau(a);
        }
        for j in 0..s as i64 {
            let start = j.checked_mul(inst.delta).ok_or(Error::Overflow("dispatch time"))?;
            trains.push(TrainSchedule { path: p.clone(), entry: offsets.iter().map(|o| o + start).collect() });
        }
    }
    Ok(TrainRouting { trains })
}
