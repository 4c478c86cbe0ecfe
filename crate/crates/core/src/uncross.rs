//! Rewrites a feasible acyclic routing into a convoy routing without increasing the makespan.
//!
//! Trains are moved onto the suffix of a leader (the first train on an arc entering the sink)
//! until every leader's path consists of arcs on which the same trains precede it in the same
//! order. Each leader then takes all trains that share its final arc.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::ArcId;
use crate::tmo::{convoy_makespan, makespan, validate_routing, ConvoyRouting, TmoInstance, TrainRouting};

/// One rerouting step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncrossStep {
    pub leader: usize,
    pub transition_arc: ArcId,
    /// Trains moved onto the leader's suffix, in the order they use the transition arc.
    pub rerouted: Vec<usize>,
    pub potential_before: u64,
    pub potential_after: u64,
}

/// Trains on each arc sorted by entry time.
fn occupancy(r: &TrainRouting) -> HashMap<ArcId, Vec<(i64, usize)>> {
    let mut occ: HashMap<ArcId, Vec<(i64, usize)>> = HashMap::new();
    for (i, tr) in r.trains.iter().enumerate() {
        for (&a, &e) in tr.path.iter().zip(&tr.entry) {
            occ.entry(a).or_default().push((e, i));
        }
    }
    for v in occ.values_mut() {
        v.sort_unstable();
    }
    occ
}

/// Trains that use `a` no later than train `x`, including `x`, in order of use.
fn predecessors(occ: &HashMap<ArcId, Vec<(i64, usize)>>, a: ArcId, x: usize) -> Vec<usize> {
    let list = &occ[&a];
    let end = list.iter().position(|&(_, i)| i == x).expect("train uses arc");
    list[..=end].iter().map(|&(_, i)| i).collect()
}

fn transition_with(occ: &HashMap<ArcId, Vec<(i64, usize)>>, r: &TrainRouting, x: usize) -> Option<(usize, ArcId)> {
    let path = &r.trains[x].path;
    let last = *path.last()?;
    let reference = predecessors(occ, last, x);
    (0..path.len() - 1).rev().find(|&j| predecessors(occ, path[j], x) != reference).map(|j| (j, path[j]))
}

/// Position and id of the last arc on train `x`'s path whose preceding trains differ from
/// those on its final arc; `None` when all arcs agree.
pub fn transition_arc(r: &TrainRouting, x: usize) -> Option<(usize, ArcId)> {
    transition_with(&occupancy(r), r, x)
}

/// Sum over trains of the number of arcs from the source up to and including the transition arc.
pub fn potential(r: &TrainRouting) -> u64 {
    let occ = occupancy(r);
    (0..r.trains.len()).filter_map(|x| transition_with(&occ, r, x)).map(|(j, _)| j as u64 + 1).sum()
}

/// First train on every used arc entering the sink, as `(arc, train)` sorted by arc.
pub fn leaders(inst: &TmoInstance, r: &TrainRouting) -> Vec<(ArcId, usize)> {
    let occ = occupancy(r);
    let mut out: Vec<(ArcId, usize)> =
        inst.graph.in_arcs(inst.graph.sink()).iter().filter_map(|a| occ.get(a).map(|list| (*a, list[0].1))).collect();
    out.sort_unstable();
    out
}

pub fn uncross(inst: &TmoInstance, r: &TrainRouting) -> Result<ConvoyRouting> {
    uncross_traced(inst, r).map(|(c, _)| c)
}

/// Runs the rerouting loop and returns the convoy together with the step log.
///
/// Every step is checked: the routing stays feasible and the total potential strictly drops.
pub fn uncross_traced(inst: &TmoInstance, input: &TrainRouting) -> Result<(ConvoyRouting, Vec<UncrossStep>)> {
    validate_routing(inst, input).map_err(|e| Error::Validation(e.to_string()))?;
    let before = makespan(inst, input)?;
    let mut r = input.clone();
    let mut steps = Vec::new();
    loop {
        let occ = occupancy(&r);
        let pot_before: u64 =
            (0..r.trains.len()).filter_map(|x| transition_with(&occ, &r, x)).map(|(j, _)| j as u64 + 1).sum();
        let mut pick: Option<(usize, usize, usize, ArcId)> = None;
        for (_, x) in leaders(inst, &r) {
            if let Some((j, a)) = transition_with(&occ, &r, x) {
                let key = (r.trains[x].path.len() - 1 - j, x);
                if pick.is_none_or(|(d, y, _, _)| key < (d, y)) {
                    pick = Some((key.0, x, j, a));
                }
            }
        }
        let Some((_, x, j, a_tr)) = pick else { break };
        let rerouted = predecessors(&occ, a_tr, x);
        reroute(inst, &mut r, x, j, &rerouted)?;
        validate_routing(inst, &r).map_err(|e| Error::Internal(format!("step broke feasibility: {e}")))?;
        let pot_after = potential(&r);
        if pot_after >= pot_before {
            return Err(Error::Internal(format!("potential did not drop ({pot_before} -> {pot_after})")));
        }
        steps.push(UncrossStep {
            leader: x,
            transition_arc: a_tr,
            rerouted,
            potential_before: pot_before,
            potential_after: pot_after,
        });
    }
    let convoy = collect_convoy(inst, &r)?;
    let after = convoy_makespan(inst, &convoy).map_err(|e| Error::Internal(format!("convoy invalid: {e}")))?;
    if after > before {
        return Err(Error::Internal(format!("makespan grew from {before} to {after}")));
    }
    Ok((convoy, steps))
}

/// Moves every train in `set` onto leader `x`'s suffix after position `j`, without waiting.
fn reroute(inst: &TmoInstance, r: &mut TrainRouting, x: usize, j: usize, set: &[usize]) -> Result<()> {
    let g = &inst.graph;
    let a_tr = r.trains[x].path[j];
    let suffix: Vec<ArcId> = r.trains[x].path[j + 1..].to_vec();
    for &y in set {
        let tr = &mut r.trains[y];
        let pos = tr.path.iter().position(|&a| a == a_tr).expect("rerouted train uses the transition arc");
        tr.path.truncate(pos + 1);
        tr.entry.truncate(pos + 1);
        for &a in &suffix {
            let prev = *tr.path.last().expect("nonempty");
            let t = tr.entry.last().expect("nonempty").checked_add(g.tau(prev)).ok_or(Error::Overflow("entry"))?;
            tr.path.push(a);
            tr.entry.push(t);
        }
        shortcut_cycles(inst, tr);
    }
    Ok(())
}

/// Cuts node repetitions out of a path, keeping the later entry times. Never triggers on
/// acyclic graphs; on general graphs it keeps paths simple.
fn shortcut_cycles(inst: &TmoInstance, tr: &mut crate::tmo::TrainSchedule) {
    loop {
        let nodes = inst.graph.path_nodes(&tr.path);
        let mut first_seen: HashMap<usize, usize> = HashMap::new();
        let mut cut = None;
        for (i, v) in nodes.iter().enumerate() {
            if let Some(&k) = first_seen.get(v) {
                cut = Some((k, i));
                break;
            }
            first_seen.insert(*v, i);
        }
        let Some((k, i)) = cut else { return };
        // node k == node i: drop arcs k..i
        tr.path.drain(k..i);
        tr.entry.drain(k..i);
    }
}

fn collect_convoy(inst: &TmoInstance, r: &TrainRouting) -> Result<ConvoyRouting> {
    let occ = occupancy(r);
    let mut convoy = ConvoyRouting::default();
    let mut seen = HashSet::new();
    for (a, x) in leaders(inst, r) {
        if !seen.insert(x) {
            return Err(Error::Internal(format!("train {x} leads two sink arcs")));
        }
        convoy.paths.push(r.trains[x].path.clone());
        convoy.sigma.push(occ[&a].len() as u64);
    }
    Ok(convoy)
}
