//! Runs solvers against oracles over a suite of instances and tabulates ratio versus bound.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dp::{dp_solve, dp_solve_rounded, RoundingMode, Strategy, ThetaSet};
use crate::error::{Error, Result};
use crate::flow::solve_tmo_additive;
use crate::gen::{bundle_chain, random_sp};
use crate::graph::Digraph;
use crate::maxflow::max_disjoint_paths;
use crate::oracle::{exact_minmaxdp, exact_tmo_convoy, OracleBudget};
use crate::ratio::{harmonic, Epsilon, Frac};
use crate::reduction::{solve_tmo_blackbox, DpSolver};
use crate::spdecomp::decompose;
use crate::tmo::{convoy_makespan, TmoInstance};

#[derive(Debug, Clone)]
pub enum CaseData {
    MinMaxDp { graph: Digraph, k: usize },
    Tmo(TmoInstance),
}

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub data: CaseData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    DpBalanced,
    DpPhi,
    DpRounded(Epsilon),
    Flow,
    Blackbox(Epsilon),
}

impl Algo {
    pub fn name(&self) -> String {
        match self {
            Algo::DpBalanced => "dp-balanced".into(),
            Algo::DpPhi => "dp-phi".into(),
            Algo::DpRounded(e) => format!("dp-rounded(eps={e})"),
            Algo::Flow => "flow".into(),
            Algo::Blackbox(e) => format!("blackbox(eps={e})"),
        }
    }

    fn applies_to(&self, c: &CaseData) -> bool {
        matches!(
            (self, c),
            (Algo::DpBalanced | Algo::DpPhi | Algo::DpRounded(_), CaseData::MinMaxDp { .. })
                | (Algo::Flow | Algo::Blackbox(_), CaseData::Tmo(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: String,
    pub value: Option<i64>,
    pub oracle: Option<i64>,
    pub ratio: Option<f64>,
    /// Guaranteed ratio as an exact fraction, e.g. `11/6`.
    pub bound: Option<String>,
    /// `value ≤ bound · oracle`, checked exactly.
    pub within_bound: Option<bool>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.within_bound == Some(false)).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<i64>| v.map_or("-".to_string(), |x| x.to_string());
        let _ = writeln!(
            s,
            "{:<28} {:<22} {:>8} {:>8} {:>7} {:>8} {:>4} {:>9}",
            "instance", "algorithm", "value", "oracle", "ratio", "bound", "ok", "ms"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<28} {:<22} {:>8} {:>8} {:>7} {:>8} {:>4} {:>9.2}{}",
                r.instance,
                r.algorithm,
                opt(r.value),
                opt(r.oracle),
                r.ratio.map_or("-".into(), |x| format!("{x:.3}")),
                r.bound.clone().unwrap_or_else(|| "-".into()),
                match r.within_bound {
                    Some(true) => "yes",
                    Some(false) => "NO",
                    None => "-",
                },
                r.wall_ms,
                r.error.as_ref().map_or(String::new(), |e| format!("  error: {e}")),
            );
        }
        let _ = writeln!(s, "{} rows, {} bound violations", self.rows.len(), self.violations());
        s
    }
}

fn oracle_value(c: &CaseData, budget: &OracleBudget) -> Option<i64> {
    match c {
        CaseData::MinMaxDp { graph, k } => exact_minmaxdp(graph, *k, budget).ok().map(|p| p.max_length()),
        CaseData::Tmo(inst) => exact_tmo_convoy(inst, budget).ok().map(|r| r.1),
    }
}

/// Runs an algorithm and returns its objective value and guaranteed ratio.
fn run_one(algo: Algo, c: &CaseData, oracle: Option<i64>) -> Result<(i64, Frac)> {
    match (algo, c) {
        (Algo::DpBalanced | Algo::DpPhi | Algo::DpRounded(_), CaseData::MinMaxDp { graph, k }) => {
            let tree = decompose(graph)?;
            let phi1 = Frac::int(tree.phi() as i128 + 1);
            let hk = harmonic(*k);
            let (p, bound) = match algo {
                Algo::DpBalanced => (dp_solve(graph, &tree, *k, Strategy::Balanced, ThetaSet::Exact)?, hk),
                Algo::DpPhi => (dp_solve(graph, &tree, *k, Strategy::Phi, ThetaSet::Exact)?, phi1),
                Algo::DpRounded(e) => (
                    dp_solve_rounded(graph, &tree, *k, Strategy::Both, e, RoundingMode::Always)?,
                    hk.min(phi1) * (Frac::int(1) + e.as_frac()),
                ),
                _ => unreachable!(),
            };
            p.validate(graph, *k)?;
            Ok((p.max_length(), bound))
        }
        (Algo::Flow, CaseData::Tmo(inst)) => {
            let c = solve_tmo_additive(inst)?;
            let v = convoy_makespan(inst, &c)?;
            // additive Δ expressed as a ratio against the reference value
            let bound = match oracle {
                Some(o) if o > 0 => Frac::new((o + inst.delta) as i128, o as i128),
                _ => Frac::int(1),
            };
            Ok((v, bound))
        }
        (Algo::Blackbox(e), CaseData::Tmo(inst)) => {
            let solver = DpSolver { strategy: Strategy::Balanced, rounding: None };
            let r = solve_tmo_blackbox(inst, e, &solver)?;
            let kmax = (inst.graph.num_arcs() as u64).min(inst.trains) as usize;
            Ok((r.makespan, harmonic(kmax).max(Frac::int(1) + e.as_frac())))
        }
        _ => Err(Error::InvalidParameter("algorithm does not apply to this instance".into())),
    }
}

/// Evaluates every applicable (case, algorithm) pair on up to `jobs` threads.
/// Rows are sorted by instance and algorithm; failures become rows with `error` set.
pub fn run_bench(
    cases: &[BenchCase],
    algos: &[Algo],
    jobs: usize,
    budget: &OracleBudget,
    seed: u64,
) -> Result<BenchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let rows = pool.install(|| {
        let oracles: Vec<Option<i64>> = cases.par_iter().map(|c| oracle_value(&c.data, budget)).collect();
        let pairs: Vec<(usize, Algo)> = (0..cases.len())
            .flat_map(|i| algos.iter().filter(move |a| a.applies_to(&cases[i].data)).map(move |&a| (i, a)))
            .collect();
        pairs
            .par_iter()
            .map(|&(i, algo)| {
                let start = Instant::now();
                let res = run_one(algo, &cases[i].data, oracles[i]);
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let oracle = oracles[i];
                let mut row = BenchRow {
                    instance: cases[i].name.clone(),
                    algorithm: algo.name(),
                    value: None,
                    oracle,
                    ratio: None,
                    bound: None,
                    within_bound: None,
                    wall_ms,
                    error: None,
                };
                match res {
                    Ok((v, bound)) => {
                        row.value = Some(v);
                        row.bound = Some(bound.to_string());
                        if let Some(o) = oracle {
                            row.ratio = (o > 0).then(|| v as f64 / o as f64);
                            row.within_bound = Some(bound.admits(v, o));
                        }
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect::<Vec<_>>()
    });
    let mut rows = rows;
    rows.sort_by(|a, b| a.instance.cmp(&b.instance).then_with(|| a.algorithm.cmp(&b.algorithm)));
    Ok(BenchReport { seed, rows })
}

/// Desk-scale suite: random series-parallel graphs, bundle chains, and small train instances.
pub fn standard_suite(seed: u64, count: usize) -> Result<Vec<BenchCase>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for i in 0..count {
        let m = rng.gen_range(4..=14);
        let g = random_sp(&mut rng, m, 0, 20, 55, false)?;
        let mu = max_disjoint_paths(&g, None);
        let k = rng.gen_range(1..=mu.clamp(1, 5));
        cases.push(BenchCase { name: format!("sp-{i:03}"), data: CaseData::MinMaxDp { graph: g, k } });

        let bundles = rng.gen_range(2..=4);
        let width = rng.gen_range(2..=4);
        let taus: Vec<Vec<i64>> = (0..bundles).map(|_| (0..width).map(|_| rng.gen_range(0..=9)).collect()).collect();
        let k = rng.gen_range(1..=width);
        cases.push(BenchCase {
            name: format!("bundle-{i:03}"),
            data: CaseData::MinMaxDp { graph: bundle_chain(&taus)?, k },
        });

        let m = rng.gen_range(3..=8);
        let g = random_sp(&mut rng, m, 1, 6, 55, false)?;
        let inst = TmoInstance::new(g, rng.gen_range(1..=4), rng.gen_range(1..=6))?;
        cases.push(BenchCase { name: format!("tmo-{i:03}"), data: CaseData::Tmo(inst) });
    }
    Ok(cases)
}

pub fn standard_algos() -> Vec<Algo> {
    let half = Epsilon::new(1, 2).expect("positive");
    vec![Algo::DpBalanced, Algo::DpPhi, Algo::DpRounded(half), Algo::Flow, Algo::Blackbox(half)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_gives_empty_report() {
        let r = run_bench(&[], &standard_algos(), 2, &OracleBudget::default(), 0).unwrap();
        assert!(r.rows.is_empty());
    }

    #[test]
    fn small_suite_respects_bounds_and_is_sorted() {
        let cases = standard_suite(3, 4).unwrap();
        let r = run_bench(&cases, &standard_algos(), 4, &OracleBudget::default(), 3).unwrap();
        assert!(!r.rows.is_empty());
        assert!(r.rows.iter().all(|x| x.error.is_none()), "{}", r.to_text());
        assert_eq!(r.violations(), 0, "{}", r.to_text());
        let keys: Vec<_> = r.rows.iter().map(|x| (x.instance.clone(), x.algorithm.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let again = run_bench(&cases, &standard_algos(), 1, &OracleBudget::default(), 3).unwrap();
        assert_eq!(
            r.rows.iter().map(|x| x.value).collect::<Vec<_>>(),
            again.rows.iter().map(|x| x.value).collect::<Vec<_>>()
        );
    }
}
