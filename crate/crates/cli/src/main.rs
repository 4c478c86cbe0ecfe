//! `convoy-opt`: solve, check and generate train routing and min-max path instances.
//!
//! Exit codes: 0 ok, 1 other error, 2 infeasible, 3 validation failure, 4 budget exceeded,
//! 5 parse error (bad JSON or bad command line).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use convoy_core::bench::{run_bench, standard_algos, standard_suite};
use convoy_core::dp::{dp_solve, dp_solve_rounded, RoundingMode, Strategy, ThetaSet};
use convoy_core::flow::{quickest_flow, solve_tmo_additive};
use convoy_core::gen::{gen_instance, GenKind, GenSpec, Generated};
use convoy_core::io::{
    emit_convoy, emit_instance, emit_profile, parse_instance, parse_routing, parse_solution, LoadedInstance, Solution,
};
use convoy_core::oracle::{exact_minmaxdp, exact_tmo_convoy, exact_tmo_full, OracleBudget};
use convoy_core::ratio::Epsilon;
use convoy_core::reduction::{solve_tmo_blackbox, Branch, DpSolver};
use convoy_core::spdecomp::{decompose_with, ReductionOrder};
use convoy_core::tmo::{convoy_makespan, makespan, validate_convoy, validate_routing};
use convoy_core::uncross::uncross_traced;
use convoy_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "convoy-opt", version, about = "Train routing with headways and min-max disjoint paths")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum TmoAlgo {
    Flow,
    Blackbox,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inner {
    Hk,
    Phi,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Balanced,
    Phi,
    Both,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Balanced => Strategy::Balanced,
            StrategyArg::Phi => Strategy::Phi,
            StrategyArg::Both => Strategy::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Ascending,
    Descending,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Tmo,
    Minmaxdp,
    TmoFull,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    SpRandom,
    BundleChain,
    Fig5Family,
    GadgetDemo,
}

#[derive(Subcommand)]
enum Cmd {
    /// Route trains: flow-based (optimum plus one headway) or through the k-path gadget.
    SolveTmo {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "flow")]
        algo: TmoAlgo,
        #[arg(long, default_value = "0.5")]
        epsilon: Epsilon,
        #[arg(long, value_enum, default_value = "hk")]
        inner: Inner,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report with horizon, values and bounds.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// k arc-disjoint paths with small maximum length on a series-parallel graph.
    SolveMinmaxdp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "both")]
        strategy: StrategyArg,
        /// Round travel times with this accuracy.
        #[arg(long, conflicts_with = "exact")]
        epsilon: Option<Epsilon>,
        /// Exact totals (the default when no epsilon is given).
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Turn a feasible routing into a convoy routing that is no slower.
    Uncross {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print one line per step to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Check a solution file against an instance.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Required path count for profiles.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Series-parallel decomposition tree and φ.
    Decompose {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "ascending")]
        order: OrderArg,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Exhaustive reference solvers for small instances.
    Oracle {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = OracleBudget::default().max_arcs)]
        max_arcs: usize,
        #[arg(long, default_value_t = OracleBudget::default().max_horizon)]
        max_horizon: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random or structured instance.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, env = "CONVOY_OPT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        arcs: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        bundles: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        tau_min: i64,
        #[arg(long, default_value_t = 9)]
        tau_max: i64,
        /// Percentage of parallel compositions in random series-parallel graphs.
        #[arg(long, default_value_t = 50)]
        parallel_bias: u32,
        #[arg(long)]
        shuffle: bool,
        /// Length of the direct arc in the fig5-family chain.
        #[arg(long)]
        bypass: Option<i64>,
        #[arg(long)]
        delta: Option<i64>,
        #[arg(long)]
        trains: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the benchmark suite: every solver against the oracles, ratio versus guarantee.
    Bench {
        #[arg(long, env = "CONVOY_OPT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        jobs: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn read(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn load(p: &Path) -> anyhow::Result<LoadedInstance> {
    Ok(parse_instance(&read(p)?)?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Cmd) -> anyhow::Result<()> {
    match cmd {
        Cmd::SolveTmo { instance, algo, epsilon, inner, out, report, dot } => {
            let loaded = load(&instance)?;
            let inst = loaded.tmo()?;
            let (convoy, rep) = match algo {
                TmoAlgo::Flow => {
                    let c = solve_tmo_additive(&inst)?;
                    let q = quickest_flow(&inst.graph, inst.delta as i128 * inst.trains as i128)?;
                    let dist = inst.graph.distances_from(inst.graph.source())[inst.graph.sink()].unwrap_or(0);
                    let ms = convoy_makespan(&inst, &c)?;
                    let rep = json!({
                        "algorithm": "flow",
                        "T": q.horizon,
                        "value": q.value().to_string(),
                        "sigma": c.sigma,
                        "makespan": ms,
                        "lower_bound": (q.horizon - inst.delta).max(dist),
                    });
                    (c, rep)
                }
                TmoAlgo::Blackbox => {
                    let strategy = match inner {
                        Inner::Hk => Strategy::Balanced,
                        Inner::Phi => Strategy::Phi,
                    };
                    let solver = DpSolver { strategy, rounding: None };
                    let r = solve_tmo_blackbox(&inst, epsilon, &solver)?;
                    let branch = match r.branch {
                        Branch::Flow { lower_bound } => json!({"flow": {"lower_bound": lower_bound}}),
                        Branch::Gadget { k } => json!({"gadget": {"k": k}}),
                    };
                    let rep = json!({
                        "algorithm": "blackbox",
                        "epsilon": epsilon.to_string(),
                        "sigma": r.convoy.sigma,
                        "makespan": r.makespan,
                        "branch": branch,
                    });
                    (r.convoy, rep)
                }
            };
            validate_convoy(&inst, &convoy)?;
            let ms = convoy_makespan(&inst, &convoy)?;
            write_or_print(out.as_deref(), &emit_convoy(&convoy, &loaded.names, Some(ms)))?;
            let rep = serde_json::to_string_pretty(&rep)? + "\n";
            match report {
                Some(p) => fs::write(&p, rep).with_context(|| format!("writing {}", p.display()))?,
                None => eprint!("{rep}"),
            }
            if let Some(p) = dot {
                fs::write(p, inst.graph.to_dot(&convoy.paths))?;
            }
        }
        Cmd::SolveMinmaxdp { instance, k, strategy, epsilon, exact: _, out, dot } => {
            let loaded = load(&instance)?;
            let g = &loaded.graph;
            let tree = decompose_with(g, ReductionOrder::Ascending)?;
            let p = match epsilon {
                Some(e) => dp_solve_rounded(g, &tree, k, strategy.into(), e, RoundingMode::Always)?,
                None => dp_solve(g, &tree, k, strategy.into(), ThetaSet::Exact)?,
            };
            p.validate(g, k)?;
            write_or_print(out.as_deref(), &emit_profile(&p, &loaded.names))?;
            if let Some(path) = dot {
                fs::write(path, g.to_dot(&p.paths))?;
            }
        }
        Cmd::Uncross { input, instance, out, trace } => {
            let loaded = load(&instance)?;
            let inst = loaded.tmo()?;
            let routing = parse_routing(&read(&input)?, &loaded.names)?;
            validate_routing(&inst, &routing).map_err(|e| Error::Validation(e.to_string()))?;
            let before = makespan(&inst, &routing)?;
            let (c, steps) = uncross_traced(&inst, &routing)?;
            if trace {
                for s in &steps {
                    eprintln!(
                        "leader {} transition_arc {} rerouted {:?} potential {} -> {}",
                        s.leader,
                        loaded.names.arcs[s.transition_arc],
                        s.rerouted,
                        s.potential_before,
                        s.potential_after
                    );
                }
            }
            let after = convoy_makespan(&inst, &c)?;
            eprintln!("makespan {before} -> {after} in {} steps", steps.len());
            write_or_print(out.as_deref(), &emit_convoy(&c, &loaded.names, Some(after)))?;
        }
        Cmd::Validate { instance, solution, k } => {
            let loaded = load(&instance)?;
            let sol = parse_solution(&read(&solution)?, &loaded.graph, &loaded.names)?;
            match sol {
                Solution::Convoy(c) => {
                    let inst = loaded.tmo()?;
                    validate_convoy(&inst, &c).map_err(|e| Error::Validation(e.to_string()))?;
                    println!("valid convoy routing, makespan {}", convoy_makespan(&inst, &c)?);
                }
                Solution::Routing(r) => {
                    let inst = loaded.tmo()?;
                    validate_routing(&inst, &r).map_err(|e| Error::Validation(e.to_string()))?;
                    println!("valid routing, makespan {}", makespan(&inst, &r)?);
                }
                Solution::Profile(p) => {
                    p.validate(&loaded.graph, k.unwrap_or(p.k())).map_err(|e| Error::Validation(e.to_string()))?;
                    println!("valid path profile, {} paths, max length {}", p.k(), p.max_length());
                }
            }
        }
        Cmd::Decompose { instance, order, dot } => {
            let loaded = load(&instance)?;
            let order = match order {
                OrderArg::Ascending => ReductionOrder::Ascending,
                OrderArg::Descending => ReductionOrder::Descending,
            };
            let tree = decompose_with(&loaded.graph, order)?;
            print!("{}", tree.dump());
            println!("contracted: {}", tree.contract().canonical_form());
            println!("phi: {}", tree.phi());
            if let Some(p) = dot {
                fs::write(p, tree.to_dot())?;
            }
        }
        Cmd::Oracle { problem, instance, k, max_arcs, max_horizon, out } => {
            let loaded = load(&instance)?;
            let budget = OracleBudget { max_arcs, max_horizon, ..OracleBudget::default() };
            match problem {
                Problem::Minmaxdp => {
                    let Some(k) = k else { bail!(Error::InvalidParameter("--k is required".into())) };
                    let p = exact_minmaxdp(&loaded.graph, k, &budget)?;
                    write_or_print(out.as_deref(), &emit_profile(&p, &loaded.names))?;
                }
                Problem::Tmo => {
                    let inst = loaded.tmo()?;
                    let (c, v) = exact_tmo_convoy(&inst, &budget)?;
                    write_or_print(out.as_deref(), &emit_convoy(&c, &loaded.names, Some(v)))?;
                }
                Problem::TmoFull => {
                    let v = exact_tmo_full(&loaded.tmo()?, &budget)?;
                    write_or_print(out.as_deref(), &format!("{}\n", json!({ "makespan": v })))?;
                }
            }
        }
        Cmd::Gen {
            kind,
            seed,
            arcs,
            k,
            bundles,
            width,
            tau_min,
            tau_max,
            parallel_bias,
            shuffle,
            bypass,
            delta,
            trains,
            out,
        } => {
            let kind = match kind {
                Kind::SpRandom => GenKind::SpRandom { arcs, tau_min, tau_max, parallel_bias, shuffle },
                Kind::BundleChain => GenKind::BundleChain { bundles, width, tau_min, tau_max },
                Kind::Fig5Family => GenKind::BypassChain { k, bypass_tau: bypass.unwrap_or(k as i64 - 1) },
                Kind::GadgetDemo => GenKind::GadgetDemo {
                    arcs,
                    k,
                    trains: trains.unwrap_or(k as u64 + 2),
                    delta: delta.unwrap_or(1),
                    tau_max,
                },
            };
            let tmo = match (delta, trains) {
                (Some(d), Some(t)) => Some((d, t)),
                (None, None) => None,
                _ => bail!(Error::InvalidParameter("give both --delta and --trains, or neither".into())),
            };
            let text = match gen_instance(&GenSpec { kind, seed, tmo })? {
                Generated::Graph(g) => emit_instance(&g, None, None),
                Generated::Tmo(i) => emit_instance(&i.graph, None, Some((i.delta, i.trains))),
            };
            write_or_print(out.as_deref(), &text)?;
        }
        Cmd::Bench { seed, count, jobs, json } => {
            let cases = standard_suite(seed, count)?;
            let report = run_bench(&cases, &standard_algos(), jobs, &OracleBudget::default(), seed)?;
            print!("{}", report.to_text());
            if let Some(p) = json {
                fs::write(p, report.to_json() + "\n")?;
            }
            if report.violations() > 0 {
                bail!(Error::Validation(format!("{} rows exceed their bound", report.violations())));
            }
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => 2,
        Some(Error::Validation(_)) => 3,
        Some(Error::BudgetExceeded(_)) => 4,
        Some(Error::Parse(_)) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
