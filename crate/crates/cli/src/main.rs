//! `pinned`: command-line front end for pinned-ball dynamics.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

mod manifest;
mod schema;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pinned_core::bounds::{self, AlphaSource, TauChoice, TreeConstant};
use pinned_core::dynamics::{run_schedule, Schedule, DEFAULT_MAX_STEPS};
use pinned_core::foldings::{adversarial_two_halfplanes, orbit, DEFAULT_ORBIT_BUDGET};
use pinned_core::generate::random_normalized_state;
use pinned_core::geometry::{full_contact_graph, normalize_system, BallConfiguration, Edge};
use pinned_core::io::{read_json, ConfigurationFile, HalfSpaceFamilyFile, IoError, LatticeFile, ScheduleFile};
use pinned_core::lattice::{exact_alpha_certificate, lattice_alpha_lower_bound, lattice_alpha_lower_bound_log2};
use pinned_core::rigidity::{self, AlphaOptions, DEFAULT_ZERO_TOLERANCE};
use pinned_core::search::{self, GreedyPolicy, SearchError, SearchOptions};
use pinned_core::verify::{self, Sizes};
use pinned_core::StateVector;

use manifest::{Envelope, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "pinned", version, about = "Pinned-ball pseudo-collisions: simulation, rigidity, bounds")]
struct Cli {
    /// Seed for randomized commands; generated and recorded when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a configuration file and list its contacts.
    Validate { config: PathBuf },
    /// Run a schedule and write the per-step trace as JSON lines.
    Simulate {
        config: PathBuf,
        schedule: PathBuf,
        #[arg(long, default_value = "trace.jsonl")]
        trace: PathBuf,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Exhaustive index of approximate rigidity.
    Alpha {
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ZERO_TOLERANCE)]
        zero_tolerance: f64,
        /// Include every (edge set, edge) candidate.
        #[arg(long)]
        table: bool,
    },
    /// Evaluate a collision-count bound in log space.
    Bound {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, conflicts_with = "alpha_from")]
        alpha: Option<f64>,
        /// Configuration whose exhaustive α (and n, d) to use.
        #[arg(long)]
        alpha_from: Option<PathBuf>,
        /// exact | upper | lower | value:N
        #[arg(long, default_value = "exact", value_parser = parse_tau)]
        tau: TauChoice,
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        /// Tree floor: corrected √2/n or the printed 4/n.
        #[arg(long, value_enum, default_value_t = TreeFloor::Corrected)]
        tree_floor: TreeFloor,
    },
    /// Orbit of a half-space family, or an adversarial two-half-plane orbit.
    Orbit {
        #[arg(required_unless_present = "adversarial")]
        family: Option<PathBuf>,
        /// Build a family whose orbit exceeds this many points.
        #[arg(long, conflicts_with = "family")]
        adversarial: Option<usize>,
        /// Omit the orbit points from the report.
        #[arg(long)]
        summary: bool,
    },
    /// Exact Z[√3] certificates for a triangular-lattice configuration.
    Lattice {
        lattice: PathBuf,
        /// Edge set E as `1-2,2-3`; defaults to all contacts.
        #[arg(long, value_parser = parse_edge, value_delimiter = ',')]
        edge_set: Option<Vec<Edge>>,
        /// Only certify this edge, e.g. `1-2`.
        #[arg(long, value_parser = parse_edge)]
        edge: Option<Edge>,
    },
    /// Search collision orders for the largest number of collisions.
    Search {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Exhaustive)]
        method: Method,
        #[arg(long, default_value_t = search::DEFAULT_DEPTH_CAP)]
        depth: usize,
        #[arg(long, default_value_t = search::DEFAULT_NODE_BUDGET)]
        node_budget: u64,
        /// Sampled initial velocities for `--method sweep`.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Greedy order: first approaching pair, or a seeded random one.
        #[arg(long)]
        random_order: bool,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Run the invariant suite.
    Verify {
        /// Smaller case counts.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria (1-10).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
        criterion: Vec<u8>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Mode {
    General,
    Tree,
    Lattice,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum TreeFloor {
    Corrected,
    Printed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Method {
    Exhaustive,
    Greedy,
    Sweep,
}

fn parse_tau(s: &str) -> Result<TauChoice, String> {
    match s {
        "exact" => Ok(TauChoice::Exact),
        "upper" => Ok(TauChoice::Upper),
        "lower" => Ok(TauChoice::Lower),
        _ => match s.strip_prefix("value:") {
            Some(v) => v
                .parse()
                .map(|tau| TauChoice::Value { tau })
                .map_err(|_| format!("bad kissing number in {s:?}")),
            None => Err(format!("expected exact, upper, lower or value:N, got {s:?}")),
        },
    }
}

fn parse_edge(s: &str) -> Result<Edge, String> {
    let (a, b) = s.split_once('-').ok_or_else(|| format!("expected i-j, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad index in {s:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad index in {s:?}"))?;
    Edge::from_one_based(a, b).map_err(|e| e.to_string())
}

enum Failure {
    /// Bad invocation or unreadable input; exit 2.
    Usage(String),
    /// Well-formed input that violates a precondition; exit 1.
    Domain(String),
}

fn usage(e: IoError, schema: &str) -> Failure {
    Failure::Usage(format!("{e}\n\n{schema}"))
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn load_config(path: &Path, m: &mut RunManifest) -> Result<(ConfigurationFile, BallConfiguration), Failure> {
    m.input(path);
    let file: ConfigurationFile = read_json(path).map_err(|e| usage(e, schema::CONFIGURATION))?;
    let config = file.configuration().map_err(domain)?;
    m.tolerance("contact", config.contact_tolerance());
    Ok((file, config))
}

/// Velocities from the file, or a seeded random normalized state.
fn initial_state(file: &ConfigurationFile, config: &BallConfiguration, seed: u64, m: &mut RunManifest) -> Result<StateVector, Failure> {
    match file.state().map_err(domain)? {
        Some(s) => Ok(s),
        None => {
            m.seed("initial_state", seed);
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            Ok(random_normalized_state(&mut rng, config.len(), config.dimension()))
        }
    }
}

#[derive(Serialize)]
struct ValidateReport {
    n: usize,
    dimension: usize,
    contact_tolerance: f64,
    contacts: Vec<Edge>,
    connected: bool,
    tree: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum BoundOutput {
    Single(bounds::BoundReport),
    Lattice(bounds::LatticeBoundReport),
}

#[derive(Serialize)]
struct SimulateReport {
    collisions: usize,
    steps: usize,
    stable: bool,
    trace_file: String,
    initial_functional: f64,
    final_functional: f64,
    initial_energy: f64,
    final_state: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct OrbitReport<T: Serialize> {
    family: T,
    size: usize,
    steps: usize,
    stabilized_at: Option<usize>,
    /// 1-based half-space index of each fold.
    folds: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct LatticeReport {
    n: usize,
    edge_set: Vec<Edge>,
    lattice_floor: f64,
    lattice_floor_log2: f64,
    certificates: Vec<pinned_core::lattice::AlphaCertificate>,
}

#[derive(Serialize)]
struct SearchReport<T: Serialize> {
    normalized_state: Vec<Vec<f64>>,
    result: T,
    /// The witness as a schedule file, ready for `simulate`.
    replay_schedule: ScheduleFile,
    replays: bool,
}

fn emit<T: Serialize>(mut manifest: RunManifest, out: Option<&Path>, report: T) -> Result<(), Failure> {
    manifest.finish();
    let env = Envelope { manifest, report };
    match out {
        Some(p) => pinned_core::io::write_json(p, &env).map_err(domain),
        None => {
            let text = serde_json::to_string_pretty(&env).expect("reports serialize");
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli, argv: &[String]) -> Result<bool, Failure> {
    let mut manifest = RunManifest::start(argv);
    let seed = cli.seed.unwrap_or_else(rand::random);
    let out = cli.out.as_deref();
    let mut ok = true;
    match cli.command {
        Command::Validate { config } => {
            let (_, c) = load_config(&config, &mut manifest)?;
            let g = full_contact_graph(&c);
            let report = ValidateReport {
                n: c.len(),
                dimension: c.dimension(),
                contact_tolerance: c.contact_tolerance(),
                contacts: g.edge_vec(),
                connected: g.is_connected(),
                tree: g.is_tree(),
            };
            emit(manifest, out, report)?;
        }
        Command::Simulate { config, schedule, trace, max_steps } => {
            let (file, c) = load_config(&config, &mut manifest)?;
            manifest.input(&schedule);
            let sched: ScheduleFile = read_json(&schedule).map_err(|e| usage(e, schema::SCHEDULE))?;
            sched.schedule.validate(&full_contact_graph(&c)).map_err(domain)?;
            if let Schedule::SeededRandom { seed, .. } = sched.schedule {
                manifest.seed("schedule", seed);
            }
            let state = initial_state(&file, &c, seed, &mut manifest)?;
            let limit = max_steps.or(sched.max_steps).unwrap_or(match sched.schedule {
                Schedule::Explicit { ref edges } => edges.len(),
                _ => DEFAULT_MAX_STEPS,
            });
            let t = run_schedule(&c, &state, &sched.schedule, limit);
            std::fs::write(&trace, t.to_json_lines()).map_err(|e| domain(format!("cannot write {}: {e}", trace.display())))?;
            eprintln!("Λ = {}", t.collisions);
            let report = SimulateReport {
                collisions: t.collisions,
                steps: t.steps.len(),
                stable: t.stable,
                trace_file: trace.display().to_string(),
                initial_functional: t.initial_functional,
                final_functional: t.functional_values().last().copied().unwrap_or(t.initial_functional),
                initial_energy: t.initial_energy,
                final_state: t.final_state.to_balls(),
            };
            emit(manifest, out, report)?;
        }
        Command::Alpha { config, zero_tolerance, table } => {
            let (_, c) = load_config(&config, &mut manifest)?;
            manifest.tolerance("zero", zero_tolerance);
            let opts = AlphaOptions { zero_tolerance, keep_table: table, ..AlphaOptions::default() };
            let report = rigidity::alpha(&c, &opts).map_err(domain)?;
            emit(manifest, out, report)?;
        }
        Command::Bound { n, d, alpha, alpha_from, tau, mode, tree_floor } => {
            let (n, d, alpha, source) = match &alpha_from {
                Some(p) => {
                    let (_, c) = load_config(p, &mut manifest)?;
                    let a = rigidity::alpha(&c, &AlphaOptions::default()).map_err(domain)?.alpha;
                    (n.unwrap_or(c.len()), d.unwrap_or(c.dimension()), Some(a), AlphaSource::Exhaustive)
                }
                None => (
                    n.ok_or_else(|| Failure::Usage("--n is required without --alpha-from".into()))?,
                    d.unwrap_or(2),
                    alpha,
                    AlphaSource::Given,
                ),
            };
            let report = match mode {
                Mode::General => {
                    let a = alpha.ok_or_else(|| Failure::Usage("general mode needs --alpha or --alpha-from".into()))?;
                    BoundOutput::Single(bounds::max_collisions_bound(n, d, a, source, tau).map_err(domain)?)
                }
                Mode::Tree => {
                    let floor = match tree_floor {
                        TreeFloor::Corrected => TreeConstant::Corrected,
                        TreeFloor::Printed => TreeConstant::Printed,
                    };
                    BoundOutput::Single(bounds::tree_bound(n, d, floor, tau).map_err(domain)?)
                }
                Mode::Lattice => BoundOutput::Lattice(bounds::lattice_bound(n).map_err(domain)?),
            };
            let log2 = match &report {
                BoundOutput::Single(r) => r.log2,
                BoundOutput::Lattice(r) => r.exact.log2,
            };
            eprintln!("log2 bound = {log2}");
            emit(manifest, out, report)?;
        }
        Command::Orbit { family, adversarial, summary } => {
            match (family, adversarial) {
                (_, Some(target)) => {
                    let fam = adversarial_two_halfplanes(target);
                    let o = orbit(&fam.start, &fam.halfspaces, &fam.policy, &fam.witness, DEFAULT_ORBIT_BUDGET).map_err(domain)?;
                    emit(manifest, out, orbit_report(fam, o, summary))?;
                }
                (Some(path), None) => {
                    manifest.input(&path);
                    let f: HalfSpaceFamilyFile = read_json(&path).map_err(|e| usage(e, schema::HALFSPACES))?;
                    let hs = f.halfspaces().map_err(domain)?;
                    let policy = f.policy().map_err(domain)?;
                    if let pinned_core::OrbitPolicy::SeededRandom { seed } = policy {
                        manifest.seed("policy", seed);
                    }
                    let o = orbit(&f.start, &hs, &policy, &f.witness, f.budget.unwrap_or(DEFAULT_ORBIT_BUDGET)).map_err(domain)?;
                    emit(manifest, out, orbit_report(f, o, summary))?;
                }
                (None, None) => return Err(Failure::Usage(format!("orbit needs a family file or --adversarial N\n\n{}", schema::HALFSPACES))),
            }
        }
        Command::Lattice { lattice, edge_set, edge } => {
            manifest.input(&lattice);
            let f: LatticeFile = read_json(&lattice).map_err(|e| usage(e, schema::LATTICE))?;
            let cfg = f.points;
            let set = edge_set.unwrap_or_else(|| cfg.contact_edges());
            if set.is_empty() {
                return Err(Failure::Domain("no touching pairs to certify".into()));
            }
            let targets: Vec<Edge> = match edge {
                Some(e) => vec![e],
                None => set.clone(),
            };
            let certificates = targets
                .iter()
                .map(|&e| exact_alpha_certificate(&cfg, &set, e))
                .collect::<Result<Vec<_>, _>>()
                .map_err(domain)?;
            let n = cfg.len();
            let report = LatticeReport {
                n,
                edge_set: set,
                lattice_floor: lattice_alpha_lower_bound(n),
                lattice_floor_log2: lattice_alpha_lower_bound_log2(n),
                certificates,
            };
            emit(manifest, out, report)?;
        }
        Command::Search { config, method, depth, node_budget, samples, random_order, max_steps } => {
            let (file, c) = load_config(&config, &mut manifest)?;
            let state = initial_state(&file, &c, seed, &mut manifest)?;
            let (c, state) = normalize_system(&c, &state).map_err(domain)?;
            let opts = SearchOptions { depth_cap: depth, node_budget, ..SearchOptions::default() };
            let (result, start) = match method {
                Method::Exhaustive => (exhaustive_or_best(&c, &state, &opts)?, state),
                Method::Greedy => {
                    let policy = if random_order {
                        manifest.seed("greedy_order", seed);
                        GreedyPolicy::SeededRandom { seed }
                    } else {
                        GreedyPolicy::Lexicographic
                    };
                    let steps = max_steps.unwrap_or_else(search::default_greedy_budget);
                    (search::greedy_schedule(&c, &state, policy, steps).map_err(domain)?, state)
                }
                Method::Sweep => {
                    manifest.seed("sweep", seed);
                    let sweep = search::velocity_sweep(&c, samples, seed, &opts).map_err(domain)?;
                    let s = StateVector::from_vec(c.len(), c.dimension(), sweep.best_state.clone());
                    (sweep.best, s)
                }
            };
            let result = search::annotate(&c, result);
            let replays = result.replays(&c, &start);
            if result.bound.as_ref().is_some_and(|b| !b.within) {
                ok = false;
            }
            let report = SearchReport {
                normalized_state: start.to_balls(),
                replay_schedule: ScheduleFile {
                    schedule: Schedule::Explicit { edges: result.witness.clone() },
                    max_steps: None,
                },
                replays,
                result,
            };
            emit(manifest, out, report)?;
        }
        Command::Verify { quick, criterion } => {
            manifest.seed("verify", seed);
            let sizes = if quick { Sizes::quick() } else { Sizes::full() };
            let ids: Vec<usize> = if criterion.is_empty() {
                (1..=10).collect()
            } else {
                criterion.iter().map(|&c| c as usize).collect()
            };
            let outcomes: Vec<_> = ids
                .into_iter()
                .map(|id| {
                    let o = verify::run_criterion(id, &sizes, seed);
                    eprintln!("{} criterion {:2} {:<32} {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
                    o
                })
                .collect();
            ok = outcomes.iter().all(|o| o.passed);
            let report = verify::VerifyReport { seed, sizes, passed: ok, outcomes };
            emit(manifest, out, report)?;
        }
    }
    Ok(ok)
}

fn exhaustive_or_best(
    c: &BallConfiguration,
    state: &StateVector,
    opts: &SearchOptions,
) -> Result<search::SearchResult, Failure> {
    match search::exhaustive_max_collisions(c, state, opts) {
        Ok(r) => Ok(r),
        Err(SearchError::BudgetExceeded { best, budget }) => {
            eprintln!("node budget {budget} exhausted; reporting the best order found");
            Ok(*best)
        }
        Err(e) => Err(domain(e)),
    }
}

fn orbit_report<T: Serialize>(family: T, o: pinned_core::OrbitResult, summary: bool) -> OrbitReport<T> {
    OrbitReport {
        family,
        size: o.size(),
        steps: o.steps,
        stabilized_at: o.stabilized_at,
        folds: o.folds.iter().map(|i| i + 1).collect(),
        points: (!summary).then_some(o.points),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli, &argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}
