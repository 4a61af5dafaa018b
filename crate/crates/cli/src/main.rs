//! `bireach`: decides bi-reachability for data VASS and Petri nets with
//! equality data, and exposes each stage of the decider.

mod corpus;
mod input;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use bireach_core::conditions::{check_phi1, check_phi2};
use bireach_core::cover::{compute_cover, CoverConfig, CoverOutcome};
use bireach_core::graph::{path_bound, saturate};
use bireach_core::msum::{solve, MsumConfig, MsumInstance};
use bireach_core::net::{normalize, parse, render, Configuration, Instance, Parsed, SplitMode};
use bireach_core::oracle::{bfs_reach, OracleAnswer, OracleBudget};
use bireach_core::reduce::{decide, DecideConfig, Verdict};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::render::{json as envelope, print_json};

/// Exit code for usage and input errors.
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "bireach", version, about = "Bi-reachability for data VASS and Petri nets with equality data")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Register,
    AtomPlace,
}

impl From<Split> for SplitMode {
    fn from(s: Split) -> Self {
        match s {
            Split::Register => SplitMode::Register,
            Split::AtomPlace => SplitMode::AtomPlace,
        }
    }
}

#[derive(Args)]
struct NetArgs {
    /// A `.petri` or `.dvass` file.
    #[arg(long)]
    net: PathBuf,
    /// Where compiled Petri transitions keep atoms shared between halves.
    #[arg(long, value_enum, default_value = "register")]
    split: Split,
}

#[derive(Args)]
struct Endpoints {
    /// Source configuration, overriding the file's `source:` line.
    #[arg(long)]
    src: Option<String>,
    /// Target configuration, overriding the file's `target:` line.
    #[arg(long)]
    tgt: Option<String>,
}

#[derive(Args, Clone)]
struct Budgets {
    /// Largest atom pool tried by the multiset sum solver.
    #[arg(long, env = "BIREACH_MSUM_BUDGET")]
    msum_budget: Option<usize>,
    /// Largest number of nodes in one coverability tree.
    #[arg(long, env = "BIREACH_COVER_CAP", default_value_t = CoverConfig::default().max_nodes)]
    cover_cap: usize,
    /// Largest depth of one coverability tree.
    #[arg(long, default_value_t = CoverConfig::default().max_depth)]
    cover_depth: usize,
    /// Treat exhausted solver budgets as proofs of unsatisfiability.
    #[arg(long)]
    assume_complete: bool,
}

impl Budgets {
    fn decide_config(&self) -> DecideConfig {
        let mut c = DecideConfig {
            msum: MsumConfig { max_budget: self.msum_budget, ..MsumConfig::default() },
            cover: self.cover_config(),
            ..DecideConfig::default()
        };
        if self.assume_complete {
            c = c.assume_complete();
        }
        c
    }

    fn cover_config(&self) -> CoverConfig {
        CoverConfig { max_nodes: self.cover_cap, max_depth: self.cover_depth }
    }
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, default_value_t = OracleBudget::default().max_tokens_per_place)]
    max_tokens: u64,
    #[arg(long, default_value_t = OracleBudget::default().max_total_atoms)]
    max_atoms: usize,
    #[arg(long, default_value_t = OracleBudget::default().max_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = OracleBudget::default().max_states)]
    max_states: usize,
}

impl OracleArgs {
    fn budget(&self) -> OracleBudget {
        OracleBudget {
            max_tokens_per_place: self.max_tokens,
            max_total_atoms: self.max_atoms,
            max_depth: self.max_depth,
            max_states: self.max_states,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the two configurations are reachable from each other.
    Decide {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        ends: Endpoints,
        #[command(flatten)]
        budgets: Budgets,
        /// Write the run manifest (config, verdict, trace) to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compile a Petri net into a data VASS.
    Compile {
        #[command(flatten)]
        net: NetArgs,
    },
    /// Bring the endpoints into the form q(0), q'(0).
    Normalize {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        ends: Endpoints,
    },
    /// Print the closure of the state graph.
    Saturate {
        #[command(flatten)]
        net: NetArgs,
    },
    /// Compute the maximal ideals of the coverability set.
    Cover {
        #[command(flatten)]
        net: NetArgs,
        /// Start configuration, defaulting to the file's `source:` line.
        #[arg(long)]
        from: Option<String>,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Evaluate the usefulness and pumping conditions on the normalised instance.
    Conditions {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        ends: Endpoints,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Solve a multiset sum instance given as JSON.
    Msum {
        /// JSON file with `generators` and `target`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, env = "BIREACH_MSUM_BUDGET")]
        msum_budget: Option<usize>,
        #[arg(long)]
        assume_complete: bool,
    },
    /// Search for a run by bounded breadth-first search.
    Oracle {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        ends: Endpoints,
        #[command(flatten)]
        budget: OracleArgs,
    },
    /// Run every `.petri` and `.dvass` file in a directory.
    Corpus {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "register")]
        split: Split,
        #[command(flatten)]
        budgets: Budgets,
        #[command(flatten)]
        oracle: OracleArgs,
    },
}

#[derive(Serialize)]
struct RunManifest {
    version: &'static str,
    input_sha256: String,
    input: String,
    src: String,
    tgt: String,
    config: DecideConfig,
    verdict: String,
    exit_code: i32,
    result: Verdict,
    wall_time_ms: u128,
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Decide { net, ends, budgets, trace } => {
            let loaded = input::load(&net.net, net.split.into())?;
            let inst = &loaded.instance;
            let (src, tgt) = input::endpoints(inst, ends.src.as_deref(), ends.tgt.as_deref())?;
            let config = budgets.decide_config();
            let start = Instant::now();
            let verdict = decide(&inst.net, &src, &tgt, &config)?;
            let code = verdict.answer.exit_code();
            let manifest = RunManifest {
                version: env!("CARGO_PKG_VERSION"),
                input_sha256: loaded.digest.clone(),
                input: net.net.display().to_string(),
                src: render::configuration(&inst.net, &src),
                tgt: render::configuration(&inst.net, &tgt),
                config,
                verdict: verdict.answer.to_string(),
                exit_code: code,
                result: verdict.clone(),
                wall_time_ms: start.elapsed().as_millis(),
            };
            if let Some(path) = trace {
                let text = serde_json::to_string_pretty(&envelope("manifest", &manifest))?;
                std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            if cli.json {
                let mut v = envelope("decide", &manifest);
                v.as_object_mut().unwrap().remove("wall_time_ms");
                print_json(&v);
            } else {
                for s in &verdict.normalization {
                    println!("normalise: {s}");
                }
                for s in &verdict.trace {
                    let bound = s.bound.map(|b| format!(" bound {b}")).unwrap_or_default();
                    println!("{}: {}{bound}  rank {} -> {}", s.kind, s.item, s.rank_before, s.rank_after);
                }
                println!("{}", verdict.answer);
            }
            Ok(code as u8)
        }
        Command::Compile { net } => {
            let text = std::fs::read_to_string(&net.net).with_context(|| format!("reading {}", net.net.display()))?;
            let (parsed, _) = parse(&text)?;
            let Parsed::Petri(petri) = parsed else { anyhow::bail!("{} is not a Petri net", net.net.display()) };
            let inst = bireach_core::net::compile_petri(&petri, net.split.into())?;
            if cli.json {
                let per: std::collections::BTreeMap<String, usize> = petri
                    .transitions
                    .iter()
                    .map(|t| {
                        let prefix = format!("{}_", t.name);
                        let n = inst
                            .net
                            .labels
                            .iter()
                            .filter(|l| l.starts_with(&prefix) && !l.ends_with("_out"))
                            .count();
                        (t.name.clone(), n)
                    })
                    .collect();
                let out = json!({ "net": inst.net, "source": inst.source, "target": inst.target, "orbits": inst.net.transitions.len(), "orbits_per_transition": per });
                print_json(&envelope("compile", &out));
            } else {
                print!("{}", render(&inst));
            }
            Ok(0)
        }
        Command::Normalize { net, ends } => {
            let inst = input::load(&net.net, net.split.into())?.instance;
            let (src, tgt) = input::endpoints(&inst, ends.src.as_deref(), ends.tgt.as_deref())?;
            let normal = normalize(&inst.net, &src, &tgt);
            if cli.json {
                print_json(&envelope("normalize", &normal));
            } else {
                let zero = |s: &bireach_core::net::State| Configuration {
                    state: s.clone(),
                    marking: bireach_core::vector::DataVector::zero(),
                };
                let out = Instance {
                    net: normal.net.clone(),
                    source: Some(zero(&normal.source)),
                    target: Some(zero(&normal.target)),
                };
                println!("# steps: {}", if normal.steps.is_empty() { "none".to_string() } else { normal.steps.join(", ") });
                print!("{}", render(&out));
            }
            Ok(0)
        }
        Command::Saturate { net } => {
            let inst = input::load(&net.net, net.split.into())?.instance;
            let closure = saturate(&inst.net);
            if cli.json {
                print_json(&envelope("saturate", &json!({ "closure": closure, "path_bound": path_bound(&closure) })));
            } else {
                for (o, len) in &closure.orbits {
                    let lift = |s: &bireach_core::net::State| Configuration {
                        state: s.clone(),
                        marking: bireach_core::vector::DataVector::zero(),
                    };
                    println!(
                        "{} ~> {}  ({len} steps)",
                        render::configuration(&inst.net, &lift(&o.source)),
                        render::configuration(&inst.net, &lift(&o.target))
                    );
                }
                println!("{} edge orbits, path bound {}", closure.orbits.len(), path_bound(&closure));
            }
            Ok(0)
        }
        Command::Cover { net, from, budgets } => {
            let inst = input::load(&net.net, net.split.into())?.instance;
            let c0 = input::configuration(&inst, from.as_deref(), inst.source.as_ref(), "from")?;
            let outcome = compute_cover(&inst.net, &c0, &budgets.cover_config());
            if cli.json {
                print_json(&envelope("cover", &outcome));
            } else {
                match &outcome {
                    CoverOutcome::Complete(r) => {
                        for i in &r.ideals {
                            println!("{}", render::omega_configuration(&inst.net, i));
                        }
                        println!("{} ideals", r.ideals.len());
                    }
                    CoverOutcome::CapExceeded { nodes, depth } => {
                        println!("cap exceeded after {nodes} nodes at depth {depth}");
                    }
                }
            }
            Ok(if outcome.result().is_some() { 0 } else { 2 })
        }
        Command::Conditions { net, ends, budgets } => {
            let inst = input::load(&net.net, net.split.into())?.instance;
            let (src, tgt) = input::endpoints(&inst, ends.src.as_deref(), ends.tgt.as_deref())?;
            let normal = normalize(&inst.net, &src, &tgt);
            let config = budgets.decide_config();
            let phi1 = check_phi1(&normal.net, &normal.source, &normal.target, &config.msum)?;
            let phi2 = check_phi2(&normal.net, &normal.source, &normal.target, &config.cover);
            if cli.json {
                print_json(&envelope("conditions", &json!({ "normalization": normal.steps, "phi1": phi1, "phi2": phi2 })));
            } else {
                println!("usefulness:");
                for o in &phi1.orbits {
                    println!("  {:<24} {:?}", o.label, o.status);
                }
                println!("pumping:");
                for p in &phi2.places {
                    let dirs: Vec<String> = p
                        .pumpable
                        .iter()
                        .map(|x| x.map_or("?".to_string(), |b| if b { "yes" } else { "no" }.to_string()))
                        .collect();
                    println!("  {:<24} {}", p.place.name(&normal.net), dirs.join(" "));
                }
                println!(
                    "usefulness {}, pumping {}",
                    if phi1.holds() { "holds" } else { "fails" },
                    if phi2.holds() { "holds" } else { "fails" }
                );
            }
            Ok(0)
        }
        Command::Msum { input, msum_budget, assume_complete } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let inst: MsumInstance = serde_json::from_str(&text).context("parsing the multiset sum instance")?;
            let config = MsumConfig { max_budget: msum_budget, certified: assume_complete, ..MsumConfig::default() };
            let outcome = solve(&inst, &config)?;
            if cli.json {
                print_json(&envelope("msum", &outcome));
            } else {
                println!("{}", serde_json::to_string(&outcome)?);
            }
            Ok(if outcome.is_sat() { 0 } else { 1 })
        }
        Command::Oracle { net, ends, budget } => {
            let inst = input::load(&net.net, net.split.into())?.instance;
            let (src, tgt) = input::endpoints(&inst, ends.src.as_deref(), ends.tgt.as_deref())?;
            let answer = bfs_reach(&inst.net, &src, &tgt, &budget.budget());
            if cli.json {
                print_json(&envelope("oracle", &answer));
            } else {
                match &answer {
                    OracleAnswer::Found(run) => {
                        println!("FOUND ({} steps)", run.steps.len().saturating_sub(1));
                        for (s, m) in &run.steps {
                            let c = Configuration { state: s.clone(), marking: m.clone() };
                            println!("  {}", render::configuration(&inst.net, &c));
                        }
                    }
                    OracleAnswer::Exhausted { frontier_empty: true } => println!("NOT_FOUND (search space exhausted)"),
                    OracleAnswer::Exhausted { frontier_empty: false } => println!("NOT_FOUND within budget"),
                }
            }
            Ok(match answer {
                OracleAnswer::Found(_) => 0,
                OracleAnswer::Exhausted { frontier_empty: true } => 1,
                OracleAnswer::Exhausted { frontier_empty: false } => 2,
            })
        }
        Command::Corpus { dir, split, budgets, oracle } => {
            let summary = corpus::run_corpus(&dir, &budgets.decide_config(), &oracle.budget(), split.into())?;
            if cli.json {
                print_json(&envelope("corpus", &summary));
            } else {
                corpus::print_table(&summary);
            }
            for e in summary.entries.iter().filter(|e| matches!(e.status, corpus::Status::Disagree | corpus::Status::Error)) {
                eprintln!("{}: {:?} {}", e.file, e.status, e.message.as_deref().unwrap_or(""));
            }
            Ok(if summary.failed() { 1 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
