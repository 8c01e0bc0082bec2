//! `sst`: command-line front end over SSTG files.
//!
//! Every command reads one document from `--in FILE` or stdin and writes to
//! stdout. Exit status: 0 success, 1 domain error, 2 usage or syntax error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sst_core::coordinates::{coordinates, decompose, MatroidBasis};
use sst_core::dot::export_dot;
use sst_core::generate::{generate, GeneratorSpec};
use sst_core::motion::{observe_speed, run_transport, simulate, MotionKind, PathPolicy};
use sst_core::semantics::{build_index, stories, StoryConfig};
use sst_core::sstg::{parse_bases, parse_document, serialize, serialize_document, SstgDocument};
use sst_core::timeline::{
    build_causal_dag, infer_overlap, observed_events, partition_worlds, EventRecord,
};
use sst_core::topology::{
    adjacency_matrix, boundaries, ccc, centrality, coarsen, coarsen_to_fixed_point, degrees, scc,
    scc_quotient,
};
use sst_core::{AgentId, World};

#[derive(Parser)]
#[command(
    name = "sst",
    version,
    about = "Semantic spacetime graphs of agents and promises"
)]
struct Cli {
    /// Input SSTG file; stdin when absent.
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document and print it in canonical form.
    Parse,
    /// Graphviz digraph of the adjacency structure.
    ExportDot,
    /// Out- and in-degree per agent.
    Degrees,
    /// Strongly connected components.
    Scc {
        /// Print the world with each component collapsed instead.
        #[arg(long)]
        quotient: bool,
    },
    /// Maximal cliques of the symmetrised adjacency.
    Ccc,
    /// Collapse cliques of 3..=horizon agents into super-agents.
    Coarsen {
        #[arg(long)]
        horizon: usize,
        /// Repeat until nothing changes, at most this many passes.
        #[arg(long, value_name = "ROUNDS")]
        fixed_point: Option<usize>,
    },
    /// Coordinate tuples from a matroid basis.
    Coords {
        #[arg(long, value_name = "FILE")]
        basis: Option<String>,
    },
    /// Split the adjacency matrix over a matroid basis.
    Decompose {
        #[arg(long, value_name = "FILE")]
        basis: Option<String>,
    },
    /// Boundary kind of every agent along a direction.
    Boundaries {
        #[arg(long)]
        dir: String,
    },
    /// Seeded random motion; prints the final world.
    Motion {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        kind: u8,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scalar property moved by kind 3.
        #[arg(long)]
        label: Option<String>,
    },
    /// Transport a scalar property and report the speed an observer sees.
    Speed {
        #[arg(long)]
        label: String,
        #[arg(long)]
        observer: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Policy::Random)]
        policy: Policy,
    },
    /// Causal order of the promises an observer sees, or of every part.
    Timeline {
        #[arg(long)]
        observer: Option<String>,
    },
    /// Agreement an observer can infer from overlapping promises.
    Overlap {
        #[arg(long)]
        observer: String,
    },
    /// Maximal stories along quasi-transitive associations.
    Story {
        #[arg(long)]
        from: String,
        #[arg(long)]
        max: usize,
        /// Also follow containment.
        #[arg(long)]
        containment: bool,
    },
    /// Name to coordinate table.
    Index {
        #[arg(long, value_name = "FILE")]
        basis: Option<String>,
        /// Comma-separated names; every agent when absent.
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
    },
    /// Regular topology: line N, ring N, lattice2d A B, lattice3d A B C, bcc K, clos S L H.
    Generate { family: String, params: Vec<usize> },
    /// Eigenvector centrality by power iteration.
    Centrality {
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Direct,
    Random,
}

enum Failure {
    Usage(String),
    Domain(String),
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_input(path: Option<&str>) -> Result<String, Failure> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| usage(format!("{p}: {e}"))),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(usage)?;
            Ok(s)
        }
    }
}

fn agent(w: &World, id: &str) -> Result<AgentId, Failure> {
    let a = AgentId::new(id).map_err(usage)?;
    if w.contains_agent(&a) {
        Ok(a)
    } else {
        Err(domain(format!("unknown agent {a}")))
    }
}

/// The basis from `--basis FILE`, else the first one in the document.
fn pick_basis(doc: &SstgDocument, file: Option<&str>) -> Result<MatroidBasis, Failure> {
    let bases = match file {
        Some(f) => {
            let text = std::fs::read_to_string(f).map_err(|e| usage(format!("{f}: {e}")))?;
            parse_bases(&text, &doc.world).map_err(usage)?
        }
        None => doc.bases.clone(),
    };
    bases
        .into_iter()
        .next()
        .ok_or_else(|| usage("no basis given"))
}

fn braces<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    format!("{{{}}}", items.into_iter().collect::<Vec<_>>().join(","))
}

fn tuple(xs: &[u32]) -> String {
    format!(
        "({})",
        xs.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    )
}

fn print_order(out: &mut String, events: &[EventRecord]) -> Result<(), Failure> {
    let dag = build_causal_dag(events).map_err(domain)?;
    for label in dag.topological_order() {
        let after: Vec<&str> = dag
            .edges
            .iter()
            .filter(|(_, b)| *b == label)
            .map(|(a, _)| a.as_str())
            .collect();
        if after.is_empty() {
            writeln!(out, "{label}").expect("string write");
        } else {
            writeln!(out, "{label} after {}", after.join(",")).expect("string write");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, Failure> {
    let mut out = String::new();
    if let Command::Generate { family, params } = &cli.command {
        let spec = GeneratorSpec::from_parts(family, params).map_err(usage)?;
        return Ok(serialize(&generate(&spec).map_err(domain)?));
    }
    let doc = parse_document(&read_input(cli.input.as_deref())?).map_err(usage)?;
    let w = &doc.world;
    match &cli.command {
        Command::Generate { .. } => unreachable!("handled above"),
        Command::Parse => out = serialize_document(&doc),
        Command::ExportDot => out = export_dot(w),
        Command::Degrees => {
            let m = adjacency_matrix(w);
            let d = degrees(&m);
            for (i, a) in m.order.iter().enumerate() {
                writeln!(out, "{a} {} {}", d.k_out[i], d.k_in[i]).expect("string write");
            }
        }
        Command::Scc { quotient: true } => out = serialize(&scc_quotient(w)),
        Command::Scc { quotient: false } => {
            for b in scc(&adjacency_matrix(w)).blocks {
                writeln!(out, "{}", braces(b.iter().map(AgentId::as_str))).expect("string write");
            }
        }
        Command::Ccc => {
            for c in ccc(w) {
                writeln!(out, "{}", braces(c.iter().map(AgentId::as_str))).expect("string write");
            }
        }
        Command::Coarsen {
            horizon,
            fixed_point,
        } => {
            out = match fixed_point {
                Some(rounds) => {
                    let (c, passes) = coarsen_to_fixed_point(w, *horizon, *rounds);
                    format!("# passes {passes}\n{}", serialize(&c))
                }
                None => serialize(&coarsen(w, *horizon)),
            }
        }
        Command::Coords { basis } => {
            let b = pick_basis(&doc, basis.as_deref())?;
            for (a, t) in coordinates(w, &b).map_err(domain)?.tuples {
                writeln!(out, "{a} {}", tuple(&t)).expect("string write");
            }
        }
        Command::Decompose { basis } => {
            let b = pick_basis(&doc, basis.as_deref())?;
            let d = decompose(&adjacency_matrix(w), &b).map_err(domain)?;
            for (k, part) in d.parts.iter().enumerate() {
                writeln!(out, "I{}", k + 1).expect("string write");
                for row in &part.entries {
                    let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
                    writeln!(out, "  {}", cells.join(" ")).expect("string write");
                }
            }
        }
        Command::Boundaries { dir } => {
            for (a, k) in boundaries(w, dir).kinds {
                writeln!(out, "{a} {}", k.name()).expect("string write");
            }
        }
        Command::Motion {
            kind,
            steps,
            seed,
            label,
        } => {
            let kind = match kind {
                1 => MotionKind::First,
                2 => MotionKind::Second,
                _ => MotionKind::Third,
            };
            let (end, moved) =
                simulate(w, kind, *steps, *seed, label.as_deref()).map_err(domain)?;
            out = format!("# moved {moved}\n{}", serialize(&end));
        }
        Command::Speed {
            label,
            observer,
            steps,
            seed,
            policy,
        } => {
            let o = agent(w, observer)?;
            let policy = match policy {
                Policy::Direct => PathPolicy::Direct,
                Policy::Random => PathPolicy::RandomWalk,
            };
            let (_, trace) = run_transport(w, label, policy, &o, *steps, *seed).map_err(domain)?;
            for s in &trace.samples {
                writeln!(out, "t={} {} x={}", s.tick, s.agent, s.x).expect("string write");
            }
            writeln!(out, "speed {}", observe_speed(&trace).map_err(domain)?)
                .expect("string write");
        }
        Command::Timeline { observer: Some(o) } => {
            let o = agent(w, o)?;
            let events = observed_events(w, &o).map_err(domain)?;
            for e in &events {
                writeln!(
                    out,
                    "tick {} {}",
                    e.tick,
                    sst_core::sstg::promise_line(&e.promise)
                )
                .expect("string write");
            }
            print_order(&mut out, &events)?;
        }
        Command::Timeline { observer: None } => {
            for (i, part) in partition_worlds(w).iter().enumerate() {
                let names: Vec<&str> = part.agents().map(AgentId::as_str).collect();
                writeln!(out, "part {} {}", i + 1, braces(names)).expect("string write");
                let events: Vec<EventRecord> = part
                    .promises()
                    .iter()
                    .enumerate()
                    .map(|(k, p)| EventRecord {
                        promise: p.clone(),
                        observer: p.promiser.clone(),
                        tick: k as u64 + 1,
                    })
                    .collect();
                print_order(&mut out, &events)?;
            }
        }
        Command::Overlap { observer } => {
            let o = agent(w, observer)?;
            for (group, common) in infer_overlap(w, &o).map_err(domain)? {
                writeln!(
                    out,
                    "{} -> {}",
                    braces(group.iter().map(AgentId::as_str)),
                    braces(common.iter().map(String::as_str))
                )
                .expect("string write");
            }
        }
        Command::Story {
            from,
            max,
            containment,
        } => {
            let start = agent(w, from)?;
            let cfg = StoryConfig {
                include_containment: *containment,
                ..StoryConfig::default()
            };
            for s in stories(w, &start, *max, &cfg).map_err(domain)? {
                let mut line = start.to_string();
                for st in &s.steps {
                    write!(line, " {} {}", st.label, st.to).expect("string write");
                }
                writeln!(out, "{line}").expect("string write");
            }
        }
        Command::Index { basis, names } => {
            let b = pick_basis(&doc, basis.as_deref())?;
            let chart = coordinates(w, &b).map_err(domain)?;
            let names: BTreeSet<String> = if names.is_empty() {
                w.agents().map(ToString::to_string).collect()
            } else {
                names.iter().cloned().collect()
            };
            for (name, t) in build_index(w, &chart, &names).map_err(domain)?.entries {
                writeln!(out, "{name} {}", tuple(&t)).expect("string write");
            }
        }
        Command::Centrality { tol, max_iter } => {
            let m = adjacency_matrix(w);
            let v = centrality(&m, *tol, *max_iter).map_err(domain)?;
            for (a, x) in m.order.iter().zip(v) {
                writeln!(out, "{a} {x:.9}").expect("string write");
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("sst: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("sst: {msg}");
            ExitCode::from(2)
        }
    }
}
