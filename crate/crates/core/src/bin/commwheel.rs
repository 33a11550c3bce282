use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commwheel::io::{load_network, render_svg, save_network, sweep_csv, IoError, ResultFile};
use commwheel::network::{classify_by_oracle, generate_honeycomb_family, generate_random, Network, NodeClass};
use commwheel::protocol::{run_simulation, verify_localization, Interleaving, SimConfig};
use commwheel::trilateration::{sweep_triangles, trilaterate_from, SweepOptions, MAX_EXHAUSTIVE_TRIANGLES};
use commwheel::wheel::classify_by_wheels;

const EXIT_INPUT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "commwheel", version, about = "Anchor-free localization with communication wheels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a network file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Per-node classes as decided by communication wheels.
    Classify {
        network: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the distributed protocol and write a result file.
    Localize {
        network: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Message delivery order.
        #[arg(long, value_enum, default_value_t = Order::Fifo)]
        interleaving: Order,
        /// Also write the message trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Trilateration from one seed triangle or from all of them.
    Trilaterate {
        network: PathBuf,
        /// Sweep every triangle and write CSV.
        #[arg(long, conflicts_with = "triangle", required_unless_present = "triangle")]
        sweep: bool,
        /// Seed triangle as three node ids, e.g. `3,7,12`.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        triangle: Option<Vec<u64>>,
        #[command(flatten)]
        sweep_args: SweepArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Wheel protocol against the trilateration envelope.
    Compare {
        network: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sweep_args: SweepArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// SVG figure of a network, optionally colored by a result file.
    Render {
        network: PathBuf,
        #[arg(long)]
        result: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    Random {
        #[arg(long)]
        n: usize,
        /// Region as `WIDTHxHEIGHT` in units of the range.
        #[arg(long, default_value = "10x10", value_parser = parse_region)]
        region: (f64, f64),
        #[arg(long, default_value_t = 1.0)]
        range: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    Honeycomb {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args)]
struct OutArg {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Worker threads for triangle sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Sample this many triangles when there are more.
    #[arg(long, default_value_t = MAX_EXHAUSTIVE_TRIANGLES)]
    max_triangles: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Fifo,
    Random,
}

fn parse_region(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w: f64 = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("bad height: {e}"))?;
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err("region sides must be positive".into());
    }
    Ok((w, h))
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Precondition(String),
    Internal(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_network(path: &Path) -> Result<Network, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_network(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &OutArg, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

#[derive(Serialize)]
struct ClassRow {
    id: u64,
    class: NodeClass,
}

#[derive(Serialize)]
struct ClassTable {
    counts: std::collections::BTreeMap<NodeClass, usize>,
    nodes: Vec<ClassRow>,
}

#[derive(Serialize)]
struct SingleRun {
    triangle: [u64; 3],
    localized_count: usize,
    sweeps: usize,
    positions: Vec<(u64, [f64; 2])>,
}

#[derive(Serialize)]
struct CompareReport {
    n: usize,
    leader: Option<u64>,
    wheel_localized: usize,
    trilateration_best: usize,
    trilateration_worst: usize,
    triangles: usize,
    sampled: bool,
    strong_interior_connected: bool,
    inclusion_holds: Option<bool>,
    oracle_inclusion_holds: Option<bool>,
    missing: Vec<u64>,
    faults: usize,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { kind } => match kind {
            GenerateKind::Random {
                n,
                region: (w, h),
                range,
                seed,
                out,
            } => {
                let net = generate_random(n, w * range, h * range, range, seed)
                    .map_err(|e| Failure::Input(e.to_string()))?;
                emit(&out, &save_network(&net))
            }
            GenerateKind::Honeycomb { k, out } => {
                let report = generate_honeycomb_family(k).map_err(|e| Failure::Input(e.to_string()))?;
                emit(&out, &save_network(&report.network))
            }
        },
        Command::Classify { network, out } => {
            let net = read_network(&network)?;
            let c = classify_by_wheels(&net);
            let table = ClassTable {
                counts: NodeClass::ALL.iter().map(|&k| (k, c.count(k))).collect(),
                nodes: (0..net.len())
                    .map(|v| ClassRow {
                        id: net.id(v),
                        class: c.class(v),
                    })
                    .collect(),
            };
            emit(&out, &to_json(&table))
        }
        Command::Localize {
            network,
            seed,
            interleaving,
            trace,
            out,
        } => {
            let net = read_network(&network)?;
            let cfg = SimConfig {
                seed,
                interleaving: match interleaving {
                    Order::Fifo => Interleaving::Fifo,
                    Order::Random => Interleaving::Random,
                },
                ..SimConfig::default()
            };
            let result = run_simulation(&net, &cfg);
            emit(&out, &ResultFile::from_run(&net, &result).to_json())?;
            if let Some(path) = trace {
                fs::write(&path, result.trace.to_jsonl())
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            if let Some(e) = result.error {
                return Err(Failure::Precondition(e.to_string()));
            }
            if !result.faults.is_empty() {
                return Err(Failure::Internal(result.faults.join("\n")));
            }
            Ok(())
        }
        Command::Trilaterate {
            network,
            sweep,
            triangle,
            sweep_args,
            out,
        } => {
            let net = read_network(&network)?;
            if sweep {
                let stats = sweep_triangles(&net, &sweep_options(&sweep_args));
                return emit(&out, &sweep_csv(&net, &stats));
            }
            let ids = triangle.expect("clap requires one of --sweep or --triangle");
            let [a, b, c] = ids[..] else {
                return Err(Failure::Input(format!("--triangle needs 3 ids, got {}", ids.len())));
            };
            let mut tri = [0; 3];
            for (slot, id) in tri.iter_mut().zip([a, b, c]) {
                *slot = net.index_of(id).ok_or_else(|| Failure::Input(format!("unknown node id {id}")))?;
            }
            let run = trilaterate_from(&net, tri).map_err(|e| Failure::Input(e.to_string()))?;
            let report = SingleRun {
                triangle: [a, b, c],
                localized_count: run.localized_count(),
                sweeps: run.sweeps,
                positions: run
                    .positions
                    .iter()
                    .enumerate()
                    .filter_map(|(v, p)| p.map(|p| (net.id(v), [p.x, p.y])))
                    .collect(),
            };
            emit(&out, &to_json(&report))
        }
        Command::Compare {
            network,
            seed,
            sweep_args,
            out,
        } => {
            let net = read_network(&network)?;
            let result = run_simulation(
                &net,
                &SimConfig {
                    seed,
                    ..SimConfig::default()
                },
            );
            let stats = sweep_triangles(&net, &sweep_options(&sweep_args));
            let check = verify_localization(&result, &net);
            let oracle = classify_by_oracle(&net);
            let report = CompareReport {
                n: net.len(),
                leader: result.leader.map(|v| net.id(v)),
                wheel_localized: result.localized_count(),
                trilateration_best: stats.best,
                trilateration_worst: stats.worst,
                triangles: stats.total_triangles,
                sampled: stats.sampled,
                strong_interior_connected: commwheel::network::strong_interior_connected(&net, &oracle),
                inclusion_holds: check.protocol.holds,
                oracle_inclusion_holds: check.oracle.holds,
                missing: check.protocol.missing.clone(),
                faults: result.faults.len(),
            };
            emit(&out, &to_json(&report))?;
            if let Some(e) = result.error {
                return Err(Failure::Precondition(e.to_string()));
            }
            if check.protocol.holds == Some(false) || !result.faults.is_empty() {
                return Err(Failure::Internal(format!(
                    "localized set misses required nodes {:?}; {} faults",
                    check.protocol.missing,
                    result.faults.len()
                )));
            }
            Ok(())
        }
        Command::Render { network, result, out } => {
            let net = read_network(&network)?;
            let file = match result {
                Some(path) => {
                    let text =
                        fs::read_to_string(&path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    Some(ResultFile::from_json(&text)?)
                }
                None => None,
            };
            let classes = classify_by_wheels(&net).classes;
            emit(&out, &render_svg(&net, &classes, file.as_ref())?)
        }
    }
}

fn sweep_options(args: &SweepArgs) -> SweepOptions {
    SweepOptions {
        max_triangles: args.max_triangles,
        jobs: args.jobs.max(1),
        ..SweepOptions::default()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("precondition unmet: {msg}");
            ExitCode::from(EXIT_PRECONDITION)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal check failed: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
