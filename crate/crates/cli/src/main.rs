use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use svsim::bench::{gen, BenchApp, BenchSpec};
use svsim::circuit::Circuit;
use svsim::engine::{run, RunConfig, RunReport};
use svsim::perf::{roofline_report, scaling_table, write_roofline_csv, write_scaling_csv, MachineModel, Variant};
use svsim::qasm;
use svsim::state::{MemoryBudget, Precision};
use svsim::transpiler::{decompose_multi_controlled, fuse, su4_decompose, sweep_blocking, FusionConfig};

#[derive(Parser)]
#[command(name = "svsim", version, about = "State-vector quantum circuit simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark circuit as OpenQASM 2.0.
    Gen(GenArgs),
    /// Print gate count, depth and gate histogram of a QASM file.
    Stats(StatsArgs),
    /// Show what fusion and cache blocking do to a circuit.
    Transpile(TranspileArgs),
    /// Simulate a QASM file and report counts and counters.
    Run(RunArgs),
    /// Time a benchmark family over a range of qubit counts.
    Bench(BenchArgs),
    /// Place the kernel classes of a saved run report on a machine roofline.
    Roofline(RooflineArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    /// qv, qft, rqc, grover, ghz or qw.
    app: BenchApp,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Marked basis state (Grover).
    #[arg(long)]
    marked: Option<u64>,
}

impl SpecArgs {
    fn spec(&self, n: usize) -> BenchSpec {
        BenchSpec {
            depth: self.depth,
            iterations: self.iterations,
            seed: self.seed,
            marked_state: self.marked,
            ..BenchSpec::new(self.app, n)
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    qubits: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    file: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct FusionArgs {
    #[arg(long, value_enum, default_value_t = Switch::On)]
    fusion: Switch,
    /// Fuse only circuits with at least this many qubits.
    #[arg(long, default_value_t = 14)]
    fusion_threshold: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=10))]
    fusion_max_qubits: u8,
}

impl FusionArgs {
    fn config(&self) -> FusionConfig {
        FusionConfig {
            enabled: self.fusion == Switch::On,
            threshold: self.fusion_threshold,
            max_fused_qubits: self.fusion_max_qubits as usize,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    #[command(flatten)]
    fusion: FusionArgs,
    /// single or double.
    #[arg(long, default_value = "double")]
    precision: Precision,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
    /// Split the state into chunks of 2^b amplitudes.
    #[arg(long)]
    blocking_qubits: Option<usize>,
}

impl EngineArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            precision: self.precision,
            fusion: self.fusion.config(),
            blocking_qubits: self.blocking_qubits,
            workers: self.workers as usize,
            budget: MemoryBudget::from_env(),
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct TranspileArgs {
    file: PathBuf,
    #[command(flatten)]
    fusion: FusionArgs,
    #[arg(long, conflicts_with = "sweep")]
    blocking_qubits: Option<usize>,
    /// Blocking sizes to plan, e.g. `14..18` (inclusive) or `10,12,14`.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value = "double")]
    precision: Precision,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave out wall-clock fields so repeated runs print identical reports.
    #[arg(long)]
    no_timestamps: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Qubit counts, e.g. `4..14` (inclusive) or `20`.
    #[arg(long)]
    qubits: String,
    /// Comma-separated: fusion-on, fusion-off, blocked.
    #[arg(long, default_value = "fusion-on,fusion-off")]
    variants: String,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[command(flatten)]
    engine: EngineArgs,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct RooflineArgs {
    /// JSON report written by `svsim run --format json`.
    #[arg(long)]
    report: PathBuf,
    /// Machine model file; the built-in A100 model when omitted.
    #[arg(long)]
    machine: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

type CliResult<T = ()> = Result<T, CliError>;

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Stats(a) => cmd_stats(a),
        Cmd::Transpile(a) => cmd_transpile(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Roofline(a) => cmd_roofline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn load_qasm(path: &Path) -> CliResult<Circuit> {
    let bytes = fs::read(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    qasm::parse_bytes(&bytes).map_err(|e| runtime(format!("{}:{e}", path.display())))
}

/// `a..b` (inclusive), `a..=b` or a single count.
fn parse_range(s: &str) -> CliResult<RangeInclusive<usize>> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| usage(format!("invalid qubit range `{s}`")));
    let r = match s.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?,
        None => {
            let n = num(s)?;
            n..=n
        }
    };
    if r.is_empty() {
        return Err(usage(format!("empty qubit range `{s}`")));
    }
    Ok(r)
}

fn parse_list(s: &str) -> CliResult<Vec<usize>> {
    if s.contains("..") {
        return Ok(parse_range(s)?.collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| usage(format!("invalid list `{s}`"))))
        .collect()
}

fn cmd_gen(a: GenArgs) -> CliResult {
    let spec = a.spec.spec(a.qubits);
    spec.validate().map_err(usage)?;
    let c = gen(&spec).map_err(runtime)?;
    let text = match qasm::emit(&c) {
        Ok(t) => t,
        Err(_) => {
            // SU(4) blocks and multi-controlled gates have no qelib1 spelling.
            let lowered = decompose_multi_controlled(&su4_decompose(&c));
            eprintln!(
                "note: lowered {} gates to {} native gates for QASM output",
                c.unitary_gates().count(),
                lowered.unitary_gates().count()
            );
            qasm::emit(&lowered).map_err(runtime)?
        }
    };
    write_out(a.output.as_deref(), &text)
}

fn histogram_text(h: &BTreeMap<String, usize>) -> String {
    let w = h.keys().map(|k| k.len()).max().unwrap_or(0);
    h.iter().map(|(k, v)| format!("  {k:<w$}  {v}\n")).collect()
}

fn cmd_stats(a: StatsArgs) -> CliResult {
    let c = load_qasm(&a.file)?;
    let s = c.stats();
    let text = match a.out.format {
        Format::Json => to_json(&s),
        Format::Text => format!("{s}\n{}", histogram_text(&s.histogram)),
    };
    write_out(a.out.output.as_deref(), &text)
}

fn cmd_transpile(a: TranspileArgs) -> CliResult {
    let c = load_qasm(&a.file)?;
    let b_values = match (&a.sweep, a.blocking_qubits) {
        (Some(s), _) => parse_list(s)?,
        (None, Some(b)) => vec![b],
        (None, None) => Vec::new(),
    };
    let fcfg = a.fusion.config();
    let fused = if fcfg.applies_to(c.n_qubits) { Some(fuse(&c, &fcfg)) } else { None };
    let target = fused.as_ref().map_or(&c, |f| &f.circuit);
    let blocking = sweep_blocking(target, &b_values, a.precision).map_err(runtime)?;
    let mut groups: BTreeMap<usize, usize> = BTreeMap::new();
    for g in fused.iter().flat_map(|f| &f.groups) {
        *groups.entry(g.qubits.len()).or_default() += 1;
    }

    let text = match a.out.format {
        Format::Json => to_json(&json!({
            "input": c.stats(),
            "fusion": fcfg,
            "fused": fused.as_ref().map(|f| f.circuit.stats()),
            "fused_groups_by_qubits": groups,
            "blocking": blocking,
        })),
        Format::Text => {
            let mut t = format!("input   {}\n", c.stats());
            match &fused {
                Some(f) => {
                    let by_k: Vec<String> = groups.iter().map(|(k, n)| format!("{n} x {k}q")).collect();
                    let _ = writeln!(t, "fused   {} ({} groups: {})", f.circuit.stats(), f.groups.len(), by_k.join(", "));
                }
                None if !fcfg.enabled => t.push_str("fused   fusion off\n"),
                None => {
                    let _ = writeln!(t, "fused   skipped ({} qubits < threshold {})", c.n_qubits, fcfg.threshold);
                }
            }
            if !blocking.is_empty() {
                let _ = writeln!(t, "{:>4}  {:>10}  {:>8}  {:>20}", "b", "exchanges", "restore", "inter-chunk bytes");
                for r in &blocking {
                    let _ = writeln!(
                        t,
                        "{:>4}  {:>10}  {:>8}  {:>20}",
                        r.blocking_qubits, r.inserted_swaps, r.restore_swaps, r.predicted_inter_chunk_bytes
                    );
                }
            }
            t
        }
    };
    write_out(a.out.output.as_deref(), &text)
}

fn report_text(r: &RunReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "circuit      {}", r.circuit);
    let _ = writeln!(
        t,
        "config       {} precision, {} worker(s), fusion {}, blocking {}",
        r.config.precision,
        r.config.workers,
        if r.config.fusion.enabled { "on" } else { "off" },
        r.config.blocking_qubits.map_or("off".to_string(), |b| format!("b={b}"))
    );
    let _ = writeln!(t, "executed     {} gates, {} exchanges", r.executed_gates, r.inserted_swaps);
    let _ = writeln!(t, "flops        {}", r.flops);
    let _ = writeln!(t, "bytes        {}", r.bytes);
    if r.config.blocking_qubits.is_some() {
        let _ = writeln!(t, "inter-chunk  {} bytes ({} across workers)", r.inter_chunk_bytes, r.cross_worker_bytes);
    }
    for c in &r.kernel_classes {
        let secs = c.seconds.map_or(String::new(), |s| format!("  {s:.6} s"));
        let _ = writeln!(t, "  {:<10}  {:>8} gates  {:>14} flops{secs}", c.label, c.gates, c.flops);
    }
    if let Some(p) = &r.phase_times {
        let _ = writeln!(
            t,
            "phases       init {:.6} s, transfer {:.6} s, compute {:.6} s, finalize {:.6} s, wall {:.6} s",
            p.initialize, p.transfer, p.compute, p.finalize, p.wall
        );
    }
    if !r.counts.is_empty() {
        t.push_str("counts\n");
        for (k, v) in &r.counts {
            let _ = writeln!(t, "  {k}  {v}");
        }
    }
    t
}

fn cmd_run(a: RunArgs) -> CliResult {
    let c = load_qasm(&a.file)?;
    let cfg = RunConfig {
        shots: a.shots,
        seed: a.seed,
        keep_state: false,
        ..a.engine.config()
    };
    let result = run(&c, &cfg).map_err(runtime)?;
    let report = RunReport::new(c.stats(), &cfg, &result, !a.no_timestamps);
    let text = match a.out.format {
        Format::Json => to_json(&report),
        Format::Text => report_text(&report),
    };
    write_out(a.out.output.as_deref(), &text)
}

fn cmd_bench(a: BenchArgs) -> CliResult {
    let range = parse_range(&a.qubits)?;
    let spec = a.spec.spec(*range.start());
    spec.validate().map_err(usage)?;
    let base = a.engine.config();
    let mut variants = Vec::new();
    for name in a.variants.split(',').map(str::trim) {
        let config = match name {
            "fusion-on" => RunConfig {
                fusion: FusionConfig { enabled: true, ..base.fusion },
                blocking_qubits: None,
                ..base
            },
            "fusion-off" => RunConfig {
                fusion: FusionConfig { enabled: false, ..base.fusion },
                blocking_qubits: None,
                ..base
            },
            "blocked" => RunConfig {
                blocking_qubits: Some(
                    base.blocking_qubits.ok_or_else(|| usage("variant `blocked` needs --blocking-qubits"))?,
                ),
                ..base
            },
            other => return Err(usage(format!("unknown variant `{other}`"))),
        };
        variants.push(Variant::new(name, config));
    }
    let rows = scaling_table(&spec, range, &variants, a.repeats);
    if let Some(p) = &a.csv {
        let f = fs::File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
        write_scaling_csv(f, &rows).map_err(runtime)?;
    }
    let text = match a.out.format {
        Format::Json => to_json(&rows),
        Format::Text => {
            let mut t = format!(
                "{:<7} {:>6}  {:<11} {:>12} {:>12} {:>16}  {}\n",
                "app", "qubits", "variant", "mean s", "std s", "flops", "note"
            );
            for r in &rows {
                let _ = writeln!(
                    t,
                    "{:<7} {:>6}  {:<11} {:>12.6} {:>12.6} {:>16}  {}",
                    r.app, r.qubits, r.variant, r.mean_seconds, r.std_seconds, r.flops, r.skipped
                );
            }
            t
        }
    };
    write_out(a.out.output.as_deref(), &text)
}

fn cmd_roofline(a: RooflineArgs) -> CliResult {
    let model = match &a.machine {
        Some(p) => MachineModel::load(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?,
        None => MachineModel::a100(),
    };
    let raw = fs::read_to_string(&a.report).map_err(|e| runtime(format!("{}: {e}", a.report.display())))?;
    let report: RunReport =
        serde_json::from_str(&raw).map_err(|e| runtime(format!("{}: {e}", a.report.display())))?;
    let rows = roofline_report(&report.ledger(), &model, report.config.precision);
    if let Some(p) = &a.csv {
        let f = fs::File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
        write_roofline_csv(f, &rows).map_err(runtime)?;
    }
    let text = match a.out.format {
        Format::Json => to_json(&rows),
        Format::Text => {
            let mut t = format!(
                "{model}\nridge {:.4} flop/byte ({})\n",
                model.ridge_point(report.config.precision),
                report.config.precision
            );
            let _ = writeln!(
                t,
                "{:<10} {:>8} {:>10} {:>16} {:>16}  bound",
                "class", "gates", "flop/byte", "achieved flop/s", "roof flop/s"
            );
            for r in &rows {
                let achieved = if r.reliable { format!("{:.3e}", r.achieved_flops) } else { "-".into() };
                let _ = writeln!(
                    t,
                    "{:<10} {:>8} {:>10.4} {:>16} {:>16.3e}  {}",
                    r.class, r.gates, r.intensity, achieved, r.attainable_flops, r.bound
                );
            }
            t
        }
    };
    write_out(a.out.output.as_deref(), &text)
}
