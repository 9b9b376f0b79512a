use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use edgecolor_core::format::{
    parse_coloring, parse_graph, write_coloring, write_log, write_summary, write_trace, write_witness,
};
use edgecolor_core::{
    color_multigraph, oracle, Bundle, ColoringRun, DensityWitness, DriverConfig, DriverError, Mode,
    Multigraph, Outcome, PartialColoring,
};
use serde_json::json;

const OK: u8 = 0;
const MISMATCH: u8 = 1;
const INSUFFICIENT: u8 = 2;
const INPUT_ERROR: u8 = 3;
const DIAGNOSTIC: u8 = 4;

/// Edge coloring for loopless multigraphs.
///
/// Exit status: 0 success, 1 validate or replay mismatch, 2 palette refuted
/// in strict mode, 3 input error, 4 diagnostic bundle written.
#[derive(Parser, Debug)]
#[command(name = "edgecolor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Color every edge of a graph file.
    Color(ColorArgs),
    /// Exact maximum degree, density and chromatic index of a small graph.
    Oracle(OracleArgs),
    /// Check that a coloring file is a complete proper edge coloring of a graph.
    Validate(ValidateArgs),
    /// Rerun a diagnostic bundle and compare with the recorded outcome.
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// Output file; sidecars are written next to it. Defaults to stdout,
    /// with sidecars next to the input.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct ColorArgs {
    input: PathBuf,
    /// Palette size to start from (or to insist on, in strict mode).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    colors: Option<u64>,
    #[arg(long, default_value_t = Mode::Escalate)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write density witnesses to `<base>.witness`.
    #[arg(long)]
    emit_witness: bool,
    /// Write growth and reduction events to `<base>.trace`.
    #[arg(long)]
    emit_trace: bool,
    /// Write the exchange log to `<base>.log`.
    #[arg(long)]
    emit_log: bool,
    /// Exchange budget per uncolored edge before a diagnostic is raised.
    #[arg(long)]
    edge_budget: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OracleArgs {
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    graph: PathBuf,
    coloring: PathBuf,
    /// Palette size; defaults to the largest color used.
    #[arg(long)]
    colors: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    bundle: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// Anything wrong with the files or arguments handed to the program.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn read_graph(path: &Path) -> Result<Multigraph, InputError> {
    Ok(parse_graph(&read(path)?).with_context(|| format!("parsing {}", path.display()))?)
}

struct Sink<'a> {
    common: &'a Common,
    base: PathBuf,
}

impl<'a> Sink<'a> {
    fn new(common: &'a Common, input: &Path) -> Self {
        let base = common.output.clone().unwrap_or_else(|| input.to_path_buf());
        Sink { common, base }
    }

    fn sidecar(&self, ext: &str) -> PathBuf {
        let mut name = self.base.clone().into_os_string();
        name.push(".");
        name.push(ext);
        PathBuf::from(name)
    }

    fn write_sidecar(&self, ext: &str, content: &str) -> Result<PathBuf, InputError> {
        let path = self.sidecar(ext);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn emit(&self, text: String, value: serde_json::Value) -> Result<(), InputError> {
        let out = match self.common.format {
            Format::Text => text,
            Format::Json => serde_json::to_string_pretty(&value).expect("json") + "\n",
        };
        match &self.common.output {
            Some(path) => fs::write(path, out).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{out}"),
        }
        Ok(())
    }
}

fn witness_json(w: &DensityWitness) -> serde_json::Value {
    json!({
        "refuted": w.refuted,
        "ceiling": w.ceiling(),
        "edges": w.induced_edges,
        "vertices": w.vertices,
    })
}

fn run_json(run: &ColoringRun) -> serde_json::Value {
    json!({
        "status": "colored",
        "k_used": run.k_final,
        "colors_used": run.colors_used,
        "reduce_calls": run.stats.reduce_calls,
        "witnesses": run.witnesses.iter().map(witness_json).collect::<Vec<_>>(),
        "escalations": run.escalations.len(),
        "colors": run.colors,
    })
}

fn color(args: &ColorArgs) -> Result<u8, InputError> {
    let graph = read_graph(&args.input)?;
    let config = DriverConfig {
        mode: args.mode,
        k_override: args.colors.map(|k| k as usize),
        seed: args.seed,
        keep_certificates: false,
        edge_budget: args.edge_budget,
    };
    let sink = Sink::new(&args.common, &args.input);
    let result = color_multigraph(&graph, &config);
    let bundle = |result: &Result<ColoringRun, DriverError>| -> Result<(), InputError> {
        let path = sink.write_sidecar("bundle.json", &Bundle::new(&graph, &config, result).to_json())?;
        eprintln!("diagnostic bundle written to {}", path.display());
        Ok(())
    };
    let partial_artifacts = |run: &ColoringRun| -> Result<(), InputError> {
        if args.emit_trace {
            sink.write_sidecar("trace", &write_trace(&run.trace))?;
        }
        if args.emit_log {
            sink.write_sidecar("log", &write_log(&run.log))?;
        }
        Ok(())
    };
    match &result {
        Ok(run) => {
            partial_artifacts(run)?;
            if args.emit_witness {
                let text: String = run.witnesses.iter().map(write_witness).collect();
                sink.write_sidecar("witness", &text)?;
            }
            let text = write_coloring(&run.colors) + &write_summary(run);
            sink.emit(text, run_json(run))?;
            if run.escalations.is_empty() {
                Ok(OK)
            } else {
                eprintln!("{} escalation(s) during coloring", run.escalations.len());
                bundle(&result)?;
                Ok(DIAGNOSTIC)
            }
        }
        Err(DriverError::Insufficient { k, witness }) => {
            sink.write_sidecar("witness", &write_witness(witness))?;
            eprintln!("{}", result.as_ref().unwrap_err());
            let text = format!("s insufficient k={k}\n") + &write_witness(witness);
            sink.emit(text, json!({ "status": "insufficient", "k": k, "witness": witness_json(witness) }))?;
            Ok(INSUFFICIENT)
        }
        Err(DriverError::DegreeExceedsPalette { k, vertex, degree }) => {
            let line = format!("d refuted={k} vertex={vertex} degree={degree}\n");
            sink.write_sidecar("witness", &line)?;
            eprintln!("{}", result.as_ref().unwrap_err());
            let value = json!({ "status": "insufficient", "k": k, "vertex": vertex, "degree": degree });
            sink.emit(format!("s insufficient k={k}\n{line}"), value)?;
            Ok(INSUFFICIENT)
        }
        Err(e @ DriverError::PaletteBelowDegree { .. }) => Err(InputError(anyhow::anyhow!("{e}"))),
        Err(e) => {
            eprintln!("{e}");
            if let DriverError::Unresolved { run, .. } = e {
                partial_artifacts(run)?;
            }
            bundle(&result)?;
            Ok(DIAGNOSTIC)
        }
    }
}

fn oracle_cmd(args: &OracleArgs) -> Result<u8, InputError> {
    let graph = read_graph(&args.input)?;
    let report = oracle::report(&graph)?;
    let witness = report
        .witness
        .as_ref()
        .map(|w| w.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
        .unwrap_or_else(|| "-".into());
    let text = format!(
        "o delta={} gamma={} bound={} chromatic_index={} witness={}\n",
        report.delta, report.gamma, report.bound, report.chromatic_index, witness
    );
    Sink::new(&args.common, &args.input).emit(text, serde_json::to_value(&report)?)?;
    Ok(OK)
}

fn validate(args: &ValidateArgs) -> Result<u8, InputError> {
    let graph = read_graph(&args.graph)?;
    let colors = parse_coloring(&read(&args.coloring)?, &graph)
        .with_context(|| format!("parsing {}", args.coloring.display()))?;
    let k = args.colors.unwrap_or_else(|| colors.iter().copied().max().unwrap_or(0)).max(1);
    let uncolored = colors.iter().filter(|&&c| c == 0).count();
    let problem = match PartialColoring::from_assignment(&graph, k, &colors) {
        Err(v) => Some(v.to_string()),
        Ok(_) if uncolored > 0 => Some(format!("{uncolored} edge(s) uncolored")),
        Ok(_) => None,
    };
    let used = colors.iter().filter(|&&c| c > 0).collect::<std::collections::BTreeSet<_>>().len();
    let sink = Sink::new(&args.common, &args.coloring);
    match &problem {
        None => sink.emit(
            format!("v ok colors_used={used}\n"),
            json!({ "status": "ok", "colors_used": used }),
        )?,
        Some(p) => sink.emit(format!("v invalid {p}\n"), json!({ "status": "invalid", "reason": p }))?,
    }
    Ok(if problem.is_none() { OK } else { MISMATCH })
}

fn replay(args: &ReplayArgs) -> Result<u8, InputError> {
    let bundle = Bundle::parse(&read(&args.bundle)?)?;
    let replay = bundle.replay()?;
    let status = match &replay.outcome {
        Outcome::Colored { .. } => "colored",
        Outcome::Insufficient { .. } => "insufficient",
        Outcome::Unresolved { .. } => "unresolved",
        Outcome::Failed { .. } => "failed",
    };
    let verdict = if replay.matches { "reproduced" } else { "diverged" };
    let mut text = format!("r {verdict} status={status}\n");
    for e in escalations_of(&replay.outcome) {
        text += &format!("r escalation edge={} step={} {}\n", e.edge, e.step, e.stress);
    }
    let value = json!({
        "verdict": verdict,
        "status": status,
        "escalations": escalations_of(&replay.outcome)
            .iter()
            .map(|e| json!({ "edge": e.edge, "step": e.step, "site": e.stress.site, "detail": e.stress.detail }))
            .collect::<Vec<_>>(),
    });
    Sink::new(&args.common, &args.bundle).emit(text, value)?;
    Ok(if replay.matches { OK } else { MISMATCH })
}

fn escalations_of(outcome: &Outcome) -> Vec<&edgecolor_core::driver::EscalationRecord> {
    match outcome {
        Outcome::Colored { escalations, .. } => escalations.iter().collect(),
        Outcome::Unresolved { record, .. } => vec![record],
        _ => Vec::new(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { OK });
        }
    };
    let result = match &cli.command {
        Command::Color(a) => color(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Validate(a) => validate(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
