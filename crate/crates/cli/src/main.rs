//! `tracelens`: slice event traces from the command line.
//!
//! Exit status: 0 success, 1 validation found violations, 2 unreadable path or
//! bad usage, 3 event index out of range, 4 trace or model could not be parsed.

mod render;

use std::collections::BTreeSet;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracelens_core::{
    slice_with, to_dot, validate_against_model, DependencyEdge, DependencyEngine, DependencyKind, Error,
    EventTrace, LsruReading, SliceMode, SliceOptions, SystemModel, TraceFormat,
};
use tracelens_service::AppState;

#[derive(Parser)]
#[command(name = "tracelens", version, about = "Dependency analysis and slicing of event traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the events that may have influenced one event.
    Slice(QueryArgs),
    /// List the dependencies of one event, grouped by kind.
    Deps(QueryArgs),
    /// Check a trace against the model's state-transition diagrams.
    Validate(InputArgs),
    /// Start the local explorer service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Trace file (.tsv or .json).
    #[arg(long)]
    trace: PathBuf,
    /// Model file (JSON). Without one, processes are taken as the active resources.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    input: InputArgs,
    /// 1-based index of the event under investigation.
    #[arg(long)]
    event: usize,
    /// Dependencies to follow. For `deps`, omitting it lists every kind.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Let any intervening use of a shared resource block an LSRU dependency,
    /// including uses by the affected process itself.
    #[arg(long)]
    lsru_strict: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 7878)]
    port: u16,
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    host: IpAddr,
    /// Persist sessions here and restore them on start.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Basic,
    CauseEffect,
}

impl From<Mode> for SliceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Basic => SliceMode::Basic,
            Mode::CauseEffect => SliceMode::CauseEffect,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Dot,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IndexOutOfRange { .. } | Error::NotAMember(_) => 3,
            Error::TraceParse { .. } | Error::Model(_) | Error::UnknownResource(_) => 4,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<(String, u8), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))
}

fn load(input: &InputArgs) -> Result<(EventTrace, SystemModel), Failure> {
    let text = read(&input.trace)?;
    let format = TraceFormat::detect(input.trace.to_str(), &text);
    let trace = EventTrace::parse(&text, format).map_err(|e| {
        Failure::new(4, format!("{}: {e}", input.trace.display()))
    })?;
    let model = match &input.model {
        Some(p) => SystemModel::parse(&read(p)?).map_err(|e| Failure::new(4, format!("{}: {e}", p.display())))?,
        None => SystemModel::inferred_from(&trace),
    };
    Ok((trace, model))
}

fn lsru(args: &QueryArgs) -> LsruReading {
    if args.lsru_strict {
        LsruReading::Literal
    } else {
        LsruReading::OtherProcesses
    }
}

fn cmd_slice(args: &QueryArgs) -> Outcome {
    let (trace, model) = load(&args.input)?;
    let mode = args.mode.map(SliceMode::from).unwrap_or_default();
    let opts = SliceOptions { mode, lsru: lsru(args), ..Default::default() };
    let result = slice_with(&trace, &model, args.event, opts)?;
    let out = match args.input.format {
        Format::Table => render::slice(&result, &trace),
        Format::Json => result.to_json() + "\n",
        Format::Dot => to_dot(&result, &trace),
    };
    Ok((out, 0))
}

fn cmd_deps(args: &QueryArgs) -> Outcome {
    let (trace, model) = load(&args.input)?;
    let engine = DependencyEngine::new(&trace, &model).with_lsru_reading(lsru(args));
    let j = args.event;
    let (edges, kinds): (BTreeSet<DependencyEdge>, &[DependencyKind]) = match args.mode {
        Some(m) => {
            let mode = SliceMode::from(m);
            (engine.all_dependencies(j, mode)?.into_iter().collect(), render::kinds_for(mode))
        }
        None => {
            let mut all: BTreeSet<_> = engine.all_dependencies(j, SliceMode::Basic)?.into_iter().collect();
            all.extend(engine.ce_predecessors(j)?);
            (all, &DependencyKind::ALL)
        }
    };
    let out = match args.input.format {
        Format::Json => serde_json::to_string(&edges).expect("edges serialize") + "\n",
        Format::Table => render::dependencies(&edges, kinds),
        Format::Dot => return Err(Failure::new(2, "deps supports --format table or json")),
    };
    Ok((out, 0))
}

fn cmd_validate(args: &InputArgs) -> Outcome {
    if args.model.is_none() {
        return Err(Failure::new(2, "validate needs --model"));
    }
    let (trace, model) = load(args)?;
    let violations = validate_against_model(&trace, &model);
    let out = match args.format {
        Format::Json => serde_json::to_string_pretty(&violations).expect("violations serialize") + "\n",
        Format::Table => render::violations(&violations),
        Format::Dot => return Err(Failure::new(2, "validate supports --format table or json")),
    };
    Ok((out, if violations.is_empty() { 0 } else { 1 }))
}

fn cmd_serve(args: &ServeArgs) -> Outcome {
    let state = match &args.snapshot_dir {
        Some(dir) => AppState::with_snapshots(dir)
            .map_err(|e| Failure::new(2, format!("snapshot dir {}: {e}", dir.display())))?,
        None => AppState::new(),
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(2, e.to_string()))?;
    eprintln!("serving on http://{addr}");
    runtime
        .block_on(tracelens_service::serve(addr, Arc::new(state)))
        .map_err(|e| Failure::new(2, format!("cannot serve on {addr}: {e}")))?;
    Ok((String::new(), 0))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRACELENS_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Slice(a) => cmd_slice(a),
        Command::Deps(a) => cmd_deps(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            log::debug!("exiting with status {}", f.code);
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
