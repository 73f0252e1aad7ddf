//! `ppcount`: counting, classification, reduction and verification front end.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

use ppcount_core::endo::{count_polarizations, CountInput, EndoError, IsogenyConfig};
use ppcount_core::forms::{enumerate_reduced, BinaryForm};
use ppcount_core::lattice::{classify_unimodular, ClassifyOptions, GenusClassification, LatticeError};
use ppcount_core::period::run_suite;

mod render;

const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "ppcount", version, about = "Count principal polarizations on products of isogenous elliptic curves")]
struct Cli {
    /// Output format; defaults to a table on a terminal and JSON otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for lattice searches (0 = all cores).
    #[arg(long, global = true, env = "PPCOUNT_THREADS", default_value_t = 0)]
    threads: usize,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Number of principal polarizations of a product of curves.
    Count(CountArgs),
    /// Classify the unimodular lattices of a given rank.
    Classify(ClassifyArgs),
    /// Binary quadratic form utilities.
    #[command(subcommand)]
    Form(FormCommand),
    /// Run the period-matrix invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["self_rank", "surface_degree", "config"])))]
struct CountArgs {
    /// Self-product E^n of one curve.
    #[arg(long)]
    self_rank: Option<usize>,
    /// Surface E1 x E2 with minimal isogeny degree d.
    #[arg(long)]
    surface_degree: Option<u64>,
    /// JSON file holding `{"degrees": [...]}` or `{"blocks": [...]}`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Time budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    rank: usize,
    /// Time budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Stop once the found classes account for the full mass.
    #[arg(long)]
    mass_check: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the classification to this file.
    #[arg(long)]
    save: Option<PathBuf>,
    /// Read a saved classification instead of computing one.
    #[arg(long, conflicts_with_all = ["save", "budget", "mass_check"])]
    load: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FormCommand {
    /// Reduce a x² + 2b xy + c y² and report the change of basis.
    #[command(allow_negative_numbers = true)]
    Reduce {
        #[arg(long)]
        a: BigInt,
        #[arg(long)]
        b: BigInt,
        #[arg(long)]
        c: BigInt,
    },
    /// Primitive classes of determinant d.
    Classnum {
        #[arg(long)]
        det: BigInt,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Isogeny degrees of the chain, starting with 1.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance for the analytic checks.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    inputs: Value,
    result: Value,
    complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<EndoError> for Failure {
    fn from(e: EndoError) -> Self {
        match e {
            EndoError::Lattice(l) => l.into(),
            EndoError::InvalidDegrees(_) => Self::usage(e.to_string()),
            other => Self {
                code: EXIT_ERROR,
                message: other.to_string(),
            },
        }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        let code = match e {
            LatticeError::TimeBudgetExceeded => EXIT_INCOMPLETE,
            _ => EXIT_ERROR,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Result payload of a command plus the exit code it asks for.
struct Outcome {
    report: RunReport,
    code: u8,
}

fn budget(seconds: Option<f64>) -> Result<Option<Duration>, Failure> {
    seconds
        .map(|s| Duration::try_from_secs_f64(s).map_err(|_| Failure::usage(format!("invalid budget {s}"))))
        .transpose()
}

fn report(command: &str, inputs: Value, result: Value, complete: bool) -> RunReport {
    RunReport {
        command: command.into(),
        inputs,
        result,
        complete,
        timing_ms: None,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn cmd_count(args: &CountArgs, threads: usize) -> Result<Outcome, Failure> {
    let (input, inputs) = if let Some(n) = args.self_rank {
        let config = IsogenyConfig::new(&vec![1; n])?;
        (CountInput::Single(config), json!({ "self_rank": n }))
    } else if let Some(d) = args.surface_degree {
        let config = IsogenyConfig::new(&[1, d])?;
        (CountInput::Single(config), json!({ "surface_degree": d }))
    } else {
        let path = args.config.as_ref().expect("clap enforces one source");
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let input: CountInput =
            serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let echo = to_value(&input);
        (input, json!({ "config": echo }))
    };
    let mut inputs = inputs;
    inputs["budget"] = to_value(&args.budget);
    inputs["seed"] = json!(args.seed);
    let options = ClassifyOptions {
        mass_check: true,
        time_budget: budget(args.budget)?,
        seed: args.seed,
        threads,
    };
    let count = count_polarizations(&input, &options)?;
    Ok(Outcome {
        report: report("count", inputs, to_value(&count), true),
        code: 0,
    })
}

fn cmd_classify(args: &ClassifyArgs, threads: usize) -> Result<Outcome, Failure> {
    let inputs = json!({
        "rank": args.rank,
        "budget": args.budget,
        "mass_check": args.mass_check,
        "seed": args.seed,
    });
    let classification = if let Some(path) = &args.load {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let c: GenusClassification = serde_json::from_str(&text).map_err(|e| Failure {
            code: EXIT_ERROR,
            message: format!("{}: {e}", path.display()),
        })?;
        if c.rank != args.rank {
            return Err(LatticeError::RankMismatch(args.rank, c.rank).into());
        }
        c.validate()?;
        c
    } else {
        let options = ClassifyOptions {
            mass_check: args.mass_check,
            time_budget: budget(args.budget)?,
            seed: args.seed,
            threads,
        };
        classify_unimodular(args.rank, &options)?
    };
    if let Some(path) = &args.save {
        let text = serde_json::to_string_pretty(&classification).expect("classification serializes");
        fs::write(path, text + "\n").map_err(|e| Failure {
            code: EXIT_ERROR,
            message: format!("{}: {e}", path.display()),
        })?;
    }
    let mut complete = classification.complete;
    if args.mass_check && complete && !classification.mass_matches() {
        complete = false;
    }
    let code = if complete { 0 } else { EXIT_INCOMPLETE };
    Ok(Outcome {
        report: report("classify", inputs, to_value(&classification), complete),
        code,
    })
}

fn cmd_form(cmd: &FormCommand) -> Result<Outcome, Failure> {
    match cmd {
        FormCommand::Reduce { a, b, c } => {
            let form = BinaryForm::new(a.clone(), b.clone(), c.clone());
            let (reduced, witness) = form.reduce().map_err(|e| Failure {
                code: EXIT_ERROR,
                message: e.to_string(),
            })?;
            let result = json!({ "reduced": to_value(&reduced), "witness": to_value(&witness) });
            Ok(Outcome {
                report: report("form reduce", to_value(&form), result, true),
                code: 0,
            })
        }
        FormCommand::Classnum { det } => {
            if *det <= BigInt::from(0) {
                return Err(Failure::usage(format!("determinant must be positive, got {det}")));
            }
            let reps = enumerate_reduced(det, true);
            let result = json!({ "class_number": reps.len(), "representatives": to_value(&reps) });
            let inputs = json!({ "det": to_value(&ppcount_core::forms::BigIntJson(det.clone())) });
            Ok(Outcome {
                report: report("form classnum", inputs, result, true),
                code: 0,
            })
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    IsogenyConfig::new(&args.degrees)?;
    if let Some(tol) = args.tol.filter(|t| !(*t >= 0.0)) {
        return Err(Failure::usage(format!("tolerance must be non-negative, got {tol}")));
    }
    let inputs = json!({
        "degrees": args.degrees,
        "trials": args.trials,
        "seed": args.seed,
        "tol": args.tol,
    });
    let suite = run_suite(&args.degrees, args.trials, args.seed, args.tol).map_err(|e| Failure {
        code: EXIT_ERROR,
        message: e.to_string(),
    })?;
    let code = if suite.pass { 0 } else { EXIT_VERIFY };
    Ok(Outcome {
        report: report("verify", inputs, to_value(&suite), true),
        code,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Count(args) => cmd_count(args, cli.threads),
        Command::Classify(args) => cmd_classify(args, cli.threads),
        Command::Form(cmd) => cmd_form(cmd),
        Command::Verify(args) => cmd_verify(args),
    };
    let Outcome { mut report, code } = match outcome {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let stdout = io::stdout();
    let format = cli
        .format
        .unwrap_or(if stdout.is_terminal() { Format::Table } else { Format::Json });
    let text = match format {
        Format::Json => serde_json::to_string(&report).expect("report serializes") + "\n",
        Format::Table => render::table(&report.command, &report.inputs, &report.result, report.complete, report.timing_ms),
    };
    let mut out = stdout.lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(EXIT_ERROR);
    }
    ExitCode::from(code)
}
