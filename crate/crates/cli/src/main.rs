//! `numev`: check, extend, construct and classify algebras of numerical
//! events described in JSON problem files. Reports are JSON on stdout.

mod commands;
mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use numev::search::{DEFAULT_DENOMINATOR_BOUND, DEFAULT_STATE_CAP};
use numev::{Budget, ClassifyConfig};
use serde_json::json;

use commands::{CommandError, CommandResult, Construction, EXIT_OK, EXIT_PARSE};
use problem::{parse_problem, ProblemFile};
use report::{render, sha256_hex, CommandEcho, Report, Timing};

const ENV_MAX_ELEMENTS: &str = "NUMEV_MAX_ELEMENTS";
const ENV_MAX_ROUNDS: &str = "NUMEV_MAX_ROUNDS";

#[derive(Parser)]
#[command(name = "numev", version, about = "Algebras of numerical events: verify, construct, classify")]
struct Cli {
    /// Accept several problem files and emit a JSON array of reports.
    #[arg(long, global = true)]
    batch: bool,
    /// Emit `"timing": null` so reports are byte-identical across runs.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Single-line JSON output.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Files {
    /// Problem file(s).
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Element cap for saturation (env: NUMEV_MAX_ELEMENTS, default 4096).
    #[arg(long)]
    max_elements: Option<usize>,
    /// Round cap for saturation (env: NUMEV_MAX_ROUNDS, default 32).
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructKind {
    BooleanFromAtoms,
    Mo,
    SplitAtom,
    CompleteMo2,
}

#[derive(Subcommand)]
enum Command {
    /// Axiom check and structure flags for all events in the file.
    Verify(Files),
    /// The problem in canonical form: rationals in lowest terms, fixed field order.
    Normalize(Files),
    /// Verdict for adding the candidate to the other events.
    Classify {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Skip the two-valued cube search.
        #[arg(long)]
        no_oracle: bool,
        /// Largest state set the oracle enumerates.
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        oracle_cap: usize,
    },
    /// Forced closure of the events (plus the candidate, if any).
    Closure {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// 0,1-extension by a new state, optionally lifting one event.
    Extend {
        #[command(flatten)]
        files: Files,
        /// Label of the new state.
        #[arg(long)]
        state: String,
        /// Value of the lifted event at the new state.
        #[arg(long, requires = "event")]
        value: Option<String>,
        /// Event to lift.
        #[arg(long, requires = "value")]
        event: Option<String>,
    },
    /// Build an algebra from the events in the file.
    Construct {
        #[arg(value_enum)]
        kind: ConstructKind,
        #[command(flatten)]
        files: Files,
        /// Atom to split (split-atom).
        #[arg(long)]
        atom: Option<String>,
    },
    /// Smallest Boolean subalgebra of the two-valued cube holding all events.
    Oracle {
        #[command(flatten)]
        files: Files,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: usize,
    },
    /// Seeded search for MO2 interpolation configurations.
    Scan {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DENOMINATOR_BOUND)]
        bound: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Normalize(_) => "normalize",
            Command::Classify { .. } => "classify",
            Command::Closure { .. } => "closure",
            Command::Extend { .. } => "extend",
            Command::Construct { .. } => "construct",
            Command::Oracle { .. } => "oracle",
            Command::Scan { .. } => "scan",
        }
    }

    fn files(&self) -> &[PathBuf] {
        match self {
            Command::Verify(f)
            | Command::Normalize(f)
            | Command::Classify { files: f, .. }
            | Command::Closure { files: f, .. }
            | Command::Extend { files: f, .. }
            | Command::Construct { files: f, .. }
            | Command::Oracle { files: f, .. } => &f.files,
            Command::Scan { .. } => &[],
        }
    }
}

fn env_usize(name: &str) -> Result<Option<usize>, CommandError> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CommandError::Env {
            name: name.into(),
            message: format!("`{v}` is not a non-negative integer"),
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CommandError::Env {
            name: name.into(),
            message: e.to_string(),
        }),
    }
}

fn budget(args: BudgetArgs) -> Result<Budget, CommandError> {
    let d = Budget::default();
    Ok(Budget {
        max_elements: args.max_elements.or(env_usize(ENV_MAX_ELEMENTS)?).unwrap_or(d.max_elements),
        max_rounds: args.max_rounds.or(env_usize(ENV_MAX_ROUNDS)?).unwrap_or(d.max_rounds),
    })
}

fn run_problem(command: &Command, p: &ProblemFile) -> CommandResult {
    match command {
        Command::Verify(_) => commands::verify(p),
        Command::Normalize(_) => Ok(commands::Outcome {
            result: p.to_json(),
            ..Default::default()
        }),
        Command::Classify {
            budget: b,
            no_oracle,
            oracle_cap,
            ..
        } => {
            let cfg = ClassifyConfig {
                budget: budget(*b)?,
                oracle_enabled: !no_oracle,
                oracle_state_cap: *oracle_cap,
            };
            commands::classify_cmd(p, &cfg)
        }
        Command::Closure { budget: b, .. } => commands::closure(p, budget(*b)?),
        Command::Extend {
            state, value, event, ..
        } => {
            let lift = event.as_deref().zip(value.as_deref());
            commands::extend(p, state, lift)
        }
        Command::Construct { kind, atom, .. } => {
            let kind = match kind {
                ConstructKind::BooleanFromAtoms => Construction::BooleanFromAtoms,
                ConstructKind::Mo => Construction::Mo,
                ConstructKind::SplitAtom => Construction::SplitAtom,
                ConstructKind::CompleteMo2 => Construction::CompleteMo2,
            };
            commands::construct(p, kind, atom.as_deref())
        }
        Command::Oracle { cap, .. } => commands::oracle(p, *cap),
        Command::Scan { .. } => unreachable!("scan takes no problem file"),
    }
}

fn finish(
    echo: CommandEcho,
    digest: String,
    outcome: CommandResult,
    started: Instant,
    timing: bool,
) -> Report {
    let (exit_code, result, certificates, trace) = match outcome {
        Ok(o) => (o.exit, o.result, o.certificates, o.trace),
        Err(e) => {
            eprintln!("numev {}: {e}", echo.name);
            let result = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            (e.exit_code(), result, Vec::new(), None)
        }
    };
    Report {
        command: echo,
        input_digest: digest,
        exit_code,
        result,
        certificates,
        trace,
        timing: timing.then(|| Timing {
            elapsed_us: started.elapsed().as_micros(),
        }),
    }
}

fn report_for_file(cli: &Cli, args: &[String], path: &PathBuf) -> Report {
    let started = Instant::now();
    let echo = CommandEcho {
        name: cli.command.name().to_string(),
        args: args.to_vec(),
        input: Some(path.display().to_string()),
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            let err = CommandError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            return finish(echo, sha256_hex(b""), Err(err), started, !cli.no_timing);
        }
    };
    let digest = sha256_hex(&bytes);
    let outcome = String::from_utf8(bytes)
        .map_err(|e| CommandError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
        .and_then(|text| Ok(parse_problem(&text)?))
        .and_then(|p| run_problem(&cli.command, &p));
    finish(echo, digest, outcome, started, !cli.no_timing)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };

    let reports: Vec<Report> = if let Command::Scan {
        size,
        trials,
        seed,
        bound,
    } = cli.command
    {
        let started = Instant::now();
        let echo = CommandEcho {
            name: "scan".into(),
            args: args.clone(),
            input: None,
        };
        let digest = sha256_hex(format!("scan size={size} trials={trials} seed={seed} bound={bound}").as_bytes());
        let outcome = commands::scan(size, trials, seed, bound);
        vec![finish(echo, digest, outcome, started, !cli.no_timing)]
    } else {
        let files = cli.command.files();
        if files.len() > 1 && !cli.batch {
            eprintln!("numev: several problem files need --batch");
            return ExitCode::from(EXIT_PARSE as u8);
        }
        files.iter().map(|f| report_for_file(&cli, &args, f)).collect()
    };

    let text = if cli.batch {
        render(&reports, cli.compact)
    } else {
        render(&reports[0], cli.compact)
    };
    print!("{text}");
    let code = reports.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK);
    ExitCode::from(code as u8)
}
