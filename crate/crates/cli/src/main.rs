//! Command-line front end for building, running and checking protocols.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wlocc::analysis::{self, fmt_g12};
use wlocc::engine::{self, Mode};
use wlocc::protocol::{self, ProtocolGraph};
use wlocc::Error;

#[derive(Parser)]
#[command(name = "wlocc", version, about = "LOCC protocols on three-qubit W-class states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Thm1,
    Simple3,
    Thm2,
    FortLo,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunMode {
    Finite,
    Truncated,
    Resummed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write a standard protocol to a file.
    Build {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Execute a protocol file and print its outcome distribution.
    Run {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "finite")]
        mode: RunMode,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Check a protocol file against target t; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Minimum number of rounds needed for target t.
    Classify {
        #[arg(long)]
        t: f64,
        /// Require every pair outcome to have positive probability.
        #[arg(long)]
        require_all_pairs: bool,
    },
    /// Extend a finite protocol by up to two rounds to raise its EPR yield.
    Lift {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Tabulate verdicts and probabilities over a grid of targets.
    Sweep {
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        steps: usize,
        /// `.json` writes JSON, anything else CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Success probability of the repeating Bell-pair protocol after n cycles.
    Fl {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        cycles: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::HaltAssertion { .. }) { 1 } else { 2 };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<ProtocolGraph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    protocol::parse(&text).map_err(|e| match e {
        Error::Parse(diags) => Failure::usage(
            diags
                .iter()
                .map(|d| format!("{}:{d}", path.display()))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => other.into(),
    })
}

fn save(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Build { family, t, epsilon, output } => {
            let need_t = || t.ok_or_else(|| Failure::usage("--t is required for this family"));
            let g = match family {
                Family::Thm1 => engine::build_thm1(need_t()?)?,
                Family::Simple3 => engine::build_simple3(need_t()?)?,
                Family::Thm2 => engine::build_thm2(need_t()?)?,
                Family::FortLo => engine::build_fortescue_lo(
                    epsilon.ok_or_else(|| Failure::usage("--epsilon is required for fort-lo"))?,
                )?,
            };
            save(&output, &protocol::serialize(&g))?;
            Ok(0)
        }
        Command::Run { protocol, t, mode, cycles, format } => {
            let g = load(&protocol)?;
            let mode = match (mode, cycles) {
                (RunMode::Finite, _) => Mode::Finite,
                (RunMode::Resummed, _) => Mode::Resummed,
                (RunMode::Truncated, Some(n)) => Mode::Truncated(n),
                (RunMode::Truncated, None) => return Err(Failure::usage("--cycles is required with --mode truncated")),
            };
            let d = engine::run(&g, t, mode)?;
            let out = match format {
                Format::Json => analysis::run_json(&d, g.round_count()) + "\n",
                Format::Csv => analysis::run_csv(&d, g.round_count()),
            };
            print!("{out}");
            Ok(0)
        }
        Command::Verify { protocol, t } => {
            let g = load(&protocol)?;
            let report = analysis::verify(&g, t);
            println!("{report}");
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Classify { t, require_all_pairs } => {
            let c = analysis::classify(t, require_all_pairs)?;
            println!("{}", c.verdict);
            if c.degenerate {
                eprintln!("note: t = 0 is a degenerate target (the BC pair is unentangled)");
            }
            Ok(0)
        }
        Command::Lift { protocol, t, output } => {
            let g = load(&protocol)?;
            let lifted = engine::lift(&g, t)?;
            save(&output, &protocol::serialize(&lifted))?;
            Ok(0)
        }
        Command::Sweep { t_min, t_max, steps, out } => {
            let rows = analysis::sweep(t_min, t_max, steps)?;
            let json = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            let text = if json { analysis::sweep_json(&rows) + "\n" } else { analysis::sweep_csv(&rows) };
            save(&out, &text)?;
            Ok(0)
        }
        Command::Fl { epsilon, cycles } => {
            let g = engine::build_fortescue_lo(epsilon)?;
            let n = usize::try_from(cycles).map_err(|_| Failure::usage("--cycles is too large"))?;
            let simulated = engine::run_truncated(&g, 1.0, n)?;
            let limit = (6.0 - 4.0 * epsilon) / (6.0 - 3.0 * epsilon);
            println!(
                "{{\"epsilon\":{},\"cycles\":{},\"success\":{},\"simulated\":{},\"limit\":{},\"min_cycles\":{}}}",
                fmt_g12(epsilon),
                cycles,
                fmt_g12(engine::fl_success(epsilon, cycles)),
                fmt_g12(simulated.success()),
                fmt_g12(limit),
                engine::fl_min_cycles(epsilon)?
            );
            Ok(0)
        }
    }
}
