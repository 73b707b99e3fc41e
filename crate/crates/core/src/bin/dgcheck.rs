//! Scenario-file driver: parse a scenario, execute its verification tasks,
//! and emit a deterministic report.
//!
//! Exit codes: 0 all verdicts hold, 1 any fails-with-witness, 2 any
//! inconclusive, 3 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dgcheck::exactla::FieldSpec;
use dgcheck::scenario::{parse_text, render_structured, render_text, resolve, run};
use dgcheck::strata::Window;

#[derive(Parser)]
#[command(name = "dgcheck", version, about = "Exact verifier for graded DG-algebra theorems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in a scenario file
    Run {
        /// Scenario file path
        scenario: PathBuf,
        /// Report format
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Override the scenario window, e.g. `deg:-4..0,wt:8`
        #[arg(long)]
        window: Option<String>,
        /// Override the scenario field: `q` or `fp:P`
        #[arg(long)]
        field: Option<String>,
        /// Override the resolution budget for search-based tasks
        #[arg(long)]
        max_stages: Option<usize>,
        /// Write the report to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_window_flag(s: &str) -> Result<Window, String> {
    // deg:LO..HI,wt:CAP
    let (deg_part, wt_part) = s
        .split_once(',')
        .ok_or_else(|| format!("bad window '{s}', expected deg:LO..HI,wt:CAP"))?;
    let deg = deg_part
        .strip_prefix("deg:")
        .ok_or_else(|| format!("bad window '{s}': missing 'deg:'"))?;
    let (lo, hi) = deg
        .split_once("..")
        .ok_or_else(|| format!("bad window '{s}': missing '..'"))?;
    let cap = wt_part
        .strip_prefix("wt:")
        .ok_or_else(|| format!("bad window '{s}': missing 'wt:'"))?;
    let parse = |t: &str| t.parse::<i32>().map_err(|_| format!("bad integer '{t}'"));
    Window::new(parse(lo)?, parse(hi)?, parse(cap)?).map_err(|e| e.to_string())
}

fn parse_field_flag(s: &str) -> Result<FieldSpec, String> {
    match s {
        "q" | "Q" => Ok(FieldSpec::Q),
        other => {
            let p = other
                .strip_prefix("fp:")
                .ok_or_else(|| format!("bad field '{other}', expected q or fp:P"))?;
            let p: u64 = p.parse().map_err(|_| format!("bad prime '{p}'"))?;
            FieldSpec::fp(p).map_err(|e| e.to_string())
        }
    }
}

fn run_command(cmd: Command) -> Result<i32, String> {
    let Command::Run {
        scenario,
        format,
        window,
        field,
        max_stages,
        out,
    } = cmd;
    let text = std::fs::read_to_string(&scenario)
        .map_err(|e| format!("cannot read {}: {e}", scenario.display()))?;
    let ast = parse_text(&text).map_err(|e| e.to_string())?;
    let window = window.as_deref().map(parse_window_flag).transpose()?;
    let field = field.as_deref().map(parse_field_flag).transpose()?;
    let resolved = resolve(&ast, field, window).map_err(|e| e.to_string())?;
    let report = run(&resolved, max_stages);
    let rendered = match format {
        Format::Text => render_text(&report),
        Format::Structured => render_structured(&report),
    };
    match out {
        Some(path) => std::fs::write(&path, rendered)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
