//! `perceptron`: figure and table data for the adiabatic perceptron gate.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure,
//! 3 numerical failure. Failures print one line to stderr of the form
//! `error kind=<validation|io|numerical> code=<n> message="..."`.

mod commands;
mod svg;

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use perceptron_core::config::{OutputFormat, RunConfig, SweepQuantity};
use perceptron_core::numerics::StepRule;
use perceptron_core::Error;

use commands::{Body, Report};

#[derive(Parser)]
#[command(name = "perceptron", version, about = "Pulse-level simulation of the adiabatic quantum perceptron gate")]
struct Cli {
    /// TOML run configuration; defaults are used for anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides `output.path`. Standard output when neither is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; overrides `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// ZZ coupling vs coupler frequency, numeric and perturbative.
    ZzSweep,
    /// Activation curves over bias for each pulse length and input string.
    Activation,
    /// Output population for both input values vs weight, at fixed biases.
    WeightSweep,
    /// Negativity of the two-qubit output state vs bias.
    Negativity,
    /// Equivalent CNOT circuit and the gate-count table.
    Decompose,
    /// Fit of the analytic transfer formula to simulated activation curves.
    Fit,
}

impl Command {
    fn sweep(self) -> Option<SweepQuantity> {
        match self {
            Command::ZzSweep => Some(SweepQuantity::Coupler),
            Command::Activation | Command::Negativity | Command::Fit => Some(SweepQuantity::Bias),
            Command::WeightSweep => Some(SweepQuantity::Weight),
            Command::Decompose => None,
        }
    }
}

enum Failure {
    Validation(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Io(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn report(&self) {
        let (kind, msg) = match self {
            Failure::Validation(m) => ("validation", m),
            Failure::Io(m) => ("io", m),
            Failure::Numerical(m) => ("numerical", m),
        };
        eprintln!("error kind={kind} code={} message={msg:?}", self.code());
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) => Failure::Io(msg),
            Error::Config(_)
            | Error::Parameter(_)
            | Error::Dimension(_)
            | Error::Parse { .. }
            | Error::Gate(_)
            | Error::Unsupported(_)
            | Error::IllPosedFit(_)
            | Error::Subsystem(_) => Failure::Validation(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.display().to_string());
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Svg => OutputFormat::Svg,
        };
    }
    // stamp the grid actually used
    if let Some(q) = cli.command.sweep() {
        cfg.sweep = Some(cfg.sweep_for(q)?);
    }
    Ok(cfg)
}

fn render(cfg: &RunConfig, report: &Report) -> Result<String, Failure> {
    match cfg.output.format {
        OutputFormat::Svg => {
            let plot = report
                .plot
                .as_ref()
                .ok_or_else(|| Failure::Validation("this command has no SVG output; use --format csv".into()))?;
            Ok(svg::render(plot))
        }
        OutputFormat::Csv => {
            let stamp = serde_json::to_string(cfg).map_err(|e| Failure::Numerical(e.to_string()))?;
            let mut out = format!("# config: {stamp}\n");
            for n in &report.notes {
                out.push_str(&format!("# {n}\n"));
            }
            match &report.body {
                Body::Text(t) => out.push_str(t),
                Body::Csv(table) => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let io = |e: csv::Error| Failure::Io(e.to_string());
                    w.write_record(&table.header).map_err(io)?;
                    for row in &table.rows {
                        w.write_record(row).map_err(io)?;
                    }
                    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
                    out.push_str(&String::from_utf8_lossy(&bytes));
                }
            }
            Ok(out)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let rule = StepRule::default();
    let report = match cli.command {
        Command::ZzSweep => commands::zz_sweep(&cfg),
        Command::Activation => commands::activation(&cfg, &rule),
        Command::WeightSweep => commands::weight_sweep_cmd(&cfg, &rule),
        Command::Negativity => commands::negativity(&cfg, &rule),
        Command::Decompose => commands::decompose(&cfg, &rule),
        Command::Fit => commands::fit(&cfg, &rule),
    }?;
    let text = render(&cfg, &report)?;
    match &cfg.output.path {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {path}: {e}")))?;
            for line in &report.summary {
                println!("{line}");
            }
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(e.to_string()))?;
            for line in &report.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let f = Failure::Validation(e.kind().to_string());
            f.report();
            return ExitCode::from(f.code());
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code())
        }
    }
}
