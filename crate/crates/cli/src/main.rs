use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use silab::emit::{self, Format};
use silab::{run, suite, Document, ExperimentConfig, HarnessError, Overrides};

#[derive(Parser)]
#[command(name = "silab", version, about = "Seeded verification jobs for shifted M-ideal machinery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one registry job.
    Run {
        lemma: String,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        s: Option<u32>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "N", alias = "n")]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every job with the named suite's parameters.
    Suite {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-render a saved report.
    Emit {
        report: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registry ids with their anchors.
    List,
}

fn deliver(text: &str, out: Option<&PathBuf>) -> Result<(), HarnessError> {
    match out {
        Some(path) => emit::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Run {
            lemma,
            p,
            d,
            s,
            k,
            n,
            trials,
            seed,
            budget,
            out,
        } => {
            let overrides = Overrides {
                p,
                d,
                s,
                k,
                n,
                trials,
                seed,
                budget,
            };
            let cfg = ExperimentConfig::resolve(&lemma, &overrides, out.clone())?;
            let doc = Document::Lemma(run(&cfg)?);
            deliver(&doc.to_json(), out.as_ref())?;
            Ok(doc.outcome().exit_code())
        }
        Command::Suite { name, seed, out } => {
            let doc = Document::Suite(suite::run_suite(&name, seed)?);
            deliver(&doc.to_json(), out.as_ref())?;
            Ok(doc.outcome().exit_code())
        }
        Command::Emit { report, format, out } => {
            let format: Format = format.parse()?;
            let doc = emit::read_document(&report)?;
            deliver(&emit::render(&doc, format), out.as_ref())?;
            Ok(0)
        }
        Command::List => {
            for e in silab::registry::entries() {
                println!("{:<16} {}", e.id, e.anchor);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("silab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
