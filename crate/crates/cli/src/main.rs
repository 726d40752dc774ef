use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperdisp_cli::{commands, load_config, render, JobConfig};
use hyperdisp_core::{Error, Result};
use serde::Serialize;

/// Characteristic-root classification and dispersive decay rates for
/// constant-coefficient hyperbolic operators.
#[derive(Parser)]
#[command(name = "hyperdisp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the roots and predict decay rates.
    Analyze(JobArgs),
    /// Simulate the propagator and fit decay exponents.
    Simulate(JobArgs),
    /// Compare predicted and fitted exponents.
    Verify(JobArgs),
    /// Built-in symbols.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
    Show { name: String },
}

#[derive(Args)]
struct JobArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Exit with 2 on mismatches and 3 on abstentions.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn job(args: &JobArgs) -> Result<JobConfig> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.analysis.options.seed = seed;
    }
    fs::create_dir_all(&args.out)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = job(&args)?;
            let out = commands::analyze(&cfg)?;
            let text = render::analyze_text(&out);
            write_json(&args.out, "analyze.json", &out)?;
            fs::write(args.out.join("analyze.txt"), &text)?;
            print!("{text}");
            Ok(if args.strict && out.abstentions() > 0 { 3 } else { 0 })
        }
        Command::Simulate(args) => {
            let cfg = job(&args)?;
            let out = commands::simulate(&cfg)?;
            let mut csv = Vec::new();
            out.run.write_csv(&mut csv)?;
            fs::write(args.out.join("run.csv"), csv)?;
            write_json(&args.out, "run.json", &out)?;
            print!("{}", render::simulate_text(&out));
            Ok(0)
        }
        Command::Verify(args) => {
            let cfg = job(&args)?;
            let report = commands::verify(&cfg)?;
            let text = render::verify_text(&report);
            write_json(&args.out, "verify.json", &report)?;
            fs::write(args.out.join("verify.txt"), &text)?;
            print!("{text}");
            Ok(if args.strict { report.strict_exit_code() as u8 } else { 0 })
        }
        Command::Corpus { action, out } => {
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
            }
            match action {
                CorpusAction::List => {
                    let list = commands::corpus_list();
                    print!("{}", render::corpus_text(&list));
                    if let Some(dir) = &out {
                        write_json(dir, "corpus.json", &list)?;
                    }
                }
                CorpusAction::Show { name } => {
                    let show = commands::corpus_show(&name)?;
                    print!("{}", render::corpus_show_text(&show));
                    println!("{}", serde_json::to_string_pretty(&show.symbol)?);
                    if let Some(dir) = &out {
                        write_json(dir, &format!("{name}.json"), &show)?;
                    }
                }
            }
            Ok(0)
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HYPERDISP_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::Config {
            path: "HYPERDISP_THREADS".into(),
            message: format!("expected a positive integer, got {v:?}"),
        })?;
        if n == 0 {
            return Err(Error::Config {
                path: "HYPERDISP_THREADS".into(),
                message: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match init_threads().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
