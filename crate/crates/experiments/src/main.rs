use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use chmogp_core::selection::SelectorKind;
use chmogp_experiments::config::RunConfig;
use chmogp_experiments::report;
use chmogp_experiments::runner::{self, JobStatus};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chmogp", version, about = "Convex-hull-based multi-objective GP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) every job of a configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Exit with a failure status if any job fails.
        #[arg(long)]
        strict: bool,
        /// Suppress per-job progress lines.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Print mean ± std test AUCH × 100 at the final checkpoint.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Wilcoxon rank-sum comparison of two selectors per dataset and ratio.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        /// Two selectors, e.g. `CH-MOGP,NSGA-II`.
        #[arg(long, value_delimiter = ',', required = true)]
        selectors: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Write per-(dataset, selector) convergence curves.
    Curves {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn run(config: PathBuf, strict: bool, quiet: bool) -> Result<ExitCode> {
    let cfg = RunConfig::load(&config)?.resolve()?;
    let total = runner::jobs(&cfg).len();
    let done = AtomicUsize::new(0);
    let report = runner::run_experiment(&cfg, |o| {
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if quiet {
            return;
        }
        let j = &o.job;
        let what = format!("{} {} r{} f{}", o.dataset, j.selector, j.repeat, j.fold);
        match &o.status {
            JobStatus::Completed { seconds } => eprintln!("[{n}/{total}] {what} done in {seconds:.1}s"),
            JobStatus::Skipped => {}
            JobStatus::Failed(e) => eprintln!("[{n}/{total}] {what} FAILED: {e}"),
        }
    })?;
    eprintln!(
        "{} jobs run, {} already complete, {} failed; {} rows in {}",
        report.completed,
        report.skipped,
        report.failed.len(),
        report.rows,
        cfg.output_dir.join("results.csv").display()
    );
    let rows = runner::load_results(&cfg.output_dir)?;
    print!("{}", report::summary_table(&rows));
    if strict && !report.failed.is_empty() {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn canonical_selector(name: &str) -> Result<&'static str> {
    let kind: SelectorKind = name
        .parse()
        .with_context(|| format!("unknown selector `{name}`"))?;
    Ok(kind.name())
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run {
            config,
            strict,
            quiet,
        } => run(config, strict, quiet),
        Command::Summarize { input } => {
            let rows = runner::load_results(&input)?;
            let table = report::summary_table(&rows);
            std::fs::write(input.join("summary.csv"), &table)?;
            print!("{table}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            input,
            selectors,
            alpha,
        } => {
            if selectors.len() != 2 {
                bail!("--selectors takes exactly two names");
            }
            let a = canonical_selector(&selectors[0])?;
            let b = canonical_selector(&selectors[1])?;
            let rows = runner::load_results(&input)?;
            let comparisons = report::compare(&rows, a, b, alpha);
            if comparisons.is_empty() {
                bail!("no dataset has results for both {a} and {b}");
            }
            let file = input.join(format!(
                "compare_{}_vs_{}.csv",
                a.replace('/', "-"),
                b.replace('/', "-")
            ));
            std::fs::write(&file, report::comparison_table(&comparisons))?;
            println!("{a} vs {b} (wins-draws-losses of {a})");
            for (ratio, w, d, l) in report::tally(&comparisons) {
                println!("ratio {ratio:.4}: {w}-{d}-{l}");
            }
            eprintln!("details in {}", file.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Curves { input } => {
            let rows = runner::load_results(&input)?;
            for path in report::emit_convergence(&rows, &input)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
