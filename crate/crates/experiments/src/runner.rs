//! Runs every (dataset, selector, repeat, fold) job of a configuration.
//!
//! Output directory layout:
//!
//! ```text
//! config.toml                         resolved configuration
//! jobs/<dataset>/<selector>/rRR-fF.csv  rows of one finished job
//! jobs/<dataset>/<selector>/rRR-fF.time wall-clock seconds of that job
//! jobs/<dataset>/<selector>/rRR-fF.err  error of a failed job
//! results.csv                         all rows in canonical job order
//! timings.csv                         wall-clock seconds per job
//! ```
//!
//! A job's CSV file is written to a temporary name and renamed into place,
//! so its presence marks the job complete and a rerun skips it.

use std::fs;
use std::hash::Hasher;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use chmogp_core::data::{load_dataset, stratified_kfold, Dataset, FoldPlan, SchemaSpec};
use chmogp_core::engine::{self, EngineConfig};
use chmogp_core::selection::SelectorKind;
use fnv::FnvHasher;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::ResolvedConfig;
use crate::results::{self, ResultRow};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} was produced by a different configuration; use a fresh output directory")]
    ConfigMismatch { path: PathBuf },
    #[error("cannot read results in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Job {
    pub dataset: usize,
    pub selector: SelectorKind,
    pub repeat: usize,
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobStatus {
    Completed { seconds: f64 },
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub job: Job,
    pub dataset: String,
    pub status: JobStatus,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub completed: usize,
    pub skipped: usize,
    pub failed: Vec<JobOutcome>,
    pub rows: usize,
    /// Longest wall time of a job computed in this invocation.
    pub max_job_seconds: f64,
}

fn hash_parts(parts: &[&[u8]]) -> u64 {
    let mut h = FnvHasher::default();
    for p in parts {
        h.write(&(p.len() as u64).to_le_bytes());
        h.write(p);
    }
    h.finish()
}

/// Engine seed of one job.
pub fn job_seed(base: u64, dataset: &str, selector: SelectorKind, repeat: usize, fold: usize) -> u64 {
    hash_parts(&[
        &base.to_le_bytes(),
        dataset.as_bytes(),
        selector.name().as_bytes(),
        &(repeat as u64).to_le_bytes(),
        &(fold as u64).to_le_bytes(),
    ])
}

/// Seed of a dataset's fold plan, shared by every selector so all of them
/// see the same splits.
pub fn fold_seed(base: u64, dataset: &str) -> u64 {
    hash_parts(&[&base.to_le_bytes(), dataset.as_bytes(), b"folds"])
}

/// Jobs in canonical order: dataset, selector, repeat, fold.
pub fn jobs(cfg: &ResolvedConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for dataset in 0..cfg.datasets.len() {
        for &selector in &cfg.selectors {
            for repeat in 0..cfg.repeats {
                for fold in 0..cfg.folds {
                    out.push(Job {
                        dataset,
                        selector,
                        repeat,
                        fold,
                    });
                }
            }
        }
    }
    out
}

fn job_stem(cfg: &ResolvedConfig, job: &Job) -> PathBuf {
    cfg.output_dir
        .join("jobs")
        .join(&cfg.datasets[job.dataset].name)
        .join(job.selector.file_stem())
        .join(format!("r{:02}-f{}", job.repeat, job.fold))
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `contents` under a temporary name, then renames it into place.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    let tmp = with_ext(path, "tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(contents).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn check_or_write_echo(cfg: &ResolvedConfig) -> Result<(), RunError> {
    let path = cfg.output_dir.join("config.toml");
    let echo = cfg.to_toml();
    match fs::read_to_string(&path) {
        Ok(existing) if existing == echo => Ok(()),
        Ok(_) => Err(RunError::ConfigMismatch { path }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => write_atomic(&path, echo.as_bytes()),
        Err(e) => Err(io_err(&path)(e)),
    }
}

struct Prepared {
    dataset: Dataset,
    plan: FoldPlan,
}

fn prepare(cfg: &ResolvedConfig, index: usize) -> Result<Prepared, String> {
    let d = &cfg.datasets[index];
    let spec = SchemaSpec::load(&d.schema).map_err(|e| e.to_string())?;
    let dataset = load_dataset(&d.path, &spec).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(fold_seed(cfg.base_seed, &d.name));
    let plan = stratified_kfold(dataset.labels(), cfg.folds, cfg.repeats, &mut rng)
        .map_err(|e| e.to_string())?;
    Ok(Prepared { dataset, plan })
}

/// Runs one job and returns its rows.
fn execute(cfg: &ResolvedConfig, job: &Job, prep: &Prepared) -> Result<Vec<ResultRow>, String> {
    let d = &cfg.datasets[job.dataset];
    let fold = prep.plan.fold(job.repeat, job.fold);
    let train = prep.dataset.subset(&fold.train);
    let test = prep.dataset.subset(&fold.test);
    let engine_cfg = EngineConfig {
        population_size: cfg.population_size,
        max_evaluations: d.max_evaluations,
        selector: job.selector,
        rates: cfg.rates,
        tournament_size: cfg.tournament_size,
        seed: job_seed(cfg.base_seed, &d.name, job.selector, job.repeat, job.fold),
        checkpoint_ratios: cfg.checkpoint_ratios.clone(),
    };
    let outcome = engine::run(&engine_cfg, &prep.dataset.schema.attributes, &train, &test)
        .map_err(|e| e.to_string())?;
    Ok(outcome
        .log
        .records
        .iter()
        .map(|c| ResultRow::from_checkpoint(&d.name, job.selector.name(), job.repeat, job.fold, c))
        .collect())
}

fn run_job(
    cfg: &ResolvedConfig,
    job: &Job,
    prep: Option<&Result<Arc<Prepared>, String>>,
) -> Result<JobStatus, RunError> {
    let stem = job_stem(cfg, job);
    let csv_path = with_ext(&stem, "csv");
    if csv_path.exists() {
        return Ok(JobStatus::Skipped);
    }
    let err_path = with_ext(&stem, "err");
    let started = Instant::now();
    let rows = match prep.expect("datasets with pending jobs are prepared") {
        Ok(p) => execute(cfg, job, p),
        Err(e) => Err(e.clone()),
    };
    match rows {
        Ok(rows) => {
            let seconds = started.elapsed().as_secs_f64();
            write_atomic(&with_ext(&stem, "time"), format!("{seconds}\n").as_bytes())?;
            write_atomic(&csv_path, results::rows_to_string(&rows).as_bytes())?;
            if err_path.exists() {
                fs::remove_file(&err_path).map_err(io_err(&err_path))?;
            }
            Ok(JobStatus::Completed { seconds })
        }
        Err(message) => {
            write_atomic(&err_path, format!("{message}\n").as_bytes())?;
            Ok(JobStatus::Failed(message))
        }
    }
}

/// Executes all jobs not already on disk, then rebuilds `results.csv` and
/// `timings.csv`. `progress` is called once per job from worker threads.
pub fn run_experiment<F>(cfg: &ResolvedConfig, progress: F) -> Result<RunReport, RunError>
where
    F: Fn(&JobOutcome) + Sync,
{
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    check_or_write_echo(cfg)?;
    let all = jobs(cfg);
    for job in &all {
        let dir = job_stem(cfg, job);
        let dir = dir.parent().expect("job path has a parent");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()?;
    let outcomes: Vec<Result<JobOutcome, RunError>> = pool.install(|| {
        // Datasets are only loaded if some job of theirs still has to run.
        let prepared: Vec<Option<Result<Arc<Prepared>, String>>> = (0..cfg.datasets.len())
            .into_par_iter()
            .map(|i| {
                let pending = all
                    .iter()
                    .any(|j| j.dataset == i && !with_ext(&job_stem(cfg, j), "csv").exists());
                pending.then(|| prepare(cfg, i).map(Arc::new))
            })
            .collect();
        all.par_iter()
            .map(|job| {
                let status = run_job(cfg, job, prepared[job.dataset].as_ref())?;
                let outcome = JobOutcome {
                    job: *job,
                    dataset: cfg.datasets[job.dataset].name.clone(),
                    status,
                };
                progress(&outcome);
                Ok(outcome)
            })
            .collect()
    });

    let mut report = RunReport::default();
    for o in outcomes {
        let o = o?;
        match &o.status {
            JobStatus::Completed { seconds } => {
                report.completed += 1;
                report.max_job_seconds = report.max_job_seconds.max(*seconds);
            }
            JobStatus::Skipped => report.skipped += 1,
            JobStatus::Failed(_) => report.failed.push(o.clone()),
        }
    }
    report.rows = assemble(cfg, &all)?;
    Ok(report)
}

/// Concatenates finished job files into `results.csv` and `timings.csv`.
/// Returns the number of result rows.
fn assemble(cfg: &ResolvedConfig, all: &[Job]) -> Result<usize, RunError> {
    let mut rows = Vec::new();
    let mut timings = String::from("dataset,selector,repeat,fold,seconds\n");
    for job in all {
        let stem = job_stem(cfg, job);
        let csv_path = with_ext(&stem, "csv");
        if !csv_path.exists() {
            continue;
        }
        let job_rows = results::read_rows_file(&csv_path).map_err(|source| RunError::Csv {
            path: csv_path.clone(),
            source,
        })?;
        rows.extend(job_rows);
        let time_path = with_ext(&stem, "time");
        if let Ok(t) = fs::read_to_string(&time_path) {
            timings.push_str(&format!(
                "{},{},{},{},{}\n",
                cfg.datasets[job.dataset].name,
                job.selector.name(),
                job.repeat,
                job.fold,
                t.trim()
            ));
        }
    }
    let results_path = cfg.output_dir.join("results.csv");
    write_atomic(&results_path, results::rows_to_string(&rows).as_bytes())?;
    write_atomic(&cfg.output_dir.join("timings.csv"), timings.as_bytes())?;
    Ok(rows.len())
}

/// Reads the assembled `results.csv` of an output directory.
pub fn load_results(dir: &Path) -> Result<Vec<ResultRow>, RunError> {
    let path = dir.join("results.csv");
    results::read_rows_file(&path).map_err(|source| RunError::Csv { path, source })
}
