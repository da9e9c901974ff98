//! `relaxkit`: runs scenario files against the relaxkit library.
//!
//! Exit codes: 0 on success, 2 when a scenario does not validate (including
//! missing files), 3 when a numerical check fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod scenario;
mod tasks;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use relaxkit::funclib::presets::PRESETS;

use scenario::Loaded;
use tasks::{RunOptions, TaskOutput};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid scenario: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "relaxkit",
    version,
    about = "Relaxed energies and recovery sequences from scenario files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a scenario and write the artifacts.
    Run {
        scenario: PathBuf,
        /// Output directory (overrides the scenario's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent tasks.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Seed for the probe test battery (overrides the scenario's `seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write SVG energy traces.
        #[arg(long)]
        svg: bool,
    },
    /// Check a scenario without running it.
    Validate { scenario: PathBuf },
    /// List built-in presets and those found on RELAXKIT_PRESET_PATH.
    ListPresets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run {
            scenario,
            out,
            jobs,
            seed,
            svg,
        } => run(&scenario, out, jobs, seed, svg),
        Command::Validate { scenario } => validate(&scenario),
        Command::ListPresets => list_presets(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relaxkit: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn validate(path: &Path) -> Result<(), CliError> {
    let l = scenario::load(path)?;
    println!(
        "{}: OK ({} tasks: {})",
        l.scenario.name,
        l.scenario.tasks.len(),
        l.scenario.tasks.join(", ")
    );
    for n in &l.notes {
        println!("note: {n}");
    }
    Ok(())
}

fn list_presets() -> Result<(), CliError> {
    for (name, what) in PRESETS {
        println!("{name:<20} {what}");
    }
    for m in scenario::user_presets()? {
        println!("{:<20} user preset on R^{}", m.name, m.dim);
    }
    Ok(())
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|s| s.to_str()).unwrap_or("")
    ));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn run(
    path: &Path,
    out: Option<PathBuf>,
    jobs: usize,
    seed: Option<u64>,
    svg: bool,
) -> Result<(), CliError> {
    let l = scenario::load(path)?;
    let dir = match (out, &l.scenario.output) {
        (Some(o), _) => o,
        (None, Some(o)) => l.dir.join(o),
        (None, None) => PathBuf::from("out").join(&l.scenario.name),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let opts = RunOptions {
        seed: seed.unwrap_or(l.scenario.seed),
        svg,
    };
    let results = run_tasks(&l, opts, jobs.max(1), &dir);

    // summary in task order, independent of scheduling
    let mut summary = format!("scenario = {}\nseed = {}\n", l.scenario.name, opts.seed);
    let mut first_err: Option<CliError> = None;
    for (task, res) in l.scenario.tasks.iter().zip(results) {
        match res {
            Ok(o) => {
                let status = if o.failure.is_some() { "failed" } else { "ok" };
                summary.push_str(&format!("{task}.status = {status}\n"));
                for (k, v) in &o.summary {
                    summary.push_str(&format!("{task}.{k} = {v}\n"));
                }
                if let Some(f) = o.failure {
                    eprintln!("relaxkit: {task}: {f}");
                    first_err.get_or_insert(CliError::Numerical(format!("{task}: {f}")));
                }
            }
            Err(e) => {
                summary.push_str(&format!("{task}.status = error\n"));
                eprintln!("relaxkit: {task}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    write_atomic(&dir.join("summary.kv"), summary.as_bytes())?;
    print!("{summary}");
    first_err.map_or(Ok(()), Err)
}

/// Runs the tasks on `jobs` threads; each task's files are written as soon
/// as it finishes.
fn run_tasks(
    l: &Loaded,
    opts: RunOptions,
    jobs: usize,
    dir: &Path,
) -> Vec<Result<TaskOutput, CliError>> {
    let n = l.scenario.tasks.len();
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<TaskOutput, CliError>>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n {
            break;
        }
        let res = tasks::run_task(l, &l.scenario.tasks[i], opts).and_then(|o| {
            for a in &o.artifacts {
                write_atomic(&dir.join(&a.name), &a.bytes)?;
            }
            Ok(o)
        });
        *slots[i].lock().expect("slot lock") = Some(res);
    };
    std::thread::scope(|s| {
        for _ in 1..jobs.min(n) {
            s.spawn(work);
        }
        work();
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every task ran"))
        .collect()
}
