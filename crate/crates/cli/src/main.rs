use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod config;
mod report;
mod suite;
mod tasks;

use config::{parse, Scenario, SchemaError};
use report::{config_hash, output_root, RunReport, Status};

#[derive(Parser)]
#[command(name = "gauge-tomo", version, about = "Gauge-independent tomography scenario runner")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Run the bundled scenarios carrying a tag (gauge, reconstruction, residual, limit or all).
    Check {
        #[arg(long)]
        tag: String,
    },
    /// List bundled scenarios and their tags.
    List {
        #[arg(long)]
        tag: Option<String>,
    },
}

enum Outcome {
    Report(RunReport),
    Schema(SchemaError),
    Io(String),
}

fn run_text(text: &str) -> Outcome {
    let cfg = match parse(text) {
        Ok(c) => c,
        Err(e) => return Outcome::Schema(e),
    };
    let value: serde_json::Value = serde_json::from_str(text).expect("parsed once already");
    let hash = config_hash(&value);
    let sc = match Scenario::build(cfg) {
        Ok(s) => s,
        Err(e) => return Outcome::Schema(e),
    };
    let sub = sc.config.output_dir.clone().unwrap_or_else(|| sc.config.name.clone());
    let dir = output_root().join(sub).join(&hash[..16]);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return Outcome::Io(format!("cannot create {}: {e}", dir.display()));
    }
    let start = Instant::now();
    let tasks: Vec<_> = sc.config.tasks.iter().enumerate().map(|(i, t)| tasks::run_task(i, t, &sc, &dir, &hash)).collect();
    let status = if tasks.iter().all(|t| t.status == Status::Pass) { Status::Pass } else { Status::Fail };
    let report = RunReport {
        name: sc.config.name.clone(),
        config_hash: hash,
        status,
        wall_time_s: start.elapsed().as_secs_f64(),
        output_dir: dir.display().to_string(),
        tasks,
    };
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    if let Err(e) = std::fs::write(dir.join("report.json"), json) {
        return Outcome::Io(format!("cannot write report: {e}"));
    }
    Outcome::Report(report)
}

fn print_report(r: &RunReport, verbose: bool) {
    println!("{} {:?} ({:.1} s) -> {}", r.name, r.status, r.wall_time_s, r.output_dir);
    for t in &r.tasks {
        println!("  {} {:?}", t.task, t.status);
        if let Some(m) = &t.message {
            println!("    {m}");
        }
        if verbose || t.status != Status::Pass {
            for c in &t.checks {
                let mark = if c.pass { "ok" } else { "FAILED" };
                println!("    {} {} {} {:e} (value {:e})", mark, c.metric, c.op, c.threshold, c.value);
            }
            for (k, v) in &t.metrics {
                println!("    {k} = {v:e}");
            }
        }
    }
}

fn run_file(path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    match run_text(&text) {
        Outcome::Report(r) => {
            print_report(&r, true);
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Outcome::Schema(e) => {
            eprintln!("schema error at {e}");
            ExitCode::from(2)
        }
        Outcome::Io(m) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn check(tag: &str) -> ExitCode {
    let Some(list) = suite::select(tag) else {
        eprintln!("unknown tag {tag:?}; expected one of {:?} or \"all\"", suite::TAGS);
        return ExitCode::from(2);
    };
    let mut failed = 0;
    for (name, text) in &list {
        match run_text(text) {
            Outcome::Report(r) => {
                print_report(&r, false);
                failed += usize::from(!r.passed());
            }
            Outcome::Schema(e) => {
                eprintln!("bundled scenario {name}: schema error at {e}");
                return ExitCode::from(2);
            }
            Outcome::Io(m) => {
                eprintln!("error: {m}");
                return ExitCode::from(2);
            }
        }
    }
    println!("{} of {} scenarios passed", list.len() - failed, list.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn list(tag: Option<&str>) -> ExitCode {
    let Some(items) = suite::select(tag.unwrap_or("all")) else {
        eprintln!("unknown tag {:?}", tag.unwrap_or_default());
        return ExitCode::from(2);
    };
    for (name, text) in items {
        println!("{name}\t{}", suite::tags_of(text).join(","));
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match &cli.command {
        Command::Run { config } => run_file(config),
        Command::Check { tag } => check(tag),
        Command::List { tag } => list(tag.as_deref()),
    }
}
