//! `dstsim`: run, compare and sweep search experiments from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dstsim_core::metrics::CSV_HEADER;
use dstsim_core::sim::{loads_csv, trace_csv};
use dstsim_core::{run_experiment_with, Algo, RunReport, SimConfig};
use rayon::prelude::*;

#[derive(Parser, Debug)]
#[command(name = "dstsim", version, about = "Unstructured peer-to-peer search simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one algorithm for one or more seeds.
    Run(Common),
    /// Run several algorithms on identical seeds and join their metrics.
    Compare(Common),
    /// Repeat a comparison for every value of one config key.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Key to vary, e.g. `walkers`.
        #[arg(long)]
        param: String,
        /// Values as a list or inclusive ranges, e.g. `1-15` or `2,4,8`.
        #[arg(long)]
        values: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Profile {
    /// 2,000 nodes, 50 queries per node.
    Desk,
    /// 10,000 nodes, 100 queries per node.
    Full,
}

#[derive(Args, Debug)]
struct Common {
    /// Config file of `key = value` lines, with optional `[section]` headers.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Starting point before the config file and overrides are applied.
    #[arg(long, value_enum, default_value = "desk")]
    profile: Profile,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Algorithm, or a comma-separated list for compare and sweep.
    #[arg(long)]
    algo: Option<String>,
    /// Seeds as a list or inclusive ranges, e.g. `1-8` or `3,7`.
    #[arg(long)]
    seeds: Option<String>,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write a per-hop routing trace.
    #[arg(long)]
    trace: bool,
}

/// Bad input, reported with exit code 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn core_err(e: dstsim_core::Error) -> anyhow::Error {
    if e.is_config() {
        invalid(e.to_string())
    } else {
        e.into()
    }
}

fn parse_list(text: &str, what: &str) -> anyhow::Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || invalid(format!("cannot parse {what} `{part}`"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(invalid(format!("no {what} given")));
    }
    Ok(out)
}

fn parse_algos(text: &str) -> anyhow::Result<Vec<Algo>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Algo>().map_err(invalid))
        .collect()
}

impl Common {
    /// Profile, then config file, then `--set` overrides.
    fn base_config(&self) -> anyhow::Result<SimConfig> {
        let mut cfg = match self.profile {
            Profile::Desk => SimConfig::desk(),
            Profile::Full => SimConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text).map_err(core_err)?;
        }
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| invalid(format!("override `{o}` is not KEY=VALUE")))?;
            cfg.set(k.trim(), v).map_err(core_err)?;
        }
        Ok(cfg)
    }

    fn seeds(&self, cfg: &SimConfig) -> anyhow::Result<Vec<u64>> {
        match &self.seeds {
            Some(s) => parse_list(s, "seed"),
            None => Ok(vec![cfg.seed]),
        }
    }

    fn algos(&self, cfg: &SimConfig, default_all: bool) -> anyhow::Result<Vec<Algo>> {
        match &self.algo {
            Some(a) => parse_algos(a),
            None if default_all => Ok(Algo::ALL.to_vec()),
            None => Ok(vec![cfg.algo]),
        }
    }
}

/// One planned run and where its files go.
struct Job {
    cfg: SimConfig,
    dir: PathBuf,
    label: Vec<String>,
}

fn finish_plan(jobs: &[Job]) -> anyhow::Result<()> {
    for j in jobs {
        j.cfg.validate().map_err(core_err)?;
    }
    Ok(())
}

fn write_run(dir: &Path, report: &RunReport, trace: bool) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    report.series.emit_csv(dir.join("metrics.csv"))?;
    fs::write(dir.join("manifest"), report.manifest())?;
    if report.config.algo == Algo::Dst {
        fs::write(dir.join("loads.csv"), loads_csv(&report.load_snapshots))?;
    }
    if trace {
        fs::write(dir.join("trace.csv"), trace_csv(&report.trace))?;
    }
    Ok(())
}

fn execute(jobs: &[Job], threads: usize, trace: bool) -> anyhow::Result<Vec<RunReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .context("starting worker pool")?;
    pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let report = run_experiment_with(&j.cfg, trace).map_err(core_err)?;
                write_run(&j.dir, &report, trace)?;
                eprintln!(
                    "{}: {:.4} success",
                    j.label.join(" "),
                    report.series.total().success_rate
                );
                Ok(report)
            })
            .collect()
    })
}

/// Metrics of every run joined into one file, keyed by the label columns and interval.
fn joined_csv(path: &Path, key_names: &[&str], jobs: &[Job], reports: &[RunReport]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    let header: Vec<&str> = key_names
        .iter()
        .copied()
        .chain(["interval", "topology_sha256"])
        .chain(CSV_HEADER)
        .collect();
    w.write_record(&header)?;
    for (job, report) in jobs.iter().zip(reports) {
        let body = report.series.to_csv_string();
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        for (i, row) in rd.records().enumerate() {
            let row = row?;
            let mut rec: Vec<String> = job.label.clone();
            rec.push(i.to_string());
            rec.push(report.topology_hash.clone());
            rec.extend(row.iter().map(str::to_string));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs that differ only in algorithm must start from the same network.
fn check_topologies(jobs: &[Job], reports: &[RunReport]) -> anyhow::Result<()> {
    let key = |j: &Job| {
        let mut l = j.label.clone();
        l.remove(l.len() - 2);
        l
    };
    for (a, ra) in jobs.iter().zip(reports) {
        for (b, rb) in jobs.iter().zip(reports) {
            if key(a) == key(b) && ra.topology_hash != rb.topology_hash {
                bail!(
                    "{} and {} built different networks",
                    a.label.join(" "),
                    b.label.join(" ")
                );
            }
        }
    }
    Ok(())
}

fn cmd_run(c: &Common) -> anyhow::Result<()> {
    let base = c.base_config()?;
    let algos = c.algos(&base, false)?;
    if algos.len() != 1 {
        return Err(invalid("run takes a single algorithm; use compare for several"));
    }
    let seeds = c.seeds(&base)?;
    let jobs: Vec<Job> = seeds
        .iter()
        .map(|&seed| {
            let mut cfg = base.clone();
            cfg.algo = algos[0];
            cfg.seed = seed;
            let dir = if seeds.len() == 1 {
                c.out.clone()
            } else {
                c.out.join(format!("seed-{seed}"))
            };
            Job {
                cfg,
                dir,
                label: vec![algos[0].as_str().into(), seed.to_string()],
            }
        })
        .collect();
    finish_plan(&jobs)?;
    execute(&jobs, c.jobs, c.trace)?;
    Ok(())
}

fn compare_jobs(c: &Common, base: &SimConfig, root: &Path, prefix: &[String]) -> anyhow::Result<Vec<Job>> {
    let algos = c.algos(base, true)?;
    if algos.len() < 2 {
        return Err(invalid("compare needs at least two algorithms"));
    }
    let seeds = c.seeds(base)?;
    let mut jobs = Vec::new();
    for &algo in &algos {
        for &seed in &seeds {
            let mut cfg = base.clone();
            cfg.algo = algo;
            cfg.seed = seed;
            let mut label = prefix.to_vec();
            label.push(algo.as_str().into());
            label.push(seed.to_string());
            jobs.push(Job {
                cfg,
                dir: root.join(algo.as_str()).join(format!("seed-{seed}")),
                label,
            });
        }
    }
    Ok(jobs)
}

fn cmd_compare(c: &Common) -> anyhow::Result<()> {
    let base = c.base_config()?;
    let jobs = compare_jobs(c, &base, &c.out, &[])?;
    finish_plan(&jobs)?;
    let reports = execute(&jobs, c.jobs, c.trace)?;
    check_topologies(&jobs, &reports)?;
    joined_csv(&c.out.join("compare.csv"), &["algo", "seed"], &jobs, &reports)
}

fn cmd_sweep(c: &Common, param: &str, values: &str) -> anyhow::Result<()> {
    let base = c.base_config()?;
    if !SimConfig::KEYS.contains(&param) {
        return Err(invalid(format!("unknown sweep key `{param}`")));
    }
    let mut jobs = Vec::new();
    for v in parse_list(values, "sweep value")? {
        let mut cfg = base.clone();
        cfg.set(param, &v.to_string()).map_err(core_err)?;
        let root = c.out.join(format!("{param}-{v}"));
        jobs.extend(compare_jobs(c, &cfg, &root, &[v.to_string()])?);
    }
    finish_plan(&jobs)?;
    let reports = execute(&jobs, c.jobs, c.trace)?;
    check_topologies(&jobs, &reports)?;
    joined_csv(&c.out.join("sweep.csv"), &[param, "algo", "seed"], &jobs, &reports)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Compare(c) => cmd_compare(c),
        Command::Sweep { common, param, values } => cmd_sweep(common, param, values),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Invalid>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
