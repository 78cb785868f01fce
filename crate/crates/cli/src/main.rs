//! `ladisc`: solve Solomon VRPTW instances with LA-Discretization or the
//! two-index baseline.
//!
//! Exit codes: 0 solved (optimal or incumbent at the limit), 2 infeasible,
//! 1 any other error including usage errors.

mod row;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use ladisc_core::discovery::{self, Config, Discovery, MilpResult, Session};
use ladisc_core::la_arcs::{build_neighborhoods, dump_line};
use ladisc_core::model::build_baseline;
use ladisc_core::solver::{backend_from_env, Backend, Status};
use ladisc_core::{compute_frontiers, Error, Instance, LaArcs};

use row::{set_ten_x, write_csv, Approach, RunRow};

#[derive(Parser)]
#[command(name = "ladisc", version, about = "Exact VRPTW via LA-arcs and bucket graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Sweep a directory of instances over customer counts and methods.
    Bench(BenchArgs),
    /// Print the LA-arc frontiers of an instance.
    Frontier(FrontierArgs),
}

#[derive(Args, Clone)]
struct AlgoArgs {
    /// MILP wall-clock limit in seconds.
    #[arg(long, default_value_t = 1000.0)]
    time_limit: f64,
    /// LA-neighborhood size n^s.
    #[arg(long, default_value_t = 6)]
    ns: usize,
    /// Initial capacity bucket width.
    #[arg(long, default_value_t = 5)]
    ds: i64,
    /// Initial time bucket width.
    #[arg(long, default_value_t = 50)]
    ts: i64,
    /// Stale iterations before neighborhoods are reset.
    #[arg(long, default_value_t = 9)]
    zeta: usize,
    #[arg(long, default_value_t = 10)]
    iter_max: usize,
    #[arg(long, default_value_t = 1.0)]
    min_inc: f64,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u32,
    /// Stop after the LP bound; skip the MILP.
    #[arg(long)]
    lp_only: bool,
}

impl AlgoArgs {
    fn config(&self) -> Result<Config> {
        if !(self.time_limit > 0.0) {
            bail!("--time-limit must be positive");
        }
        if self.epsilon < 0.0 {
            bail!("--epsilon must be nonnegative");
        }
        Ok(Config {
            ns: self.ns,
            ds: self.ds,
            ts: self.ts,
            zeta: self.zeta,
            min_inc: self.min_inc,
            iter_max: self.iter_max,
            eps: self.epsilon,
            milp_time_limit: self.time_limit,
            solve_milp: !self.lp_only,
            seed: self.seed,
            ..Config::default()
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Keep the first N customers (default: all).
    #[arg(long)]
    customers: Option<usize>,
    #[arg(long, value_enum, default_value = "la")]
    method: Approach,
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
    /// Write the frontier dump to this file (la only).
    #[arg(long)]
    dump_frontiers: Option<PathBuf>,
    /// Write the final MILP in free MPS format.
    #[arg(long)]
    export_mps: Option<PathBuf>,
    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    /// Customer counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "25")]
    sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "la,baseline")]
    methods: Vec<Approach>,
    /// Only files whose name starts with this prefix.
    #[arg(long)]
    prefix: Option<String>,
    /// CSV destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    algo: AlgoArgs,
}

#[derive(Args)]
struct FrontierArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    customers: Option<usize>,
    #[arg(long, default_value_t = 6)]
    ns: usize,
    /// Destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(path: &Path, customers: Option<usize>) -> Result<(Instance, String)> {
    let inst = Instance::from_file(path).with_context(|| format!("reading {}", path.display()))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_lowercase())
        .unwrap_or_else(|| inst.name.clone());
    let inst = match customers {
        Some(0) => bail!("--customers must be at least 1"),
        Some(n) => inst.truncate(n)?,
        None => inst,
    };
    let id = format!("{stem}-{}", inst.num_customers());
    Ok((inst, id))
}

/// Rejects any incumbent whose routes fail the independent route check.
fn check_routes(inst: &Instance, m: &MilpResult) -> Result<()> {
    let mut total = 0.0;
    for r in &m.routes {
        let chk = inst.route_check(r)?;
        if !chk.feasible {
            bail!("decoded route {r:?} is infeasible: {}", chk.reason.unwrap_or_default());
        }
        total += chk.cost.as_f64();
    }
    if m.status == Status::Optimal || m.status == Status::FeasibleLimit {
        if (total - m.objective).abs() > 1e-4 {
            bail!("route cost {total:.1} differs from objective {:.1}", m.objective);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    row: RunRow,
    routes: Vec<Vec<usize>>,
    /// Routes in file customer ids.
    routes_file_ids: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discovery: Option<DiscoverySummary>,
}

#[derive(Serialize)]
struct DiscoverySummary {
    iterations: usize,
    neighborhood_sizes: Vec<usize>,
    capacity_buckets: usize,
    time_buckets: usize,
    hit_iteration_cap: bool,
    log: Vec<discovery::IterationRecord>,
}

fn milp_fields(row: &mut RunRow, m: &Option<MilpResult>) {
    if let Some(m) = m {
        row.status = Some(m.status);
        row.milp_time = Some(m.time);
        if m.status == Status::Optimal || m.status == Status::FeasibleLimit {
            row.milp_obj = Some(m.objective);
        }
        if m.dual_bound.is_finite() {
            row.mip_dual_bound = Some(m.dual_bound);
        }
    }
}

struct Outcome {
    row: RunRow,
    milp: Option<MilpResult>,
    discovery: Option<Discovery>,
}

fn run_method(
    inst: &Instance,
    id: &str,
    method: Approach,
    cfg: &Config,
    backend: &dyn Backend,
    arcs: Option<&LaArcs>,
) -> Result<Outcome> {
    let mut row = RunRow {
        file: id.to_string(),
        approach: method,
        lp_obj: f64::NAN,
        mip_dual_bound: None,
        milp_obj: None,
        milp_time: None,
        total_lp_time: 0.0,
        ten_x: None,
        status: None,
    };
    match method {
        Approach::Baseline => {
            let b = discovery::run_baseline(inst, backend, cfg)?;
            row.lp_obj = b.lp_obj;
            row.total_lp_time = b.lp_time;
            milp_fields(&mut row, &b.milp);
            if let Some(m) = &b.milp {
                check_routes(inst, m)?;
            }
            Ok(Outcome { row, milp: b.milp, discovery: None })
        }
        Approach::LaDisc => {
            let owned;
            let arcs = match arcs {
                Some(a) => a,
                None => {
                    owned = LaArcs::new(inst, cfg.ns);
                    &owned
                }
            };
            let d = discovery::run_with_arcs(inst, arcs, backend, cfg)?;
            row.lp_obj = d.lp_obj;
            row.total_lp_time = d.total_lp_time;
            milp_fields(&mut row, &d.milp);
            if let Some(m) = &d.milp {
                check_routes(inst, m)?;
            }
            let milp = d.milp.clone();
            Ok(Outcome { row, milp, discovery: Some(d) })
        }
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_solve(a: SolveArgs) -> Result<ExitCode> {
    let cfg = a.algo.config()?;
    let backend = backend_from_env()?;
    let (inst, id) = load(&a.instance, a.customers)?;

    let arcs = if a.method == Approach::LaDisc {
        let neigh = build_neighborhoods(&inst, cfg.ns);
        if let Some(p) = &a.dump_frontiers {
            let fr = compute_frontiers(&inst, &neigh);
            let mut w = open_out(&Some(p.clone()))?;
            for (key, rs) in fr.sorted() {
                for r in rs {
                    writeln!(w, "{}", dump_line(key, r))?;
                }
            }
            w.flush()?;
            Some(LaArcs::from_frontiers(&inst, neigh, &fr))
        } else {
            Some(LaArcs::with_neighborhoods(&inst, neigh))
        }
    } else {
        if a.dump_frontiers.is_some() {
            bail!("--dump-frontiers needs --method la");
        }
        None
    };

    let out = run_method(&inst, &id, a.method, &cfg, backend.as_ref(), arcs.as_ref())?;

    if let Some(p) = &a.export_mps {
        let model = match (&out.discovery, &arcs) {
            (Some(d), Some(arcs)) => {
                let s = Session { inst: &inst, arcs, backend: backend.as_ref(), cfg: &cfg };
                s.build_bar(&d.param, true)?
            }
            _ => build_baseline(&inst, true)?,
        };
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        model.lp.write_mps(&id, BufWriter::new(f))?;
    }

    let routes = out.milp.as_ref().map(|m| m.routes.clone()).unwrap_or_default();
    let status = out.row.status;
    let mut w = io::stdout().lock();
    match a.out {
        OutFormat::Csv => write_csv(std::slice::from_ref(&out.row), &mut w)?,
        OutFormat::Json => {
            let routes_file_ids = routes
                .iter()
                .map(|r| r[1..r.len() - 1].iter().map(|&u| inst.file_id(u)).collect())
                .collect();
            let discovery = out.discovery.map(|d| DiscoverySummary {
                iterations: d.log.len(),
                neighborhood_sizes: inst.customers().map(|u| d.param.sizes[u]).collect(),
                capacity_buckets: d.param.cap.total_buckets(&inst),
                time_buckets: d.param.time.total_buckets(&inst),
                hit_iteration_cap: d.hit_cap,
                log: d.log,
            });
            let rep = SolveReport { row: out.row, routes, routes_file_ids, discovery };
            serde_json::to_writer_pretty(&mut w, &rep)?;
            writeln!(w)?;
        }
    }
    Ok(match status {
        Some(Status::Infeasible) => ExitCode::from(2),
        Some(Status::Optimal | Status::FeasibleLimit) | None => ExitCode::SUCCESS,
        Some(s) => {
            eprintln!("error: MILP ended with status {s:?}");
            ExitCode::from(1)
        }
    })
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let cfg = a.algo.config()?;
    if a.sizes.iter().any(|&n| n == 0) {
        bail!("--sizes entries must be at least 1");
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&a.dir)
        .with_context(|| format!("listing {}", a.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("txt")))
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy().to_lowercase();
            a.prefix.as_ref().map_or(true, |pre| name.starts_with(&pre.to_lowercase()))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no instance files in {}", a.dir.display());
    }
    let mut methods = a.methods.clone();
    methods.sort();
    methods.dedup();

    let mut jobs: Vec<(PathBuf, usize, Approach)> = Vec::new();
    for f in &files {
        for &n in &a.sizes {
            jobs.extend(methods.iter().map(|&m| (f.clone(), n, m)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs.max(1)).build()?;
    let results: Vec<Result<RunRow>> = pool.install(|| {
        jobs.par_iter()
            .map(|(f, n, m)| {
                let backend = backend_from_env()?;
                let (inst, id) = load(f, Some(*n))?;
                log::info!("{id} {}", m.label());
                Ok(run_method(&inst, &id, *m, &cfg, backend.as_ref(), None)?.row)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|x, y| (&x.file, x.approach).cmp(&(&y.file, y.approach)));
    set_ten_x(&mut rows);
    let mut w = open_out(&a.out)?;
    write_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_frontier(a: FrontierArgs) -> Result<ExitCode> {
    let (inst, _) = load(&a.instance, a.customers)?;
    let neigh = build_neighborhoods(&inst, a.ns);
    let fr = compute_frontiers(&inst, &neigh);
    let mut w = open_out(&a.out)?;
    writeln!(w, "u_p | {{N_p}} | v_p | seq | c_r | phi | phihat")?;
    for (key, rs) in fr.sorted() {
        for r in rs {
            writeln!(w, "{}", dump_line(key, r))?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Frontier(a) => cmd_frontier(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Infeasible) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
