//! LP/MILP backend interface and the HiGHS implementation.

use std::path::PathBuf;
use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use crate::error::{Error, Result};
use crate::lp::LinearProgram;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lp,
    Milp,
}

#[derive(Clone, Debug)]
pub struct SolveRequest<'a> {
    pub model: &'a LinearProgram,
    pub mode: Mode,
    /// Seconds. Must be positive in MILP mode; `None` means unlimited for LPs.
    pub time_limit: Option<f64>,
    pub seed: u32,
    pub log_file: Option<PathBuf>,
}

impl<'a> SolveRequest<'a> {
    pub fn lp(model: &'a LinearProgram) -> Self {
        SolveRequest { model, mode: Mode::Lp, time_limit: None, seed: 0, log_file: None }
    }

    pub fn milp(model: &'a LinearProgram, time_limit: f64) -> Self {
        SolveRequest { model, mode: Mode::Milp, time_limit: Some(time_limit), seed: 0, log_file: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    /// Limit reached with an incumbent.
    FeasibleLimit,
    /// Limit reached before any integer solution was found.
    LimitNoSolution,
    Infeasible,
    Error,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: Status,
    /// Includes the model offset. NaN when no solution exists.
    pub objective: f64,
    /// MILP dual bound; equals `objective` for optimal LPs.
    pub dual_bound: f64,
    pub primal: Vec<f64>,
    /// Row duals, sign-normalized: d(objective)/d(rhs). A `>=` row has a
    /// nonnegative dual, a `<=` row a nonpositive one. Empty for MILPs.
    pub duals: Vec<f64>,
    pub wall_time: f64,
    pub detail: String,
}

impl SolveOutcome {
    pub fn has_solution(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::FeasibleLimit)
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, req: &SolveRequest) -> Result<SolveOutcome>;
}

/// Requested MIP gaps. Objectives are multiples of 0.1, so an absolute gap
/// below that still proves optimality.
const MIP_REL_GAP: f64 = 1e-9;
const MIP_ABS_GAP: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct HighsBackend {
    pub threads: i32,
    /// HiGHS `solver` option for LP solves. Interior point with crossover is
    /// several times faster than dual simplex on the bucket-graph LPs and
    /// still returns a basic solution.
    pub lp_solver: String,
}

impl Default for HighsBackend {
    fn default() -> Self {
        HighsBackend { threads: 1, lp_solver: "ipm".into() }
    }
}

impl Backend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, req: &SolveRequest) -> Result<SolveOutcome> {
        let lp = req.model;
        if req.mode == Mode::Milp && !req.time_limit.is_some_and(|t| t > 0.0) {
            return Err(Error::InvalidArgument("milp solve needs a positive time limit".into()));
        }
        let integer = req.mode == Mode::Milp;

        let mut pb = RowProblem::default();
        let cols: Vec<_> = (0..lp.num_cols())
            .map(|j| {
                let b = lp.col_lower[j]..=lp.col_upper[j];
                pb.add_column_with_integrality(lp.cost[j], b, integer && lp.integer[j])
            })
            .collect();
        for (i, row) in lp.rows.iter().enumerate() {
            let coefs: Vec<_> = row.iter().map(|&(j, a)| (cols[j], a)).collect();
            pb.add_row(lp.row_lower[i]..=lp.row_upper[i], &coefs);
        }

        let mut model = pb
            .try_optimise(Sense::Minimise)
            .map_err(|s| Error::Solver(format!("model load failed: {s:?}")))?;
        model.set_option("output_flag", req.log_file.is_some());
        model.set_option("log_to_console", false);
        if let Some(p) = &req.log_file {
            model.set_option("log_file", p.to_string_lossy().as_ref());
        }
        model.set_option("threads", self.threads);
        model.set_option("random_seed", req.seed as i32);
        if let Some(t) = req.time_limit {
            model.set_option("time_limit", t);
        }
        if !integer {
            model.set_option("solver", self.lp_solver.as_str());
        }
        if integer {
            model.set_option("mip_rel_gap", MIP_REL_GAP);
            model.set_option("mip_abs_gap", MIP_ABS_GAP);
        }

        let start = Instant::now();
        let solved = model
            .try_solve()
            .map_err(|s| Error::Solver(format!("run failed: {s:?}")))?;
        let wall_time = start.elapsed().as_secs_f64();

        let hs = solved.status();
        let has_primal = solved
            .primal_solution_status()
            .eq(&HighsSolutionStatus::Feasible);
        let bounded = (0..lp.num_cols()).all(|j| lp.col_lower[j].is_finite() && lp.col_upper[j].is_finite());
        let status = match hs {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => Status::Optimal,
            HighsModelStatus::Infeasible => Status::Infeasible,
            // With every column boxed, unboundedness is impossible.
            HighsModelStatus::UnboundedOrInfeasible if bounded => Status::Infeasible,
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
                if integer =>
            {
                if has_primal {
                    Status::FeasibleLimit
                } else {
                    Status::LimitNoSolution
                }
            }
            _ => Status::Error,
        };
        let detail = format!("{hs:?}");
        if req.mode == Mode::Lp && status == Status::Error {
            return Err(Error::Solver(format!("lp solve ended with {detail}")));
        }

        let have_sol = matches!(status, Status::Optimal | Status::FeasibleLimit);
        let (primal, duals, objective) = if have_sol {
            let sol = solved.get_solution();
            let primal = if lp.num_cols() == 0 { Vec::new() } else { sol.columns().to_vec() };
            // HiGHS reports d(obj)/d(rhs) for minimization already.
            let duals = if integer { Vec::new() } else { sol.dual_rows().to_vec() };
            let obj = lp.objective_at(&primal);
            (primal, duals, obj)
        } else {
            (Vec::new(), Vec::new(), f64::NAN)
        };
        let dual_bound = if integer {
            match solved.double_info_value(c"mip_dual_bound") {
                Ok(b) if b.is_finite() => b + lp.offset,
                _ if status == Status::Optimal => objective,
                _ => f64::NEG_INFINITY,
            }
        } else {
            objective
        };

        Ok(SolveOutcome { status, objective, dual_bound, primal, duals, wall_time, detail })
    }
}

/// Picks the backend named by `VRPTW_SOLVER` (default `highs`).
pub fn backend_from_env() -> Result<Box<dyn Backend>> {
    match std::env::var("VRPTW_SOLVER") {
        Err(_) => Ok(Box::new(HighsBackend::default())),
        Ok(s) if s.is_empty() || s.eq_ignore_ascii_case("highs") => Ok(Box::new(HighsBackend::default())),
        Ok(s) => Err(Error::InvalidArgument(format!("unknown solver backend '{s}' (supported: highs)"))),
    }
}
