//! LA-Discretization: grow buckets from LP flows, shrink them and the LA
//! neighborhoods from LP duals, then solve the exact model.

use std::time::Instant;

use serde::Serialize;

use crate::buckets::{
    expand_from_flows, init_thresholds, merge_equal_dual_buckets, FlowGraph, Resource, Thresholds,
};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::la_arcs::LaArcs;
use crate::model::{build_baseline, build_psi, BuiltModel, PsiOptions};
use crate::solver::{Backend, SolveOutcome, SolveRequest, Status};

/// Per-customer `|N_u|` and both threshold sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Parameterization {
    pub sizes: Vec<usize>,
    pub cap: Thresholds,
    pub time: Thresholds,
}

impl Parameterization {
    /// Full neighborhoods with uniform buckets.
    pub fn initial(inst: &Instance, arcs: &LaArcs, ds: i64, ts: i64) -> Result<Self> {
        let (cap, time) = init_thresholds(inst, ds, ts)?;
        Ok(Parameterization { sizes: full_sizes(arcs), cap, time })
    }

    pub fn total_la(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self, inst: &Instance, arcs: &LaArcs) -> Result<()> {
        self.cap.validate(inst)?;
        self.time.validate(inst)?;
        if let Some(u) = inst.customers().find(|&u| self.sizes[u] > arcs.max_size(u)) {
            return Err(Error::Model(format!("|N_{u}| = {} exceeds {}", self.sizes[u], arcs.max_size(u))));
        }
        Ok(())
    }
}

fn full_sizes(arcs: &LaArcs) -> Vec<usize> {
    (0..arcs.neighborhoods.len()).map(|u| arcs.max_size(u)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParamDiff {
    /// `(resource tag, u, threshold)`
    pub added: Vec<(&'static str, usize, i64)>,
    pub removed: Vec<(&'static str, usize, i64)>,
    /// `(u, old, new)`
    pub resized: Vec<(usize, usize, usize)>,
}

impl ParamDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.resized.is_empty()
    }
}

pub fn parameterization_diff(a: &Parameterization, b: &Parameterization) -> ParamDiff {
    let mut d = ParamDiff::default();
    for (ta, tb) in [(&a.cap, &b.cap), (&a.time, &b.time)] {
        let tag = ta.resource.tag();
        for (u, (sa, sb)) in ta.sets.iter().zip(&tb.sets).enumerate() {
            d.added.extend(sb.difference(sa).map(|&w| (tag, u, w)));
            d.removed.extend(sa.difference(sb).map(|&w| (tag, u, w)));
        }
    }
    for (u, (&x, &y)) in a.sizes.iter().zip(&b.sizes).enumerate() {
        if x != y {
            d.resized.push((u, x, y));
        }
    }
    d
}

/// New `|N_u|`: the largest `k` with an LA dual above `tol` in magnitude,
/// 0 when there is none.
pub fn la_contract(model: &BuiltModel, duals: &[f64], tol: f64) -> Result<Vec<usize>> {
    if duals.len() != model.lp.num_rows() {
        return Err(Error::Model(format!(
            "{} duals for {} rows",
            duals.len(),
            model.lp.num_rows()
        )));
    }
    Ok(model.active_la_sizes(duals, tol))
}

#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub ns: usize,
    pub ds: i64,
    /// Time bucket width in time units.
    pub ts: i64,
    pub zeta: usize,
    pub min_inc: f64,
    pub iter_max: usize,
    pub eps: f64,
    pub milp_time_limit: f64,
    /// Skip the final MILP (LP-only runs).
    pub solve_milp: bool,
    pub seed: u32,
    pub la_dual_tol: f64,
    pub merge_tol: f64,
    pub flow_tol: f64,
    pub hard_cap: usize,
    /// Re-solve Ψ* right after each contraction and record its objective.
    /// Diagnostic only; the extra solves are not counted in LP time.
    pub verify_contraction: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            ns: 6,
            ds: 5,
            ts: 50,
            zeta: 9,
            min_inc: 1.0,
            iter_max: 10,
            eps: 1e-5,
            milp_time_limit: 1000.0,
            solve_milp: true,
            seed: 0,
            la_dual_tol: 1e-6,
            merge_tol: 1e-7,
            flow_tol: 1e-6,
            hard_cap: 500,
            verify_contraction: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lp_objective: f64,
    /// Counter value when the LP was solved.
    pub iter_since_reset: usize,
    pub reset: bool,
    pub num_vars: usize,
    pub num_rows: usize,
    pub cap_buckets: usize,
    pub time_buckets: usize,
    pub total_la: usize,
    pub contracted: bool,
    pub merged_cap: usize,
    pub merged_time: usize,
    pub added_cap: usize,
    pub added_time: usize,
    pub lp_time: f64,
    /// Ψ* objective after this iteration's contraction, when verified.
    pub contracted_objective: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MilpResult {
    pub status: Status,
    pub objective: f64,
    pub dual_bound: f64,
    pub time: f64,
    pub routes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Discovery {
    pub param: Parameterization,
    pub log: Vec<IterationRecord>,
    /// LP relaxation of the final exact model.
    pub lp_obj: f64,
    pub total_lp_time: f64,
    pub milp: Option<MilpResult>,
    /// Set when the loop stopped on the hard cap.
    pub hit_cap: bool,
    /// Ψ* objective before and after the final contraction, when verified.
    pub final_contraction: Option<(f64, f64)>,
}

fn solve_lp(backend: &dyn Backend, model: &BuiltModel, seed: u32) -> Result<SolveOutcome> {
    let mut req = SolveRequest::lp(&model.lp);
    req.seed = seed;
    let out = backend.solve(&req)?;
    match out.status {
        Status::Optimal => Ok(out),
        Status::Infeasible => Err(Error::Infeasible),
        // LP limits and numerical failures are fatal here
        s => Err(Error::Solver(format!("LP ended with {s:?} ({})", out.detail))),
    }
}

/// Solves a MILP and decodes routes when an incumbent exists.
pub fn solve_milp(
    backend: &dyn Backend,
    inst: &Instance,
    model: &BuiltModel,
    time_limit: f64,
    seed: u32,
) -> Result<MilpResult> {
    let mut req = SolveRequest::milp(&model.lp, time_limit);
    req.seed = seed;
    let out = backend.solve(&req)?;
    let routes = if out.has_solution() {
        model.decode_routes(inst, &out.primal, 1e-6)?
    } else {
        Vec::new()
    };
    Ok(MilpResult {
        status: out.status,
        objective: out.objective,
        dual_bound: out.dual_bound,
        time: out.wall_time,
        routes,
    })
}

/// State carried through the loop.
pub struct Session<'a> {
    pub inst: &'a Instance,
    pub arcs: &'a LaArcs,
    pub backend: &'a dyn Backend,
    pub cfg: &'a Config,
}

impl<'a> Session<'a> {
    pub fn build_star(&self, p: &Parameterization) -> Result<BuiltModel> {
        let gd = FlowGraph::build(self.inst, &p.cap);
        let gt = FlowGraph::build(self.inst, &p.time);
        build_psi(self.inst, self.arcs, &p.sizes, &gd, &gt, PsiOptions::star(self.cfg.eps))
    }

    pub fn build_bar(&self, p: &Parameterization, integer: bool) -> Result<BuiltModel> {
        let gd = FlowGraph::build(self.inst, &p.cap);
        let gt = FlowGraph::build(self.inst, &p.time);
        build_psi(self.inst, self.arcs, &p.sizes, &gd, &gt, PsiOptions::bar(integer))
    }

    pub fn solve_star(&self, p: &Parameterization) -> Result<(BuiltModel, SolveOutcome)> {
        let m = self.build_star(p)?;
        let out = solve_lp(self.backend, &m, self.cfg.seed)?;
        Ok((m, out))
    }

    /// Bucket merges and LA contraction from one Ψ* solution. Returns the
    /// number of capacity and time thresholds removed.
    pub fn contract(&self, p: &mut Parameterization, m: &BuiltModel, out: &SolveOutcome) -> Result<(usize, usize)> {
        let tol = self.cfg.merge_tol;
        let gd = m.graph_d.as_ref().ok_or_else(|| Error::Model("no capacity graph".into()))?;
        let gt = m.graph_t.as_ref().ok_or_else(|| Error::Model("no time graph".into()))?;
        let md = merge_equal_dual_buckets(&mut p.cap, gd, &m.balance_duals(Resource::Capacity, &out.duals), tol)?;
        let mt = merge_equal_dual_buckets(&mut p.time, gt, &m.balance_duals(Resource::Time, &out.duals), tol)?;
        p.sizes = la_contract(m, &out.duals, self.cfg.la_dual_tol)?;
        Ok((md, mt))
    }

    /// Time thresholds first, then capacity.
    pub fn expand(&self, p: &mut Parameterization, m: &BuiltModel, out: &SolveOutcome) -> Result<(usize, usize)> {
        let tol = self.cfg.flow_tol;
        let gd = m.graph_d.as_ref().ok_or_else(|| Error::Model("no capacity graph".into()))?;
        let gt = m.graph_t.as_ref().ok_or_else(|| Error::Model("no time graph".into()))?;
        let at = expand_from_flows(self.inst, &mut p.time, gt, &m.flows(Resource::Time, &out.primal), tol)?;
        let ad = expand_from_flows(self.inst, &mut p.cap, gd, &m.flows(Resource::Capacity, &out.primal), tol)?;
        Ok((ad, at))
    }

    /// The refinement loop, starting from `p`. Returns the final parameterization,
    /// the log, total LP time and whether the hard cap stopped it. The last
    /// solved Ψ* is returned when it matches the final parameterization.
    pub fn refine(&self, mut p: Parameterization) -> Result<Refined> {
        let cfg = self.cfg;
        let full = full_sizes(self.arcs);
        let mut since_reset = 0usize;
        let mut last = f64::NEG_INFINITY;
        let mut log = Vec::new();
        let mut lp_time = 0.0;
        let mut last_solve = None;
        let mut hit_cap = false;
        for iteration in 0.. {
            if iteration >= cfg.hard_cap {
                hit_cap = true;
                break;
            }
            let before = p.clone();
            let reset = since_reset >= cfg.zeta;
            if reset {
                p.sizes = full.clone();
            }
            let t = Instant::now();
            let (m, out) = self.solve_star(&p)?;
            let this_lp = t.elapsed().as_secs_f64();
            lp_time += this_lp;
            let mut rec = IterationRecord {
                iteration,
                lp_objective: out.objective,
                iter_since_reset: since_reset,
                reset,
                num_vars: m.lp.num_cols(),
                num_rows: m.lp.num_rows(),
                cap_buckets: p.cap.total_buckets(self.inst),
                time_buckets: p.time.total_buckets(self.inst),
                total_la: p.total_la(),
                contracted: false,
                merged_cap: 0,
                merged_time: 0,
                added_cap: 0,
                added_time: 0,
                lp_time: this_lp,
                contracted_objective: None,
            };
            if out.objective > last + cfg.min_inc {
                let (md, mt) = self.contract(&mut p, &m, &out)?;
                rec.contracted = true;
                rec.merged_cap = md;
                rec.merged_time = mt;
                if cfg.verify_contraction {
                    rec.contracted_objective = Some(self.solve_star(&p)?.1.objective);
                }
                last = out.objective;
                since_reset = 0;
            }
            let solved_param = if rec.contracted { None } else { Some(p.clone()) };
            let (ad, at) = self.expand(&mut p, &m, &out)?;
            rec.added_cap = ad;
            rec.added_time = at;
            since_reset += 1;
            log::debug!(
                "iter {iteration}: lp {:.4} ({:.2}s solve, {:.2}s total) vars {} rows {} D {} T {} LA {}{}",
                rec.lp_objective,
                out.wall_time,
                this_lp,
                rec.num_vars,
                rec.num_rows,
                rec.cap_buckets,
                rec.time_buckets,
                rec.total_la,
                if rec.contracted { " contracted" } else { "" }
            );
            log.push(rec);
            // keep the solution only while it still describes `p`
            last_solve = match solved_param {
                Some(sp) if sp == p => Some((m, out)),
                _ => None,
            };
            if parameterization_diff(&before, &p).is_empty() || since_reset > cfg.iter_max {
                break;
            }
        }
        Ok(Refined { param: p, log, lp_time, hit_cap, last_solve })
    }
}

pub struct Refined {
    pub param: Parameterization,
    pub log: Vec<IterationRecord>,
    pub lp_time: f64,
    pub hit_cap: bool,
    pub last_solve: Option<(BuiltModel, SolveOutcome)>,
}

/// Full pipeline: frontiers, refinement loop, final contraction, LP bound
/// of the exact model and its MILP.
pub fn run(inst: &Instance, backend: &dyn Backend, cfg: &Config) -> Result<Discovery> {
    let arcs = LaArcs::new(inst, cfg.ns);
    run_with_arcs(inst, &arcs, backend, cfg)
}

pub fn run_with_arcs(inst: &Instance, arcs: &LaArcs, backend: &dyn Backend, cfg: &Config) -> Result<Discovery> {
    if inst.num_customers() == 0 {
        return Err(Error::Model("instance has no customers".into()));
    }
    let s = Session { inst, arcs, backend, cfg };
    let p0 = Parameterization::initial(inst, arcs, cfg.ds, cfg.ts)?;
    let r = s.refine(p0)?;
    let mut p = r.param;
    let mut lp_time = r.lp_time;

    // final contraction against duals of the current parameterization
    let (m, out) = match r.last_solve {
        Some(v) => v,
        None => {
            let t = Instant::now();
            let v = s.solve_star(&p)?;
            lp_time += t.elapsed().as_secs_f64();
            v
        }
    };
    s.contract(&mut p, &m, &out)?;
    let final_contraction = if cfg.verify_contraction {
        Some((out.objective, s.solve_star(&p)?.1.objective))
    } else {
        None
    };

    let t = Instant::now();
    let relaxed = s.build_bar(&p, false)?;
    let lp = solve_lp(backend, &relaxed, cfg.seed)?;
    lp_time += t.elapsed().as_secs_f64();

    let milp = if cfg.solve_milp {
        let exact = s.build_bar(&p, true)?;
        Some(solve_milp(backend, inst, &exact, cfg.milp_time_limit, cfg.seed)?)
    } else {
        None
    };
    Ok(Discovery {
        param: p,
        log: r.log,
        lp_obj: lp.objective,
        total_lp_time: lp_time,
        milp,
        hit_cap: r.hit_cap,
        final_contraction,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineResult {
    pub lp_obj: f64,
    pub lp_time: f64,
    pub milp: Option<MilpResult>,
}

/// LP relaxation and MILP of the two-index model.
pub fn run_baseline(inst: &Instance, backend: &dyn Backend, cfg: &Config) -> Result<BaselineResult> {
    let relaxed = build_baseline(inst, false)?;
    let lp = solve_lp(backend, &relaxed, cfg.seed)?;
    let milp = if cfg.solve_milp {
        let exact = build_baseline(inst, true)?;
        Some(solve_milp(backend, inst, &exact, cfg.milp_time_limit, cfg.seed)?)
    } else {
        None
    };
    Ok(BaselineResult { lp_obj: lp.objective, lp_time: lp.wall_time, milp })
}
