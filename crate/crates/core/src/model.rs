//! Baseline two-index model and the LA/bucket-graph models built on top of it.
//!
//! LP units are distance units (tenths / 10). Capacity stays in demand units.

use std::collections::BTreeMap;

use crate::buckets::{EdgeKind, FlowGraph, Resource, SINK, SOURCE};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::la_arcs::LaArcs;
use crate::lp::LinearProgram;

const INF: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColTag {
    X(usize, usize),
    Tau(usize),
    Delta(usize),
    /// Owner and index into `R_u`.
    Y(usize, usize),
    /// Resource and flow-graph edge index.
    Z(Resource, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    Service(usize),
    Degree(usize),
    /// `(v, u)` for the arc `v -> u`.
    CapacityMtz(usize, usize),
    TimeMtz(usize, usize),
    MinVehicles,
    OneOrdering(usize),
    LaLocal { u: usize, w: usize, v: usize, k: usize },
    LaFinal { u: usize, w: usize, k: usize },
    /// Resource and flow-graph node index.
    Balance(Resource, usize),
    Link(Resource, usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Baseline,
    /// LP with the ε·k family over every `k ≤ |N_u|`.
    PsiStar,
    /// Exact model: constraints at `k = |N_u|` only, no slack.
    PsiBar,
}

/// A model plus handles from tags to columns and rows.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub kind: ModelKind,
    pub lp: LinearProgram,
    pub col_tags: Vec<ColTag>,
    pub row_tags: Vec<RowTag>,
    /// Column of `x_uv`, aligned with `Instance::edges`.
    pub x_cols: Vec<usize>,
    /// `|N_u|` used to build the LA rows.
    pub sizes: Vec<usize>,
    pub graph_d: Option<FlowGraph>,
    pub graph_t: Option<FlowGraph>,
    z_first: [usize; 2],
    balance_first: [usize; 2],
}

fn ridx(r: Resource) -> usize {
    match r {
        Resource::Capacity => 0,
        Resource::Time => 1,
    }
}

struct Builder<'a> {
    inst: &'a Instance,
    lp: LinearProgram,
    col_tags: Vec<ColTag>,
    row_tags: Vec<RowTag>,
    x_of: Vec<Option<usize>>,
}

impl<'a> Builder<'a> {
    fn new(inst: &'a Instance) -> Self {
        let m = inst.num_nodes();
        Builder {
            inst,
            lp: LinearProgram::default(),
            col_tags: Vec::new(),
            row_tags: Vec::new(),
            x_of: vec![None; m * m],
        }
    }

    fn col(&mut self, tag: ColTag, name: String, lo: f64, up: f64, cost: f64, int: bool) -> usize {
        self.col_tags.push(tag);
        self.lp.add_col(name, lo, up, cost, int)
    }

    fn row(&mut self, tag: RowTag, name: String, lo: f64, up: f64, coefs: Vec<(usize, f64)>) -> usize {
        self.row_tags.push(tag);
        self.lp.add_row(name, lo, up, coefs)
    }

    fn x(&self, u: usize, v: usize) -> Option<usize> {
        self.x_of[u * self.inst.num_nodes() + v]
    }

    /// Two-index rows; returns `x` columns aligned with E*.
    fn baseline(&mut self, integer: bool) -> Vec<usize> {
        let inst = self.inst;
        let m = inst.num_nodes();
        let alpha = inst.start_depot();
        let mut x_cols = Vec::with_capacity(inst.edges().len());
        for &(u, v) in inst.edges() {
            let j = self.col(ColTag::X(u, v), format!("x_{u}_{v}"), 0.0, 1.0, inst.c(u, v).as_f64(), integer);
            self.x_of[u * m + v] = Some(j);
            x_cols.push(j);
        }
        let mut tau = vec![usize::MAX; m];
        let mut delta = vec![usize::MAX; m];
        for u in inst.customers() {
            tau[u] = self.col(
                ColTag::Tau(u),
                format!("tau_{u}"),
                inst.t_minus(u).as_f64(),
                inst.t_plus(u).as_f64(),
                0.0,
                false,
            );
        }
        for u in inst.customers() {
            delta[u] = self.col(
                ColTag::Delta(u),
                format!("delta_{u}"),
                inst.demand(u) as f64,
                inst.capacity() as f64,
                0.0,
                false,
            );
        }

        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut inn: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
        for (e, &(u, v)) in inst.edges().iter().enumerate() {
            out[u].push((x_cols[e], 1.0));
            inn[v].push((u, x_cols[e]));
        }
        for u in inst.customers() {
            self.row(RowTag::Service(u), format!("svc_{u}"), 1.0, 1.0, out[u].clone());
        }
        for u in inst.customers() {
            let coefs = inn[u].iter().map(|&(_, j)| (j, 1.0)).collect();
            self.row(RowTag::Degree(u), format!("deg_{u}"), 1.0, 1.0, coefs);
        }

        let d0 = inst.capacity() as f64;
        for u in inst.customers() {
            for &(v, j) in &inn[u] {
                // δ_v − δ_u − (d0 + d_v) x_vu ≥ −d0, with δ_α fixed at d0
                let dv = inst.demand(v) as f64;
                if v == alpha {
                    self.row(
                        RowTag::CapacityMtz(v, u),
                        format!("capm_{v}_{u}"),
                        -2.0 * d0,
                        INF,
                        vec![(delta[u], -1.0), (j, -d0)],
                    );
                } else {
                    self.row(
                        RowTag::CapacityMtz(v, u),
                        format!("capm_{v}_{u}"),
                        -d0,
                        INF,
                        vec![(delta[v], 1.0), (delta[u], -1.0), (j, -(d0 + dv))],
                    );
                }
            }
        }
        let t0 = inst.horizon().as_f64();
        for u in inst.customers() {
            let tp = inst.t_plus(u).as_f64();
            for &(v, j) in &inn[u] {
                let big_m = tp + inst.t(v, u).as_f64();
                if v == alpha {
                    self.row(
                        RowTag::TimeMtz(v, u),
                        format!("timm_{v}_{u}"),
                        -tp - t0,
                        INF,
                        vec![(tau[u], -1.0), (j, -big_m)],
                    );
                } else {
                    self.row(
                        RowTag::TimeMtz(v, u),
                        format!("timm_{v}_{u}"),
                        -tp,
                        INF,
                        vec![(tau[v], 1.0), (tau[u], -1.0), (j, -big_m)],
                    );
                }
            }
        }
        let coefs = out[alpha].clone();
        self.row(RowTag::MinVehicles, "minveh".into(), inst.min_vehicles() as f64, INF, coefs);
        x_cols
    }

    fn la_rows(&mut self, arcs: &LaArcs, sizes: &[usize], kind: ModelKind, eps: f64, integer: bool) {
        let inst = self.inst;
        for u in inst.customers() {
            let size = sizes[u].min(arcs.max_size(u));
            let reps = arcs.representatives(u, size);
            let mut ycols = Vec::with_capacity(reps.len());
            for (idx, _) in &reps {
                let j = self.col(ColTag::Y(u, *idx), format!("y_{u}_{idx}"), 0.0, INF, 0.0, integer);
                ycols.push(j);
            }
            let coefs = ycols.iter().map(|&j| (j, 1.0)).collect();
            self.row(RowTag::OneOrdering(u), format!("ord_{u}"), 1.0, 1.0, coefs);

            let ks: Vec<usize> = match kind {
                ModelKind::PsiStar => (1..=size).collect(),
                _ if size > 0 => vec![size],
                _ => Vec::new(),
            };
            for k in ks {
                let slack = match kind {
                    ModelKind::PsiStar => eps * k as f64,
                    _ => 0.0,
                };
                let mut local: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
                let mut fin: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for ((_, prefix), &yj) in reps.iter().zip(&ycols) {
                    let vis = arcs.visible_prefix(u, prefix, k);
                    for p in vis.windows(2) {
                        local.entry((p[0], p[1])).or_default().push(yj);
                    }
                    fin.entry(*vis.last().unwrap()).or_default().push(yj);
                }
                // Rows without y terms are implied by x ≥ 0 and are skipped.
                for ((w, v), ys) in local {
                    let xj = self.x(w, v).expect("ordering arc outside E*");
                    let mut coefs = vec![(xj, 1.0)];
                    coefs.extend(ys.iter().map(|&j| (j, -1.0)));
                    self.row(RowTag::LaLocal { u, w, v, k }, format!("lal_{u}_{w}_{v}_{k}"), -slack, INF, coefs);
                }
                let in_k = |v: usize| arcs.rank(u, v).is_some_and(|r| r <= k);
                for (w, ys) in fin {
                    let mut coefs: Vec<(usize, f64)> = (0..inst.num_nodes())
                        .filter(|&v| !in_k(v))
                        .filter_map(|v| self.x(w, v))
                        .map(|j| (j, 1.0))
                        .collect();
                    coefs.extend(ys.iter().map(|&j| (j, -1.0)));
                    self.row(RowTag::LaFinal { u, w, k }, format!("laf_{u}_{w}_{k}"), -slack, INF, coefs);
                }
            }
        }
    }

    /// Flow variables, balance rows and link rows. Returns the first z column
    /// and first balance row.
    fn flow_rows(&mut self, g: &FlowGraph) -> (usize, usize) {
        let inst = self.inst;
        let tag = g.resource.tag();
        let z0 = self.lp.num_cols();
        for (e, edge) in g.edges.iter().enumerate() {
            self.col(
                ColTag::Z(g.resource, e),
                format!("z{tag}_{}_{}", edge.from, edge.to),
                0.0,
                INF,
                0.0,
                false,
            );
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
        let mut inn: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
        for (e, edge) in g.edges.iter().enumerate() {
            out[edge.from].push(z0 + e);
            inn[edge.to].push(z0 + e);
        }
        let b0 = self.lp.num_rows();
        for i in 0..g.nodes.len() {
            if i == SOURCE || i == SINK {
                continue;
            }
            let mut coefs: Vec<(usize, f64)> = out[i].iter().map(|&j| (j, 1.0)).collect();
            coefs.extend(inn[i].iter().map(|&j| (j, -1.0)));
            self.row(RowTag::Balance(g.resource, i), format!("bal{tag}_{i}"), 0.0, 0.0, coefs);
        }

        let m = inst.num_nodes();
        let mut by_arc: Vec<Vec<usize>> = vec![Vec::new(); m * m];
        for (e, edge) in g.edges.iter().enumerate() {
            if edge.kind == EdgeKind::Dump {
                continue;
            }
            let u = g.nodes[edge.from].u;
            let v = g.nodes[edge.to].u;
            by_arc[u * m + v].push(z0 + e);
        }
        for &(u, v) in inst.edges() {
            let mut coefs = vec![(self.x(u, v).unwrap(), 1.0)];
            coefs.extend(by_arc[u * m + v].iter().map(|&j| (j, -1.0)));
            self.row(RowTag::Link(g.resource, u, v), format!("link{tag}_{u}_{v}"), 0.0, 0.0, coefs);
        }
        (z0, b0)
    }
}

/// Options for the LA/bucket models.
#[derive(Clone, Copy, Debug)]
pub struct PsiOptions {
    pub kind: ModelKind,
    pub eps: f64,
    /// Integer `x` and `y`.
    pub integer: bool,
}

impl PsiOptions {
    pub fn star(eps: f64) -> Self {
        PsiOptions { kind: ModelKind::PsiStar, eps, integer: false }
    }

    pub fn bar(integer: bool) -> Self {
        PsiOptions { kind: ModelKind::PsiBar, eps: 0.0, integer }
    }
}

fn check_nonempty(inst: &Instance) -> Result<()> {
    if inst.num_customers() == 0 {
        return Err(Error::Model("instance has no customers".into()));
    }
    Ok(())
}

/// Two-index model with big-M capacity and time propagation.
pub fn build_baseline(inst: &Instance, integer: bool) -> Result<BuiltModel> {
    check_nonempty(inst)?;
    let mut b = Builder::new(inst);
    let x_cols = b.baseline(integer);
    Ok(BuiltModel {
        kind: ModelKind::Baseline,
        lp: b.lp,
        col_tags: b.col_tags,
        row_tags: b.row_tags,
        x_cols,
        sizes: vec![0; inst.num_nodes()],
        graph_d: None,
        graph_t: None,
        z_first: [usize::MAX; 2],
        balance_first: [usize::MAX; 2],
    })
}

/// Baseline rows plus LA-arc rows under neighborhood sizes `sizes` and the
/// two bucket graphs.
pub fn build_psi(
    inst: &Instance,
    arcs: &LaArcs,
    sizes: &[usize],
    graph_d: &FlowGraph,
    graph_t: &FlowGraph,
    opts: PsiOptions,
) -> Result<BuiltModel> {
    check_nonempty(inst)?;
    if sizes.len() != inst.num_nodes() || arcs.orderings.len() != inst.num_nodes() {
        return Err(Error::Model("parameterization does not match the instance".into()));
    }
    if graph_d.resource != Resource::Capacity || graph_t.resource != Resource::Time {
        return Err(Error::Model("flow graphs passed in the wrong order".into()));
    }
    if let Some(u) = inst.customers().find(|&u| sizes[u] > arcs.max_size(u)) {
        return Err(Error::Model(format!("|N_{u}| exceeds the arc neighborhood")));
    }
    if opts.kind == ModelKind::Baseline {
        return Err(Error::InvalidArgument("use build_baseline".into()));
    }
    let mut b = Builder::new(inst);
    let x_cols = b.baseline(opts.integer);
    b.la_rows(arcs, sizes, opts.kind, opts.eps, opts.integer);
    let (zd, bd) = b.flow_rows(graph_d);
    let (zt, bt) = b.flow_rows(graph_t);
    Ok(BuiltModel {
        kind: opts.kind,
        lp: b.lp,
        col_tags: b.col_tags,
        row_tags: b.row_tags,
        x_cols,
        sizes: sizes.to_vec(),
        graph_d: Some(graph_d.clone()),
        graph_t: Some(graph_t.clone()),
        z_first: [zd, zt],
        balance_first: [bd, bt],
    })
}

impl BuiltModel {
    pub fn graph(&self, r: Resource) -> Option<&FlowGraph> {
        match r {
            Resource::Capacity => self.graph_d.as_ref(),
            Resource::Time => self.graph_t.as_ref(),
        }
    }

    /// `((u, v), x_uv)` for every arc of E*.
    pub fn x_values<'a>(&'a self, inst: &'a Instance, primal: &'a [f64]) -> impl Iterator<Item = ((usize, usize), f64)> + 'a {
        inst.edges().iter().zip(&self.x_cols).map(|(&a, &j)| (a, primal[j]))
    }

    /// Flow on each graph edge.
    pub fn flows(&self, r: Resource, primal: &[f64]) -> Vec<f64> {
        match self.graph(r) {
            Some(g) => {
                let z0 = self.z_first[ridx(r)];
                primal[z0..z0 + g.edges.len()].to_vec()
            }
            None => Vec::new(),
        }
    }

    /// Balance-row duals indexed by graph node; zero for source and sink.
    pub fn balance_duals(&self, r: Resource, duals: &[f64]) -> Vec<f64> {
        let Some(g) = self.graph(r) else { return Vec::new() };
        let b0 = self.balance_first[ridx(r)];
        let mut out = vec![0.0; g.nodes.len()];
        for (i, slot) in out.iter_mut().enumerate().skip(2) {
            *slot = duals[b0 + i - 2];
        }
        out
    }

    /// Per owner `u`, the largest `k` whose LA rows carry a dual above `tol`
    /// in magnitude, or 0 if none does.
    pub fn active_la_sizes(&self, duals: &[f64], tol: f64) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (tag, &d) in self.row_tags.iter().zip(duals) {
            let (u, k) = match *tag {
                RowTag::LaLocal { u, k, .. } | RowTag::LaFinal { u, k, .. } => (u, k),
                _ => continue,
            };
            if d.abs() > tol {
                out[u] = out[u].max(k);
            }
        }
        out
    }

    pub fn objective(&self, primal: &[f64]) -> f64 {
        self.lp.objective_at(primal)
    }

    /// Routes `[α, …, ᾱ]` from an integral `x`.
    pub fn decode_routes(&self, inst: &Instance, primal: &[f64], tol: f64) -> Result<Vec<Vec<usize>>> {
        let m = inst.num_nodes();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
        for ((u, v), val) in self.x_values(inst, primal) {
            if val > tol && val < 1.0 - tol {
                return Err(Error::Model(format!("x_{u}_{v} = {val} is fractional")));
            }
            if val >= 1.0 - tol {
                succ[u].push(v);
            }
        }
        let end = inst.end_depot();
        let mut seen = vec![false; m];
        let mut routes = Vec::new();
        for &first in &succ[inst.start_depot()] {
            let mut route = vec![inst.start_depot()];
            let mut cur = first;
            while cur != end {
                if seen[cur] || succ[cur].len() != 1 {
                    return Err(Error::Model(format!("arc following breaks at node {cur}")));
                }
                seen[cur] = true;
                route.push(cur);
                cur = succ[cur][0];
            }
            route.push(end);
            routes.push(route);
        }
        if let Some(u) = inst.customers().find(|&u| !seen[u]) {
            return Err(Error::Model(format!("customer {u} is not on any depot route")));
        }
        Ok(routes)
    }
}
