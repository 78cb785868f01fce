//! Capacity and time buckets and the flow graphs built on them.
//!
//! A threshold set for customer `u` lists bucket uppers except the last.
//! With thresholds `w1 < ... < wm` in `[lower_u, cap_u)` the buckets are
//! `[lower_u, w1], [w1 + 1, w2], ..., [wm + 1, cap_u]`. Values are integers:
//! units for capacity, tenths for time.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resource {
    Capacity,
    Time,
}

impl Resource {
    pub fn tag(self) -> &'static str {
        match self {
            Resource::Capacity => "D",
            Resource::Time => "T",
        }
    }

    /// `[lower_u, cap_u]` for a node.
    pub fn range(self, inst: &Instance, u: usize) -> (i64, i64) {
        match self {
            Resource::Capacity => (inst.demand(u), inst.capacity()),
            Resource::Time => (inst.t_minus(u).raw(), inst.t_plus(u).raw()),
        }
    }

    /// Amount used when travelling `u -> v`.
    pub fn consume(self, inst: &Instance, u: usize, v: usize) -> i64 {
        match self {
            Resource::Capacity => inst.demand(u),
            Resource::Time => inst.t(u, v).raw(),
        }
    }

    /// Value carried by the source node.
    pub fn source_level(self, inst: &Instance) -> i64 {
        match self {
            Resource::Capacity => inst.capacity(),
            Resource::Time => inst.horizon().raw(),
        }
    }
}

/// `W_u` for every node of one resource. Depot entries stay empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Thresholds {
    pub resource: Resource,
    pub sets: Vec<BTreeSet<i64>>,
}

impl Thresholds {
    /// Single bucket per customer.
    pub fn coarsest(inst: &Instance, resource: Resource) -> Self {
        Thresholds {
            resource,
            sets: vec![BTreeSet::new(); inst.num_nodes()],
        }
    }

    /// Every integer step is its own bucket.
    pub fn finest(inst: &Instance, resource: Resource) -> Self {
        let mut t = Self::coarsest(inst, resource);
        for u in inst.customers() {
            let (lo, cap) = resource.range(inst, u);
            t.sets[u] = (lo..cap).collect();
        }
        t
    }

    /// Evenly spaced buckets of width `step`; the last may be narrower.
    pub fn uniform(inst: &Instance, resource: Resource, step: i64) -> Result<Self> {
        if step <= 0 {
            return Err(Error::InvalidArgument(format!(
                "bucket size must be positive, got {step}"
            )));
        }
        let mut t = Self::coarsest(inst, resource);
        for u in inst.customers() {
            let (lo, cap) = resource.range(inst, u);
            let mut w = lo + step - 1;
            while w < cap {
                t.sets[u].insert(w);
                w += step;
            }
        }
        Ok(t)
    }

    /// `(lower, upper)` of each bucket of `u`, lowest first.
    pub fn buckets(&self, inst: &Instance, u: usize) -> Vec<(i64, i64)> {
        let (lo, cap) = self.resource.range(inst, u);
        let mut out = Vec::with_capacity(self.sets[u].len() + 1);
        let mut from = lo;
        for &w in &self.sets[u] {
            out.push((from, w));
            from = w + 1;
        }
        out.push((from, cap));
        out
    }

    pub fn total_buckets(&self, inst: &Instance) -> usize {
        inst.customers().map(|u| self.sets[u].len() + 1).sum()
    }

    /// Inserts `value` into `W_u` if it lies in `[lower_u, cap_u)`.
    pub fn insert(&mut self, inst: &Instance, u: usize, value: i64) -> bool {
        let (lo, cap) = self.resource.range(inst, u);
        value >= lo && value < cap && self.sets[u].insert(value)
    }

    /// Checks strict ordering and range of every threshold.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        for u in inst.customers() {
            let (lo, cap) = self.resource.range(inst, u);
            if let Some(bad) = self.sets[u].iter().find(|&&w| w < lo || w >= cap) {
                return Err(Error::Model(format!(
                    "{} threshold {bad} of node {u} outside [{lo}, {cap})",
                    self.resource.tag()
                )));
            }
        }
        Ok(())
    }
}

/// Initial capacity (`ds` units) and time (`ts` time units) thresholds.
pub fn init_thresholds(inst: &Instance, ds: i64, ts: i64) -> Result<(Thresholds, Thresholds)> {
    if ds <= 0 || ts <= 0 {
        return Err(Error::InvalidArgument(format!(
            "bucket sizes must be positive (d^s = {ds}, t^s = {ts})"
        )));
    }
    Ok((
        Thresholds::uniform(inst, Resource::Capacity, ds)?,
        Thresholds::uniform(inst, Resource::Time, ts * 10)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BucketNode {
    pub u: usize,
    /// 1 is the lowest range.
    pub k: usize,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    DepotOut,
    DepotIn,
    Dump,
    Travel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// Bucket graph of one resource. Node 0 is the source, node 1 the sink.
#[derive(Clone, Debug)]
pub struct FlowGraph {
    pub resource: Resource,
    pub nodes: Vec<BucketNode>,
    pub edges: Vec<FlowEdge>,
    /// Index of the first bucket of each customer in `nodes`.
    pub first: Vec<usize>,
    /// Number of buckets of each customer.
    pub count: Vec<usize>,
}

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

impl FlowGraph {
    pub fn build(inst: &Instance, th: &Thresholds) -> FlowGraph {
        let res = th.resource;
        let m = inst.num_nodes();
        let top = res.source_level(inst);
        let mut nodes = vec![
            BucketNode {
                u: inst.start_depot(),
                k: 1,
                lower: top,
                upper: top,
            },
            BucketNode {
                u: inst.end_depot(),
                k: 1,
                lower: 0,
                upper: top,
            },
        ];
        let mut first = vec![usize::MAX; m];
        let mut count = vec![0; m];
        for u in inst.customers() {
            first[u] = nodes.len();
            let b = th.buckets(inst, u);
            count[u] = b.len();
            for (i, (lower, upper)) in b.into_iter().enumerate() {
                nodes.push(BucketNode {
                    u,
                    k: i + 1,
                    lower,
                    upper,
                });
            }
        }

        let mut edges = Vec::new();
        let end = inst.end_depot();
        for &(u, v) in inst.edges() {
            if u == inst.start_depot() {
                // land in the bucket holding the level on arrival
                let level = (top - res.consume(inst, u, v)).min(res.range(inst, v).1);
                let bs = &nodes[first[v]..first[v] + count[v]];
                let idx = bs.partition_point(|b| b.upper < level);
                if idx < bs.len() && bs[idx].lower <= level {
                    edges.push(FlowEdge {
                        from: SOURCE,
                        to: first[v] + idx,
                        kind: EdgeKind::DepotOut,
                    });
                }
            } else if v == end {
                edges.push(FlowEdge {
                    from: first[u],
                    to: SINK,
                    kind: EdgeKind::DepotIn,
                });
            } else {
                let consume = res.consume(inst, u, v);
                let bs = &nodes[first[v]..first[v] + count[v]];
                for k in 0..count[u] {
                    let i = first[u] + k;
                    let hi = nodes[i].upper - consume;
                    let lo_excl = if k > 0 {
                        nodes[i - 1].upper - consume
                    } else {
                        i64::MIN
                    };
                    let from_j = bs.partition_point(|b| b.lower <= lo_excl);
                    let to_j = bs.partition_point(|b| b.lower <= hi);
                    for j in from_j..to_j {
                        edges.push(FlowEdge {
                            from: i,
                            to: first[v] + j,
                            kind: EdgeKind::Travel,
                        });
                    }
                }
            }
        }
        for u in inst.customers() {
            for k in 1..count[u] {
                edges.push(FlowEdge {
                    from: first[u] + k,
                    to: first[u] + k - 1,
                    kind: EdgeKind::Dump,
                });
            }
        }
        FlowGraph {
            resource: res,
            nodes,
            edges,
            first,
            count,
        }
    }

    pub fn customer_nodes(&self, u: usize) -> std::ops::Range<usize> {
        self.first[u]..self.first[u] + self.count[u]
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut out = vec![Vec::new(); n];
        for e in &self.edges {
            indeg[e.to] += 1;
            out[e.from].push(e.to);
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = stack.pop() {
            order.push(i);
            for &j in &out[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    stack.push(j);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Debug rows `resource u k lower upper`.
    pub fn dump_nodes(&self) -> Vec<String> {
        self.nodes
            .iter()
            .map(|b| format!("{} {} {} {} {}", self.resource.tag(), b.u, b.k, b.lower, b.upper))
            .collect()
    }

    /// Debug rows `kind from to`.
    pub fn dump_edges(&self) -> Vec<String> {
        self.edges
            .iter()
            .map(|e| format!("{:?} {} {}", e.kind, e.from, e.to))
            .collect()
    }

    /// New threshold implied by one edge, as computed by expansion.
    pub fn expansion_value(&self, inst: &Instance, e: &FlowEdge) -> i64 {
        let i = &self.nodes[e.from];
        let j = &self.nodes[e.to];
        (i.upper - self.resource.consume(inst, i.u, j.u)).min(j.upper)
    }

    /// `true` when every edge with flow above `tol` into a customer lands on
    /// the upper bound of its target bucket.
    pub fn bucket_feasible(&self, inst: &Instance, flows: &[f64], tol: f64) -> bool {
        self.edges.iter().zip(flows).all(|(e, &f)| {
            !(f > tol && matches!(e.kind, EdgeKind::Travel | EdgeKind::DepotOut))
                || self.expansion_value(inst, e) == self.nodes[e.to].upper
        })
    }
}

/// Adds flow-implied thresholds. Returns the number of values added.
pub fn expand_from_flows(
    inst: &Instance,
    th: &mut Thresholds,
    graph: &FlowGraph,
    flows: &[f64],
    tol: f64,
) -> Result<usize> {
    if flows.len() != graph.edges.len() {
        return Err(Error::Model(format!(
            "{} flow values for {} edges",
            flows.len(),
            graph.edges.len()
        )));
    }
    let mut added = 0;
    for (e, &f) in graph.edges.iter().zip(flows) {
        if f <= tol || !matches!(e.kind, EdgeKind::Travel | EdgeKind::DepotOut) {
            continue;
        }
        let value = graph.expansion_value(inst, e);
        if th.insert(inst, graph.nodes[e.to].u, value) {
            added += 1;
        }
    }
    Ok(added)
}

/// Merges dump-adjacent buckets whose balance-row duals agree within `tol`.
/// `duals` is indexed by graph node; source and sink entries are ignored.
/// Returns the number of thresholds removed.
pub fn merge_equal_dual_buckets(
    th: &mut Thresholds,
    graph: &FlowGraph,
    duals: &[f64],
    tol: f64,
) -> Result<usize> {
    if duals.len() != graph.nodes.len() {
        return Err(Error::Model(format!(
            "{} duals for {} bucket nodes",
            duals.len(),
            graph.nodes.len()
        )));
    }
    let mut removed = 0;
    for u in 0..graph.first.len() {
        if graph.count[u] == 0 {
            continue;
        }
        for i in graph.customer_nodes(u).skip(1) {
            if (duals[i] - duals[i - 1]).abs() <= tol && th.sets[u].remove(&graph.nodes[i - 1].upper)
            {
                removed += 1;
            }
        }
    }
    Ok(removed)
}
