//! Shared helpers for the integration tests: synthetic instances and
//! reference implementations written directly from the definitions.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use ladisc_core::{Customer, Instance, Tenths};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a synthetic instance.
#[derive(Clone, Copy, Debug)]
pub struct Synth {
    pub customers: usize,
    pub horizon: i64,
    pub capacity: i64,
    pub service: i64,
    /// Window width is drawn from this range (time units).
    pub width: (i64, i64),
}

impl Synth {
    pub fn small(customers: usize) -> Self {
        Synth { customers, horizon: 160, capacity: 50, service: 5, width: (10, 60) }
    }

    /// Narrow windows keep the finest time discretization small.
    pub fn narrow(customers: usize) -> Self {
        Synth { customers, horizon: 120, capacity: 40, service: 5, width: (5, 20) }
    }
}

/// Depot in the middle of a 50x50 square, integer data, every customer
/// reachable on its own.
pub fn random_instance(seed: u64, s: Synth) -> Instance {
    let mut r = rng(seed);
    let depot = Customer {
        id: 0,
        x: 25.0,
        y: 25.0,
        demand: 0,
        ready: Tenths::ZERO,
        due: Tenths::units(s.horizon),
        service: Tenths::ZERO,
    };
    let mut cs = Vec::with_capacity(s.customers);
    for id in 1..=s.customers {
        let x = r.gen_range(0..=50) as f64;
        let y = r.gen_range(0..=50) as f64;
        let d = ((x - 25.0).powi(2) + (y - 25.0).powi(2)).sqrt().ceil() as i64;
        let latest = s.horizon - s.service - d - 1;
        let earliest = d + 1;
        let ready = r.gen_range(0..=latest.max(earliest));
        let due = (ready + r.gen_range(s.width.0..=s.width.1)).min(latest).max(earliest.max(ready));
        cs.push(Customer {
            id,
            x,
            y,
            demand: r.gen_range(1..=20),
            ready: Tenths::units(ready),
            due: Tenths::units(due),
            service: Tenths::units(s.service),
        });
    }
    Instance::new(format!("synth-{seed}"), depot, cs, s.capacity).expect("valid synthetic instance")
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/solomon")
}

pub fn solomon(name: &str, n: usize) -> Instance {
    let path = data_dir().join(format!("{name}.txt"));
    Instance::from_file(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .truncate(n)
        .unwrap()
}

fn row(inst: &Instance, u: usize) -> &Customer {
    if inst.is_customer(u) {
        &inst.customer_rows()[u - 1]
    } else {
        inst.depot()
    }
}

/// Forward-time check of a depot-to-depot route against the raw windows:
/// leave the depot at its ready time, wait when early, start service no
/// later than the due time, and be back by the depot's due time.
pub fn forward_feasible(inst: &Instance, route: &[usize]) -> bool {
    let end = inst.end_depot();
    if route.first() != Some(&0) || route.last() != Some(&end) {
        return false;
    }
    let interior = &route[1..route.len() - 1];
    let mut seen = vec![false; inst.num_nodes()];
    for &u in interior {
        if !inst.is_customer(u) || seen[u] {
            return false;
        }
        seen[u] = true;
    }
    if interior.iter().map(|&u| inst.demand(u)).sum::<i64>() > inst.capacity() {
        return false;
    }
    let mut now = inst.depot().ready;
    let mut at = 0;
    for &v in &route[1..] {
        let arrive = now + row(inst, at).service + inst.c(at, v);
        let start = arrive.max(row(inst, v).ready);
        if start > row(inst, v).due {
            return false;
        }
        now = start;
        at = v;
    }
    true
}

pub fn route_cost(inst: &Instance, route: &[usize]) -> Tenths {
    route.windows(2).map(|w| inst.c(w[0], w[1])).sum()
}

/// `(u, v)` belongs to the edge set iff the structural rules hold and the
/// short route through it is feasible in forward time.
pub fn edge_oracle(inst: &Instance, u: usize, v: usize) -> bool {
    let end = inst.end_depot();
    if u == end || v == 0 || u == v || (u == 0 && v == end) {
        return false;
    }
    if inst.demand(u) + inst.demand(v) > inst.capacity() {
        return false;
    }
    let probe: Vec<usize> = if u == 0 {
        vec![0, v, end]
    } else if v == end {
        vec![0, u, end]
    } else {
        vec![0, u, v, end]
    };
    forward_feasible(inst, &probe)
}

/// Brute-force ordering attributes computed from prefix sums.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attr {
    pub seq: Vec<usize>,
    pub cost: Tenths,
    pub phi: Tenths,
    pub phi_hat: Tenths,
}

/// Remaining-time simulation that starts as late as allowed at `seq[0]`.
pub fn sequence_feasible(inst: &Instance, seq: &[usize]) -> bool {
    let mut tau = inst.t_plus(seq[0]);
    if tau < inst.t_minus(seq[0]) {
        return false;
    }
    for w in seq.windows(2) {
        tau = (tau - inst.t(w[0], w[1])).min(inst.t_plus(w[1]));
        if tau < inst.t_minus(w[1]) {
            return false;
        }
    }
    true
}

pub fn attributes(inst: &Instance, seq: &[usize]) -> Attr {
    let mut cum = Tenths::ZERO;
    let mut phi = inst.t_plus(seq[0]);
    let mut phi_hat = inst.t_minus(seq[0]);
    for w in seq.windows(2) {
        cum += inst.t(w[0], w[1]);
        phi = phi.min(inst.t_plus(w[1]) + cum);
        phi_hat = phi_hat.max(inst.t_minus(w[1]) + cum);
    }
    Attr { seq: seq.to_vec(), cost: cum, phi, phi_hat }
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// All feasible orderings `start, perm(interior), end`, then a quadratic
/// Pareto filter on (cost min, φ̂ min, φ - cost max) that keeps exact ties.
pub fn brute_frontier(inst: &Instance, start: usize, interior: &[usize], end: usize) -> Vec<Attr> {
    let load: i64 = inst.demand(start) + inst.demand(end) + interior.iter().map(|&w| inst.demand(w)).sum::<i64>();
    if load > inst.capacity() {
        return Vec::new();
    }
    let all: Vec<Attr> = permutations(interior)
        .into_iter()
        .map(|p| {
            let mut seq = vec![start];
            seq.extend(p);
            seq.push(end);
            seq
        })
        .filter(|seq| seq.windows(2).all(|w| inst.has_edge(w[0], w[1])))
        .filter(|seq| sequence_feasible(inst, seq))
        .map(|seq| attributes(inst, &seq))
        .collect();
    let slack = |a: &Attr| a.phi - a.cost;
    let beats = |a: &Attr, b: &Attr| {
        let weak = a.cost <= b.cost && a.phi_hat <= b.phi_hat && slack(a) >= slack(b);
        let tie = a.cost == b.cost && a.phi_hat == b.phi_hat && slack(a) == slack(b);
        weak && !tie
    };
    let mut kept: Vec<Attr> = all
        .iter()
        .filter(|b| !all.iter().any(|a| beats(a, b)))
        .cloned()
        .collect();
    kept.sort();
    kept
}

/// Optimal VRPTW cost by enumerating every elementary route and solving a
/// set-partition DP over customer subsets. `None` if no cover exists.
pub fn brute_force_optimum(inst: &Instance) -> Option<Tenths> {
    let n = inst.num_customers();
    assert!(n <= 12, "enumeration is exponential");
    let full = (1usize << n) - 1;
    let mut best_route: HashMap<usize, Tenths> = HashMap::new();

    // no pruning: every elementary sequence is tried
    fn dfs(inst: &Instance, path: &mut Vec<usize>, mask: usize, best: &mut HashMap<usize, Tenths>) {
        for v in inst.customers() {
            let bit = 1 << (v - 1);
            if mask & bit != 0 {
                continue;
            }
            path.push(v);
            let mut closed = path.clone();
            closed.push(inst.end_depot());
            if forward_feasible(inst, &closed) {
                let c = route_cost(inst, &closed);
                let e = best.entry(mask | bit).or_insert(c);
                *e = (*e).min(c);
            }
            dfs(inst, path, mask | bit, best);
            path.pop();
        }
    }
    let mut path = vec![0];
    dfs(inst, &mut path, 0, &mut best_route);

    let mut dp: Vec<Option<Tenths>> = vec![None; full + 1];
    dp[0] = Some(Tenths::ZERO);
    for mask in 1..=full {
        // the lowest customer in `mask` belongs to some route
        let low = mask & mask.wrapping_neg();
        let mut sub = mask;
        let mut best: Option<Tenths> = None;
        while sub > 0 {
            if sub & low != 0 {
                if let (Some(&rc), Some(rest)) = (best_route.get(&sub), dp[mask & !sub]) {
                    let c = rc + rest;
                    best = Some(best.map_or(c, |b: Tenths| b.min(c)));
                }
            }
            sub = (sub - 1) & mask;
        }
        dp[mask] = best;
    }
    dp[full]
}
