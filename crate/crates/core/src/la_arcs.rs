//! Local-area arcs: neighborhoods, efficient frontiers of orderings, and the
//! indicator coefficients that tie orderings to `x`.
//!
//! For an owner customer `u` with neighborhood `N_u` (closest first), a
//! triple `p = (s, S, v)` has start `s ∈ {u} ∪ N_u`, interior `S ⊆ N_u - s`
//! and an end `v` outside `N_u ∪ {u}` (customers or the end depot). The
//! frontier `R_p` keeps the orderings of `S` between `s` and `v` that are
//! Pareto-undominated in (cost, φ̂, φ - cost).

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::instance::Instance;
use crate::units::Tenths;

/// Closest-first neighborhoods, indexed by node. Depots get empty lists.
///
/// Members of `N_u` are the `ns` customers nearest to `u` by distance among
/// those `v` with `(u, v) ∈ E*`; ties go to the lower node index.
pub fn build_neighborhoods(inst: &Instance, ns: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); inst.num_nodes()];
    for u in inst.customers() {
        let mut cand: Vec<usize> = inst
            .customers()
            .filter(|&v| v != u && inst.has_edge(u, v))
            .collect();
        cand.sort_by_key(|&v| (inst.c(u, v), v));
        cand.truncate(ns);
        out[u] = cand;
    }
    out
}

/// One ordering `r` of an LA-arc triple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Ordering {
    pub seq: Vec<usize>,
    /// Sum of travel times (distance plus service) along `seq`.
    pub cost: Tenths,
    /// Latest departure from the first customer that never waits.
    pub phi: Tenths,
    /// Latest feasible departure lower bound: infeasible below it.
    pub phi_hat: Tenths,
    pub demand: i64,
}

impl Ordering {
    pub fn start(&self) -> usize {
        self.seq[0]
    }

    pub fn end(&self) -> usize {
        *self.seq.last().unwrap()
    }

    /// `true` if `self` is dominated by `other`.
    pub fn dominated_by(&self, other: &Ordering) -> bool {
        let a = self.cost >= other.cost;
        let b = self.phi_hat >= other.phi_hat;
        let c = self.phi - self.cost <= other.phi - other.cost;
        let strict = self.cost > other.cost
            || self.phi_hat > other.phi_hat
            || self.phi - self.cost < other.phi - other.cost;
        a && b && c && strict
    }
}

/// `(φ, φ̂)` of the two-element ordering `[s, v]`.
pub fn base_attributes(inst: &Instance, s: usize, v: usize) -> (Tenths, Tenths) {
    let t = inst.t(s, v);
    (
        inst.t_plus(s).min(inst.t_plus(v) + t),
        inst.t_minus(s).max(inst.t_minus(v) + t),
    )
}

/// `(φ, φ̂)` of `[s] + r⁻` where `r⁻` starts at `w`.
pub fn extend_attributes(inst: &Instance, s: usize, rest: &Ordering) -> (Tenths, Tenths) {
    let t = inst.t(s, rest.start());
    (
        inst.t_plus(s).min(rest.phi + t),
        inst.t_minus(s).max(rest.phi_hat + t),
    )
}

/// Departure time from the last customer of `r` when leaving the first with
/// `t` time remaining; `None` if that start is infeasible.
pub fn departure_time(inst: &Instance, r: &Ordering, t: Tenths) -> Option<Tenths> {
    if t.min(inst.t_plus(r.start())) < r.phi_hat {
        return None;
    }
    Some(t.min(r.phi) - r.cost)
}

/// Reference evaluation of the departure time by simulating the sequence.
pub fn departure_time_recursive(inst: &Instance, seq: &[usize], t: Tenths) -> Option<Tenths> {
    let u = seq[0];
    if seq.len() == 1 {
        return (t >= inst.t_minus(u)).then(|| t.min(inst.t_plus(u)));
    }
    if t < inst.t_minus(u) {
        return None;
    }
    let w = seq[1];
    departure_time_recursive(inst, &seq[1..], t.min(inst.t_plus(u)) - inst.t(u, w))
}

/// Removes dominated orderings in place; exact ties are all kept.
pub fn pareto_filter(mut rs: Vec<Ordering>) -> Vec<Ordering> {
    let keep: Vec<bool> = (0..rs.len())
        .map(|i| !(0..rs.len()).any(|j| j != i && rs[i].dominated_by(&rs[j])))
        .collect();
    let mut k = keep.into_iter();
    rs.retain(|_| k.next().unwrap());
    rs.sort_by(|a, b| {
        (a.cost, a.phi_hat, b.phi, &a.seq).cmp(&(b.cost, b.phi_hat, a.phi, &b.seq))
    });
    rs
}

/// Identifies a triple `p = (u_p, N_p, v_p)`; `interior` is sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PKey {
    pub start: usize,
    pub interior: Vec<usize>,
    pub end: usize,
}

/// All non-empty frontiers reachable from any owner neighborhood.
#[derive(Clone, Debug, Default)]
pub struct Frontiers {
    map: HashMap<PKey, Vec<Ordering>>,
}

impl Frontiers {
    pub fn get(&self, p: &PKey) -> &[Ordering] {
        self.map.get(p).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Entries sorted by key.
    pub fn sorted(&self) -> Vec<(&PKey, &Vec<Ordering>)> {
        let mut v: Vec<_> = self.map.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Cheapest ordering of `p` that can leave `u_p` with `t1` remaining and
    /// still leave `v_p` with at least `t2`; `None` stands for +∞.
    pub fn arc_cost_lookup(&self, p: &PKey, t1: Tenths, t2: Tenths) -> Option<Tenths> {
        arc_cost_lookup(self.get(p), t1, t2)
    }
}

/// Minimum cost over `rs` under the departure-time query.
pub fn arc_cost_lookup(rs: &[Ordering], t1: Tenths, t2: Tenths) -> Option<Tenths> {
    rs.iter()
        .filter(|r| t1 >= r.phi_hat && t2 <= t1.min(r.phi) - r.cost)
        .map(|r| r.cost)
        .min()
}

/// Frontier tables for one owner `u`: entry `[v][start][mask]` where start 0
/// is `u` and start `i + 1` is the `i`-th neighbor; masks range over `N_u`.
struct OwnerTables {
    ends: Vec<usize>,
    tables: Vec<Vec<Vec<Vec<Ordering>>>>,
}

fn end_nodes(inst: &Instance, u: usize, neigh: &[usize]) -> Vec<usize> {
    inst.customers()
        .filter(|&v| v != u && !neigh.contains(&v))
        .chain(std::iter::once(inst.end_depot()))
        .collect()
}

fn owner_tables(inst: &Instance, u: usize, neigh: &[usize]) -> OwnerTables {
    let k = neigh.len();
    let starts: Vec<usize> = std::iter::once(u).chain(neigh.iter().copied()).collect();
    let ends = end_nodes(inst, u, neigh);
    let nmask = 1usize << k;
    let cap = inst.capacity();

    let tables = ends
        .iter()
        .map(|&v| {
            let mut table: Vec<Vec<Vec<Ordering>>> = vec![vec![Vec::new(); nmask]; starts.len()];
            for mask in 0..nmask {
                for (si, &s) in starts.iter().enumerate() {
                    if si > 0 && mask & (1 << (si - 1)) != 0 {
                        continue;
                    }
                    let mut cand = Vec::new();
                    if mask == 0 {
                        if inst.has_edge(s, v) && inst.demand(s) + inst.demand(v) <= cap {
                            let (phi, phi_hat) = base_attributes(inst, s, v);
                            if phi_hat <= inst.t_plus(s) {
                                cand.push(Ordering {
                                    seq: vec![s, v],
                                    cost: inst.t(s, v),
                                    phi,
                                    phi_hat,
                                    demand: inst.demand(s) + inst.demand(v),
                                });
                            }
                        }
                    } else {
                        for (wi, &w) in neigh.iter().enumerate() {
                            if mask & (1 << wi) == 0 || !inst.has_edge(s, w) {
                                continue;
                            }
                            for rest in &table[wi + 1][mask & !(1 << wi)] {
                                let demand = rest.demand + inst.demand(s);
                                if demand > cap {
                                    continue;
                                }
                                let (phi, phi_hat) = extend_attributes(inst, s, rest);
                                if phi_hat > inst.t_plus(s) {
                                    continue;
                                }
                                let mut seq = Vec::with_capacity(rest.seq.len() + 1);
                                seq.push(s);
                                seq.extend_from_slice(&rest.seq);
                                cand.push(Ordering {
                                    seq,
                                    cost: rest.cost + inst.t(s, w),
                                    phi,
                                    phi_hat,
                                    demand,
                                });
                            }
                        }
                    }
                    table[si][mask] = pareto_filter(cand);
                }
            }
            table
        })
        .collect();
    OwnerTables { ends, tables }
}

fn mask_members(neigh: &[usize], mask: usize) -> Vec<usize> {
    let mut v: Vec<usize> = neigh
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &w)| w)
        .collect();
    v.sort_unstable();
    v
}

/// Runs the frontier dynamic program for every owner neighborhood.
pub fn compute_frontiers(inst: &Instance, neighborhoods: &[Vec<usize>]) -> Frontiers {
    let parts: Vec<Vec<(PKey, Vec<Ordering>)>> = inst
        .customers()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            let neigh = &neighborhoods[u];
            let ot = owner_tables(inst, u, neigh);
            let starts: Vec<usize> = std::iter::once(u).chain(neigh.iter().copied()).collect();
            let mut out = Vec::new();
            for (vi, &v) in ot.ends.iter().enumerate() {
                for (si, &s) in starts.iter().enumerate() {
                    for (mask, rs) in ot.tables[vi][si].iter().enumerate() {
                        if !rs.is_empty() {
                            let key = PKey {
                                start: s,
                                interior: mask_members(neigh, mask),
                                end: v,
                            };
                            out.push((key, rs.clone()));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut map = HashMap::new();
    for part in parts {
        for (k, v) in part {
            map.entry(k).or_insert(v);
        }
    }
    Frontiers { map }
}

/// Orderings `R_u` with the end customer clipped, plus the neighborhood data
/// needed to compute indicator coefficients.
#[derive(Clone, Debug, Default)]
pub struct LaArcs {
    /// `N^⊙_u`, closest first; indexed by node.
    pub neighborhoods: Vec<Vec<usize>>,
    /// `R_u` as clipped sequences starting with `u`, sorted and unique.
    pub orderings: Vec<Vec<Vec<usize>>>,
}

impl LaArcs {
    /// Builds neighborhoods of size `ns`, runs the frontier DP and collects `R_u`.
    pub fn new(inst: &Instance, ns: usize) -> Self {
        let neighborhoods = build_neighborhoods(inst, ns);
        Self::with_neighborhoods(inst, neighborhoods)
    }

    pub fn with_neighborhoods(inst: &Instance, neighborhoods: Vec<Vec<usize>>) -> Self {
        let custs: Vec<usize> = inst.customers().collect();
        let per_u: Vec<(usize, Vec<Vec<usize>>)> = custs
            .par_iter()
            .map(|&u| {
                let ot = owner_tables(inst, u, &neighborhoods[u]);
                let mut set: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
                for table in &ot.tables {
                    for rs in &table[0] {
                        for r in rs {
                            set.insert(r.seq[..r.seq.len() - 1].to_vec(), ());
                        }
                    }
                }
                (u, set.into_keys().collect())
            })
            .collect();
        let mut orderings = vec![Vec::new(); inst.num_nodes()];
        for (u, rs) in per_u {
            orderings[u] = rs;
        }
        LaArcs {
            neighborhoods,
            orderings,
        }
    }

    /// Collects `R_u` from already computed frontiers.
    pub fn from_frontiers(
        inst: &Instance,
        neighborhoods: Vec<Vec<usize>>,
        frontiers: &Frontiers,
    ) -> Self {
        let mut sets: Vec<BTreeMap<Vec<usize>, ()>> = vec![BTreeMap::new(); inst.num_nodes()];
        for (key, rs) in &frontiers.map {
            let u = key.start;
            let neigh = &neighborhoods[u];
            let owned = !neigh.contains(&key.end)
                && key.end != u
                && key.interior.iter().all(|w| neigh.contains(w));
            if !owned {
                continue;
            }
            for r in rs {
                sets[u].insert(r.seq[..r.seq.len() - 1].to_vec(), ());
            }
        }
        LaArcs {
            neighborhoods,
            orderings: sets.into_iter().map(|s| s.into_keys().collect()).collect(),
        }
    }

    /// Full neighborhood size `|N^⊙_u|`.
    pub fn max_size(&self, u: usize) -> usize {
        self.neighborhoods[u].len()
    }

    /// Rank of `w` relative to owner `u`: 0 for `u`, `i + 1` for the
    /// `i`-th neighbor, `None` outside the neighborhood.
    pub fn rank(&self, u: usize, w: usize) -> Option<usize> {
        if w == u {
            return Some(0);
        }
        self.neighborhoods[u]
            .iter()
            .position(|&x| x == w)
            .map(|i| i + 1)
    }

    /// Longest prefix of `r` made of `u` and its `k` closest neighbors.
    pub fn visible_prefix<'a>(&self, u: usize, r: &'a [usize], k: usize) -> &'a [usize] {
        let len = r
            .iter()
            .position(|&w| self.rank(u, w).map_or(true, |x| x > k))
            .unwrap_or(r.len());
        &r[..len]
    }

    /// Pairs `(w, v)` with `a^k_{wvr} = 1`.
    pub fn local_pairs(&self, u: usize, r: &[usize], k: usize) -> Vec<(usize, usize)> {
        self.visible_prefix(u, r, k)
            .windows(2)
            .map(|p| (p[0], p[1]))
            .collect()
    }

    /// The `w` with `a^k_{w*r} = 1`.
    pub fn final_customer(&self, u: usize, r: &[usize], k: usize) -> usize {
        *self.visible_prefix(u, r, k).last().unwrap()
    }

    /// Indices into `R_u` of one representative per coefficient signature
    /// under an enforced neighborhood of size `k`, with each representative's
    /// visible prefix. The representative is the lexicographically lowest
    /// sequence of its group.
    pub fn representatives(&self, u: usize, k: usize) -> Vec<(usize, Vec<usize>)> {
        let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for (i, r) in self.orderings[u].iter().enumerate() {
            let sig = self.visible_prefix(u, r, k).to_vec();
            seen.entry(sig).or_insert(i);
        }
        let mut v: Vec<(usize, Vec<usize>)> = seen.into_iter().map(|(s, i)| (i, s)).collect();
        v.sort();
        v
    }

    pub fn total_orderings(&self) -> usize {
        self.orderings.iter().map(|r| r.len()).sum()
    }
}

/// One line of the frontier debug dump.
pub fn dump_line(key: &PKey, r: &Ordering) -> String {
    let interior: Vec<String> = key.interior.iter().map(|w| w.to_string()).collect();
    let seq: Vec<String> = r.seq.iter().map(|w| w.to_string()).collect();
    format!(
        "{} | {{{}}} | {} | {} | {} | {} | {}",
        key.start,
        interior.join(","),
        key.end,
        seq.join("-"),
        r.cost,
        r.phi,
        r.phi_hat
    )
}
