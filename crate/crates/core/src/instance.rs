//! Solomon instances, derived matrices and the feasible edge set.
//!
//! Nodes are indexed `0 = α` (start depot), `1..=n` customers in file order,
//! `n + 1 = ᾱ` (end depot). Times are *remaining* times: a customer with
//! window `[ready, due]` gets `t⁺ = t0 - ready` and `t⁻ = t0 - due`, and the
//! clock counts down from `t0` at the start depot.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Tenths;

/// One row of a Solomon customer table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub demand: i64,
    pub ready: Tenths,
    pub due: Tenths,
    pub service: Tenths,
}

/// Result of [`Instance::route_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouteCheck {
    pub feasible: bool,
    pub cost: Tenths,
    pub reason: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    depot: Customer,
    rows: Vec<Customer>,
    capacity: i64,
    horizon: Tenths,

    demand: Vec<i64>,
    t_plus: Vec<Tenths>,
    t_minus: Vec<Tenths>,
    raw_t_minus: Vec<Tenths>,
    cost: Vec<Tenths>,
    time: Vec<Tenths>,
    edge_mask: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl Instance {
    /// Builds an instance from a depot row and customer rows.
    pub fn new(
        name: impl Into<String>,
        depot: Customer,
        customers: Vec<Customer>,
        capacity: i64,
    ) -> Result<Self> {
        if capacity <= 0 {
            return Err(Error::InvalidArgument("vehicle capacity must be positive".into()));
        }
        let mut seen = HashSet::new();
        seen.insert(depot.id);
        for c in &customers {
            if !seen.insert(c.id) {
                return Err(Error::InvalidArgument(format!("duplicate customer id {}", c.id)));
            }
            if c.demand < 0 || c.service < Tenths::ZERO || c.due < c.ready {
                return Err(Error::InvalidArgument(format!(
                    "customer {} has an invalid demand, service time or window",
                    c.id
                )));
            }
        }
        let horizon = depot.due;
        let mut inst = Instance {
            name: name.into(),
            depot,
            rows: customers,
            capacity,
            horizon,
            demand: vec![],
            t_plus: vec![],
            t_minus: vec![],
            raw_t_minus: vec![],
            cost: vec![],
            time: vec![],
            edge_mask: vec![],
            edges: vec![],
        };
        inst.rebuild();
        Ok(inst)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_solomon(&text)
    }

    fn rebuild(&mut self) {
        let n = self.rows.len();
        let m = n + 2;
        let t0 = self.horizon;
        let mut pts = Vec::with_capacity(m);
        let mut service = Vec::with_capacity(m);
        self.demand = Vec::with_capacity(m);
        self.t_plus = Vec::with_capacity(m);
        self.raw_t_minus = Vec::with_capacity(m);

        pts.push((self.depot.x, self.depot.y));
        service.push(Tenths::ZERO);
        self.demand.push(0);
        self.t_plus.push(t0);
        self.raw_t_minus.push(t0);
        for c in &self.rows {
            pts.push((c.x, c.y));
            service.push(c.service);
            self.demand.push(c.demand);
            self.t_plus.push(t0 - c.ready);
            self.raw_t_minus.push(t0 - c.due);
        }
        pts.push((self.depot.x, self.depot.y));
        service.push(Tenths::ZERO);
        self.demand.push(0);
        self.t_plus.push(t0);
        self.raw_t_minus.push(Tenths::ZERO);

        self.cost = vec![Tenths::ZERO; m * m];
        self.time = vec![Tenths::ZERO; m * m];
        for u in 0..m {
            for v in 0..m {
                let c = Tenths::euclid_floor(pts[u].0, pts[u].1, pts[v].0, pts[v].1);
                self.cost[u * m + v] = c;
                self.time[u * m + v] = c + service[u];
            }
        }

        // A customer must keep enough time to get back to the depot.
        let end = n + 1;
        self.t_minus = self.raw_t_minus.clone();
        for u in 1..=n {
            let back = self.time[u * m + end];
            if self.t_minus[u] < back {
                self.t_minus[u] = back;
            }
        }

        self.build_edges();
    }

    fn build_edges(&mut self) {
        let m = self.num_nodes();
        let start = 0;
        let end = self.end_depot();
        let t0 = self.horizon;

        // τ on arrival at u when driving straight from α, if feasible
        let first_leg: Vec<Option<Tenths>> = (0..m)
            .map(|u| {
                if u == start {
                    return Some(t0);
                }
                let tau = (t0 - self.t(start, u)).min(self.t_plus[u]);
                (tau >= self.t_minus[u]).then_some(tau)
            })
            .collect();
        let mut mask = vec![false; m * m];
        let mut edges = Vec::new();

        for u in 0..m {
            if u == end {
                continue;
            }
            for v in 0..m {
                if v == u || v == start || (u == start && v == end) {
                    continue;
                }
                if self.demand[u] + self.demand[v] > self.capacity {
                    continue;
                }
                let Some(tau_u) = first_leg[u] else { continue };
                let ok = if v == end {
                    tau_u - self.t(u, end) >= Tenths::ZERO
                } else {
                    let tau_v = (tau_u - self.t(u, v)).min(self.t_plus[v]);
                    tau_v >= self.t_minus[v] && tau_v - self.t(v, end) >= Tenths::ZERO
                };
                if ok {
                    mask[u * m + v] = true;
                    edges.push((u, v));
                }
            }
        }
        self.edge_mask = mask;
        self.edges = edges;
    }

    /// Keeps the first `n` customers in file order.
    pub fn truncate(&self, n: usize) -> Result<Instance> {
        if n == 0 || n > self.rows.len() {
            return Err(Error::InvalidArgument(format!(
                "customer count {n} outside 1..={}",
                self.rows.len()
            )));
        }
        let mut out = self.clone();
        out.rows.truncate(n);
        out.rebuild();
        Ok(out)
    }

    #[inline]
    pub fn num_customers(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.rows.len() + 2
    }

    #[inline]
    pub fn start_depot(&self) -> usize {
        0
    }

    #[inline]
    pub fn end_depot(&self) -> usize {
        self.rows.len() + 1
    }

    pub fn customers(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.rows.len()
    }

    #[inline]
    pub fn is_customer(&self, u: usize) -> bool {
        u >= 1 && u <= self.rows.len()
    }

    pub fn customer_rows(&self) -> &[Customer] {
        &self.rows
    }

    pub fn depot(&self) -> &Customer {
        &self.depot
    }

    /// File id of a node (0 for both depot copies).
    pub fn file_id(&self, u: usize) -> usize {
        if self.is_customer(u) {
            self.rows[u - 1].id
        } else {
            self.depot.id
        }
    }

    pub fn capacity(&self) -> i64 {
        self.capacity
    }

    pub fn horizon(&self) -> Tenths {
        self.horizon
    }

    #[inline]
    pub fn demand(&self, u: usize) -> i64 {
        self.demand[u]
    }

    pub fn total_demand(&self) -> i64 {
        self.demand.iter().sum()
    }

    /// Latest remaining time at `u`, `t⁺_u`.
    #[inline]
    pub fn t_plus(&self, u: usize) -> Tenths {
        self.t_plus[u]
    }

    /// Earliest remaining time at `u`, `t⁻_u`, raised so the depot stays reachable.
    #[inline]
    pub fn t_minus(&self, u: usize) -> Tenths {
        self.t_minus[u]
    }

    /// Truncated distance.
    #[inline]
    pub fn c(&self, u: usize, v: usize) -> Tenths {
        self.cost[u * self.num_nodes() + v]
    }

    /// Travel time including service at `u`.
    #[inline]
    pub fn t(&self, u: usize, v: usize) -> Tenths {
        self.time[u * self.num_nodes() + v]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_mask[u * self.num_nodes() + v]
    }

    /// E*, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Minimum vehicle count `ceil(Σ d / d0)`.
    pub fn min_vehicles(&self) -> i64 {
        let d = self.total_demand();
        (d + self.capacity - 1) / self.capacity
    }

    /// Checks a depot-to-depot route against the original windows.
    pub fn route_check(&self, route: &[usize]) -> Result<RouteCheck> {
        let end = self.end_depot();
        if route.len() < 2 || route[0] != 0 || route[route.len() - 1] != end {
            return Err(Error::InvalidArgument("route must start at α and end at ᾱ".into()));
        }
        let cost: Tenths = route.windows(2).map(|w| self.c(w[0], w[1])).sum();
        let fail = |why: String| {
            Ok(RouteCheck {
                feasible: false,
                cost,
                reason: Some(why),
            })
        };

        let interior = &route[1..route.len() - 1];
        let mut seen = HashSet::new();
        for &u in interior {
            if !self.is_customer(u) {
                return fail(format!("node {u} is not a customer"));
            }
            if !seen.insert(u) {
                return fail(format!("customer {u} visited twice"));
            }
        }
        let load: i64 = interior.iter().map(|&u| self.demand[u]).sum();
        if load > self.capacity {
            return fail(format!("load {load} exceeds capacity {}", self.capacity));
        }
        let mut tau = self.horizon;
        for w in route.windows(2) {
            let (u, v) = (w[0], w[1]);
            tau = (tau - self.t(u, v)).min(self.t_plus[v]);
            if tau < self.raw_t_minus[v] {
                return fail(format!("window of node {v} missed"));
            }
        }
        Ok(RouteCheck {
            feasible: true,
            cost,
            reason: None,
        })
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} customers, capacity {}, horizon {})",
            self.name,
            self.num_customers(),
            self.capacity,
            self.horizon
        )
    }
}

/// Parses the canonical Solomon text layout.
pub fn parse_solomon(text: &str) -> Result<Instance> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut it = lines.iter().peekable();

    let &(_, name) = it.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let name = name.to_string();

    let (ln, l) = *it.next().ok_or_else(|| Error::parse(1, "missing VEHICLE section"))?;
    if !l.eq_ignore_ascii_case("VEHICLE") {
        return Err(Error::parse(ln, format!("expected VEHICLE, found {l:?}")));
    }
    let (ln, l) = *it.next().ok_or_else(|| Error::parse(ln, "missing vehicle header"))?;
    let upper = l.to_ascii_uppercase();
    if !(upper.contains("NUMBER") && upper.contains("CAPACITY")) {
        return Err(Error::parse(ln, "expected NUMBER CAPACITY header"));
    }
    let (ln, l) = *it.next().ok_or_else(|| Error::parse(ln, "missing vehicle data"))?;
    let fields: Vec<&str> = l.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::parse(ln, "vehicle line needs count and capacity"));
    }
    let _count: i64 = fields[0]
        .parse()
        .map_err(|_| Error::parse(ln, format!("non-numeric vehicle count {:?}", fields[0])))?;
    let capacity: i64 = fields[1]
        .parse()
        .map_err(|_| Error::parse(ln, format!("non-numeric capacity {:?}", fields[1])))?;

    let (ln, l) = *it.next().ok_or_else(|| Error::parse(ln, "missing CUSTOMER section"))?;
    if !l.eq_ignore_ascii_case("CUSTOMER") {
        return Err(Error::parse(ln, format!("expected CUSTOMER, found {l:?}")));
    }
    let (ln, l) = *it.next().ok_or_else(|| Error::parse(ln, "missing customer header"))?;
    if !l.to_ascii_uppercase().starts_with("CUST") {
        return Err(Error::parse(ln, "expected customer table header"));
    }

    let mut rows = Vec::new();
    let mut last_line = ln;
    for &(ln, l) in it {
        last_line = ln;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 7 {
            return Err(Error::parse(ln, format!("expected 7 fields, found {}", f.len())));
        }
        let int = |s: &str, what: &str| -> Result<i64> {
            s.parse::<i64>()
                .or_else(|_| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.fract() == 0.0)
                        .map(|v| v as i64)
                        .ok_or(())
                })
                .map_err(|_| Error::parse(ln, format!("non-numeric {what} {s:?}")))
        };
        let float = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(ln, format!("non-numeric {what} {s:?}")))
        };
        let time = |s: &str, what: &str| -> Result<Tenths> {
            Tenths::parse(s).ok_or_else(|| Error::parse(ln, format!("non-numeric {what} {s:?}")))
        };
        let id = int(f[0], "customer id")?;
        if id < 0 {
            return Err(Error::parse(ln, "negative customer id"));
        }
        let c = Customer {
            id: id as usize,
            x: float(f[1], "x coordinate")?,
            y: float(f[2], "y coordinate")?,
            demand: int(f[3], "demand")?,
            ready: time(f[4], "ready time")?,
            due: time(f[5], "due date")?,
            service: time(f[6], "service time")?,
        };
        rows.push((ln, c));
    }

    let mut rows = rows.into_iter();
    let (dln, depot) = rows
        .next()
        .ok_or_else(|| Error::parse(last_line, "missing depot row"))?;
    if depot.id != 0 {
        return Err(Error::parse(dln, "first row must be the depot (id 0)"));
    }
    let mut seen = HashSet::from([0usize]);
    let mut customers = Vec::new();
    for (ln, c) in rows {
        if !seen.insert(c.id) {
            return Err(Error::parse(ln, format!("duplicate customer id {}", c.id)));
        }
        if c.demand < 0 || c.due < c.ready || c.service < Tenths::ZERO {
            return Err(Error::parse(ln, "invalid demand, window or service time"));
        }
        customers.push(c);
    }
    Instance::new(name, depot, customers, capacity)
}
