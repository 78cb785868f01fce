mod common;

use common::*;
use ladisc_core::discovery::{run, run_baseline, Config};
use ladisc_core::la_arcs::{
    arc_cost_lookup, build_neighborhoods, departure_time, departure_time_recursive, Ordering,
};
use ladisc_core::solver::{HighsBackend, Status};
use ladisc_core::{compute_frontiers, Instance, PKey, Tenths};
use rand::seq::SliceRandom;
use rand::Rng;

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << items.len())
        .map(|m| {
            let mut s: Vec<usize> = (0..items.len()).filter(|i| m & (1 << i) != 0).map(|i| items[i]).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Every key an owner can produce, including ones whose frontier is empty.
pub fn owner_keys(inst: &Instance, neigh: &[Vec<usize>]) -> Vec<PKey> {
    let mut keys = Vec::new();
    for u in inst.customers() {
        let nu = &neigh[u];
        let ends: Vec<usize> = inst
            .customers()
            .filter(|&v| v != u && !nu.contains(&v))
            .chain([inst.end_depot()])
            .collect();
        let starts: Vec<usize> = std::iter::once(u).chain(nu.iter().copied()).collect();
        for &s in &starts {
            let pool: Vec<usize> = nu.iter().copied().filter(|&w| w != s).collect();
            for interior in subsets(&pool) {
                for &v in &ends {
                    keys.push(PKey { start: s, interior: interior.clone(), end: v });
                }
            }
        }
    }
    keys.sort();
    keys.dedup();
    keys
}

fn as_attrs(rs: &[Ordering]) -> Vec<Attr> {
    let mut v: Vec<Attr> = rs
        .iter()
        .map(|r| Attr { seq: r.seq.clone(), cost: r.cost, phi: r.phi, phi_hat: r.phi_hat })
        .collect();
    v.sort();
    v
}

#[test]
fn frontiers_match_brute_force() {
    for seed in 0..6 {
        let inst = random_instance(seed, Synth::small(8));
        let neigh = build_neighborhoods(&inst, 4);
        let fr = compute_frontiers(&inst, &neigh);
        for key in owner_keys(&inst, &neigh) {
            let got = as_attrs(fr.get(&key));
            let want = brute_frontier(&inst, key.start, &key.interior, key.end);
            assert_eq!(got, want, "seed {seed}, key {key:?}");
        }
    }
}

#[test]
fn frontier_attributes_agree_with_prefix_sums() {
    let inst = solomon("r101", 12);
    let fr = compute_frontiers(&inst, &build_neighborhoods(&inst, 4));
    assert!(!fr.is_empty());
    for (_, rs) in fr.sorted() {
        for r in rs {
            let a = attributes(&inst, &r.seq);
            assert_eq!((r.cost, r.phi, r.phi_hat), (a.cost, a.phi, a.phi_hat), "{:?}", r.seq);
            assert!(sequence_feasible(&inst, &r.seq));
        }
    }
}

#[test]
fn departure_time_closed_form_matches_recursion() {
    let mut g = rng(7);
    for seed in 0..5 {
        let inst = random_instance(100 + seed, Synth::small(8));
        let custs: Vec<usize> = inst.customers().collect();
        for _ in 0..4000 {
            let len = g.gen_range(2..=5);
            let seq: Vec<usize> = custs.choose_multiple(&mut g, len).copied().collect();
            // the closed form is only defined for orderings with some feasible start
            if !sequence_feasible(&inst, &seq) {
                continue;
            }
            let a = attributes(&inst, &seq);
            let r = Ordering { seq: seq.clone(), cost: a.cost, phi: a.phi, phi_hat: a.phi_hat, demand: 0 };
            let t = Tenths(g.gen_range(-100..=inst.horizon().raw() + 100));
            assert_eq!(departure_time(&inst, &r, t), departure_time_recursive(&inst, &seq, t), "{seq:?} t={t}");
        }
    }
}

#[test]
fn lookup_is_min_over_departure_times() {
    let inst = random_instance(3, Synth::small(8));
    let fr = compute_frontiers(&inst, &build_neighborhoods(&inst, 3));
    let mut g = rng(11);
    for (_, rs) in fr.sorted() {
        for _ in 0..5 {
            let t1 = Tenths(g.gen_range(0..=inst.horizon().raw()));
            let t2 = Tenths(g.gen_range(0..=inst.horizon().raw()));
            let want = rs
                .iter()
                .filter(|r| departure_time_recursive(&inst, &r.seq, t1).is_some_and(|d| d >= t2))
                .map(|r| r.cost)
                .min();
            assert_eq!(arc_cost_lookup(rs, t1, t2), want);
        }
    }
}

#[test]
fn edge_set_matches_forward_probe() {
    let mut insts: Vec<Instance> = (0..5).map(|s| random_instance(200 + s, Synth::small(10))).collect();
    insts.push(solomon("r101", 25));
    insts.push(solomon("c101", 25));
    for inst in &insts {
        let m = inst.num_nodes();
        let mut want = Vec::new();
        for u in 0..m {
            for v in 0..m {
                if edge_oracle(inst, u, v) {
                    want.push((u, v));
                }
            }
        }
        let mut got = inst.edges().to_vec();
        got.sort_unstable();
        assert_eq!(got, want, "{}", inst.name);
    }
}

#[test]
fn route_check_agrees_with_forward_time() {
    let mut g = rng(5);
    let inst = random_instance(9, Synth::small(7));
    let custs: Vec<usize> = inst.customers().collect();
    for _ in 0..2000 {
        let len = g.gen_range(0..=4);
        let mut route = vec![0];
        route.extend(custs.choose_multiple(&mut g, len));
        route.push(inst.end_depot());
        let rc = inst.route_check(&route).unwrap();
        assert_eq!(rc.feasible, forward_feasible(&inst, &route), "{route:?}");
        assert_eq!(rc.cost, route_cost(&inst, &route));
    }
}

#[test]
fn milp_matches_enumeration() {
    let b = HighsBackend::default();
    let cfg = Config { milp_time_limit: 60.0, ..Config::default() };
    for seed in 0..4 {
        let inst = random_instance(300 + seed, Synth::small(5));
        let want = brute_force_optimum(&inst).expect("singleton routes are feasible");
        for (name, milp) in [
            ("la", run(&inst, &b, &cfg).unwrap().milp.unwrap()),
            ("baseline", run_baseline(&inst, &b, &cfg).unwrap().milp.unwrap()),
        ] {
            assert_eq!(milp.status, Status::Optimal);
            assert_eq!(Tenths::from_f64_round(milp.objective), want, "{name} seed {seed}");
            let total: Tenths = milp.routes.iter().map(|r| route_cost(&inst, r)).sum();
            assert_eq!(total, want);
            for r in &milp.routes {
                assert!(forward_feasible(&inst, r), "{r:?}");
            }
            let mut seen: Vec<usize> = milp.routes.iter().flat_map(|r| r[1..r.len() - 1].to_vec()).collect();
            seen.sort_unstable();
            assert_eq!(seen, inst.customers().collect::<Vec<_>>());
        }
    }
}
