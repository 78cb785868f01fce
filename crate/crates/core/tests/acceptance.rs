//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails. Run with
//! `cargo test --release -p ladisc-core --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::*;
use ladisc_core::buckets::{Resource, Thresholds};
use ladisc_core::discovery::{
    run, run_baseline, BaselineResult, Config, Discovery, IterationRecord, Parameterization, Session,
};
use ladisc_core::la_arcs::{build_neighborhoods, departure_time, departure_time_recursive};
use ladisc_core::solver::{Backend, HighsBackend, Status};
use ladisc_core::{compute_frontiers, Instance, LaArcs, PKey, Tenths};
use rand::Rng;

const TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Timed<T> {
    value: T,
    secs: f64,
}

fn timed<T>(f: impl FnOnce() -> T) -> Timed<T> {
    let t = Instant::now();
    let value = f();
    Timed { value, secs: t.elapsed().as_secs_f64() }
}

/// Both methods on one Solomon file at 25 customers.
struct Pair {
    la: Timed<Discovery>,
    base: Timed<BaselineResult>,
}

impl Pair {
    fn la_obj(&self) -> Option<f64> {
        let m = self.la.value.milp.as_ref()?;
        (m.status == Status::Optimal).then_some(m.objective)
    }

    fn base_obj(&self) -> Option<f64> {
        let m = self.base.value.milp.as_ref()?;
        (m.status == Status::Optimal).then_some(m.objective)
    }
}

struct Suite {
    backend: HighsBackend,
    pairs: BTreeMap<String, Pair>,
    /// Every refinement log produced, for the monotonicity check.
    logs: Vec<(String, Vec<IterationRecord>)>,
    /// `(label, before, after)` for every verified contraction.
    contractions: Vec<(String, f64, f64)>,
}

impl Suite {
    fn pair(&mut self, name: &str) -> &Pair {
        if !self.pairs.contains_key(name) {
            let inst = solomon(name, 25);
            let cfg = Config::default();
            let la = timed(|| run(&inst, &self.backend, &cfg).expect("la run"));
            let base = timed(|| run_baseline(&inst, &self.backend, &cfg).expect("baseline run"));
            self.logs.push((format!("{name}-25"), la.value.log.clone()));
            eprintln!(
                "  {name}-25: la {:?} in {:.1}s, baseline {:?} in {:.1}s",
                la.value.milp.as_ref().map(|m| m.objective),
                la.secs,
                base.value.milp.as_ref().map(|m| m.objective),
                base.secs
            );
            self.pairs.insert(name.to_string(), Pair { la, base });
        }
        &self.pairs[name]
    }

    /// LA run with every contraction re-solved.
    fn verified_run(&mut self, inst: &Instance, cfg: &Config) -> Discovery {
        let cfg = Config { verify_contraction: true, ..cfg.clone() };
        let d = run(inst, &self.backend, &cfg).expect("la run");
        for r in &d.log {
            if let Some(after) = r.contracted_objective {
                self.contractions.push((format!("{} iter {}", inst.name, r.iteration), r.lp_objective, after));
            }
        }
        if let Some((before, after)) = d.final_contraction {
            self.contractions.push((format!("{} final", inst.name), before, after));
        }
        self.logs.push((inst.name.clone(), d.log.clone()));
        d
    }
}

fn fixtures(s: &mut Suite) -> Outcome {
    let expected = [("r101", 617.1), ("c101", 191.3), ("c105", 191.3), ("c106", 191.3), ("rc101", 461.1)];
    let mut bad = Vec::new();
    let mut slowest: f64 = 0.0;
    for (name, want) in expected {
        let p = s.pair(name);
        slowest = slowest.max(p.la.secs).max(p.base.secs);
        for (label, obj, secs) in [("la", p.la_obj(), p.la.secs), ("baseline", p.base_obj(), p.base.secs)] {
            let ok = obj.is_some_and(|o| (o - want).abs() <= 0.1 + TOL) && secs < 120.0;
            if !ok {
                bad.push(format!("{name}/{label}: {obj:?} in {secs:.1}s (want {want})"));
            }
        }
    }
    if bad.is_empty() {
        outcome(true, format!("5 files x 2 methods, slowest run {slowest:.1}s"))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn root_lp(s: &mut Suite) -> Outcome {
    let p = s.pair("rc101");
    let (ours, base) = (p.la.value.lp_obj, p.base.value.lp_obj);
    let pass = ours >= base + 30.0 && (ours - 402.8).abs() <= 5.0;
    outcome(pass, format!("la-disc LP {ours:.2}, baseline LP {base:.2}, reference 402.8"))
}

fn cross_validation(s: &mut Suite) -> Outcome {
    let mut compared = 0;
    let mut bad = Vec::new();
    let mut skipped = Vec::new();
    for i in 1..=9 {
        let name = format!("c10{i}");
        let p = s.pair(&name);
        match (p.la_obj(), p.base_obj()) {
            (Some(a), Some(b)) if p.la.secs <= 1000.0 && p.base.secs <= 1000.0 => {
                compared += 1;
                if (a - b).abs() > 0.05 + TOL {
                    bad.push(format!("{name}: {a} vs {b}"));
                }
            }
            _ => skipped.push(name),
        }
    }
    let pass = bad.is_empty() && compared > 0;
    outcome(
        pass,
        format!("c100 family: {compared} compared, skipped {:?}, mismatches {:?}", skipped, bad),
    )
}

fn frontier_oracle() -> Outcome {
    let t = Instant::now();
    let mut keys = 0usize;
    let mut orderings = 0usize;
    let mut bad = Vec::new();
    for seed in 0..50u64 {
        let inst = random_instance(1000 + seed, Synth::small(8));
        let neigh = build_neighborhoods(&inst, 4);
        let fr = compute_frontiers(&inst, &neigh);
        for key in all_keys(&inst, &neigh) {
            let mut got: Vec<Attr> = fr
                .get(&key)
                .iter()
                .map(|r| Attr { seq: r.seq.clone(), cost: r.cost, phi: r.phi, phi_hat: r.phi_hat })
                .collect();
            got.sort();
            let want = brute_frontier(&inst, key.start, &key.interior, key.end);
            keys += 1;
            orderings += want.len();
            if got != want && bad.len() < 3 {
                bad.push(format!("seed {seed} {key:?}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 60.0,
        format!("50 instances, {keys} triples, {orderings} frontier orderings, {secs:.1}s; mismatches {bad:?}"),
    )
}

fn all_keys(inst: &Instance, neigh: &[Vec<usize>]) -> Vec<PKey> {
    let mut keys = Vec::new();
    for u in inst.customers() {
        let nu = &neigh[u];
        let ends: Vec<usize> = inst
            .customers()
            .filter(|&v| v != u && !nu.contains(&v))
            .chain([inst.end_depot()])
            .collect();
        for s in std::iter::once(u).chain(nu.iter().copied()) {
            let pool: Vec<usize> = nu.iter().copied().filter(|&w| w != s).collect();
            for m in 0..1usize << pool.len() {
                let mut interior: Vec<usize> =
                    (0..pool.len()).filter(|i| m & (1 << i) != 0).map(|i| pool[i]).collect();
                interior.sort_unstable();
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

fn recursion_equivalence() -> Outcome {
    let mut g = rng(42);
    let mut pairs = 0usize;
    let mut feasible = 0usize;
    let mut bad = Vec::new();
    let mut seed = 0;
    while pairs < 20_000 {
        let inst = random_instance(5000 + seed, Synth::small(8));
        seed += 1;
        let fr = compute_frontiers(&inst, &build_neighborhoods(&inst, 4));
        let h = inst.horizon().raw();
        for (_, rs) in fr.sorted() {
            for r in rs {
                let t = Tenths(g.gen_range(-50..=h + 50));
                let a = departure_time(&inst, r, t);
                let b = departure_time_recursive(&inst, &r.seq, t);
                pairs += 1;
                feasible += a.is_some() as usize;
                if a != b && bad.len() < 3 {
                    bad.push(format!("{:?} t={t}: {a:?} vs {b:?}", r.seq));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{pairs} pairs ({feasible} feasible starts); mismatches {bad:?}"))
}

fn monotone(s: &mut Suite) -> Outcome {
    for seed in 0..5 {
        let inst = random_instance(7000 + seed, Synth::small(10));
        s.verified_run(&inst, &Config { milp_time_limit: 60.0, ..Config::default() });
    }
    let mut bad = Vec::new();
    let mut iters = 0;
    for (label, log) in &s.logs {
        iters += log.len();
        for w in log.windows(2) {
            if w[1].lp_objective < w[0].lp_objective - TOL {
                bad.push(format!("{label} iter {}: {} < {}", w[1].iteration, w[1].lp_objective, w[0].lp_objective));
            }
        }
    }
    for (label, before, after) in &s.contractions {
        if (after - before).abs() > TOL {
            bad.push(format!("{label}: contraction {before} -> {after}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} runs, {iters} iterations, {} contractions re-solved; violations {:?}",
            s.logs.len(),
            s.contractions.len(),
            bad
        ),
    )
}

fn refinement_invariance(backend: &dyn Backend) -> Outcome {
    let cfg = Config { iter_max: 400, ..Config::default() };
    let mut details = Vec::new();
    let mut pass = true;
    for (seed, n) in [(11u64, 8usize), (12, 9), (13, 10)] {
        let inst = random_instance(seed, Synth::narrow(n));
        let arcs = LaArcs::new(&inst, cfg.ns);
        let sess = Session { inst: &inst, arcs: &arcs, backend, cfg: &cfg };
        let p0 = Parameterization::initial(&inst, &arcs, cfg.ds, cfg.ts).unwrap();
        let r = sess.refine(p0).unwrap();
        let converged = r.log.len() <= cfg.iter_max && !r.hit_cap;
        let coarse = sess.solve_star(&r.param).unwrap().1.objective;
        let fine_p = Parameterization {
            sizes: r.param.sizes.clone(),
            cap: Thresholds::finest(&inst, Resource::Capacity),
            time: Thresholds::finest(&inst, Resource::Time),
        };
        let (fm, fine) = sess.solve_star(&fine_p).unwrap();
        let fine = fine.objective;
        let ok = converged && (fine - coarse).abs() <= TOL;
        pass &= ok;
        details.push(format!(
            "n={n}: {} iters, converged {converged}, {coarse:.6} vs finest {fine:.6} ({} cols)",
            r.log.len(),
            fm.lp.num_cols()
        ));
    }
    outcome(pass, details.join("; "))
}

fn brute_force(s: &mut Suite) -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..20u64 {
        let inst = random_instance(9000 + seed, Synth::small(5));
        let want = brute_force_optimum(&inst).expect("singleton routes are feasible");
        let d = s.verified_run(&inst, &Config { milp_time_limit: 60.0, ..Config::default() });
        let m = d.milp.expect("milp requested");
        let got = (m.status == Status::Optimal).then(|| Tenths::from_f64_round(m.objective));
        if got != Some(want) {
            bad.push(format!("seed {seed}: {got:?} vs {want}"));
        }
    }
    outcome(bad.is_empty(), format!("20 instances; mismatches {bad:?}"))
}

fn main() {
    // cargo passes harness flags such as --list; honor the listing request
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut s = Suite { backend: HighsBackend::default(), pairs: BTreeMap::new(), logs: Vec::new(), contractions: Vec::new() };
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let mut step = |name: &'static str, f: &mut dyn FnMut(&mut Suite) -> Outcome, s: &mut Suite| {
        let t = Instant::now();
        let o = f(s);
        eprintln!("{name} done in {:.1}s", t.elapsed().as_secs_f64());
        results.push((name, o));
    };
    step("fixture optima (25 customers)", &mut fixtures, &mut s);
    step("root LP tightness rc101/25", &mut root_lp, &mut s);
    step("MILP cross-validation", &mut cross_validation, &mut s);
    step("frontier oracle", &mut |_| frontier_oracle(), &mut s);
    step("departure-time recursion", &mut |_| recursion_equivalence(), &mut s);
    step("brute-force optimality", &mut brute_force, &mut s);
    step("refinement invariance", &mut |s: &mut Suite| refinement_invariance(&s.backend), &mut s);
    step("monotone log and safe contraction", &mut monotone, &mut s);

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
