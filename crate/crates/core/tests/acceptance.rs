//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero on any failure not listed in `KNOWN_UNATTAINABLE`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use propfix_core::harness::{
    interior_peak, sweep, write_csv, BoundEstimator, BoundKind, BoundParams, Grid, SweepConfig,
};
use propfix_core::lattice::{run_lattice, LatticeConfig};
use propfix_core::oracle::{
    definitional_closure, enumerate_solutions, lattice_edges, variable_completability,
    witness_search, WitnessParams,
};
use propfix_core::{
    deadline_after, enforce, experiment_family, generate_model_b, write_instance, ConsistencyId,
    ConstraintNetwork, DomainState, GenSpec,
};

/// Zero mismatches, zero violations.
const MAX_MISMATCHES: usize = 0;
const MIN_CORPUS: usize = 500;
const MIN_LATTICE: usize = 2000;
const MIN_COMPLETE: usize = 200;
const MIN_TWO_VAR: usize = 50;
const WITNESS_ATTEMPTS: usize = 100_000;
const WITNESS_N: usize = 6;
const WITNESS_D: usize = 3;
const BOUND_SAMPLES: usize = 50;
const BOUND_DENSITIES: [f64; 3] = [0.2, 0.5, 1.0];
const PEAK_SAMPLES: usize = 10;
const PEAK_STEPS: usize = 20;
const AC_LIMIT: Duration = Duration::from_secs(1);
const NIC_DEADLINE: Duration = Duration::from_secs(2);
/// Short enough that NIC cannot finish the p2 = .50 dense instance.
const NIC_SHORT_DEADLINE: Duration = Duration::from_millis(300);
const SEED: u64 = 20_241;

/// Directions the search misses with the suite seed, and why.
const KNOWN_UNATTAINABLE: [(&str, &str, &str); 2] = [
    ("pic", "krpc2", "impossible while every domain has at most 3 values"),
    ("nic", "srpc", "exists at n = 6, d = 3 but the search hits it in about 1 of 6 seeds per 10^5 attempts"),
];

/// Hand-built: (0,0) has three supports on both constraints, and C_12 only
/// allows pairs involving value 3, so no triangle extends it.
const PIC_OVER_KRPC2_D4: &str = "vars 3\ndom 0 0 1 2 3\ndom 1 0 1 2 3\ndom 2 0 1 2 3\n\
    con 0 1 forbid 0:3\ncon 0 2 forbid 0:3\n\
    con 1 2 forbid 0:0 0:1 0:2 1:0 1:1 1:2 2:0 2:1 2:2\n";

/// Found by the same search with seed 1 at attempt 89222.
const NIC_OVER_SRPC: &str = "vars 6\ndom 0 0 1 2\ndom 1 0 1 2\ndom 2 0 1 2\ndom 3 0 1 2\ndom 4 0 1 2\ndom 5 0 1 2\n\
    con 0 1 forbid 1:1 2:2\ncon 0 3 forbid 1:1 2:0\ncon 0 4 forbid 1:0 1:1\ncon 0 5 forbid 0:0 2:1\n\
    con 1 2 forbid 0:2 2:1\ncon 1 3 forbid 1:1 1:2\ncon 1 5 forbid 0:1 2:2\ncon 2 3 forbid 0:2 2:1\n\
    con 2 4 forbid 1:0 2:1\ncon 3 4 forbid 0:0 2:2\ncon 3 5 forbid 1:0 2:2\ncon 4 5 forbid 0:1 1:0\n";

/// Whether `text` is a verified witness for `strong` over `weak`.
fn verified(text: &str, strong: ConsistencyId, weak: ConsistencyId) -> bool {
    let net = propfix_core::parse_instance(text).unwrap();
    let full = DomainState::full(&net);
    let w = definitional_closure(&net, weak);
    let s = definitional_closure(&net, strong);
    w.state == full && w.pairs.is_empty() && s.state != full
}

struct Outcome {
    pass: bool,
    detail: String,
    fingerprint: Vec<String>,
}

fn report(id: u32, title: &str, o: &Outcome, took: Duration) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {title} [{:.1}s]: {}", took.as_secs_f64(), o.detail);
}

fn every_lc(d: usize) -> Vec<ConsistencyId> {
    use ConsistencyId::*;
    let mut v = vec![Ac, Rpc, MaxRpc, Pic, Nic, StrongPc, Sac, Srpc];
    v.extend((1..=d as u32).map(|k| ConsistencyId::k_rpc(k).unwrap()));
    v
}

/// n in 3..=8, d in 2..=4, p1 in {.3,.6,1}, every p2 = t/d².
fn corpus() -> Vec<(GenSpec, ConstraintNetwork)> {
    let mut out = Vec::new();
    let mut index = 0u64;
    for n in 3..=8 {
        for d in 2..=4usize {
            for p1 in [0.3, 0.6, 1.0] {
                for t in 0..=d * d {
                    let spec = GenSpec {
                        n,
                        d,
                        p1,
                        p2: t as f64 / (d * d) as f64,
                        seed: propfix_core::derive_seed(SEED, index),
                    };
                    index += 1;
                    out.push((spec, generate_model_b(&spec).unwrap()));
                }
            }
        }
    }
    out
}

fn criteria_1_2() -> (Outcome, Outcome) {
    let corpus = corpus();
    let (mut closure_bad, mut solution_bad, mut runs) = (Vec::new(), Vec::new(), 0);
    let mut fingerprint = Vec::new();
    for (spec, net) in &corpus {
        let before = enumerate_solutions(net, &DomainState::full(net), None);
        for lc in every_lc(spec.d) {
            let mut state = DomainState::full(net);
            let r = enforce(net, &mut state, lc, None);
            runs += 1;
            let c = definitional_closure(net, lc);
            if state != c.state || r.deleted_pairs != c.pairs {
                closure_bad.push(format!("{lc} on {spec:?}"));
            }
            if enumerate_solutions(net, &state, None) != before {
                solution_bad.push(format!("{lc} on {spec:?}"));
            }
            fingerprint.push(format!("{lc} {:?} {:?} {}", r.deleted, r.deleted_pairs, r.checks));
        }
    }
    let first = |v: &[String]| v.first().map_or(String::new(), |s| format!(", first: {s}"));
    let c1 = Outcome {
        pass: corpus.len() >= MIN_CORPUS && closure_bad.len() == MAX_MISMATCHES,
        detail: format!(
            "{} instances, {runs} filter runs, {} mismatches{}",
            corpus.len(),
            closure_bad.len(),
            first(&closure_bad)
        ),
        fingerprint: fingerprint.clone(),
    };
    let c2 = Outcome {
        pass: corpus.len() >= MIN_CORPUS && solution_bad.len() == MAX_MISMATCHES,
        detail: format!(
            "{} instances, {runs} filter runs, {} solution-set changes{}",
            corpus.len(),
            solution_bad.len(),
            first(&solution_bad)
        ),
        fingerprint,
    };
    (c1, c2)
}

fn criterion_3() -> Outcome {
    let (mut instances, mut violations, mut labels) = (0, 0, Vec::new());
    let mut fingerprint = Vec::new();
    for n in 3..=8 {
        for d in 2..=4 {
            let mut cfg = LatticeConfig::all(n, d, 120, SEED + (n * 10 + d) as u64);
            cfg.edges.clear();
            let r = run_lattice(&cfg).unwrap();
            instances += r.instances;
            violations += r.violations();
            for c in &r.containments {
                if c.violations > 0 {
                    labels.push(format!("{} (n={n}, d={d})", c.label));
                }
                fingerprint.push(format!("{n} {d} {} {} {}", c.label, c.checked, c.violations));
            }
        }
    }
    Outcome {
        pass: instances >= MIN_LATTICE && violations == MAX_MISMATCHES,
        detail: format!(
            "{instances} instances, every containment plus k-RPC(1) = RPC and k-RPC(d) = Max-RPC, {violations} violations {labels:?}"
        ),
        fingerprint,
    }
}

fn criterion_4() -> (Outcome, Vec<String>) {
    let params = WitnessParams {
        n: WITNESS_N,
        d: WITNESS_D,
        attempts: WITNESS_ATTEMPTS,
        ..WitnessParams::default()
    };
    let (mut found, mut missing, mut documented, mut fingerprint) =
        (0, Vec::new(), Vec::new(), Vec::new());
    for edge in lattice_edges() {
        for (strong, weak) in edge.directions() {
            let key = (strong.to_string(), weak.to_string());
            match witness_search(strong, weak, &params, SEED) {
                Some(w) => {
                    found += 1;
                    fingerprint.push(format!("{strong}>{weak} {} {}", w.attempt, write_instance(&w.net)));
                }
                None => {
                    fingerprint.push(format!("{strong}>{weak} none"));
                    let label = format!("{strong} deletes while {weak} holds");
                    let known = KNOWN_UNATTAINABLE
                        .iter()
                        .find(|&&(s, w, _)| (s, w) == (key.0.as_str(), key.1.as_str()));
                    match known {
                        Some(&(_, _, why)) => {
                            let gadget = if key.0 == "pic" { PIC_OVER_KRPC2_D4 } else { NIC_OVER_SRPC };
                            let shown = if verified(gadget, strong, weak) {
                                "supplementary witness verified"
                            } else {
                                "supplementary witness REJECTED"
                            };
                            documented.push(format!("{label}: {why}; {shown}"));
                        }
                        None => missing.push(label),
                    }
                }
            }
        }
    }
    let total = found + missing.len() + documented.len();
    let outcome = Outcome {
        pass: missing.is_empty() && documented.is_empty(),
        detail: format!(
            "{found}/{total} directions witnessed at n <= {WITNESS_N}, d <= {WITNESS_D}, {WITNESS_ATTEMPTS} attempts; missing {missing:?}; documented {documented:?}"
        ),
        fingerprint,
    };
    (outcome, missing)
}

fn criterion_5() -> Outcome {
    let (mut count, mut bad, mut fingerprint) = (0, Vec::new(), Vec::new());
    for n in 2..=7 {
        for d in 2..=4usize {
            for t in 0..12u64 {
                let spec = GenSpec {
                    n,
                    d,
                    p1: 1.0,
                    p2: (t as usize % (d * d + 1)) as f64 / (d * d) as f64,
                    seed: propfix_core::derive_seed(SEED ^ 5, count as u64),
                };
                let net = generate_model_b(&spec).unwrap();
                let mut state = DomainState::full(&net);
                let r = enforce(&net, &mut state, ConsistencyId::Nic, None);
                let expected = variable_completability(&net, &DomainState::full(&net));
                if state != expected {
                    bad.push(format!("{spec:?}"));
                }
                fingerprint.push(format!("{:?} {}", r.deleted, r.checks));
                count += 1;
            }
        }
    }
    Outcome {
        pass: count >= MIN_COMPLETE && bad.len() == MAX_MISMATCHES,
        detail: format!("{count} complete-graph instances, {} mismatches", bad.len()),
        fingerprint,
    }
}

/// Arc inconsistency read straight off the relation.
fn arc_inconsistent(net: &ConstraintNetwork) -> bool {
    let (da, db) = (net.domain_size(0), net.domain_size(1));
    let rel = |a, b| net.relation_value(0, a, 1, b).unwrap_or(true);
    (0..da).any(|a| (0..db).all(|b| !rel(a, b))) || (0..db).any(|b| (0..da).all(|a| !rel(a, b)))
}

fn criterion_6() -> Outcome {
    let (mut count, mut inconsistent, mut bad, mut fingerprint) = (0, 0, Vec::new(), Vec::new());
    for d in 1..=4usize {
        for t in 0..=d * d {
            for rep in 0..3u64 {
                let spec = GenSpec {
                    n: 2,
                    d,
                    p1: 1.0,
                    p2: t as f64 / (d * d) as f64,
                    seed: propfix_core::derive_seed(SEED ^ 6, count as u64 * 3 + rep),
                };
                let net = generate_model_b(&spec).unwrap();
                let ai = arc_inconsistent(&net);
                inconsistent += usize::from(ai);
                let pic = enforce(&net, &mut DomainState::full(&net), ConsistencyId::Pic, None);
                let ac = enforce(&net, &mut DomainState::full(&net), ConsistencyId::Ac, None);
                if !pic.deleted.is_empty() || ac.deleted.is_empty() == ai {
                    bad.push(format!("{spec:?}"));
                }
                fingerprint.push(format!("{:?} {:?}", pic.deleted, ac.deleted));
            }
            count += 1;
        }
    }
    let total = fingerprint.len();
    Outcome {
        pass: total >= MIN_TWO_VAR && inconsistent > 0 && bad.is_empty(),
        detail: format!(
            "{total} two-variable instances ({inconsistent} arc-inconsistent), PIC deleted nothing and AC deleted exactly on the arc-inconsistent ones: {} exceptions",
            bad.len()
        ),
        fingerprint,
    }
}

const CHAIN: [ConsistencyId; 5] = [
    ConsistencyId::Ac,
    ConsistencyId::Rpc,
    ConsistencyId::Pic,
    ConsistencyId::MaxRpc,
    ConsistencyId::Sac,
];

fn criterion_7(densities: &[f64]) -> Outcome {
    let family = experiment_family("transition-40x15").unwrap();
    let mut problems = Vec::new();
    let mut fingerprint = Vec::new();
    let mut ac_bounds = Vec::new();
    let mut table = Vec::new();
    for &p1 in densities {
        let params = BoundParams::new(family.n, family.d, p1, BOUND_SAMPLES, SEED);
        let mut est = match BoundEstimator::new(params, &CHAIN) {
            Ok(e) => e,
            Err(e) => {
                problems.push(format!("p1={p1}: {e}"));
                continue;
            }
        };
        let mut bounds = Vec::new();
        for lc in CHAIN {
            let t0 = est.estimate(lc, BoundKind::T0);
            let tall = est.estimate(lc, BoundKind::Tall);
            match (t0, tall) {
                (Ok(a), Ok(b)) => {
                    if a.tightness > b.tightness {
                        problems.push(format!("p1={p1} {lc}: T0 {} > Tall {}", a.tightness, b.tightness));
                    }
                    fingerprint.push(format!("{p1} {lc} {} {} {} {}", a.tightness, a.reached, b.tightness, b.reached));
                    bounds.push((lc, a.tightness, b.tightness));
                }
                (Err(e), _) | (_, Err(e)) => problems.push(format!("p1={p1} {lc}: {e}")),
            }
        }
        for w in bounds.windows(2) {
            let ((weak, w0, wall), (strong, s0, sall)) = (w[0], w[1]);
            if s0 > w0 || sall > wall {
                problems.push(format!("p1={p1}: {strong} bounds ({s0}, {sall}) above {weak} ({w0}, {wall})"));
            }
        }
        if let Some(&(_, t0, tall)) = bounds.first() {
            ac_bounds.push((p1, t0, tall));
        }
        table.push(format!(
            "p1={p1} [{}]",
            bounds
                .iter()
                .map(|(lc, a, b)| format!("{lc} {a:.3}/{b:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    for w in ac_bounds.windows(2) {
        if w[1].1 > w[0].1 || w[1].2 > w[0].2 {
            problems.push(format!("AC bounds rise from p1={} to p1={}", w[0].0, w[1].0));
        }
    }
    Outcome {
        pass: problems.is_empty(),
        detail: format!(
            "n=40 d=15 samples={BOUND_SAMPLES}, T0/Tall {}; problems {problems:?}",
            table.join("; ")
        ),
        fingerprint,
    }
}

fn criterion_8() -> Outcome {
    let family = experiment_family("timing-200x30-sparse").unwrap();
    let lcs = vec![ConsistencyId::Ac, ConsistencyId::Rpc, ConsistencyId::Pic, ConsistencyId::MaxRpc];
    let cfg = SweepConfig {
        n: family.n,
        d: family.d,
        p1: family.p1.unwrap(),
        lcs: lcs.clone(),
        grid: Grid::new(0.0, 1.0, PEAK_STEPS).unwrap(),
        samples: PEAK_SAMPLES,
        seed: SEED,
        budget: None,
    };
    let points = sweep(&cfg).unwrap();
    let mut peaks = Vec::new();
    let mut pass = true;
    for lc in &lcs {
        let curve: Vec<&_> = points.iter().filter(|p| p.lc == *lc).collect();
        let checks: Vec<f64> = curve.iter().map(|p| p.mean_checks).collect();
        match interior_peak(&checks) {
            Some(i) => peaks.push(format!("{lc} peak at p2={:.2}", curve[i].p2)),
            None => {
                pass = false;
                peaks.push(format!("{lc} has no interior peak"));
            }
        }
    }
    let mut csv = Vec::new();
    write_csv(&points, &mut csv).unwrap();
    let fingerprint = String::from_utf8(csv)
        .unwrap()
        .lines()
        .map(|line| {
            // drop mean_ms and max_ms
            let cols: Vec<&str> = line.split(',').collect();
            [&cols[..cols.len() - 3], &cols[cols.len() - 1..]].concat().join(",")
        })
        .collect();
    Outcome {
        pass,
        detail: format!("{} points, mean checks: {}", points.len(), peaks.join(", ")),
        fingerprint,
    }
}

fn criterion_9() -> Outcome {
    let sparse = experiment_family("timing-200x30-sparse").unwrap();
    let mut slowest = Duration::ZERO;
    for (i, p2) in Grid::new(0.0, 1.0, PEAK_STEPS).unwrap().values().into_iter().enumerate() {
        let net = generate_model_b(&sparse.spec(0.0, p2, SEED + i as u64)).unwrap();
        let mut state = DomainState::full(&net);
        let start = Instant::now();
        enforce(&net, &mut state, ConsistencyId::Ac, None);
        slowest = slowest.max(start.elapsed());
    }
    let ac_ok = slowest < AC_LIMIT;

    let dense = experiment_family("timing-200x30-dense").unwrap();
    let mut notes = Vec::new();
    let mut nic_ok = true;
    for (p2, budget) in [(0.52, NIC_DEADLINE), (0.50, NIC_SHORT_DEADLINE)] {
        let net = generate_model_b(&dense.spec(0.0, p2, 0)).unwrap();
        let mut partial = DomainState::full(&net);
        let start = Instant::now();
        let r = enforce(&net, &mut partial, ConsistencyId::Nic, deadline_after(Some(budget)));
        let wall = start.elapsed();
        let mut full = DomainState::full(&net);
        let f = enforce(&net, &mut full, ConsistencyId::Nic, None);
        // Sound: the partial state still contains the full closure.
        let sound = full.is_subset(&partial) && !r.wipeout;
        let honored = r.timed_out && wall < budget + Duration::from_millis(500);
        nic_ok &= sound && honored;
        notes.push(format!(
            "p2={p2}: timed_out={} after {:.2}s ({} deleted) vs full run {:.2}s ({} deleted, wipeout={}), sound={sound}",
            r.timed_out,
            wall.as_secs_f64(),
            r.deleted.len(),
            f.elapsed.as_secs_f64(),
            f.deleted.len(),
            f.wipeout
        ));
    }
    Outcome {
        pass: ac_ok && nic_ok,
        detail: format!(
            "slowest AC on 200x30 sparse {:.1} ms (limit {} ms); NIC {}",
            slowest.as_secs_f64() * 1e3,
            AC_LIMIT.as_millis(),
            notes.join("; ")
        ),
        fingerprint: Vec::new(),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn main() -> ExitCode {
    let mut undocumented = 0;
    let mut finish = |id: u32, title: &str, o: &Outcome, known: bool, took: Duration| {
        report(id, title, o, took);
        if !o.pass && !known {
            undocumented += 1;
        }
    };
    let ((c1, c2), t) = timed(criteria_1_2);
    finish(1, "oracle equivalence", &c1, false, t);
    finish(2, "solution preservation", &c2, false, t);
    let (c3, t) = timed(criterion_3);
    finish(3, "lattice containments", &c3, false, t);
    let ((c4, missing), t) = timed(criterion_4);
    finish(4, "strictness witnesses", &c4, missing.is_empty(), t);
    let (c5, t) = timed(criterion_5);
    finish(5, "NIC equals completability on complete graphs", &c5, false, t);
    let (c6, t) = timed(criterion_6);
    finish(6, "PIC vacuity on two variables", &c6, false, t);
    let (c7, t) = timed(|| criterion_7(&BOUND_DENSITIES));
    finish(7, "phase-transition bounds", &c7, false, t);
    let (c8, t) = timed(criterion_8);
    finish(8, "complexity peak", &c8, false, t);
    let (c9, t) = timed(criterion_9);
    finish(9, "performance sanity", &c9, false, t);

    let (c10, t) = timed(|| {
        let (r1, r2) = criteria_1_2();
        let (r4, _) = criterion_4();
        let reruns = [
            ("1", &c1, &r1),
            ("2", &c2, &r2),
            ("3", &c3, &criterion_3()),
            ("4", &c4, &r4),
            ("5", &c5, &criterion_5()),
            ("6", &c6, &criterion_6()),
            ("7", &c7, &criterion_7(&BOUND_DENSITIES)),
            ("8", &c8, &criterion_8()),
        ];
        let differing: Vec<&str> = reruns
            .iter()
            .filter(|(_, a, b)| a.fingerprint != b.fingerprint)
            .map(|(id, _, _)| *id)
            .collect();
        let records: usize = reruns.iter().map(|(_, a, _)| a.fingerprint.len()).sum();
        Outcome {
            pass: differing.is_empty(),
            detail: format!(
                "second run of criteria 1-8 with equal seeds: {records} records compared, differing criteria {differing:?}"
            ),
            fingerprint: Vec::new(),
        }
    });
    finish(10, "determinism", &c10, false, t);

    if undocumented == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
