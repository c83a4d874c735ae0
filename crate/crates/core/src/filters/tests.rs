use super::*;
use crate::format::parse_instance;
use crate::generator::{generate_model_b, GenSpec};

const NET_A: &str = "vars 2\ndom 0 0 1\ndom 1 0 1\ncon 0 1 all\n";
const NET_B: &str = "vars 2\ndom 0 0 1\ndom 1 0 1\ncon 0 1 none\n";
const NET_D: &str = "vars 3\ndom 0 0 1\ndom 1 0 1\ndom 2 0 1\n\
    con 0 1 allow 0:0 1:0 1:1\ncon 0 2 allow 0:0 1:0 1:1\ncon 1 2 forbid 0:0\n";

fn run(text: &str, lc: ConsistencyId) -> FilterResult {
    let net = parse_instance(text).unwrap();
    let mut state = DomainState::full(&net);
    enforce(&net, &mut state, lc, None)
}

fn every_lc(d: u32) -> Vec<ConsistencyId> {
    use ConsistencyId::*;
    let mut v = vec![Ac, Rpc, MaxRpc, Pic, Nic, StrongPc, Sac, Srpc];
    v.extend((1..=d).map(|k| ConsistencyId::k_rpc(k).unwrap()));
    v
}

#[test]
fn net_a_is_untouched() {
    for lc in every_lc(2) {
        let r = run(NET_A, lc);
        assert!(r.deleted.is_empty() && r.deleted_pairs.is_empty() && !r.wipeout, "{lc}");
    }
}

#[test]
fn net_b_wipes_out_except_pic() {
    for lc in every_lc(2) {
        let r = run(NET_B, lc);
        if lc == ConsistencyId::Pic {
            assert!(r.deleted.is_empty() && !r.wipeout);
        } else {
            assert!(r.wipeout, "{lc}");
            assert_eq!(r.deleted.len(), 4, "{lc}");
        }
    }
}

#[test]
fn net_d_deletions() {
    assert!(run(NET_D, ConsistencyId::Ac).deleted.is_empty());
    for lc in [
        ConsistencyId::Rpc,
        ConsistencyId::k_rpc(1).unwrap(),
        ConsistencyId::MaxRpc,
        ConsistencyId::Pic,
        ConsistencyId::Nic,
    ] {
        assert_eq!(run(NET_D, lc).deleted_sorted(), vec![(0, 0)], "{lc}");
    }
    for lc in [ConsistencyId::Sac, ConsistencyId::Srpc, ConsistencyId::StrongPc] {
        assert!(run(NET_D, lc).deleted.contains(&(0, 0)), "{lc}");
    }
}

#[test]
fn pc_support_examples() {
    let d = parse_instance(NET_D).unwrap();
    let full = DomainState::full(&d);
    let mut counter = CheckCounter::new();
    assert_eq!(find_pc_support(&d, &full, 0, 0, 1, 0, &mut counter), Ok(None));
    assert_eq!(find_pc_support(&d, &full, 0, 1, 1, 0, &mut counter), Ok(Some(0)));
    assert!(counter.get() > 0);
    let a = parse_instance(NET_A).unwrap();
    let full_a = DomainState::full(&a);
    assert_eq!(find_pc_support(&a, &full_a, 0, 0, 1, 0, &mut counter), Ok(Some(0)));
    assert_eq!(find_pc_support(&a, &full_a, 0, 0, 1, 1, &mut counter), Ok(Some(1)));
}

#[test]
fn pc_support_rejects_bad_queries() {
    let net = parse_instance("vars 3\ndom 0 0\ndom 1 0\ndom 2 0\ncon 0 1 all\n").unwrap();
    let mut state = DomainState::full(&net);
    let mut counter = CheckCounter::new();
    assert!(matches!(
        find_pc_support(&net, &state, 0, 0, 2, 0, &mut counter),
        Err(FilterError::Network(NetworkError::NoConstraint(0, 2)))
    ));
    state.remove(0, 0);
    assert!(find_pc_support(&net, &state, 0, 0, 1, 0, &mut counter).is_err());
}

#[test]
fn k_rpc_rejects_zero() {
    let net = parse_instance(NET_A).unwrap();
    let mut state = DomainState::full(&net);
    assert_eq!(enforce_k_rpc(&net, &mut state, 0), Err(FilterError::InvalidK));
}

fn sample(seed: u64, n: usize, d: usize, p1: f64, p2: f64) -> ConstraintNetwork {
    generate_model_b(&GenSpec { n, d, p1, p2, seed }).unwrap()
}

#[test]
fn k_rpc_endpoints() {
    for seed in 0..60 {
        let p2 = [0.2, 0.35, 0.5][seed as usize % 3];
        let net = sample(seed, 12, 5, 0.6, p2);
        let mut a = DomainState::full(&net);
        let mut b = DomainState::full(&net);
        let one = enforce_k_rpc(&net, &mut a, 1).unwrap();
        let rpc = enforce_rpc(&net, &mut b);
        assert_eq!((one.deleted_sorted(), one.checks), (rpc.deleted_sorted(), rpc.checks));
        let mut c = DomainState::full(&net);
        let mut e = DomainState::full(&net);
        let dk = enforce_k_rpc(&net, &mut c, 5).unwrap();
        let max = enforce_max_rpc(&net, &mut e);
        assert_eq!(c, e);
        assert_eq!(dk.wipeout, max.wipeout);
    }
}

#[test]
fn second_run_is_a_no_op() {
    for seed in 0..30 {
        let net = sample(seed, 9, 4, 0.5, 0.4);
        for lc in every_lc(3) {
            let mut state = DomainState::full(&net);
            let first = enforce(&net, &mut state, lc, None);
            if first.wipeout {
                continue;
            }
            let again = enforce(&net, &mut state, lc, None);
            assert!(again.deleted.is_empty(), "{lc} seed {seed}");
        }
    }
}

#[test]
fn deterministic_counts() {
    let net = sample(11, 20, 6, 0.4, 0.45);
    for lc in every_lc(2) {
        let mut s1 = DomainState::full(&net);
        let mut s2 = DomainState::full(&net);
        let r1 = enforce(&net, &mut s1, lc, None);
        let r2 = enforce(&net, &mut s2, lc, None);
        assert_eq!((r1.deleted, r1.checks), (r2.deleted, r2.checks), "{lc}");
    }
}

#[test]
fn deleted_values_were_present_and_distinct() {
    for seed in 0..20 {
        let net = sample(seed, 10, 4, 0.6, 0.5);
        for lc in every_lc(2) {
            let mut state = DomainState::full(&net);
            let r = enforce(&net, &mut state, lc, None);
            let mut seen = r.deleted_sorted();
            seen.dedup();
            assert_eq!(seen.len(), r.deleted.len(), "{lc}");
            assert_eq!(r.wipeout, state.is_wiped_out());
            assert_eq!(state.total_values() + r.deleted.len(), 40);
        }
    }
}

#[test]
fn expired_deadline_times_out_soundly() {
    let net = sample(3, 30, 6, 0.5, 0.4);
    let past = Some(Instant::now());
    for lc in every_lc(1) {
        let mut state = DomainState::full(&net);
        let r = enforce(&net, &mut state, lc, past);
        assert!(r.timed_out, "{lc}");
        assert!(!r.wipeout, "{lc}");
    }
}
