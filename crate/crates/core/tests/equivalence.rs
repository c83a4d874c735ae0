use propfix_core::oracle::{definitional_closure, enumerate_solutions};
use propfix_core::{enforce, generate_model_b, ConsistencyId, DomainState, GenSpec};

fn consistencies(d: usize) -> Vec<ConsistencyId> {
    use ConsistencyId::*;
    let mut v = vec![Ac, Rpc, MaxRpc, Pic, Nic, StrongPc, Sac, Srpc];
    v.extend((1..=d as u32).map(|k| ConsistencyId::k_rpc(k).unwrap()));
    v
}

#[test]
fn fast_filters_match_the_definitions() {
    let mut mismatches = Vec::new();
    for seed in 0..400u64 {
        let n = 3 + (seed % 6) as usize;
        let d = 2 + (seed / 6 % 3) as usize;
        let p1 = [0.3, 0.6, 1.0][(seed / 18 % 3) as usize];
        let t = (seed * 7 % (d * d + 1) as u64) as f64 / (d * d) as f64;
        let net = generate_model_b(&GenSpec { n, d, p1, p2: t, seed }).unwrap();
        let before = enumerate_solutions(&net, &DomainState::full(&net), None);
        for lc in consistencies(d) {
            let mut state = DomainState::full(&net);
            let r = enforce(&net, &mut state, lc, None);
            let c = definitional_closure(&net, lc);
            let mut pairs = r.deleted_pairs.clone();
            pairs.sort_unstable();
            if state != c.state || pairs != c.pairs {
                mismatches.push(format!("seed {seed} {lc}: fast {:?} oracle {:?}", pairs, c.pairs));
            }
            let after = enumerate_solutions(&net, &state, None);
            if before != after {
                mismatches.push(format!("seed {seed} {lc}: solutions changed"));
            }
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches[..mismatches.len().min(10)].join("\n"));
}
