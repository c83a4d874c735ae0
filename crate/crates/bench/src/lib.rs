//! Benchmark fixtures shared by the criterion benches.

use propfix_core::{generate_model_b, ConsistencyId, ConstraintNetwork, GenSpec};

/// A named instance for one benchmark input.
pub struct Fixture {
    pub name: &'static str,
    pub net: ConstraintNetwork,
}

fn model_b(n: usize, d: usize, p1: f64, p2: f64) -> ConstraintNetwork {
    generate_model_b(&GenSpec { n, d, p1, p2, seed: 1 }).expect("valid fixture spec")
}

/// Instances below, near and above the AC transition at n=40, d=15.
pub fn transition_fixtures() -> Vec<Fixture> {
    vec![
        Fixture { name: "40x15-loose", net: model_b(40, 15, 0.5, 0.3) },
        Fixture { name: "40x15-critical", net: model_b(40, 15, 0.5, 0.5) },
        Fixture { name: "40x15-tight", net: model_b(40, 15, 0.5, 0.7) },
    ]
}

/// A sparse 200x30 instance near its checks peak.
pub fn sparse_fixture() -> Fixture {
    Fixture { name: "200x30-sparse", net: model_b(200, 30, 0.02, 0.85) }
}

/// Consistencies cheap enough for the 40x15 fixtures.
pub fn fast_consistencies() -> Vec<ConsistencyId> {
    vec![
        ConsistencyId::Ac,
        ConsistencyId::Rpc,
        ConsistencyId::k_rpc(2).expect("k = 2"),
        ConsistencyId::MaxRpc,
        ConsistencyId::Pic,
    ]
}

/// Consistencies benchmarked on a smaller instance.
pub fn slow_consistencies() -> Vec<ConsistencyId> {
    vec![
        ConsistencyId::Nic,
        ConsistencyId::StrongPc,
        ConsistencyId::Sac,
        ConsistencyId::Srpc,
    ]
}

pub fn small_fixture() -> Fixture {
    Fixture { name: "20x8", net: model_b(20, 8, 0.3, 0.45) }
}
