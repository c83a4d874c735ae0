//! Empirical verification of the strength lattice.

use crate::consistency::ConsistencyId;
use crate::domain::DomainState;
use crate::filters::enforce;
use crate::generator::{derive_seed, generate_model_b, GenError, GenSpec};
use crate::network::ConstraintNetwork;
use crate::oracle::{
    lattice_containments, lattice_edges, witness_search, Containment, LatticeEdge, Witness,
    WitnessParams,
};

/// What to check and on which instances.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeConfig {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub densities: Vec<f64>,
    pub containments: Vec<Containment>,
    /// Check k-RPC(1) ≡ RPC and k-RPC(d) ≡ Max-RPC.
    pub identities: bool,
    pub edges: Vec<LatticeEdge>,
    pub witness: WitnessParams,
}

impl LatticeConfig {
    /// Every containment and edge, k-RPC up to `d`.
    pub fn all(n: usize, d: usize, samples: usize, seed: u64) -> Self {
        LatticeConfig {
            n,
            d,
            samples,
            seed,
            densities: vec![0.3, 0.6, 1.0],
            containments: lattice_containments(d.max(1) as u32),
            identities: true,
            edges: lattice_edges(),
            witness: WitnessParams::default(),
        }
    }

    /// Only the given edges, with their implied containments.
    pub fn for_edges(n: usize, d: usize, samples: usize, seed: u64, edges: Vec<LatticeEdge>) -> Self {
        let containments = edges
            .iter()
            .filter(|e| e.kind == crate::oracle::EdgeKind::Strict)
            .map(|e| Containment {
                smaller: e.strong,
                larger: e.weak,
            })
            .collect();
        LatticeConfig {
            containments,
            identities: false,
            edges,
            ..Self::all(n, d, samples, seed)
        }
    }

    fn consistencies(&self) -> Vec<ConsistencyId> {
        let mut lcs: Vec<ConsistencyId> = self
            .containments
            .iter()
            .flat_map(|c| [c.smaller, c.larger])
            .collect();
        if self.identities {
            lcs.extend([ConsistencyId::Rpc, ConsistencyId::MaxRpc]);
            lcs.extend(ConsistencyId::k_rpc(1).ok());
            lcs.extend(ConsistencyId::k_rpc(self.d as u32).ok());
        }
        lcs.sort();
        lcs.dedup();
        lcs
    }
}

/// Outcome of one containment or identity over the sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainmentVerdict {
    pub label: String,
    pub checked: usize,
    pub violations: usize,
    pub first_violation: Option<ConstraintNetwork>,
}

/// Outcome of one witness direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessVerdict {
    pub edge: String,
    pub deletes: ConsistencyId,
    pub holds: ConsistencyId,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LatticeReport {
    pub instances: usize,
    pub containments: Vec<ContainmentVerdict>,
    pub witnesses: Vec<WitnessVerdict>,
}

impl LatticeReport {
    pub fn violations(&self) -> usize {
        self.containments.iter().map(|c| c.violations).sum()
    }

    pub fn missing_witnesses(&self) -> usize {
        self.witnesses.iter().filter(|w| w.witness.is_none()).count()
    }
}

/// Instance `m` of a lattice run: densities cycle fastest, then tightness
/// steps through `t/d²` for `t = 0..=d²`.
pub fn lattice_instance(cfg: &LatticeConfig, m: usize) -> Result<ConstraintNetwork, GenError> {
    let d2 = cfg.d * cfg.d;
    let k = cfg.densities.len().max(1);
    let spec = GenSpec {
        n: cfg.n,
        d: cfg.d,
        p1: cfg.densities.get(m % k).copied().unwrap_or(1.0),
        p2: ((m / k) % (d2 + 1)) as f64 / d2 as f64,
        seed: derive_seed(cfg.seed, m as u64),
    };
    generate_model_b(&spec)
}

pub fn run_lattice(cfg: &LatticeConfig) -> Result<LatticeReport, GenError> {
    let lcs = cfg.consistencies();
    let mut verdicts: Vec<ContainmentVerdict> = cfg
        .containments
        .iter()
        .map(|c| ContainmentVerdict {
            label: format!("{} ⊆ {}", c.smaller, c.larger),
            checked: 0,
            violations: 0,
            first_violation: None,
        })
        .collect();
    let identity_pairs: Vec<(ConsistencyId, ConsistencyId)> = if cfg.identities {
        let one = ConsistencyId::k_rpc(1).expect("k = 1");
        let top = ConsistencyId::k_rpc(cfg.d.max(1) as u32).expect("k >= 1");
        vec![(one, ConsistencyId::Rpc), (top, ConsistencyId::MaxRpc)]
    } else {
        Vec::new()
    };
    for &(a, b) in &identity_pairs {
        verdicts.push(ContainmentVerdict {
            label: format!("{a} ≡ {b}"),
            checked: 0,
            violations: 0,
            first_violation: None,
        });
    }
    let containment_applies = cfg.n >= 3;
    for m in 0..cfg.samples {
        let net = lattice_instance(cfg, m)?;
        let states: Vec<DomainState> = lcs
            .iter()
            .map(|&lc| {
                let mut s = DomainState::full(&net);
                enforce(&net, &mut s, lc, None);
                s
            })
            .collect();
        let state = |lc: ConsistencyId| &states[lcs.binary_search(&lc).expect("computed")];
        let mut record = |slot: usize, ok: bool| {
            let v = &mut verdicts[slot];
            v.checked += 1;
            if !ok {
                v.violations += 1;
                v.first_violation.get_or_insert_with(|| net.clone());
            }
        };
        if containment_applies {
            for (slot, c) in cfg.containments.iter().enumerate() {
                record(slot, state(c.smaller).is_subset(state(c.larger)));
            }
        }
        for (offset, &(a, b)) in identity_pairs.iter().enumerate() {
            record(cfg.containments.len() + offset, state(a) == state(b));
        }
    }
    let mut witnesses = Vec::new();
    for edge in &cfg.edges {
        for (deletes, holds) in edge.directions() {
            witnesses.push(WitnessVerdict {
                edge: edge.label(),
                deletes,
                holds,
                witness: witness_search(deletes, holds, &cfg.witness, cfg.seed),
            });
        }
    }
    Ok(LatticeReport {
        instances: cfg.samples,
        containments: verdicts,
        witnesses,
    })
}

/// Looks up edges by label (`sac>maxrpc`, `pic<>krpc2`, either order for
/// incomparable pairs).
pub fn edges_by_label(labels: &[&str]) -> Result<Vec<LatticeEdge>, String> {
    let all = lattice_edges();
    labels
        .iter()
        .map(|label| {
            all.iter()
                .find(|e| {
                    e.label() == *label
                        || (e.kind == crate::oracle::EdgeKind::Incomparable
                            && format!("{}<>{}", e.weak, e.strong) == *label)
                })
                .copied()
                .ok_or_else(|| format!("unknown lattice edge `{label}`"))
        })
        .collect()
}
