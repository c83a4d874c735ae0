//! Brute-force ground truth for small networks.
//!
//! Closures here apply the textbook definitions directly: every pass deletes
//! each value (and, for strong path consistency, each pair) that violates the
//! definition under the current domains, until a pass changes nothing.
//! Unconstrained variable pairs count as universal relations wherever a
//! definition quantifies over all variables.

use crate::consistency::{ConsistencyId, ValuePair};
use crate::domain::{DomainState, ValueSet};
use crate::filters::enforce;
use crate::format::filtered_network;
use crate::generator::{derive_seed, generate_model_b, GenSpec};
use crate::network::{ConstraintNetwork, Relation};

/// Solutions found by exhaustive search.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolutionSet {
    /// One value index per variable, in lexicographic order.
    pub solutions: Vec<Vec<usize>>,
    pub truncated: bool,
}

fn rel(net: &ConstraintNetwork, i: usize, a: usize, j: usize, b: usize) -> bool {
    net.relation_value(i, a, j, b).unwrap_or(true)
}

fn consistent_with_prefix(net: &ConstraintNetwork, assignment: &[usize], var: usize, value: usize) -> bool {
    assignment
        .iter()
        .enumerate()
        .all(|(u, &b)| net.relation_value(var, value, u, b) != Some(false))
}

fn backtrack(
    net: &ConstraintNetwork,
    state: &DomainState,
    assignment: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let var = assignment.len();
    if var == net.var_count() {
        return visit(assignment);
    }
    for value in state.domain(var).iter() {
        if consistent_with_prefix(net, assignment, var, value) {
            assignment.push(value);
            let go_on = backtrack(net, state, assignment, visit);
            assignment.pop();
            if !go_on {
                return false;
            }
        }
    }
    true
}

/// All solutions within the current domains, or the first `limit`.
pub fn enumerate_solutions(
    net: &ConstraintNetwork,
    state: &DomainState,
    limit: Option<usize>,
) -> SolutionSet {
    let mut out = SolutionSet::default();
    backtrack(net, state, &mut Vec::new(), &mut |sol| {
        if limit.is_some_and(|l| out.solutions.len() >= l) {
            out.truncated = true;
            return false;
        }
        out.solutions.push(sol.to_vec());
        true
    });
    out
}

/// Keeps exactly the values that occur in some solution.
pub fn variable_completability(net: &ConstraintNetwork, state: &DomainState) -> DomainState {
    let n = net.var_count();
    let mut kept: Vec<ValueSet> = (0..n).map(|v| ValueSet::empty(net.domain_size(v))).collect();
    for var in 0..n {
        for value in state.domain(var).iter() {
            if kept[var].contains(value) {
                continue;
            }
            let mut probe = state.clone();
            probe.assign(var, value);
            backtrack(net, &probe, &mut Vec::new(), &mut |sol| {
                for (u, &b) in sol.iter().enumerate() {
                    kept[u].insert(b);
                }
                false
            });
        }
    }
    DomainState::from_sets(kept)
}

/// Result of a definitional closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    /// Greatest consistent sub-domain; all domains empty when none exists.
    pub state: DomainState,
    /// Originally allowed pairs between surviving values that were removed
    /// (strong path consistency only), with `i < j`, sorted.
    pub pairs: Vec<ValuePair>,
}

impl Closure {
    pub fn is_wipeout(&self) -> bool {
        self.state.is_wiped_out()
    }
}

/// Closure of `lc` from full domains.
pub fn definitional_closure(net: &ConstraintNetwork, lc: ConsistencyId) -> Closure {
    definitional_closure_from(net, &DomainState::full(net), lc)
}

/// Closure of `lc` starting from `start`.
pub fn definitional_closure_from(
    net: &ConstraintNetwork,
    start: &DomainState,
    lc: ConsistencyId,
) -> Closure {
    if lc == ConsistencyId::StrongPc {
        return strong_pc_closure(net, start);
    }
    let mut state = start.clone();
    if !state.is_wiped_out() {
        loop {
            let mut changed = false;
            for i in 0..net.var_count() {
                let values: Vec<usize> = state.domain(i).iter().collect();
                for a in values {
                    if !value_holds(net, &state, lc, i, a) {
                        state.remove(i, a);
                        changed = true;
                    }
                }
            }
            if !changed || state.is_wiped_out() {
                break;
            }
        }
    }
    if state.is_wiped_out() {
        state.clear_all();
    }
    Closure {
        state,
        pairs: Vec::new(),
    }
}

fn supports(net: &ConstraintNetwork, state: &DomainState, i: usize, a: usize, j: usize) -> Vec<usize> {
    state.domain(j).iter().filter(|&b| rel(net, i, a, j, b)).collect()
}

/// `((i, a), (j, b))` extends to every other variable.
fn pair_path_consistent(
    net: &ConstraintNetwork,
    state: &DomainState,
    i: usize,
    a: usize,
    j: usize,
    b: usize,
) -> bool {
    (0..net.var_count())
        .filter(|&k| k != i && k != j)
        .all(|k| {
            state
                .domain(k)
                .iter()
                .any(|c| rel(net, i, a, k, c) && rel(net, j, b, k, c))
        })
}

fn arc_consistent(net: &ConstraintNetwork, state: &DomainState, i: usize, a: usize) -> bool {
    net.arcs(i)
        .iter()
        .all(|arc| !supports(net, state, i, a, arc.neighbor).is_empty())
}

fn value_holds(
    net: &ConstraintNetwork,
    state: &DomainState,
    lc: ConsistencyId,
    i: usize,
    a: usize,
) -> bool {
    let bounded = |k: usize| {
        arc_consistent(net, state, i, a)
            && net.arcs(i).iter().all(|arc| {
                let sup = supports(net, state, i, a, arc.neighbor);
                sup.len() > k
                    || sup
                        .iter()
                        .any(|&b| pair_path_consistent(net, state, i, a, arc.neighbor, b))
            })
    };
    match lc {
        ConsistencyId::Ac => arc_consistent(net, state, i, a),
        ConsistencyId::Rpc => bounded(1),
        ConsistencyId::KRpc(k) => bounded(k.get() as usize),
        ConsistencyId::MaxRpc => net.arcs(i).iter().all(|arc| {
            supports(net, state, i, a, arc.neighbor)
                .iter()
                .any(|&b| pair_path_consistent(net, state, i, a, arc.neighbor, b))
        }),
        ConsistencyId::Pic => {
            let n = net.var_count();
            (0..n).filter(|&j| j != i).all(|j| {
                (j + 1..n).filter(|&k| k != i).all(|k| {
                    state.domain(j).iter().any(|b| {
                        rel(net, i, a, j, b)
                            && state
                                .domain(k)
                                .iter()
                                .any(|c| rel(net, i, a, k, c) && rel(net, j, b, k, c))
                    })
                })
            })
        }
        ConsistencyId::Nic => neighborhood_extends(net, state, i, a),
        ConsistencyId::Sac | ConsistencyId::Srpc => {
            let inner = if lc == ConsistencyId::Sac {
                ConsistencyId::Ac
            } else {
                ConsistencyId::Rpc
            };
            let mut probe = state.clone();
            probe.assign(i, a);
            !definitional_closure_from(net, &probe, inner).is_wipeout()
        }
        ConsistencyId::StrongPc => unreachable!("handled by strong_pc_closure"),
    }
}

fn neighborhood_extends(net: &ConstraintNetwork, state: &DomainState, i: usize, a: usize) -> bool {
    let hood: Vec<usize> = net.arcs(i).iter().map(|arc| arc.neighbor).collect();
    fn extend(
        net: &ConstraintNetwork,
        state: &DomainState,
        hood: &[usize],
        chosen: &mut Vec<(usize, usize)>,
    ) -> bool {
        let Some(&var) = hood.get(chosen.len() - 1) else {
            return true;
        };
        for b in state.domain(var).iter() {
            if chosen
                .iter()
                .all(|&(u, c)| net.relation_value(var, b, u, c) != Some(false))
            {
                chosen.push((var, b));
                if extend(net, state, hood, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    extend(net, state, &hood, &mut vec![(i, a)])
}

#[allow(clippy::needless_range_loop)]
fn strong_pc_closure(net: &ConstraintNetwork, start: &DomainState) -> Closure {
    let n = net.var_count();
    let mut state = start.clone();
    // allowed[i][j] over D_i × D_j for every ordered pair, kept symmetric.
    let mut allowed: Vec<Vec<Relation>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut r = Relation::empty(net.domain_size(i), net.domain_size(j));
                    if i != j {
                        for a in 0..net.domain_size(i) {
                            for b in 0..net.domain_size(j) {
                                r.set(a, b, rel(net, i, a, j, b));
                            }
                        }
                    }
                    r
                })
                .collect()
        })
        .collect();
    let mut wiped = state.is_wiped_out();
    while !wiped {
        let mut changed = false;
        for i in 0..n {
            let values: Vec<usize> = state.domain(i).iter().collect();
            for a in values {
                let viable = (0..n)
                    .filter(|&j| j != i)
                    .all(|j| state.domain(j).iter().any(|b| allowed[i][j].get(a, b)));
                if !viable {
                    state.remove(i, a);
                    changed = true;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for a in state.domain(i).iter() {
                    for b in state.domain(j).iter() {
                        if !allowed[i][j].get(a, b) {
                            continue;
                        }
                        let extends = (0..n).filter(|&k| k != i && k != j).all(|k| {
                            state
                                .domain(k)
                                .iter()
                                .any(|c| allowed[i][k].get(a, c) && allowed[j][k].get(b, c))
                        });
                        if !extends {
                            allowed[i][j].set(a, b, false);
                            allowed[j][i].set(b, a, false);
                            changed = true;
                        }
                    }
                }
            }
        }
        let relation_emptied = (0..n).any(|i| {
            (i + 1..n).any(|j| {
                !state
                    .domain(i)
                    .iter()
                    .any(|a| state.domain(j).iter().any(|b| allowed[i][j].get(a, b)))
            })
        });
        wiped = state.is_wiped_out() || relation_emptied;
        if !changed {
            break;
        }
    }
    if wiped {
        state.clear_all();
        return Closure {
            state,
            pairs: Vec::new(),
        };
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for a in state.domain(i).iter() {
                for b in state.domain(j).iter() {
                    if rel(net, i, a, j, b) && !allowed[i][j].get(a, b) {
                        pairs.push(((i, a), (j, b)));
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    Closure { state, pairs }
}

/// Whether `lc` holds on `net`: its closure removes no value and no pair.
pub fn holds(net: &ConstraintNetwork, lc: ConsistencyId) -> bool {
    let closure = definitional_closure(net, lc);
    closure.state == DomainState::full(net) && closure.pairs.is_empty()
}

/// Kind of an edge of the strength lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// `strong` is strictly stronger than `weak`.
    Strict,
    /// Neither is stronger; witnesses are needed in both directions.
    Incomparable,
}

/// One edge of the strength lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeEdge {
    pub strong: ConsistencyId,
    pub weak: ConsistencyId,
    pub kind: EdgeKind,
}

impl LatticeEdge {
    /// `strong>weak` or `strong<>weak`.
    pub fn label(&self) -> String {
        let sep = match self.kind {
            EdgeKind::Strict => ">",
            EdgeKind::Incomparable => "<>",
        };
        format!("{}{}{}", self.strong, sep, self.weak)
    }

    /// Witness directions `(deletes, holds)` this edge requires.
    pub fn directions(&self) -> Vec<(ConsistencyId, ConsistencyId)> {
        match self.kind {
            EdgeKind::Strict => vec![(self.strong, self.weak)],
            EdgeKind::Incomparable => {
                vec![(self.strong, self.weak), (self.weak, self.strong)]
            }
        }
    }
}

fn k(k: u32) -> ConsistencyId {
    ConsistencyId::k_rpc(k).expect("k >= 1")
}

/// Strict and incomparable edges of the lattice.
pub fn lattice_edges() -> Vec<LatticeEdge> {
    use ConsistencyId::*;
    use EdgeKind::*;
    let e = |strong, weak, kind| LatticeEdge { strong, weak, kind };
    vec![
        e(Rpc, Ac, Strict),
        e(k(2), k(1), Strict),
        e(k(3), k(2), Strict),
        e(MaxRpc, k(1), Strict),
        e(MaxRpc, k(2), Strict),
        e(Pic, Rpc, Strict),
        e(MaxRpc, Pic, Strict),
        e(Sac, MaxRpc, Strict),
        e(Nic, MaxRpc, Strict),
        e(StrongPc, Sac, Strict),
        e(Srpc, Sac, Strict),
        e(Pic, k(2), Incomparable),
        e(Nic, Sac, Incomparable),
        e(Nic, StrongPc, Incomparable),
        e(Nic, Srpc, Incomparable),
    ]
}

/// A required domain containment `smaller ⊆ larger`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Containment {
    pub smaller: ConsistencyId,
    pub larger: ConsistencyId,
}

/// Containments between closures that hold on every network with at least
/// three variables, for k-RPC up to `max_k`.
pub fn lattice_containments(max_k: u32) -> Vec<Containment> {
    use ConsistencyId::*;
    let c = |smaller, larger| Containment { smaller, larger };
    let mut out = vec![
        c(MaxRpc, Pic),
        c(Pic, Rpc),
        c(Rpc, Ac),
        c(Sac, MaxRpc),
        c(StrongPc, Sac),
        c(Srpc, Sac),
        c(Nic, MaxRpc),
    ];
    for big in 1..=max_k {
        out.push(c(MaxRpc, k(big)));
        for small in 1..big {
            out.push(c(k(big), k(small)));
        }
    }
    out
}

/// Parameters of the random witness search.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessParams {
    pub n: usize,
    pub d: usize,
    pub densities: Vec<f64>,
    /// Candidate tightness values; empty means every `t / d²` strictly
    /// between 0 and 1.
    pub tightness: Vec<f64>,
    pub attempts: usize,
    /// Also try the sub-networks induced by each triple of variables.
    pub sub_networks: bool,
}

impl Default for WitnessParams {
    fn default() -> Self {
        WitnessParams {
            n: 6,
            d: 3,
            densities: vec![0.4, 0.6, 0.8, 1.0],
            tightness: Vec::new(),
            attempts: 100_000,
            sub_networks: true,
        }
    }
}

/// A verified witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub net: ConstraintNetwork,
    /// Attempt index that produced it.
    pub attempt: usize,
}

fn deletes_nothing(net: &ConstraintNetwork, lc: ConsistencyId) -> bool {
    let mut state = DomainState::full(net);
    let result = enforce(net, &mut state, lc, None);
    result.deleted.is_empty() && result.deleted_pairs.is_empty()
}

fn deletes_values(net: &ConstraintNetwork, lc: ConsistencyId) -> bool {
    let mut state = DomainState::full(net);
    !enforce(net, &mut state, lc, None).deleted.is_empty()
}

/// Restriction of `net` to the closure of `lc`, with removed pairs dropped
/// from the relations (adding constraints where needed).
fn reduce(net: &ConstraintNetwork, lc: ConsistencyId) -> Option<ConstraintNetwork> {
    let mut state = DomainState::full(net);
    let result = enforce(net, &mut state, lc, None);
    if result.wipeout || (result.deleted.is_empty() && result.deleted_pairs.is_empty()) {
        return None;
    }
    filtered_network(net, &state, &result.deleted_pairs)
}

/// Sub-networks induced by every set of three variables, when `net` has more.
fn triples(net: &ConstraintNetwork) -> Vec<ConstraintNetwork> {
    let n = net.var_count();
    if n <= 3 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                let vars = [x, y, z];
                let relations = net
                    .constraints()
                    .iter()
                    .filter_map(|c| {
                        let (i, j) = c.scope();
                        let li = vars.iter().position(|&v| v == i)?;
                        let lj = vars.iter().position(|&v| v == j)?;
                        Some((li, lj, c.relation().clone()))
                    })
                    .collect();
                let domains = vars.iter().map(|&v| net.values(v).to_vec()).collect();
                out.extend(ConstraintNetwork::from_relations(domains, relations).ok());
            }
        }
    }
    out
}

/// Searches a network on which `weak` removes nothing (neither values nor
/// pairs) while `strong` removes at least one value. Each attempt draws a
/// Model B network and also tries its restriction to the `weak` closure and,
/// optionally, its 3-variable sub-networks; every hit is confirmed by the
/// definitional closures.
pub fn witness_search(
    strong: ConsistencyId,
    weak: ConsistencyId,
    params: &WitnessParams,
    seed: u64,
) -> Option<Witness> {
    if strong == weak || params.densities.is_empty() || params.n < 2 || params.d < 1 {
        return None;
    }
    let d2 = params.d * params.d;
    let grid: Vec<f64> = if params.tightness.is_empty() {
        (1..d2).map(|t| t as f64 / d2 as f64).collect()
    } else {
        params.tightness.clone()
    };
    if grid.is_empty() {
        return None;
    }
    for attempt in 0..params.attempts {
        let spec = GenSpec {
            n: params.n,
            d: params.d,
            p1: params.densities[attempt % params.densities.len()],
            p2: grid[(attempt / params.densities.len()) % grid.len()],
            seed: derive_seed(seed, attempt as u64),
        };
        let Ok(net) = generate_model_b(&spec) else {
            return None;
        };
        let mut candidates = vec![net.clone()];
        candidates.extend(reduce(&net, weak));
        if params.sub_networks {
            for sub in triples(&net) {
                candidates.extend(reduce(&sub, weak));
                candidates.push(sub);
            }
        }
        for candidate in candidates {
            if deletes_nothing(&candidate, weak)
                && deletes_values(&candidate, strong)
                && holds(&candidate, weak)
                && definitional_closure(&candidate, strong).state != DomainState::full(&candidate)
            {
                return Some(Witness {
                    net: candidate,
                    attempt,
                });
            }
        }
    }
    None
}
