//! Enforcement of the non-singleton local consistencies.
//!
//! Every `enforce_*` function shrinks `state` in place to the greatest
//! sub-domain satisfying its consistency. When some domain empties, the
//! network is inconsistent for that consistency and every domain is cleared,
//! so the final state never depends on where propagation happened to stop.

mod nic;
mod pic;
mod strong_pc;
pub(crate) mod support;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::consistency::{ConsistencyId, FilterResult};
use crate::domain::DomainState;
use crate::network::{CheckCounter, ConstraintNetwork, NetworkError};
use crate::singleton;

pub use support::SupportCache;

use support::{Rule, SupportEngine};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterError {
    #[error("k-RPC needs k >= 1 (use AC for k = 0)")]
    InvalidK,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    Done,
    Wipeout,
    TimedOut,
}

/// Effect of revising one variable's values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Revision {
    Unchanged,
    Shrunk,
    Wipeout,
}

impl Revision {
    pub(crate) fn of(changed: bool, empty: bool) -> Self {
        match (changed, empty) {
            (_, true) => Revision::Wipeout,
            (true, false) => Revision::Shrunk,
            (false, false) => Revision::Unchanged,
        }
    }
}

/// Per-run bookkeeping.
#[derive(Debug)]
pub(crate) struct Ctx {
    pub counter: CheckCounter,
    pub deleted: Vec<(usize, usize)>,
    pub deadline: Option<Instant>,
}

impl Ctx {
    pub(crate) fn new(deadline: Option<Instant>) -> Self {
        Ctx {
            counter: CheckCounter::new(),
            deleted: Vec::new(),
            deadline,
        }
    }

    #[inline]
    pub(crate) fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Turns a finished run into a result, clearing every domain on wipeout.
pub(crate) fn finish(state: &mut DomainState, ctx: Ctx, step: Step, started: Instant) -> FilterResult {
    let mut deleted = ctx.deleted;
    let wipeout = step == Step::Wipeout || state.is_wiped_out();
    if wipeout {
        deleted.extend(state.clear_all());
    }
    FilterResult {
        deleted,
        wipeout,
        checks: ctx.counter.get(),
        elapsed: started.elapsed(),
        timed_out: step == Step::TimedOut,
        deleted_pairs: Vec::new(),
    }
}

/// Deadline `budget` from now; `None` means unbounded.
pub fn deadline_after(budget: Option<Duration>) -> Option<Instant> {
    budget.map(|b| Instant::now() + b)
}

fn run_support(
    net: &ConstraintNetwork,
    state: &mut DomainState,
    rule: Rule,
    deadline: Option<Instant>,
) -> FilterResult {
    let started = Instant::now();
    let mut ctx = Ctx::new(deadline);
    if state.is_wiped_out() {
        return finish(state, ctx, Step::Wipeout, started);
    }
    let mut engine = SupportEngine::new(net, rule);
    engine.enqueue_all();
    let step = engine.propagate(state, &mut ctx);
    finish(state, ctx, step, started)
}

/// Arc consistency.
pub fn enforce_ac(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    run_support(net, state, Rule::Ac, None)
}

/// Restricted path consistency (1-RPC).
pub fn enforce_rpc(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    run_support(net, state, Rule::Bounded(1), None)
}

/// k-restricted path consistency.
pub fn enforce_k_rpc(
    net: &ConstraintNetwork,
    state: &mut DomainState,
    k: u32,
) -> Result<FilterResult, FilterError> {
    if k < 1 {
        return Err(FilterError::InvalidK);
    }
    Ok(run_support(net, state, Rule::Bounded(k as usize), None))
}

/// Max-restricted path consistency.
pub fn enforce_max_rpc(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    run_support(net, state, Rule::Max, None)
}

/// Path inverse consistency.
pub fn enforce_pic(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    pic::enforce(net, state, None)
}

/// Neighborhood inverse consistency, stopping at `deadline` with a sound
/// partial result.
pub fn enforce_nic(
    net: &ConstraintNetwork,
    state: &mut DomainState,
    deadline: Option<Instant>,
) -> FilterResult {
    nic::enforce(net, state, deadline)
}

/// Strong path consistency on the completed constraint graph.
pub fn enforce_strong_pc(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    strong_pc::enforce(net, state, None)
}

/// Runs the filter for `lc`; every filter honours `deadline`.
pub fn enforce(
    net: &ConstraintNetwork,
    state: &mut DomainState,
    lc: ConsistencyId,
    deadline: Option<Instant>,
) -> FilterResult {
    match lc {
        ConsistencyId::Ac => run_support(net, state, Rule::Ac, deadline),
        ConsistencyId::Rpc => run_support(net, state, Rule::Bounded(1), deadline),
        ConsistencyId::KRpc(k) => run_support(net, state, Rule::Bounded(k.get() as usize), deadline),
        ConsistencyId::MaxRpc => run_support(net, state, Rule::Max, deadline),
        ConsistencyId::Pic => pic::enforce(net, state, deadline),
        ConsistencyId::Nic => nic::enforce(net, state, deadline),
        ConsistencyId::StrongPc => strong_pc::enforce(net, state, deadline),
        ConsistencyId::Sac => singleton::enforce_singleton(
            net,
            state,
            singleton::Inner::Ac,
            singleton::SweepOrder::Ascending,
            deadline,
        ),
        ConsistencyId::Srpc => singleton::enforce_singleton(
            net,
            state,
            singleton::Inner::Rpc,
            singleton::SweepOrder::Ascending,
            deadline,
        ),
    }
}

/// Smallest `b >= from` in the current `D_j` that supports `(i, a)` and
/// extends to every third variable of a 3-clique over `{i, j}`.
pub fn find_pc_support(
    net: &ConstraintNetwork,
    state: &DomainState,
    i: usize,
    a: usize,
    j: usize,
    from: usize,
    counter: &mut CheckCounter,
) -> Result<Option<usize>, FilterError> {
    if !net.are_linked(i, j) {
        return Err(NetworkError::NoConstraint(i, j).into());
    }
    if !state.contains(i, a) {
        return Err(NetworkError::ValueNotInDomain { var: i, value: a }.into());
    }
    let arc = support::arc_to(net, i, j);
    Ok(support::scan_pc_support(net, state, i, a, arc, from, None, counter))
}

#[cfg(test)]
mod tests;
