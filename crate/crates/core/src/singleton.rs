//! Singleton arc consistency and singleton restricted path consistency.
//!
//! The outer loop sweeps every value, probing the sub-network where its
//! domain is reduced to that value, and repeats until a full sweep deletes
//! nothing. A probe starts from a copy of the main propagation state, so it
//! only has to propagate the consequences of the assignment.

use std::time::Instant;

use crate::consistency::FilterResult;
use crate::domain::{restrict_to_singleton, DomainState};
use crate::filters::support::{Rule, SupportEngine};
use crate::filters::{finish, Ctx, Step};
use crate::network::ConstraintNetwork;

/// Consistency enforced inside each singleton probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inner {
    Ac,
    Rpc,
}

impl Inner {
    fn rule(self) -> Rule {
        match self {
            Inner::Ac => Rule::Ac,
            Inner::Rpc => Rule::Bounded(1),
        }
    }
}

/// Order in which the outer loop visits values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SweepOrder {
    #[default]
    Ascending,
    Descending,
}

/// Whether `inner` leaves `D_i = {a}` without a wipeout. Values outside the
/// current domain fail. `state` is never modified.
pub fn singleton_test(
    net: &ConstraintNetwork,
    state: &DomainState,
    i: usize,
    a: usize,
    inner: Inner,
) -> bool {
    let Ok(mut probe) = restrict_to_singleton(net, state, i, a) else {
        return false;
    };
    let mut engine = SupportEngine::new(net, inner.rule());
    engine.enqueue_all();
    let mut ctx = Ctx::new(None);
    engine.propagate(&mut probe, &mut ctx) != Step::Wipeout
}

/// Singleton arc consistency.
pub fn enforce_sac(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    enforce_singleton(net, state, Inner::Ac, SweepOrder::Ascending, None)
}

/// Singleton restricted path consistency.
pub fn enforce_srpc(net: &ConstraintNetwork, state: &mut DomainState) -> FilterResult {
    enforce_singleton(net, state, Inner::Rpc, SweepOrder::Ascending, None)
}

fn sweep_values(state: &DomainState, order: SweepOrder) -> Vec<(usize, usize)> {
    let mut values: Vec<(usize, usize)> = (0..state.var_count())
        .flat_map(|v| state.domain(v).iter().map(move |a| (v, a)))
        .collect();
    if order == SweepOrder::Descending {
        values.reverse();
    }
    values
}

/// Enforces the singleton consistency over `inner`, visiting values in `order`.
pub fn enforce_singleton(
    net: &ConstraintNetwork,
    state: &mut DomainState,
    inner: Inner,
    order: SweepOrder,
    deadline: Option<Instant>,
) -> FilterResult {
    let started = Instant::now();
    let mut ctx = Ctx::new(deadline);
    if state.is_wiped_out() {
        return finish(state, ctx, Step::Wipeout, started);
    }
    let mut engine = SupportEngine::new(net, inner.rule());
    engine.enqueue_all();
    let step = 'run: {
        match engine.propagate(state, &mut ctx) {
            Step::Done => {}
            other => break 'run other,
        }
        loop {
            let mut deleted_any = false;
            for (i, a) in sweep_values(state, order) {
                if !state.contains(i, a) {
                    continue;
                }
                if ctx.expired() {
                    break 'run Step::TimedOut;
                }
                let mut probe_state = state.clone();
                probe_state.assign(i, a);
                let mut probe = engine.clone();
                probe.enqueue(i);
                let mut probe_ctx = Ctx::new(deadline);
                probe_ctx.counter = ctx.counter;
                let verdict = probe.propagate(&mut probe_state, &mut probe_ctx);
                ctx.counter = probe_ctx.counter;
                match verdict {
                    Step::Done => {}
                    Step::TimedOut => break 'run Step::TimedOut,
                    Step::Wipeout => {
                        state.remove(i, a);
                        ctx.deleted.push((i, a));
                        deleted_any = true;
                        if state.domain(i).is_empty() {
                            break 'run Step::Wipeout;
                        }
                        engine.enqueue(i);
                        match engine.propagate(state, &mut ctx) {
                            Step::Done => {}
                            other => break 'run other,
                        }
                    }
                }
            }
            if !deleted_any {
                break Step::Done;
            }
        }
    };
    finish(state, ctx, step, started)
}
