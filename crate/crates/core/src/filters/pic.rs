//! Path inverse consistency.
//!
//! Networks with fewer than three variables are vacuously path inverse
//! consistent. Otherwise the filter first reaches the AC fixpoint and from
//! then on only 3-cliques of the constraint graph need checking: an arc
//! consistent value always extends to a triple that is not a clique.

use std::collections::VecDeque;
use std::time::Instant;

use crate::consistency::FilterResult;
use crate::domain::DomainState;
use crate::network::{CheckCounter, ConstraintNetwork};

use super::support::{arc_positions, arc_to, check, Rule, SupportEngine};
use super::{finish, Ctx, Revision, Step};

const UNSET: u32 = u32::MAX;
const NONE: u32 = u32::MAX - 1;

/// The cliques `{i, j, k}` of each variable `i`, as `(j, k)` with `j < k`.
struct CliqueSlots {
    per_var: Vec<Vec<(usize, usize)>>,
    offsets: Vec<usize>,
    /// Last extension `(b, c)` found for each `(i, a, clique)`.
    cache: Vec<(u32, u32)>,
}

impl CliqueSlots {
    fn new(net: &ConstraintNetwork) -> Self {
        let mut per_var = vec![Vec::new(); net.var_count()];
        for &[i, j, k] in &net.cliques().triangles {
            per_var[i].push((j, k));
            per_var[j].push((i, k));
            per_var[k].push((i, j));
        }
        for list in &mut per_var {
            list.sort_unstable();
        }
        let mut offsets = Vec::with_capacity(net.var_count() + 1);
        let mut total = 0;
        for (var, list) in per_var.iter().enumerate() {
            offsets.push(total);
            total += list.len() * net.domain_size(var);
        }
        offsets.push(total);
        CliqueSlots {
            per_var,
            offsets,
            cache: vec![(UNSET, UNSET); total],
        }
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let key = (j.min(k), j.max(k));
        self.per_var[i]
            .binary_search(&key)
            .expect("clique of variable")
    }
}

struct PicEngine<'n> {
    net: &'n ConstraintNetwork,
    ac: SupportEngine<'n>,
    slots: CliqueSlots,
    positions: Vec<[usize; 2]>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

impl<'n> PicEngine<'n> {
    fn enqueue(&mut self, var: usize) {
        if !self.queued[var] {
            self.queued[var] = true;
            self.queue.push_back(var);
        }
    }

    /// Whether `(i, a)` extends to the clique `{i, j, k}`.
    fn extends(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        i: usize,
        a: usize,
        q: usize,
    ) -> bool {
        let net = self.net;
        let (j, k) = self.slots.per_var[i][q];
        let slot = self.slots.offsets[i] + a * self.slots.per_var[i].len() + q;
        let (b0, c0) = self.slots.cache[slot];
        if b0 == NONE {
            return false;
        }
        let (dj, dk) = (state.domain(j), state.domain(k));
        if b0 != UNSET && dj.contains(b0 as usize) && dk.contains(c0 as usize) {
            return true;
        }
        let (ij, ik, jk) = (arc_to(net, i, j), arc_to(net, i, k), arc_to(net, j, k));
        let start_b = if b0 == UNSET { 0 } else { b0 as usize };
        let mut b = dj.next_from(start_b);
        while let Some(bv) = b {
            let resume = b0 != UNSET && bv == b0 as usize;
            if resume || check(net, ij, a, bv, counter) {
                let start_c = if resume { c0 as usize } else { 0 };
                let mut c = dk.next_from(start_c);
                while let Some(cv) = c {
                    if check(net, ik, a, cv, counter) && check(net, jk, bv, cv, counter) {
                        self.slots.cache[slot] = (bv as u32, cv as u32);
                        return true;
                    }
                    c = dk.next_from(cv + 1);
                }
            }
            b = dj.next_from(bv + 1);
        }
        self.slots.cache[slot] = (NONE, NONE);
        false
    }

    /// Removes values of `i` with no extension to clique `q`.
    fn revise_clique(&mut self, state: &mut DomainState, ctx: &mut Ctx, i: usize, q: usize) -> Revision {
        let mut changed = false;
        let mut a = state.domain(i).first();
        while let Some(av) = a {
            if !self.extends(state, &mut ctx.counter, i, av, q) {
                state.remove(i, av);
                ctx.deleted.push((i, av));
                changed = true;
            }
            a = state.domain(i).next_from(av + 1);
        }
        Revision::of(changed, state.domain(i).is_empty())
    }

    /// Queues `i` on shrink; true on wipeout.
    fn absorb(&mut self, i: usize, rev: Revision) -> bool {
        match rev {
            Revision::Unchanged => false,
            Revision::Shrunk => {
                self.enqueue(i);
                false
            }
            Revision::Wipeout => true,
        }
    }

    fn run(&mut self, state: &mut DomainState, ctx: &mut Ctx) -> Step {
        let net = self.net;
        self.ac.enqueue_all();
        match self.ac.propagate(state, ctx) {
            Step::Done => {}
            other => return other,
        }
        for i in 0..net.var_count() {
            for q in 0..self.slots.per_var[i].len() {
                let rev = self.revise_clique(state, ctx, i, q);
                if self.absorb(i, rev) {
                    return Step::Wipeout;
                }
            }
        }
        while let Some(v) = self.queue.pop_front() {
            self.queued[v] = false;
            if ctx.expired() {
                return Step::TimedOut;
            }
            for arc in net.arcs(v) {
                let i = arc.neighbor;
                let p = self.positions[arc.constraint][usize::from(arc.forward)];
                let rev = self.ac.revise(state, ctx, i, p);
                if self.absorb(i, rev) {
                    return Step::Wipeout;
                }
                for &w in net.thirds(arc.constraint) {
                    let q = self.slots.index(i, v, w);
                    let rev = self.revise_clique(state, ctx, i, q);
                    if self.absorb(i, rev) {
                        return Step::Wipeout;
                    }
                }
            }
        }
        Step::Done
    }
}

pub(super) fn enforce(
    net: &ConstraintNetwork,
    state: &mut DomainState,
    deadline: Option<Instant>,
) -> FilterResult {
    let started = Instant::now();
    let mut ctx = Ctx::new(deadline);
    if state.is_wiped_out() {
        return finish(state, ctx, Step::Wipeout, started);
    }
    if net.var_count() < 3 {
        return finish(state, ctx, Step::Done, started);
    }
    let mut engine = PicEngine {
        net,
        ac: SupportEngine::new(net, Rule::Ac),
        slots: CliqueSlots::new(net),
        positions: arc_positions(net),
        queue: VecDeque::new(),
        queued: vec![false; net.var_count()],
    };
    let step = engine.run(state, &mut ctx);
    finish(state, ctx, step, started)
}
