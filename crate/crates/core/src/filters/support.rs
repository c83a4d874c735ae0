//! Support-based propagation shared by AC, k-RPC and Max-RPC.
//!
//! Every `(value, constraint)` slot remembers the supports found so far. The
//! set of supports of a value only shrinks during one fixpoint computation, so
//! the l-th smallest support never moves backwards and a scan can always
//! resume from the cached position. The same holds for the smallest
//! path-consistent support.

use std::collections::VecDeque;

use crate::domain::DomainState;
use crate::network::{Arc, CheckCounter, ConstraintNetwork};

use super::{Ctx, Revision, Step};

const UNSET: u32 = u32::MAX;
const NONE: u32 = u32::MAX - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Rule {
    /// A support on every constraint.
    Ac,
    /// A path-consistent support wherever a value has at most `k` supports.
    Bounded(usize),
    /// A path-consistent support on every constraint.
    Max,
}

/// Resumable per-slot scan positions.
#[derive(Clone, Debug)]
pub struct SupportCache {
    offsets: Vec<usize>,
    width: usize,
    supports: Vec<u32>,
    pc: Vec<u32>,
    /// Max-RPC only: per slot, the smallest witness on each third variable
    /// for the support recorded in `witness_for`.
    witness_start: Vec<usize>,
    witness_for: Vec<u32>,
    witness: Vec<u32>,
}

impl SupportCache {
    fn new(net: &ConstraintNetwork, rule: Rule) -> Self {
        let mut offsets = Vec::with_capacity(net.var_count() + 1);
        let mut total = 0;
        for var in 0..net.var_count() {
            offsets.push(total);
            total += net.domain_size(var) * net.degree(var);
        }
        offsets.push(total);
        let width = match rule {
            Rule::Ac => 1,
            Rule::Bounded(k) => k + 1,
            Rule::Max => 0,
        };
        let pc_len = if rule == Rule::Ac { 0 } else { total };
        let mut witness_start = Vec::new();
        if rule == Rule::Max {
            witness_start.reserve(total + 1);
            let mut at = 0;
            for var in 0..net.var_count() {
                for _ in 0..net.domain_size(var) {
                    for arc in net.arcs(var) {
                        witness_start.push(at);
                        at += net.thirds(arc.constraint).len();
                    }
                }
            }
            witness_start.push(at);
        }
        let witness_len = witness_start.last().copied().unwrap_or(0);
        SupportCache {
            offsets,
            width,
            supports: vec![UNSET; total * width],
            pc: vec![UNSET; pc_len],
            witness_for: vec![UNSET; if rule == Rule::Max { total } else { 0 }],
            witness: vec![UNSET; witness_len],
            witness_start,
        }
    }

    #[inline]
    fn slot(&self, net: &ConstraintNetwork, var: usize, value: usize, pos: usize) -> usize {
        self.offsets[var] + value * net.degree(var) + pos
    }
}

/// Position of each arc's reverse inside the neighbor's adjacency list.
pub(crate) fn arc_positions(net: &ConstraintNetwork) -> Vec<[usize; 2]> {
    let mut pos = vec![[0usize; 2]; net.constraint_count()];
    for var in 0..net.var_count() {
        for (p, arc) in net.arcs(var).iter().enumerate() {
            pos[arc.constraint][usize::from(!arc.forward)] = p;
        }
    }
    pos
}

/// Position of `other` in the adjacency list of `var`, given the constraint.
#[inline]
pub(crate) fn position_of(
    net: &ConstraintNetwork,
    positions: &[[usize; 2]],
    var: usize,
    other: usize,
) -> usize {
    let id = net
        .constraint_between(var, other)
        .expect("linked variables");
    positions[id][usize::from(var > other)]
}

#[inline]
pub(crate) fn arc_to(net: &ConstraintNetwork, var: usize, other: usize) -> Arc {
    Arc {
        neighbor: other,
        constraint: net
            .constraint_between(var, other)
            .expect("linked variables"),
        forward: var < other,
    }
}

#[inline]
pub(crate) fn check(
    net: &ConstraintNetwork,
    arc: Arc,
    a: usize,
    b: usize,
    counter: &mut CheckCounter,
) -> bool {
    counter.bump();
    net.arc_allows(arc, a, b)
}

/// Whether `((i, a), (j, b))` extends to every third variable closing a
/// triangle with the constraint between `i` and `j`.
pub(crate) fn path_consistent(
    net: &ConstraintNetwork,
    state: &DomainState,
    i: usize,
    a: usize,
    arc: Arc,
    b: usize,
    counter: &mut CheckCounter,
) -> bool {
    let j = arc.neighbor;
    for &w in net.thirds(arc.constraint) {
        let iw = arc_to(net, i, w);
        let jw = arc_to(net, j, w);
        let dom = state.domain(w);
        let mut c = dom.first();
        let mut witnessed = false;
        while let Some(cv) = c {
            if check(net, iw, a, cv, counter) && check(net, jw, b, cv, counter) {
                witnessed = true;
                break;
            }
            c = dom.next_from(cv + 1);
        }
        if !witnessed {
            return false;
        }
    }
    true
}

/// Smallest path-consistent support of `(i, a)` in `D_j` at index `>= from`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn scan_pc_support(
    net: &ConstraintNetwork,
    state: &DomainState,
    i: usize,
    a: usize,
    arc: Arc,
    from: usize,
    known_support: Option<usize>,
    counter: &mut CheckCounter,
) -> Option<usize> {
    let dom = state.domain(arc.neighbor);
    let mut b = dom.next_from(from);
    while let Some(bv) = b {
        let supported = known_support == Some(bv) || check(net, arc, a, bv, counter);
        if supported && path_consistent(net, state, i, a, arc, bv, counter) {
            return Some(bv);
        }
        b = dom.next_from(bv + 1);
    }
    None
}

#[derive(Clone, Debug)]
pub(crate) struct SupportEngine<'n> {
    net: &'n ConstraintNetwork,
    rule: Rule,
    cache: SupportCache,
    positions: std::sync::Arc<Vec<[usize; 2]>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

impl<'n> SupportEngine<'n> {
    pub(crate) fn new(net: &'n ConstraintNetwork, rule: Rule) -> Self {
        SupportEngine {
            net,
            rule,
            cache: SupportCache::new(net, rule),
            positions: std::sync::Arc::new(arc_positions(net)),
            queue: VecDeque::new(),
            queued: vec![false; net.var_count()],
        }
    }

    pub(crate) fn enqueue(&mut self, var: usize) {
        if !self.queued[var] {
            self.queued[var] = true;
            self.queue.push_back(var);
        }
    }

    pub(crate) fn enqueue_all(&mut self) {
        for var in 0..self.net.var_count() {
            self.enqueue(var);
        }
    }

    pub(crate) fn clear_queue(&mut self) {
        while let Some(v) = self.queue.pop_front() {
            self.queued[v] = false;
        }
    }

    /// Runs the propagation queue to its fixpoint.
    pub(crate) fn propagate(&mut self, state: &mut DomainState, ctx: &mut Ctx) -> Step {
        let net = self.net;
        while let Some(v) = self.queue.pop_front() {
            self.queued[v] = false;
            if ctx.expired() {
                self.clear_queue();
                return Step::TimedOut;
            }
            for arc in net.arcs(v) {
                let i = arc.neighbor;
                let p = self.positions[arc.constraint][usize::from(arc.forward)];
                match self.revise(state, ctx, i, p) {
                    Revision::Unchanged => {}
                    Revision::Shrunk => self.enqueue(i),
                    Revision::Wipeout => {
                        self.clear_queue();
                        return Step::Wipeout;
                    }
                }
                if self.rule != Rule::Ac {
                    for &w in net.thirds(arc.constraint) {
                        let pw = position_of(net, &self.positions, i, w);
                        match self.revise(state, ctx, i, pw) {
                            Revision::Unchanged => {}
                            Revision::Shrunk => self.enqueue(i),
                            Revision::Wipeout => {
                                self.clear_queue();
                                return Step::Wipeout;
                            }
                        }
                    }
                }
            }
        }
        Step::Done
    }

    /// Removes the values of `i` that lost their support on its `p`-th arc.
    pub(crate) fn revise(
        &mut self,
        state: &mut DomainState,
        ctx: &mut Ctx,
        i: usize,
        p: usize,
    ) -> Revision {
        let mut a = state.domain(i).first();
        let mut changed = false;
        while let Some(av) = a {
            if !self.viable(state, &mut ctx.counter, i, av, p) {
                state.remove(i, av);
                ctx.deleted.push((i, av));
                changed = true;
            }
            a = state.domain(i).next_from(av + 1);
        }
        Revision::of(changed, state.domain(i).is_empty())
    }

    fn viable(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        i: usize,
        a: usize,
        p: usize,
    ) -> bool {
        match self.rule {
            Rule::Ac => self.has_support(state, counter, i, a, p),
            Rule::Bounded(k) => self.bounded_viable(state, counter, i, a, p, k),
            Rule::Max => self.max_viable(state, counter, i, a, p),
        }
    }

    fn has_support(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        i: usize,
        a: usize,
        p: usize,
    ) -> bool {
        let net = self.net;
        let arc = net.arcs(i)[p];
        let slot = self.cache.slot(net, i, a, p);
        let cached = self.cache.supports[slot];
        let dom = state.domain(arc.neighbor);
        let from = match cached {
            NONE => return false,
            UNSET => 0,
            s if dom.contains(s as usize) => return true,
            s => s as usize + 1,
        };
        let mut b = dom.next_from(from);
        while let Some(bv) = b {
            if check(net, arc, a, bv, counter) {
                self.cache.supports[slot] = bv as u32;
                return true;
            }
            b = dom.next_from(bv + 1);
        }
        self.cache.supports[slot] = NONE;
        false
    }

    fn bounded_viable(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        i: usize,
        a: usize,
        p: usize,
        k: usize,
    ) -> bool {
        let net = self.net;
        let arc = net.arcs(i)[p];
        let slot = self.cache.slot(net, i, a, p);
        let width = self.cache.width;
        let base = slot * width;
        let dom = state.domain(arc.neighbor);
        let mut from = 0usize;
        let mut count = 0usize;
        for l in 0..width {
            let cached = self.cache.supports[base + l];
            if cached == NONE {
                break;
            }
            let start = if cached == UNSET {
                from
            } else {
                from.max(cached as usize)
            };
            let mut found = None;
            let mut b = dom.next_from(start);
            while let Some(bv) = b {
                if bv == cached as usize || check(net, arc, a, bv, counter) {
                    found = Some(bv);
                    break;
                }
                b = dom.next_from(bv + 1);
            }
            match found {
                Some(bv) => {
                    self.cache.supports[base + l] = bv as u32;
                    from = bv + 1;
                    count += 1;
                }
                None => {
                    for rest in l..width {
                        self.cache.supports[base + rest] = NONE;
                    }
                    break;
                }
            }
        }
        if count == 0 {
            return false;
        }
        if count > k {
            return true;
        }
        let pc = self.cache.pc[slot];
        if pc == NONE {
            return false;
        }
        let lower = if pc == UNSET { 0 } else { pc as usize };
        for l in 0..count {
            let b = self.cache.supports[base + l] as usize;
            if b >= lower && path_consistent(net, state, i, a, arc, b, counter) {
                self.cache.pc[slot] = b as u32;
                return true;
            }
        }
        self.cache.pc[slot] = NONE;
        false
    }

    fn max_viable(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        i: usize,
        a: usize,
        p: usize,
    ) -> bool {
        let net = self.net;
        let arc = net.arcs(i)[p];
        let slot = self.cache.slot(net, i, a, p);
        let (from, known) = match self.cache.pc[slot] {
            NONE => return false,
            UNSET => (0, None),
            s => (s as usize, Some(s as usize)),
        };
        let dom = state.domain(arc.neighbor);
        let mut b = dom.next_from(from);
        while let Some(bv) = b {
            let supported = known == Some(bv) || check(net, arc, a, bv, counter);
            if supported && self.witnessed(state, counter, i, a, arc, slot, bv) {
                self.cache.pc[slot] = bv as u32;
                return true;
            }
            b = dom.next_from(bv + 1);
        }
        self.cache.pc[slot] = NONE;
        false
    }

    /// `path_consistent` with witnesses resumed from the cache of `slot`.
    #[allow(clippy::too_many_arguments)]
    fn witnessed(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        i: usize,
        a: usize,
        arc: Arc,
        slot: usize,
        b: usize,
    ) -> bool {
        let net = self.net;
        let range = self.cache.witness_start[slot]..self.cache.witness_start[slot + 1];
        let witnesses = &mut self.cache.witness[range];
        if self.cache.witness_for[slot] != b as u32 {
            self.cache.witness_for[slot] = b as u32;
            witnesses.fill(UNSET);
        }
        let j = arc.neighbor;
        for (t, &w) in net.thirds(arc.constraint).iter().enumerate() {
            let dom = state.domain(w);
            let from = match witnesses[t] {
                UNSET => 0,
                c if dom.contains(c as usize) => continue,
                c => c as usize + 1,
            };
            let iw = arc_to(net, i, w);
            let jw = arc_to(net, j, w);
            let mut c = dom.next_from(from);
            loop {
                match c {
                    Some(cv) if check(net, iw, a, cv, counter) && check(net, jw, b, cv, counter) => {
                        witnesses[t] = cv as u32;
                        break;
                    }
                    Some(cv) => c = dom.next_from(cv + 1),
                    None => return false,
                }
            }
        }
        true
    }
}
