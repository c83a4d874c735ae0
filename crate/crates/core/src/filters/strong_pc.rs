//! Strong path consistency on the completed constraint graph.
//!
//! Relations are copied into per-direction bit matrices, with universal
//! relations between unconstrained variables. Processing the pair `{i, j}`
//! revises both domains against `R_ij`, then `R_ik` through `j` and `R_jk`
//! through `i` for every other `k`.

use std::collections::VecDeque;
use std::time::Instant;

use crate::consistency::{FilterResult, ValuePair};
use crate::domain::DomainState;
use crate::network::{CheckCounter, ConstraintNetwork};

use super::{finish, Ctx, Revision, Step};

struct Completed {
    n: usize,
    words: Vec<usize>,
    /// `rel[i * n + j]`: `d_i` rows of `words[j]` words, bit `b` of row `a`
    /// set iff `((i, a), (j, b))` is allowed.
    rel: Vec<Vec<u64>>,
}

impl Completed {
    fn new(net: &ConstraintNetwork) -> Self {
        let n = net.var_count();
        let words: Vec<usize> = (0..n).map(|v| net.domain_size(v).div_ceil(64)).collect();
        let mut rel = Vec::with_capacity(n * n);
        for i in 0..n {
            for (j, &w) in words.iter().enumerate() {
                if i == j {
                    rel.push(Vec::new());
                    continue;
                }
                let mut m = vec![0u64; net.domain_size(i) * w];
                for a in 0..net.domain_size(i) {
                    for b in 0..net.domain_size(j) {
                        if net.relation_value(i, a, j, b).unwrap_or(true) {
                            m[a * w + (b >> 6)] |= 1 << (b & 63);
                        }
                    }
                }
                rel.push(m);
            }
        }
        Completed { n, words, rel }
    }

    #[inline]
    fn row(&self, i: usize, j: usize, a: usize) -> &[u64] {
        let w = self.words[j];
        &self.rel[i * self.n + j][a * w..(a + 1) * w]
    }

    #[inline]
    fn allowed(&self, i: usize, a: usize, j: usize, b: usize) -> bool {
        self.row(i, j, a)[b >> 6] & (1 << (b & 63)) != 0
    }

    fn forbid(&mut self, i: usize, a: usize, j: usize, b: usize) {
        let n = self.n;
        let (wi, wj) = (self.words[i], self.words[j]);
        self.rel[i * n + j][a * wj + (b >> 6)] &= !(1 << (b & 63));
        self.rel[j * n + i][b * wi + (a >> 6)] &= !(1 << (a & 63));
    }
}

fn meets(x: &[u64], y: &[u64]) -> bool {
    x.iter().zip(y).any(|(p, q)| p & q != 0)
}

fn meets3(x: &[u64], y: &[u64], z: &[u64]) -> bool {
    x.iter().zip(y).zip(z).any(|((p, q), r)| p & q & r != 0)
}

struct PcEngine {
    graph: Completed,
    queue: VecDeque<(usize, usize)>,
    queued: Vec<bool>,
}

impl PcEngine {
    fn enqueue(&mut self, i: usize, j: usize) {
        let (x, y) = (i.min(j), i.max(j));
        let key = x * self.graph.n + y;
        if !self.queued[key] {
            self.queued[key] = true;
            self.queue.push_back((x, y));
        }
    }

    /// Removes values of `x` without support in `D_y` under `R_xy`.
    fn revise_domain(&mut self, state: &mut DomainState, ctx: &mut Ctx, x: usize, y: usize) -> Revision {
        let mut changed = false;
        let mut a = state.domain(x).first();
        while let Some(av) = a {
            ctx.counter.bump();
            if !meets(self.graph.row(x, y, av), state.domain(y).words()) {
                state.remove(x, av);
                ctx.deleted.push((x, av));
                changed = true;
            }
            a = state.domain(x).next_from(av + 1);
        }
        Revision::of(changed, state.domain(x).is_empty())
    }

    /// Removes pairs of `R_xy` with no witness in `D_z`.
    fn revise_relation(
        &mut self,
        state: &DomainState,
        counter: &mut CheckCounter,
        x: usize,
        y: usize,
        z: usize,
    ) -> Revision {
        let mut changed = false;
        let mut nonempty = false;
        for a in state.domain(x).iter() {
            for c in state.domain(y).iter() {
                if !self.graph.allowed(x, a, y, c) {
                    continue;
                }
                counter.bump();
                let g = &self.graph;
                if meets3(g.row(x, z, a), g.row(y, z, c), state.domain(z).words()) {
                    nonempty = true;
                } else {
                    self.graph.forbid(x, a, y, c);
                    changed = true;
                }
            }
        }
        Revision::of(changed, !nonempty)
    }

    fn run(&mut self, state: &mut DomainState, ctx: &mut Ctx) -> Step {
        let n = self.graph.n;
        for i in 0..n {
            for j in i + 1..n {
                self.enqueue(i, j);
            }
        }
        while let Some((i, j)) = self.queue.pop_front() {
            self.queued[i * n + j] = false;
            if ctx.expired() {
                return Step::TimedOut;
            }
            for (x, y) in [(i, j), (j, i)] {
                match self.revise_domain(state, ctx, x, y) {
                    Revision::Unchanged => {}
                    Revision::Shrunk => {
                        for k in (0..n).filter(|&k| k != x) {
                            self.enqueue(x, k);
                        }
                    }
                    Revision::Wipeout => return Step::Wipeout,
                }
            }
            for k in (0..n).filter(|&k| k != i && k != j) {
                for (x, y, z) in [(i, k, j), (j, k, i)] {
                    match self.revise_relation(state, &mut ctx.counter, x, y, z) {
                        Revision::Unchanged => {}
                        Revision::Shrunk => self.enqueue(x, y),
                        Revision::Wipeout => return Step::Wipeout,
                    }
                }
            }
        }
        Step::Done
    }

    /// Originally allowed pairs between surviving values that are now forbidden.
    fn deleted_pairs(&self, net: &ConstraintNetwork, state: &DomainState) -> Vec<ValuePair> {
        let mut pairs = Vec::new();
        for i in 0..self.graph.n {
            for j in i + 1..self.graph.n {
                for a in state.domain(i).iter() {
                    for b in state.domain(j).iter() {
                        let before = net.relation_value(i, a, j, b).unwrap_or(true);
                        if before && !self.graph.allowed(i, a, j, b) {
                            pairs.push(((i, a), (j, b)));
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs
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
    let n = net.var_count();
    let mut engine = PcEngine {
        graph: Completed::new(net),
        queue: VecDeque::new(),
        queued: vec![false; n * n],
    };
    let step = engine.run(state, &mut ctx);
    let pairs = if step == Step::Wipeout {
        Vec::new()
    } else {
        engine.deleted_pairs(net, state)
    };
    let mut result = finish(state, ctx, step, started);
    result.deleted_pairs = pairs;
    result
}
