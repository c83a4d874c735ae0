//! Neighborhood inverse consistency.
//!
//! A value `(i, a)` survives iff it extends to a consistent instantiation of
//! `{i} ∪ N(i)`. Each extension is searched by chronological backtracking with
//! forward checking and dom+deg ordering (smallest current domain first, ties
//! to the larger constraint-graph degree, then the lower index). The last
//! extension found for a value is kept; it stays valid while all of its values
//! are present.

use std::collections::VecDeque;
use std::time::Instant;

use crate::consistency::FilterResult;
use crate::domain::{DomainState, ValueSet};
use crate::network::{Arc, CheckCounter, ConstraintNetwork};

use super::support::check;
use super::{finish, Ctx, Step};

struct TimedOut;

/// The sub-graph induced by one neighborhood, in local indices.
struct Neighborhood {
    vars: Vec<usize>,
    /// For each local variable, its linked local variables and the arc to them.
    links: Vec<Vec<(usize, Arc)>>,
}

impl Neighborhood {
    fn of(net: &ConstraintNetwork, i: usize) -> Self {
        let vars: Vec<usize> = net.arcs(i).iter().map(|a| a.neighbor).collect();
        let links = vars
            .iter()
            .map(|&u| {
                net.arcs(u)
                    .iter()
                    .filter_map(|arc| {
                        vars.binary_search(&arc.neighbor)
                            .ok()
                            .map(|local| (local, *arc))
                    })
                    .collect()
            })
            .collect();
        Neighborhood { vars, links }
    }
}

struct Search<'a> {
    net: &'a ConstraintNetwork,
    hood: &'a Neighborhood,
    domains: Vec<ValueSet>,
    assigned: Vec<Option<usize>>,
    trail: Vec<(usize, usize)>,
    deadline: Option<Instant>,
}

impl Search<'_> {
    fn pick(&self) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for (u, dom) in self.domains.iter().enumerate() {
            if self.assigned[u].is_some() {
                continue;
            }
            let degree = self.net.degree(self.hood.vars[u]);
            let better = match best {
                None => true,
                Some((size, deg, _)) => dom.len() < size || (dom.len() == size && degree > deg),
            };
            if better {
                best = Some((dom.len(), degree, u));
            }
        }
        best.map(|(_, _, u)| u)
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (u, v) = self.trail.pop().expect("trail entry");
            self.domains[u].insert(v);
        }
    }

    fn dfs(&mut self, counter: &mut CheckCounter) -> Result<bool, TimedOut> {
        let Some(u) = self.pick() else {
            return Ok(true);
        };
        let mut b = self.domains[u].first();
        while let Some(bv) = b {
            self.assigned[u] = Some(bv);
            let mark = self.trail.len();
            let mut consistent = true;
            for &(w, arc) in &self.hood.links[u] {
                if self.assigned[w].is_some() {
                    continue;
                }
                let mut c = self.domains[w].first();
                while let Some(cv) = c {
                    if !check(self.net, arc, bv, cv, counter) {
                        self.domains[w].remove(cv);
                        self.trail.push((w, cv));
                    }
                    c = self.domains[w].next_from(cv + 1);
                }
                if self.domains[w].is_empty() {
                    consistent = false;
                    break;
                }
            }
            if consistent && self.dfs(counter)? {
                return Ok(true);
            }
            self.undo(mark);
            self.assigned[u] = None;
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(TimedOut);
            }
            b = self.domains[u].next_from(bv + 1);
        }
        Ok(false)
    }
}

/// Searches an extension of `(i, a)` to its neighborhood under `state`.
fn extend(
    net: &ConstraintNetwork,
    hood: &Neighborhood,
    state: &DomainState,
    i: usize,
    a: usize,
    counter: &mut CheckCounter,
    deadline: Option<Instant>,
) -> Result<Option<Vec<u32>>, TimedOut> {
    let mut domains = Vec::with_capacity(hood.vars.len());
    for arc in net.arcs(i) {
        let current = state.domain(arc.neighbor);
        let mut dom = ValueSet::empty(current.capacity());
        for b in current.iter() {
            if check(net, *arc, a, b, counter) {
                dom.insert(b);
            }
        }
        if dom.is_empty() {
            return Ok(None);
        }
        domains.push(dom);
    }
    let mut search = Search {
        net,
        hood,
        assigned: vec![None; domains.len()],
        domains,
        trail: Vec::new(),
        deadline,
    };
    if search.dfs(counter)? {
        Ok(Some(
            search
                .assigned
                .iter()
                .map(|v| v.expect("complete instantiation") as u32)
                .collect(),
        ))
    } else {
        Ok(None)
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
    let mut hoods: Vec<Option<Neighborhood>> = (0..n).map(|_| None).collect();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut total = 0;
    for var in 0..n {
        offsets.push(total);
        total += net.domain_size(var);
    }
    let mut extensions: Vec<Option<Vec<u32>>> = vec![None; total];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| net.degree(v) > 0).collect();
    let mut queued = vec![false; n];
    for &v in &queue {
        queued[v] = true;
    }
    let step = 'run: {
        while let Some(i) = queue.pop_front() {
            queued[i] = false;
            if ctx.expired() {
                break 'run Step::TimedOut;
            }
            let hood = hoods[i].get_or_insert_with(|| Neighborhood::of(net, i));
            let mut changed = false;
            let mut a = state.domain(i).first();
            while let Some(av) = a {
                let slot = offsets[i] + av;
                let still_valid = extensions[slot].as_ref().is_some_and(|ext| {
                    hood.vars
                        .iter()
                        .zip(ext)
                        .all(|(&u, &b)| state.contains(u, b as usize))
                });
                if !still_valid {
                    match extend(net, hood, state, i, av, &mut ctx.counter, deadline) {
                        Ok(Some(ext)) => extensions[slot] = Some(ext),
                        Ok(None) => {
                            extensions[slot] = None;
                            state.remove(i, av);
                            ctx.deleted.push((i, av));
                            changed = true;
                        }
                        Err(TimedOut) => break 'run Step::TimedOut,
                    }
                }
                a = state.domain(i).next_from(av + 1);
            }
            if changed {
                if state.domain(i).is_empty() {
                    break 'run Step::Wipeout;
                }
                for arc in net.arcs(i) {
                    if !queued[arc.neighbor] {
                        queued[arc.neighbor] = true;
                        queue.push_back(arc.neighbor);
                    }
                }
            }
        }
        Step::Done
    };
    finish(state, ctx, step, started)
}
