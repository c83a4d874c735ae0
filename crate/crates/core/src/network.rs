//! Binary constraint networks.
//!
//! A network is immutable once built. Values are addressed by their index in
//! the variable's initial domain; the original integer labels are kept only
//! for I/O. Each constraint stores one dense allowed-pair matrix indexed
//! `[a * |D_y| + b]` for its ordered pair `x < y`; the reverse direction swaps
//! the indices.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("variable {0} is out of range")]
    VariableOutOfRange(usize),
    #[error("constraint links variable {0} with itself")]
    SelfLoop(usize),
    #[error("duplicate constraint between {0} and {1}")]
    DuplicateConstraint(usize, usize),
    #[error("value {value} is not in the initial domain of variable {var}")]
    UnknownValue { var: usize, value: i64 },
    #[error("initial domain of variable {0} is empty")]
    EmptyDomain(usize),
    #[error("initial domain of variable {0} is not strictly increasing")]
    UnsortedDomain(usize),
    #[error("no constraint between {0} and {1}")]
    NoConstraint(usize, usize),
    #[error("value index {value} is not in the current domain of variable {var}")]
    ValueNotInDomain { var: usize, value: usize },
    #[error("relation for ({0}, {1}) has the wrong dimensions")]
    DimensionMismatch(usize, usize),
}

/// Allowed pairs of one constraint, stored as a dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: usize,
    cols: usize,
    allowed: Vec<bool>,
}

impl Relation {
    pub fn universal(rows: usize, cols: usize) -> Self {
        Relation {
            rows,
            cols,
            allowed: vec![true; rows * cols],
        }
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Relation {
            rows,
            cols,
            allowed: vec![false; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> bool {
        self.allowed[a * self.cols + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, allowed: bool) {
        self.allowed[a * self.cols + b] = allowed;
    }

    pub fn allowed_count(&self) -> usize {
        self.allowed.iter().filter(|&&x| x).count()
    }

    pub fn allowed_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.allowed
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(move |(k, _)| (k / self.cols, k % self.cols))
    }

    pub fn transposed(&self) -> Relation {
        let mut t = Relation::empty(self.cols, self.rows);
        for (a, b) in self.allowed_pairs() {
            t.set(b, a, true);
        }
        t
    }
}

/// How a constraint lists its pairs in the builder and the text format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairSpec {
    All,
    None,
    Allow(Vec<(i64, i64)>),
    Forbid(Vec<(i64, i64)>),
}

/// One entry of a constraint list: `pairs` relate values of `vars.0` to values
/// of `vars.1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintDef {
    pub vars: (usize, usize),
    pub pairs: PairSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    x: usize,
    y: usize,
    relation: Relation,
}

impl Constraint {
    /// The two variables, smaller index first.
    pub fn scope(&self) -> (usize, usize) {
        (self.x, self.y)
    }

    /// Matrix over `D_x × D_y`.
    pub fn relation(&self) -> &Relation {
        &self.relation
    }
}

/// One directed view of a constraint, as seen from a variable's adjacency list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub neighbor: usize,
    pub constraint: usize,
    /// The owning variable is the constraint's `x`.
    pub forward: bool,
}

/// Counts allowed-pair queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckCounter(u64);

impl CheckCounter {
    pub fn new() -> Self {
        CheckCounter(0)
    }

    #[inline]
    pub fn bump(&mut self) {
        self.0 += 1;
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

/// Triangles of the constraint graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliqueIndex {
    /// Ascending `[i, j, k]` with `i < j < k`, each triangle once.
    pub triangles: Vec<[usize; 3]>,
    /// For each constraint, the ascending third variables closing a triangle.
    pub thirds: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintNetwork {
    values: Vec<Vec<i64>>,
    constraints: Vec<Constraint>,
    adjacency: Vec<Vec<Arc>>,
    pair_index: Vec<u32>,
    cliques: CliqueIndex,
}

const NO_CONSTRAINT: u32 = u32::MAX;

impl ConstraintNetwork {
    /// Builds a network from external integer domains and constraint
    /// definitions.
    pub fn build(
        domains: Vec<Vec<i64>>,
        constraints: &[ConstraintDef],
    ) -> Result<Self, NetworkError> {
        for (var, dom) in domains.iter().enumerate() {
            if dom.is_empty() {
                return Err(NetworkError::EmptyDomain(var));
            }
            if dom.windows(2).any(|w| w[0] >= w[1]) {
                return Err(NetworkError::UnsortedDomain(var));
            }
        }
        let n = domains.len();
        let index_of = |var: usize, value: i64| {
            domains[var]
                .binary_search(&value)
                .map_err(|_| NetworkError::UnknownValue { var, value })
        };
        let mut relations = Vec::with_capacity(constraints.len());
        for def in constraints {
            let (i, j) = def.vars;
            for v in [i, j] {
                if v >= n {
                    return Err(NetworkError::VariableOutOfRange(v));
                }
            }
            if i == j {
                return Err(NetworkError::SelfLoop(i));
            }
            let (di, dj) = (domains[i].len(), domains[j].len());
            let mut rel = match def.pairs {
                PairSpec::All | PairSpec::Forbid(_) => Relation::universal(di, dj),
                PairSpec::None | PairSpec::Allow(_) => Relation::empty(di, dj),
            };
            match &def.pairs {
                PairSpec::Allow(pairs) | PairSpec::Forbid(pairs) => {
                    let allow = matches!(def.pairs, PairSpec::Allow(_));
                    for &(a, b) in pairs {
                        rel.set(index_of(i, a)?, index_of(j, b)?, allow);
                    }
                }
                PairSpec::All | PairSpec::None => {}
            }
            relations.push((i, j, rel));
        }
        Self::from_relations(domains, relations)
    }

    /// Builds a network from index-based relations; `rel` is over `D_i × D_j`.
    pub fn from_relations(
        domains: Vec<Vec<i64>>,
        relations: Vec<(usize, usize, Relation)>,
    ) -> Result<Self, NetworkError> {
        let n = domains.len();
        for (var, dom) in domains.iter().enumerate() {
            if dom.is_empty() {
                return Err(NetworkError::EmptyDomain(var));
            }
            if dom.windows(2).any(|w| w[0] >= w[1]) {
                return Err(NetworkError::UnsortedDomain(var));
            }
        }
        let mut pair_index = vec![NO_CONSTRAINT; n * n];
        let mut constraints = Vec::with_capacity(relations.len());
        for (i, j, rel) in relations {
            for v in [i, j] {
                if v >= n {
                    return Err(NetworkError::VariableOutOfRange(v));
                }
            }
            if i == j {
                return Err(NetworkError::SelfLoop(i));
            }
            if pair_index[i * n + j] != NO_CONSTRAINT {
                return Err(NetworkError::DuplicateConstraint(i.min(j), i.max(j)));
            }
            if rel.rows() != domains[i].len() || rel.cols() != domains[j].len() {
                return Err(NetworkError::DimensionMismatch(i, j));
            }
            let (x, y, relation) = if i < j {
                (i, j, rel)
            } else {
                (j, i, rel.transposed())
            };
            let id = constraints.len() as u32;
            pair_index[x * n + y] = id;
            pair_index[y * n + x] = id;
            constraints.push(Constraint { x, y, relation });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (id, c) in constraints.iter().enumerate() {
            adjacency[c.x].push(Arc {
                neighbor: c.y,
                constraint: id,
                forward: true,
            });
            adjacency[c.y].push(Arc {
                neighbor: c.x,
                constraint: id,
                forward: false,
            });
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|arc| arc.neighbor);
        }
        let mut net = ConstraintNetwork {
            values: domains,
            constraints,
            adjacency,
            pair_index,
            cliques: CliqueIndex::default(),
        };
        net.cliques = three_cliques(&net);
        Ok(net)
    }

    #[inline]
    pub fn var_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn domain_size(&self, var: usize) -> usize {
        self.values[var].len()
    }

    /// Largest initial domain size (`d`).
    pub fn max_domain_size(&self) -> usize {
        self.values.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// External labels of the initial domain of `var`.
    pub fn values(&self, var: usize) -> &[i64] {
        &self.values[var]
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Neighbors of `var`, ascending.
    #[inline]
    pub fn arcs(&self, var: usize) -> &[Arc] {
        &self.adjacency[var]
    }

    pub fn degree(&self, var: usize) -> usize {
        self.adjacency[var].len()
    }

    /// Maximum degree (`g`).
    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    #[inline]
    pub fn constraint_between(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.var_count();
        match self.pair_index[i * n + j] {
            NO_CONSTRAINT => None,
            id => Some(id as usize),
        }
    }

    #[inline]
    pub fn are_linked(&self, i: usize, j: usize) -> bool {
        self.constraint_between(i, j).is_some()
    }

    pub fn cliques(&self) -> &CliqueIndex {
        &self.cliques
    }

    /// Third variables closing a triangle with constraint `id`.
    #[inline]
    pub fn thirds(&self, constraint: usize) -> &[usize] {
        &self.cliques.thirds[constraint]
    }

    /// Uncounted predicate lookup along an arc owned by the variable holding `a`.
    #[inline]
    pub(crate) fn arc_allows(&self, arc: Arc, a: usize, b: usize) -> bool {
        let rel = &self.constraints[arc.constraint].relation;
        if arc.forward {
            rel.get(a, b)
        } else {
            rel.get(b, a)
        }
    }

    /// Uncounted lookup of `C_ij(a, b)`; `None` if `i` and `j` are unconstrained.
    #[inline]
    pub fn relation_value(&self, i: usize, a: usize, j: usize, b: usize) -> Option<bool> {
        let id = self.constraint_between(i, j)?;
        let rel = &self.constraints[id].relation;
        Some(if i < j { rel.get(a, b) } else { rel.get(b, a) })
    }

    /// Counted constraint check `C_ij(a, b)`.
    pub fn allows(
        &self,
        i: usize,
        a: usize,
        j: usize,
        b: usize,
        counter: &mut CheckCounter,
    ) -> Result<bool, NetworkError> {
        for v in [i, j] {
            if v >= self.var_count() {
                return Err(NetworkError::VariableOutOfRange(v));
            }
        }
        if a >= self.domain_size(i) {
            return Err(NetworkError::ValueNotInDomain { var: i, value: a });
        }
        if b >= self.domain_size(j) {
            return Err(NetworkError::ValueNotInDomain { var: j, value: b });
        }
        let allowed = self
            .relation_value(i, a, j, b)
            .ok_or(NetworkError::NoConstraint(i, j))?;
        counter.bump();
        Ok(allowed)
    }
}

/// Enumerates the triangles of the constraint graph.
pub fn three_cliques(net: &ConstraintNetwork) -> CliqueIndex {
    let mut triangles = Vec::new();
    let mut thirds = vec![Vec::new(); net.constraint_count()];
    for i in 0..net.var_count() {
        let higher: Vec<usize> = net
            .arcs(i)
            .iter()
            .map(|a| a.neighbor)
            .filter(|&j| j > i)
            .collect();
        for (p, &j) in higher.iter().enumerate() {
            for &k in &higher[p + 1..] {
                if net.are_linked(j, k) {
                    triangles.push([i, j, k]);
                }
            }
        }
    }
    for &[i, j, k] in &triangles {
        for (a, b, c) in [(i, j, k), (i, k, j), (j, k, i)] {
            let id = net.constraint_between(a, b).expect("triangle edge");
            thirds[id].push(c);
        }
    }
    for t in &mut thirds {
        t.sort_unstable();
    }
    CliqueIndex { triangles, thirds }
}
