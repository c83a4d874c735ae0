//! Measurement protocols over random instances.
//!
//! Instance `m` of every experiment is drawn with seed `derive_seed(seed, m)`
//! whatever the tightness or density. Because the generator nests instances
//! of equal seed, a fixed `m` only gets harder as `p1` or `p2` grows, and the
//! zero-deletion and wipeout fractions are monotone over the grid.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::consistency::{ConsistencyId, FilterResult};
use crate::domain::DomainState;
use crate::filters::enforce;
use crate::generator::{derive_seed, generate_model_b, GenError, GenSpec};
use crate::network::ConstraintNetwork;
use crate::oracle::{lattice_containments, Containment};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("degenerate tightness grid: {0}")]
    DegenerateGrid(String),
    #[error("samples must be at least 1")]
    ZeroSamples,
    #[error("threshold must lie in (0, 1] (got {0})")]
    BadThreshold(f64),
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error("containment violated: {smaller} ⊄ {larger} on instance {index} at p1={p1}, p2={p2}")]
    Containment {
        smaller: ConsistencyId,
        larger: ConsistencyId,
        index: u64,
        p1: f64,
        p2: f64,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Evenly spaced tightness values `lo, …, hi` over `steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    steps: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self, HarnessError> {
        let unit = 0.0..=1.0;
        if !unit.contains(&lo) || !unit.contains(&hi) {
            return Err(HarnessError::DegenerateGrid(format!("[{lo}, {hi}] leaves [0, 1]")));
        }
        if lo > hi {
            return Err(HarnessError::DegenerateGrid(format!("lo {lo} > hi {hi}")));
        }
        if steps == 0 && lo != hi {
            return Err(HarnessError::DegenerateGrid("zero steps over a non-empty range".into()));
        }
        Ok(Grid { lo, hi, steps })
    }

    /// `[0, 1]` in steps of `1/d²`.
    pub fn unit(d: usize) -> Self {
        Grid {
            lo: 0.0,
            hi: 1.0,
            steps: (d * d).max(1),
        }
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, index: usize) -> f64 {
        if self.steps == 0 || index == 0 {
            return self.lo;
        }
        if index == self.steps {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * index as f64 / self.steps as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            (self.hi - self.lo) / self.steps as f64
        }
    }
}

/// One filter run on a fresh full state.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub result: FilterResult,
    /// `100 · deleted / Σ d_i`.
    pub deleted_pct: f64,
}

/// Runs `lc` on full domains; only the filter call is timed.
pub fn measure(net: &ConstraintNetwork, lc: ConsistencyId, budget: Option<Duration>) -> Measurement {
    measure_state(net, lc, budget).0
}

fn measure_state(
    net: &ConstraintNetwork,
    lc: ConsistencyId,
    budget: Option<Duration>,
) -> (Measurement, DomainState) {
    let mut state = DomainState::full(net);
    let total = state.total_values();
    let started = Instant::now();
    let deadline = budget.map(|b| started + b);
    let mut result = enforce(net, &mut state, lc, deadline);
    result.elapsed = started.elapsed();
    let deleted_pct = if total == 0 {
        0.0
    } else {
        100.0 * result.deleted.len() as f64 / total as f64
    };
    (Measurement { result, deleted_pct }, state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Smallest tightness where most instances lose a value.
    T0,
    /// Smallest tightness where most instances wipe out.
    Tall,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::T0 => "t0",
            BoundKind::Tall => "tall",
        })
    }
}

/// How the grid is searched for a bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Search {
    #[default]
    Bisection,
    Linear,
}

/// Settings shared by the bound estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundParams {
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    pub samples: usize,
    pub grid: Grid,
    pub seed: u64,
    pub threshold: f64,
    pub search: Search,
}

impl BoundParams {
    /// Unit grid at resolution `1/d²` and threshold 0.5.
    pub fn new(n: usize, d: usize, p1: f64, samples: usize, seed: u64) -> Self {
        BoundParams {
            n,
            d,
            p1,
            samples,
            grid: Grid::unit(d),
            seed,
            threshold: 0.5,
            search: Search::Bisection,
        }
    }
}

/// An estimated tightness bound.
#[derive(Clone, Debug, PartialEq)]
pub struct TightnessBound {
    pub kind: BoundKind,
    pub lc: ConsistencyId,
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    /// The bound, or 1.0 when the threshold is never crossed on the grid.
    pub tightness: f64,
    pub reached: bool,
    pub samples: usize,
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Outcome {
    deleted: bool,
    wipeout: bool,
}

/// Estimates T0 and Tall for several consistencies over one shared set of
/// instances. Every instance touched is also checked against the lattice
/// containments between the requested consistencies (for `n ≤ 60`).
pub struct BoundEstimator {
    params: BoundParams,
    lcs: Vec<ConsistencyId>,
    checks: Vec<Containment>,
    memo: HashMap<usize, Vec<Vec<Outcome>>>,
}

impl BoundEstimator {
    pub fn new(params: BoundParams, lcs: &[ConsistencyId]) -> Result<Self, HarnessError> {
        if params.samples == 0 {
            return Err(HarnessError::ZeroSamples);
        }
        if !(params.threshold > 0.0 && params.threshold <= 1.0) {
            return Err(HarnessError::BadThreshold(params.threshold));
        }
        GenSpec {
            n: params.n,
            d: params.d,
            p1: params.p1,
            p2: 0.0,
            seed: 0,
        }
        .validate()?;
        let mut lcs: Vec<ConsistencyId> = lcs.to_vec();
        lcs.dedup();
        let checks = containments_among(&lcs, params.n);
        Ok(BoundEstimator {
            params,
            lcs,
            checks,
            memo: HashMap::new(),
        })
    }

    pub fn params(&self) -> &BoundParams {
        &self.params
    }

    /// Per instance, the outcome of every consistency at grid index `t`.
    fn outcomes(&mut self, t: usize) -> Result<&Vec<Vec<Outcome>>, HarnessError> {
        if !self.memo.contains_key(&t) {
            let p = &self.params;
            let p2 = p.grid.value(t);
            let rows: Result<Vec<Vec<Outcome>>, HarnessError> = (0..p.samples as u64)
                .into_par_iter()
                .map(|m| {
                    let spec = GenSpec {
                        n: p.n,
                        d: p.d,
                        p1: p.p1,
                        p2,
                        seed: derive_seed(p.seed, m),
                    };
                    let net = generate_model_b(&spec)?;
                    let runs: Vec<(Measurement, DomainState)> =
                        self.lcs.iter().map(|&lc| measure_state(&net, lc, None)).collect();
                    check_containments(&self.lcs, &self.checks, &runs, m, p.p1, p2)?;
                    Ok(runs
                        .iter()
                        .map(|(r, _)| Outcome {
                            deleted: !r.result.deleted.is_empty(),
                            wipeout: r.result.wipeout,
                        })
                        .collect())
                })
                .collect();
            self.memo.insert(t, rows?);
        }
        Ok(&self.memo[&t])
    }

    /// Fraction of instances at grid index `t` that stay below the event.
    fn fraction(&mut self, t: usize, slot: usize, kind: BoundKind) -> Result<f64, HarnessError> {
        let rows = self.outcomes(t)?;
        let quiet = rows
            .iter()
            .filter(|row| match kind {
                BoundKind::T0 => !row[slot].deleted,
                BoundKind::Tall => !row[slot].wipeout,
            })
            .count();
        Ok(quiet as f64 / rows.len() as f64)
    }

    /// Smallest grid tightness where the quiet fraction drops below the
    /// threshold.
    pub fn estimate(&mut self, lc: ConsistencyId, kind: BoundKind) -> Result<TightnessBound, HarnessError> {
        let slot = match self.lcs.iter().position(|&l| l == lc) {
            Some(s) => s,
            None => {
                self.lcs.push(lc);
                self.checks = containments_among(&self.lcs, self.params.n);
                self.memo.clear();
                self.lcs.len() - 1
            }
        };
        let theta = self.params.threshold;
        let last = self.params.grid.len() - 1;
        let found = match self.params.search {
            Search::Linear => {
                let mut hit = None;
                for t in 0..=last {
                    if self.fraction(t, slot, kind)? < theta {
                        hit = Some(t);
                        break;
                    }
                }
                hit
            }
            Search::Bisection => {
                if self.fraction(last, slot, kind)? >= theta {
                    None
                } else if self.fraction(0, slot, kind)? < theta {
                    Some(0)
                } else {
                    let (mut lo, mut hi) = (0, last);
                    while hi - lo > 1 {
                        let mid = lo + (hi - lo) / 2;
                        if self.fraction(mid, slot, kind)? < theta {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    Some(hi)
                }
            }
        };
        let p = &self.params;
        Ok(TightnessBound {
            kind,
            lc,
            n: p.n,
            d: p.d,
            p1: p.p1,
            tightness: found.map_or(1.0, |t| p.grid.value(t)),
            reached: found.is_some(),
            samples: p.samples,
            resolution: p.grid.step(),
        })
    }
}

fn containments_among(lcs: &[ConsistencyId], n: usize) -> Vec<Containment> {
    if !(3..=60).contains(&n) {
        return Vec::new();
    }
    let max_k = lcs.iter().filter_map(ConsistencyId::k).max().unwrap_or(0).max(3);
    lattice_containments(max_k)
        .into_iter()
        .filter(|c| lcs.contains(&c.smaller) && lcs.contains(&c.larger))
        .collect()
}

fn check_containments(
    lcs: &[ConsistencyId],
    checks: &[Containment],
    runs: &[(Measurement, DomainState)],
    index: u64,
    p1: f64,
    p2: f64,
) -> Result<(), HarnessError> {
    let state = |lc: ConsistencyId| &runs[lcs.iter().position(|&l| l == lc).expect("requested")].1;
    for c in checks {
        if !state(c.smaller).is_subset(state(c.larger)) {
            return Err(HarnessError::Containment {
                smaller: c.smaller,
                larger: c.larger,
                index,
                p1,
                p2,
            });
        }
    }
    Ok(())
}

/// T0 of `lc`.
pub fn estimate_t0(lc: ConsistencyId, params: &BoundParams) -> Result<TightnessBound, HarnessError> {
    BoundEstimator::new(params.clone(), &[lc])?.estimate(lc, BoundKind::T0)
}

/// Tall of `lc`.
pub fn estimate_tall(lc: ConsistencyId, params: &BoundParams) -> Result<TightnessBound, HarnessError> {
    BoundEstimator::new(params.clone(), &[lc])?.estimate(lc, BoundKind::Tall)
}

/// Aggregated statistics for one `(lc, tightness)` point.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchPoint {
    pub lc: ConsistencyId,
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    pub p2: f64,
    pub samples: usize,
    pub mean_deleted_pct: f64,
    pub median_deleted_pct: f64,
    pub wipeout_frac: f64,
    pub mean_checks: f64,
    pub mean_ms: f64,
    pub max_ms: f64,
    pub timeout_frac: f64,
}

/// Settings of a tightness sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    pub lcs: Vec<ConsistencyId>,
    pub grid: Grid,
    pub samples: usize,
    pub seed: u64,
    pub budget: Option<Duration>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn aggregate(cfg: &SweepConfig, lc: ConsistencyId, p2: f64, runs: &[&Measurement]) -> BenchPoint {
    let count = runs.len() as f64;
    let mean = |f: &dyn Fn(&Measurement) -> f64| runs.iter().map(|m| f(m)).sum::<f64>() / count;
    let ms = |m: &Measurement| m.result.elapsed.as_secs_f64() * 1000.0;
    let mut pct: Vec<f64> = runs.iter().map(|m| m.deleted_pct).collect();
    BenchPoint {
        lc,
        n: cfg.n,
        d: cfg.d,
        p1: cfg.p1,
        p2,
        samples: runs.len(),
        mean_deleted_pct: mean(&|m| m.deleted_pct),
        median_deleted_pct: median(&mut pct),
        wipeout_frac: mean(&|m| f64::from(u8::from(m.result.wipeout))),
        mean_checks: mean(&|m| m.result.checks as f64),
        mean_ms: mean(&ms),
        max_ms: runs.iter().map(|m| ms(m)).fold(0.0, f64::max),
        timeout_frac: mean(&|m| f64::from(u8::from(m.result.timed_out))),
    }
}

/// One [`BenchPoint`] per `(tightness, lc)`, tightness-major. All
/// consistencies see the same instances.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<BenchPoint>, HarnessError> {
    if cfg.samples == 0 {
        return Err(HarnessError::ZeroSamples);
    }
    GenSpec {
        n: cfg.n,
        d: cfg.d,
        p1: cfg.p1,
        p2: 0.0,
        seed: 0,
    }
    .validate()?;
    let checks = containments_among(&cfg.lcs, cfg.n);
    let mut points = Vec::new();
    if cfg.lcs.is_empty() {
        return Ok(points);
    }
    for p2 in cfg.grid.values() {
        let runs: Result<Vec<Vec<Measurement>>, HarnessError> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|m| {
                let spec = GenSpec {
                    n: cfg.n,
                    d: cfg.d,
                    p1: cfg.p1,
                    p2,
                    seed: derive_seed(cfg.seed, m),
                };
                let net = generate_model_b(&spec)?;
                let runs: Vec<(Measurement, DomainState)> = cfg
                    .lcs
                    .iter()
                    .map(|&lc| measure_state(&net, lc, cfg.budget))
                    .collect();
                let complete = runs.iter().all(|(r, _)| !r.result.timed_out);
                if complete {
                    check_containments(&cfg.lcs, &checks, &runs, m, cfg.p1, p2)?;
                }
                Ok(runs.into_iter().map(|(r, _)| r).collect())
            })
            .collect();
        let runs = runs?;
        for (slot, &lc) in cfg.lcs.iter().enumerate() {
            let column: Vec<&Measurement> = runs.iter().map(|row| &row[slot]).collect();
            points.push(aggregate(cfg, lc, p2, &column));
        }
    }
    Ok(points)
}

pub const CSV_HEADER: [&str; 13] = [
    "lc",
    "k",
    "n",
    "d",
    "p1",
    "p2",
    "samples",
    "mean_deleted_pct",
    "wipeout_frac",
    "mean_checks",
    "mean_ms",
    "max_ms",
    "timeout_frac",
];

/// Writes `points` as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(points: &[BenchPoint], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.lc.name().to_string(),
            p.lc.k().map(|k| k.to_string()).unwrap_or_default(),
            p.n.to_string(),
            p.d.to_string(),
            p.p1.to_string(),
            p.p2.to_string(),
            p.samples.to_string(),
            p.mean_deleted_pct.to_string(),
            p.wipeout_frac.to_string(),
            p.mean_checks.to_string(),
            format!("{:.3}", p.mean_ms),
            format!("{:.3}", p.max_ms),
            p.timeout_frac.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Index of the maximum when both ends lie strictly below it.
pub fn interior_peak(curve: &[f64]) -> Option<usize> {
    let (arg, &max) = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    let below = |v: &f64| *v < max;
    (below(curve.first()?) && below(curve.last()?)).then_some(arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;

    #[test]
    fn grid_shapes() {
        let g = Grid::unit(3);
        assert_eq!(g.len(), 10);
        assert_eq!(g.value(0), 0.0);
        assert_eq!(g.value(9), 1.0);
        assert!((g.value(3) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(Grid::new(0.0, 0.0, 0).unwrap().values(), vec![0.0]);
        assert!(Grid::new(0.6, 0.4, 4).is_err());
        assert!(Grid::new(0.0, 1.2, 4).is_err());
        assert!(Grid::new(0.1, 0.4, 0).is_err());
        assert!(Grid::new(-0.1, 0.4, 3).is_err());
    }

    #[test]
    fn measure_examples() {
        let a = parse_instance("vars 2\ndom 0 0 1\ndom 1 0 1\ncon 0 1 all\n").unwrap();
        let m = measure(&a, ConsistencyId::Ac, None);
        assert_eq!(m.deleted_pct, 0.0);
        assert!(!m.result.wipeout);
        let b = parse_instance("vars 2\ndom 0 0 1\ndom 1 0 1\ncon 0 1 none\n").unwrap();
        let m = measure(&b, ConsistencyId::Ac, None);
        assert!(m.result.wipeout);
        assert_eq!(m.deleted_pct, 100.0);
        let d = parse_instance(
            "vars 3\ndom 0 0 1\ndom 1 0 1\ndom 2 0 1\n\
             con 0 1 allow 0:0 1:0 1:1\ncon 0 2 allow 0:0 1:0 1:1\ncon 1 2 forbid 0:0\n",
        )
        .unwrap();
        let m = measure(&d, ConsistencyId::Rpc, None);
        assert!((m.deleted_pct - 100.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn universal_grid_never_deletes() {
        let mut p = BoundParams::new(8, 3, 0.5, 10, 1);
        p.grid = Grid::new(0.0, 0.0, 0).unwrap();
        let b = estimate_t0(ConsistencyId::Ac, &p).unwrap();
        assert!(!b.reached);
        assert_eq!(b.tightness, 1.0);
    }

    #[test]
    fn full_tightness_wipes_out() {
        let p = BoundParams::new(8, 3, 0.5, 10, 1);
        let b = estimate_tall(ConsistencyId::Ac, &p).unwrap();
        assert!(b.reached && b.tightness <= 1.0);
    }

    #[test]
    fn bisection_agrees_with_linear_scan() {
        for lc in [ConsistencyId::Ac, ConsistencyId::MaxRpc] {
            for kind in [BoundKind::T0, BoundKind::Tall] {
                let mut p = BoundParams::new(12, 4, 0.5, 20, 9);
                let mut bis = BoundEstimator::new(p.clone(), &[lc]).unwrap();
                p.search = Search::Linear;
                let mut lin = BoundEstimator::new(p, &[lc]).unwrap();
                assert_eq!(bis.estimate(lc, kind).unwrap(), lin.estimate(lc, kind).unwrap());
            }
        }
    }

    #[test]
    fn rejects_bad_settings() {
        let mut p = BoundParams::new(8, 3, 0.5, 0, 1);
        assert!(matches!(estimate_t0(ConsistencyId::Ac, &p), Err(HarnessError::ZeroSamples)));
        p.samples = 3;
        p.threshold = 0.0;
        assert!(matches!(estimate_t0(ConsistencyId::Ac, &p), Err(HarnessError::BadThreshold(_))));
        p.threshold = 0.5;
        p.n = 1;
        assert!(matches!(estimate_t0(ConsistencyId::Ac, &p), Err(HarnessError::Generator(_))));
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let cfg = SweepConfig {
            n: 10,
            d: 3,
            p1: 0.5,
            lcs: Vec::new(),
            grid: Grid::unit(3),
            samples: 2,
            seed: 0,
            budget: None,
        };
        let points = sweep(&cfg).unwrap();
        let mut out = Vec::new();
        write_csv(&points, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn peaks() {
        assert_eq!(interior_peak(&[1.0, 3.0, 2.0]), Some(1));
        assert_eq!(interior_peak(&[3.0, 3.0, 2.0]), None);
        assert_eq!(interior_peak(&[1.0, 2.0, 3.0]), None);
        assert_eq!(interior_peak(&[]), None);
    }
}
