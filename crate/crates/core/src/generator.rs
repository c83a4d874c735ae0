//! Seeded Model B random binary networks.
//!
//! A network with density `p1` and tightness `p2` has exactly
//! `round(p1 · n(n−1)/2)` constraints, each forbidding exactly
//! `round(p2 · d²)` pairs (both rounded half up).
//!
//! Randomness comes from ChaCha8 seeded with `seed`. Stream 0 shuffles the
//! list of variable pairs, and the constraints are its first `e` entries.
//! Stream `1 + p` shuffles the `d²` value pairs of variable pair `p` (in
//! lexicographic order), and the forbidden pairs are its first `f` entries.
//! For a fixed seed, raising `p1` only adds constraints and raising `p2` only
//! forbids more pairs.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{ConstraintNetwork, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("n must be at least 2 (got {0})")]
    TooFewVariables(usize),
    #[error("d must be at least 1")]
    EmptyDomain,
    #[error("{name} must lie in [0, 1] (got {value})")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("unknown experiment family `{0}`")]
    UnknownFamily(String),
}

/// Parameters of one Model B instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub d: usize,
    pub p1: f64,
    pub p2: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n < 2 {
            return Err(GenError::TooFewVariables(self.n));
        }
        if self.d < 1 {
            return Err(GenError::EmptyDomain);
        }
        for (name, value) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::OutOfRange { name, value });
            }
        }
        Ok(())
    }

    pub fn constraint_count(&self) -> usize {
        round_half_up(self.p1 * pair_count(self.n) as f64)
    }

    pub fn forbidden_per_constraint(&self) -> usize {
        round_half_up(self.p2 * (self.d * self.d) as f64)
    }
}

fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Nearest integer, halves rounded up. A relative slack absorbs binary
/// representation error, so `0.5 · 3` rounds to 2.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9 * x.abs().max(1.0)).floor() as usize
}

/// Uniform integer in `0..bound` by Lemire's multiply-and-reject method.
fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let mut m = u128::from(rng.next_u64()) * u128::from(bound);
    if (m as u64) < bound {
        let threshold = bound.wrapping_neg() % bound;
        while (m as u64) < threshold {
            m = u128::from(rng.next_u64()) * u128::from(bound);
        }
    }
    (m >> 64) as u64
}

fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a Model B network. Domains are `0..d` for every variable.
pub fn generate_model_b(spec: &GenSpec) -> Result<ConstraintNetwork, GenError> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    shuffle(&mut stream(spec.seed, 0), &mut pairs);
    let mut chosen: Vec<(usize, usize)> = pairs[..spec.constraint_count()].to_vec();
    chosen.sort_unstable();
    let f = spec.forbidden_per_constraint();
    let relations = chosen
        .into_iter()
        .map(|(i, j)| {
            let index = i * n - i * (i + 1) / 2 + (j - i - 1);
            let mut cells: Vec<usize> = (0..d * d).collect();
            shuffle(&mut stream(spec.seed, 1 + index as u64), &mut cells);
            let mut rel = Relation::universal(d, d);
            for &cell in &cells[..f] {
                rel.set(cell / d, cell % d, false);
            }
            (i, j, rel)
        })
        .collect();
    let domains = vec![(0..d as i64).collect(); n];
    Ok(ConstraintNetwork::from_relations(domains, relations)
        .expect("generated networks are well formed"))
}

/// Seed of the `index`-th instance drawn under `master` (SplitMix64 mixing).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A named benchmark instance class; tightness is always the sweep variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentFamily {
    pub name: &'static str,
    pub n: usize,
    pub d: usize,
    /// Fixed density, or `None` when density is swept as well.
    pub p1: Option<f64>,
}

impl ExperimentFamily {
    pub const NAMES: [&'static str; 3] = [
        "transition-40x15",
        "timing-200x30-sparse",
        "timing-200x30-dense",
    ];

    pub fn spec(&self, p1: f64, p2: f64, seed: u64) -> GenSpec {
        GenSpec {
            n: self.n,
            d: self.d,
            p1: self.p1.unwrap_or(p1),
            p2,
            seed,
        }
    }
}

/// Looks up one of [`ExperimentFamily::NAMES`].
pub fn experiment_family(name: &str) -> Result<ExperimentFamily, GenError> {
    let (name, n, d, p1) = match name {
        "transition-40x15" => ("transition-40x15", 40, 15, None),
        "timing-200x30-sparse" => ("timing-200x30-sparse", 200, 30, Some(0.02)),
        "timing-200x30-dense" => ("timing-200x30-dense", 200, 30, Some(0.15)),
        other => return Err(GenError::UnknownFamily(other.to_string())),
    };
    Ok(ExperimentFamily { name, n, d, p1 })
}
