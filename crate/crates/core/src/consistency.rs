//! Consistency identifiers and filter results.

use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

/// One of the supported local consistencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConsistencyId {
    Ac,
    Rpc,
    /// k-restricted path consistency; 1-RPC is RPC.
    KRpc(NonZeroU32),
    MaxRpc,
    Pic,
    Nic,
    StrongPc,
    Sac,
    Srpc,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConsistencyParseError {
    #[error("unknown consistency `{0}`")]
    Unknown(String),
    #[error("k-RPC needs k >= 1")]
    ZeroK,
    #[error("`krpc` needs a k value")]
    MissingK,
    #[error("k is only meaningful for krpc")]
    UnexpectedK,
}

impl ConsistencyId {
    pub const ALL_NAMES: [&'static str; 9] = [
        "ac", "rpc", "krpc", "maxrpc", "pic", "nic", "spc", "sac", "srpc",
    ];

    pub fn k_rpc(k: u32) -> Result<Self, ConsistencyParseError> {
        NonZeroU32::new(k)
            .map(ConsistencyId::KRpc)
            .ok_or(ConsistencyParseError::ZeroK)
    }

    /// Parses a bare name plus an optional separate `k`, as the CLI flags do.
    pub fn from_name(name: &str, k: Option<u32>) -> Result<Self, ConsistencyParseError> {
        match (name, k) {
            ("krpc", Some(k)) => Self::k_rpc(k),
            ("krpc", None) => Err(ConsistencyParseError::MissingK),
            (_, Some(_)) => Err(ConsistencyParseError::UnexpectedK),
            (other, None) => other.parse(),
        }
    }

    pub fn k(&self) -> Option<u32> {
        match self {
            ConsistencyId::KRpc(k) => Some(k.get()),
            _ => None,
        }
    }

    /// Bare name without the `k` suffix.
    pub fn name(&self) -> &'static str {
        match self {
            ConsistencyId::Ac => "ac",
            ConsistencyId::Rpc => "rpc",
            ConsistencyId::KRpc(_) => "krpc",
            ConsistencyId::MaxRpc => "maxrpc",
            ConsistencyId::Pic => "pic",
            ConsistencyId::Nic => "nic",
            ConsistencyId::StrongPc => "spc",
            ConsistencyId::Sac => "sac",
            ConsistencyId::Srpc => "srpc",
        }
    }

    /// Filters that change relations as well as domains.
    pub fn deletes_pairs(&self) -> bool {
        matches!(self, ConsistencyId::StrongPc)
    }
}

impl fmt::Display for ConsistencyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyId::KRpc(k) => write!(f, "krpc{k}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ConsistencyId {
    type Err = ConsistencyParseError;

    /// Accepts the bare names and `krpcN`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "ac" => ConsistencyId::Ac,
            "rpc" => ConsistencyId::Rpc,
            "maxrpc" => ConsistencyId::MaxRpc,
            "pic" => ConsistencyId::Pic,
            "nic" => ConsistencyId::Nic,
            "spc" | "strongpc" => ConsistencyId::StrongPc,
            "sac" => ConsistencyId::Sac,
            "srpc" => ConsistencyId::Srpc,
            "krpc" => return Err(ConsistencyParseError::MissingK),
            other => match other.strip_prefix("krpc").map(str::parse::<u32>) {
                Some(Ok(k)) => Self::k_rpc(k)?,
                _ => return Err(ConsistencyParseError::Unknown(s.to_string())),
            },
        })
    }
}

/// A deleted pair of values `((i, a), (j, b))` with `i < j`.
pub type ValuePair = ((usize, usize), (usize, usize));

/// Outcome of one filter run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterResult {
    /// Deleted `(variable, value index)` in deletion order.
    pub deleted: Vec<(usize, usize)>,
    pub wipeout: bool,
    pub checks: u64,
    pub elapsed: Duration,
    pub timed_out: bool,
    /// Pairs removed from relations between surviving values (strong PC
    /// only), sorted.
    pub deleted_pairs: Vec<ValuePair>,
}

impl FilterResult {
    /// Deleted values as a sorted set, for order-insensitive comparison.
    pub fn deleted_sorted(&self) -> Vec<(usize, usize)> {
        let mut v = self.deleted.clone();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in ConsistencyId::ALL_NAMES {
            if name == "krpc" {
                continue;
            }
            let id: ConsistencyId = name.parse().unwrap();
            assert_eq!(id.to_string(), name);
        }
        let k3: ConsistencyId = "krpc3".parse().unwrap();
        assert_eq!(k3.k(), Some(3));
        assert_eq!(k3.to_string().parse::<ConsistencyId>().unwrap(), k3);
    }

    #[test]
    fn k_validation() {
        assert_eq!("krpc0".parse::<ConsistencyId>(), Err(ConsistencyParseError::ZeroK));
        assert_eq!(
            ConsistencyId::from_name("krpc", None),
            Err(ConsistencyParseError::MissingK)
        );
        assert_eq!(
            ConsistencyId::from_name("rpc", Some(2)),
            Err(ConsistencyParseError::UnexpectedK)
        );
        assert!(matches!(
            "bogus".parse::<ConsistencyId>(),
            Err(ConsistencyParseError::Unknown(_))
        ));
    }
}
