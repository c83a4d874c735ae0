//! Domain-filtering local consistencies for binary constraint networks.

pub mod consistency;
pub mod domain;
pub mod filters;
pub mod format;
pub mod generator;
pub mod harness;
pub mod lattice;
pub mod network;
pub mod oracle;
pub mod singleton;

pub use consistency::{ConsistencyId, ConsistencyParseError, FilterResult, ValuePair};
pub use domain::{restrict_to_singleton, DomainState, ValueSet};
pub use filters::{
    deadline_after, enforce, enforce_ac, enforce_k_rpc, enforce_max_rpc, enforce_nic, enforce_pic,
    enforce_rpc, enforce_strong_pc, find_pc_support, FilterError,
};
pub use generator::{
    derive_seed, experiment_family, generate_model_b, ExperimentFamily, GenError, GenSpec,
};
pub use format::{filtered_network, parse_instance, restrict_network, write_instance, FormatError};
pub use network::{
    three_cliques, CheckCounter, CliqueIndex, Constraint, ConstraintDef, ConstraintNetwork,
    NetworkError, PairSpec, Relation,
};
pub use singleton::{enforce_sac, enforce_singleton, enforce_srpc, singleton_test, Inner, SweepOrder};
