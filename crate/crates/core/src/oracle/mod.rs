//! Dense state-vector oracle for small AKLT fragments.

pub mod fragment;
pub mod operator;
pub mod pauli;
pub mod report;
pub mod stabilizers;
pub mod state;
pub mod weights;

pub use fragment::{builtin_fragments, hexagon, star, torus2, two_site, FragmentGraph, QUBIT_BUDGET};
pub use operator::{povm_element, povm_element_scaled, symmetric_projector, LocalOp};
pub use pauli::{Pauli, PauliString};
pub use report::{run_suite, CheckResult, OracleOptions, OracleReport};
pub use stabilizers::{
    check_stabilizers, expected_graph_stabilizers, stabilized_dimension, star_operator, Encoding, ExpectedStabilizers,
    FragmentDomains, StabilizerCheck,
};
pub use state::{is_stabilized, StateVector};
pub use weights::{check_fragment_convention, verify_weight_convention, ConventionCheck, ConventionReport};
