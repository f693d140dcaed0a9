//! Monte Carlo reduction of the honeycomb AKLT state to random graph states.
//!
//! The crate covers the classical pipeline (lattice, POVM outcome sampling,
//! domain contraction, percolation and ensemble statistics) and a dense
//! state-vector oracle that checks the underlying quantum statements on
//! small fragments.

pub mod config;
pub mod error;
pub mod lattice;
pub mod oracle;
pub mod percolation;
pub mod records;
pub mod reduce;
pub mod sampler;
pub mod stats;
pub mod union_find;

pub use config::{uniform_random_config, Outcome, PovmConfig};
pub use error::{Error, Result};
pub use lattice::{build_honeycomb, Boundary, Lattice, Side, SiteGraph, Sublattice};
pub use percolation::{
    crossing_exists, estimate_threshold, p_grid, random_delete, threshold_scan, Axis, CrossingQuery, CurvePoint,
    DeletionMode, ThresholdCurve, ThresholdEstimate,
};
pub use records::{CsvRecord, Document, SampleRow, ThresholdRow};
pub use reduce::{
    contract_domains, domain_size_histogram, mod2_reduce, DomainMultiGraph, DomainPartition, SimpleGraph,
};
pub use sampler::{sample_chain, ChainParams, Metropolis, WeightConvention};
pub use stats::{
    accumulate, betti_number, binning_stderr, extrapolate_infinite, fit_log_growth, Ansatz, Estimate, Extrapolation,
    LogFit, Observable, SampleRecord,
};
