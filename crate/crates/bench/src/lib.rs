//! Fixtures shared by the benchmarks.

use aklt_core::{build_honeycomb, Boundary, Lattice, Metropolis, PovmConfig, WeightConvention};

/// Lattice plus a configuration taken after `sweeps` Metropolis sweeps.
pub fn equilibrated(side: usize, boundary: Boundary, sweeps: usize) -> (Lattice, PovmConfig) {
    let lat = build_honeycomb(side, boundary).expect("valid side");
    let cfg = {
        let mut chain = Metropolis::from_seed(&lat, 1, WeightConvention::Multigraph).expect("chain");
        for _ in 0..sweeps {
            chain.sweep().expect("sweep");
        }
        chain.config().clone()
    };
    (lat, cfg)
}
