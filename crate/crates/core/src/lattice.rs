//! Honeycomb lattice in a brick-wall embedding.
//!
//! Sites sit on an `L x L` grid with integer `(row, col)` coordinates. Every
//! site is joined to its left and right neighbours in the same row, and to the
//! site directly below it when `row + col` is even (so each site has exactly
//! one vertical bond in the bulk). Sublattice `A` is the even `row + col`
//! parity class. With periodic boundaries both axes wrap, which closes
//! consistently only for even `L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(format!("unknown boundary '{other}' (expected open|periodic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

/// Anything that can be fed to the domain contraction: a site count plus an
/// edge list. Parallel edges are allowed and counted separately.
pub trait SiteGraph {
    fn n_sites(&self) -> usize;
    fn edges(&self) -> &[(usize, usize)];
}

#[derive(Debug, Clone)]
pub struct Lattice {
    side: usize,
    boundary: Boundary,
    edges: Vec<(usize, usize)>,
    // Neighbour lists, one entry per incident edge (parallel edges repeat).
    neighbors: Vec<Vec<usize>>,
}

/// Builds the `L x L` brick-wall honeycomb.
pub fn build_honeycomb(side: usize, boundary: Boundary) -> Result<Lattice> {
    if side < 2 || !side.is_multiple_of(2) {
        return Err(Error::InvalidSide(side));
    }
    let n = side * side;
    let idx = |r: usize, c: usize| r * side + c;
    let mut edges = Vec::with_capacity(3 * n / 2);
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                edges.push((idx(r, c), idx(r, c + 1)));
            } else if boundary == Boundary::Periodic {
                edges.push((idx(r, c), idx(r, 0)));
            }
            if (r + c) % 2 == 0 {
                if r + 1 < side {
                    edges.push((idx(r, c), idx(r + 1, c)));
                } else if boundary == Boundary::Periodic {
                    edges.push((idx(r, c), idx(0, c)));
                }
            }
        }
    }
    let mut neighbors = vec![Vec::with_capacity(3); n];
    for &(a, b) in &edges {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    Ok(Lattice {
        side,
        boundary,
        edges,
        neighbors,
    })
}

impl Lattice {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_sites(&self) -> usize {
        self.side * self.side
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.neighbors[site].len()
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.side + col
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.side, site % self.side)
    }

    pub fn sublattice(&self, site: usize) -> Sublattice {
        let (r, c) = self.coords(site);
        if (r + c) % 2 == 0 {
            Sublattice::A
        } else {
            Sublattice::B
        }
    }

    /// Sites on one edge of the open lattice, in increasing index order.
    pub fn boundary_columns(&self, side: Side) -> Result<Vec<usize>> {
        if self.boundary == Boundary::Periodic {
            return Err(Error::PeriodicBoundaryQuery { side });
        }
        let l = self.side;
        let sites = match side {
            Side::Left => (0..l).map(|r| self.site(r, 0)).collect(),
            Side::Right => (0..l).map(|r| self.site(r, l - 1)).collect(),
            Side::Top => (0..l).map(|c| self.site(0, c)).collect(),
            Side::Bottom => (0..l).map(|c| self.site(l - 1, c)).collect(),
        };
        Ok(sites)
    }

    pub fn summary(&self) -> LatticeSummary {
        LatticeSummary {
            l: self.side,
            boundary: self.boundary,
            n_sites: self.n_sites(),
            n_edges: self.n_edges(),
            edges: self.edges.clone(),
        }
    }
}

impl SiteGraph for Lattice {
    fn n_sites(&self) -> usize {
        Lattice::n_sites(self)
    }

    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// JSON export of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    #[serde(rename = "L")]
    pub l: usize,
    pub boundary: Boundary,
    pub n_sites: usize,
    pub n_edges: usize,
    pub edges: Vec<(usize, usize)>,
}
