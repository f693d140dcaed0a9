//! Spanning-cluster detection and robustness under random deletion.
//!
//! Deletion trials in [`threshold_scan`] draw one uniform number per vertex
//! (or edge) and delete the element when that number is below `p`. The same
//! draws are reused for every point of the p-grid, so the deleted sets are
//! nested in `p` and each trial's crossing indicator is monotone in `p`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Side};
use crate::reduce::{DomainPartition, SimpleGraph};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Left column to right column.
    Horizontal,
    /// Top row to bottom row.
    Vertical,
    /// Both of the above through one connected component.
    Both,
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "horizontal" => Ok(Self::Horizontal),
            "vertical" => Ok(Self::Vertical),
            "both" => Ok(Self::Both),
            other => Err(format!(
                "unknown crossing axis '{other}' (expected horizontal|vertical|both)"
            )),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
            Axis::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeletionMode {
    Vertex,
    Edge,
}

impl std::fmt::Display for DeletionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeletionMode::Vertex => "vertex",
            DeletionMode::Edge => "edge",
        })
    }
}

impl std::str::FromStr for DeletionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vertex" => Ok(Self::Vertex),
            "edge" => Ok(Self::Edge),
            other => Err(format!("unknown deletion mode '{other}' (expected vertex|edge)")),
        }
    }
}

/// Domains touching two opposite sides of the lattice, by domain id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidePair {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

/// Crossing holds when every pair is joined by one component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingQuery {
    pub axis: Axis,
    pub pairs: Vec<SidePair>,
}

impl CrossingQuery {
    /// Maps the lattice boundary sites through the domain partition.
    pub fn from_partition(lat: &Lattice, part: &DomainPartition, axis: Axis) -> Result<Self> {
        let sides: &[(Side, Side)] = match axis {
            Axis::Horizontal => &[(Side::Left, Side::Right)],
            Axis::Vertical => &[(Side::Top, Side::Bottom)],
            Axis::Both => &[(Side::Left, Side::Right), (Side::Top, Side::Bottom)],
        };
        let collect = |side| -> Result<Vec<usize>> {
            let mut ids: Vec<usize> = lat
                .boundary_columns(side)?
                .into_iter()
                .map(|s| part.domain_of(s))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            Ok(ids)
        };
        let pairs = sides
            .iter()
            .map(|&(a, b)| {
                Ok(SidePair {
                    from: collect(a)?,
                    to: collect(b)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { axis, pairs })
    }

    /// Single-pair query from explicit domain ids.
    pub fn between(axis: Axis, from: Vec<usize>, to: Vec<usize>) -> Self {
        Self {
            axis,
            pairs: vec![SidePair { from, to }],
        }
    }

    /// Boundary sets as vertex indices of `g`; domains absent from `g` are dropped.
    fn dense_sets(&self, g: &SimpleGraph) -> Result<Vec<SidePair>> {
        if self.pairs.is_empty() || self.pairs.iter().any(|p| p.from.is_empty() || p.to.is_empty()) {
            return Err(Error::EmptyBoundary);
        }
        let index: HashMap<usize, usize> = g.ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let map = |ids: &[usize]| ids.iter().filter_map(|id| index.get(id).copied()).collect();
        Ok(self
            .pairs
            .iter()
            .map(|p| SidePair {
                from: map(&p.from),
                to: map(&p.to),
            })
            .collect())
    }
}

/// Marker state for repeated span tests over one union-find.
struct Marks {
    mark: Vec<u32>,
    epoch: u32,
}

impl Marks {
    fn new() -> Self {
        Self {
            mark: Vec::new(),
            epoch: 0,
        }
    }

    fn spans(&mut self, uf: &mut UnionFind, from: &[usize], to: &[usize]) -> bool {
        if self.mark.len() < uf.len() {
            self.mark.resize(uf.len(), 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.fill(0);
            self.epoch = 1;
        }
        for &v in from {
            let r = uf.find(v);
            self.mark[r] = self.epoch;
        }
        to.iter().any(|&v| {
            let r = uf.find(v);
            self.mark[r] == self.epoch
        })
    }
}

/// True iff, for every side pair of `q`, one connected component of `g`
/// holds a domain from each side.
pub fn crossing_exists(g: &SimpleGraph, q: &CrossingQuery) -> Result<bool> {
    let pairs = q.dense_sets(g)?;
    let mut uf = UnionFind::new(g.n_vertices());
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    let mut marks = Marks::new();
    Ok(pairs.iter().all(|p| marks.spans(&mut uf, &p.from, &p.to)))
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability(p));
    }
    Ok(())
}

/// Removes each vertex (with its edges) or each edge independently with
/// probability `p`. Surviving vertices keep their domain ids.
pub fn random_delete<R: Rng + ?Sized>(g: &SimpleGraph, p: f64, mode: DeletionMode, rng: &mut R) -> Result<SimpleGraph> {
    check_probability(p)?;
    match mode {
        DeletionMode::Vertex => {
            let mut new_index = vec![usize::MAX; g.n_vertices()];
            let mut ids = Vec::new();
            for (v, &id) in g.ids().iter().enumerate() {
                if rng.random::<f64>() >= p {
                    new_index[v] = ids.len();
                    ids.push(id);
                }
            }
            let edges: Vec<(usize, usize)> = g
                .edges()
                .iter()
                .filter_map(|&(u, v)| {
                    let (a, b) = (new_index[u], new_index[v]);
                    (a != usize::MAX && b != usize::MAX).then_some((a, b))
                })
                .collect();
            Ok(SimpleGraph::new(ids, edges))
        }
        DeletionMode::Edge => {
            let edges: Vec<(usize, usize)> = g.edges().iter().copied().filter(|_| rng.random::<f64>() >= p).collect();
            Ok(SimpleGraph::new(g.ids().to_vec(), edges))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p_delete: f64,
    pub p_cluster: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub mode: DeletionMode,
    pub points: Vec<CurvePoint>,
}

/// Inclusive grid `start, start + step, ..., stop`.
pub fn p_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Grid(format!("{start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
    for &p in &grid {
        check_probability(p)?;
    }
    Ok(grid)
}

/// Per-trial RNG stream derived from the master seed and the
/// `(sample, trial)` pair.
pub fn trial_rng(seed: u64, sample: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((sample as u64) << 32) | trial as u64);
    rng
}

/// Fraction of `(sample, trial)` pairs that still span after deletion, for
/// every `p` in `grid`.
pub fn threshold_scan(
    samples: &[(SimpleGraph, CrossingQuery)],
    grid: &[f64],
    mode: DeletionMode,
    trials_per_point: usize,
    seed: u64,
) -> Result<ThresholdCurve> {
    if grid.is_empty() {
        return Err(Error::TooFewPoints {
            what: "p-grid points",
            needed: 1,
            got: 0,
        });
    }
    if trials_per_point == 0 {
        return Err(Error::TooFewPoints {
            what: "trials per point",
            needed: 1,
            got: 0,
        });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("values must be strictly increasing".into()));
    }
    for &p in grid {
        check_probability(p)?;
    }
    let mut hits = vec![0usize; grid.len()];
    let mut uf = UnionFind::new(0);
    let mut marks = Marks::new();
    let mut draws = Vec::new();
    let mut kept: Vec<SidePair> = Vec::new();
    for (s, (g, q)) in samples.iter().enumerate() {
        let pairs = q.dense_sets(g)?;
        let n = g.n_vertices();
        for t in 0..trials_per_point {
            let mut rng = trial_rng(seed, s, t);
            let count = match mode {
                DeletionMode::Vertex => n,
                DeletionMode::Edge => g.n_edges(),
            };
            draws.clear();
            draws.extend((0..count).map(|_| rng.random::<f64>()));
            for (k, &p) in grid.iter().enumerate() {
                uf.reset(n);
                let live = match mode {
                    DeletionMode::Vertex => {
                        for &(u, v) in g.edges() {
                            if draws[u] >= p && draws[v] >= p {
                                uf.union(u, v);
                            }
                        }
                        let alive = |ids: &[usize]| ids.iter().copied().filter(|&v| draws[v] >= p).collect();
                        kept.clear();
                        kept.extend(pairs.iter().map(|q| SidePair {
                            from: alive(&q.from),
                            to: alive(&q.to),
                        }));
                        &kept
                    }
                    DeletionMode::Edge => {
                        for (i, &(u, v)) in g.edges().iter().enumerate() {
                            if draws[i] >= p {
                                uf.union(u, v);
                            }
                        }
                        &pairs
                    }
                };
                if live.iter().all(|q| marks.spans(&mut uf, &q.from, &q.to)) {
                    hits[k] += 1;
                }
            }
        }
    }
    let trials = samples.len() * trials_per_point;
    let points = grid
        .iter()
        .zip(hits)
        .map(|(&p, h)| {
            let frac = if trials == 0 { 0.0 } else { h as f64 / trials as f64 };
            CurvePoint {
                p_delete: p,
                p_cluster: frac,
                stderr: if trials == 0 {
                    0.0
                } else {
                    (frac * (1.0 - frac) / trials as f64).sqrt()
                },
                trials,
            }
        })
        .collect();
    Ok(ThresholdCurve { mode, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub p_star: f64,
    pub uncertainty: f64,
    pub level: f64,
}

/// Linear interpolation of the first grid interval where the curve drops
/// through `level`. The uncertainty combines the propagated standard errors
/// of the two bracketing points with half the grid spacing.
pub fn estimate_threshold(curve: &ThresholdCurve, level: f64) -> Result<ThresholdEstimate> {
    for w in curve.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.p_cluster >= level && b.p_cluster < level {
            let h = b.p_delete - a.p_delete;
            let dy = b.p_cluster - a.p_cluster;
            let t = (level - a.p_cluster) / dy;
            let p_star = a.p_delete + t * h;
            let d_ya = h * (level - b.p_cluster) / (dy * dy);
            let d_yb = -h * (level - a.p_cluster) / (dy * dy);
            let stat = ((d_ya * a.stderr).powi(2) + (d_yb * b.stderr).powi(2)).sqrt();
            return Ok(ThresholdEstimate {
                p_star,
                uncertainty: stat + 0.5 * h,
                level,
            });
        }
    }
    Err(Error::NoBracket)
}
