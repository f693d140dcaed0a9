//! Metropolis sampling of POVM outcome configurations.
//!
//! The target weight of a configuration is `2^(|V| - |E|)` with `|V|` the
//! number of domains and `|E|` the number of inter-domain edges. A move picks
//! a site uniformly at random, proposes one of the two other labels with equal
//! probability and accepts with `min(1, 2^Δ)`.
//!
//! Under the multigraph convention `|E|` is simply the number of lattice edges
//! with differently labelled endpoints, so `Δ` only needs the local domain
//! structure around the flipped site. The sampler keeps a domain label per
//! site and recomputes connectivity by breadth-first search inside the one
//! domain a move can split. The simple-graph convention has no such locality
//! and falls back to a full recount per move.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{uniform_random_config, Outcome, PovmConfig};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteGraph};
use crate::reduce::{contract_domains, mod2_reduce};

/// Which inter-domain edge count enters the weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightConvention {
    /// Count inter-domain edges with multiplicity (before mod-2 reduction).
    #[default]
    Multigraph,
    /// Count edges of the mod-2 reduced simple graph.
    Simple,
}

impl std::fmt::Display for WeightConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightConvention::Multigraph => "multigraph",
            WeightConvention::Simple => "simple",
        })
    }
}

impl std::str::FromStr for WeightConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "multigraph" => Ok(Self::Multigraph),
            "simple" => Ok(Self::Simple),
            other => Err(format!("unknown weight convention '{other}'")),
        }
    }
}

/// Domain and edge counts of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightTerms {
    pub n_domains: usize,
    pub n_edges_multi: usize,
    pub n_edges_simple: usize,
}

impl WeightTerms {
    pub fn log2_weight(&self, convention: WeightConvention) -> i64 {
        let edges = match convention {
            WeightConvention::Multigraph => self.n_edges_multi,
            WeightConvention::Simple => self.n_edges_simple,
        };
        self.n_domains as i64 - edges as i64
    }
}

pub fn weight_terms(graph: &impl SiteGraph, cfg: &PovmConfig) -> Result<WeightTerms> {
    let (part, mg) = contract_domains(graph, cfg)?;
    let simple = mod2_reduce(&mg)?;
    Ok(WeightTerms {
        n_domains: part.n_domains(),
        n_edges_multi: mg.total_multiplicity(),
        n_edges_simple: simple.n_edges(),
    })
}

/// `|V| - |E|` for the given convention, by full recomputation.
pub fn log2_weight(graph: &impl SiteGraph, cfg: &PovmConfig, convention: WeightConvention) -> Result<i64> {
    Ok(weight_terms(graph, cfg)?.log2_weight(convention))
}

/// Metropolis acceptance probability for a log2-weight change `delta`.
pub fn acceptance_probability(delta: i64) -> f64 {
    if delta >= 0 {
        1.0
    } else {
        (delta as f64).exp2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    pub seed: u64,
    pub burn_in: usize,
    pub n_samples: usize,
    pub thinning: usize,
    pub convention: WeightConvention,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            seed: 0,
            burn_in: 2000,
            n_samples: 500,
            thinning: 10,
            convention: WeightConvention::Multigraph,
        }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::ChainParams("thinning must be at least 1".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::ChainParams("n_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Full recomputation interval used as a consistency guard for the
/// incremental bookkeeping.
pub const RECHECK_INTERVAL: usize = 1000;

/// Single Markov chain over outcome configurations of one lattice.
pub struct Metropolis<'a> {
    lat: &'a Lattice,
    cfg: PovmConfig,
    convention: WeightConvention,
    rng: ChaCha8Rng,
    // Domain label per site; always the index of some current member site.
    label: Vec<usize>,
    n_domains: usize,
    n_bichromatic: usize,
    // Log2 weight for the simple convention, maintained by full recounts.
    simple_log2: i64,
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
}

impl<'a> Metropolis<'a> {
    pub fn new(lat: &'a Lattice, cfg: PovmConfig, convention: WeightConvention, rng: ChaCha8Rng) -> Result<Self> {
        cfg.check_len(lat.n_sites())?;
        let n = lat.n_sites();
        let mut chain = Self {
            lat,
            cfg,
            convention,
            rng,
            label: vec![0; n],
            n_domains: 0,
            n_bichromatic: 0,
            simple_log2: 0,
            stamp: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        };
        chain.rebuild()?;
        Ok(chain)
    }

    /// Starts from a uniformly random configuration drawn from `seed`.
    pub fn from_seed(lat: &'a Lattice, seed: u64, convention: WeightConvention) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = uniform_random_config(lat.n_sites(), &mut rng);
        Self::new(lat, cfg, convention, rng)
    }

    pub fn config(&self) -> &PovmConfig {
        &self.cfg
    }

    pub fn convention(&self) -> WeightConvention {
        self.convention
    }

    pub fn n_domains(&self) -> usize {
        self.n_domains
    }

    pub fn n_edges_multi(&self) -> usize {
        self.n_bichromatic
    }

    /// Current log2 weight as tracked by the chain.
    pub fn log2_weight(&self) -> i64 {
        match self.convention {
            WeightConvention::Multigraph => self.n_domains as i64 - self.n_bichromatic as i64,
            WeightConvention::Simple => self.simple_log2,
        }
    }

    /// Recomputes all bookkeeping from scratch.
    fn rebuild(&mut self) -> Result<()> {
        let (part, mg) = contract_domains(self.lat, &self.cfg)?;
        for site in 0..self.lat.n_sites() {
            self.label[site] = part.domain_of(site);
        }
        self.n_domains = part.n_domains();
        self.n_bichromatic = mg.total_multiplicity();
        if self.convention == WeightConvention::Simple {
            self.simple_log2 = self.n_domains as i64 - mod2_reduce(&mg)?.n_edges() as i64;
        }
        Ok(())
    }

    /// Compares the incremental state against a full recount.
    pub fn verify_bookkeeping(&self) -> Result<bool> {
        let terms = weight_terms(self.lat, &self.cfg)?;
        let ok = terms.n_domains == self.n_domains
            && terms.n_edges_multi == self.n_bichromatic
            && terms.log2_weight(self.convention) == self.log2_weight();
        Ok(ok)
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Marks everything reachable from `start` through sites labelled
    /// `outcome`, never entering `blocked`. Returns early once every site in
    /// `targets` has been reached, reporting how many were reached.
    fn flood(&mut self, start: usize, outcome: Outcome, blocked: usize, epoch: u32, targets: &[usize]) -> usize {
        let mut reached = targets.iter().filter(|&&t| self.stamp[t] == epoch).count();
        if self.stamp[start] != epoch {
            self.stamp[start] = epoch;
            if targets.contains(&start) {
                reached += 1;
            }
        }
        self.stack.clear();
        self.stack.push(start);
        while let Some(u) = self.stack.pop() {
            if reached == targets.len() {
                break;
            }
            for &w in self.lat.neighbors(u) {
                if w != blocked && self.stamp[w] != epoch && self.cfg.get(w) == outcome {
                    self.stamp[w] = epoch;
                    if targets.contains(&w) {
                        reached += 1;
                    }
                    self.stack.push(w);
                }
            }
        }
        reached
    }

    fn relabel(&mut self, start: usize, id: usize) {
        let outcome = self.cfg.get(start);
        let epoch = self.next_epoch();
        self.stamp[start] = epoch;
        self.label[start] = id;
        self.stack.clear();
        self.stack.push(start);
        while let Some(u) = self.stack.pop() {
            for &w in self.lat.neighbors(u) {
                if self.stamp[w] != epoch && self.cfg.get(w) == outcome {
                    self.stamp[w] = epoch;
                    self.label[w] = id;
                    self.stack.push(w);
                }
            }
        }
    }

    /// Pieces left behind when `site` leaves its domain: the number of
    /// connected components among its same-label neighbours once `site` is
    /// removed. Also returns one representative per piece.
    fn split_pieces(&mut self, site: usize, old: Outcome) -> (usize, [usize; 3]) {
        let mut same = [usize::MAX; 3];
        let mut k = 0;
        for &w in self.lat.neighbors(site) {
            if self.cfg.get(w) == old && !same[..k].contains(&w) {
                same[k] = w;
                k += 1;
            }
        }
        let mut reps = [usize::MAX; 3];
        if k <= 1 {
            reps[..k].copy_from_slice(&same[..k]);
            return (k, reps);
        }
        let targets = same;
        let epoch = self.next_epoch();
        let mut pieces = 0;
        for &start in &targets[..k] {
            if self.stamp[start] == epoch {
                continue;
            }
            reps[pieces] = start;
            pieces += 1;
            let reached = self.flood(start, old, site, epoch, &targets[..k]);
            if reached == k {
                break;
            }
        }
        (pieces, reps)
    }

    /// Change in `(|V|, |E_multi|)` if `site` switches to `new`, plus the
    /// representatives of the pieces of its old domain.
    fn local_delta(&mut self, site: usize, new: Outcome) -> (i64, i64, usize, [usize; 3]) {
        let old = self.cfg.get(site);
        let mut d_edges = 0i64;
        let mut new_domains = [usize::MAX; 3];
        let mut n_new = 0;
        for &w in self.lat.neighbors(site) {
            let ow = self.cfg.get(w);
            d_edges += (ow != new) as i64 - (ow != old) as i64;
            if ow == new {
                let l = self.label[w];
                if !new_domains[..n_new].contains(&l) {
                    new_domains[n_new] = l;
                    n_new += 1;
                }
            }
        }
        let (pieces, reps) = self.split_pieces(site, old);
        let d_domains = pieces as i64 - n_new as i64;
        (d_domains, d_edges, pieces, reps)
    }

    /// One Metropolis attempt at `site` with proposed label `new`.
    /// Returns whether the move was accepted.
    pub fn attempt(&mut self, site: usize, new: Outcome) -> Result<bool> {
        let old = self.cfg.get(site);
        if new == old {
            return Ok(false);
        }
        match self.convention {
            WeightConvention::Multigraph => {
                let (d_domains, d_edges, pieces, reps) = self.local_delta(site, new);
                let delta = d_domains - d_edges;
                if !self.accept(delta) {
                    return Ok(false);
                }
                self.cfg.set(site, new);
                self.n_domains = (self.n_domains as i64 + d_domains) as usize;
                self.n_bichromatic = (self.n_bichromatic as i64 + d_edges) as usize;
                let old_id = self.label[site];
                self.relabel(site, site);
                // A lone surviving piece only needs new labels if it was
                // named after the site that just left it.
                if pieces > 1 || (pieces == 1 && old_id == site) {
                    for &rep in &reps[..pieces] {
                        self.relabel(rep, rep);
                    }
                }
                Ok(true)
            }
            WeightConvention::Simple => {
                let before = self.simple_log2;
                self.cfg.set(site, new);
                let after = log2_weight(self.lat, &self.cfg, WeightConvention::Simple)?;
                if self.accept(after - before) {
                    self.rebuild()?;
                    Ok(true)
                } else {
                    self.cfg.set(site, old);
                    Ok(false)
                }
            }
        }
    }

    fn accept(&mut self, delta: i64) -> bool {
        delta >= 0 || self.rng.random::<f64>() < acceptance_probability(delta)
    }

    /// `N` single-site attempts at uniformly random sites. Returns the
    /// number of accepted flips.
    pub fn sweep(&mut self) -> Result<usize> {
        let n = self.lat.n_sites();
        let mut accepted = 0;
        for _ in 0..n {
            let site = self.rng.random_range(0..n);
            let others = self.cfg.get(site).others();
            let new = others[self.rng.random_range(0..2)];
            if self.attempt(site, new)? {
                accepted += 1;
            }
        }
        Ok(accepted)
    }
}

/// Metrics attached to every emitted chain sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainMetrics {
    pub sweep: usize,
    pub n_domains: usize,
    pub n_edges_multi: usize,
    pub n_edges_simple: usize,
    pub log2_weight: i64,
    /// Accepted flips per attempt since the previous emitted sample.
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone)]
pub struct ChainSample {
    pub config: PovmConfig,
    pub metrics: ChainMetrics,
}

/// Iterator over thinned chain samples after burn-in.
pub struct SampleChain<'a> {
    chain: Metropolis<'a>,
    params: ChainParams,
    sweep: usize,
    emitted: usize,
    burned: bool,
}

/// Runs `burn_in` sweeps, then yields `n_samples` snapshots `thinning`
/// sweeps apart. Deterministic for a given seed.
pub fn sample_chain(lat: &Lattice, params: ChainParams) -> Result<SampleChain<'_>> {
    params.validate()?;
    Ok(SampleChain {
        chain: Metropolis::from_seed(lat, params.seed, params.convention)?,
        params,
        sweep: 0,
        emitted: 0,
        burned: false,
    })
}

impl SampleChain<'_> {
    fn step(&mut self) -> Result<usize> {
        let accepted = self.chain.sweep()?;
        self.sweep += 1;
        if self.sweep.is_multiple_of(RECHECK_INTERVAL) {
            assert!(
                self.chain.verify_bookkeeping()?,
                "incremental weight drifted from full recount at sweep {}",
                self.sweep
            );
        }
        Ok(accepted)
    }

    fn next_sample(&mut self) -> Result<ChainSample> {
        if !self.burned {
            for _ in 0..self.params.burn_in {
                self.step()?;
            }
            self.burned = true;
        }
        let mut accepted = 0;
        for _ in 0..self.params.thinning {
            accepted += self.step()?;
        }
        let attempts = self.params.thinning * self.chain.lat.n_sites();
        let terms = weight_terms(self.chain.lat, &self.chain.cfg)?;
        debug_assert_eq!(terms.n_domains, self.chain.n_domains);
        debug_assert_eq!(terms.n_edges_multi, self.chain.n_bichromatic);
        Ok(ChainSample {
            config: self.chain.cfg.clone(),
            metrics: ChainMetrics {
                sweep: self.sweep,
                n_domains: terms.n_domains,
                n_edges_multi: terms.n_edges_multi,
                n_edges_simple: terms.n_edges_simple,
                log2_weight: terms.log2_weight(self.params.convention),
                acceptance_rate: accepted as f64 / attempts as f64,
            },
        })
    }
}

impl Iterator for SampleChain<'_> {
    type Item = Result<ChainSample>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.emitted == self.params.n_samples {
            return None;
        }
        self.emitted += 1;
        Some(self.next_sample())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.params.n_samples - self.emitted;
        (left, Some(left))
    }
}
