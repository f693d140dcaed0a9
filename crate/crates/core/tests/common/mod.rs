//! Property checks shared by the proptest target and the acceptance suite.
//! Each check returns a description of the first violation it finds.
#![allow(dead_code)]

use std::collections::VecDeque;

use aklt_core::percolation::trial_rng;
use aklt_core::reduce::{reduce, CycleGraph};
use aklt_core::sampler::{acceptance_probability, weight_terms};
use aklt_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Connected components by breadth-first search, independent of union-find.
pub fn bfs_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

pub fn random_config(n: usize, seed: u64) -> PovmConfig {
    uniform_random_config(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn betti_identity(lat: &Lattice, cfg: &PovmConfig) -> Check {
    let rec = SampleRecord::measure(lat, cfg).map_err(|e| e.to_string())?;
    let (_, _, g) = reduce(lat, cfg).map_err(|e| e.to_string())?;
    let c = bfs_components(g.n_vertices(), g.edges());
    ensure(rec.betti_identity_holds(), || format!("identity fails for {rec:?}"))?;
    ensure(rec.betti + g.n_vertices() == g.n_edges() + c, || {
        format!(
            "betti {} but |E|-|V|+C = {}",
            rec.betti,
            g.n_edges() + c - g.n_vertices()
        )
    })?;
    ensure(rec.n_components == c, || {
        format!("components {} vs bfs {c}", rec.n_components)
    })
}

pub fn mod2_idempotent(lat: &Lattice, cfg: &PovmConfig) -> Check {
    let (_, _, g) = reduce(lat, cfg).map_err(|e| e.to_string())?;
    let again = mod2_reduce(&g.as_multigraph()).map_err(|e| e.to_string())?;
    ensure(again == g, || "second mod-2 pass changed the graph".into())
}

/// Open lattices give planar reduced graphs; periodic ones embed in a torus.
pub fn euler_bound(lat: &Lattice, cfg: &PovmConfig) -> Check {
    let (_, _, g) = reduce(lat, cfg).map_err(|e| e.to_string())?;
    let (v, e) = (g.n_vertices(), g.n_edges());
    match lat.boundary() {
        Boundary::Open if v >= 3 => ensure(e + 6 <= 3 * v, || format!("planar bound violated: |V|={v} |E|={e}")),
        Boundary::Open => ensure(e <= v.saturating_sub(1), || format!("|V|={v} |E|={e}")),
        Boundary::Periodic => ensure(e <= 3 * v, || format!("torus bound violated: |V|={v} |E|={e}")),
    }
}

const PERMUTATIONS: [[Outcome; 3]; 6] = {
    use Outcome::{X, Y, Z};
    [[X, Y, Z], [X, Z, Y], [Y, X, Z], [Y, Z, X], [Z, X, Y], [Z, Y, X]]
};

/// Renaming outcome labels leaves the reduction unchanged.
pub fn label_permutation(lat: &Lattice, cfg: &PovmConfig) -> Check {
    let base = reduce(lat, cfg).map_err(|e| e.to_string())?;
    for perm in PERMUTATIONS {
        let relabelled = cfg.permuted(perm);
        let other = reduce(lat, &relabelled).map_err(|e| e.to_string())?;
        ensure(other == base, || format!("permutation {perm:?} changed the reduction"))?;
    }
    Ok(())
}

/// Translating a periodic configuration by one row and one column maps
/// bonds to bonds, so graph invariants must not change.
pub fn translation_invariance(lat: &Lattice, cfg: &PovmConfig) -> Check {
    assert_eq!(lat.boundary(), Boundary::Periodic);
    let l = lat.side();
    let mut shifted = cfg.clone();
    for site in 0..lat.n_sites() {
        let (r, c) = lat.coords(site);
        shifted.set(lat.site((r + 1) % l, (c + 1) % l), cfg.get(site));
    }
    let a = SampleRecord::measure(lat, cfg).map_err(|e| e.to_string())?;
    let b = SampleRecord::measure(lat, &shifted).map_err(|e| e.to_string())?;
    let key = |r: &SampleRecord| {
        (
            r.n_domains,
            r.n_edges_multi,
            r.n_edges_simple,
            r.n_components,
            r.max_domain_size,
        )
    };
    ensure(key(&a) == key(&b), || format!("{:?} vs {:?}", key(&a), key(&b)))
}

/// With coupled deletion draws, a crossing at the larger deletion
/// probability implies one at the smaller.
pub fn crossing_monotone(
    lat: &Lattice,
    cfg: &PovmConfig,
    seed: u64,
    p_lo: f64,
    p_hi: f64,
    mode: DeletionMode,
) -> Check {
    let (part, _, g) = reduce(lat, cfg).map_err(|e| e.to_string())?;
    let q = CrossingQuery::from_partition(lat, &part, Axis::Both).map_err(|e| e.to_string())?;
    let lo = random_delete(&g, p_lo, mode, &mut trial_rng(seed, 0, 0)).map_err(|e| e.to_string())?;
    let hi = random_delete(&g, p_hi, mode, &mut trial_rng(seed, 0, 0)).map_err(|e| e.to_string())?;
    ensure(
        hi.n_vertices() <= lo.n_vertices() && hi.n_edges() <= lo.n_edges(),
        || "larger deletion probability kept more of the graph".into(),
    )?;
    let c_lo = crossing_exists(&lo, &q).map_err(|e| e.to_string())?;
    let c_hi = crossing_exists(&hi, &q).map_err(|e| e.to_string())?;
    ensure(!c_hi || c_lo, || format!("crossing at p={p_hi} but not at p={p_lo}"))
}

/// Metropolis attempts keep the incremental weight equal to a recount and
/// leave the configuration untouched on rejection.
pub fn incremental_vs_recount(
    lat: &Lattice,
    cfg: &PovmConfig,
    conv: WeightConvention,
    moves: &[(usize, Outcome)],
    seed: u64,
) -> Check {
    let mut chain =
        Metropolis::new(lat, cfg.clone(), conv, ChaCha8Rng::seed_from_u64(seed)).map_err(|e| e.to_string())?;
    for &(site, new) in moves {
        let site = site % lat.n_sites();
        let before = chain.config().clone();
        let accepted = chain.attempt(site, new).map_err(|e| e.to_string())?;
        if !accepted {
            ensure(chain.config() == &before, || {
                "rejected move altered the configuration".into()
            })?;
        } else {
            ensure(chain.config().get(site) == new, || "accepted move not applied".into())?;
        }
        let terms = weight_terms(lat, chain.config()).map_err(|e| e.to_string())?;
        ensure(chain.log2_weight() == terms.log2_weight(conv), || {
            format!(
                "tracked weight {} vs recount {}",
                chain.log2_weight(),
                terms.log2_weight(conv)
            )
        })?;
    }
    Ok(())
}

/// Exact single-flip kernel on the L=2 torus:
/// `pi(a) K(a,b) = pi(b) K(b,a)` for every pair of neighbouring states.
pub fn exact_detailed_balance(conv: WeightConvention) -> Check {
    let lat = build_honeycomb(2, Boundary::Periodic).map_err(|e| e.to_string())?;
    let n = lat.n_sites();
    let states = 3usize.pow(n as u32);
    let log2w: Vec<i64> = (0..states)
        .map(|code| weight_terms(&lat, &PovmConfig::from_code(n, code)).map(|t| t.log2_weight(conv)))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let propose = 1.0 / (2.0 * n as f64);
    for a in 0..states {
        let cfg = PovmConfig::from_code(n, a);
        for site in 0..n {
            for new in cfg.get(site).others() {
                let mut next = cfg.clone();
                next.set(site, new);
                let b = next.code();
                let fwd = 2f64.powi(log2w[a] as i32) * propose * acceptance_probability(log2w[b] - log2w[a]);
                let back = 2f64.powi(log2w[b] as i32) * propose * acceptance_probability(log2w[a] - log2w[b]);
                ensure((fwd - back).abs() <= 1e-15 * fwd.max(back), || {
                    format!("flow {a}->{b}: {fwd} vs {back}")
                })?;
            }
        }
    }
    Ok(())
}

/// Empirical flow symmetry of the sweep kernel on the L=2 torus.
/// Returns the standardized chi-square `(X2 - dof) / sqrt(2 dof)` of
/// `N(a->b)` against `N(b->a)` over all visited pairs.
pub fn empirical_flow_asymmetry(seed: u64, sweeps: usize) -> std::result::Result<f64, String> {
    let lat = build_honeycomb(2, Boundary::Periodic).map_err(|e| e.to_string())?;
    let params = ChainParams {
        seed,
        burn_in: 1000,
        n_samples: sweeps,
        thinning: 1,
        convention: WeightConvention::Multigraph,
    };
    let states = 3usize.pow(lat.n_sites() as u32);
    let mut flow = vec![0u64; states * states];
    let mut prev: Option<usize> = None;
    for s in sample_chain(&lat, params).map_err(|e| e.to_string())? {
        let code = s.map_err(|e| e.to_string())?.config.code();
        if let Some(p) = prev {
            flow[p * states + code] += 1;
        }
        prev = Some(code);
    }
    let (mut x2, mut dof) = (0.0, 0usize);
    for a in 0..states {
        for b in a + 1..states {
            let (ab, ba) = (flow[a * states + b] as f64, flow[b * states + a] as f64);
            if ab + ba >= 10.0 {
                x2 += (ab - ba).powi(2) / (ab + ba);
                dof += 1;
            }
        }
    }
    if dof == 0 {
        return Err("no transitions observed".into());
    }
    Ok((x2 - dof as f64) / (2.0 * dof as f64).sqrt())
}

/// R1/R2 on hand-worked six-cycle configurations:
/// `(labels, |V|, total multiplicity, |E| after mod 2)`.
pub const HAND_EXAMPLES: [(&str, usize, usize, usize); 5] = [
    ("zzzzzz", 1, 0, 0),
    ("xyyyyy", 2, 2, 0),
    ("xxyyzz", 3, 3, 3),
    ("xyxyxy", 6, 6, 6),
    ("xxyxxy", 4, 4, 4),
];

pub fn hand_examples() -> Check {
    let ring = CycleGraph::new(6);
    for (labels, v, multi, simple) in HAND_EXAMPLES {
        let cfg = PovmConfig::parse(labels).map_err(|e| e.to_string())?;
        let (part, mg, g) = reduce(&ring, &cfg).map_err(|e| e.to_string())?;
        let got = (part.n_domains(), mg.total_multiplicity(), g.n_edges());
        ensure(got == (v, multi, simple), || {
            format!("{labels}: got {got:?}, want {:?}", (v, multi, simple))
        })?;
    }
    Ok(())
}
