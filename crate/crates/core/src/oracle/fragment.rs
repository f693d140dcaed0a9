use std::collections::{BTreeSet, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{eigenbasis, povm_element, symmetric_projector, Ket1, LocalOp};
use super::state::StateVector;
use crate::config::{Outcome, PovmConfig};
use crate::error::{Error, Result};
use crate::lattice::{SiteGraph, Sublattice};

/// Largest fragment the dense oracle accepts.
pub const QUBIT_BUDGET: usize = 20;

/// Sites with three virtual-qubit slots each; edges pair slots of distinct
/// sites with a singlet. Unpaired slots are boundary slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentGraph {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub sites: usize,
    /// `[site, slot, site, slot]`
    pub edges: Vec<[usize; 4]>,
    #[serde(skip)]
    site_edges: Vec<(usize, usize)>,
}

impl FragmentGraph {
    pub fn new(name: Option<&str>, sites: usize, edges: Vec<[usize; 4]>) -> Result<Self> {
        let mut fg = Self {
            name: name.map(str::to_owned),
            sites,
            edges,
            site_edges: Vec::new(),
        };
        fg.validate()?;
        Ok(fg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut fg: FragmentGraph = serde_json::from_str(text)?;
        fg.validate()?;
        Ok(fg)
    }

    /// Assigns slots to the edges of a trivalent site graph in edge order.
    pub fn from_site_graph(name: &str, graph: &impl SiteGraph) -> Result<Self> {
        let mut next = vec![0usize; graph.n_sites()];
        let mut edges = Vec::new();
        for &(u, v) in graph.edges() {
            edges.push([u, next[u], v, next[v]]);
            next[u] += 1;
            next[v] += 1;
        }
        Self::new(Some(name), graph.n_sites(), edges)
    }

    fn validate(&mut self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::Fragment("no sites".into()));
        }
        if self.n_qubits() > QUBIT_BUDGET {
            return Err(Error::QubitBudget(self.n_qubits()));
        }
        let mut used = BTreeSet::new();
        for e in &self.edges {
            let [s1, k1, s2, k2] = *e;
            if s1 >= self.sites || s2 >= self.sites || k1 > 2 || k2 > 2 {
                return Err(Error::Fragment(format!("edge {e:?} out of range")));
            }
            if s1 == s2 {
                return Err(Error::Fragment(format!("edge {e:?} joins a site to itself")));
            }
            for q in [3 * s1 + k1, 3 * s2 + k2] {
                if !used.insert(q) {
                    return Err(Error::Fragment(format!("slot of qubit {q} used twice")));
                }
            }
        }
        self.site_edges = self.edges.iter().map(|e| (e[0], e[2])).collect();
        Ok(())
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("fragment")
    }

    pub fn n_qubits(&self) -> usize {
        3 * self.sites
    }

    pub fn qubit(site: usize, slot: usize) -> usize {
        3 * site + slot
    }

    /// Qubit pairs joined by singlets.
    pub fn qubit_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| (Self::qubit(e[0], e[1]), Self::qubit(e[2], e[3])))
            .collect()
    }

    /// Unpaired qubits, ascending.
    pub fn boundary_qubits(&self) -> Vec<usize> {
        let paired: BTreeSet<usize> = self.qubit_edges().into_iter().flat_map(|(a, b)| [a, b]).collect();
        (0..self.n_qubits()).filter(|q| !paired.contains(q)).collect()
    }

    /// Two-colouring with site 0 on `A`.
    pub fn sublattices(&self) -> Result<Vec<Sublattice>> {
        let mut colour: Vec<Option<Sublattice>> = vec![None; self.sites];
        let mut adj = vec![Vec::new(); self.sites];
        for &(u, v) in &self.site_edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for start in 0..self.sites {
            if colour[start].is_some() {
                continue;
            }
            colour[start] = Some(Sublattice::A);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let other = match colour[u] {
                    Some(Sublattice::A) => Sublattice::B,
                    _ => Sublattice::A,
                };
                for &v in &adj[u] {
                    match colour[v] {
                        None => {
                            colour[v] = Some(other);
                            queue.push_back(v);
                        }
                        Some(c) if c != other => {
                            return Err(Error::Fragment("site graph is not bipartite".into()));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(colour.into_iter().map(Option::unwrap).collect())
    }

    /// Product of edge singlets and boundary kets (one per boundary qubit,
    /// in ascending qubit order).
    pub fn reference_state(&self, boundary: &[Ket1]) -> Result<StateVector> {
        let bq = self.boundary_qubits();
        if boundary.len() != bq.len() {
            return Err(Error::Fragment(format!(
                "{} boundary kets given for {} boundary qubits",
                boundary.len(),
                bq.len()
            )));
        }
        let n = self.n_qubits();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bit = |b: usize, q: usize| (b >> (n - 1 - q)) & 1;
        let pairs = self.qubit_edges();
        let amps = (0..1usize << n)
            .map(|b| {
                let mut a = Complex64::new(1.0, 0.0);
                for &(p, q) in &pairs {
                    a *= match (bit(b, p), bit(b, q)) {
                        (0, 1) => h,
                        (1, 0) => -h,
                        _ => return Complex64::new(0.0, 0.0),
                    };
                }
                for (&q, ket) in bq.iter().zip(boundary) {
                    a *= ket[bit(b, q)];
                }
                a
            })
            .collect();
        Ok(StateVector::from_amplitudes(amps))
    }

    fn site_qubits(site: usize) -> [usize; 3] {
        [3 * site, 3 * site + 1, 3 * site + 2]
    }

    /// Unnormalized AKLT fragment: the symmetric projector on every site of
    /// the reference state.
    pub fn aklt_state(&self, boundary: &[Ket1]) -> Result<StateVector> {
        let mut sv = self.reference_state(boundary)?;
        let p = symmetric_projector();
        for s in 0..self.sites {
            sv.apply_local(&p, &Self::site_qubits(s));
        }
        Ok(sv)
    }

    /// Applies the POVM element of each site's outcome.
    pub fn apply_povm_config(&self, sv: &StateVector, cfg: &PovmConfig) -> Result<StateVector> {
        self.apply_site_ops(sv, cfg, povm_element)
    }

    pub fn apply_site_ops(
        &self,
        sv: &StateVector,
        cfg: &PovmConfig,
        op: impl Fn(Outcome) -> LocalOp,
    ) -> Result<StateVector> {
        cfg.check_len(self.sites)?;
        let mut out = sv.clone();
        for (s, &a) in cfg.outcomes().iter().enumerate() {
            out.apply_local(&op(a), &Self::site_qubits(s));
        }
        Ok(out)
    }

    /// Post-measurement state for pure boundary kets.
    pub fn post_povm_state(&self, cfg: &PovmConfig, boundary: &[Ket1]) -> Result<StateVector> {
        let reference = self.reference_state(boundary)?;
        self.apply_povm_config(&reference, cfg)
    }

    /// `||Psi(A)||^2` with the given pure boundary kets.
    pub fn pure_probability(&self, cfg: &PovmConfig, boundary: &[Ket1]) -> Result<f64> {
        Ok(self.post_povm_state(cfg, boundary)?.norm_sqr())
    }

    /// Outcome weight with every boundary slot terminated by a spin-1/2
    /// partner in a singlet, so each boundary slot is maximally mixed.
    ///
    /// Evaluated as `<s| prod_v G_v |s>` on the internal singlets `|s>`, where
    /// `G_v` is `F_v^dag F_v` traced over the boundary slots of `v` and
    /// divided by `2^(boundary slots of v)`.
    pub fn terminated_probability(&self, cfg: &PovmConfig) -> Result<f64> {
        cfg.check_len(self.sites)?;
        let ops = cfg
            .outcomes()
            .iter()
            .map(|&a| {
                let f = povm_element(a);
                f.adjoint().matmul(&f)
            })
            .collect::<Vec<_>>();
        Ok(self.terminated_expectation(&ops))
    }

    /// Terminated norm of the AKLT fragment, which the terminated outcome
    /// weights sum to.
    pub fn terminated_aklt_norm(&self) -> f64 {
        self.terminated_expectation(&vec![symmetric_projector(); self.sites])
    }

    /// `<s| prod_v G_v |s>` for per-site three-qubit operators `ops`.
    fn terminated_expectation(&self, ops: &[LocalOp]) -> f64 {
        let boundary: BTreeSet<usize> = self.boundary_qubits().into_iter().collect();
        // Internal qubits renumbered densely.
        let internal: Vec<usize> = (0..self.n_qubits()).filter(|q| !boundary.contains(q)).collect();
        let dense = |q: usize| internal.binary_search(&q).unwrap();
        let m = internal.len();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pairs: Vec<(usize, usize)> = self
            .qubit_edges()
            .into_iter()
            .map(|(a, b)| (dense(a), dense(b)))
            .collect();
        let bit = |b: usize, q: usize| (b >> (m - 1 - q)) & 1;
        let amps = (0..1usize << m)
            .map(|b| {
                let mut a = Complex64::new(1.0, 0.0);
                for &(p, q) in &pairs {
                    a *= match (bit(b, p), bit(b, q)) {
                        (0, 1) => h,
                        (1, 0) => -h,
                        _ => return Complex64::new(0.0, 0.0),
                    };
                }
                a
            })
            .collect();
        let singlets = StateVector::from_amplitudes(amps);
        let mut out = singlets.clone();
        for (s, op) in ops.iter().enumerate() {
            let keep: Vec<usize> = (0..3).filter(|k| !boundary.contains(&(3 * s + k))).collect();
            let nb = 3 - keep.len();
            let g = op.partial_trace(&keep).scale(1.0 / f64::from(1u32 << nb));
            let qubits: Vec<usize> = keep.iter().map(|k| dense(3 * s + k)).collect();
            out.apply_local(&g, &qubits);
        }
        singlets.inner(&out).re
    }

    /// Average of [`Self::pure_probability`] over all computational-basis
    /// boundary states. Slow; used to cross-check the terminated weight.
    pub fn terminated_probability_by_enumeration(&self, cfg: &PovmConfig) -> Result<f64> {
        let nb = self.boundary_qubits().len();
        let (zero, one) = eigenbasis(Outcome::Z);
        let mut total = 0.0;
        for b in 0..1usize << nb {
            let kets: Vec<Ket1> = (0..nb)
                .map(|i| if (b >> (nb - 1 - i)) & 1 == 1 { one } else { zero })
                .collect();
            total += self.pure_probability(cfg, &kets)?;
        }
        Ok(total / (1u64 << nb) as f64)
    }

    /// Boundary kets that are `+1` eigenstates of each site's default logical
    /// flip: `|+>` on `z` sites, `|0>` on `x` and `y` sites.
    pub fn adapted_boundary(&self, cfg: &PovmConfig) -> Vec<Ket1> {
        self.boundary_qubits()
            .into_iter()
            .map(|q| match cfg.get(q / 3) {
                Outcome::Z => eigenbasis(Outcome::X).0,
                _ => eigenbasis(Outcome::Z).0,
            })
            .collect()
    }

    pub fn uniform_boundary(&self, ket: Ket1) -> Vec<Ket1> {
        vec![ket; self.boundary_qubits().len()]
    }
}

impl SiteGraph for FragmentGraph {
    fn n_sites(&self) -> usize {
        self.sites
    }

    fn edges(&self) -> &[(usize, usize)] {
        &self.site_edges
    }
}

/// Two sites joined by one edge; slot 2 of site 0 pairs with slot 0 of site 1.
pub fn two_site() -> FragmentGraph {
    FragmentGraph::new(Some("two-site"), 2, vec![[0, 2, 1, 0]]).unwrap()
}

/// Site 0 with its three slots paired to slot 0 of sites 1, 2 and 3.
pub fn star() -> FragmentGraph {
    FragmentGraph::new(Some("star"), 4, vec![[0, 0, 1, 0], [0, 1, 2, 0], [0, 2, 3, 0]]).unwrap()
}

/// Six sites on a ring; slot 1 of each site pairs with slot 0 of the next,
/// slot 2 is a boundary slot.
pub fn hexagon() -> FragmentGraph {
    let edges = (0..6).map(|i| [i, 1, (i + 1) % 6, 0]).collect();
    FragmentGraph::new(Some("hexagon"), 6, edges).unwrap()
}

/// The periodic 2x2 brick-wall lattice, which has two doubled edges.
pub fn torus2() -> FragmentGraph {
    let lat = crate::lattice::build_honeycomb(2, crate::lattice::Boundary::Periodic).unwrap();
    FragmentGraph::from_site_graph("torus-2x2", &lat).unwrap()
}

pub fn builtin_fragments() -> Vec<FragmentGraph> {
    vec![two_site(), star(), hexagon(), torus2()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let t = two_site();
        assert_eq!(t.n_qubits(), 6);
        assert_eq!(t.qubit_edges(), vec![(2, 3)]);
        assert_eq!(t.boundary_qubits(), vec![0, 1, 4, 5]);
        let s = star();
        assert_eq!(s.qubit_edges(), vec![(0, 3), (1, 6), (2, 9)]);
        let h = hexagon();
        assert_eq!(h.boundary_qubits().len(), 6);
        assert_eq!(h.n_qubits(), 18);
        let t2 = torus2();
        assert_eq!(t2.boundary_qubits().len(), 0);
        assert_eq!(t2.edges.len(), 6);
        assert_eq!(
            t2.sublattices()
                .unwrap()
                .iter()
                .filter(|&&s| s == Sublattice::A)
                .count(),
            2
        );
    }

    #[test]
    fn validation() {
        assert!(matches!(
            FragmentGraph::new(None, 7, vec![]),
            Err(Error::QubitBudget(21))
        ));
        assert!(FragmentGraph::new(None, 2, vec![[0, 0, 1, 0], [0, 0, 1, 1]]).is_err());
        assert!(FragmentGraph::new(None, 2, vec![[0, 3, 1, 0]]).is_err());
        assert!(FragmentGraph::new(None, 2, vec![[1, 0, 1, 1]]).is_err());
        assert!(FragmentGraph::new(None, 0, vec![]).is_err());
        let tri = FragmentGraph::new(None, 3, vec![[0, 0, 1, 0], [1, 1, 2, 0], [2, 1, 0, 1]]).unwrap();
        assert!(tri.sublattices().is_err());
        let fg = FragmentGraph::from_json(r#"{"sites": 2, "edges": [[0, 2, 1, 0]]}"#).unwrap();
        assert_eq!(fg.qubit_edges(), vec![(2, 3)]);
        assert_eq!(SiteGraph::edges(&fg), &[(0, 1)]);
    }

    #[test]
    fn single_site_state_is_symmetric() {
        let fg = FragmentGraph::new(Some("site"), 1, vec![]).unwrap();
        let (zero, one) = eigenbasis(Outcome::Z);
        let sv = fg.aklt_state(&[zero, zero, one]).unwrap();
        // P_S|001> = |W>/sqrt3, norm^2 1/3.
        assert!((sv.norm_sqr() - 1.0 / 3.0).abs() < 1e-12);
        for i in [1usize, 2, 4] {
            assert!((sv.amplitudes()[i].re - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let fg = two_site();
        let z = StateVector::zero(6);
        let out = fg.apply_povm_config(&z, &PovmConfig::parse("zx").unwrap()).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
    }

    #[test]
    fn terminated_weight_matches_enumeration() {
        let fg = two_site();
        for code in 0..9 {
            let cfg = PovmConfig::from_code(2, code);
            let fast = fg.terminated_probability(&cfg).unwrap();
            let slow = fg.terminated_probability_by_enumeration(&cfg).unwrap();
            assert!((fast - slow).abs() < 1e-14, "{cfg}: {fast} vs {slow}");
        }
        let st = star();
        for cfg in ["zxxx", "xyzx", "zzzz"] {
            let cfg = PovmConfig::parse(cfg).unwrap();
            let fast = st.terminated_probability(&cfg).unwrap();
            let slow = st.terminated_probability_by_enumeration(&cfg).unwrap();
            assert!((fast - slow).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_fragment_weights_agree() {
        let t = torus2();
        for cfg in ["xyyx", "zzzz", "xyzx"] {
            let cfg = PovmConfig::parse(cfg).unwrap();
            let pure = t.pure_probability(&cfg, &[]).unwrap();
            let term = t.terminated_probability(&cfg).unwrap();
            assert!((pure - term).abs() < 1e-14);
        }
    }
}
