//! Stabilizers of post-measurement fragment states.
//!
//! Intra-domain generators are the same-letter pairs of the encoding table:
//! `s s` on two slots of one site and `-s s` across a lattice edge inside a
//! domain, where `s` is the Pauli along the domain's outcome axis.
//!
//! For the graph-state generator of a domain `D` the oracle uses
//!
//! ```text
//! G_D = (-1)^(internal edges + cut edges) prod_{q in D} t_q prod_{(i,j) cut} s_j
//! ```
//!
//! where a cut edge `(i, j)` leaves `D` at slot `i`, `s_j` is the Pauli along
//! the outcome axis of `j`'s site, `t_i = s_j` on cut slots and `t_q` is the
//! default logical flip elsewhere (`X` on `z` domains, `Z` on `x`/`y`
//! domains). `G_D` commutes with the POVM product and maps the singlets and
//! adapted boundary kets to themselves, so it stabilizes the state with sign
//! `+1`. It equals the encoded generator `Xbar_D prod Zbar_u` up to intra-domain
//! stabilizers and a `Zbar_D` factor for every cut slot whose neighbour axis
//! is not the default flip.

use serde::{Deserialize, Serialize};

use super::fragment::FragmentGraph;
use super::pauli::{Pauli, PauliString};
use super::state::StateVector;
use crate::config::{Outcome, PovmConfig};
use crate::error::{Error, Result};
use crate::lattice::Sublattice;
use crate::reduce::{reduce, DomainPartition, SimpleGraph};

/// Which assignment of logical operators to `z` domains is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// `Xbar = prod X`, `Zbar = lambda Z` on `z` domains.
    Table,
    /// `Xbar = prod Z`, `Zbar = lambda X` on `z` domains.
    MainText,
}

impl Encoding {
    pub const ALL: [Encoding; 2] = [Encoding::Table, Encoding::MainText];

    /// Letters of `(Xbar, Zbar)` for a domain with outcome `a`.
    pub fn letters(self, a: Outcome) -> (Pauli, Pauli) {
        match (self, a) {
            (Encoding::Table, Outcome::Z) => (Pauli::X, Pauli::Z),
            (Encoding::MainText, Outcome::Z) => (Pauli::Z, Pauli::X),
            (_, Outcome::X) => (Pauli::Z, Pauli::X),
            (_, Outcome::Y) => (Pauli::Z, Pauli::Y),
        }
    }
}

impl std::fmt::Display for Encoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Encoding::Table => "table",
            Encoding::MainText => "main_text",
        })
    }
}

/// Default logical flip on a domain with outcome `a`.
pub fn default_flip(a: Outcome) -> Pauli {
    Encoding::Table.letters(a).0
}

/// Reduction of one configuration on a fragment, with qubit bookkeeping.
pub struct FragmentDomains<'a> {
    pub fg: &'a FragmentGraph,
    pub cfg: &'a PovmConfig,
    pub partition: DomainPartition,
    pub graph: SimpleGraph,
    lambda: Vec<i8>,
}

impl<'a> FragmentDomains<'a> {
    pub fn new(fg: &'a FragmentGraph, cfg: &'a PovmConfig) -> Result<Self> {
        let (partition, _, graph) = reduce(fg, cfg)?;
        let lambda = fg
            .sublattices()?
            .into_iter()
            .map(|s| if s == Sublattice::A { 1 } else { -1 })
            .collect();
        Ok(Self {
            fg,
            cfg,
            partition,
            graph,
            lambda,
        })
    }

    fn n(&self) -> usize {
        self.fg.n_qubits()
    }

    pub fn n_domains(&self) -> usize {
        self.partition.n_domains()
    }

    fn outcome_of_domain(&self, d: usize) -> Outcome {
        self.cfg.get(self.partition.ids()[d])
    }

    fn domain_of_qubit(&self, q: usize) -> usize {
        self.partition.dense_of(q / 3)
    }

    /// Qubits of dense domain `d`, ascending.
    pub fn domain_qubits(&self, d: usize) -> Vec<usize> {
        (0..self.n()).filter(|&q| self.domain_of_qubit(q) == d).collect()
    }

    /// Sign of `lambda` for the site holding qubit `q`.
    pub fn lambda(&self, q: usize) -> i8 {
        self.lambda[q / 3]
    }

    /// Same-letter pair stabilizers of every domain: consecutive slots of
    /// each site, then lattice edges inside a domain.
    pub fn intra_domain(&self) -> Vec<PauliString> {
        let n = self.n();
        let mut out = Vec::new();
        for s in 0..self.fg.sites {
            let l = Pauli::axis(self.cfg.get(s));
            for k in 0..2 {
                let (i, j) = (3 * s + k, 3 * s + k + 1);
                out.push(PauliString::from_terms(
                    n,
                    self.lambda(i) * self.lambda(j),
                    &[(i, l), (j, l)],
                ));
            }
        }
        for (i, j) in self.fg.qubit_edges() {
            let (a, b) = (self.cfg.get(i / 3), self.cfg.get(j / 3));
            if a == b {
                let l = Pauli::axis(a);
                out.push(PauliString::from_terms(
                    n,
                    self.lambda(i) * self.lambda(j),
                    &[(i, l), (j, l)],
                ));
            }
        }
        out
    }

    /// `(Xbar_d, Zbar_d)` under `enc`. `Zbar` sits on the domain's first qubit.
    pub fn logical(&self, d: usize, enc: Encoding) -> (PauliString, PauliString) {
        let n = self.n();
        let (xl, zl) = enc.letters(self.outcome_of_domain(d));
        let qubits = self.domain_qubits(d);
        let terms: Vec<(usize, Pauli)> = qubits.iter().map(|&q| (q, xl)).collect();
        let r = qubits[0];
        (
            PauliString::from_terms(n, 1, &terms),
            PauliString::from_terms(n, self.lambda(r), &[(r, zl)]),
        )
    }

    /// Cut edges of domain `d` as `(inside qubit, outside qubit)`.
    fn cut_edges(&self, d: usize) -> Vec<(usize, usize)> {
        self.fg
            .qubit_edges()
            .into_iter()
            .filter_map(|(i, j)| {
                let (di, dj) = (self.domain_of_qubit(i), self.domain_of_qubit(j));
                match (di == d, dj == d) {
                    (true, false) => Some((i, j)),
                    (false, true) => Some((j, i)),
                    _ => None,
                }
            })
            .collect()
    }

    fn internal_edge_count(&self, d: usize) -> usize {
        self.fg
            .qubit_edges()
            .into_iter()
            .filter(|&(i, j)| self.domain_of_qubit(i) == d && self.domain_of_qubit(j) == d)
            .count()
    }

    /// The generator `G_d` with its derived sign.
    pub fn derived_generator(&self, d: usize) -> PauliString {
        let n = self.n();
        let cuts = self.cut_edges(d);
        let flip = default_flip(self.outcome_of_domain(d));
        let mut terms = Vec::new();
        for q in self.domain_qubits(d) {
            let letter = cuts
                .iter()
                .find(|&&(i, _)| i == q)
                .map(|&(_, j)| Pauli::axis(self.cfg.get(j / 3)))
                .unwrap_or(flip);
            terms.push((q, letter));
        }
        for &(_, j) in &cuts {
            terms.push((j, Pauli::axis(self.cfg.get(j / 3))));
        }
        let sign = if (self.internal_edge_count(d) + cuts.len()).is_multiple_of(2) {
            1
        } else {
            -1
        };
        PauliString::from_terms(n, sign, &terms)
    }

    /// `Xbar_d Zbar_d^k prod_{u in nb(d)} Zbar_u` under `enc`, made Hermitian.
    /// `k` counts cut slots whose neighbour axis differs from the `Xbar` letter.
    /// The overall sign is left to be measured.
    pub fn encoded_generator(&self, d: usize, enc: Encoding) -> PauliString {
        let (xbar, zbar) = self.logical(d, enc);
        let (xl, _) = enc.letters(self.outcome_of_domain(d));
        let k = self
            .cut_edges(d)
            .iter()
            .filter(|&&(_, j)| Pauli::axis(self.cfg.get(j / 3)) != xl)
            .count();
        let mut g = xbar;
        if k % 2 == 1 {
            g = g.mul(&zbar);
        }
        let adj = self.graph.adjacency();
        for &u in &adj[d] {
            g = g.mul(&self.logical(u, enc).1);
        }
        g.hermitian_part()
    }
}

/// Intra-domain stabilizers and one encoded generator per domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedStabilizers {
    pub encoding: Encoding,
    pub intra: Vec<PauliString>,
    pub generators: Vec<PauliString>,
}

pub fn expected_graph_stabilizers(fg: &FragmentGraph, cfg: &PovmConfig, enc: Encoding) -> Result<ExpectedStabilizers> {
    let dom = FragmentDomains::new(fg, cfg)?;
    Ok(ExpectedStabilizers {
        encoding: enc,
        intra: dom.intra_domain(),
        generators: (0..dom.n_domains()).map(|d| dom.encoded_generator(d, enc)).collect(),
    })
}

/// Outcome of checking one configuration on one fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerCheck {
    pub config: String,
    pub intra_ok: bool,
    pub derived_ok: bool,
    /// Measured sign of each encoded generator, `None` if the state is not
    /// an eigenstate.
    pub encoded_signs: Vec<Option<i8>>,
    pub commuting: bool,
    pub logical_ok: bool,
}

impl StabilizerCheck {
    pub fn encoded_ok(&self) -> bool {
        self.encoded_signs.iter().all(Option::is_some)
    }

    pub fn passed(&self) -> bool {
        self.intra_ok && self.derived_ok && self.encoded_ok() && self.commuting && self.logical_ok
    }
}

pub const STAB_TOL: f64 = 1e-10;

/// Checks every emitted stabilizer on the post-measurement state with adapted
/// boundary kets.
pub fn check_stabilizers(fg: &FragmentGraph, cfg: &PovmConfig, enc: Encoding) -> Result<StabilizerCheck> {
    let dom = FragmentDomains::new(fg, cfg)?;
    let psi = fg.post_povm_state(cfg, &fg.adapted_boundary(cfg))?;
    let plus = |p: &PauliString| -> Result<bool> { Ok(psi.pauli_eigenvalue(p, STAB_TOL)? == Some(1)) };
    let intra = dom.intra_domain();
    let mut intra_ok = true;
    for p in &intra {
        intra_ok &= plus(p)?;
    }
    let mut derived_ok = true;
    for d in 0..dom.n_domains() {
        derived_ok &= plus(&dom.derived_generator(d))?;
    }
    let encoded: Vec<PauliString> = (0..dom.n_domains()).map(|d| dom.encoded_generator(d, enc)).collect();
    let encoded_signs = encoded
        .iter()
        .map(|p| psi.pauli_eigenvalue(p, STAB_TOL))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<&PauliString> = intra.iter().chain(&encoded).collect();
    let commuting = all
        .iter()
        .enumerate()
        .all(|(i, a)| all[i + 1..].iter().all(|b| a.commutes_with(b)));
    let logical_ok = (0..dom.n_domains()).all(|d| {
        let (x, z) = dom.logical(d, enc);
        !x.commutes_with(&z) && intra.iter().all(|s| s.commutes_with(&x) && s.commutes_with(&z))
    });
    Ok(StabilizerCheck {
        config: cfg.to_string(),
        intra_ok,
        derived_ok,
        encoded_signs,
        commuting,
        logical_ok,
    })
}

/// Dimension of the subspace of the POVM image that every stabilizer in
/// `stabs` fixes.
pub fn stabilized_dimension(fg: &FragmentGraph, cfg: &PovmConfig, stabs: &[PauliString]) -> Result<usize> {
    let n = fg.n_qubits();
    let tol = 1e-9;
    let image: Vec<StateVector> = (0..1usize << n)
        .map(|b| fg.apply_povm_config(&StateVector::basis(n, b), cfg))
        .collect::<Result<_>>()?;
    let image = orthonormal_basis(image, tol);
    let mut projected = Vec::with_capacity(image.len());
    for v in &image {
        let mut w = v.clone();
        for s in stabs {
            let mut sum = w.apply_pauli(s);
            sum.add_assign(&w);
            w = sum.scaled(num_complex::Complex64::new(0.5, 0.0));
        }
        let mut residual = w.clone();
        for b in &image {
            residual.add_assign(&b.scaled(-b.inner(&w)));
        }
        if residual.norm() > tol {
            return Err(Error::Inconsistent("stabilizers do not preserve the POVM image".into()));
        }
        projected.push(w);
    }
    Ok(orthonormal_basis(projected, tol).len())
}

fn orthonormal_basis(vs: Vec<StateVector>, tol: f64) -> Vec<StateVector> {
    let mut basis: Vec<StateVector> = Vec::new();
    for mut v in vs {
        for _ in 0..2 {
            for b in &basis {
                v.add_assign(&b.scaled(-b.inner(&v)));
            }
        }
        let norm = v.norm();
        if norm > tol {
            basis.push(v.scaled(num_complex::Complex64::new(1.0 / norm, 0.0)));
        }
    }
    basis
}

/// `X_1 X_1' X_2 X_2' X_3 X_3'` on the star fragment: the three slots of the
/// centre and the slots paired with them.
pub fn star_operator(fg: &FragmentGraph) -> PauliString {
    let terms: Vec<(usize, Pauli)> = fg
        .qubit_edges()
        .into_iter()
        .filter(|&(i, _)| i / 3 == 0)
        .flat_map(|(i, j)| [(i, Pauli::X), (j, Pauli::X)])
        .collect();
    PauliString::from_terms(fg.n_qubits(), 1, &terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fragment::{hexagon, star, torus2, two_site};
    use crate::oracle::operator::eigenbasis;
    use crate::oracle::state::is_stabilized;

    #[test]
    fn two_site_intra_domain_set() {
        let fg = two_site();
        let cfg = PovmConfig::parse("zz").unwrap();
        let set = expected_graph_stabilizers(&fg, &cfg, Encoding::Table).unwrap();
        let names: Vec<String> = set.intra.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["+ZZIIII", "+IZZIII", "+IIIZZI", "+IIIIZZ", "-IIZZII"]);
        assert_eq!(set.generators.len(), 1);
        // Isolated domain: the generator is Xbar alone.
        assert_eq!(set.generators[0].to_string(), "+XXXXXX");
    }

    #[test]
    fn two_site_stabilized_subspace() {
        let fg = two_site();
        let cfg = PovmConfig::parse("zz").unwrap();
        let dom = FragmentDomains::new(&fg, &cfg).unwrap();
        let stabs = dom.intra_domain();
        // An all-|0> boundary would force |000>|000>, which the singlet kills.
        for init in [
            eigenbasis(Outcome::X).0,
            eigenbasis(Outcome::X).1,
            eigenbasis(Outcome::Y).0,
        ] {
            let psi = fg.post_povm_state(&cfg, &fg.uniform_boundary(init)).unwrap();
            for s in &stabs {
                assert!(is_stabilized(&psi, s, 1e-12).unwrap(), "{s}");
            }
        }
        assert_eq!(stabilized_dimension(&fg, &cfg, &stabs).unwrap(), 2);
        for b in [0b000111, 0b111000] {
            let v = StateVector::basis(6, b);
            assert!(stabs.iter().all(|s| is_stabilized(&v, s, 1e-12).unwrap()));
        }
        assert_eq!(stabilized_dimension(&fg, &cfg, &stabs[..4]).unwrap(), 4);
    }

    #[test]
    fn star_operator_sign() {
        let fg = star();
        let cfg = PovmConfig::parse("zxxx").unwrap();
        let o = star_operator(&fg);
        assert_eq!(o.to_string(), "+XXXXIIXIIXII");
        for init in [
            eigenbasis(Outcome::Z).0,
            eigenbasis(Outcome::X).0,
            eigenbasis(Outcome::Y).1,
        ] {
            let psi = fg.post_povm_state(&cfg, &fg.uniform_boundary(init)).unwrap();
            assert_eq!(psi.pauli_eigenvalue(&o, 1e-12).unwrap(), Some(-1));
        }
        let dom = FragmentDomains::new(&fg, &cfg).unwrap();
        assert_eq!(dom.derived_generator(0), o.negate());
    }

    #[test]
    fn table_encoding_is_the_consistent_one() {
        for fg in [two_site(), star()] {
            for code in 0..3usize.pow(fg.sites as u32) {
                let cfg = PovmConfig::from_code(fg.sites, code);
                let t = check_stabilizers(&fg, &cfg, Encoding::Table).unwrap();
                assert!(t.passed(), "{} {cfg}: {t:?}", fg.label());
            }
        }
        let cfg = PovmConfig::parse("zxxx").unwrap();
        let m = check_stabilizers(&star(), &cfg, Encoding::MainText).unwrap();
        assert!(!m.encoded_ok());
        assert!(!m.logical_ok);
    }

    #[test]
    fn torus_and_hexagon_generators() {
        let fg = torus2();
        for code in 0..81 {
            let cfg = PovmConfig::from_code(4, code);
            let t = check_stabilizers(&fg, &cfg, Encoding::Table).unwrap();
            assert!(t.passed(), "torus {cfg}: {t:?}");
        }
        let h = hexagon();
        for cfg in ["xzzzzz", "xyzxyz", "zzzzzz", "xxyyzz"] {
            let cfg = PovmConfig::parse(cfg).unwrap();
            let t = check_stabilizers(&h, &cfg, Encoding::Table).unwrap();
            assert!(t.passed(), "hexagon {cfg}: {t:?}");
        }
    }
}
