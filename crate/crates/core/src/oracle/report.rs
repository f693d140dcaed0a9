//! Runs every oracle check and collects a serializable report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fragment::{star, two_site, FragmentGraph};
use super::operator::{aligned_projector, eigenbasis, povm_element, povm_sum, symmetric_projector, Ket1, LocalOp};
use super::pauli::PauliString;
use super::stabilizers::{check_stabilizers, stabilized_dimension, star_operator, Encoding, FragmentDomains};
use super::state::StateVector;
use super::weights::verify_weight_convention;
use crate::config::{Outcome, PovmConfig};
use crate::error::{Error, Result};
use crate::sampler::WeightConvention;

pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Prefactor of the POVM elements in the completeness check.
    pub povm_scale: f64,
    /// Configurations drawn per fragment when `3^sites` exceeds `max_exhaustive`.
    pub sampled_configs: usize,
    pub max_exhaustive: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            povm_scale: (2.0f64 / 3.0).sqrt(),
            sampled_configs: 40,
            max_exhaustive: 81,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured deviation or count, compared against `tolerance` where one applies.
    pub value: f64,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    fn within(name: impl Into<String>, value: f64, tol: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: value <= tol,
            value,
            tolerance: Some(tol),
            detail: detail.into(),
        }
    }

    fn flag(name: impl Into<String>, passed: bool, value: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value,
            tolerance: None,
            detail: detail.into(),
        }
    }

    fn error(name: impl Into<String>, err: &Error) -> Self {
        Self::flag(name, false, f64::NAN, err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<CheckResult>,
    /// Sign `s` such that `s X1 X1' X2 X2' X3 X3'` stabilizes the star state.
    pub star_operator_sign: Option<i8>,
    pub encoding: Option<Encoding>,
    pub convention: Option<WeightConvention>,
    pub passed: bool,
}

impl OracleReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn projector_identities() -> CheckResult {
    let p = symmetric_projector();
    let mut dev = p.matmul(&p).distance(&p);
    dev = dev.max(p.adjoint().distance(&p));
    dev = dev.max((p.trace().re - 4.0).abs());
    for a in Outcome::ALL {
        // F_a / sqrt(2/3) is a rank-2 projector inside the symmetric subspace.
        let q = povm_element(a).scale((1.5f64).sqrt());
        dev = dev.max(q.matmul(&q).distance(&q));
        dev = dev.max(q.adjoint().distance(&q));
        dev = dev.max((q.trace().re - 2.0).abs());
        dev = dev.max(p.matmul(&q).distance(&q));
    }
    CheckResult::within(
        "projector_identities",
        dev,
        IDENTITY_TOL,
        "P_S and F_a/sqrt(2/3) are projectors of rank 4 and 2, F_a inside P_S",
    )
}

fn singlet_identities() -> CheckResult {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = num_complex::Complex64::new(0.0, 0.0);
    let singlet = StateVector::from_amplitudes(vec![z, h.into(), (-h).into(), z]);
    let mut ok = true;
    for s in ["-XX", "-YY", "-ZZ"] {
        ok &= matches!(
            singlet.pauli_eigenvalue(&PauliString::parse(s).unwrap(), IDENTITY_TOL),
            Ok(Some(1))
        );
    }
    ok &= matches!(
        singlet.pauli_eigenvalue(&PauliString::parse("ZZ").unwrap(), IDENTITY_TOL),
        Ok(Some(-1))
    );
    CheckResult::flag(
        "singlet_stabilizers",
        ok,
        0.0,
        "-XX, -YY, -ZZ fix the singlet and +ZZ does not",
    )
}

/// Boundary ket with no special alignment to any axis.
fn generic_ket() -> Ket1 {
    [
        num_complex::Complex64::new(0.8, 0.0),
        num_complex::Complex64::new(0.36, 0.48),
    ]
}

fn exclusion(fg: &FragmentGraph) -> Result<CheckResult> {
    let phi = fg.aklt_state(&fg.uniform_boundary(generic_ket()))?;
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let mut worst_same: f64 = 0.0;
    let mut best_opposite: f64 = f64::INFINITY;
    let id = LocalOp::identity(3);
    for e in &fg.edges {
        let (u, v) = (e[0], e[2]);
        for a in Outcome::ALL {
            for (su, sv) in [(true, true), (false, false), (true, false), (false, true)] {
                let mut cfg_ops = vec![id.clone(); fg.sites];
                cfg_ops[u] = aligned_projector(a, su);
                cfg_ops[v] = aligned_projector(a, sv);
                let mut out = phi.clone();
                for (s, op) in cfg_ops.iter().enumerate() {
                    out.apply_local(op, &[3 * s, 3 * s + 1, 3 * s + 2]);
                }
                let r = out.norm() / norm;
                if su == sv {
                    worst_same = worst_same.max(r);
                } else {
                    best_opposite = best_opposite.min(r);
                }
            }
        }
    }
    let mut c = CheckResult::within(
        format!("antiferromagnetic_exclusion[{}]", fg.label()),
        worst_same,
        IDENTITY_TOL,
        format!("aligned neighbours vanish; anti-aligned keep weight >= {best_opposite:.3e}"),
    );
    c.passed &= best_opposite > 1e-6 || fg.edges.is_empty();
    Ok(c)
}

fn outcome_completeness(fg: &FragmentGraph) -> Result<CheckResult> {
    let n = 3usize.pow(fg.sites as u32);
    let total: f64 = (0..n)
        .map(|c| fg.terminated_probability(&PovmConfig::from_code(fg.sites, c)))
        .sum::<Result<f64>>()?;
    let norm = fg.terminated_aklt_norm();
    let mut dev = (total - norm).abs() / norm;
    if fg.n_qubits() <= 12 {
        let kets = fg.uniform_boundary(eigenbasis(Outcome::X).0);
        let pure_norm = fg.aklt_state(&kets)?.norm_sqr();
        let pure_total: f64 = (0..n)
            .map(|c| fg.pure_probability(&PovmConfig::from_code(fg.sites, c), &kets))
            .sum::<Result<f64>>()?;
        dev = dev.max((pure_total - pure_norm).abs() / pure_norm);
    }
    Ok(CheckResult::within(
        format!("outcome_completeness[{}]", fg.label()),
        dev,
        IDENTITY_TOL,
        format!("sum over {n} outcomes of the outcome weight equals the AKLT norm {norm:.15e}"),
    ))
}

fn example_two_site() -> Result<CheckResult> {
    let fg = two_site();
    let cfg = PovmConfig::parse("zz").unwrap();
    let dom = FragmentDomains::new(&fg, &cfg)?;
    let stabs = dom.intra_domain();
    let mut names: Vec<String> = stabs.iter().map(|p| p.to_string()).collect();
    names.sort();
    let mut want: Vec<String> = ["+ZZIIII", "+IZZIII", "-IIZZII", "+IIIZZI", "+IIIIZZ"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    want.sort();
    let psi = fg.post_povm_state(&cfg, &fg.uniform_boundary(eigenbasis(Outcome::X).0))?;
    let mut dev: f64 = 0.0;
    for s in &stabs {
        dev = dev.max(psi.apply_pauli(s).distance(&psi) / psi.norm());
    }
    let dim = stabilized_dimension(&fg, &cfg, &stabs)?;
    let mut c = CheckResult::within(
        "two_site_encoding",
        dev,
        IDENTITY_TOL,
        format!(
            "stabilizers {} fix the state; stabilized subspace of the POVM image has dimension {dim}",
            names.join(" ")
        ),
    );
    c.passed &= names == want && dim == 2;
    Ok(c)
}

fn example_star() -> Result<(CheckResult, Option<i8>)> {
    let fg = star();
    let cfg = PovmConfig::parse("zxxx").unwrap();
    let o = star_operator(&fg);
    let mut signs = Vec::new();
    for init in [
        eigenbasis(Outcome::Z).0,
        eigenbasis(Outcome::X).0,
        eigenbasis(Outcome::Y).1,
    ] {
        let psi = fg.post_povm_state(&cfg, &fg.uniform_boundary(init))?;
        signs.push(psi.pauli_eigenvalue(&o, IDENTITY_TOL)?);
    }
    let sign = match signs.as_slice() {
        [Some(s), rest @ ..] if rest.iter().all(|r| *r == Some(*s)) => Some(*s),
        _ => None,
    };
    let detail = match sign {
        Some(s) => format!(
            "{}{} stabilizes the state; the opposite sign does not",
            if s < 0 { "-" } else { "+" },
            &o.to_string()[1..]
        ),
        None => format!("no consistent sign: {signs:?}"),
    };
    Ok((
        CheckResult::flag("star_operator", sign.is_some(), f64::from(sign.unwrap_or(0)), detail),
        sign,
    ))
}

fn configs_for(fg: &FragmentGraph, opts: &OracleOptions) -> Vec<PovmConfig> {
    let total = 3usize.pow(fg.sites as u32);
    if total <= opts.max_exhaustive {
        return (0..total).map(|c| PovmConfig::from_code(fg.sites, c)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.sampled_configs)
        .map(|_| PovmConfig::from_code(fg.sites, rng.random_range(0..total)))
        .collect()
}

fn encoding_check() -> Result<(CheckResult, Option<Encoding>)> {
    let mut consistent = Vec::new();
    let mut detail = Vec::new();
    for enc in Encoding::ALL {
        let mut ok = 0;
        let mut total = 0;
        for fg in [two_site(), star()] {
            for c in 0..3usize.pow(fg.sites as u32) {
                let cfg = PovmConfig::from_code(fg.sites, c);
                let r = check_stabilizers(&fg, &cfg, enc)?;
                total += 1;
                ok += usize::from(r.encoded_ok() && r.logical_ok);
            }
        }
        detail.push(format!("{enc}: {ok}/{total} configurations consistent"));
        if ok == total {
            consistent.push(enc);
        }
    }
    let chosen = if consistent.len() == 1 {
        Some(consistent[0])
    } else {
        None
    };
    Ok((
        CheckResult::flag(
            "encoding_assignment",
            chosen.is_some(),
            consistent.len() as f64,
            detail.join("; "),
        ),
        chosen,
    ))
}

fn graph_stabilizers(fg: &FragmentGraph, opts: &OracleOptions) -> Result<CheckResult> {
    let configs = configs_for(fg, opts);
    let mut failed = Vec::new();
    let (mut plus, mut minus) = (0usize, 0usize);
    for cfg in &configs {
        let r = check_stabilizers(fg, cfg, Encoding::Table)?;
        if !r.passed() {
            failed.push(cfg.to_string());
        }
        for s in r.encoded_signs.iter().flatten() {
            if *s > 0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
    }
    Ok(CheckResult::flag(
        format!("graph_stabilizers[{}]", fg.label()),
        failed.is_empty(),
        failed.len() as f64,
        format!(
            "{} configurations; encoded generators measured with sign + {plus} times and - {minus} times; failures: {failed:?}",
            configs.len()
        ),
    ))
}

fn record<T>(checks: &mut Vec<CheckResult>, name: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            checks.push(CheckResult::error(name, &e));
            None
        }
    }
}

/// Runs the identity, example, stabilizer and weight checks. The example
/// checks always use the built-in two-site and star fragments.
pub fn run_suite(fragments: &[FragmentGraph], opts: &OracleOptions) -> Result<OracleReport> {
    if fragments.is_empty() {
        return Err(Error::Fragment("empty fragment list".into()));
    }
    let mut checks = vec![
        CheckResult::within(
            "povm_completeness",
            povm_sum(opts.povm_scale).distance(&symmetric_projector()),
            IDENTITY_TOL,
            format!(
                "Frobenius distance of sum_a F_a^dag F_a from P_S with prefactor {}",
                opts.povm_scale
            ),
        ),
        projector_identities(),
        singlet_identities(),
    ];
    for fg in fragments {
        if let Some(c) = record(
            &mut checks,
            &format!("antiferromagnetic_exclusion[{}]", fg.label()),
            exclusion(fg),
        ) {
            checks.push(c);
        }
        if let Some(c) = record(
            &mut checks,
            &format!("outcome_completeness[{}]", fg.label()),
            outcome_completeness(fg),
        ) {
            checks.push(c);
        }
    }
    if let Some(c) = record(&mut checks, "two_site_encoding", example_two_site()) {
        checks.push(c);
    }
    let star_operator_sign = record(&mut checks, "star_operator", example_star()).and_then(|(c, s)| {
        checks.push(c);
        s
    });
    let encoding = record(&mut checks, "encoding_assignment", encoding_check()).and_then(|(c, e)| {
        checks.push(c);
        e
    });
    for fg in fragments {
        if let Some(c) = record(
            &mut checks,
            &format!("graph_stabilizers[{}]", fg.label()),
            graph_stabilizers(fg, opts),
        ) {
            checks.push(c);
        }
    }
    let convention = match verify_weight_convention(fragments) {
        Ok(rep) => {
            let detail = rep
                .fragments
                .iter()
                .map(|c| {
                    format!(
                        "{}: spread multigraph {:.3e}, simple {:.3e}{}",
                        c.fragment,
                        c.spread_multigraph,
                        c.spread_simple,
                        if c.discriminates { "" } else { " (not discriminating)" }
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            let worst = rep
                .fragments
                .iter()
                .map(|c| match rep.resolved {
                    WeightConvention::Multigraph => c.spread_multigraph,
                    WeightConvention::Simple => c.spread_simple,
                })
                .fold(0.0, f64::max);
            checks.push(CheckResult::within(
                "weight_convention",
                worst,
                super::weights::SPREAD_TOL,
                detail,
            ));
            Some(rep.resolved)
        }
        Err(e) => {
            checks.push(CheckResult::error("weight_convention", &e));
            None
        }
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(OracleReport {
        checks,
        star_operator_sign,
        encoding,
        convention,
        passed,
    })
}
