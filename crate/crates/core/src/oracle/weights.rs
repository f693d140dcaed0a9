use serde::{Deserialize, Serialize};

use super::fragment::FragmentGraph;
use crate::config::PovmConfig;
use crate::error::{Error, Result};
use crate::reduce::reduce;
use crate::sampler::WeightConvention;

/// Largest relative spread of `p(A) / 2^(|V| - |E|)` accepted as constant.
pub const SPREAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionCheck {
    pub fragment: String,
    pub n_configs: usize,
    /// True when the two conventions give non-proportional weights.
    pub discriminates: bool,
    pub spread_multigraph: f64,
    pub spread_simple: f64,
    /// Sum of the outcome weights and the AKLT norm they must add up to.
    pub total_weight: f64,
    pub aklt_norm: f64,
    pub passing: Vec<WeightConvention>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionReport {
    pub fragments: Vec<ConventionCheck>,
    pub resolved: WeightConvention,
}

fn relative_spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return f64::INFINITY;
    }
    (max - min) / max
}

/// Exact terminated weights of all `3^n` outcome configurations compared
/// with `2^(|V| - |E|)` under both edge counts.
pub fn check_fragment_convention(fg: &FragmentGraph) -> Result<ConventionCheck> {
    let n_configs = 3usize.pow(fg.sites as u32);
    let mut ratio_multi = Vec::with_capacity(n_configs);
    let mut ratio_simple = Vec::with_capacity(n_configs);
    let mut offsets = std::collections::BTreeSet::new();
    let mut total = 0.0;
    for code in 0..n_configs {
        let cfg = PovmConfig::from_code(fg.sites, code);
        let p = fg.terminated_probability(&cfg)?;
        total += p;
        let (part, multi, simple) = reduce(fg, &cfg)?;
        let v = part.n_domains() as i32;
        let em = multi.total_multiplicity() as i32;
        let es = simple.n_edges() as i32;
        offsets.insert(em - es);
        ratio_multi.push(p / 2f64.powi(v - em));
        ratio_simple.push(p / 2f64.powi(v - es));
    }
    let spread_multigraph = relative_spread(&ratio_multi);
    let spread_simple = relative_spread(&ratio_simple);
    let mut passing = Vec::new();
    if spread_multigraph < SPREAD_TOL {
        passing.push(WeightConvention::Multigraph);
    }
    if spread_simple < SPREAD_TOL {
        passing.push(WeightConvention::Simple);
    }
    Ok(ConventionCheck {
        fragment: fg.label().to_owned(),
        n_configs,
        discriminates: offsets.len() > 1,
        spread_multigraph,
        spread_simple,
        total_weight: total,
        aklt_norm: fg.terminated_aklt_norm(),
        passing,
    })
}

/// The edge-count convention under which every fragment's exact outcome
/// weights are proportional to `2^(|V| - |E|)`.
pub fn verify_weight_convention(fragments: &[FragmentGraph]) -> Result<ConventionReport> {
    if fragments.is_empty() {
        return Err(Error::Fragment("empty fragment list".into()));
    }
    let checks = fragments
        .iter()
        .map(check_fragment_convention)
        .collect::<Result<Vec<_>>>()?;
    let mut resolved = None;
    for c in &checks {
        if !c.discriminates {
            if c.passing.len() != 2 {
                return Err(Error::Inconsistent(format!(
                    "{}: weights are not proportional to 2^(|V|-|E|) although both counts agree",
                    c.fragment
                )));
            }
            continue;
        }
        match c.passing.as_slice() {
            [one] => match resolved {
                None => resolved = Some(*one),
                Some(prev) if prev == *one => {}
                Some(prev) => {
                    return Err(Error::Inconsistent(format!(
                        "{} selects {one} but an earlier fragment selected {prev}",
                        c.fragment
                    )))
                }
            },
            _ => {
                return Err(Error::Inconsistent(format!(
                    "{}: {} conventions pass",
                    c.fragment,
                    c.passing.len()
                )))
            }
        }
    }
    let resolved = resolved.ok_or(Error::CannotDiscriminate)?;
    Ok(ConventionReport {
        fragments: checks,
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fragment::{hexagon, star, torus2, two_site};

    #[test]
    fn small_fragments_cannot_discriminate() {
        let c = check_fragment_convention(&two_site()).unwrap();
        assert!(!c.discriminates);
        assert_eq!(c.passing.len(), 2);
        assert!(matches!(
            verify_weight_convention(&[two_site(), star()]),
            Err(Error::CannotDiscriminate)
        ));
        assert!(verify_weight_convention(&[]).is_err());
    }

    #[test]
    fn weights_sum_to_the_aklt_norm() {
        for fg in [two_site(), star(), torus2()] {
            let c = check_fragment_convention(&fg).unwrap();
            assert!(
                (c.total_weight - c.aklt_norm).abs() < 1e-12 * c.aklt_norm,
                "{}",
                c.fragment
            );
        }
    }

    #[test]
    fn hexagon_and_torus_resolve_the_convention() {
        let report = verify_weight_convention(&[hexagon(), torus2()]).unwrap();
        assert_eq!(report.resolved, WeightConvention::Multigraph);
        for c in &report.fragments {
            assert!(c.discriminates);
            assert!(c.spread_multigraph < SPREAD_TOL);
            assert!(c.spread_simple > 0.1);
        }
    }
}
