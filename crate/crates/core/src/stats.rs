//! Ensemble observables, binning error bars and finite-size fits.

use serde::{Deserialize, Serialize};

use crate::config::PovmConfig;
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Lattice};
use crate::reduce::{domain_size_histogram, reduce, SimpleGraph};
use crate::sampler::WeightConvention;

/// Independent cycles of `g`: `|E| - |V| + C`.
pub fn betti_number(g: &SimpleGraph) -> usize {
    g.n_edges() + g.n_components() - g.n_vertices()
}

/// Per-sample measurements of the reduced graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(rename = "L")]
    pub side: usize,
    pub boundary: Boundary,
    pub n_sites: usize,
    pub n_domains: usize,
    pub n_edges_multi: usize,
    pub n_edges_simple: usize,
    pub n_components: usize,
    pub betti: usize,
    /// `2|E| / |V|` of this sample.
    pub mean_degree: f64,
    pub mean_domain_size: f64,
    /// Standard deviation of the domain sizes of this sample.
    pub domain_size_width: f64,
    pub max_domain_size: usize,
}

impl SampleRecord {
    pub fn measure(lat: &Lattice, cfg: &PovmConfig) -> Result<Self> {
        let (part, multi, g) = reduce(lat, cfg)?;
        let sizes = domain_size_histogram(&part);
        let n_components = g.n_components();
        let record = Self {
            side: lat.side(),
            boundary: lat.boundary(),
            n_sites: lat.n_sites(),
            n_domains: g.n_vertices(),
            n_edges_multi: multi.total_multiplicity(),
            n_edges_simple: g.n_edges(),
            n_components,
            betti: betti_number(&g),
            mean_degree: if g.n_vertices() > 0 {
                2.0 * g.n_edges() as f64 / g.n_vertices() as f64
            } else {
                0.0
            },
            mean_domain_size: sizes.mean,
            domain_size_width: sizes.width,
            max_domain_size: sizes.max,
        };
        debug_assert!(record.betti_identity_holds());
        Ok(record)
    }

    pub fn betti_identity_holds(&self) -> bool {
        self.n_edges_simple + self.n_components == self.betti + self.n_domains
    }

    /// Base-2 Metropolis weight of the sample under `conv`.
    pub fn log2_weight(&self, conv: WeightConvention) -> i64 {
        let e = match conv {
            WeightConvention::Multigraph => self.n_edges_multi,
            WeightConvention::Simple => self.n_edges_simple,
        };
        self.n_domains as i64 - e as i64
    }

    pub fn value(&self, obs: Observable) -> f64 {
        let n = self.n_sites as f64;
        match obs {
            Observable::VerticesPerSite => self.n_domains as f64 / n,
            Observable::EdgesPerSite => self.n_edges_simple as f64 / n,
            Observable::BettiPerSite => self.betti as f64 / n,
            Observable::MeanDegree => self.mean_degree,
            Observable::MeanDomainSize => self.mean_domain_size,
            Observable::DomainSizeWidth => self.domain_size_width,
            Observable::MaxDomainSize => self.max_domain_size as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    VerticesPerSite,
    EdgesPerSite,
    BettiPerSite,
    MeanDegree,
    MeanDomainSize,
    DomainSizeWidth,
    MaxDomainSize,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::VerticesPerSite,
        Observable::EdgesPerSite,
        Observable::BettiPerSite,
        Observable::MeanDegree,
        Observable::MeanDomainSize,
        Observable::DomainSizeWidth,
        Observable::MaxDomainSize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::VerticesPerSite => "vertices_per_site",
            Observable::EdgesPerSite => "edges_per_site",
            Observable::BettiPerSite => "betti_per_site",
            Observable::MeanDegree => "mean_degree",
            Observable::MeanDomainSize => "mean_domain_size",
            Observable::DomainSizeWidth => "domain_size_width",
            Observable::MaxDomainSize => "max_domain_size",
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown observable '{s}'"))
    }
}

/// Mean and standard error of one observable at one side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(rename = "L")]
    pub side: usize,
    pub observable: Observable,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

const MIN_BINS: usize = 16;
const PLATEAU_TOL: f64 = 0.05;

fn naive_stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Standard error of the mean of a correlated series by blocking.
///
/// The bin size doubles while at least 16 bins remain. The first level whose
/// estimate changes by less than 5% from the previous level is returned; when
/// no level plateaus the largest estimate seen is used.
pub fn binning_stderr(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "records",
            needed: 2,
            got: xs.len(),
        });
    }
    let mut level: Vec<f64> = xs.to_vec();
    let mut prev = naive_stderr(&level);
    let mut largest = prev;
    while level.len() / 2 >= MIN_BINS {
        level = level.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        let est = naive_stderr(&level);
        if prev == 0.0 && est == 0.0 {
            return Ok(0.0);
        }
        if (est - prev).abs() <= PLATEAU_TOL * prev.max(est) {
            return Ok(est);
        }
        largest = largest.max(est);
        prev = est;
    }
    Ok(largest)
}

/// Mean and binning error of every observable over records of one side
/// length, in chain order.
pub fn accumulate(records: &[SampleRecord]) -> Result<Vec<Estimate>> {
    if records.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "records",
            needed: 2,
            got: records.len(),
        });
    }
    let side = records[0].side;
    if records.iter().any(|r| r.side != side) {
        return Err(Error::MixedSides);
    }
    for r in records {
        assert!(r.betti_identity_holds(), "Betti identity violated: {r:?}");
    }
    Observable::ALL
        .into_iter()
        .map(|obs| {
            let xs: Vec<f64> = records.iter().map(|r| r.value(obs)).collect();
            Ok(Estimate {
                side,
                observable: obs,
                mean: xs.iter().sum::<f64>() / xs.len() as f64,
                stderr: binning_stderr(&xs)?,
                n_samples: xs.len(),
            })
        })
        .collect()
}

/// Finite-size form fitted by [`extrapolate_infinite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ansatz {
    /// `a + b / L`
    #[default]
    InverseL,
    /// `a + b / L^2`
    InverseLSquared,
}

impl std::str::FromStr for Ansatz {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "inverse_l" | "1/L" => Ok(Ansatz::InverseL),
            "inverse_l_squared" | "1/L^2" => Ok(Ansatz::InverseLSquared),
            other => Err(format!(
                "unknown ansatz '{other}' (expected inverse_l|inverse_l_squared)"
            )),
        }
    }
}

impl Ansatz {
    fn regressor(self, side: f64) -> f64 {
        match self {
            Ansatz::InverseL => 1.0 / side,
            Ansatz::InverseLSquared => 1.0 / (side * side),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub ansatz: Ansatz,
    pub limit: f64,
    pub limit_stderr: f64,
    pub slope: f64,
    pub reduced_chi2: f64,
    pub residuals: Vec<f64>,
    pub weighted: bool,
}

struct LineFit {
    a: f64,
    b: f64,
    var_a: f64,
    residuals: Vec<f64>,
    chi2: f64,
}

/// Weighted straight-line fit `y = a + b x`.
fn line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    let s: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = s * sxx - sx * sx;
    let scale = s * sxx;
    if !(det.abs() > 1e-12 * scale.abs()) || !det.is_finite() {
        return Err(Error::Degenerate);
    }
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(x, y)| y - (a + b * x)).collect();
    let chi2 = residuals.iter().zip(w).map(|(r, w)| w * r * r).sum();
    Ok(LineFit {
        a,
        b,
        var_a: sxx / det,
        residuals,
        chi2,
    })
}

fn distinct_count(xs: &[f64]) -> usize {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Fits `mean(L) = a + b f(L)` to `(L, mean, stderr)` points and returns `a`.
///
/// Points are weighted by `1 / stderr^2`; if any stderr is zero the fit is
/// unweighted and the limit's error comes from the residual scatter.
pub fn extrapolate_infinite(points: &[(f64, f64, f64)], ansatz: Ansatz) -> Result<Extrapolation> {
    let sides: Vec<f64> = points.iter().map(|p| p.0).collect();
    let distinct = distinct_count(&sides);
    if distinct < 3 {
        return Err(Error::TooFewPoints {
            what: "distinct side lengths",
            needed: 3,
            got: distinct,
        });
    }
    let x: Vec<f64> = sides.iter().map(|&l| ansatz.regressor(l)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let weighted = points.iter().all(|p| p.2 > 0.0);
    let w: Vec<f64> = if weighted {
        points.iter().map(|p| 1.0 / (p.2 * p.2)).collect()
    } else {
        vec![1.0; points.len()]
    };
    let fit = line_fit(&x, &y, &w)?;
    let dof = (points.len() - 2) as f64;
    let reduced_chi2 = fit.chi2 / dof;
    let var_a = if weighted { fit.var_a } else { fit.var_a * reduced_chi2 };
    Ok(Extrapolation {
        ansatz,
        limit: fit.a,
        limit_stderr: var_a.sqrt(),
        slope: fit.b,
        reduced_chi2,
        residuals: fit.residuals,
        weighted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub residual_norm: f64,
}

/// Least-squares fit `S(N) = a ln N + b`.
pub fn fit_log_growth(points: &[(f64, f64)]) -> Result<LogFit> {
    let ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    let distinct = distinct_count(&ns);
    if distinct < 3 {
        return Err(Error::TooFewPoints {
            what: "distinct system sizes",
            needed: 3,
            got: distinct,
        });
    }
    let x: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = line_fit(&x, &y, &vec![1.0; points.len()])?;
    Ok(LogFit {
        a: fit.b,
        b: fit.a,
        residual_norm: fit.chi2.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_honeycomb;

    fn path(n: usize) -> SimpleGraph {
        SimpleGraph::with_vertices(n, (0..n - 1).map(|i| (i, i + 1)))
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti_number(&path(5)), 0);
        assert_eq!(
            betti_number(&SimpleGraph::with_vertices(3, [(0, 1), (1, 2), (0, 2)])),
            1
        );
        let two = SimpleGraph::with_vertices(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        assert_eq!(betti_number(&two), 2);
        assert_eq!(betti_number(&SimpleGraph::with_vertices(0, [])), 0);
    }

    fn record(side: usize, degree: f64) -> SampleRecord {
        SampleRecord {
            side,
            boundary: Boundary::Periodic,
            n_sites: side * side,
            n_domains: 2,
            n_edges_multi: 3,
            n_edges_simple: 1,
            n_components: 1,
            betti: 0,
            mean_degree: degree,
            mean_domain_size: 2.0,
            domain_size_width: 0.0,
            max_domain_size: 2,
        }
    }

    #[test]
    fn accumulate_contract() {
        let same = vec![record(4, 1.0); 10];
        for e in accumulate(&same).unwrap() {
            assert_eq!(e.stderr, 0.0);
            assert_eq!(e.n_samples, 10);
        }
        let rs: Vec<_> = (1..=4).map(|d| record(4, d as f64)).collect();
        let est = accumulate(&rs).unwrap();
        let deg = est.iter().find(|e| e.observable == Observable::MeanDegree).unwrap();
        assert_eq!(deg.mean, 2.5);
        assert!(deg.stderr > 0.0);
        assert!(matches!(accumulate(&rs[..1]), Err(Error::TooFewPoints { .. })));
        assert!(matches!(
            accumulate(&[record(4, 1.0), record(6, 1.0)]),
            Err(Error::MixedSides)
        ));
    }

    #[test]
    fn binning_sees_correlation() {
        // Blocks of 32 identical values: the naive error is far too small.
        let xs: Vec<f64> = (0..4096).map(|i| ((i / 32) % 7) as f64).collect();
        let naive = naive_stderr(&xs);
        let binned = binning_stderr(&xs).unwrap();
        assert!(binned > 3.0 * naive, "naive {naive} binned {binned}");
    }

    #[test]
    fn binning_matches_naive_error_for_uncorrelated_data() {
        let xs: Vec<f64> = (0..1024).map(|i| ((i * 7919) % 101) as f64).collect();
        let b = binning_stderr(&xs).unwrap();
        let n = naive_stderr(&xs);
        assert!((b / n - 1.0).abs() < 0.5);
    }

    #[test]
    fn record_from_lattice() {
        let lat = build_honeycomb(2, Boundary::Periodic).unwrap();
        let r = SampleRecord::measure(&lat, &PovmConfig::parse("xyyx").unwrap()).unwrap();
        assert_eq!((r.n_domains, r.n_edges_multi, r.n_edges_simple), (4, 6, 2));
        assert_eq!(r.n_components, 2);
        assert_eq!(r.betti, 0);
        assert_eq!(r.mean_degree, 1.0);
        assert_eq!(r.log2_weight(WeightConvention::Multigraph), -2);
        assert_eq!(r.value(Observable::VerticesPerSite), 1.0);
    }

    #[test]
    fn extrapolation_examples() {
        let flat = [(20.0, 3.0, 0.1), (40.0, 3.0, 0.1), (100.0, 3.0, 0.1)];
        for ansatz in [Ansatz::InverseL, Ansatz::InverseLSquared] {
            let e = extrapolate_infinite(&flat, ansatz).unwrap();
            assert!((e.limit - 3.0).abs() < 1e-12);
            assert!(e.slope.abs() < 1e-9);
        }
        let exact: Vec<_> = [20.0, 40.0, 60.0, 100.0]
            .iter()
            .map(|&l| (l, 2.02 + 1.0 / l, 0.0))
            .collect();
        let e = extrapolate_infinite(&exact, Ansatz::InverseL).unwrap();
        assert!((e.limit - 2.02).abs() < 1e-12);
        assert!((e.slope - 1.0).abs() < 1e-9);
        assert!(!e.weighted);

        let two = [(20.0, 1.0, 0.1), (20.0, 1.1, 0.1), (40.0, 1.0, 0.1)];
        assert!(matches!(
            extrapolate_infinite(&two, Ansatz::InverseL),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn weighted_fit_covariance() {
        // Two well-measured points pin the line; a noisy outlier barely moves it.
        let pts = [(10.0, 1.1, 0.001), (20.0, 1.05, 0.001), (40.0, 5.0, 1000.0)];
        let e = extrapolate_infinite(&pts, Ansatz::InverseL).unwrap();
        assert!((e.limit - 1.0).abs() < 1e-6);
        assert!(e.limit_stderr > 0.0 && e.limit_stderr < 0.01);
    }

    #[test]
    fn log_growth_examples() {
        let pts: Vec<_> = [400.0f64, 2500.0, 10000.0]
            .iter()
            .map(|&n| (n, 3.337 * n.ln() - 5.566))
            .collect();
        let f = fit_log_growth(&pts).unwrap();
        assert!((f.a - 3.337).abs() < 1e-9);
        assert!((f.b + 5.566).abs() < 1e-9);
        let flat = fit_log_growth(&[(10.0, 4.0), (100.0, 4.0), (1000.0, 4.0)]).unwrap();
        assert!(flat.a.abs() < 1e-12);
        assert!(fit_log_growth(&pts[..2]).is_err());
    }
}
