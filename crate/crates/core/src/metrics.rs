//! Observables of a single tree: degree distribution and its power-law fit,
//! central vertex, mean occupation layer, entropies, mean edge length and
//! the gaps between the largest degrees.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mst::{degrees, levels_from, Tree};
use crate::phase::PhaseLabel;

/// Edges shorter than this enter the efficient entropy as near-duplicate
/// assets and are rejected.
pub const MIN_EDGE_LENGTH: f64 = 1e-9;

/// Fraction of vertices per occurring degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub n_vertices: usize,
    /// Occurring degrees, ascending.
    pub support: Vec<usize>,
    /// Vertex count per support entry.
    pub counts: Vec<usize>,
    /// `counts / n_vertices`.
    pub f: Vec<f64>,
}

impl DegreeDistribution {
    pub fn frequency(&self, k: usize) -> f64 {
        self.support
            .binary_search(&k)
            .map_or(0.0, |i| self.f[i])
    }

    pub fn count(&self, k: usize) -> usize {
        self.support
            .binary_search(&k)
            .map_or(0, |i| self.counts[i])
    }

    pub fn max_degree(&self) -> usize {
        self.support.last().copied().unwrap_or(0)
    }

    /// The `m` largest degrees counted with multiplicity, descending.
    pub fn top(&self, m: usize) -> Vec<usize> {
        self.support
            .iter()
            .zip(&self.counts)
            .rev()
            .flat_map(|(&k, &c)| std::iter::repeat_n(k, c))
            .take(m)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.support
            .iter()
            .zip(&self.counts)
            .zip(&self.f)
            .map(|((&k, &c), &f)| (k, c, f))
    }
}

/// Inclusive integer degree interval used for the log-log fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitRange {
    pub lo: usize,
    pub hi: usize,
}

impl Default for FitRange {
    fn default() -> Self {
        Self { lo: 2, hi: 10 }
    }
}

impl FitRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || lo >= hi {
            return Err(Error::InvalidConfig(format!(
                "fit range [{lo}, {hi}] must satisfy 1 <= lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }
}

/// Least-squares line `ln f(k) = intercept - gamma ln k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Positive exponent; the fitted slope is `-gamma`.
    pub gamma: f64,
    /// Standard error of the slope. Zero when only two points were fitted.
    pub stderr: f64,
    /// `ln c` of `f(k) = c k^-gamma`.
    pub intercept: f64,
    pub fit_range: FitRange,
    pub n_points: usize,
    /// Root mean square residual with `n_points - 2` degrees of freedom.
    pub residual_sd: f64,
}

impl PowerLawFit {
    /// Fitted `f(k)`.
    pub fn predict(&self, k: f64) -> f64 {
        (self.intercept - self.gamma * k.ln()).exp()
    }
}

/// One analysed window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub n_vertices: usize,
    pub degree_distribution: DegreeDistribution,
    /// Absent when fewer than two degrees inside the fit range are populated
    /// (a pure star, for instance).
    pub fit: Option<PowerLawFit>,
    pub mol_dynamic: f64,
    pub mol_static: Option<f64>,
    pub s_deg: f64,
    pub s_eff: f64,
    pub mean_tree_length: f64,
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub central_vertex: String,
    pub phase: PhaseLabel,
}

/// Names accepted by [`WindowMetrics::metric`].
pub const METRIC_NAMES: &[&str] = &[
    "n_vertices",
    "gamma",
    "gamma_stderr",
    "mol_dynamic",
    "mol_static",
    "s_deg",
    "s_eff",
    "mean_tree_length",
    "k1",
    "k2",
    "k3",
    "gap12",
    "gap23",
];

impl WindowMetrics {
    /// Scalar field by name. `Ok(None)` when the field is absent for this
    /// window.
    pub fn metric(&self, name: &str) -> Result<Option<f64>> {
        Ok(match name {
            "n_vertices" => Some(self.n_vertices as f64),
            "gamma" => self.fit.map(|f| f.gamma),
            "gamma_stderr" => self.fit.map(|f| f.stderr),
            "mol_dynamic" => Some(self.mol_dynamic),
            "mol_static" => self.mol_static,
            "s_deg" => Some(self.s_deg),
            "s_eff" => Some(self.s_eff),
            "mean_tree_length" => Some(self.mean_tree_length),
            "k1" => Some(self.k1 as f64),
            "k2" => Some(self.k2 as f64),
            "k3" => Some(self.k3 as f64),
            "gap12" => Some((self.k1 - self.k2) as f64),
            "gap23" => Some((self.k2 - self.k3) as f64),
            _ => return Err(Error::UnknownMetric(name.to_string())),
        })
    }
}

pub fn degree_distribution(degrees: &[usize]) -> DegreeDistribution {
    let n = degrees.len();
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    let mut support = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for k in sorted {
        if support.last() == Some(&k) {
            *counts.last_mut().unwrap() += 1;
        } else {
            support.push(k);
            counts.push(1);
        }
    }
    let f = counts.iter().map(|&c| c as f64 / n as f64).collect();
    DegreeDistribution {
        n_vertices: n,
        support,
        counts,
        f,
    }
}

/// Ordinary least squares of `ln f(k)` on `ln k` over the populated integer
/// degrees of `range`.
pub fn fit_power_law(dist: &DegreeDistribution, range: FitRange) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = dist
        .iter()
        .filter(|&(k, _, f)| (range.lo..=range.hi).contains(&k) && f > 0.0)
        .map(|(k, _, f)| ((k as f64).ln(), f.ln()))
        .collect();
    let m = points.len();
    if m < 2 {
        return Err(Error::DegenerateFit {
            lo: range.lo,
            hi: range.hi,
            points: m,
        });
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let residual_sd = if m > 2 {
        (ssr / (m - 2) as f64).sqrt()
    } else {
        0.0
    };
    Ok(PowerLawFit {
        gamma: -slope,
        stderr: residual_sd / sxx.sqrt(),
        intercept,
        fit_range: range,
        n_points: m,
        residual_sd,
    })
}

/// Index of the vertex of largest degree. Ties go to the smaller sum of hop
/// distances to all other vertices, then to the smaller ticker.
pub fn central_index(t: &Tree) -> usize {
    let k = degrees(t);
    let kmax = k.iter().copied().max().unwrap_or(0);
    let candidates: Vec<usize> = (0..t.len()).filter(|&v| k[v] == kmax).collect();
    if candidates.len() == 1 {
        return candidates[0];
    }
    candidates
        .into_iter()
        .map(|v| (levels_from(t, v).iter().sum::<usize>(), &t.tickers()[v], v))
        .min()
        .map(|(_, _, v)| v)
        .expect("tree has at least one vertex")
}

pub fn central_vertex(t: &Tree) -> String {
    t.tickers()[central_index(t)].clone()
}

/// Mean hop count from `center` over the other `N - 1` vertices.
pub fn mean_occupation_layer(t: &Tree, center: &str) -> Result<f64> {
    let c = t
        .index_of(center)
        .ok_or_else(|| Error::VertexNotInTree(center.to_string()))?;
    if t.len() < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: t.len() });
    }
    Ok(mol_from(t, c))
}

pub(crate) fn mol_from(t: &Tree, center: usize) -> f64 {
    let total: usize = levels_from(t, center).iter().sum();
    total as f64 / (t.len() - 1) as f64
}

/// Shannon entropy of the degree distribution, in nats.
pub fn degree_entropy(dist: &DegreeDistribution) -> f64 {
    -dist.f.iter().map(|&p| p * p.ln()).sum::<f64>()
}

/// Entropy of the normalised inverse-edge-length mass carried by each
/// vertex, in nats.
pub fn efficient_entropy(t: &Tree) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: t.len() });
    }
    let mut mass = vec![0.0; t.len()];
    for e in t.edges() {
        if e.weight < MIN_EDGE_LENGTH {
            return Err(Error::EdgeTooShort {
                a: t.tickers()[e.a].clone(),
                b: t.tickers()[e.b].clone(),
                weight: e.weight,
                min: MIN_EDGE_LENGTH,
            });
        }
        mass[e.a] += 1.0 / e.weight;
        mass[e.b] += 1.0 / e.weight;
    }
    let norm: f64 = mass.iter().sum();
    Ok(-mass
        .iter()
        .map(|m| m / norm)
        .map(|p| p * p.ln())
        .sum::<f64>())
}

pub fn mean_tree_length(t: &Tree) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: t.len() });
    }
    Ok(t.total_weight() / t.edges().len() as f64)
}

/// `(k1 - k2, k2 - k3)` for the three largest degrees.
pub fn degree_gaps(degrees: &[usize]) -> Result<(usize, usize)> {
    let [k1, k2, k3] = top3(degrees)?;
    Ok((k1 - k2, k2 - k3))
}

pub(crate) fn top3(degrees: &[usize]) -> Result<[usize; 3]> {
    if degrees.len() < 3 {
        return Err(Error::TooFewVertices {
            needed: 3,
            got: degrees.len(),
        });
    }
    let mut k = degrees.to_vec();
    k.sort_unstable_by(|a, b| b.cmp(a));
    Ok([k[0], k[1], k[2]])
}
