//! Phase labels for windows, dragon-king detection and transition events.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::metrics::{DegreeDistribution, PowerLawFit, WindowMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhaseKind {
    ScaleFree,
    Superstar,
    DecoratedScaleFree,
    Indeterminate,
}

impl PhaseKind {
    pub fn short(&self) -> &'static str {
        match self {
            PhaseKind::ScaleFree => "SF",
            PhaseKind::Superstar => "SS",
            PhaseKind::DecoratedScaleFree => "DSF",
            PhaseKind::Indeterminate => "IND",
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PhaseKind::ScaleFree => "ScaleFree",
            PhaseKind::Superstar => "Superstar",
            PhaseKind::DecoratedScaleFree => "DecoratedScaleFree",
            PhaseKind::Indeterminate => "Indeterminate",
        };
        f.write_str(name)
    }
}

/// Phase of one window with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub kind: PhaseKind,
    /// Ticker of the dragon king; present exactly for `Superstar`.
    pub dragon_king: Option<String>,
    pub n_outlier_hubs: usize,
}

impl PhaseLabel {
    pub fn indeterminate() -> Self {
        Self {
            kind: PhaseKind::Indeterminate,
            dragon_king: None,
            n_outlier_hubs: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub from: PhaseKind,
    pub to: PhaseKind,
    /// First window of the new phase.
    pub window_start: NaiveDate,
}

/// Tunable thresholds of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseThresholds {
    /// Minimum ratio `k1 / k2` for a dragon king.
    pub r_gap: f64,
    /// Upper bound on the fitted law's expected number of vertices at `k1`.
    pub p_tail: f64,
    /// Standardised residual above which a tail vertex is an outlier hub.
    pub z_hub: f64,
    /// Outlier hubs needed for a decorated scale-free tree.
    pub h_min: usize,
    /// Largest `stderr / gamma` still accepted as a clean power law.
    pub rel_err_max: f64,
    /// Width of the centred majority filter applied before transitions.
    pub w_smooth: usize,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        Self {
            r_gap: 3.0,
            p_tail: 0.01,
            z_hub: 2.0,
            h_min: 2,
            rel_err_max: 0.25,
            w_smooth: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragonKing {
    pub degree: usize,
    /// `f(k_max)`, the fraction of vertices at the dragon king's degree.
    pub probability: f64,
    /// Vertices the fitted law expects at `k_max`; absent without a fit.
    pub expected_count: Option<f64>,
}

/// Flags the top-degree vertex when it dwarfs the runner-up (`k1 >= r_gap k2`)
/// and the fitted law expects fewer than `p_tail` vertices at its degree.
/// Without a fit there is no background law and only the gap is tested.
pub fn detect_dragon_king(
    dist: &DegreeDistribution,
    fit: Option<&PowerLawFit>,
    n: usize,
    thresholds: &PhaseThresholds,
) -> Option<DragonKing> {
    let top = dist.top(2);
    let (k1, k2) = match top[..] {
        [k1, k2] => (k1, k2),
        _ => return None,
    };
    if (k1 as f64) < thresholds.r_gap * k2 as f64 {
        return None;
    }
    let expected_count = fit.map(|f| n as f64 * f.predict(k1 as f64));
    if expected_count.is_some_and(|e| e.is_nan() || e >= thresholds.p_tail) {
        return None;
    }
    Some(DragonKing {
        degree: k1,
        probability: dist.frequency(k1),
        expected_count,
    })
}

/// Vertices above the fit range whose tail count sits above the fitted law.
///
/// For each occurring degree `k > fit_range.hi` the observed number of
/// vertices with degree at least `k` is compared with the law's expectation
/// `n c sum_{j=k}^{n-1} j^-gamma`; the log ratio is standardised by the fit's
/// residual spread. Cumulative counts keep single tail vertices, which can
/// never fall below `f = 1/n`, from reading as outliers on their own.
pub fn count_outlier_hubs(
    dist: &DegreeDistribution,
    fit: &PowerLawFit,
    thresholds: &PhaseThresholds,
) -> usize {
    let n = dist.n_vertices;
    let spread = fit.residual_sd.max(f64::MIN_POSITIVE);
    let mut hubs = 0;
    let mut at_least = 0;
    for (k, count, _) in dist.iter().collect::<Vec<_>>().into_iter().rev() {
        at_least += count;
        if k <= fit.fit_range.hi {
            break;
        }
        let expected: f64 = (k..n.max(k + 1))
            .map(|j| n as f64 * fit.predict(j as f64))
            .sum();
        let z = (at_least as f64 / expected).ln() / spread;
        if z > thresholds.z_hub {
            hubs += count;
        }
    }
    hubs
}

/// Labels a window from its degree distribution and fit.
pub fn classify(metrics: &WindowMetrics, thresholds: &PhaseThresholds) -> PhaseLabel {
    let dist = &metrics.degree_distribution;
    let fit = metrics.fit.as_ref();
    let n_outlier_hubs = fit.map_or(0, |f| count_outlier_hubs(dist, f, thresholds));
    if detect_dragon_king(dist, fit, metrics.n_vertices, thresholds).is_some() {
        return PhaseLabel {
            kind: PhaseKind::Superstar,
            dragon_king: Some(metrics.central_vertex.clone()),
            n_outlier_hubs,
        };
    }
    let kind = if n_outlier_hubs >= thresholds.h_min {
        PhaseKind::DecoratedScaleFree
    } else if fit.is_some_and(|f| f.gamma > 0.0 && f.stderr / f.gamma <= thresholds.rel_err_max) {
        PhaseKind::ScaleFree
    } else {
        PhaseKind::Indeterminate
    };
    PhaseLabel {
        kind,
        dragon_king: None,
        n_outlier_hubs,
    }
}

/// Centred majority filter of width `w`. A label keeps its value unless
/// another kind holds a strict majority of its neighbourhood.
pub fn smooth(kinds: &[PhaseKind], w: usize) -> Vec<PhaseKind> {
    let half = w / 2;
    (0..kinds.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(kinds.len());
            let span = &kinds[lo..hi];
            let mut best = kinds[i];
            let mut best_count = span.iter().filter(|&&k| k == best).count();
            for &k in span {
                let c = span.iter().filter(|&&x| x == k).count();
                if c > best_count {
                    best = k;
                    best_count = c;
                }
            }
            best
        })
        .collect()
}

/// One event per change of smoothed phase between consecutive entries.
pub fn transition_events(starts: &[NaiveDate], kinds: &[PhaseKind], w: usize) -> Vec<TransitionEvent> {
    let smoothed = smooth(kinds, w);
    smoothed
        .windows(2)
        .zip(&starts[1..])
        .filter(|(pair, _)| pair[0] != pair[1])
        .map(|(pair, &window_start)| TransitionEvent {
            from: pair[0],
            to: pair[1],
            window_start,
        })
        .collect()
}

/// Transition events of a scanned series, skipping windows without metrics.
pub fn transitions(series: &crate::scan::ScanSeries) -> Vec<TransitionEvent> {
    let (starts, kinds): (Vec<NaiveDate>, Vec<PhaseKind>) = series
        .computed()
        .map(|m| (m.window_start, m.phase.kind))
        .unzip();
    transition_events(&starts, &kinds, series.config.thresholds.w_smooth)
}
