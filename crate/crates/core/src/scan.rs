//! Rolling-window scans over a price panel.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{pearson_matrix, to_distance};
use crate::error::{Error, Result};
use crate::ingest::{log_returns, window_survivors, PricePanel, ReturnPanel, Window};
use crate::metrics::{
    central_index, degree_distribution, degree_entropy, efficient_entropy, fit_power_law,
    mean_tree_length, mol_from, top3, FitRange, WindowMetrics, METRIC_NAMES,
};
use crate::mst::{degrees, prim_mst, Tree};
use crate::phase::{classify, PhaseLabel, PhaseThresholds};

/// Smallest window accepted by a scan, in trading days.
pub const MIN_WINDOW: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    /// Window width `T` in trading days.
    pub window: usize,
    /// Step `delta_t` between window starts, in trading days.
    pub step: usize,
    /// Longest run of missing quotes a survivor may have inside a window.
    pub gap_limit: usize,
    pub fit_range: FitRange,
    pub detrend: bool,
    /// Ticker used as a fixed center for `mol_static`.
    pub static_center: Option<String>,
    /// Tickers removed before correlations are computed.
    pub exclude: Vec<String>,
    pub thresholds: PhaseThresholds,
    /// Tolerance on `|mol_dynamic - mol_static|` for coincidence runs.
    pub coincidence_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            window: 400,
            step: 5,
            gap_limit: 5,
            fit_range: FitRange::default(),
            detrend: true,
            static_center: None,
            exclude: Vec::new(),
            thresholds: PhaseThresholds::default(),
            coincidence_tol: 0.05,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < MIN_WINDOW {
            return Err(Error::InvalidConfig(format!(
                "window {} is below the minimum of {MIN_WINDOW} trading days",
                self.window
            )));
        }
        if self.step == 0 || self.step > self.window {
            return Err(Error::InvalidConfig(format!(
                "step {} must lie in [1, {}]",
                self.step, self.window
            )));
        }
        FitRange::new(self.fit_range.lo, self.fit_range.hi)?;
        Ok(())
    }

    /// Window starts, every `step` days from the first date while a full
    /// window fits.
    pub fn windows(&self, n_dates: usize) -> Vec<Window> {
        if n_dates < self.window {
            return Vec::new();
        }
        (0..=n_dates - self.window)
            .step_by(self.step)
            .map(|s| Window::new(s, self.window))
            .collect()
    }
}

/// Outcome of one window of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ScanWindow {
    Computed(WindowMetrics),
    Skipped {
        window_start: NaiveDate,
        window_end: NaiveDate,
        n_survivors: usize,
        reason: String,
    },
}

impl ScanWindow {
    pub fn window_start(&self) -> NaiveDate {
        match self {
            ScanWindow::Computed(m) => m.window_start,
            ScanWindow::Skipped { window_start, .. } => *window_start,
        }
    }

    pub fn window_end(&self) -> NaiveDate {
        match self {
            ScanWindow::Computed(m) => m.window_end,
            ScanWindow::Skipped { window_end, .. } => *window_end,
        }
    }

    pub fn metrics(&self) -> Option<&WindowMetrics> {
        match self {
            ScanWindow::Computed(m) => Some(m),
            ScanWindow::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSeries {
    pub config: ScanConfig,
    pub windows: Vec<ScanWindow>,
    /// Vertices per window (survivors left after exclusion).
    pub survivor_counts: Vec<usize>,
}

impl ScanSeries {
    pub fn computed(&self) -> impl Iterator<Item = &WindowMetrics> {
        self.windows.iter().filter_map(ScanWindow::metrics)
    }

    pub fn computed_mut(&mut self) -> impl Iterator<Item = &mut WindowMetrics> {
        self.windows.iter_mut().filter_map(|w| match w {
            ScanWindow::Computed(m) => Some(m),
            ScanWindow::Skipped { .. } => None,
        })
    }

    /// Relabels every computed window with new thresholds.
    pub fn reclassify(&mut self, thresholds: PhaseThresholds) {
        self.config.thresholds = thresholds;
        for m in self.computed_mut() {
            m.phase = classify(m, &thresholds);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Everything computed for a single window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAnalysis {
    pub returns: ReturnPanel,
    pub tree: Tree,
    pub metrics: WindowMetrics,
}

pub fn run_scan(panel: &PricePanel, config: &ScanConfig) -> Result<ScanSeries> {
    run_scan_with(panel, config, Execution::Parallel)
}

/// Evaluates every window independently and merges results in window order.
pub fn run_scan_with(panel: &PricePanel, config: &ScanConfig, execution: Execution) -> Result<ScanSeries> {
    config.validate()?;
    if panel.n_dates() < config.window {
        return Err(Error::PanelTooShort {
            n_dates: panel.n_dates(),
            window: config.window,
        });
    }
    let windows = config.windows(panel.n_dates());
    let eval = |w: &Window| evaluate(panel, *w, config);
    let results: Vec<(ScanWindow, usize)> = match execution {
        Execution::Sequential => windows.iter().map(eval).collect(),
        Execution::Parallel => windows.par_iter().map(eval).collect(),
    };
    let (windows, survivor_counts) = results.into_iter().unzip();
    Ok(ScanSeries {
        config: config.clone(),
        windows,
        survivor_counts,
    })
}

fn evaluate(panel: &PricePanel, window: Window, config: &ScanConfig) -> (ScanWindow, usize) {
    match analyse_window(panel, window, config) {
        Ok(a) => {
            let n = a.metrics.n_vertices;
            (ScanWindow::Computed(a.metrics), n)
        }
        Err(err) => {
            let n = window_tickers(panel, window, config).map_or(0, |t| t.len());
            let skipped = ScanWindow::Skipped {
                window_start: panel.dates()[window.start],
                window_end: panel.dates()[window.end() - 1],
                n_survivors: n,
                reason: err.to_string(),
            };
            (skipped, n)
        }
    }
}

fn window_tickers(panel: &PricePanel, window: Window, config: &ScanConfig) -> Result<Vec<String>> {
    let mut tickers = window_survivors(panel, window, config.gap_limit)?;
    tickers.retain(|t| !config.exclude.contains(t));
    Ok(tickers)
}

/// Survivors → returns → correlations → distances → Prim tree → metrics for
/// one window. Tickers with constant prices are dropped before correlating.
pub fn analyse_window(panel: &PricePanel, window: Window, config: &ScanConfig) -> Result<WindowAnalysis> {
    let mut tickers = window_tickers(panel, window, config)?;
    let (returns, corr) = loop {
        if tickers.len() < 3 {
            return Err(Error::TooFewVertices {
                needed: 3,
                got: tickers.len(),
            });
        }
        let returns = log_returns(panel, &tickers, window, config.detrend)?;
        match pearson_matrix(&returns) {
            Ok(c) => break (returns, c),
            Err(Error::ZeroVariance(t)) => tickers.retain(|x| *x != t),
            Err(e) => return Err(e),
        }
    };
    let tree = prim_mst(&to_distance(&corr));
    let metrics = window_metrics(
        &tree,
        panel.dates()[window.start],
        panel.dates()[window.end() - 1],
        config,
    )?;
    Ok(WindowAnalysis {
        returns,
        tree,
        metrics,
    })
}

/// Full metric record of a tree with at least three vertices.
pub fn window_metrics(
    tree: &Tree,
    window_start: NaiveDate,
    window_end: NaiveDate,
    config: &ScanConfig,
) -> Result<WindowMetrics> {
    let k = degrees(tree);
    let [k1, k2, k3] = top3(&k)?;
    let dist = degree_distribution(&k);
    let fit = match fit_power_law(&dist, config.fit_range) {
        Ok(f) => Some(f),
        Err(Error::DegenerateFit { .. }) => None,
        Err(e) => return Err(e),
    };
    let center = central_index(tree);
    let mol_static = config
        .static_center
        .as_deref()
        .and_then(|c| tree.index_of(c))
        .map(|c| mol_from(tree, c));
    let mut metrics = WindowMetrics {
        window_start,
        window_end,
        n_vertices: tree.len(),
        s_deg: degree_entropy(&dist),
        s_eff: efficient_entropy(tree)?,
        mean_tree_length: mean_tree_length(tree)?,
        degree_distribution: dist,
        fit,
        mol_dynamic: mol_from(tree, center),
        mol_static,
        k1,
        k2,
        k3,
        central_vertex: tree.tickers()[center].clone(),
        phase: PhaseLabel::indeterminate(),
    };
    metrics.phase = classify(&metrics, &config.thresholds);
    Ok(metrics)
}

/// Earliest computed window attaining the smallest value of `metric`.
pub fn absolute_minimum(series: &ScanSeries, metric: &str) -> Result<(NaiveDate, f64)> {
    if !METRIC_NAMES.contains(&metric) {
        return Err(Error::UnknownMetric(metric.to_string()));
    }
    let mut best: Option<(NaiveDate, f64)> = None;
    for m in series.computed() {
        if let Some(v) = m.metric(metric)? {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((m.window_start, v));
            }
        }
    }
    best.ok_or(Error::NoValidWindows)
}

/// A maximal run of consecutive windows where both MOL variants agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceRun {
    pub first_window_start: NaiveDate,
    pub last_window_start: NaiveDate,
    pub last_window_end: NaiveDate,
    pub n_windows: usize,
}

/// Runs of consecutive windows with `|mol_dynamic - mol_static| <= tol`.
/// Skipped windows and windows without the static center break a run.
pub fn coincidence_interval(series: &ScanSeries, tol: f64) -> Result<Vec<CoincidenceRun>> {
    if series.config.static_center.is_none() {
        return Err(Error::MissingStaticCenter);
    }
    let mut runs = Vec::new();
    let mut current: Option<CoincidenceRun> = None;
    for w in &series.windows {
        let hit = w.metrics().is_some_and(|m| {
            m.mol_static
                .is_some_and(|s| (m.mol_dynamic - s).abs() <= tol)
        });
        if hit {
            match current.as_mut() {
                Some(run) => {
                    run.last_window_start = w.window_start();
                    run.last_window_end = w.window_end();
                    run.n_windows += 1;
                }
                None => {
                    current = Some(CoincidenceRun {
                        first_window_start: w.window_start(),
                        last_window_start: w.window_start(),
                        last_window_end: w.window_end(),
                        n_windows: 1,
                    })
                }
            }
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    runs.extend(current);
    Ok(runs)
}
