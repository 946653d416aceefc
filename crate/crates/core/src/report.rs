//! Phase summaries and the human-readable run report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::phase::{smooth, PhaseKind, PhaseLabel, PhaseThresholds, TransitionEvent};
use crate::scan::{absolute_minimum, ScanSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPhase {
    pub window_start: NaiveDate,
    pub label: PhaseLabel,
    pub smoothed: PhaseKind,
}

/// Contents of `phases.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub thresholds: PhaseThresholds,
    pub windows: Vec<WindowPhase>,
    pub events: Vec<TransitionEvent>,
}

/// Consecutive windows sharing one smoothed phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: PhaseKind,
    pub first_window_start: NaiveDate,
    pub last_window_start: NaiveDate,
    pub n_windows: usize,
    /// Mean fitted exponent over windows with a fit.
    pub mean_gamma: Option<f64>,
    /// Mean standard error of those fits.
    pub mean_stderr: Option<f64>,
    /// Most frequent dragon king among the regime's windows.
    pub dragon_king: Option<String>,
}

pub fn summarize_phases(series: &ScanSeries) -> PhaseSummary {
    let labels: Vec<(NaiveDate, PhaseLabel)> = series
        .computed()
        .map(|m| (m.window_start, m.phase.clone()))
        .collect();
    let kinds: Vec<PhaseKind> = labels.iter().map(|(_, l)| l.kind).collect();
    let smoothed = smooth(&kinds, series.config.thresholds.w_smooth);
    PhaseSummary {
        thresholds: series.config.thresholds,
        windows: labels
            .into_iter()
            .zip(smoothed)
            .map(|((window_start, label), smoothed)| WindowPhase {
                window_start,
                label,
                smoothed,
            })
            .collect(),
        events: crate::phase::transitions(series),
    }
}

pub fn regimes(series: &ScanSeries, phases: &PhaseSummary) -> Vec<Regime> {
    let by_start: BTreeMap<NaiveDate, &crate::metrics::WindowMetrics> =
        series.computed().map(|m| (m.window_start, m)).collect();
    let mut out: Vec<Regime> = Vec::new();
    let mut members: Vec<Vec<NaiveDate>> = Vec::new();
    for w in &phases.windows {
        match out.last_mut() {
            Some(r) if r.kind == w.smoothed => {
                r.last_window_start = w.window_start;
                r.n_windows += 1;
                members.last_mut().unwrap().push(w.window_start);
            }
            _ => {
                out.push(Regime {
                    kind: w.smoothed,
                    first_window_start: w.window_start,
                    last_window_start: w.window_start,
                    n_windows: 1,
                    mean_gamma: None,
                    mean_stderr: None,
                    dragon_king: None,
                });
                members.push(vec![w.window_start]);
            }
        }
    }
    for (r, dates) in out.iter_mut().zip(&members) {
        let fits: Vec<_> = dates
            .iter()
            .filter_map(|d| by_start.get(d).and_then(|m| m.fit))
            .collect();
        if !fits.is_empty() {
            let n = fits.len() as f64;
            r.mean_gamma = Some(fits.iter().map(|f| f.gamma).sum::<f64>() / n);
            r.mean_stderr = Some(fits.iter().map(|f| f.stderr).sum::<f64>() / n);
        }
        let mut kings: BTreeMap<&str, usize> = BTreeMap::new();
        for d in dates {
            if let Some(k) = by_start.get(d).and_then(|m| m.phase.dragon_king.as_deref()) {
                *kings.entry(k).or_default() += 1;
            }
        }
        // ties resolve to the lexicographically first ticker
        r.dragon_king = kings
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(k, _)| k.to_string());
    }
    out
}

/// Regimes in the Superstar phase.
pub fn dragon_king_episodes(series: &ScanSeries, phases: &PhaseSummary) -> Vec<Regime> {
    regimes(series, phases)
        .into_iter()
        .filter(|r| r.kind == PhaseKind::Superstar)
        .collect()
}

/// Short listing of labels and events written next to `phases.json`.
pub fn render_transitions(phases: &PhaseSummary) -> String {
    let mut s = String::new();
    writeln!(s, "windows classified: {}", phases.windows.len()).unwrap();
    let mut counts: BTreeMap<PhaseKind, usize> = BTreeMap::new();
    for w in &phases.windows {
        *counts.entry(w.smoothed).or_default() += 1;
    }
    for (k, c) in counts {
        writeln!(s, "  {k}: {c}").unwrap();
    }
    write_events(&mut s, &phases.events);
    s
}

fn write_events(s: &mut String, events: &[TransitionEvent]) {
    if events.is_empty() {
        writeln!(s, "no transitions").unwrap();
        return;
    }
    writeln!(s, "transitions: {}", events.len()).unwrap();
    for e in events {
        writeln!(s, "  {}  {} -> {}", e.window_start, e.from, e.to).unwrap();
    }
}

/// The full text report: regimes with fitted exponents, transitions,
/// absolute minima and dragon-king episodes.
pub fn render_report(series: &ScanSeries, phases: &PhaseSummary) -> String {
    let mut s = String::new();
    let cfg = &series.config;
    let computed = series.computed().count();
    writeln!(s, "MST phase report").unwrap();
    writeln!(
        s,
        "window {} td, step {} td, detrend {}, windows {} ({} skipped)",
        cfg.window,
        cfg.step,
        if cfg.detrend { "on" } else { "off" },
        series.windows.len(),
        series.windows.len() - computed
    )
    .unwrap();
    if let Some(c) = &cfg.static_center {
        writeln!(s, "static center {c}").unwrap();
    }
    if !cfg.exclude.is_empty() {
        writeln!(s, "excluded {}", cfg.exclude.join(",")).unwrap();
    }

    writeln!(s, "\nregimes").unwrap();
    for r in regimes(series, phases) {
        let gamma = match (r.mean_gamma, r.mean_stderr) {
            (Some(g), Some(e)) => format!("gamma {g:.4} +/- {e:.4}"),
            _ => "gamma n/a".to_string(),
        };
        writeln!(
            s,
            "  {} .. {}  {:<18} {:>4} windows  {}",
            r.first_window_start,
            r.last_window_start,
            r.kind.to_string(),
            r.n_windows,
            gamma
        )
        .unwrap();
    }

    writeln!(s).unwrap();
    write_events(&mut s, &phases.events);

    writeln!(s, "\nabsolute minima").unwrap();
    for metric in ["mol_dynamic", "mol_static", "s_deg", "s_eff", "mean_tree_length"] {
        if let Ok((date, v)) = absolute_minimum(series, metric) {
            writeln!(s, "  {metric:<17} {v:.6} at {date}").unwrap();
        }
    }

    let episodes = dragon_king_episodes(series, phases);
    writeln!(s, "\ndragon-king episodes: {}", episodes.len()).unwrap();
    for e in episodes {
        writeln!(
            s,
            "  {} .. {}  {} ({} windows)",
            e.first_window_start,
            e.last_window_start,
            e.dragon_king.as_deref().unwrap_or("?"),
            e.n_windows
        )
        .unwrap();
    }
    s
}
