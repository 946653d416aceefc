//! Text exports: tree edge lists, GraphML and per-window metric rows.
//!
//! Every real number goes through [`sig17`], so identical inputs always give
//! byte-identical files.

use std::io::Write;

use crate::error::Result;
use crate::fmt::sig17;
use crate::metrics::WindowMetrics;
use crate::mst::{degrees, Tree};
use crate::scan::{ScanSeries, ScanWindow};

/// `ticker_i,ticker_j,weight` with a header row, one line per edge in
/// canonical order.
pub fn write_edge_list<W: Write>(tree: &Tree, mut out: W) -> Result<()> {
    writeln!(out, "ticker_i,ticker_j,weight")?;
    for e in tree.edges() {
        writeln!(
            out,
            "{},{},{}",
            csv_field(&tree.tickers()[e.a]),
            csv_field(&tree.tickers()[e.b]),
            sig17(e.weight)
        )?;
    }
    Ok(())
}

/// Undirected GraphML with a `label` and `degree` per node and a `weight`
/// per edge.
pub fn write_graphml<W: Write>(tree: &Tree, mut out: W) -> Result<()> {
    let k = degrees(tree);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(out, r#"  <key id="label" for="node" attr.name="label" attr.type="string"/>"#)?;
    writeln!(out, r#"  <key id="degree" for="node" attr.name="degree" attr.type="int"/>"#)?;
    writeln!(out, r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#)?;
    writeln!(out, r#"  <graph id="mst" edgedefault="undirected">"#)?;
    for (i, t) in tree.tickers().iter().enumerate() {
        writeln!(
            out,
            r#"    <node id="n{i}"><data key="label">{}</data><data key="degree">{}</data></node>"#,
            xml_escape(t),
            k[i]
        )?;
    }
    for (i, e) in tree.edges().iter().enumerate() {
        writeln!(
            out,
            r#"    <edge id="e{i}" source="n{}" target="n{}"><data key="weight">{}</data></edge>"#,
            e.a,
            e.b,
            sig17(e.weight)
        )?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Column names of [`write_series_csv`].
pub const SERIES_COLUMNS: &[&str] = &[
    "status",
    "window_start",
    "window_end",
    "n_vertices",
    "gamma",
    "gamma_stderr",
    "fit_lo",
    "fit_hi",
    "fit_points",
    "mol_dynamic",
    "mol_static",
    "s_deg",
    "s_eff",
    "mean_tree_length",
    "k1",
    "k2",
    "k3",
    "central_vertex",
    "phase",
    "dragon_king",
    "n_outlier_hubs",
    "degree_distribution",
    "reason",
];

/// One row of the series table for a computed window.
pub fn metrics_row(m: &WindowMetrics) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(sig17).unwrap_or_default();
    let fit = m.fit.as_ref();
    let dist = m
        .degree_distribution
        .iter()
        .map(|(k, c, _)| format!("{k}:{c}"))
        .collect::<Vec<_>>()
        .join(";");
    vec![
        "computed".into(),
        m.window_start.to_string(),
        m.window_end.to_string(),
        m.n_vertices.to_string(),
        opt(fit.map(|f| f.gamma)),
        opt(fit.map(|f| f.stderr)),
        fit.map(|f| f.fit_range.lo.to_string()).unwrap_or_default(),
        fit.map(|f| f.fit_range.hi.to_string()).unwrap_or_default(),
        fit.map(|f| f.n_points.to_string()).unwrap_or_default(),
        sig17(m.mol_dynamic),
        opt(m.mol_static),
        sig17(m.s_deg),
        sig17(m.s_eff),
        sig17(m.mean_tree_length),
        m.k1.to_string(),
        m.k2.to_string(),
        m.k3.to_string(),
        m.central_vertex.clone(),
        m.phase.kind.to_string(),
        m.phase.dragon_king.clone().unwrap_or_default(),
        m.phase.n_outlier_hubs.to_string(),
        dist,
        String::new(),
    ]
}

/// Series table: one row per window, skipped windows included.
pub fn write_series_csv<W: Write>(series: &ScanSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_COLUMNS)?;
    for win in &series.windows {
        match win {
            ScanWindow::Computed(m) => w.write_record(metrics_row(m))?,
            ScanWindow::Skipped {
                window_start,
                window_end,
                n_survivors,
                reason,
            } => {
                let mut row = vec![String::new(); SERIES_COLUMNS.len()];
                row[0] = "skipped".into();
                row[1] = window_start.to_string();
                row[2] = window_end.to_string();
                row[3] = n_survivors.to_string();
                row[SERIES_COLUMNS.len() - 1] = reason.clone();
                w.write_record(row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Series as pretty-printed JSON.
pub fn write_series_json<W: Write>(series: &ScanSeries, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, series)?;
    writeln!(out)?;
    Ok(())
}
