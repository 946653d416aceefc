use std::io::Write as _;
use std::path::Path;

use mstphase::export::{write_edge_list, write_graphml, write_series_csv, write_series_json};
use mstphase::report::{render_report, render_transitions, summarize_phases, PhaseSummary};
use mstphase::scan::analyse_window;
use mstphase::synth::{MarketSection, Scenario};
use mstphase::{
    load_price_panel, run_scan, FitRange, PhaseThresholds, PricePanel, ScanConfig, ScanSeries,
    SuperhubInjection,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::args::{required, with_config, ClassifyArgs, ReportArgs, ScanArgs, SynthArgs, TreeArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{read_input, FileDigest, OutputDir};

fn load_panel(path: &Path) -> CliResult<(PricePanel, FileDigest)> {
    let (bytes, digest) = read_input(path)?;
    let panel = load_price_panel(bytes.as_slice()).map_err(|e| CliError::data(path, e))?;
    Ok((panel, digest))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<(T, FileDigest)> {
    let (bytes, digest) = read_input(path)?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::data(path, e))?;
    Ok((value, digest))
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> mstphase::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(buf)
}

fn pretty_json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn fit_range(base: FitRange, lo: Option<usize>, hi: Option<usize>) -> CliResult<FitRange> {
    Ok(FitRange::new(lo.unwrap_or(base.lo), hi.unwrap_or(base.hi))?)
}

struct ThresholdFlags {
    r_gap: Option<f64>,
    p_tail: Option<f64>,
    z_hub: Option<f64>,
    h_min: Option<usize>,
    rel_err_max: Option<f64>,
    w_smooth: Option<usize>,
}

impl ThresholdFlags {
    fn apply(&self, base: PhaseThresholds) -> CliResult<PhaseThresholds> {
        let t = PhaseThresholds {
            r_gap: self.r_gap.unwrap_or(base.r_gap),
            p_tail: self.p_tail.unwrap_or(base.p_tail),
            z_hub: self.z_hub.unwrap_or(base.z_hub),
            h_min: self.h_min.unwrap_or(base.h_min),
            rel_err_max: self.rel_err_max.unwrap_or(base.rel_err_max),
            w_smooth: self.w_smooth.unwrap_or(base.w_smooth),
        };
        if !(t.r_gap >= 1.0 && t.p_tail > 0.0 && t.z_hub.is_finite() && t.rel_err_max > 0.0) {
            return Err(CliError::Usage(format!("invalid phase thresholds {t:?}")));
        }
        if t.w_smooth == 0 || t.w_smooth.is_multiple_of(2) {
            return Err(CliError::Usage(format!(
                "w_smooth must be a positive odd count, got {}",
                t.w_smooth
            )));
        }
        Ok(t)
    }
}

pub fn scan(flags: &ScanArgs) -> CliResult<()> {
    let mut flags = flags.clone();
    if flags.no_detrend {
        flags.detrend = Some(false);
    }
    let a = with_config(&flags, flags.config.as_deref())?;
    let input = required(a.input.clone(), "input")?;
    let out = required(a.out.clone(), "out")?;
    let defaults = ScanConfig::default();
    let config = ScanConfig {
        window: a.window.unwrap_or(defaults.window),
        step: a.step.unwrap_or(defaults.step),
        gap_limit: a.gap_limit.unwrap_or(defaults.gap_limit),
        fit_range: fit_range(defaults.fit_range, a.fit_lo, a.fit_hi)?,
        detrend: a.detrend.unwrap_or(defaults.detrend),
        static_center: a.static_center.clone(),
        exclude: a.exclude.clone().unwrap_or_default(),
        thresholds: ThresholdFlags {
            r_gap: a.r_gap,
            p_tail: a.p_tail,
            z_hub: a.z_hub,
            h_min: a.h_min,
            rel_err_max: a.rel_err_max,
            w_smooth: a.w_smooth,
        }
        .apply(defaults.thresholds)?,
        coincidence_tol: a.coincidence_tol.unwrap_or(defaults.coincidence_tol),
    };
    config.validate()?;

    let (panel, digest) = load_panel(&input)?;
    if let Some(c) = &config.static_center {
        if panel.ticker_index(c).is_none() {
            return Err(CliError::Data(format!("static center {c} is not in {}", input.display())));
        }
    }
    let series = run_scan(&panel, &config).map_err(|e| CliError::data(&input, e))?;

    let mut dir = OutputDir::create(&out)?;
    dir.write("series.csv", &to_bytes(|b| write_series_csv(&series, b))?)?;
    dir.write("series.json", &to_bytes(|b| write_series_json(&series, b))?)?;
    if a.dump_trees.unwrap_or(false) {
        for w in config.windows(panel.n_dates()) {
            // windows that were skipped in the scan have no tree
            if let Ok(analysis) = analyse_window(&panel, w, &config) {
                let name = format!("trees/{}.csv", panel.dates()[w.start]);
                dir.write(&name, &to_bytes(|b| write_edge_list(&analysis.tree, b))?)?;
            }
        }
    }
    let computed = series.computed().count();
    println!(
        "{} windows, {} computed, {} skipped -> {}",
        series.windows.len(),
        computed,
        series.windows.len() - computed,
        out.display()
    );
    dir.finish("scan", &config, vec![digest])
}

pub fn tree(flags: &TreeArgs) -> CliResult<()> {
    let mut flags = flags.clone();
    if flags.no_detrend {
        flags.detrend = Some(false);
    }
    let a = with_config(&flags, flags.config.as_deref())?;
    let input = required(a.input.clone(), "input")?;
    let out = required(a.out.clone(), "out")?;
    let start = required(a.start, "start")?;
    let length = required(a.length, "length")?;
    let defaults = ScanConfig::default();
    let config = ScanConfig {
        window: length,
        step: 1,
        gap_limit: a.gap_limit.unwrap_or(defaults.gap_limit),
        fit_range: fit_range(defaults.fit_range, a.fit_lo, a.fit_hi)?,
        detrend: a.detrend.unwrap_or(defaults.detrend),
        static_center: a.static_center.clone(),
        exclude: a.exclude.clone().unwrap_or_default(),
        ..defaults
    };

    let (panel, digest) = load_panel(&input)?;
    let window = panel.window(start, length).map_err(|e| CliError::data(&input, e))?;
    let analysis = analyse_window(&panel, window, &config).map_err(|e| CliError::data(&input, e))?;
    let m = &analysis.metrics;

    let mut dir = OutputDir::create(&out)?;
    dir.write("tree.csv", &to_bytes(|b| write_edge_list(&analysis.tree, b))?)?;
    dir.write("tree.graphml", &to_bytes(|b| write_graphml(&analysis.tree, b))?)?;
    dir.write("metrics.json", &pretty_json(m)?)?;

    let mut stdout = std::io::stdout().lock();
    let gamma = m
        .fit
        .map(|f| format!("{:.4} +/- {:.4}", f.gamma, f.stderr))
        .unwrap_or_else(|| "n/a".into());
    writeln!(
        stdout,
        "{} .. {}: {} vertices, center {} (k = {}), mol {:.6}, gamma {}, phase {}",
        m.window_start, m.window_end, m.n_vertices, m.central_vertex, m.k1, m.mol_dynamic, gamma, m.phase.kind
    )
    .map_err(|e| CliError::Internal(e.to_string()))?;
    dir.finish("tree", &config, vec![digest])
}

pub fn classify(flags: &ClassifyArgs) -> CliResult<()> {
    let a = with_config(flags, flags.config.as_deref())?;
    let series_path = required(a.series.clone(), "series")?;
    let out = required(a.out.clone(), "out")?;
    let (mut series, digest): (ScanSeries, _) = load_json(&series_path)?;
    let thresholds = ThresholdFlags {
        r_gap: a.r_gap,
        p_tail: a.p_tail,
        z_hub: a.z_hub,
        h_min: a.h_min,
        rel_err_max: a.rel_err_max,
        w_smooth: a.w_smooth,
    }
    .apply(series.config.thresholds)?;
    series.reclassify(thresholds);
    let phases = summarize_phases(&series);
    let listing = render_transitions(&phases);

    let mut dir = OutputDir::create(&out)?;
    dir.write("phases.json", &pretty_json(&phases)?)?;
    dir.write("transitions.txt", listing.as_bytes())?;
    print!("{listing}");
    dir.finish("classify", thresholds, vec![digest])
}

pub fn report(flags: &ReportArgs) -> CliResult<()> {
    let a = with_config(flags, flags.config.as_deref())?;
    let series_path = required(a.series.clone(), "series")?;
    let phases_path = required(a.phases.clone(), "phases")?;
    let out = required(a.out.clone(), "out")?;
    let (series, series_digest): (ScanSeries, _) = load_json(&series_path)?;
    let (phases, phases_digest): (PhaseSummary, _) = load_json(&phases_path)?;
    let text = render_report(&series, &phases);

    let mut dir = OutputDir::create(&out)?;
    dir.write("report.txt", text.as_bytes())?;
    print!("{text}");
    dir.finish("report", serde_json::json!({}), vec![series_digest, phases_digest])
}

pub fn synth(flags: &SynthArgs) -> CliResult<()> {
    let a = with_config(flags, flags.config.as_deref())?;
    let out = required(a.out.clone(), "out")?;
    let mut inputs = Vec::new();
    let mut scenario = match &a.scenario {
        Some(path) => {
            let (bytes, digest) = read_input(path)?;
            inputs.push(digest);
            let text = String::from_utf8(bytes).map_err(|e| CliError::data(path, e))?;
            toml::from_str::<Scenario>(&text).map_err(|e| CliError::data(path, e))?
        }
        None => Scenario {
            market: MarketSection {
                n_assets: required(a.n_assets, "n-assets")?,
                n_days: required(a.n_days, "n-days")?,
                sigma_idio: required(a.sigma_idio, "sigma-idio")?,
                sigma_market: required(a.sigma_market, "sigma-market")?,
                seed: a.seed.unwrap_or(0),
                betas: None,
                beta_range: (0.5, 1.5),
            },
            injections: Vec::new(),
        },
    };
    let m = &mut scenario.market;
    m.n_assets = a.n_assets.unwrap_or(m.n_assets);
    m.n_days = a.n_days.unwrap_or(m.n_days);
    m.sigma_idio = a.sigma_idio.unwrap_or(m.sigma_idio);
    m.sigma_market = a.sigma_market.unwrap_or(m.sigma_market);
    m.seed = a.seed.unwrap_or(m.seed);
    m.beta_range = (a.beta_lo.unwrap_or(m.beta_range.0), a.beta_hi.unwrap_or(m.beta_range.1));

    let inject = [
        a.inject_target.is_some(),
        a.inject_start.is_some(),
        a.inject_end.is_some(),
        a.inject_rho.is_some(),
        a.inject_breadth.is_some(),
    ];
    if inject.iter().any(|&x| x) {
        if !inject.iter().all(|&x| x) {
            return Err(CliError::Usage(
                "an injection needs all of --inject-target, --inject-start, --inject-end, --inject-rho and --inject-breadth".into(),
            ));
        }
        scenario.injections.push(SuperhubInjection {
            target: a.inject_target.unwrap(),
            start_day: a.inject_start.unwrap(),
            end_day: a.inject_end.unwrap(),
            rho: a.inject_rho.unwrap(),
            breadth: a.inject_breadth.unwrap(),
        });
    }

    let panel = scenario.build()?;
    let mut dir = OutputDir::create(&out)?;
    dir.write("prices.csv", &to_bytes(|b| panel.write_csv(b))?)?;
    println!(
        "{} assets x {} days, {} injection(s) -> {}",
        panel.n_tickers(),
        panel.n_dates(),
        scenario.injections.len(),
        out.join("prices.csv").display()
    );
    dir.finish("synth", &scenario, inputs)
}
