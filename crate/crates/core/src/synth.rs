//! Synthetic markets and benchmark trees.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a seed
//! reproduces the same output on every platform.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PricePanel;
use crate::mst::{Edge, Tree};

/// One-factor market: `r_i(t) = beta_i m(t) + eps_i(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorMarketSpec {
    pub n_assets: usize,
    pub n_days: usize,
    pub betas: Vec<f64>,
    /// Idiosyncratic volatility per day.
    pub sigma_idio: f64,
    /// Market volatility per day.
    pub sigma_market: f64,
    pub seed: u64,
}

impl FactorMarketSpec {
    /// Spec with betas drawn uniformly from `[lo, hi)` on stream 1 of the
    /// seed's generator (stream 0 drives the returns).
    pub fn with_uniform_betas(
        n_assets: usize,
        n_days: usize,
        (lo, hi): (f64, f64),
        sigma_idio: f64,
        sigma_market: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let betas = (0..n_assets)
            .map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo })
            .collect();
        Self {
            n_assets,
            n_days,
            betas,
            sigma_idio,
            sigma_market,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_assets < 3 {
            return Err(Error::InvalidSpec(format!(
                "n_assets = {} but at least 3 are required",
                self.n_assets
            )));
        }
        if self.n_days < 2 {
            return Err(Error::InvalidSpec("n_days must be at least 2".into()));
        }
        if self.betas.len() != self.n_assets {
            return Err(Error::InvalidSpec(format!(
                "{} betas for {} assets",
                self.betas.len(),
                self.n_assets
            )));
        }
        if self.betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSpec("betas must be finite".into()));
        }
        if !(self.sigma_idio > 0.0 && self.sigma_market > 0.0)
            || !(self.sigma_idio.is_finite() && self.sigma_market.is_finite())
        {
            return Err(Error::InvalidSpec("volatilities must be positive".into()));
        }
        Ok(())
    }
}

/// Coupling of `breadth` assets to a target over an inclusive day range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperhubInjection {
    /// Asset index of the hub.
    pub target: usize,
    pub start_day: usize,
    pub end_day: usize,
    pub rho: f64,
    /// Number of assets blended toward the target: the first `breadth`
    /// indices other than the target.
    pub breadth: usize,
}

/// Ticker of asset `i` in a synthetic market of `n` assets, zero-padded so
/// lexicographic order equals index order.
pub fn ticker_name(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(3);
    format!("S{i:0width$}")
}

/// Consecutive weekdays starting Monday 2000-01-03.
pub fn trading_days(n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Daily returns of the factor model, `n_days × n_assets`, row-major.
pub fn factor_returns(spec: &FactorMarketSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.n_days)
        .map(|_| {
            let m: f64 = spec.sigma_market * rng.sample::<f64, _>(StandardNormal);
            spec.betas
                .iter()
                .map(|b| b * m + spec.sigma_idio * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect())
}

/// Prices `P_i(t) = exp(sum_{s <= t} r_i(s))` of a one-factor market.
pub fn gen_factor_market(spec: &FactorMarketSpec) -> Result<PricePanel> {
    let returns = factor_returns(spec)?;
    let n = spec.n_assets;
    let mut log_price = vec![0.0; n];
    let mut prices = Vec::with_capacity(spec.n_days * n);
    for row in &returns {
        for (lp, r) in log_price.iter_mut().zip(row) {
            *lp += r;
            prices.push(Some(lp.exp()));
        }
    }
    PricePanel::new(
        trading_days(spec.n_days),
        (0..n).map(|i| ticker_name(i, n)).collect(),
        prices,
    )
}

/// Blends the returns of the coupled assets toward the target inside
/// `[start_day, end_day]`: `r_j <- sqrt(1 - rho^2) r_j + rho r_target`.
/// Returns outside the range are unchanged.
pub fn inject_superhub(panel: &PricePanel, inj: &SuperhubInjection) -> Result<PricePanel> {
    let n = panel.n_tickers();
    let days = panel.n_dates();
    if inj.target >= n {
        return Err(Error::InvalidSpec(format!("target {} out of range", inj.target)));
    }
    if !(1 <= inj.start_day && inj.start_day < inj.end_day && inj.end_day < days) {
        return Err(Error::InvalidSpec(format!(
            "injection days [{}, {}] must satisfy 1 <= start < end < {days}",
            inj.start_day, inj.end_day
        )));
    }
    if !(0.0..=1.0).contains(&inj.rho) {
        return Err(Error::InvalidSpec(format!("rho {} outside [0, 1]", inj.rho)));
    }
    if inj.breadth > n - 1 {
        return Err(Error::InvalidSpec(format!(
            "breadth {} exceeds the {} other assets",
            inj.breadth,
            n - 1
        )));
    }
    let coupled: Vec<usize> = (0..n).filter(|&j| j != inj.target).take(inj.breadth).collect();
    let complete = |t: usize| (inj.start_day - 1..days).all(|d| panel.price(d, t).is_some());
    if let Some(&bad) = std::iter::once(&inj.target).chain(&coupled).find(|&&t| !complete(t)) {
        return Err(Error::InvalidSpec(format!(
            "{} has missing prices from day {} on",
            panel.tickers()[bad],
            inj.start_day - 1
        )));
    }
    if inj.rho == 0.0 {
        return Ok(panel.clone());
    }

    let keep = (1.0 - inj.rho * inj.rho).sqrt();
    let ln = |d: usize, t: usize| panel.price(d, t).expect("checked above").ln();
    let mut prices: Vec<Option<f64>> = (0..days)
        .flat_map(|d| (0..n).map(move |t| (d, t)))
        .map(|(d, t)| panel.price(d, t))
        .collect();
    for &j in &coupled {
        let mut log_price = ln(inj.start_day - 1, j);
        for d in inj.start_day..days {
            let mut r = ln(d, j) - ln(d - 1, j);
            if d <= inj.end_day {
                r = keep * r + inj.rho * (ln(d, inj.target) - ln(d - 1, inj.target));
            }
            log_price += r;
            prices[d * n + j] = Some(log_price.exp());
        }
    }
    PricePanel::new(panel.dates().to_vec(), panel.tickers().to_vec(), prices)
}

/// Tree grown by linear preferential attachment: each new vertex links to
/// an existing vertex chosen with probability proportional to its degree.
/// Edges have unit weight.
pub fn gen_pa_tree(n: usize, seed: u64) -> Result<Tree> {
    if n < 2 {
        return Err(Error::InvalidSpec("a tree needs at least 2 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // each vertex appears once per incident edge
    let mut ends: Vec<usize> = vec![0, 1];
    let mut edges = vec![Edge { a: 0, b: 1, weight: 1.0 }];
    for v in 2..n {
        let u = ends[rng.gen_range(0..ends.len())];
        edges.push(Edge { a: u, b: v, weight: 1.0 });
        ends.extend([u, v]);
    }
    Tree::new(vertex_labels(n), edges)
}

fn vertex_labels(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(4);
    (0..n).map(|i| format!("v{i:0width$}")).collect()
}

/// A tree realising the given degree sequence (every degree at least 1,
/// summing to `2(n - 1)`), built by Prüfer decoding. Unit edge weights.
pub fn tree_with_degrees(degrees: &[usize]) -> Result<Tree> {
    let n = degrees.len();
    if n < 2 || degrees.contains(&0) || degrees.iter().sum::<usize>() != 2 * (n - 1) {
        return Err(Error::InvalidSpec(
            "degrees must be positive and sum to 2(n - 1)".into(),
        ));
    }
    let code: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, degrees[v] - 1))
        .collect();
    let mut remaining = degrees.to_vec();
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaves: std::collections::BTreeSet<usize> = (0..n).filter(|&v| remaining[v] == 1).collect();
    for &v in &code {
        let leaf = leaves.pop_first().expect("a leaf exists while the code is non-empty");
        edges.push(Edge { a: leaf, b: v, weight: 1.0 });
        remaining[leaf] -= 1;
        remaining[v] -= 1;
        if remaining[v] == 1 {
            leaves.insert(v);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    edges.push(Edge { a: last[0], b: last[1], weight: 1.0 });
    Tree::new(vertex_labels(n), edges)
}

/// Scenario file: a factor market plus any number of injections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub market: MarketSection,
    #[serde(default)]
    pub injections: Vec<SuperhubInjection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSection {
    pub n_assets: usize,
    pub n_days: usize,
    pub sigma_idio: f64,
    pub sigma_market: f64,
    pub seed: u64,
    /// Explicit per-asset loadings; takes precedence over `beta_range`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default = "default_beta_range")]
    pub beta_range: (f64, f64),
}

fn default_beta_range() -> (f64, f64) {
    (0.5, 1.5)
}

impl Scenario {
    pub fn spec(&self) -> FactorMarketSpec {
        let m = &self.market;
        match &m.betas {
            Some(betas) => FactorMarketSpec {
                n_assets: m.n_assets,
                n_days: m.n_days,
                betas: betas.clone(),
                sigma_idio: m.sigma_idio,
                sigma_market: m.sigma_market,
                seed: m.seed,
            },
            None => FactorMarketSpec::with_uniform_betas(
                m.n_assets,
                m.n_days,
                m.beta_range,
                m.sigma_idio,
                m.sigma_market,
                m.seed,
            ),
        }
    }

    pub fn build(&self) -> Result<PricePanel> {
        let mut panel = gen_factor_market(&self.spec())?;
        for inj in &self.injections {
            panel = inject_superhub(&panel, inj)?;
        }
        Ok(panel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::pearson_matrix;
    use crate::ingest::{log_returns, Window};
    use crate::mst::degrees;

    fn spec(n: usize, days: usize, betas: f64, idio: f64, seed: u64) -> FactorMarketSpec {
        FactorMarketSpec {
            n_assets: n,
            n_days: days,
            betas: vec![betas; n],
            sigma_idio: idio,
            sigma_market: 0.01,
            seed,
        }
    }

    fn corr(panel: &PricePanel, detrend: bool) -> crate::correlation::CorrelationMatrix {
        let w = Window::new(0, panel.n_dates());
        pearson_matrix(&log_returns(panel, panel.tickers(), w, detrend).unwrap()).unwrap()
    }

    #[test]
    fn common_factor_limit() {
        let p = gen_factor_market(&spec(4, 300, 1.0, 1e-9, 3)).unwrap();
        let c = corr(&p, false);
        assert!(c.get(0, 1) > 0.999_999);
        assert!(c.get(2, 3) > 0.999_999);
    }

    #[test]
    fn independence_limit() {
        let p = gen_factor_market(&spec(5, 2000, 0.0, 0.02, 4)).unwrap();
        let c = corr(&p, false);
        for i in 0..5 {
            for j in i + 1..5 {
                assert!(c.get(i, j).abs() < 0.1);
            }
        }
    }

    #[test]
    fn same_seed_same_panel() {
        let s = FactorMarketSpec::with_uniform_betas(6, 50, (0.5, 1.5), 0.02, 0.01, 11);
        assert_eq!(gen_factor_market(&s).unwrap(), gen_factor_market(&s).unwrap());
        let other = FactorMarketSpec { seed: 12, ..s.clone() };
        assert_ne!(gen_factor_market(&s).unwrap(), gen_factor_market(&other).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_factor_market(&spec(2, 10, 1.0, 0.01, 0)).is_err());
        assert!(gen_factor_market(&spec(3, 10, 1.0, 0.0, 0)).is_err());
        let mut s = spec(3, 10, 1.0, 0.01, 0);
        s.betas.pop();
        assert!(gen_factor_market(&s).is_err());
    }

    #[test]
    fn correlation_converges_to_factor_value() {
        let s = FactorMarketSpec {
            n_assets: 3,
            n_days: 10_000,
            betas: vec![0.8, 1.4, 0.3],
            sigma_idio: 0.015,
            sigma_market: 0.01,
            seed: 5,
        };
        let c = corr(&gen_factor_market(&s).unwrap(), false);
        let var = |b: f64| b * b * 1e-4 + 0.015f64.powi(2);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let (bi, bj) = (s.betas[i], s.betas[j]);
            let expected = bi * bj * 1e-4 / (var(bi) * var(bj)).sqrt();
            assert!((c.get(i, j) - expected).abs() < 0.05, "({i},{j})");
        }
    }

    #[test]
    fn zero_coupling_leaves_panel_alone() {
        let p = gen_factor_market(&spec(5, 40, 1.0, 0.02, 1)).unwrap();
        let inj = SuperhubInjection { target: 0, start_day: 10, end_day: 20, rho: 0.0, breadth: 4 };
        assert_eq!(inject_superhub(&p, &inj).unwrap(), p);
    }

    #[test]
    fn injection_only_touches_its_window() {
        let p = gen_factor_market(&spec(6, 60, 1.0, 0.02, 2)).unwrap();
        let inj = SuperhubInjection { target: 2, start_day: 20, end_day: 39, rho: 0.7, breadth: 3 };
        let q = inject_superhub(&p, &inj).unwrap();
        let r = |panel: &PricePanel, d: usize, t: usize| {
            panel.price(d, t).unwrap().ln() - panel.price(d - 1, t).unwrap().ln()
        };
        for t in 0..6 {
            for d in 1..60 {
                let coupled = [0, 1, 3].contains(&t) && (20..=39).contains(&d);
                if coupled {
                    let expect = (1.0 - 0.49f64).sqrt() * r(&p, d, t) + 0.7 * r(&p, d, 2);
                    assert!((r(&q, d, t) - expect).abs() < 1e-12);
                } else {
                    assert!((r(&q, d, t) - r(&p, d, t)).abs() < 1e-12);
                }
            }
        }
        assert_eq!(q.price(5, 0), p.price(5, 0));
    }

    #[test]
    fn injection_validation() {
        let p = gen_factor_market(&spec(5, 40, 1.0, 0.02, 1)).unwrap();
        let ok = SuperhubInjection { target: 0, start_day: 10, end_day: 20, rho: 0.5, breadth: 4 };
        assert!(inject_superhub(&p, &SuperhubInjection { end_day: 10, ..ok }).is_err());
        assert!(inject_superhub(&p, &SuperhubInjection { end_day: 40, ..ok }).is_err());
        assert!(inject_superhub(&p, &SuperhubInjection { breadth: 5, ..ok }).is_err());
        assert!(inject_superhub(&p, &SuperhubInjection { target: 5, ..ok }).is_err());
        assert!(inject_superhub(&p, &SuperhubInjection { rho: 1.5, ..ok }).is_err());
    }

    #[test]
    fn blending_preserves_unit_variance() {
        for rho in [0.0, 0.3, 0.6, 0.95] {
            let keep = (1.0f64 - rho * rho).sqrt();
            assert!((keep * keep + rho * rho - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn small_pa_trees() {
        let t = gen_pa_tree(2, 0).unwrap();
        assert_eq!(t.edges().len(), 1);
        for seed in 0..20 {
            let t = gen_pa_tree(3, seed).unwrap();
            let mut k = degrees(&t);
            k.sort();
            assert_eq!(k, vec![1, 1, 2]);
        }
        assert!(gen_pa_tree(1, 0).is_err());
    }

    #[test]
    fn pa_trees_are_trees() {
        for seed in 0..10 {
            let t = gen_pa_tree(200, seed).unwrap();
            assert_eq!(t.len(), 200);
            assert_eq!(degrees(&t).iter().sum::<usize>(), 2 * 199);
        }
        assert_eq!(gen_pa_tree(100, 9).unwrap(), gen_pa_tree(100, 9).unwrap());
    }

    #[test]
    fn prescribed_degrees() {
        let want = vec![3, 1, 2, 1, 1, 2, 2, 2];
        let t = tree_with_degrees(&want).unwrap();
        assert_eq!(degrees(&t), want);
        assert!(tree_with_degrees(&[2, 2, 2]).is_err());
    }

    #[test]
    fn scenario_from_toml_like_json() {
        let s: Scenario = serde_json::from_str(
            r#"{"market": {"n_assets": 5, "n_days": 30, "sigma_idio": 0.02, "sigma_market": 0.01, "seed": 1},
                "injections": [{"target": 0, "start_day": 5, "end_day": 15, "rho": 0.6, "breadth": 2}]}"#,
        )
        .unwrap();
        assert_eq!(s.market.beta_range, (0.5, 1.5));
        let p = s.build().unwrap();
        assert_eq!(p.n_tickers(), 5);
        assert_eq!(p.tickers()[0], "S000");
        assert_eq!(p.dates()[0], NaiveDate::from_ymd_opt(2000, 1, 3).unwrap());
        assert_eq!(p.dates()[5], NaiveDate::from_ymd_opt(2000, 1, 10).unwrap());
    }
}
