//! Price panels: loading, per-window survivor selection and detrended
//! log-returns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fmt::sig17;

/// Closing prices on a trading-day axis. `None` marks a missing quote.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// Row-major, `dates.len() × tickers.len()`.
    prices: Vec<Option<f64>>,
}

/// A contiguous run of trading days, by index into a panel's date axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub start: usize,
    pub length: usize,
}

impl Window {
    pub fn new(start: usize, length: usize) -> Self {
        Self { start, length }
    }

    pub fn end(&self) -> usize {
        self.start + self.length
    }

    fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }
}

impl PricePanel {
    /// Builds a panel from row-major prices, checking every invariant.
    pub fn new(
        dates: Vec<NaiveDate>,
        tickers: Vec<String>,
        prices: Vec<Option<f64>>,
    ) -> Result<Self> {
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPanel(
                "dates must be strictly increasing".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = tickers.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(Error::InvalidPanel(format!("duplicate ticker {dup}")));
        }
        if prices.len() != dates.len() * tickers.len() {
            return Err(Error::InvalidPanel(format!(
                "expected {} prices, got {}",
                dates.len() * tickers.len(),
                prices.len()
            )));
        }
        if let Some(bad) = prices.iter().flatten().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidPanel(format!(
                "price {bad} is not a positive finite number"
            )));
        }
        Ok(Self {
            dates,
            tickers,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    pub fn price(&self, day: usize, ticker: usize) -> Option<f64> {
        self.prices[day * self.tickers.len() + ticker]
    }

    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Column of prices for one ticker over the given window.
    pub fn column(&self, ticker: usize, window: Window) -> impl Iterator<Item = Option<f64>> + '_ {
        window.range().map(move |d| self.price(d, ticker))
    }

    /// Resolves a date-addressed window. `start` must be a trading day of
    /// the panel.
    pub fn window(&self, start: NaiveDate, length: usize) -> Result<Window> {
        let idx = self.date_index(start).ok_or(Error::UnknownDate(start))?;
        let window = Window::new(idx, length);
        self.check_window(window)?;
        Ok(window)
    }

    pub(crate) fn check_window(&self, window: Window) -> Result<()> {
        if window.length == 0 || window.end() > self.dates.len() {
            return Err(Error::WindowOutOfRange {
                start: window.start,
                length: window.length,
                n_dates: self.dates.len(),
            });
        }
        Ok(())
    }

    /// Writes the panel as `date,ticker,close` records, omitting missing
    /// quotes. Rows are ordered by date, then by ticker column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "ticker", "close"])?;
        for (d, date) in self.dates.iter().enumerate() {
            let date = date.format("%Y-%m-%d").to_string();
            for (t, ticker) in self.tickers.iter().enumerate() {
                if let Some(p) = self.price(d, t) {
                    w.write_record([date.as_str(), ticker.as_str(), sig17(p).as_str()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Detrended (or raw) log-returns for the survivors of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// One column per ticker, `dates.len()` long.
    columns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    /// Wraps precomputed return columns. Every column must have one entry
    /// per date and every entry must be finite.
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.len() != columns.len() {
            return Err(Error::InvalidPanel(format!(
                "{} tickers but {} return columns",
                tickers.len(),
                columns.len()
            )));
        }
        if columns
            .iter()
            .any(|c| c.len() != dates.len() || c.iter().any(|r| !r.is_finite()))
        {
            return Err(Error::InvalidPanel(
                "return columns must be complete and finite".into(),
            ));
        }
        Ok(Self {
            dates,
            tickers,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn get(&self, day: usize, asset: usize) -> f64 {
        self.columns[asset][day]
    }

    /// Drops one ticker, keeping the order of the rest.
    pub fn without(&self, ticker: &str) -> Self {
        let keep: Vec<usize> = (0..self.tickers.len())
            .filter(|&i| self.tickers[i] != ticker)
            .collect();
        Self {
            dates: self.dates.clone(),
            tickers: keep.iter().map(|&i| self.tickers[i].clone()).collect(),
            columns: keep.iter().map(|&i| self.columns[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct PriceRecord {
    date: String,
    ticker: String,
    close: String,
}

/// Reads `date,ticker,close` records into a panel holding the union of all
/// dates and tickers. Tickers keep first-appearance order; dates are sorted.
pub fn load_price_panel<R: Read>(source: R) -> Result<PricePanel> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    for required in ["date", "ticker", "close"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Malformed {
                line: 1,
                reason: format!("header is missing column `{required}`"),
            });
        }
    }

    let mut tickers: Vec<String> = Vec::new();
    let mut ticker_idx: HashMap<String, usize> = HashMap::new();
    let mut quotes: BTreeMap<NaiveDate, HashMap<usize, f64>> = BTreeMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: PriceRecord = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::Malformed {
                line,
                reason: e.to_string(),
            })?;
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|e| {
            Error::Malformed {
                line,
                reason: format!("bad date `{}`: {e}", row.date),
            }
        })?;
        if row.ticker.is_empty() {
            return Err(Error::Malformed {
                line,
                reason: "empty ticker".into(),
            });
        }
        let close: f64 = row.close.parse().map_err(|_| Error::Malformed {
            line,
            reason: format!("bad close `{}`", row.close),
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::Malformed {
                line,
                reason: format!("close {close} is not a positive price"),
            });
        }
        let t = *ticker_idx.entry(row.ticker.clone()).or_insert_with(|| {
            tickers.push(row.ticker.clone());
            tickers.len() - 1
        });
        if quotes.entry(date).or_default().insert(t, close).is_some() {
            return Err(Error::DuplicatePair {
                line,
                date,
                ticker: row.ticker,
            });
        }
    }

    if quotes.is_empty() {
        return Err(Error::NoRecords);
    }
    let n = tickers.len();
    let mut prices = vec![None; quotes.len() * n];
    for (d, day) in quotes.values().enumerate() {
        for (&t, &p) in day {
            prices[d * n + t] = Some(p);
        }
    }
    PricePanel::new(quotes.into_keys().collect(), tickers, prices)
}

/// Tickers with usable data inside `window`: first and last quotes present
/// and no run of missing quotes longer than `gap_limit` days.
pub fn window_survivors(panel: &PricePanel, window: Window, gap_limit: usize) -> Result<Vec<String>> {
    panel.check_window(window)?;
    Ok((0..panel.n_tickers())
        .filter(|&t| survives(panel, t, window, gap_limit))
        .map(|t| panel.tickers[t].clone())
        .collect())
}

fn survives(panel: &PricePanel, ticker: usize, window: Window, gap_limit: usize) -> bool {
    let first = panel.price(window.start, ticker);
    let last = panel.price(window.end() - 1, ticker);
    if first.is_none() || last.is_none() {
        return false;
    }
    let mut run = 0;
    for p in panel.column(ticker, window) {
        if p.is_none() {
            run += 1;
            if run > gap_limit {
                return false;
            }
        } else {
            run = 0;
        }
    }
    true
}

/// Log-returns of closing prices with the equal-weighted market mode
/// removed day by day.
pub fn log_returns_detrended(panel: &PricePanel, tickers: &[String], window: Window) -> Result<ReturnPanel> {
    log_returns(panel, tickers, window, true)
}

/// Log-returns `ln P(t) - ln P(t-1)` over the window for the given tickers.
/// Internal gaps are filled by carrying the last quote forward. With
/// `detrend`, the cross-sectional mean return of each day is subtracted from
/// every asset.
pub fn log_returns(
    panel: &PricePanel,
    tickers: &[String],
    window: Window,
    detrend: bool,
) -> Result<ReturnPanel> {
    panel.check_window(window)?;
    if window.length < 2 {
        return Err(Error::TooFewDays(window.length));
    }
    let mut columns = Vec::with_capacity(tickers.len());
    for name in tickers {
        let t = panel
            .ticker_index(name)
            .ok_or_else(|| Error::UnknownTicker(name.clone()))?;
        if panel.price(window.start, t).is_none() || panel.price(window.end() - 1, t).is_none() {
            return Err(Error::NotSurvivor(name.clone()));
        }
        let mut last = f64::NAN;
        let logs: Vec<f64> = panel
            .column(t, window)
            .map(|p| {
                if let Some(p) = p {
                    last = p.ln();
                }
                last
            })
            .collect();
        columns.push(logs.windows(2).map(|w| w[1] - w[0]).collect::<Vec<f64>>());
    }

    if detrend && !columns.is_empty() {
        for day in 0..window.length - 1 {
            // shifted mean: exact when every asset has the same return
            let pivot = columns[0][day];
            let shift: f64 = columns.iter().map(|c| c[day] - pivot).sum::<f64>();
            let market = pivot + shift / columns.len() as f64;
            for c in columns.iter_mut() {
                c[day] -= market;
            }
        }
    }

    let dates = panel.dates[window.start + 1..window.end()].to_vec();
    ReturnPanel::new(dates, tickers.to_vec(), columns)
}
