//! Pearson correlation matrices and the metric distance `sqrt(2(1 - C))`.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::sig17;
use crate::ingest::ReturnPanel;

/// Symmetric correlation matrix with unit diagonal, entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    tickers: Vec<String>,
    values: Vec<f64>,
}

/// Symmetric distance matrix with zero diagonal. Matrices produced by
/// [`to_distance`] have entries in `[0, 2]`; [`DistanceMatrix::new`] accepts
/// any non-negative finite distances so the tree builders can be used on
/// arbitrary metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    tickers: Vec<String>,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    /// Validates a row-major square matrix of correlations.
    pub fn new(tickers: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_square(&tickers, &values)?;
        let n = tickers.len();
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::InvalidMatrix(format!("C({i},{i}) must be 1")));
            }
            for j in 0..n {
                let c = values[i * n + j];
                if !(-1.0..=1.0).contains(&c) || c != values[j * n + i] {
                    return Err(Error::InvalidMatrix(format!(
                        "C({i},{j}) = {c} breaks symmetry or the [-1, 1] range"
                    )));
                }
            }
        }
        Ok(Self { tickers, values })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_square(&self.tickers, &self.values, out)
    }
}

impl DistanceMatrix {
    /// Validates a row-major square matrix of distances.
    pub fn new(tickers: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_square(&tickers, &values)?;
        let n = tickers.len();
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("d({i},{i}) must be 0")));
            }
            for j in 0..n {
                let d = values[i * n + j];
                if d < 0.0 || d != values[j * n + i] {
                    return Err(Error::InvalidMatrix(format!(
                        "d({i},{j}) = {d} is negative or breaks symmetry"
                    )));
                }
            }
        }
        Ok(Self { tickers, values })
    }

    /// Builds a matrix from a function of the upper triangle `i < j`.
    pub fn from_fn(tickers: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = tickers.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self::new(tickers, values)
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_square(&self.tickers, &self.values, out)
    }
}

fn check_square(tickers: &[String], values: &[f64]) -> Result<()> {
    if values.len() != tickers.len() * tickers.len() {
        return Err(Error::InvalidMatrix(format!(
            "{} labels need {} entries, got {}",
            tickers.len(),
            tickers.len() * tickers.len(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(())
}

fn write_square<W: Write>(tickers: &[String], values: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = tickers.len();
    w.write_record(std::iter::once("").chain(tickers.iter().map(String::as_str)))?;
    for (i, t) in tickers.iter().enumerate() {
        let row: Vec<String> = values[i * n..(i + 1) * n].iter().map(|&v| sig17(v)).collect();
        w.write_record(std::iter::once(t.clone()).chain(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Sample Pearson correlation of every pair of return columns.
///
/// Each entry is an independent dot product of centred columns, so the
/// result does not depend on how pairs are scheduled across threads.
pub fn pearson_matrix(returns: &ReturnPanel) -> Result<CorrelationMatrix> {
    let n = returns.n_assets();
    if returns.n_days() < 2 {
        return Err(Error::TooFewDays(returns.n_days()));
    }
    let centred: Vec<Vec<f64>> = returns
        .columns()
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centred
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    if let Some(i) = norms.iter().position(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::ZeroVariance(returns.tickers()[i].clone()));
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let dot: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
                    (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        values[i * n + i] = 1.0;
        for (k, &c) in row.iter().enumerate() {
            let j = i + 1 + k;
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(CorrelationMatrix {
        tickers: returns.tickers().to_vec(),
        values,
    })
}

/// Elementwise `d = sqrt(2 (1 - C))` with an exactly zero diagonal.
pub fn to_distance(c: &CorrelationMatrix) -> DistanceMatrix {
    let n = c.len();
    let mut values: Vec<f64> = c.values.iter().map(|&x| distance(x)).collect();
    for i in 0..n {
        values[i * n + i] = 0.0;
    }
    DistanceMatrix {
        tickers: c.tickers.clone(),
        values,
    }
}

/// Distance between two assets with correlation `c`.
pub fn distance(c: f64) -> f64 {
    (2.0 * (1.0 - c)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn returns(cols: Vec<Vec<f64>>) -> ReturnPanel {
        let days = cols[0].len();
        let dates = (0..days)
            .map(|d| NaiveDate::from_ymd_opt(2024, 1, 1).unwrap() + chrono::Days::new(d as u64))
            .collect();
        let tickers = (0..cols.len()).map(|i| format!("T{i}")).collect();
        ReturnPanel::new(dates, tickers, cols).unwrap()
    }

    /// Pearson coefficient straight from the definition with sample
    /// normalisation.
    fn oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
        let vx = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0);
        let vy = y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0);
        cov / (vx.sqrt() * vy.sqrt())
    }

    #[test]
    fn perfect_and_anti_correlation() {
        let x = vec![0.1, -0.2, 0.05, 0.3];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = pearson_matrix(&returns(vec![x.clone(), x, neg])).unwrap();
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(0, 2), -1.0);
        assert_eq!(c.get(2, 2), 1.0);
    }

    #[test]
    fn matches_definitional_oracle() {
        let cols = vec![
            vec![0.01, -0.02, 0.015, 0.03, -0.01],
            vec![0.02, -0.01, 0.0, 0.025, -0.03],
            vec![-0.005, 0.01, 0.02, -0.02, 0.004],
        ];
        let c = pearson_matrix(&returns(cols.clone())).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { oracle(&cols[i], &cols[j]) };
                assert!((c.get(i, j) - expected).abs() < 1e-14, "({i},{j})");
                assert_eq!(c.get(i, j), c.get(j, i));
            }
        }
    }

    #[test]
    fn constant_column_is_reported() {
        let err = pearson_matrix(&returns(vec![vec![0.1, 0.2, 0.3], vec![0.5; 3]])).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(t) if t == "T1"));
    }

    #[test]
    fn distance_endpoints() {
        assert_eq!(distance(1.0), 0.0);
        assert!((distance(0.0) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(distance(-1.0), 2.0);
        let c = CorrelationMatrix::new(
            vec!["A".into(), "B".into()],
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let d = to_distance(&c);
        assert_eq!(d.get(0, 0), 0.0);
        assert!((d.get(0, 1) - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn matrix_validation() {
        let t = vec!["A".to_string(), "B".to_string()];
        assert!(DistanceMatrix::new(t.clone(), vec![0.0, 1.0, 1.5, 0.0]).is_err());
        assert!(DistanceMatrix::new(t.clone(), vec![0.0, -0.5, -0.5, 0.0]).is_err());
        assert!(DistanceMatrix::new(t.clone(), vec![0.1, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(t.clone(), vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(CorrelationMatrix::new(t, vec![1.0, 0.2, 0.2, 0.9]).is_err());
    }

    #[test]
    fn square_dump() {
        let d = DistanceMatrix::from_fn(vec!["A".into(), "B".into()], |_, _| 0.5).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), ",A,B\nA,0,0.5\nB,0.5,0\n");
    }

    proptest! {
        #[test]
        fn distance_decreases_with_correlation(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            prop_assume!(a != b);
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            prop_assert!(distance(hi) < distance(lo));
        }

        #[test]
        fn affine_rescaling_is_invisible(
            cols in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 8), 3),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let base = returns(cols.clone());
            let Ok(c0) = pearson_matrix(&base) else { return Ok(()); };
            let mut moved = cols;
            moved[1].iter_mut().for_each(|x| *x = scale * *x + shift);
            let c1 = pearson_matrix(&returns(moved)).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((c0.get(i, j) - c1.get(i, j)).abs() < 1e-9);
                }
            }
        }
    }
}
