//! Return tables: CSV ingestion, price conversion, centering and the
//! bounds on `<R, w>` used by the convexity conditions.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{MvskError, Result};

/// An `n x m` table of relative returns, one row per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    values: Vec<f64>,
    n: usize,
    m: usize,
    labels: Vec<String>,
    centralized: bool,
}

/// Lower and upper bound of `<R, w>` over a feasible domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// The feasible set for the portfolio weights, without support restriction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Simplex,
    Cube { bound: f64 },
}

impl ReturnsMatrix {
    /// Build a raw (non-centralized) matrix from row-major values.
    pub fn new(values: Vec<f64>, n: usize, m: usize, labels: Vec<String>) -> Result<Self> {
        if n == 0 {
            return Err(MvskError::Dimension { expected: 1, found: 0 });
        }
        if values.len() != n * m {
            return Err(MvskError::Dimension {
                expected: n * m,
                found: values.len(),
            });
        }
        if labels.len() != n {
            return Err(MvskError::Dimension {
                expected: n,
                found: labels.len(),
            });
        }
        if m < 2 {
            return Err(MvskError::InsufficientSamples { found: m });
        }
        Ok(Self {
            values,
            n,
            m,
            labels,
            centralized: false,
        })
    }

    /// Convenience constructor from nested rows with generated labels.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(MvskError::Parse {
                line: i,
                column: None,
                message: format!("row {i} has {} entries, expected {m}", rows[i].len()),
            });
        }
        let labels = (0..n).map(|i| format!("asset{i}")).collect();
        Self::new(rows.concat(), n, m, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_centralized(&self) -> bool {
        self.centralized
    }

    /// Row-major values; row `i` is asset `i`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, p: usize) -> f64 {
        self.values[i * self.m + p]
    }

    /// Row means.
    pub fn means(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().sum::<f64>() / self.m as f64)
            .collect()
    }

    /// Subtract each row's mean.
    pub fn centralize(&self) -> ReturnsMatrix {
        let means = self.means();
        let values = self
            .values
            .chunks(self.m)
            .zip(&means)
            .flat_map(|(row, mu)| row.iter().map(move |x| x - mu))
            .collect();
        ReturnsMatrix {
            values,
            n: self.n,
            m: self.m,
            labels: self.labels.clone(),
            centralized: true,
        }
    }

    /// Convert a price table to simple relative returns `(P[t+1] - P[t]) / P[t]`.
    /// The result has one column fewer than the input.
    pub fn from_prices(prices: &ReturnsMatrix) -> Result<ReturnsMatrix> {
        let m = prices.m - 1;
        let mut values = Vec::with_capacity(prices.n * m);
        for i in 0..prices.n {
            let row = prices.row(i);
            for (t, pair) in row.windows(2).enumerate() {
                if pair[0] == 0.0 || !pair[0].is_finite() {
                    return Err(MvskError::Parse {
                        line: i + 1,
                        column: Some(t),
                        message: format!("price {} cannot be used as a divisor", pair[0]),
                    });
                }
                values.push((pair[1] - pair[0]) / pair[0]);
            }
        }
        ReturnsMatrix::new(values, prices.n, m, prices.labels.clone())
    }

    /// Write in the same layout [`load_returns`] reads.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let to_io = |e: csv::Error| MvskError::Io(e.into());
        wtr.write_record(&self.labels).map_err(to_io)?;
        for i in 0..self.n {
            wtr.write_record(self.row(i).iter().map(|x| format!("{x:.10}")))
                .map_err(to_io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Bounds on `<T[:, p], w>` over the given domain. Requires centered data.
    pub fn domain_bounds(&self, domain: DomainKind) -> Result<Bounds> {
        if !self.centralized {
            return Err(MvskError::Domain("domain bounds require centralized returns".into()));
        }
        Ok(match domain {
            DomainKind::Simplex => {
                let (lower, upper) = self
                    .values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                        (lo.min(x), hi.max(x))
                    });
                Bounds { lower, upper }
            }
            DomainKind::Cube { bound } => {
                let upper = bound
                    * (0..self.m)
                        .map(|p| (0..self.n).map(|i| self.get(i, p).abs()).sum::<f64>())
                        .fold(0.0, f64::max);
                Bounds { lower: -upper, upper }
            }
        })
    }
}

/// Read a returns table: a header row of asset labels followed by one row
/// per asset holding its return series.
pub fn load_returns<R: Read>(source: R) -> Result<ReturnsMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = rdr.records();
    let labels: Vec<String> = match records.next() {
        Some(rec) => rec.map_err(|e| csv_err(e, 0))?.iter().map(str::to_owned).collect(),
        None => {
            return Err(MvskError::Parse {
                line: 0,
                column: None,
                message: "empty input".into(),
            })
        }
    };

    let mut values = Vec::new();
    let mut m = None;
    let mut n = 0;
    for (idx, rec) in records.enumerate() {
        let line = idx + 1;
        let rec = rec.map_err(|e| csv_err(e, line))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let width = *m.get_or_insert(rec.len());
        if rec.len() != width {
            return Err(MvskError::Parse {
                line,
                column: None,
                message: format!("ragged row: {} fields, expected {width}", rec.len()),
            });
        }
        for (col, cell) in rec.iter().enumerate() {
            let x: f64 = cell.parse().map_err(|_| MvskError::Parse {
                line,
                column: Some(col),
                message: format!("non-numeric cell {cell:?}"),
            })?;
            values.push(x);
        }
        n += 1;
    }
    if n == 0 {
        return Err(MvskError::Parse {
            line: 1,
            column: None,
            message: "no data rows".into(),
        });
    }
    if labels.len() != n {
        return Err(MvskError::Parse {
            line: 0,
            column: None,
            message: format!("{} labels for {n} asset rows", labels.len()),
        });
    }
    let m = m.unwrap_or(0);
    if m < 2 {
        return Err(MvskError::InsufficientSamples { found: m });
    }
    ReturnsMatrix::new(values, n, m, labels)
}

fn csv_err(e: csv::Error, line: usize) -> MvskError {
    MvskError::Parse {
        line,
        column: None,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_small_table() {
        let csv = "A,B\n0.01,0.02,0.03\n0.0,-0.01,0.01\n";
        let t = load_returns(csv.as_bytes()).unwrap();
        assert_eq!((t.n(), t.m()), (2, 3));
        assert_eq!(t.row(1), &[0.0, -0.01, 0.01]);
        assert_eq!(t.labels(), &["A", "B"]);
        assert!(!t.is_centralized());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let csv = "A,B\n0.1,0.2\n0.1,0.2,0.3\n";
        match load_returns(csv.as_bytes()) {
            Err(MvskError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_is_located() {
        let csv = "A\n0.1,abc,0.3\n";
        match load_returns(csv.as_bytes()) {
            Err(MvskError::Parse { line, column, .. }) => {
                assert_eq!((line, column), (1, Some(1)))
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn single_sample_is_insufficient() {
        let csv = "A,B\n0.1\n0.2\n";
        assert!(matches!(
            load_returns(csv.as_bytes()),
            Err(MvskError::InsufficientSamples { found: 1 })
        ));
    }

    #[test]
    fn prices_to_returns() {
        let p = ReturnsMatrix::from_rows(&[vec![1.0, 1.1, 1.21, 1.331]]).unwrap();
        let r = ReturnsMatrix::from_prices(&p).unwrap();
        assert_eq!(r.m(), 3);
        for x in r.row(0) {
            assert!((x - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn bounds_examples() {
        let t = ReturnsMatrix::from_rows(&[vec![-1.0, 1.0], vec![2.0, -2.0]])
            .unwrap()
            .centralize();
        let s = t.domain_bounds(DomainKind::Simplex).unwrap();
        assert_eq!((s.lower, s.upper), (-2.0, 2.0));
        let c = t.domain_bounds(DomainKind::Cube { bound: 1.0 }).unwrap();
        assert_eq!((c.lower, c.upper), (-3.0, 3.0));

        let z = ReturnsMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap().centralize();
        for d in [DomainKind::Simplex, DomainKind::Cube { bound: 1.0 }] {
            let b = z.domain_bounds(d).unwrap();
            assert_eq!((b.lower, b.upper), (0.0, 0.0));
        }
    }

    #[test]
    fn bounds_need_centered_data() {
        let t = ReturnsMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(t.domain_bounds(DomainKind::Simplex).is_err());
    }

    #[test]
    fn centered_rows_sum_to_zero() {
        let t = ReturnsMatrix::from_rows(&[vec![1.0, 3.0, 8.0], vec![0.5, 0.25, -4.0]])
            .unwrap()
            .centralize();
        for i in 0..t.n() {
            assert!(t.row(i).iter().sum::<f64>().abs() < 1e-12);
        }
    }
}
