//! Price ingestion, price relatives and market-vector features.
//!
//! Prices come in as a CSV file: a header row, an ISO-8601 date in the first
//! column and one column per asset. Relatives are gross ratios
//! `p[t + 1] / p[t]`, stored row-major with one row per trading day.

use std::fs::File;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Validated table of strictly positive prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    asset_names: Vec<String>,
    /// Row-major, `dates.len() * asset_names.len()`.
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, asset_names: Vec<String>, prices: Vec<f64>) -> Result<Self> {
        let m = asset_names.len();
        if m == 0 {
            return Err(Error::Empty("price series has no assets"));
        }
        if prices.len() != dates.len() * m {
            return Err(Error::DimensionMismatch {
                expected: dates.len() * m,
                found: prices.len(),
            });
        }
        for (row, pair) in dates.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::UnsortedDates {
                    row: row + 2,
                    date: pair[1].to_string(),
                });
            }
        }
        for (i, &p) in prices.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::NonPositivePrice {
                    row: i / m + 1,
                    column: asset_names[i % m].clone(),
                    value: p,
                });
            }
        }
        Ok(Self {
            dates,
            asset_names,
            prices,
        })
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_names.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let m = self.n_assets();
        &self.prices[t * m..(t + 1) * m]
    }

    pub fn price(&self, t: usize, j: usize) -> f64 {
        self.prices[t * self.n_assets() + j]
    }
}

/// Reads a price CSV from disk. Lines starting with `#` are ignored.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_prices(file)
}

pub fn read_prices<R: Read>(reader: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    if header.len() < 3 {
        return Err(Error::BadHeader);
    }
    let asset_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let m = asset_names.len();

    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != m + 1 {
            return Err(Error::RaggedRow {
                row,
                expected: m + 1,
                found: record.len(),
            });
        }
        let raw_date = &record[0];
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| Error::BadDate {
            row,
            value: raw_date.to_owned(),
        })?;
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(Error::UnsortedDates {
                    row,
                    date: raw_date.to_owned(),
                });
            }
        }
        dates.push(date);

        for (j, cell) in record.iter().skip(1).enumerate() {
            let column = &asset_names[j];
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    column: column.clone(),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::BadNumber {
                row,
                column: column.clone(),
                value: cell.to_owned(),
            })?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositivePrice {
                    row,
                    column: column.clone(),
                    value,
                });
            }
            prices.push(value);
        }
    }

    PriceSeries::new(dates, asset_names, prices)
}

/// Writes `series` in the ingestion format with 12 significant digits.
pub fn write_prices<W: Write>(series: &PriceSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_owned()];
    header.extend(series.asset_names.iter().cloned());
    wtr.write_record(&header)?;
    for t in 0..series.n_days() {
        let mut record = Vec::with_capacity(series.n_assets() + 1);
        record.push(series.dates[t].format("%Y-%m-%d").to_string());
        record.extend(series.row(t).iter().map(|&p| format_significant(p, 12)));
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Formats `value` in plain decimal notation with `digits` significant digits.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let exponent = value.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Rounds `value` to the nearest number representable with `digits` significant digits.
pub fn round_significant(value: f64, digits: usize) -> f64 {
    format_significant(value, digits).parse().unwrap_or(value)
}

/// Per-day, per-asset gross price relatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRelativeMatrix {
    data: Vec<f64>,
    m: usize,
}

impl PriceRelativeMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows
            .first()
            .map(Vec::len)
            .ok_or(Error::Empty("no relative rows"))?;
        let mut data = Vec::with_capacity(rows.len() * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Self::from_flat(data, m)
    }

    pub fn from_flat(data: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 || data.is_empty() {
            return Err(Error::Empty("no relative rows"));
        }
        if !data.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: data.len() % m,
            });
        }
        if let Some(bad) = data.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::NonPositivePrice {
                row: bad / m,
                column: format!("asset {}", bad % m),
                value: data[bad],
            });
        }
        Ok(Self { data, m })
    }

    pub fn n_days(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn n_assets(&self) -> usize {
        self.m
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.m..(t + 1) * self.m]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn view(&self) -> RelativesView<'_> {
        RelativesView {
            data: &self.data,
            m: self.m,
        }
    }
}

/// Borrowed, possibly truncated, view of a relatives matrix.
///
/// Strategies only ever receive a prefix view, which makes look-ahead impossible.
#[derive(Debug, Clone, Copy)]
pub struct RelativesView<'a> {
    data: &'a [f64],
    m: usize,
}

impl<'a> RelativesView<'a> {
    pub fn n_days(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn n_assets(&self) -> usize {
        self.m
    }

    pub fn row(&self, t: usize) -> &'a [f64] {
        &self.data[t * self.m..(t + 1) * self.m]
    }

    /// The first `days` rows. Panics if `days` exceeds the view.
    pub fn prefix(&self, days: usize) -> RelativesView<'a> {
        RelativesView {
            data: &self.data[..days * self.m],
            m: self.m,
        }
    }

    /// Rows `range` flattened row-major.
    pub fn flat_rows(&self, range: Range<usize>) -> &'a [f64] {
        &self.data[range.start * self.m..range.end * self.m]
    }

    /// The `w` rows ending at `last_day` (inclusive).
    pub fn window(&self, last_day: usize, w: usize) -> Result<MarketWindow<'a>> {
        if w == 0 {
            return Err(Error::Empty("market window of size zero"));
        }
        if last_day + 1 < w || last_day >= self.n_days() {
            return Err(Error::NotEnoughData(format!(
                "window of {w} days ending at day {last_day} lies outside {} days of history",
                self.n_days()
            )));
        }
        let start = last_day + 1 - w;
        Ok(MarketWindow {
            start,
            w,
            m: self.m,
            data: self.flat_rows(start..last_day + 1),
        })
    }
}

pub fn compute_relatives(series: &PriceSeries) -> Result<PriceRelativeMatrix> {
    let n = series.n_days();
    if n < 2 {
        return Err(Error::NotEnoughData(format!(
            "need at least 2 price rows to form relatives, found {n}"
        )));
    }
    let m = series.n_assets();
    let mut data = Vec::with_capacity((n - 1) * m);
    for t in 1..n {
        let prev = series.row(t - 1);
        data.extend(series.row(t).iter().zip(prev).map(|(p, q)| p / q));
    }
    PriceRelativeMatrix::from_flat(data, m)
}

/// `w` consecutive rows of relatives.
#[derive(Debug, Clone, Copy)]
pub struct MarketWindow<'a> {
    pub start: usize,
    w: usize,
    m: usize,
    data: &'a [f64],
}

impl<'a> MarketWindow<'a> {
    /// Builds a window over caller-supplied row-major data.
    pub fn from_flat(start: usize, m: usize, data: &'a [f64]) -> Result<Self> {
        if m == 0 || data.is_empty() {
            return Err(Error::Empty("market window of size zero"));
        }
        if !data.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: data.len() % m,
            });
        }
        Ok(Self {
            start,
            w: data.len() / m,
            m,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.w
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0
    }

    pub fn end(&self) -> usize {
        self.start + self.w - 1
    }

    pub fn n_assets(&self) -> usize {
        self.m
    }

    pub fn as_flat(&self) -> &'a [f64] {
        self.data
    }
}

/// Four-feature summary of a market window:
/// `[sum of per-asset means, window mean, sum of per-asset variances, window variance]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketVector {
    pub v: [f64; 4],
    pub window_size: usize,
    /// Index of the window's last row.
    pub day: usize,
}

pub fn market_vector(window: &MarketWindow<'_>) -> Result<MarketVector> {
    let (w, m) = (window.w, window.m);
    if w == 0 {
        return Err(Error::Empty("market window of size zero"));
    }
    let data = window.data;
    let wf = w as f64;

    let mut sum_means = 0.0;
    let mut sum_vars = 0.0;
    for j in 0..m {
        let col = || (0..w).map(move |k| data[k * m + j]);
        let mean = col().sum::<f64>() / wf;
        sum_means += mean;
        sum_vars += col().map(|x| (x - mean).powi(2)).sum::<f64>() / wf;
    }

    let total = data.len() as f64;
    let mean = data.iter().sum::<f64>() / total;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / total;

    Ok(MarketVector {
        v: [sum_means, mean, sum_vars, var],
        window_size: w,
        day: window.end(),
    })
}

/// One vector per day in `range` whose `w`-day window fits inside `range`, ordered by day.
pub fn window_vectors(
    relatives: RelativesView<'_>,
    w: usize,
    range: Range<usize>,
) -> Result<Vec<MarketVector>> {
    if w == 0 {
        return Err(Error::Empty("market window of size zero"));
    }
    let end = range.end.min(relatives.n_days());
    if range.start >= end || end - range.start < w {
        return Ok(Vec::new());
    }
    (range.start + w - 1..end)
        .map(|day| market_vector(&relatives.window(day, w)?))
        .collect()
}
