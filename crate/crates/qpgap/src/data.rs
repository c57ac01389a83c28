//! Coherence-versus-temperature CSV files.
//!
//! Columns: `T_K`, then either `value_us` (a time) or `rate_per_s`, and
//! optionally the matching `sigma_us` / `sigma_per_s`. A column named
//! `sigma` takes the unit of the value column.

use std::path::Path;

use qpgap_core::fitting::{DataPoint, DataSeries, SeriesKind};

use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueColumn {
    TimeUs,
    RatePerS,
}

pub fn parse_series(text: &str, kind: SeriesKind) -> CliResult<DataSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| CliError::input(format!("header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CliError::input(
            "empty file: expected a header row with T_K",
        ));
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("T_K").ok_or_else(|| CliError::input("missing column T_K"))?;
    let (v_col, unit) = match (find("value_us"), find("rate_per_s")) {
        (Some(c), None) => (c, ValueColumn::TimeUs),
        (None, Some(c)) => (c, ValueColumn::RatePerS),
        (Some(_), Some(_)) => {
            return Err(CliError::input(
                "give one of value_us and rate_per_s, not both",
            ))
        }
        (None, None) => return Err(CliError::input("missing column value_us or rate_per_s")),
    };
    let s_col = match unit {
        ValueColumn::TimeUs => find("sigma_us"),
        ValueColumn::RatePerS => find("sigma_per_s"),
    }
    .or_else(|| find("sigma"));

    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(format!("{e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> CliResult<Option<f64>> {
            let raw = rec.get(i).unwrap_or("");
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>().map(Some).map_err(|_| {
                CliError::input(format!("row {line}: {name} = {raw:?} is not a number"))
            })
        };
        let t = field(t_col, "T_K")?
            .ok_or_else(|| CliError::input(format!("row {line}: T_K is empty")))?;
        let v = field(v_col, &headers[v_col])?
            .ok_or_else(|| CliError::input(format!("row {line}: {} is empty", &headers[v_col])))?;
        let s = match s_col {
            Some(c) => field(c, &headers[c])?,
            None => None,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::input(format!(
                "row {line}: value must be positive, got {v}"
            )));
        }
        if s.is_some_and(|s| !(s > 0.0)) {
            return Err(CliError::input(format!(
                "row {line}: sigma must be positive"
            )));
        }
        points.push(match unit {
            ValueColumn::TimeUs => DataPoint::from_time_us(t, v, s),
            ValueColumn::RatePerS => DataPoint {
                t_k: t,
                rate_per_s: v,
                sigma_per_s: s,
            },
        });
    }
    if points.is_empty() {
        return Err(CliError::input("no data rows"));
    }
    DataSeries::new(kind, points).map_err(CliError::from)
}

pub fn read_series(path: &Path, kind: SeriesKind) -> CliResult<DataSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_series(&text, kind).map_err(|e| e.context(&path.display().to_string()))
}

/// Series as `T_K,rate_per_s[,sigma_per_s]`.
pub fn series_table(series: &DataSeries) -> Table {
    let with_sigma = series.has_sigma();
    let mut t = if with_sigma {
        Table::new(["T_K", "rate_per_s", "sigma_per_s"])
    } else {
        Table::new(["T_K", "rate_per_s"])
    };
    for p in &series.points {
        let mut row: Vec<Cell> = vec![p.t_k.into(), p.rate_per_s.into()];
        if let Some(s) = p.sigma_per_s {
            row.push(s.into());
        }
        t.push(row);
    }
    t
}
