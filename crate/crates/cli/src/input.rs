//! CSV input. Columns are bound by header name; unknown columns are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use esbt_core::ForecastRecord;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Column {
    X,
    V,
    E,
    VStar,
    EStar,
    Pit,
}

impl Column {
    pub const ALL: [Column; 6] = [Column::X, Column::V, Column::E, Column::VStar, Column::EStar, Column::Pit];

    pub fn name(self) -> &'static str {
        match self {
            Column::X => "x",
            Column::V => "v",
            Column::E => "e",
            Column::VStar => "v_star",
            Column::EStar => "e_star",
            Column::Pit => "pit",
        }
    }
}

/// Parsed numeric columns. Only the columns requested at load time are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    rows: usize,
    columns: BTreeMap<Column, Vec<f64>>,
}

impl InputTable {
    /// Reads `path`, requiring every column in `required` and keeping any of
    /// `optional` that are present.
    pub fn read(path: &Path, required: &[Column], optional: &[Column]) -> Result<Self> {
        let read_err = |source| CliError::Read { path: path.to_path_buf(), source };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(read_err)?;
        let headers = reader.headers().map_err(read_err)?.clone();
        Self::parse(path.to_path_buf(), &headers, reader.records(), required, optional)
    }

    pub fn from_reader<R: std::io::Read>(
        source: R,
        required: &[Column],
        optional: &[Column],
    ) -> Result<Self> {
        let path = PathBuf::from("<input>");
        let read_err = |source| CliError::Read { path: path.clone(), source };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let headers = reader.headers().map_err(read_err)?.clone();
        Self::parse(path.clone(), &headers, reader.records(), required, optional)
    }

    fn parse(
        path: PathBuf,
        headers: &csv::StringRecord,
        records: impl Iterator<Item = csv::Result<csv::StringRecord>>,
        required: &[Column],
        optional: &[Column],
    ) -> Result<Self> {
        let mut bound = Vec::new();
        for &col in required {
            match headers.iter().position(|h| h == col.name()) {
                Some(idx) => bound.push((col, idx)),
                None => return Err(CliError::MissingColumn { path, column: col.name() }),
            }
        }
        for &col in optional {
            if let Some(idx) = headers.iter().position(|h| h == col.name()) {
                bound.push((col, idx));
            }
        }

        let mut columns: BTreeMap<Column, Vec<f64>> = bound.iter().map(|&(c, _)| (c, Vec::new())).collect();
        let mut rows = 0;
        for record in records {
            let record = record.map_err(|source| CliError::Read { path: path.clone(), source })?;
            rows += 1;
            for &(col, idx) in &bound {
                let raw = record.get(idx).unwrap_or("");
                let value = raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    CliError::BadCell { path: path.clone(), row: rows, column: col.name(), value: raw.into() }
                })?;
                columns.get_mut(&col).expect("bound column").push(value);
            }
        }
        Ok(Self { rows, columns })
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn has(&self, col: Column) -> bool {
        self.columns.contains_key(&col)
    }

    pub fn column(&self, col: Column) -> Option<&[f64]> {
        self.columns.get(&col).map(Vec::as_slice)
    }

    /// Forecast records. Missing ES columns are filled with the matching VaR
    /// column, which is only sound for scores that ignore `e`.
    pub fn forecast_records(&self) -> Option<Vec<ForecastRecord>> {
        let x = self.column(Column::X)?;
        let v = self.column(Column::V)?;
        let v_star = self.column(Column::VStar)?;
        let e = self.column(Column::E).unwrap_or(v);
        let e_star = self.column(Column::EStar).unwrap_or(v_star);
        Some(
            (0..self.rows)
                .map(|t| ForecastRecord { x: x[t], v: v[t], e: e[t], v_star: v_star[t], e_star: e_star[t] })
                .collect(),
        )
    }
}

/// Exact decimal form that parses back to the same `f64`.
pub fn fmt_exact(value: f64) -> String {
    format!("{value:.16e}")
}
