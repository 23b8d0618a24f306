//! Reporters and the per-tick series they produce.
//!
//! A reporter only ever sees `&SimState`, so it cannot draw from any
//! protocol stream or mutate the world.

use std::io::{self, Write};
use std::path::Path;

use crate::fmt::{g17, parse_g17};
use crate::world::SimState;

pub struct Reporter {
    pub name: String,
    f: Box<dyn Fn(&SimState) -> f64 + Send>,
}

impl Reporter {
    pub fn new(name: &str, f: impl Fn(&SimState) -> f64 + Send + 'static) -> Self {
        Self {
            name: name.to_string(),
            f: Box::new(f),
        }
    }

    pub fn sample(&self, state: &SimState) -> f64 {
        (self.f)(state)
    }
}

impl std::fmt::Debug for Reporter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reporter").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub tick: u64,
    pub values: Vec<f64>,
}

/// Reporter values, one row per tick, columns in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    names: Vec<String>,
    rows: Vec<SeriesRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("series has no reporter columns")]
    NoColumns,
    #[error("malformed csv at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Series {
    pub fn with_columns(names: Vec<String>) -> Self {
        Self { names, rows: Vec::new() }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[SeriesRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(crate) fn push_column(&mut self, name: &str) {
        self.names.push(name.to_string());
        for row in &mut self.rows {
            row.values.push(f64::NAN);
        }
    }

    pub fn push_row(&mut self, tick: u64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.names.len());
        self.rows.push(SeriesRow { tick, values });
    }

    pub(crate) fn clear_rows(&mut self) {
        self.rows.clear();
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn last(&self) -> Option<&SeriesRow> {
        self.rows.last()
    }

    /// Writes `tick,<name1>,<name2>,...` then one line per row, reals with
    /// 17 significant digits, `\n` line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CsvError> {
        if self.names.is_empty() {
            return Err(CsvError::NoColumns);
        }
        let mut line = String::from("tick");
        for n in &self.names {
            line.push(',');
            line.push_str(n);
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
        for row in &self.rows {
            line.clear();
            line.push_str(&row.tick.to_string());
            for v in &row.values {
                line.push(',');
                line.push_str(&g17(*v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String, CsvError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is ascii"))
    }

    pub fn parse_csv(text: &str) -> Result<Self, CsvError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(CsvError::Malformed {
            line: 1,
            reason: "missing header".into(),
        })?;
        let mut cols = header.split(',');
        if cols.next() != Some("tick") {
            return Err(CsvError::Malformed {
                line: 1,
                reason: "first column must be tick".into(),
            });
        }
        let names: Vec<String> = cols.map(str::to_string).collect();
        let mut series = Series::with_columns(names);
        for (i, line) in lines {
            let bad = |reason: &str| CsvError::Malformed {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut fields = line.split(',');
            let tick = fields
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad tick"))?;
            let values = fields
                .map(|f| parse_g17(f).ok_or_else(|| bad("bad number")))
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != series.names.len() {
                return Err(bad("wrong column count"));
            }
            series.push_row(tick, values);
        }
        Ok(series)
    }
}

/// Writes `series` as CSV to `destination`.
pub fn export_csv(series: &Series, destination: impl AsRef<Path>) -> Result<(), CsvError> {
    let file = std::fs::File::create(destination)?;
    series.write_csv(io::BufWriter::new(file))
}
