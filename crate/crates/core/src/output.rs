//! Number formatting and a minimal CSV table used for every tabular output.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::IterationTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// 6 significant digits.
    #[default]
    Standard,
    /// 17 significant digits; round-trips every `f64`.
    Exact,
}

/// Lowercase scientific notation with 6 or 17 significant digits.
pub fn format_number(x: f64, precision: Precision) -> String {
    match precision {
        Precision::Standard => format!("{x:.5e}"),
        Precision::Exact => format!("{x:.16e}"),
    }
}

/// Rounds `x` to what [`format_number`] would print.
pub fn round_to(x: f64, precision: Precision) -> f64 {
    format_number(x, precision).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Integers are written without an exponent.
#[derive(Debug, Clone, Copy)]
pub struct Int(pub i64);

impl From<Int> for Cell {
    fn from(i: Int) -> Self {
        Cell::Text(i.0.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, precision: Precision) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&format_number(*x, precision)),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses text written by [`CsvTable::to_csv`]. Fields that parse as
    /// floating point become numbers unless they look like integers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::invalid("empty CSV"))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<Cell> = line.split(',').map(parse_cell).collect();
            if row.len() != header.len() {
                return Err(Error::invalid(format!(
                    "CSV row {} has {} fields, header has {}",
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

fn parse_cell(field: &str) -> Cell {
    if field.is_empty() {
        Cell::Empty
    } else if field.parse::<i64>().is_ok() {
        Cell::Text(field.to_string())
    } else if let Ok(x) = field.parse::<f64>() {
        Cell::Num(x)
    } else {
        Cell::Text(field.to_string())
    }
}

/// Trace table: `n,p_re,p_im,c_re,c_im,abs_err`. The Möbius coordinate of
/// `p-` is written as `inf`.
pub fn trace_table(trace: &IterationTrace) -> CsvTable {
    let mut table = CsvTable::new(&["n", "p_re", "p_im", "c_re", "c_im", "abs_err"]);
    for e in &trace.entries {
        let (c_re, c_im) = e.c.map_or((f64::INFINITY, f64::INFINITY), |c| (c.re, c.im));
        table.push(vec![
            Int(e.n as i64).into(),
            e.p.re.into(),
            e.p.im.into(),
            c_re.into(),
            c_im.into(),
            e.abs_err.into(),
        ]);
    }
    table
}

/// Writes `re,im` with the given precision (used for CLI echoes).
pub fn format_complex(z: crate::ComplexValue, precision: Precision) -> String {
    let mut s = format_number(z.re, precision);
    let _ = write!(s, ",{}", format_number(z.im, precision));
    s
}
