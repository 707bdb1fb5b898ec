//! CSV tables and their metadata sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Significant digits written for every number.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits and prints the shortest
/// decimal that parses back to the rounded value.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    let a = rounded.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => format_number(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

/// Writes the table as CSV: header row, one record per row, `\n` endings.
pub fn write_table<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(render))?;
    }
    w.flush()?;
    Ok(())
}

/// Prints one line to stdout, reporting write failures as errors.
pub fn say(line: std::fmt::Arguments<'_>) -> Result<()> {
    writeln!(std::io::stdout().lock(), "{line}")?;
    Ok(())
}

/// True when the error chain ends in a closed stdout pipe.
pub fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<std::io::Error>().or_else(|| {
            c.downcast_ref::<csv::Error>().and_then(|e| match e.kind() {
                csv::ErrorKind::Io(io) => Some(io),
                _ => None,
            })
        });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

/// Sidecar path for an output file: `<out>.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes the table to `dest` (stdout when `None`) and, for files, the
/// metadata sidecar next to it.
pub fn emit_table<M: Serialize>(table: &Table, dest: Option<&Path>, meta: &M) -> Result<()> {
    match dest {
        None => write_table(table, std::io::stdout().lock()),
        Some(path) => {
            let file =
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_table(table, std::io::BufWriter::new(file))
                .with_context(|| format!("writing {}", path.display()))?;
            write_meta(&meta_path(path), meta)
        }
    }
}

pub fn write_meta<M: Serialize>(path: &Path, meta: &M) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_twelve_significant_digits() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(126_835_123.456_789), "126835123.457");
        assert_eq!(format_number(1.234_567_890_123_4e-7), "1.23456789012e-7");
        assert_eq!(format_number(-2.5e20), "-2.5e20");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn formatting_is_lossless_to_the_stated_precision() {
        for v in [
            std::f64::consts::PI * 1e8,
            1.0 / 3.0,
            6.02214076e23,
            1e-9 / 7.0,
        ] {
            let back: f64 = format_number(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11, "{v} -> {back}");
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_table(&Table::new(&["a", "b"]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn cells_render_by_kind() {
        let mut t = Table::new(&["n", "x", "s", "e"]);
        t.push(vec![3usize.into(), 2.5.into(), "ba".into(), Cell::Empty]);
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,x,s,e\n3,2.5,ba,\n");
    }

    #[test]
    fn sidecar_sits_next_to_the_table() {
        assert_eq!(
            meta_path(Path::new("/tmp/run.csv")),
            PathBuf::from("/tmp/run.csv.meta.json")
        );
    }
}
