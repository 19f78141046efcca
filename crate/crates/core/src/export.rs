//! CSV and JSON writers for analysis results.
//!
//! Matrices are written with a header row and a label column, both 1-based.
//! For `m x m` maps the rows are output modes and the columns input modes;
//! mesh maps use rows for MZ rows and columns for layers, with empty fields
//! where no cell sits.

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::Result;
use crate::mesh::CellPosition;

/// Write a labelled matrix. `corner` fills the top-left field.
pub fn write_matrix_csv<W: Write, T: Display>(w: W, corner: &str, rows: &[Vec<T>]) -> Result<()> {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec![corner.to_string()];
    header.extend((1..=cols).map(|c| c.to_string()));
    wr.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        rec.resize(cols + 1, String::new());
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn matrix_csv<T: Display>(corner: &str, rows: &[Vec<T>]) -> Result<String> {
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, corner, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Lay out per-cell values on the `[row][layer]` mesh grid.
pub fn mesh_grid(m: usize, cells: &[CellPosition], values: &[f64]) -> Vec<Vec<String>> {
    let layers = cells.iter().map(|c| c.layer + 1).max().unwrap_or(0);
    let mut g = vec![vec![String::new(); layers]; m.saturating_sub(1)];
    for (c, v) in cells.iter().zip(values) {
        g[c.row][c.layer] = v.to_string();
    }
    g
}

/// Big integers as decimal strings.
pub fn big_matrix(rows: &[Vec<BigUint>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|v| v.to_str_radix(10)).collect()).collect()
}

/// One CSV row per serialisable record, header from the field names.
pub fn write_records_csv<W: Write, T: Serialize>(w: W, records: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Write `content` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(content.as_bytes())?;
            f.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cell_positions, Architecture};

    #[test]
    fn matrix_has_one_based_labels() {
        let s = matrix_csv("out\\in", &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(s, "out\\in,1,2\n1,1,2\n2,3,4\n");
    }

    #[test]
    fn mesh_grid_leaves_gaps() {
        let cells = cell_positions(3, Architecture::Rectangular);
        let g = mesh_grid(3, &cells, &[1.0, 2.0, 3.0]);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0], vec!["1", "", "3"]);
        assert_eq!(g[1], vec!["", "2", ""]);
    }

    #[test]
    fn emit_creates_parent_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/out.txt");
        emit(Some(&p), "x").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "x");
    }
}
