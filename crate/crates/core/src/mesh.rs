//! Cell geometry of the two mesh architectures.
//!
//! A cell sits at a `(layer, row)` position, where `row` is the upper of the
//! two adjacent modes it couples. Layers are ordered the way light travels,
//! left to right.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Triangular (Reck) layout.
    #[serde(alias = "reck", alias = "tri")]
    Triangular,
    /// Rectangular (Clements) layout.
    #[serde(alias = "clements", alias = "rect")]
    Rectangular,
}

impl Architecture {
    pub const ALL: [Architecture; 2] = [Architecture::Triangular, Architecture::Rectangular];

    pub fn short_name(self) -> &'static str {
        match self {
            Architecture::Triangular => "reck",
            Architecture::Rectangular => "clements",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reck" | "triangular" | "tri" => Ok(Architecture::Triangular),
            "clements" | "rectangular" | "rect" => Ok(Architecture::Rectangular),
            other => Err(Error::InvalidArgument(format!(
                "unknown architecture '{other}' (expected reck or clements)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellPosition {
    pub layer: usize,
    pub row: usize,
}

impl CellPosition {
    pub fn new(layer: usize, row: usize) -> Self {
        CellPosition { layer, row }
    }

    /// Whether the cell couples `mode`.
    pub fn touches(&self, mode: usize) -> bool {
        mode == self.row || mode == self.row + 1
    }
}

pub fn cell_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Number of layers occupied by an `m`-mode mesh.
pub fn layer_count(m: usize, arch: Architecture) -> usize {
    match arch {
        Architecture::Rectangular => {
            if m < 2 {
                0
            } else if m == 2 {
                1
            } else {
                m
            }
        }
        Architecture::Triangular => (2 * m).saturating_sub(3),
    }
}

/// All cell positions, sorted by `(layer, row)`.
///
/// Rectangular: layer `l` holds cells on rows `l mod 2, l mod 2 + 2, ...`.
/// Triangular: same parity rule restricted to `row <= l <= 2m - 4 - row`,
/// so the top pair carries the most cells and the bottom pair a single one.
pub fn cell_positions(m: usize, arch: Architecture) -> Vec<CellPosition> {
    let mut cells = Vec::with_capacity(cell_count(m));
    if m < 2 {
        return cells;
    }
    for layer in 0..layer_count(m, arch) {
        let mut row = layer % 2;
        while row + 1 < m {
            let keep = match arch {
                Architecture::Rectangular => true,
                Architecture::Triangular => layer >= row && layer + row <= 2 * m - 4,
            };
            if keep {
                cells.push(CellPosition::new(layer, row));
            }
            row += 2;
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts_match_m_choose_2() {
        for m in 1..20 {
            for arch in Architecture::ALL {
                assert_eq!(cell_positions(m, arch).len(), cell_count(m), "m={m} {arch}");
            }
        }
    }

    #[test]
    fn triangle_rows_carry_decreasing_cell_counts() {
        let m = 6;
        let cells = cell_positions(m, Architecture::Triangular);
        for r in 0..m - 1 {
            let n = cells.iter().filter(|c| c.row == r).count();
            assert_eq!(n, m - 1 - r);
        }
    }

    #[test]
    fn parse_architecture_names() {
        assert_eq!("Reck".parse::<Architecture>().unwrap(), Architecture::Triangular);
        assert_eq!("clements".parse::<Architecture>().unwrap(), Architecture::Rectangular);
        assert!("hexagonal".parse::<Architecture>().is_err());
    }
}
