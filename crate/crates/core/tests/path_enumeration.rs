//! Path statistics against explicit enumeration over the cell layout.

use meshbias::graph::MeshGraph;
use meshbias::mesh::cell_positions;
use meshbias::{paths, Architecture, CellPosition};
use num_bigint::BigUint;
use num_rational::BigRational;

// Follow light from `mode` after `layer`: the next cell touching the mode,
// or None when it leaves the mesh.
fn next_cell(cells: &[CellPosition], after: Option<usize>, mode: usize) -> Option<CellPosition> {
    cells
        .iter()
        .filter(|c| after.is_none_or(|l| c.layer > l) && c.touches(mode))
        .min_by_key(|c| c.layer)
        .copied()
}

// Every input->output path as (output mode, number of edges).
fn enumerate(cells: &[CellPosition], input: usize) -> Vec<(usize, usize)> {
    fn walk(cells: &[CellPosition], after: Option<usize>, mode: usize, edges: usize, out: &mut Vec<(usize, usize)>) {
        match next_cell(cells, after, mode) {
            None => out.push((mode, edges + 1)),
            Some(c) => {
                walk(cells, Some(c.layer), c.row, edges + 1, out);
                walk(cells, Some(c.layer), c.row + 1, edges + 1, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(cells, None, input, 0, &mut out);
    out
}

#[test]
fn dp_matches_enumeration() {
    for arch in Architecture::ALL {
        for m in 2..=8 {
            let cells = cell_positions(m, arch);
            let g = MeshGraph::new(m, arch).unwrap();
            for j in 0..m {
                let all = enumerate(&cells, j);
                for i in 0..m {
                    let hits: Vec<usize> = all.iter().filter(|p| p.0 == i).map(|p| p.1).collect();
                    let s = g.path_stats(j, i).unwrap();
                    assert_eq!(s.count, BigUint::from(hits.len()), "{arch} m={m} in={j} out={i}");
                    assert_eq!(s.total_length, BigUint::from(hits.iter().sum::<usize>()));
                    assert_eq!(paths::count(m, arch, i + 1, j + 1).unwrap(), s.count);
                    let want = BigRational::new(s.total_length.clone().into(), s.count.clone().into());
                    assert_eq!(s.mean_length, want);
                }
            }
        }
    }
}

#[test]
fn mesh_symmetries_hold_for_statistics() {
    for m in 2..=9 {
        let tri = MeshGraph::new(m, Architecture::Triangular).unwrap();
        let rect = MeshGraph::new(m, Architecture::Rectangular).unwrap();
        for i in 0..m {
            for j in 0..m {
                assert_eq!(tri.path_stats(j, i).unwrap(), tri.path_stats(i, j).unwrap());
                let mirrored = if m % 2 == 1 {
                    rect.path_stats(i, j).unwrap()
                } else {
                    rect.path_stats(m - 1 - j, m - 1 - i).unwrap()
                };
                assert_eq!(rect.path_stats(j, i).unwrap(), mirrored, "m={m} {i} {j}");
            }
        }
    }
}

#[test]
fn every_pair_is_connected() {
    for arch in Architecture::ALL {
        for m in 1..=12 {
            for i in 1..=m {
                for j in 1..=m {
                    assert!(paths::count(m, arch, i, j).unwrap() > BigUint::from(0u8), "{arch} m={m} {i} {j}");
                }
            }
        }
    }
}
