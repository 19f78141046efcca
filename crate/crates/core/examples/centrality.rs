//! Rank the MZs of a rectangular mesh by several centrality measures.

use meshbias::graph::{Centrality, MeshGraph};
use meshbias::Architecture;

fn main() -> meshbias::Result<()> {
    let g = MeshGraph::new(8, Architecture::Rectangular)?;
    for c in Centrality::ALL {
        let values = g.centrality(c)?;
        let mut mz: Vec<(usize, f64)> = g.mz_nodes().map(|n| (n, values[&n])).collect();
        mz.sort_by(|a, b| b.1.total_cmp(&a.1));
        let top: Vec<String> = mz
            .iter()
            .take(3)
            .map(|(n, v)| {
                let p = g.position(*n).unwrap();
                format!("({},{})={v:.3}", p.layer, p.row)
            })
            .collect();
        println!("{:<12} {}", c.name(), top.join("  "));
    }
    Ok(())
}
