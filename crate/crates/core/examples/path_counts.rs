//! Optical path counts: closed forms against the mesh graph.

use meshbias::graph::MeshGraph;
use meshbias::{paths, Architecture};

fn main() -> meshbias::Result<()> {
    let m = 6;
    for arch in Architecture::ALL {
        let g = MeshGraph::new(m, arch)?;
        let dp = g.path_count_matrix();
        println!("{arch}, m = {m} (row = output, column = input)");
        for i in 1..=m {
            let row: Vec<String> = (1..=m)
                .map(|j| {
                    let c = paths::count(m, arch, i, j).unwrap();
                    assert_eq!(c, dp[i - 1][j - 1]);
                    format!("{c:>4}")
                })
                .collect();
            println!("  {}", row.join(" "));
        }
        let s = g.path_stats(0, m - 1)?;
        println!("  input 1 -> output {m}: {} paths, mean length {}", s.count, s.mean_length);
    }
    // first-layer MZ to an interior MZ of an odd rectangle
    println!("MZ(1,1) -> MZ(5,2) in m = 7: {}", paths::count_mz_rectangular(7, 5, 1, 2)?);
    Ok(())
}
