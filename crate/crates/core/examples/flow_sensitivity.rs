//! Flow of every MZ next to its sensitivity index.

use meshbias::graph::MeshGraph;
use meshbias::stats::spearman;
use meshbias::Architecture;

fn main() -> meshbias::Result<()> {
    let m = 12;
    for arch in Architecture::ALL {
        let g = MeshGraph::new(m, arch)?;
        let flow = g.flow_all(1.0)?;
        let sens: Vec<f64> = g
            .mz_nodes()
            .map(|n| g.sensitivity_index(n).map(|s| s as f64))
            .collect::<meshbias::Result<_>>()?;
        let (best, _) = flow
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let pos = g.position(g.mz_nodes().nth(best).unwrap()).unwrap();
        println!(
            "{arch}: highest flow {:.3} at (layer {}, row {}); Spearman(flow, index) = {:.3}",
            flow[best],
            pos.layer,
            pos.row,
            spearman(&flow, &sens)
        );
    }
    Ok(())
}
