//! Single-photon sensitivity map of a small rectangular mesh.

use meshbias::bias::{zeta_map, Ensemble, ZetaConfig};
use meshbias::Architecture;

fn main() -> meshbias::Result<()> {
    let mut cfg = ZetaConfig::new(6, Architecture::Rectangular, Ensemble::Haar);
    cfg.n_unitaries = 50;
    cfg.n_trials = 40;
    cfg.workers = meshbias::par::default_workers();
    let z = zeta_map(&cfg)?;
    println!("zeta (row = output, column = input), {} samples", z.samples);
    for row in &z.zeta {
        println!("  {}", row.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
