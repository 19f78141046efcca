//! Two-photon bias of a Haar-random unitary under beamsplitter and phase noise.

use meshbias::bias::{multi_photon_bias, BiasConfig};
use meshbias::unitary::haar_random;
use meshbias::Architecture;

fn main() -> meshbias::Result<()> {
    let m = 8;
    let u = haar_random(m, 5);
    let mut cfg = BiasConfig::new(2, 200);
    cfg.workers = meshbias::par::default_workers();
    let b = multi_photon_bias(&u, Architecture::Rectangular, &cfg)?;
    println!(
        "{} collision-free pairs, mean |delta|/sigma = {:.3} (spread {:.3})",
        b.records.len(),
        b.mean_significance,
        b.significance_std
    );
    let worst = b
        .records
        .iter()
        .filter(|r| r.sigma > 0.0)
        .max_by(|x, y| (x.delta.abs() / x.sigma).total_cmp(&(y.delta.abs() / y.sigma)))
        .unwrap();
    println!(
        "most biased: {} -> {}, p = {:.4}, delta = {:+.2e}",
        worst.input, worst.output, worst.p, worst.delta
    );
    Ok(())
}
