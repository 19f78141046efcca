//! Decompose a Haar-random unitary on both mesh layouts and rebuild it.

use meshbias::unitary::{decompose, frobenius_distance, haar_random, reconstruct};
use meshbias::Architecture;

fn main() -> meshbias::Result<()> {
    let m = 6;
    let u = haar_random(m, 2024);
    for arch in Architecture::ALL {
        let p = decompose(&u, arch)?;
        let err = frobenius_distance(&reconstruct(&p), &u);
        println!("{arch}: {} cells, reconstruction error {err:.2e}", p.cells.len());
        let c = &p.cells[0];
        println!("  first cell (layer {}, row {}): psi = {:.4}, theta = {:.4}", c.layer, c.row, c.params.psi, c.params.theta);
    }
    Ok(())
}
