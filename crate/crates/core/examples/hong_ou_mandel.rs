//! Two photons on a balanced MZ never leave on different ports.

use meshbias::photonics::{output_distribution, FockState};
use meshbias::unitary::mz_transfer;
use meshbias::MzParams;

fn main() -> meshbias::Result<()> {
    let u = mz_transfer(&MzParams::new(std::f64::consts::FRAC_PI_2, 0.0));
    for (w, p) in output_distribution(&u, &FockState::new(vec![1, 1]))? {
        println!("{w}: {p:.6}");
    }
    Ok(())
}
