//! Calibrate a simulated device, then look at the error pattern over repeats.

use meshbias::calibration::{calibrate, calibration_error_map, ScanSpec, SimulatedDevice};
use meshbias::stats::spearman;

fn main() -> meshbias::Result<()> {
    let scan = ScanSpec::default();
    let mut dev = SimulatedDevice::random(6, 0.0, 1)?;
    let est = calibrate(&mut dev, &scan)?;
    println!("noiseless m = 6: max parameter error {:.2e}", est.max_error());

    let map = calibration_error_map(6, 30, 1e-2, 7, &scan, meshbias::par::default_workers())?;
    println!("mean |psi0 error| over {} noisy calibrations (row x layer):", map.repeats);
    for row in map.grid(&map.psi0) {
        let cells: Vec<String> = row
            .iter()
            .map(|v| if v.is_nan() { "   .   ".into() } else { format!("{v:.4} ") })
            .collect();
        println!("  {}", cells.join(""));
    }
    let order: Vec<f64> = map.psi_order.iter().map(|&o| o as f64).collect();
    println!("Spearman(error, calibration order) = {:.3}", spearman(&map.psi0, &order));
    Ok(())
}
