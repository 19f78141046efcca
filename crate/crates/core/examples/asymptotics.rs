//! How fast the triangular mesh outgrows the rectangular one in paths.

use meshbias::paths::{asymptotic_log_ratio, exact_log_ratio, AsymptoticCase};

fn main() -> meshbias::Result<()> {
    println!("{:>5} {:>12} {:>12} {:>12} {:>10}", "m", "case", "exact ln", "approx ln", "rel err");
    for m in [30, 60, 120, 240] {
        for case in AsymptoticCase::ALL {
            let exact = exact_log_ratio(m, case)?;
            let approx = asymptotic_log_ratio(m, case)?;
            let name = match case {
                AsymptoticCase::Corner11 => "(1,1)",
                AsymptoticCase::Edge1HalfM => "(m/2,1)",
            };
            println!("{m:>5} {name:>12} {exact:>12.4} {approx:>12.4} {:>10.2e}", ((approx - exact) / exact).abs());
        }
    }
    Ok(())
}
