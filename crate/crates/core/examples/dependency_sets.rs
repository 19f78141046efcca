//! Which phases each matrix element depends on.

use meshbias::photonics::dependency_sets;
use meshbias::Architecture;

fn main() -> meshbias::Result<()> {
    let m = 5;
    for arch in Architecture::ALL {
        let d = dependency_sets(m, arch)?;
        println!("{arch}: internal phases per element (row = output, column = input)");
        for row in d.parameter_counts() {
            println!("  {}", row.iter().map(|c| format!("{c:>3}")).collect::<Vec<_>>().join(""));
        }
    }
    Ok(())
}
