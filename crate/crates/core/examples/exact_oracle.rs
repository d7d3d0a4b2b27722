//! Brute-force ground truth on a small instance: `log Z`, the mode,
//! per-node marginals and the mass histogram.

use mixmrf::exact::{enumerate_exact, exact_marginals, mass_buckets, DEFAULT_CAP};
use mixmrf::generate::{generate, GenSpec};

fn main() -> mixmrf::Result<()> {
    let inst = generate(&GenSpec::complete(7, 3, 1.5, 11))?;
    let summary = enumerate_exact(&inst, DEFAULT_CAP)?;
    println!("{} configurations", summary.configurations);
    println!("log Z = {:.6}", summary.log_z);
    println!("mode  = {:?}  f = {:.4}", summary.mode_config.labels(), summary.mode_value);

    for (i, row) in exact_marginals(&inst, DEFAULT_CAP)?.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:.3}")).collect();
        println!("node {i}: {}", cells.join(" "));
    }

    println!("heaviest buckets of f:");
    for b in mass_buckets(&inst, 20, DEFAULT_CAP)?.iter().rev().take(5) {
        println!("  [{:8.3}, {:8.3})  mass {:.4}", b.lo, b.hi, b.mass);
    }
    Ok(())
}
