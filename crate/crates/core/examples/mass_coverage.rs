//! How much probability mass the distinct rounded labellings cover, bucketed
//! by objective value.

use mixmrf::exact::{covered_buckets, enumerate_exact, mass_covered_with, DEFAULT_CAP};
use mixmrf::generate::{generate, GenSpec};
use mixmrf::mixing::{solve_m4, SolverConfig};
use mixmrf::rounding::round_batch;

fn main() -> mixmrf::Result<()> {
    let inst = generate(&GenSpec::complete(7, 5, 2.5, 2))?;
    let exact = enumerate_exact(&inst, DEFAULT_CAP)?;
    let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(2))?;
    let batch = round_batch(&sol.v, &frame, &inst, 1000, 3)?;

    let covered = mass_covered_with(&inst, exact.log_z, &batch.unique_set);
    println!("{} distinct labellings from 1000 roundings cover {:.3} of the mass", batch.unique_set.len(), covered);
    for b in covered_buckets(&inst, 20, &batch.unique_set, DEFAULT_CAP)?.iter().rev().take(6) {
        println!("  f in [{:7.3}, {:7.3})  mass {:.4}  covered {:.4}", b.lo, b.hi, b.mass, b.covered);
    }
    Ok(())
}
