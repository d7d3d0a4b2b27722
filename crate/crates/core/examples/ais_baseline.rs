//! Annealed importance sampling with Gibbs transitions: more temperatures
//! give a tighter `log Z`.

use mixmrf::ais::{ais_estimate, AisConfig};
use mixmrf::exact::{enumerate_exact, DEFAULT_CAP};
use mixmrf::generate::{generate, GenSpec};

fn main() -> mixmrf::Result<()> {
    let inst = generate(&GenSpec::complete(10, 3, 1.0, 5))?;
    let exact = enumerate_exact(&inst, DEFAULT_CAP)?;
    println!("exact log Z {:.4}, mode {:.4}", exact.log_z, exact.mode_value);

    for temperatures in [3, 9, 25, 100] {
        let cfg = AisConfig { temperatures, ..AisConfig::default_for(inst.k(), 5) };
        let res = ais_estimate(&inst, &cfg)?;
        println!(
            "K = {temperatures:>3}: log Z^ {:.4} (error {:.4}), best f {:.4}, {:.1} ms",
            res.log_z_hat,
            (res.log_z_hat - exact.log_z).abs(),
            res.best_value,
            res.wall_time * 1e3
        );
    }
    Ok(())
}
