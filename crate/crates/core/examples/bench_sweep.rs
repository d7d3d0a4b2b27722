//! A small coupling-strength sweep through the experiment runner. Writes
//! per-instance JSON and per-method CSV aggregates.
//!
//! ```text
//! cargo run --release --example bench_sweep [out_dir]
//! ```

use std::path::PathBuf;

use mixmrf::experiment::{preset_spec, run, Preset};

fn main() -> mixmrf::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mixmrf-bench"));
    let mut spec = preset_spec(Preset::Fig3b, 3, &out);
    spec.coupling_strengths = vec![0.5, 1.5, 2.5];
    let summary = run(&spec)?;

    for (method, rows) in &summary.aggregates {
        println!("{method}");
        for r in rows {
            println!("  cs {:.1}: {:.4} ± {:.4}  ({:.2} ms)", r.coupling_strength, r.mean_metric, r.std, r.mean_wall_time * 1e3);
        }
    }
    println!("{} result files under {}", summary.result_files.len(), out.display());
    Ok(())
}
