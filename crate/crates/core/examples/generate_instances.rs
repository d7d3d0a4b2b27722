//! Draws a few seeded instances, checks their coupling strength and writes
//! them as JSON.
//!
//! ```text
//! cargo run --example generate_instances [out_dir]
//! ```

use std::path::PathBuf;

use mixmrf::generate::{generate, GenSpec, GraphKind};
use mixmrf::io::{read_instance, write_instance};

fn main() -> mixmrf::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mixmrf-instances"));
    std::fs::create_dir_all(&out)?;

    for (i, (graph, cs)) in [(GraphKind::Complete, 0.5), (GraphKind::Complete, 2.5), (GraphKind::ErdosRenyi(0.3), 1.0)].into_iter().enumerate() {
        let spec = GenSpec { n: 10, k: 3, graph, target_cs: cs, seed: 7 };
        let inst = generate(&spec)?;
        let path = out.join(format!("inst-{i}.json"));
        write_instance(&path, &inst)?;

        // the file reproduces the instance exactly
        let back = read_instance(&path)?;
        assert_eq!(back.a_flat(), inst.a_flat());
        let edges = inst.a_flat().iter().filter(|&&a| a != 0.0).count() / 2;
        println!("{graph:>16}  cs {:.3}  edges {edges:>2}  -> {}", inst.coupling_strength()?, path.display());
    }
    Ok(())
}
