//! Segments the bundled test scene (or any PPM plus PGM annotation) and
//! reports agreement with the annotated pixels.
//!
//! ```text
//! cargo run --release --example segment_image [image.ppm annotation.pgm k out.pgm]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use mixmrf::segmentation::{build_unary, overlay, pnm, segment, KernelParams, PixelFeatures, SegmentConfig};

fn main() -> mixmrf::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (image, annotation, k, out) = match args.as_slice() {
        [i, a, k, o] => (PathBuf::from(i), PathBuf::from(a), k.parse().expect("k must be an integer"), PathBuf::from(o)),
        _ => (data.join("scene.ppm"), data.join("scene_annotation.pgm"), 3, std::env::temp_dir().join("scene_labels.pgm")),
    };

    let img = pnm::read_ppm(&image)?;
    let ann = pnm::read_pgm(&annotation)?;
    let prior = build_unary(&ann.pixels, k, 0.95)?;
    let start = Instant::now();
    let seg = segment(&PixelFeatures::from_image(&img), &prior, &KernelParams::default(), &SegmentConfig::default())?;
    let secs = start.elapsed().as_secs_f64();

    let (mut hit, mut total) = (0, 0);
    for (&a, &l) in ann.pixels.iter().zip(&seg.labels) {
        if a > 0 {
            total += 1;
            hit += usize::from(a as u16 == l + 1);
        }
    }
    println!(
        "{}x{} pixels, {} iterations (converged: {}), alpha {:.3e}, {:.1} s",
        seg.width, seg.height, seg.iterations, seg.converged, seg.final_alpha, secs
    );
    println!("relaxed objective {:.6e}, discrete objective {:.6e}", seg.objective_trace.last().unwrap(), seg.discrete_value);
    println!("annotated pixels kept: {hit}/{total}");

    pnm::write_pgm(&out, &seg.label_image())?;
    let overlay_path = out.with_extension("overlay.ppm");
    pnm::write_ppm(&overlay_path, &overlay(&img, &seg.labels))?;
    println!("wrote {} and {}", out.display(), overlay_path.display());
    Ok(())
}
