//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the report is always printed:
//!
//! ```text
//! cargo test --release --test acceptance
//! ```

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use mixmrf::ais::{ais_estimate, gibbs_sweep, AisConfig};
use mixmrf::exact::{enumerate_exact, exact_marginals, mass_covered_with, DEFAULT_CAP};
use mixmrf::generate::{generate, GenSpec};
use mixmrf::mixing::{
    block_cost_matrix, frobenius, lifted_gram, rank_bound, relaxed_objective, solve_m4, solve_m4_observed, M4Event, SolverConfig,
};
use mixmrf::mixing_plus::{default_block_size, solve_m4_plus, solve_m4_plus_observed, BlockEvent};
use mixmrf::mrf::{delta_hat, Configuration, MrfInstance};
use mixmrf::partition::{estimate_z, unbiasedness_harness};
use mixmrf::rng::{derive_seed, sphere_point, stream_rng};
use mixmrf::rounding::round_batch;
use mixmrf::segmentation::{build_unary, pnm, segment, KernelParams, PixelFeatures, SegmentConfig};
use mixmrf::simplex::{bijection_check, simplex_frame};

type Outcome = (bool, String);

const SWEEP: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn rel_error(exact: f64, found: f64) -> f64 {
    (exact - found) / exact.abs()
}

fn c1_bijection() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 2..=10 {
        for d in [k - 1, k, k + 3] {
            let frame = simplex_frame(k, d).unwrap();
            for a in 0..k {
                for b in 0..k {
                    worst = worst.max((bijection_check(k, &frame, a, b) - delta_hat(a, b)).abs());
                }
            }
        }
    }
    (worst <= 1e-12, format!("max deviation {worst:.2e} over k = 2..10"))
}

fn c2_block_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in 0..100u64 {
        let n = 1 + (s as usize * 7) % 15;
        let k = 2 + (s as usize) % 5;
        let inst = generate_small(n, k, 0.5 + (s % 5) as f64 * 0.5, s);
        let d = rank_bound(n, k);
        let frame = simplex_frame(k, d).unwrap();
        let v = if s % 2 == 0 {
            let mut rng = stream_rng(1000 + s, 0);
            let mut v = vec![0.0; n * d];
            v.chunks_mut(d).for_each(|vi| sphere_point(&mut rng, vi));
            v
        } else {
            solve_m4(&inst, &SolverConfig::with_seed(s)).unwrap().0.v
        };
        let lhs = frobenius(&lifted_gram(&frame, &v), &block_cost_matrix(&inst));
        let rhs = relaxed_objective(&inst, &frame, &v).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    (worst <= 1e-9, format!("max |<Y, C> - f(V)| = {worst:.2e} over 100 pairs"))
}

/// `generate` needs `n >= 2`; a single variable gets a random bias only.
fn generate_small(n: usize, k: usize, c: f64, seed: u64) -> MrfInstance {
    if n >= 2 {
        return generate(&GenSpec::complete(n, k, c, seed)).unwrap();
    }
    let mut rng = stream_rng(seed, 0);
    let mut h = vec![0.0; k];
    sphere_point(&mut rng, &mut h);
    MrfInstance::symmetrize_and_validate(&[vec![0.0]], &[h], k).unwrap()
}

/// Runs to a fixed point rather than the default stopping tolerance; the
/// dominance checks are about the converged objective.
fn converged(seed: u64) -> SolverConfig {
    SolverConfig {
        max_iters: 20_000,
        rel_tol: 1e-14,
        ..SolverConfig::with_seed(seed)
    }
}

/// The 100 instances shared by criteria 3 and 4: `k ∈ {2, 3, 5}`, `n ≤ 12`.
fn dominance_instances() -> Vec<(MrfInstance, u64)> {
    (0..100u64)
        .map(|s| {
            let k = [2, 3, 5][s as usize % 3];
            let n_max = if k == 5 { 8 } else { 12 };
            let n = 3 + (s as usize * 5) % (n_max - 2);
            let c = SWEEP[s as usize % 5];
            (generate(&GenSpec::complete(n, k, c, 300 + s)).unwrap(), 300 + s)
        })
        .collect()
}

fn c3_m4_monotone_dominant() -> Outcome {
    let mut worst_gain = f64::INFINITY;
    let mut worst_step = f64::INFINITY;
    let mut dominated = 0;
    let mut min_margin = f64::INFINITY;
    for (inst, seed) in dominance_instances() {
        let mut prev: Option<f64> = None;
        let mut frame_for_check = None;
        let (sol, _) = solve_m4_observed(&inst, &converged(seed), |e| match e {
            M4Event::Update { gain, vectors, .. } => {
                worst_gain = worst_gain.min(gain);
                let frame = frame_for_check.get_or_insert_with(|| simplex_frame(inst.k(), vectors.len() / inst.n()).unwrap());
                let f = relaxed_objective(&inst, frame, vectors).unwrap();
                if let Some(p) = prev {
                    worst_step = worst_step.min(f - p);
                }
                prev = Some(f);
            }
            M4Event::SweepEnd { .. } => {}
        })
        .unwrap();
        let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        let target = inst.embedding_map().to_embedded(exact.mode_value);
        let margin = sol.objective_value - target;
        min_margin = min_margin.min(margin);
        if margin >= -1e-9 {
            dominated += 1;
        }
    }
    let ok = worst_gain >= -1e-10 && worst_step >= -1e-10 && dominated == 100;
    (
        ok,
        format!(
            "min step gain {worst_gain:.2e}, min recomputed step {worst_step:.2e}, f(V) >= f* on {dominated}/100 (min margin {min_margin:.3e})"
        ),
    )
}

fn c4_m4_plus_feasible() -> Outcome {
    let mut violations = 0usize;
    let mut dominated = 0;
    for (inst, seed) in dominance_instances() {
        let k = inst.k();
        let m = default_block_size(inst.n(), k);
        let d = k * m;
        let lo = -1.0 / (k as f64 - 1.0) - 1e-9;
        let (sol, _) = solve_m4_plus_observed(&inst, &converged(seed), m, |e| {
            if let BlockEvent::SweepEnd { z, v, .. } = e {
                if z.iter().any(|&x| x < 0.0) {
                    violations += 1;
                }
                for zi in z.chunks(d) {
                    let sums: Vec<f64> = (0..m).map(|j| (0..k).map(|b| zi[b * m + j]).sum()).collect();
                    if (dot(&sums, &sums).sqrt() - 1.0).abs() > 1e-9 {
                        violations += 1;
                    }
                }
                for a in v.chunks(d) {
                    for b in v.chunks(d) {
                        let g = dot(a, b);
                        if !(lo..=1.0 + 1e-9).contains(&g) {
                            violations += 1;
                        }
                    }
                }
            }
        })
        .unwrap();
        let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        if sol.objective_value >= inst.embedding_map().to_embedded(exact.mode_value) - 1e-9 {
            dominated += 1;
        }
    }
    (
        violations == 0 && dominated >= 99,
        format!("{violations} feasibility violations at sweep ends, f(V) >= f* on {dominated}/100"),
    )
}

/// Criterion-5 instances: `k = 5`, `n = 7`, complete graphs, 100 seeds per
/// coupling strength.
fn mode_instances(c: f64) -> Vec<(MrfInstance, u64)> {
    (0..100u64)
        .map(|s| {
            let seed = 5000 + s;
            (generate(&GenSpec::complete(7, 5, c, seed)).unwrap(), seed)
        })
        .collect()
}

fn c5_mode_quality() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in SWEEP {
        let mut m4 = Vec::new();
        let mut m4p = Vec::new();
        for (inst, seed) in mode_instances(c) {
            let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
            let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(seed)).unwrap();
            let batch = round_batch(&sol.v, &frame, &inst, 1000, derive_seed(seed, 1)).unwrap();
            m4.push(rel_error(exact.mode_value, batch.best_value));
            let (sol, proj) = solve_m4_plus(&inst, &SolverConfig::with_seed(seed), default_block_size(7, 5)).unwrap();
            let batch = round_batch(&sol.v, proj.frame(), &inst, 1000, derive_seed(seed, 1)).unwrap();
            m4p.push(rel_error(exact.mode_value, batch.best_value));
        }
        let (a, b) = (mean(&m4), mean(&m4p));
        ok &= a <= 0.02;
        parts.push(format!("c={c}: {a:.4}/{b:.4}"));
    }
    (ok, format!("mean relative error M4/M4+ {}", parts.join(", ")))
}

fn c6_mass_coverage() -> Outcome {
    let mut covered = Vec::new();
    for (inst, seed) in mode_instances(2.5) {
        let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(seed)).unwrap();
        let batch = round_batch(&sol.v, &frame, &inst, 1000, derive_seed(seed, 1)).unwrap();
        covered.push(mass_covered_with(&inst, exact.log_z, &batch.unique_set));
    }
    let m = mean(&covered);
    let lo = covered.iter().cloned().fold(f64::INFINITY, f64::min);
    (m >= 0.90, format!("mean mass covered {m:.4} (min {lo:.4}) over 100 instances"))
}

fn c7_unbiasedness() -> Outcome {
    let mut within = 0;
    let mut scores = Vec::new();
    for s in 0..20u64 {
        let seed = 7000 + s;
        let inst = generate(&GenSpec::complete(10, 2, 2.5, seed)).unwrap();
        let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
        let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(seed)).unwrap();
        let h = unbiasedness_harness(&inst, &sol.v, &frame, 1000, 200, exact.log_z, derive_seed(seed, 1)).unwrap();
        if h.z_score.abs() <= 3.0 {
            within += 1;
        }
        scores.push(format!("{:.2}", h.z_score));
    }
    (within >= 18, format!("|z| <= 3 on {within}/20 instances, z = [{}]", scores.join(" ")))
}

fn c8_degenerate_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut all_exact = true;
    for (n, k) in [(1, 2), (2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (2, 4), (4, 3)] {
        for s in 0..3u64 {
            let inst = generate_small(n, k, 1.5, 800 + s);
            // vectors orthogonal to the frame and to each other make every
            // labelling reachable
            let d = k - 1 + n;
            let frame = simplex_frame(k, d).unwrap();
            let mut v = vec![0.0; n * d];
            for i in 0..n {
                v[i * d + k - 1 + i] = 1.0;
            }
            let est = estimate_z(&inst, &v, &frame, 4000, 900 + s).unwrap();
            all_exact &= est.is_exact();
            let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
            worst = worst.max((est.log_z_hat - exact.log_z).abs());
            cases += 1;
        }
    }
    (
        all_exact && worst <= 1e-10,
        format!("full coverage on every case: {all_exact}, max |log Z^ - log Z| = {worst:.2e} over {cases} instances"),
    )
}

fn c9_ais_trend() -> Outcome {
    let instances: Vec<_> = (0..100u64)
        .map(|s| {
            let seed = 9000 + s;
            let inst = generate(&GenSpec::complete(10, 2, 2.5, seed)).unwrap();
            let log_z = enumerate_exact(&inst, DEFAULT_CAP).unwrap().log_z;
            (inst, log_z, seed)
        })
        .collect();
    let errors: Vec<f64> = [3, 9, 25]
        .iter()
        .map(|&kk| {
            let e: Vec<f64> = instances
                .iter()
                .map(|(inst, log_z, seed)| {
                    let cfg = AisConfig {
                        temperatures: kk,
                        num_cycles: 1,
                        num_samples: 100,
                        seed: derive_seed(*seed, 2),
                    };
                    (ais_estimate(inst, &cfg).unwrap().log_z_hat - log_z).abs()
                })
                .collect();
            mean(&e)
        })
        .collect();
    (
        errors[1] <= errors[0] && errors[2] <= errors[1],
        format!("mean |log Z - log Z^| at K = 3, 9, 25: {:.4}, {:.4}, {:.4}", errors[0], errors[1], errors[2]),
    )
}

/// First time at which a `(seconds, best f)` trace reaches `threshold`.
fn time_to(trace: &[(f64, f64)], threshold: f64) -> Option<f64> {
    trace.iter().find(|(_, f)| *f >= threshold).map(|(t, _)| *t)
}

fn c10_speed_accuracy() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in SWEEP {
        let mut wins = 0;
        for (inst, seed) in mode_instances(c) {
            let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
            let threshold = exact.mode_value - 0.02 * exact.mode_value.abs();
            let start = Instant::now();
            let (sol, frame) = solve_m4(&inst, &SolverConfig::with_seed(seed)).unwrap();
            let solve_time = start.elapsed().as_secs_f64();
            let batch = round_batch(&sol.v, &frame, &inst, 1000, derive_seed(seed, 1)).unwrap();
            let m4 = time_to(&batch.trace, threshold).map(|t| t + solve_time);
            let ais = ais_estimate(&inst, &AisConfig::multiclass_default(derive_seed(seed, 2))).unwrap();
            let baseline = time_to(&ais.trace, threshold);
            let win = match (m4, baseline) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                _ => false,
            };
            wins += usize::from(win);
        }
        ok &= wins >= 80;
        parts.push(format!("c={c}: {wins}"));
    }
    (ok, format!("M4 reaches 2% error first on (of 100) {}", parts.join(", ")))
}

fn c11_gibbs_stationarity() -> Outcome {
    let (n, k) = (6, 4);
    let inst = generate(&GenSpec::complete(n, k, 0.5, 1100)).unwrap();
    let truth = exact_marginals(&inst, DEFAULT_CAP).unwrap();
    let (burn_in, thin, draws) = (1000, 10, 40_000);
    let mut rng = stream_rng(1101, 0);
    let mut x = Configuration::uniform(n);
    for _ in 0..burn_in {
        x = gibbs_sweep(&inst, &x, 1.0, 1, &mut rng).unwrap();
    }
    let mut counts = vec![vec![0usize; k]; n];
    for _ in 0..draws {
        x = gibbs_sweep(&inst, &x, 1.0, thin, &mut rng).unwrap();
        for i in 0..n {
            counts[i][x.label(i)] += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for l in 0..k {
            let p = truth[i][l];
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let dev = (counts[i][l] as f64 / draws as f64 - p).abs() / sigma;
            worst = worst.max(dev);
        }
    }
    (worst <= 3.0, format!("max marginal deviation {worst:.2} sigma over {} cells, {draws} draws", n * k))
}

fn c12_segmentation() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let img = pnm::read_ppm(&data.join("scene.ppm")).unwrap();
    let ann = pnm::read_pgm(&data.join("scene_annotation.pgm")).unwrap();
    let prior = build_unary(&ann.pixels, 3, 0.95).unwrap();
    let features = PixelFeatures::from_image(&img);
    let cfg = SegmentConfig { seed: 12, ..SegmentConfig::default() };
    let run = || {
        let seg = segment(&features, &prior, &KernelParams::default(), &cfg).unwrap();
        pnm::encode_pgm(&seg.label_image())
    };
    let (first, second) = (run(), run());
    let labels = pnm::decode_pgm(&first).unwrap().pixels;
    let (mut agree, mut total) = (0, 0);
    for (&a, &l) in ann.pixels.iter().zip(&labels) {
        if a > 0 {
            total += 1;
            agree += usize::from(a == l);
        }
    }
    let frac = agree as f64 / total as f64;
    let identical = first == second;
    (
        frac >= 0.99 && identical,
        format!("seed agreement {agree}/{total} = {frac:.4}, rerun byte-identical: {identical}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("bijection exactness", c1_bijection),
        ("block-matrix equivalence", c2_block_equivalence),
        ("M4 monotonicity and dominance", c3_m4_monotone_dominant),
        ("M4+ feasibility and dominance", c4_m4_plus_feasible),
        ("mode quality", c5_mode_quality),
        ("mass coverage", c6_mass_coverage),
        ("estimator unbiasedness", c7_unbiasedness),
        ("estimator degenerate exactness", c8_degenerate_exactness),
        ("AIS temperature trend", c9_ais_trend),
        ("speed versus accuracy", c10_speed_accuracy),
        ("Gibbs stationarity", c11_gibbs_stationarity),
        ("segmentation regression", c12_segmentation),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let id = format!("{}", idx + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = check();
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {id:>2} {name}: {detail} [{secs:.1} s]", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
