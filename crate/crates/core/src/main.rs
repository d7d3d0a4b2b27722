use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mixmrf::ais::ais_estimate;
use mixmrf::exact::{covered_buckets, enumerate_exact, enumerate_exact_with_table, mass_covered_with};
use mixmrf::experiment::{self, ExperimentSpec, Method, MethodParams, Preset, SegmentJob, Task};
use mixmrf::io::{read_instance, write_atomic, write_json};
use mixmrf::partition::estimate_z;
use mixmrf::rng::derive_seed;
use mixmrf::rounding::round_batch;
use mixmrf::segmentation::{overlay, pnm, KernelParams, SegmentConfig, DEFAULT_PIXEL_CAP};
use mixmrf::Result;

#[derive(Parser)]
#[command(name = "mixmrf", version, about = "Low-rank relaxations for k-class pairwise MRFs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded instances at a target coupling strength.
    Gen(GenArgs),
    /// Approximate the mode of one instance.
    Mode(ModeArgs),
    /// Estimate log Z by rounding-based importance sampling.
    Partition(PartitionArgs),
    /// Annealed importance sampling baseline.
    Ais(AisArgs),
    /// Exact mode and log Z by enumeration.
    Exact(ExactArgs),
    /// Probability mass covered by the distinct rounded samples.
    Mass(MassArgs),
    /// Dense-CRF image segmentation from seed annotations.
    Segment(SegmentArgs),
    /// Run a bench preset or an experiment spec file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "complete")]
    graph: String,
    #[arg(long = "cs", value_delimiter = ',', required = true)]
    coupling_strengths: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed0: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Working dimension override.
    #[arg(long = "d")]
    d: Option<usize>,
    /// M4+ block size.
    #[arg(long)]
    block_size: Option<usize>,
}

#[derive(Args, Clone)]
struct AisFlags {
    /// Number of temperatures; 25 for k = 2, else 3.
    #[arg(long = "K")]
    temperatures: Option<usize>,
    #[arg(long, default_value_t = 1)]
    cycles: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

fn method_params(solver: &SolverArgs, rounding_iters: usize, ais: Option<&AisFlags>) -> MethodParams {
    let mut p = MethodParams {
        rounding_iters,
        max_iters: solver.max_iters,
        rel_tol: solver.rel_tol,
        d_override: solver.d,
        block_size: solver.block_size,
        ..MethodParams::default()
    };
    if let Some(a) = ais {
        p.temperatures = a.temperatures;
        p.cycles = a.cycles;
        p.samples = a.samples;
    }
    p
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, default_value = "m4")]
    method: Method,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1000)]
    rounding_iters: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    ais: AisFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    instance: PathBuf,
    /// m4 or m4plus.
    #[arg(long, default_value = "m4")]
    method: Method,
    #[arg(long, default_value_t = 1000)]
    rounding_iters: usize,
    /// Also report the exact log Z.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AisArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    ais: AisFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Checkpoint CSV (time, best f, partial log Z).
    #[arg(long)]
    checkpoints: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Also write every configuration and its f to `<out>.csv`.
    #[arg(long)]
    full_table: bool,
    #[arg(long, default_value_t = mixmrf::exact::DEFAULT_CAP)]
    cap: u128,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MassArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "m4")]
    method: Method,
    #[arg(long, default_value_t = 1000)]
    rounding_iters: usize,
    #[arg(long, default_value_t = 20)]
    buckets: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    image: PathBuf,
    /// PGM with 0 for unlabelled pixels and 1..=k for seeds.
    #[arg(long)]
    annotation: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Unary weight; 300 when absent.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    w_app: f64,
    #[arg(long, default_value_t = 40.0)]
    theta_alpha: f64,
    #[arg(long, default_value_t = 13.0)]
    theta_beta: f64,
    #[arg(long, default_value_t = 1.0)]
    w_smooth: f64,
    #[arg(long, default_value_t = 3.0)]
    theta_gamma: f64,
    /// Evaluate the kernel on every pixel pair.
    #[arg(long)]
    no_truncate: bool,
    #[arg(long = "d")]
    d: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 20)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 16)]
    rounding_iters: usize,
    #[arg(long, default_value_t = DEFAULT_PIXEL_CAP)]
    pixel_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Colour overlay of the labels on the image.
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Run summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<Preset>,
    /// Experiment spec JSON; its own `out` is replaced by `--out`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Instances per coupling strength for presets.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Mode(a) => mode(a),
        Command::Partition(a) => partition(a),
        Command::Ais(a) => ais(a),
        Command::Exact(a) => exact(a),
        Command::Mass(a) => mass(a),
        Command::Segment(a) => segment(a),
        Command::Bench(a) => bench(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let spec = ExperimentSpec {
        task: Task::Generate,
        methods: Vec::new(),
        n: a.n,
        k: a.k,
        graph: a.graph,
        coupling_strengths: a.coupling_strengths,
        seeds: a.seeds,
        seed0: a.seed0,
        instances: Vec::new(),
        params: MethodParams::default(),
        buckets: 1,
        segment: None,
        out: a.out,
    };
    let summary = experiment::run(&spec)?;
    println!("wrote {} instances to {}", summary.result_files.len(), spec.out.display());
    Ok(())
}

fn mode(a: ModeArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let params = method_params(&a.solver, a.rounding_iters, Some(&a.ais));
    let out = experiment::find_mode(&inst, a.method, &params, a.solver.seed)?;
    let mut payload = json!({
        "method": a.method,
        "instance": a.instance,
        "seed": a.solver.seed,
        "config": params,
        "best": out.best.one_based(),
        "best_value": out.best_value,
        "trace": out.trace,
        "wall_time": out.wall_time,
    });
    if let Some(r) = &out.relaxed {
        payload["relaxed_objective"] = json!(r.objective);
        payload["relaxed_embedded"] = json!(inst.embedding_map().to_embedded(r.objective));
        payload["iterations"] = json!(r.iterations);
        payload["converged"] = json!(r.converged);
        payload["d"] = json!(r.frame.d());
    }
    if let Some(b) = &out.batch {
        payload["unique_samples"] = json!(b.unique_set.len());
    }
    write_json(&a.out, &payload)?;
    println!("best f = {:.6} ({} s)", out.best_value, out.wall_time);
    Ok(())
}

fn partition(a: PartitionArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let params = method_params(&a.solver, a.rounding_iters, None);
    let start = Instant::now();
    let relaxed = experiment::relax(&inst, a.method, &params, a.solver.seed)?;
    let est = estimate_z(&inst, &relaxed.v, &relaxed.frame, a.rounding_iters, derive_seed(a.solver.seed, 1))?;
    let wall_time = start.elapsed().as_secs_f64();
    let exact = if a.exact { Some(enumerate_exact(&inst, params.exact_cap as u128)?.log_z) } else { None };
    let mut payload = est.to_json(exact);
    payload["method"] = json!(a.method);
    payload["instance"] = json!(a.instance);
    payload["seed"] = json!(a.solver.seed);
    payload["config"] = json!(params);
    payload["wall_time"] = json!(wall_time);
    write_json(&a.out, &payload)?;
    println!("log Z ~ {:.6} (cluster {})", est.log_z_hat, est.cluster_size);
    Ok(())
}

fn ais(a: AisArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let mut cfg = mixmrf::ais::AisConfig::default_for(inst.k(), a.seed);
    cfg.temperatures = a.ais.temperatures.unwrap_or(cfg.temperatures);
    cfg.num_cycles = a.ais.cycles;
    cfg.num_samples = a.ais.samples;
    let res = ais_estimate(&inst, &cfg)?;
    if let Some(path) = &a.checkpoints {
        write_atomic(path, &res.checkpoints_csv()?)?;
    }
    write_json(
        &a.out,
        &json!({
            "instance": a.instance,
            "config": cfg,
            "log_z_hat": res.log_z_hat,
            "best": res.best_config.one_based(),
            "best_value": res.best_value,
            "trace": res.trace,
            "wall_time": res.wall_time,
        }),
    )?;
    println!("log Z ~ {:.6}, best f = {:.6}", res.log_z_hat, res.best_value);
    Ok(())
}

fn exact(a: ExactArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let summary = if a.full_table { enumerate_exact_with_table(&inst, a.cap)? } else { enumerate_exact(&inst, a.cap)? };
    if a.full_table {
        write_atomic(&a.out.with_extension("csv"), &summary.table_csv()?)?;
    }
    write_json(&a.out, &summary.to_json(&inst))?;
    println!("log Z = {:.10}, mode f = {:.6}", summary.log_z, summary.mode_value);
    Ok(())
}

fn mass(a: MassArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let params = method_params(&a.solver, a.rounding_iters, None);
    let relaxed = experiment::relax(&inst, a.method, &params, a.solver.seed)?;
    let batch = round_batch(&relaxed.v, &relaxed.frame, &inst, a.rounding_iters, derive_seed(a.solver.seed, 1))?;
    let log_z = enumerate_exact(&inst, params.exact_cap as u128)?.log_z;
    let covered = mass_covered_with(&inst, log_z, &batch.unique_set);
    let buckets = covered_buckets(&inst, a.buckets, &batch.unique_set, params.exact_cap as u128)?;
    write_json(
        &a.out,
        &json!({
            "method": a.method,
            "instance": a.instance,
            "config": params,
            "unique_samples": batch.unique_set.len(),
            "mass_covered": covered,
            "buckets": buckets,
        }),
    )?;
    println!("{} distinct samples cover {:.4} of the mass", batch.unique_set.len(), covered);
    Ok(())
}

fn segment(a: SegmentArgs) -> Result<()> {
    let job = SegmentJob {
        image: a.image,
        annotation: a.annotation,
        k: a.k,
        confidence: a.confidence,
        theta: a.theta,
        kernel: KernelParams {
            w_app: a.w_app,
            theta_alpha: a.theta_alpha,
            theta_beta: a.theta_beta,
            w_smooth: a.w_smooth,
            theta_gamma: a.theta_gamma,
            truncate: !a.no_truncate,
        },
        config: SegmentConfig {
            d: a.d,
            alpha: a.alpha,
            max_iters: a.max_iters,
            rel_tol: a.rel_tol,
            rounding_iters: a.rounding_iters,
            pixel_cap: a.pixel_cap,
            seed: a.seed,
        },
    };
    let (labels, seg, summary) = experiment::run_segment(&job)?;
    pnm::write_pgm(&a.out, &labels)?;
    if let Some(path) = &a.overlay {
        let img = pnm::read_ppm(&job.image)?;
        pnm::write_ppm(path, &overlay(&img, &seg.labels))?;
    }
    if let Some(path) = &a.summary {
        write_json(path, &summary)?;
    }
    println!(
        "{} iterations, seed agreement {:.4}, {:.1} s",
        seg.iterations, summary["annotation_agreement"], summary["wall_time"]
    );
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let spec = match (&a.preset, &a.spec) {
        (Some(p), _) => experiment::preset_spec(*p, a.seeds, &a.out),
        (None, Some(path)) => {
            let mut spec = ExperimentSpec::from_json(&std::fs::read_to_string(path)?)?;
            spec.out = a.out.clone();
            spec
        }
        (None, None) => unreachable!("clap requires one of --preset or --spec"),
    };
    let summary = experiment::run(&spec)?;
    for (method, rows) in &summary.aggregates {
        for r in rows {
            println!(
                "{method:>8}  c = {:<4}  metric {:.6} +- {:.6}  time {:.4} s",
                r.coupling_strength, r.mean_metric, r.std, r.mean_wall_time
            );
        }
    }
    print_paths(&summary.aggregate_files);
    Ok(())
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}
