//! Method pipelines and the sweep harness behind the command line.
//!
//! Seeds: for an instance seed `s`, solvers start from `s`, rounding uses
//! `derive_seed(s, 1)` and AIS uses `derive_seed(s, 2)`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ais::{ais_estimate, AisConfig};
use crate::error::{Error, Result};
use crate::exact::{covered_buckets, enumerate_exact, mass_covered_with, DEFAULT_CAP};
use crate::generate::{generate, GenSpec, GraphKind};
use crate::io::{read_instance, write_atomic, write_instance, write_json};
use crate::mixing::{solve_m4, SolverConfig};
use crate::mixing_plus::{default_block_size, solve_m4_plus};
use crate::mrf::{Configuration, MrfInstance};
use crate::partition::estimate_z;
use crate::rng::derive_seed;
use crate::rounding::{round_batch, RoundingBatch};
use crate::segmentation::{build_unary, pnm, segment, KernelParams, PixelFeatures, SegmentConfig};
use crate::simplex::SimplexFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    M4,
    M4Plus,
    Ais,
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::M4 => "m4",
            Method::M4Plus => "m4plus",
            Method::Ais => "ais",
            Method::Exact => "exact",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m4" => Ok(Method::M4),
            "m4plus" => Ok(Method::M4Plus),
            "ais" => Ok(Method::Ais),
            "exact" => Ok(Method::Exact),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?} (expected m4, m4plus, ais or exact)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Mode,
    Partition,
    Segment,
    Generate,
    MassCoverage,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Mode => "mode",
            Task::Partition => "partition",
            Task::Segment => "segment",
            Task::Generate => "generate",
            Task::MassCoverage => "mass_coverage",
        })
    }
}

/// Settings shared by every method call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodParams {
    pub rounding_iters: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub d_override: Option<usize>,
    /// Block size for M4+; `⌈rank_bound / k⌉` when absent.
    pub block_size: Option<usize>,
    /// AIS temperature count; 25 for `k = 2`, otherwise 3, when absent.
    #[serde(rename = "K")]
    pub temperatures: Option<usize>,
    pub cycles: usize,
    pub samples: usize,
    pub exact_cap: u64,
}

impl Default for MethodParams {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            rounding_iters: 1000,
            max_iters: solver.max_iters,
            rel_tol: solver.rel_tol,
            d_override: None,
            block_size: None,
            temperatures: None,
            cycles: 1,
            samples: 100,
            exact_cap: DEFAULT_CAP as u64,
        }
    }
}

impl MethodParams {
    pub fn solver(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            seed,
            d_override: self.d_override,
        }
    }

    pub fn ais(&self, k: usize, seed: u64) -> AisConfig {
        let base = AisConfig::default_for(k, derive_seed(seed, 2));
        AisConfig {
            temperatures: self.temperatures.unwrap_or(base.temperatures),
            num_cycles: self.cycles,
            num_samples: self.samples,
            ..base
        }
    }
}

/// Unit vectors from either relaxation, with the frame they live against.
#[derive(Debug, Clone)]
pub struct Relaxed {
    pub v: Vec<f64>,
    pub frame: SimplexFrame,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves the M4 or M4+ relaxation.
pub fn relax(inst: &MrfInstance, method: Method, params: &MethodParams, seed: u64) -> Result<Relaxed> {
    let cfg = params.solver(seed);
    match method {
        Method::M4 => {
            let (sol, frame) = solve_m4(inst, &cfg)?;
            Ok(Relaxed {
                objective: sol.objective_value,
                iterations: sol.iterations_used,
                converged: sol.converged,
                v: sol.v,
                frame,
            })
        }
        Method::M4Plus => {
            let m = params.block_size.unwrap_or_else(|| default_block_size(inst.n(), inst.k()));
            let (sol, proj) = solve_m4_plus(inst, &cfg, m)?;
            Ok(Relaxed {
                objective: sol.objective_value,
                iterations: sol.iterations_used,
                converged: sol.converged,
                v: sol.v,
                frame: proj.frame().clone(),
            })
        }
        _ => Err(Error::InvalidParameter(format!("{method} has no relaxation"))),
    }
}

#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub best: Configuration,
    pub best_value: f64,
    pub relaxed: Option<Relaxed>,
    pub batch: Option<RoundingBatch>,
    /// Seconds from the start of the call, best value so far.
    pub trace: Vec<(f64, f64)>,
    pub wall_time: f64,
}

/// Mode estimate by relaxation plus rounding, AIS, or enumeration.
pub fn find_mode(inst: &MrfInstance, method: Method, params: &MethodParams, seed: u64) -> Result<ModeOutcome> {
    let start = Instant::now();
    match method {
        Method::M4 | Method::M4Plus => {
            let relaxed = relax(inst, method, params, seed)?;
            let offset = start.elapsed().as_secs_f64();
            let batch = round_batch(&relaxed.v, &relaxed.frame, inst, params.rounding_iters, derive_seed(seed, 1))?;
            let wall_time = start.elapsed().as_secs_f64();
            Ok(ModeOutcome {
                best: batch.best.clone(),
                best_value: batch.best_value,
                trace: batch.trace.iter().map(|&(t, f)| (t + offset, f)).collect(),
                relaxed: Some(relaxed),
                batch: Some(batch),
                wall_time,
            })
        }
        Method::Ais => {
            let res = ais_estimate(inst, &params.ais(inst.k(), seed))?;
            Ok(ModeOutcome {
                best: res.best_config,
                best_value: res.best_value,
                relaxed: None,
                batch: None,
                trace: res.trace,
                wall_time: start.elapsed().as_secs_f64(),
            })
        }
        Method::Exact => {
            let summary = enumerate_exact(inst, params.exact_cap as u128)?;
            let wall_time = start.elapsed().as_secs_f64();
            Ok(ModeOutcome {
                best: summary.mode_config,
                best_value: summary.mode_value,
                relaxed: None,
                batch: None,
                trace: vec![(wall_time, summary.mode_value)],
                wall_time,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOutcome {
    pub log_z_hat: f64,
    pub cluster_size: Option<usize>,
    pub wall_time: f64,
}

/// `log Z` estimate from the rounded-cluster estimator, AIS, or enumeration.
pub fn estimate_log_z(inst: &MrfInstance, method: Method, params: &MethodParams, seed: u64) -> Result<PartitionOutcome> {
    let start = Instant::now();
    let (log_z_hat, cluster_size) = match method {
        Method::M4 | Method::M4Plus => {
            let relaxed = relax(inst, method, params, seed)?;
            let est = estimate_z(inst, &relaxed.v, &relaxed.frame, params.rounding_iters, derive_seed(seed, 1))?;
            (est.log_z_hat, Some(est.cluster_size))
        }
        Method::Ais => (ais_estimate(inst, &params.ais(inst.k(), seed))?.log_z_hat, None),
        Method::Exact => (enumerate_exact(inst, params.exact_cap as u128)?.log_z, None),
    };
    Ok(PartitionOutcome {
        log_z_hat,
        cluster_size,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Segmentation run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentJob {
    pub image: PathBuf,
    pub annotation: PathBuf,
    pub k: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub kernel: KernelParams,
    #[serde(default)]
    pub config: SegmentConfig,
}

fn default_confidence() -> f64 {
    0.95
}

/// Runs a segmentation job; returns the one-based label map and a JSON
/// summary.
pub fn run_segment(job: &SegmentJob) -> Result<(pnm::GrayImage, crate::segmentation::Segmentation, Value)> {
    let img = pnm::read_ppm(&job.image)?;
    let ann = pnm::read_pgm(&job.annotation)?;
    if (ann.width, ann.height) != (img.width, img.height) {
        return Err(Error::Dimension(format!(
            "annotation is {}x{}, image is {}x{}",
            ann.width, ann.height, img.width, img.height
        )));
    }
    let mut prior = build_unary(&ann.pixels, job.k, job.confidence)?;
    if let Some(theta) = job.theta {
        prior.theta = theta;
    }
    let start = Instant::now();
    let seg = segment(&PixelFeatures::from_image(&img), &prior, &job.kernel, &job.config)?;
    let wall_time = start.elapsed().as_secs_f64();
    let (mut kept, mut annotated) = (0usize, 0usize);
    for (&a, &l) in ann.pixels.iter().zip(&seg.labels) {
        if a > 0 {
            annotated += 1;
            kept += usize::from(a as u16 == l + 1);
        }
    }
    let agreement = if annotated == 0 { 1.0 } else { kept as f64 / annotated as f64 };
    let summary = json!({
        "task": "segment",
        "config": job,
        "theta": prior.theta,
        "width": seg.width,
        "height": seg.height,
        "iterations": seg.iterations,
        "converged": seg.converged,
        "final_alpha": seg.final_alpha,
        "relaxed_objective": seg.objective_trace.last(),
        "discrete_objective": seg.discrete_value,
        "annotated": annotated,
        "annotation_agreement": agreement,
        "wall_time": wall_time,
    });
    Ok((seg.label_image(), seg, summary))
}

/// A sweep over coupling strengths and seeds, or over instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub task: Task,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_graph")]
    pub graph: String,
    #[serde(default)]
    pub coupling_strengths: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub seed0: u64,
    /// Instance files to use instead of generated ones.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub params: MethodParams,
    /// Bucket count for the mass-coverage task.
    #[serde(default = "default_buckets")]
    pub buckets: usize,
    #[serde(default)]
    pub segment: Option<SegmentJob>,
    /// Defaults to the working directory.
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_graph() -> String {
    "complete".into()
}

fn default_seeds() -> usize {
    1
}

fn default_buckets() -> usize {
    20
}

fn default_out() -> PathBuf {
    PathBuf::from(".")
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.coupling_strengths.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParameter(format!("coupling strengths must be nonnegative, got {c}")));
        }
        if let Some(missing) = self.instances.iter().find(|p| !p.is_file()) {
            return Err(Error::InvalidParameter(format!("instance file {} does not exist", missing.display())));
        }
        match self.task {
            Task::Segment => {
                if self.segment.is_none() {
                    return Err(Error::InvalidParameter("the segment task needs a segment job".into()));
                }
                return Ok(());
            }
            Task::Generate => {}
            _ => {
                if self.methods.is_empty() {
                    return Err(Error::InvalidParameter(format!("the {} task needs at least one method", self.task)));
                }
            }
        }
        if self.instances.is_empty() {
            if self.coupling_strengths.is_empty() || self.seeds == 0 {
                return Err(Error::InvalidParameter("a sweep needs coupling strengths and seeds >= 1".into()));
            }
            if self.n == 0 || self.k < 2 {
                return Err(Error::InvalidParameter(format!("generated instances need n >= 1 and k >= 2, got n = {}, k = {}", self.n, self.k)));
            }
            self.graph.parse::<GraphKind>()?;
        }
        if self.task == Task::MassCoverage && self.methods.contains(&Method::Ais) {
            return Err(Error::InvalidParameter("mass coverage is defined for rounding methods and exact only".into()));
        }
        Ok(())
    }
}

/// One aggregate row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub coupling_strength: f64,
    pub mean_metric: f64,
    pub std: f64,
    pub mean_wall_time: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub result_files: Vec<PathBuf>,
    pub aggregate_files: Vec<PathBuf>,
    /// `(method, rows)` in the order of `ExperimentSpec::methods`.
    pub aggregates: Vec<(String, Vec<AggregateRow>)>,
}

struct Job {
    label: String,
    coupling_strength: f64,
    seed: u64,
    descriptor: Value,
    instance: MrfInstance,
}

fn jobs(spec: &ExperimentSpec) -> Result<Vec<Job>> {
    if !spec.instances.is_empty() {
        return spec
            .instances
            .iter()
            .enumerate()
            .map(|(idx, path)| {
                let instance = read_instance(path)?;
                let cs = instance.coupling_strength()?;
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| idx.to_string());
                let seed = spec.seed0 + idx as u64;
                Ok(Job {
                    label: stem,
                    coupling_strength: cs,
                    seed,
                    descriptor: json!({ "path": path, "seed": seed }),
                    instance,
                })
            })
            .collect();
    }
    let graph: GraphKind = spec.graph.parse()?;
    let mut out = Vec::new();
    for &c in &spec.coupling_strengths {
        for s in 0..spec.seeds as u64 {
            let seed = spec.seed0 + s;
            let gen = GenSpec {
                n: spec.n,
                k: spec.k,
                graph,
                target_cs: c,
                seed,
            };
            out.push(Job {
                label: format!("c{c}-s{seed}"),
                coupling_strength: c,
                seed,
                descriptor: json!({ "n": spec.n, "k": spec.k, "graph": spec.graph, "coupling_strength": c, "seed": seed }),
                instance: generate(&gen)?,
            });
        }
    }
    Ok(out)
}

/// `(metric name, metric, wall time, method-specific details)`.
fn evaluate(spec: &ExperimentSpec, method: Method, job: &Job) -> Result<(&'static str, f64, f64, Value)> {
    let inst = &job.instance;
    let p = &spec.params;
    let cap = p.exact_cap as u128;
    let reference = || enumerate_exact(inst, cap);
    match spec.task {
        Task::Mode => {
            let out = find_mode(inst, method, p, job.seed)?;
            let mut details = json!({
                "best": out.best.one_based(),
                "best_value": out.best_value,
            });
            if let Some(r) = &out.relaxed {
                details["relaxed_objective"] = json!(r.objective);
                details["iterations"] = json!(r.iterations);
                details["converged"] = json!(r.converged);
                details["d"] = json!(r.frame.d());
            }
            if let Some(b) = &out.batch {
                details["unique_samples"] = json!(b.unique_set.len());
            }
            match reference() {
                Ok(exact) => {
                    let rel = (exact.mode_value - out.best_value) / exact.mode_value.abs().max(f64::MIN_POSITIVE);
                    details["exact_mode_value"] = json!(exact.mode_value);
                    Ok(("relative_mode_error", rel, out.wall_time, details))
                }
                Err(Error::EnumerationCap { .. }) => Ok(("best_value", out.best_value, out.wall_time, details)),
                Err(e) => Err(e),
            }
        }
        Task::Partition => {
            let out = estimate_log_z(inst, method, p, job.seed)?;
            let exact = reference()?;
            let details = json!({
                "log_z_hat": out.log_z_hat,
                "exact_log_z": exact.log_z,
                "cluster_size": out.cluster_size,
            });
            Ok(("abs_log_z_error", (exact.log_z - out.log_z_hat).abs(), out.wall_time, details))
        }
        Task::MassCoverage => {
            let start = Instant::now();
            let exact = reference()?;
            let (covered, buckets, unique) = match method {
                Method::Exact => (1.0, Value::Null, None),
                _ => {
                    let relaxed = relax(inst, method, p, job.seed)?;
                    let batch = round_batch(&relaxed.v, &relaxed.frame, inst, p.rounding_iters, derive_seed(job.seed, 1))?;
                    let covered = mass_covered_with(inst, exact.log_z, &batch.unique_set);
                    let buckets = covered_buckets(inst, spec.buckets, &batch.unique_set, cap)?;
                    (covered, serde_json::to_value(buckets)?, Some(batch.unique_set.len()))
                }
            };
            let details = json!({ "unique_samples": unique, "buckets": buckets });
            Ok(("mass_covered", covered, start.elapsed().as_secs_f64(), details))
        }
        Task::Generate | Task::Segment => unreachable!("handled by run"),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Groups `(coupling strength, metric, wall time)` records by coupling
/// strength in first-seen order.
pub fn aggregate(records: &[(f64, f64, f64)]) -> Vec<AggregateRow> {
    let mut order: Vec<f64> = Vec::new();
    for r in records {
        if !order.iter().any(|c| c.to_bits() == r.0.to_bits()) {
            order.push(r.0);
        }
    }
    order
        .into_iter()
        .map(|c| {
            let metrics: Vec<f64> = records.iter().filter(|r| r.0.to_bits() == c.to_bits()).map(|r| r.1).collect();
            let times: Vec<f64> = records.iter().filter(|r| r.0.to_bits() == c.to_bits()).map(|r| r.2).collect();
            let (mean_metric, std) = mean_std(&metrics);
            AggregateRow {
                coupling_strength: c,
                mean_metric,
                std,
                mean_wall_time: mean_std(&times).0,
            }
        })
        .collect()
}

fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

/// Executes a spec, writing one JSON per (instance, method) and one
/// aggregate CSV per method into `spec.out`.
pub fn run(spec: &ExperimentSpec) -> Result<RunSummary> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.out)?;
    let mut summary = RunSummary::default();

    if spec.task == Task::Segment {
        let job = spec.segment.as_ref().expect("validated");
        let (labels, _, mut json) = run_segment(job)?;
        let pgm = spec.out.join("segment-labels.pgm");
        pnm::write_pgm(&pgm, &labels)?;
        json["labels"] = json!(pgm);
        let path = spec.out.join("segment.json");
        write_json(&path, &json)?;
        let row = AggregateRow {
            coupling_strength: 0.0,
            mean_metric: json["annotation_agreement"].as_f64().unwrap_or(f64::NAN),
            std: 0.0,
            mean_wall_time: json["wall_time"].as_f64().unwrap_or(f64::NAN),
        };
        let csv = spec.out.join("segment.csv");
        write_aggregate(&csv, &[row])?;
        summary.result_files.push(path);
        summary.aggregate_files.push(csv);
        summary.aggregates.push(("segment".into(), vec![row]));
        return Ok(summary);
    }

    let jobs = jobs(spec)?;
    if spec.task == Task::Generate {
        let mut records = Vec::new();
        for job in &jobs {
            let path = spec.out.join(format!("inst-{}.json", job.label));
            write_instance(&path, &job.instance)?;
            records.push((job.coupling_strength, job.instance.coupling_strength()?, 0.0));
            summary.result_files.push(path);
        }
        let rows = aggregate(&records);
        let csv = spec.out.join("generate.csv");
        write_aggregate(&csv, &rows)?;
        summary.aggregate_files.push(csv);
        summary.aggregates.push(("generate".into(), rows));
        return Ok(summary);
    }

    for &method in &spec.methods {
        let results: Vec<Result<(PathBuf, (f64, f64, f64))>> = jobs
            .par_iter()
            .map(|job| {
                let (name, metric, wall_time, details) = evaluate(spec, method, job)?;
                let payload = json!({
                    "task": spec.task,
                    "method": method,
                    "instance": job.descriptor,
                    "config": spec.params,
                    "metric_name": name,
                    "metric": metric,
                    "result": details,
                    "wall_time": wall_time,
                });
                let path = spec.out.join(format!("{}-{}-{}.json", spec.task, method, job.label));
                write_json(&path, &payload)?;
                Ok((path, (job.coupling_strength, metric, wall_time)))
            })
            .collect();
        let mut records = Vec::with_capacity(results.len());
        for r in results {
            let (path, rec) = r?;
            summary.result_files.push(path);
            records.push(rec);
        }
        let rows = aggregate(&records);
        let csv = spec.out.join(format!("{}-{}.csv", spec.task, method));
        write_aggregate(&csv, &rows)?;
        summary.aggregate_files.push(csv);
        summary.aggregates.push((method.to_string(), rows));
    }
    Ok(summary)
}

/// Desk-scale versions of the published experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Mode quality of both relaxations and AIS, `k = 5`, `n = 7`, `c = 2.5`.
    Fig3a,
    /// Relative mode error across coupling strengths, `k = 5`, `n = 7`.
    Fig3b,
    /// Mass covered by 1000 roundings, `k = 5`, `n = 7`, `c = 2.5`.
    Fig3c,
    /// `|log Z - log Ẑ|` across coupling strengths, `k = 2`, `n = 20`.
    Fig4,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3a" => Ok(Preset::Fig3a),
            "fig3b" => Ok(Preset::Fig3b),
            "fig3c" => Ok(Preset::Fig3c),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(Error::InvalidParameter(format!("unknown preset {s:?} (expected fig3a, fig3b, fig3c or fig4)"))),
        }
    }
}

const SWEEP: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];

/// The experiment for a preset with `seeds` instances per coupling strength.
pub fn preset_spec(preset: Preset, seeds: usize, out: &Path) -> ExperimentSpec {
    let base = ExperimentSpec {
        task: Task::Mode,
        methods: vec![Method::M4, Method::M4Plus],
        n: 7,
        k: 5,
        graph: default_graph(),
        coupling_strengths: vec![2.5],
        seeds,
        seed0: 0,
        instances: Vec::new(),
        params: MethodParams::default(),
        buckets: default_buckets(),
        segment: None,
        out: out.to_path_buf(),
    };
    match preset {
        Preset::Fig3a => ExperimentSpec {
            methods: vec![Method::M4, Method::M4Plus, Method::Ais],
            ..base
        },
        Preset::Fig3b => ExperimentSpec {
            coupling_strengths: SWEEP.to_vec(),
            ..base
        },
        Preset::Fig3c => ExperimentSpec {
            task: Task::MassCoverage,
            methods: vec![Method::M4],
            ..base
        },
        Preset::Fig4 => ExperimentSpec {
            task: Task::Partition,
            methods: vec![Method::M4, Method::Ais],
            n: 20,
            k: 2,
            coupling_strengths: SWEEP.to_vec(),
            params: MethodParams {
                rounding_iters: 500,
                ..MethodParams::default()
            },
            ..base
        },
    }
}
