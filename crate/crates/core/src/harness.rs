//! Config-driven experiment runner.
//!
//! An [`ExperimentConfig`] is a flat TOML file. One master seed fixes the
//! whole experiment: it fans out to one stream per repetition and, within a
//! repetition, to one stream per algorithm keyed by the algorithm's fixed
//! tag, so adding or removing an algorithm never changes another's draws.
//! Repetitions run in parallel and are collected in order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gp::{fit_hyperparameters, FitBounds, ObservationSet};
use crate::kernels::KernelSpec;
use crate::optimizers::{run, run_observed, Algorithm, BetaSchedule, ReportingRule, RunConfig, RunRecord};
use crate::robust_sets::{
    build_neighborhoods, group_reduction, parameter_reduction, DistanceSpec, FiniteDomain, PerturbationSet,
};
use crate::testbed::{f_poly, running_example_1d, sample_rkhs_function, valley_instance, ObjectiveTable, POLY_BOUNDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Poly,
    RkhsSample,
    Valley,
    #[serde(rename = "running-1d")]
    Running1d,
    GroupSynthetic,
    ParameterSynthetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    /// 50×50 polynomial grid, 20 repetitions.
    Ci,
    /// 100×100 polynomial grid, 100 repetitions.
    Full,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Profile::Ci),
            "full" => Ok(Profile::Full),
            other => Err(Error::Config(format!(
                "unknown profile `{other}` (expected ci or full)"
            ))),
        }
    }
}

fn default_one() -> f64 {
    1.0
}
fn default_centers() -> usize {
    20
}
fn default_eta() -> f64 {
    0.25
}
fn default_width() -> f64 {
    0.1
}
fn default_groups() -> usize {
    4
}
fn default_theta() -> usize {
    5
}
fn default_budget() -> usize {
    200
}
fn default_true() -> bool {
    true
}

/// Experiment description. Every key is documented in the README.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveKind,
    pub grid_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_upper: Option<Vec<f64>>,
    pub distance: DistanceSpec,
    pub epsilon: f64,
    pub noise_std: f64,
    pub rounds: usize,
    pub repetitions: usize,
    pub init_points: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub reporting: ReportingRule,
    #[serde(default = "default_true")]
    pub fail_fast: bool,

    // objective parameters
    #[serde(default = "default_one")]
    pub rkhs_bound: f64,
    #[serde(default = "default_centers")]
    pub rkhs_centers: usize,
    #[serde(default = "default_eta")]
    pub valley_eta: f64,
    #[serde(default = "default_width")]
    pub valley_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valley_center: Option<Vec<f64>>,
    #[serde(default = "default_groups")]
    pub groups: usize,
    #[serde(default = "default_theta")]
    pub theta_count: usize,

    // kernel: fixed, or the template of a likelihood fit when fit_presample > 0
    #[serde(default)]
    pub fit_presample: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_threshold: Option<f64>,
    #[serde(default = "default_budget")]
    pub fit_budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_bounds: Option<FitBounds>,

    // tables last so the flat keys above serialize first
    pub kernel: KernelSpec,
    pub beta: BetaSchedule,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm required".into()));
        }
        if self.grid_counts.is_empty() || self.grid_counts.contains(&0) {
            return Err(Error::Config("grid_counts must be non-empty and positive".into()));
        }
        if !(self.noise_std > 0.0) {
            return Err(Error::Config("noise_std must be positive".into()));
        }
        self.beta.validate()
    }

    pub fn apply_profile(&mut self, profile: Profile) {
        let (side, reps) = match profile {
            Profile::Ci => (50, 20),
            Profile::Full => (100, 100),
        };
        if self.objective == ObjectiveKind::Poly {
            self.grid_counts = vec![side, side];
        }
        self.repetitions = reps;
    }

    fn bounds(&self) -> Result<Vec<(f64, f64)>> {
        let p = self.grid_counts.len();
        let default: Vec<(f64, f64)> = match self.objective {
            ObjectiveKind::Poly => POLY_BOUNDS.to_vec(),
            _ => vec![(0.0, 1.0); p],
        };
        let lower = self
            .grid_lower
            .clone()
            .unwrap_or_else(|| default.iter().map(|b| b.0).collect());
        let upper = self
            .grid_upper
            .clone()
            .unwrap_or_else(|| default.iter().map(|b| b.1).collect());
        if lower.len() != p || upper.len() != p {
            return Err(Error::Config(format!(
                "grid bounds must have {p} entries to match grid_counts"
            )));
        }
        Ok(lower.into_iter().zip(upper).collect())
    }
}

/// Derives an independent child seed from `parent` for stream `tag`.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(parent);
    rng.set_stream(tag);
    rng.next_u64()
}

const OBJECTIVE_STREAM: u64 = 1;
const FIT_STREAM: u64 = 2;
const REPETITION_STREAM: u64 = 1 << 20;
const INIT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 100;
const POLICY_STREAM: u64 = 200;

/// The objective of an experiment with its ground truth.
#[derive(Clone, Debug)]
pub struct Problem {
    pub pset: PerturbationSet,
    pub truth: ObjectiveTable,
}

/// Builds the domain, perturbation set and ground-truth table.
pub fn build_problem(config: &ExperimentConfig) -> Result<Problem> {
    let bounds = config.bounds()?;
    let grid = FiniteDomain::grid(&bounds, &config.grid_counts)?;
    let objective_seed = derive_seed(config.seed, OBJECTIVE_STREAM);
    match config.objective {
        ObjectiveKind::Poly => {
            if grid.dim() != 2 {
                return Err(Error::Config("poly objective needs a 2-D grid".into()));
            }
            let pset = build_neighborhoods(grid, config.distance.clone(), config.epsilon)?;
            let truth = crate::testbed::robust_table(&pset, |x| f_poly(x[0], x[1]))?;
            Ok(Problem { pset, truth })
        }
        ObjectiveKind::Running1d => {
            let pset = build_neighborhoods(grid, config.distance.clone(), config.epsilon)?;
            let truth = running_example_1d(&pset)?;
            Ok(Problem { pset, truth })
        }
        ObjectiveKind::Valley => {
            let center = config.valley_center.clone().unwrap_or_else(|| vec![0.5; grid.dim()]);
            let pset = build_neighborhoods(grid, config.distance.clone(), config.epsilon)?;
            let truth = valley_instance(&pset, config.valley_eta, config.valley_width, &center)?;
            Ok(Problem { pset, truth })
        }
        ObjectiveKind::RkhsSample => {
            let f = sample_rkhs_function(
                &config.kernel,
                &grid,
                config.rkhs_bound,
                config.rkhs_centers,
                objective_seed,
            )?;
            let pset = build_neighborhoods(grid, config.distance.clone(), config.epsilon)?;
            let truth = crate::testbed::robust_table(&pset, |x| f.eval(x))?;
            Ok(Problem { pset, truth })
        }
        ObjectiveKind::GroupSynthetic => {
            if config.groups == 0 {
                return Err(Error::Config("groups must be positive".into()));
            }
            let n = grid.len();
            let f = sample_rkhs_function(
                &config.kernel,
                &grid,
                config.rkhs_bound,
                config.rkhs_centers,
                objective_seed,
            )?;
            let labels = (0..n).map(|i| i * config.groups / n).collect();
            let pset = group_reduction(grid.with_groups(labels)?)?;
            let truth = crate::testbed::robust_table(&pset, |x| f.eval(x))?;
            Ok(Problem { pset, truth })
        }
        ObjectiveKind::ParameterSynthetic => {
            let theta = FiniteDomain::grid(&[(0.0, 1.0)], &[config.theta_count.max(1)])?;
            let pset = parameter_reduction(&grid, &theta)?;
            let f = sample_rkhs_function(
                &config.kernel,
                pset.domain(),
                config.rkhs_bound,
                config.rkhs_centers,
                objective_seed,
            )?;
            let truth = crate::testbed::robust_table(&pset, |x| f.eval(x))?;
            Ok(Problem { pset, truth })
        }
    }
}

/// Kernel used by every run: the configured one, or its likelihood fit on a
/// noisy presample of points whose true value exceeds `fit_threshold`.
pub fn resolve_kernel(config: &ExperimentConfig, problem: &Problem) -> Result<KernelSpec> {
    if config.fit_presample == 0 {
        return Ok(config.kernel.clone());
    }
    let seed = derive_seed(config.seed, FIT_STREAM);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..problem.pset.len()).collect();
    order.shuffle(&mut rng);
    let values = problem.truth.values();
    let chosen: Vec<usize> = order
        .into_iter()
        .filter(|&i| config.fit_threshold.is_none_or(|th| values[i] > th))
        .take(config.fit_presample)
        .collect();
    let noise = Normal::new(0.0, config.noise_std).map_err(|e| invalid("noise_std", e.to_string()))?;
    let domain = problem.pset.domain();
    let inputs = chosen.iter().map(|&i| domain.point(i).to_vec()).collect();
    let outputs = chosen.iter().map(|&i| values[i] + noise.sample(&mut rng)).collect();
    let obs = ObservationSet::from_data(inputs, outputs, config.noise_std * config.noise_std)?;
    let bounds = config.fit_bounds.unwrap_or_default();
    let outcome = fit_hyperparameters(&config.kernel, &obs, config.fit_budget, bounds, derive_seed(seed, 1))?;
    log::info!(
        "fitted kernel on {} points (log-likelihood {:.3}): {:?}",
        obs.len(),
        outcome.log_likelihood,
        outcome.kernel
    );
    Ok(outcome.kernel)
}

/// Random streams of one repetition.
#[derive(Clone, Copy, Debug)]
pub struct RepetitionSeeds {
    pub init: u64,
    seed: u64,
}

impl RepetitionSeeds {
    pub fn new(master: u64, repetition: usize) -> Self {
        let seed = derive_seed(master, REPETITION_STREAM + repetition as u64);
        RepetitionSeeds {
            init: derive_seed(seed, INIT_STREAM),
            seed,
        }
    }

    pub fn noise(&self, algorithm: Algorithm) -> u64 {
        derive_seed(self.seed, NOISE_STREAM + algorithm.stream_tag())
    }

    pub fn policy(&self, algorithm: Algorithm) -> u64 {
        derive_seed(self.seed, POLICY_STREAM + algorithm.stream_tag())
    }
}

/// Shared initial observations of one repetition: distinct uniformly random
/// domain points with noisy values.
pub fn initial_observations(
    config: &ExperimentConfig,
    problem: &Problem,
    seeds: &RepetitionSeeds,
) -> Result<Vec<(usize, f64)>> {
    let n = problem.pset.len();
    let count = config.init_points.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.init);
    let noise = Normal::new(0.0, config.noise_std).map_err(|e| invalid("noise_std", e.to_string()))?;
    let idx = sample(&mut rng, n, count).into_vec();
    Ok(idx
        .into_iter()
        .map(|i| (i, problem.truth.values()[i] + noise.sample(&mut rng)))
        .collect())
}

fn run_config(config: &ExperimentConfig, kernel: &KernelSpec, algorithm: Algorithm, seed: u64) -> RunConfig {
    RunConfig {
        algorithm,
        kernel: kernel.clone(),
        noise_std: config.noise_std,
        schedule: config.beta.clone(),
        rounds: config.rounds,
        reporting: config.reporting,
        seed,
    }
}

fn noisy_objective<'a>(values: &'a [f64], noise_std: f64, seed: u64) -> impl FnMut(usize) -> f64 + 'a {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).expect("noise_std validated positive");
    move |i| values[i] + noise.sample(&mut rng)
}

/// One algorithm's run within a repetition.
pub fn run_single(
    config: &ExperimentConfig,
    problem: &Problem,
    kernel: &KernelSpec,
    algorithm: Algorithm,
    repetition: usize,
) -> Result<RunRecord> {
    let seeds = RepetitionSeeds::new(config.seed, repetition);
    let init = initial_observations(config, problem, &seeds)?;
    let mut objective = noisy_objective(problem.truth.values(), config.noise_std, seeds.noise(algorithm));
    run(
        &run_config(config, kernel, algorithm, seeds.policy(algorithm)),
        &problem.pset,
        &init,
        &mut objective,
        Some(&problem.truth),
    )
}

/// ε-regret of the reported point for every (algorithm, repetition, round).
#[derive(Clone, Debug, PartialEq)]
pub struct ResultSet {
    pub config: ExperimentConfig,
    pub kernel: KernelSpec,
    pub algorithms: Vec<Algorithm>,
    /// `regrets[a][r][t]`
    pub regrets: Vec<Vec<Vec<f64>>>,
    /// Repetition indices kept (all of them unless a non-fail-fast run lost some).
    pub repetitions: Vec<usize>,
    pub failures: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub round: usize,
    pub algorithm: Algorithm,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl ResultSet {
    pub fn rounds(&self) -> usize {
        self.config.rounds
    }

    /// Regret curve of `algorithm` in repetition slot `r`.
    pub fn curve(&self, algorithm: Algorithm, r: usize) -> Option<&[f64]> {
        let a = self.algorithms.iter().position(|x| *x == algorithm)?;
        self.regrets[a].get(r).map(Vec::as_slice)
    }

    pub fn mean_curve(&self, algorithm: Algorithm) -> Option<Vec<f64>> {
        let a = self.algorithms.iter().position(|x| *x == algorithm)?;
        let reps = &self.regrets[a];
        Some(
            (0..self.rounds())
                .map(|t| reps.iter().map(|c| c[t]).sum::<f64>() / reps.len() as f64)
                .collect(),
        )
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for t in 0..self.rounds() {
            for (a, alg) in self.algorithms.iter().enumerate() {
                let column: Vec<f64> = self.regrets[a].iter().map(|c| c[t]).collect();
                if column.is_empty() {
                    continue;
                }
                let mean = column.iter().sum::<f64>() / column.len() as f64;
                let mut sorted = column;
                sorted.sort_by(f64::total_cmp);
                rows.push(SummaryRow {
                    round: t + 1,
                    algorithm: *alg,
                    mean,
                    median: quantile(&sorted, 0.5),
                    q25: quantile(&sorted, 0.25),
                    q75: quantile(&sorted, 0.75),
                });
            }
        }
        rows
    }
}

/// Runs every algorithm on every repetition.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultSet> {
    config.validate()?;
    let problem = build_problem(config)?;
    let kernel = resolve_kernel(config, &problem)?;
    run_experiment_with(config, &problem, &kernel)
}

/// As [`run_experiment`] with a prebuilt problem and kernel.
pub fn run_experiment_with(config: &ExperimentConfig, problem: &Problem, kernel: &KernelSpec) -> Result<ResultSet> {
    let per_rep: Vec<Result<Vec<Vec<f64>>>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            config
                .algorithms
                .iter()
                .map(|&alg| {
                    let record = run_single(config, problem, kernel, alg, rep)?;
                    Ok(record.regret_curve().expect("ground truth supplied"))
                })
                .collect()
        })
        .collect();

    let mut regrets = vec![Vec::new(); config.algorithms.len()];
    let mut repetitions = Vec::new();
    let mut failures = Vec::new();
    for (rep, outcome) in per_rep.into_iter().enumerate() {
        match outcome {
            Ok(curves) => {
                for (slot, curve) in regrets.iter_mut().zip(curves) {
                    slot.push(curve);
                }
                repetitions.push(rep);
            }
            Err(e) if config.fail_fast => return Err(e),
            Err(e) => {
                log::warn!("repetition {rep} failed: {e}");
                failures.push((rep, e.to_string()));
            }
        }
    }
    if repetitions.is_empty() {
        return Err(Error::Empty("result set (every repetition failed)"));
    }
    Ok(ResultSet {
        config: config.clone(),
        kernel: kernel.clone(),
        algorithms: config.algorithms.clone(),
        regrets,
        repetitions,
        failures,
    })
}

pub const RESULTS_HEADER: &str = "algorithm,repetition,round,regret";
pub const SUMMARY_HEADER: &str = "round,algorithm,mean,median,q25,q75";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn results_csv(results: &ResultSet) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for (a, alg) in results.algorithms.iter().enumerate() {
        for (slot, curve) in results.regrets[a].iter().enumerate() {
            let rep = results.repetitions[slot];
            for (t, r) in curve.iter().enumerate() {
                writeln!(out, "{alg},{rep},{},{r}", t + 1).unwrap();
            }
        }
    }
    out
}

pub fn summary_csv(results: &ResultSet) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in results.summary() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.round, row.algorithm, row.mean, row.median, row.q25, row.q75
        )
        .unwrap();
    }
    out
}

const PALETTE: [&str; 5] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Mean ε-regret curves as a standalone SVG.
pub fn regret_svg(results: &ResultSet) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 180.0, 30.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let curves: Vec<(Algorithm, Vec<f64>)> = results
        .algorithms
        .iter()
        .map(|&a| (a, results.mean_curve(a).unwrap_or_default()))
        .collect();
    let ymax = curves
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .fold(0.0_f64, f64::max)
        .max(1e-12)
        * 1.05;
    let tmax = results.rounds().max(2) as f64;
    let x_of = |t: f64| left + (t - 1.0) / (tmax - 1.0) * pw;
    let y_of = |v: f64| top + ph - v / ymax * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..=4 {
        let v = ymax * k as f64 / 4.0;
        let y = y_of(v);
        writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for k in 0..=4 {
        let t = 1.0 + (tmax - 1.0) * k as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.0}</text>"#,
            x_of(t),
            top + ph + 18.0,
            t
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">round</text>"#,
        left + pw / 2.0,
        h - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(18,{:.2}) rotate(-90)" text-anchor="middle">mean ε-regret</text>"#,
        top + ph / 2.0
    )
    .unwrap();
    for (k, (alg, curve)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(t, v)| format!("{:.2},{:.2}", x_of(t as f64 + 1.0), y_of(*v)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        let ly = top + 10.0 + 20.0 * k as f64;
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{alg}</text>"#,
            left + pw + 10.0,
            left + pw + 34.0,
            left + pw + 40.0,
            ly + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `results.csv`, `summary.csv`, `config.toml` and `regret.svg`.
pub fn emit_outputs(results: &ResultSet, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut config = results.config.clone();
    if config.fit_presample > 0 {
        // echo the kernel actually used
        config.kernel = results.kernel.clone();
        config.fit_presample = 0;
    }
    let files = [
        ("results.csv", results_csv(results)),
        ("summary.csv", summary_csv(results)),
        ("config.toml", config.to_toml()),
        ("regret.svg", regret_svg(results)),
    ];
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = out_dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Clone, Debug)]
pub struct TraceSummary {
    pub algorithm: Algorithm,
    /// Candidate `x̃_t` (or sampled point for baselines) per round.
    pub candidates: Vec<usize>,
    pub robust_optimum: usize,
    pub files: Vec<PathBuf>,
    pub record: RunRecord,
}

impl TraceSummary {
    pub fn final_candidate(&self) -> usize {
        *self.candidates.last().expect("at least one round")
    }

    pub fn reached_optimum(&self) -> bool {
        self.final_candidate() == self.robust_optimum
    }
}

pub const TRACE_HEADER_TAIL: &str = "mean,std,lcb,ucb,candidate,target";

/// Single-repetition run of one algorithm that writes the posterior and
/// confidence bounds over the whole domain at every round
/// (`round_001.csv`, ...), plus `trace.csv` with the per-round choices.
pub fn trace_run(config: &ExperimentConfig, out_dir: &Path) -> Result<TraceSummary> {
    config.validate()?;
    let [algorithm] = config.algorithms[..] else {
        return Err(Error::Config("trace needs exactly one algorithm".into()));
    };
    let problem = build_problem(config)?;
    let kernel = resolve_kernel(config, &problem)?;
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let seeds = RepetitionSeeds::new(config.seed, 0);
    let init = initial_observations(config, &problem, &seeds)?;
    let mut objective = noisy_objective(problem.truth.values(), config.noise_std, seeds.noise(algorithm));
    let domain = problem.pset.domain();
    let mut files = Vec::new();
    let mut candidates = Vec::new();
    let mut io_error = None;
    let record = run_observed(
        &run_config(config, &kernel, algorithm, seeds.policy(algorithm)),
        &problem.pset,
        &init,
        &mut objective,
        Some(&problem.truth),
        &mut |view| {
            candidates.push(view.candidate);
            let mut s = String::from("index");
            for k in 0..domain.dim() {
                write!(s, ",x{k}").unwrap();
            }
            writeln!(s, ",{TRACE_HEADER_TAIL}").unwrap();
            for i in 0..domain.len() {
                write!(s, "{i}").unwrap();
                for c in domain.point(i) {
                    write!(s, ",{c}").unwrap();
                }
                writeln!(
                    s,
                    ",{},{},{},{},{},{}",
                    view.posterior.mean(i),
                    view.posterior.variance(i).sqrt(),
                    view.field.lcb[i],
                    view.field.ucb[i],
                    u8::from(i == view.candidate),
                    u8::from(i == view.target)
                )
                .unwrap();
            }
            let path = out_dir.join(format!("round_{:03}.csv", view.round));
            if let Err(e) = write_file(&path, &s) {
                io_error.get_or_insert(e);
            }
            files.push(path);
        },
    )?;
    if let Some(e) = io_error {
        return Err(e);
    }
    let mut s = String::from("round,candidate,target,sampled,observation,reported,eps_regret\n");
    for r in &record.rounds {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.round,
            r.candidate,
            r.target,
            r.sampled,
            r.observation,
            r.reported,
            r.eps_regret.unwrap_or(f64::NAN)
        )
        .unwrap();
    }
    let path = out_dir.join("trace.csv");
    write_file(&path, &s)?;
    files.push(path);
    Ok(TraceSummary {
        algorithm,
        candidates,
        robust_optimum: problem.truth.robust_optimum().0,
        files,
        record,
    })
}
