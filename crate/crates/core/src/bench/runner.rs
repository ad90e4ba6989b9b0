//! Declarative experiments: repeated diverse-explanation runs of both
//! methods, reduced to per-metric mean ± std and ranking counts.

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{gen_toy, load_csv};
use super::metrics::{metric_cf_dist, metric_cf_div, metric_cf_sparse, metric_recall, Metric};
use super::perturb::{perturb, PerturbationKind, PerturbationSpec};
use crate::cf::{CfRequest, SolverOptions};
use crate::dataset::Dataset;
use crate::diverse::{diverse_counterfactuals, model_agnostic_diverse, BaselineWeights, ExplanationSet};
use crate::error::{Error, Result};
use crate::fit::ProjectorConfig;
use crate::projector::Projector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Toy {
        #[serde(default = "toy_n")]
        n: usize,
        #[serde(default = "toy_d")]
        d: usize,
        /// Falls back to the experiment seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    Csv {
        path: PathBuf,
        label_column: String,
    },
}

fn toy_n() -> usize {
    500
}
fn toy_d() -> usize {
    10
}

impl DatasetSource {
    pub fn load(&self, fallback_seed: u64) -> Result<Dataset> {
        match self {
            DatasetSource::Toy { n, d, seed } => gen_toy(*n, *d, seed.unwrap_or(fallback_seed)),
            DatasetSource::Csv { path, label_column } => load_csv(path, label_column),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DatasetSource::Toy { n, d, .. } => format!("toy({n}x{d})"),
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

/// How "a sample with a different label" is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    /// `continuous` when there are more than 10 distinct labels, else `categorical`.
    #[default]
    Auto,
    /// labels differ
    Categorical,
    /// labels differ by more than the label standard deviation
    Continuous,
}

/// Explanation method compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// black-list growth over the model-specific solver
    Algo1,
    /// greedy selection of training samples
    ModelAgnos,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Algo1, Method::ModelAgnos];

    pub fn name(self) -> &'static str {
        match self {
            Method::Algo1 => "Algo1",
            Method::ModelAgnos => "ModelAgnos",
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}
fn default_k() -> usize {
    3
}
fn default_repetitions() -> usize {
    10
}
fn default_samples() -> Option<usize> {
    Some(25)
}
fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub label_rule: LabelRule,
    pub projector: ProjectorConfig,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Samples explained per repetition; `null` explains every sample.
    #[serde(default = "default_samples")]
    pub samples_per_repetition: Option<usize>,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    /// Penalty weight `C` of the model-specific solver.
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub baseline: BaselineWeights,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism. Results do not depend on it.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub threads: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource, projector: ProjectorConfig) -> Self {
        Self {
            name: default_name(),
            dataset,
            label_rule: LabelRule::Auto,
            projector,
            k: default_k(),
            repetitions: default_repetitions(),
            samples_per_repetition: default_samples(),
            perturbation: PerturbationSpec::default(),
            c: default_c(),
            solver: SolverOptions::default(),
            baseline: BaselineWeights::default(),
            seed: 0,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::input("repetitions must be at least 1"));
        }
        if self.k < 1 {
            return Err(Error::input("k must be at least 1"));
        }
        if self.samples_per_repetition == Some(0) {
            return Err(Error::input("samples_per_repetition must be positive"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::input("C must be positive and finite"));
        }
        self.baseline.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub sample: usize,
    pub method: Method,
    pub members: usize,
    pub cf_sparse: f64,
    pub cf_div: f64,
    pub cf_dist: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
}

impl RunRecord {
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::CfSparse => Some(self.cf_sparse),
            Metric::CfDiv => Some(self.cf_div),
            Metric::CfDist => Some(self.cf_dist),
            Metric::Recall => self.recall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub repetition: usize,
    pub sample: usize,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub mean: f64,
    /// Population standard deviation over runs.
    pub std: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub metrics: Vec<MetricSummary>,
}

/// Number of compared metrics on which a method scored best (ties count for every tied method).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    pub method: Method,
    pub wins: usize,
    pub compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub name: String,
    pub dataset: String,
    pub projector: String,
    pub perturbation: PerturbationKind,
    pub k: usize,
    pub repetitions: usize,
    pub samples_per_repetition: usize,
    pub summaries: Vec<MethodSummary>,
    pub rankings: Vec<Ranking>,
    pub records: Vec<RunRecord>,
    pub failures: Vec<FailureRecord>,
}

impl ResultsTable {
    pub fn summary(&self, method: Method, metric: Metric) -> Option<&MetricSummary> {
        self.summaries
            .iter()
            .find(|s| s.method == method)?
            .metrics
            .iter()
            .find(|m| m.metric == metric)
    }

    pub fn mean(&self, method: Method, metric: Metric) -> Option<f64> {
        self.summary(method, metric).map(|s| s.mean)
    }

    pub fn ranking(&self, method: Method) -> Option<Ranking> {
        self.rankings.iter().copied().find(|r| r.method == method)
    }

    /// Metrics reported for this experiment, in display order.
    pub fn metrics(&self) -> Vec<Metric> {
        compared_metrics(self.perturbation)
    }

    /// Rebuilds summaries and rankings from `records`.
    pub fn summarize(&mut self) {
        let metrics = self.metrics();
        self.summaries = Method::ALL
            .iter()
            .map(|&method| MethodSummary {
                method,
                metrics: metrics
                    .iter()
                    .map(|&metric| {
                        let vals: Vec<f64> = self
                            .records
                            .iter()
                            .filter(|r| r.method == method)
                            .filter_map(|r| r.value(metric))
                            .collect();
                        let (mean, std) = mean_std(&vals);
                        MetricSummary {
                            metric,
                            mean,
                            std,
                            runs: vals.len(),
                        }
                    })
                    .collect(),
            })
            .collect();
        self.rankings = rank(&self.summaries, &metrics);
    }
}

fn compared_metrics(kind: PerturbationKind) -> Vec<Metric> {
    if kind == PerturbationKind::None {
        vec![Metric::CfSparse, Metric::CfDiv, Metric::CfDist]
    } else {
        Metric::ALL.to_vec()
    }
}

/// Mean and population std; `(NaN, NaN)` for an empty slice.
pub fn mean_std(vals: &[f64]) -> (f64, f64) {
    if vals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn rank(summaries: &[MethodSummary], metrics: &[Metric]) -> Vec<Ranking> {
    let mut wins = vec![0usize; summaries.len()];
    for &metric in metrics {
        let score = |s: &MethodSummary| s.metrics.iter().find(|m| m.metric == metric).map(|m| m.mean);
        let scores: Vec<Option<f64>> = summaries.iter().map(score).collect();
        let valid = scores.iter().flatten().filter(|v| v.is_finite());
        let best = if metric.higher_is_better() {
            valid.fold(f64::NEG_INFINITY, |a, b| a.max(*b))
        } else {
            valid.fold(f64::INFINITY, |a, b| a.min(*b))
        };
        for (w, s) in wins.iter_mut().zip(&scores) {
            if let Some(v) = s {
                if (v - best).abs() <= 1e-12 * best.abs().max(1.0) {
                    *w += 1;
                }
            }
        }
    }
    summaries
        .iter()
        .zip(wins)
        .map(|(s, wins)| Ranking {
            method: s.method,
            wins,
            compared: metrics.len(),
        })
        .collect()
}

struct Job {
    repetition: usize,
    sample: usize,
    contrast: Option<usize>,
    perturb_seed: u64,
}

enum Outcome {
    Done(RunRecord),
    Failed(FailureRecord),
}

/// Runs the configured benchmark: fits the projector once, then for every
/// repetition explains a seeded selection of samples with both methods.
///
/// Aborts when more than half of either method's requests fail.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let data = cfg.dataset.load(cfg.seed)?;
    cfg.perturbation.validate(data.n_features())?;
    let projector = cfg.projector.fit(&data.x, cfg.seed)?;
    run_experiment_with(cfg, &data, &projector)
}

/// [`run_experiment`] on an already loaded dataset and fitted projector.
pub fn run_experiment_with(cfg: &ExperimentConfig, data: &Dataset, projector: &Projector) -> Result<ResultsTable> {
    cfg.validate()?;
    cfg.perturbation.validate(data.n_features())?;
    Error::check_dim(data.n_features(), projector.input_dim())?;
    let m = data.n_samples();
    let per_rep = cfg.samples_per_repetition.unwrap_or(m).min(m);
    let contrasts = contrast_lists(data, cfg.label_rule);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x005e_ed0f_be9c);
    let mut jobs = Vec::with_capacity(cfg.repetitions * per_rep);
    for repetition in 0..cfg.repetitions {
        let picked = rand::seq::index::sample(&mut rng, m, per_rep).into_vec();
        for sample in picked {
            let contrast = contrasts[sample].choose(&mut rng).copied();
            jobs.push(Job {
                repetition,
                sample,
                contrast,
                perturb_seed: rng.random(),
            });
        }
    }

    let threads = if cfg.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        cfg.threads
    }
    .clamp(1, jobs.len().max(1));
    let chunk = jobs.len().div_ceil(threads).max(1);
    let outcomes: Vec<Vec<Outcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().flat_map(|j| run_job(cfg, data, projector, j)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("benchmark worker panicked")).collect()
    });

    let mut table = ResultsTable {
        name: cfg.name.clone(),
        dataset: cfg.dataset.describe(),
        projector: projector.kind().to_string(),
        perturbation: cfg.perturbation.kind,
        k: cfg.k,
        repetitions: cfg.repetitions,
        samples_per_repetition: per_rep,
        summaries: vec![],
        rankings: vec![],
        records: vec![],
        failures: vec![],
    };
    for o in outcomes.into_iter().flatten() {
        match o {
            Outcome::Done(r) => table.records.push(r),
            Outcome::Failed(f) => table.failures.push(f),
        }
    }

    check_failure_rate(&table.failures, jobs.len())?;
    table.summarize();
    Ok(table)
}

fn check_failure_rate(failures: &[FailureRecord], requests: usize) -> Result<()> {
    for method in Method::ALL {
        let failed = failures.iter().filter(|f| f.method == method).count();
        if 2 * failed > requests {
            let first = failures.iter().find(|f| f.method == method).map(|f| f.error.as_str());
            return Err(Error::Benchmark(format!(
                "{} failed on {failed} of {requests} requests (first error: {})",
                method.name(),
                first.unwrap_or("none")
            )));
        }
    }
    Ok(())
}

fn contrast_lists(data: &Dataset, rule: LabelRule) -> Vec<Vec<usize>> {
    let labels = &data.labels;
    let rule = match rule {
        LabelRule::Auto => {
            let mut distinct = labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() > 10 {
                LabelRule::Continuous
            } else {
                LabelRule::Categorical
            }
        }
        r => r,
    };
    let as_f: Vec<f64> = labels.iter().map(|l| *l as f64).collect();
    let (_, std) = mean_std(&as_f);
    (0..labels.len())
        .map(|i| {
            (0..labels.len())
                .filter(|&j| match rule {
                    LabelRule::Continuous => (as_f[i] - as_f[j]).abs() > std,
                    _ => labels[i] != labels[j],
                })
                .collect()
        })
        .collect()
}

fn run_job(cfg: &ExperimentConfig, data: &Dataset, projector: &Projector, job: &Job) -> Vec<Outcome> {
    let x = data.sample(job.sample).to_vec();
    let fail = |method: Method, error: String| {
        Outcome::Failed(FailureRecord {
            repetition: job.repetition,
            sample: job.sample,
            method,
            error,
        })
    };
    let target = if cfg.perturbation.kind == PerturbationKind::None {
        match job.contrast {
            Some(j) => projector.project(data.sample(j)).map(|y| (y, None)),
            None => Err(Error::input("no sample with a different label")),
        }
    } else {
        perturb(&x, &cfg.perturbation.clone().with_seed(job.perturb_seed))
            .and_then(|(xp, picked)| Ok((projector.project(&xp)?, Some(picked))))
    };
    let (y_cf, perturbed) = match target {
        Ok(t) => t,
        Err(e) => return Method::ALL.iter().map(|m| fail(*m, e.to_string())).collect(),
    };
    let req = CfRequest::new(x, y_cf).with_c(cfg.c).with_solver(cfg.solver.clone());
    let record = |method: Method, es: &ExplanationSet| RunRecord {
        repetition: job.repetition,
        sample: job.sample,
        method,
        members: es.len(),
        cf_sparse: metric_cf_sparse(es),
        cf_div: metric_cf_div(es),
        cf_dist: metric_cf_dist(es),
        recall: perturbed.as_deref().map(|p| metric_recall(es, p)),
    };
    let algo = diverse_counterfactuals(&req, cfg.k, projector);
    let base = model_agnostic_diverse(&req, cfg.k, data, &cfg.baseline, projector);
    [(Method::Algo1, algo), (Method::ModelAgnos, base)]
        .into_iter()
        .map(|(method, res)| match res {
            Ok(es) => Outcome::Done(record(method, &es)),
            Err(e) => fail(method, e.to_string()),
        })
        .collect()
}
