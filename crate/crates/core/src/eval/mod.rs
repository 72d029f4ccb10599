//! Model evaluation: stratified k-fold cross-validation, the multi-model
//! benchmark protocol, and machine-readable reports. Wall-clock numbers are
//! the only nondeterministic outputs and are kept in separate fields so
//! everything else can be compared byte for byte across runs.

pub mod scaling;
pub mod synth;

use crate::data::{load_dataset_from_manifest, DataError, Dataset, MISSING_CODE};
use crate::forest::{build_forest_subset, child_seed, Forest, ForestConfig, ForestError};
use crate::splitters::SplitterStrategy;
use crate::stats::compute_moments;
use crate::tree::{build_tree, DecisionTree, TreeConfig, TreeError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Format tag for serialized evaluation reports.
pub const REPORT_FORMAT_TAG: &str = "amsd.report.v1";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("fold count {k} invalid for {rows} rows: need 2 <= k <= rows")]
    BadFoldCount { k: usize, rows: usize },
    #[error("{missing} rows have missing class labels; apply a missing-value policy first")]
    MissingLabels { missing: usize },
    #[error("benchmark needs at least one dataset and one model")]
    EmptyBenchmark,
    #[error("model names must be unique within a run; {name:?} repeats")]
    DuplicateModelName { name: String },
    #[error("sizes must be strictly ascending, got {0:?}")]
    SizesNotAscending(Vec<usize>),
    #[error("unsupported report format {found:?}, expected {expected:?}")]
    WrongFormat { found: String, expected: String },
    #[error("report parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// A stratified assignment of rows to folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Row indices per fold, each sorted ascending.
    pub folds: Vec<Vec<u32>>,
}

/// Shuffles each class with one seeded stream and deals its rows round-robin
/// into the folds, starting at fold `class % k`. The stagger keeps remainder
/// rows from piling onto fold 0, and within every class the fold counts
/// differ by at most one.
pub fn make_folds(labels: &[u32], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    let rows = labels.len();
    if k < 2 || k > rows {
        return Err(EvalError::BadFoldCount { k, rows });
    }
    let missing = labels.iter().filter(|&&l| l == MISSING_CODE).count();
    if missing > 0 {
        return Err(EvalError::MissingLabels { missing });
    }
    let max_class = *labels.iter().max().expect("label slice is non-empty") as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for class in 0..=max_class {
        let mut members: Vec<u32> = (0..rows as u32)
            .filter(|&r| labels[r as usize] as usize == class)
            .collect();
        members.shuffle(&mut rng);
        for (i, row) in members.into_iter().enumerate() {
            folds[(class + i) % k].push(row);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { k, seed, folds })
}

/// Injectable time source so tests can prove what gets timed.
pub trait Clock {
    fn now_seconds(&mut self) -> f64;
}

/// Wall clock backed by a monotonic instant.
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock { origin: Instant::now() }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_seconds(&mut self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// What to train: a single tree or a forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SingleTree(TreeConfig),
    Forest(ForestConfig),
}

/// A named model entry in a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
}

/// Held-out metrics for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub train_seconds: f64,
    /// Leaf count for single trees; mean per-tree leaf count for forests.
    pub leaf_metric: f64,
    /// Internal nodes using a four-bin split, summed over member trees.
    pub binned_internal_nodes: usize,
    /// Of those, nodes where an outermost bin received zero training rows.
    pub empty_outer_bin_nodes: usize,
}

/// Cross-validates one model over a fold plan using the wall clock.
pub fn run_cv(
    ds: &Dataset,
    model: &ModelSpec,
    plan: &FoldPlan,
) -> Result<Vec<FoldResult>, EvalError> {
    run_cv_with_clock(ds, model, plan, &mut MonotonicClock::new())
}

enum Trained {
    Tree(DecisionTree),
    Forest(Forest),
}

/// Cross-validates with an injected clock. The clock is read exactly twice
/// per fold, immediately around induction, so reported times exclude fold
/// assembly, view construction, and scoring. Forest folds train under a
/// per-fold seed derived from the configured seed, keeping folds independent
/// but the whole run reproducible.
pub fn run_cv_with_clock(
    ds: &Dataset,
    model: &ModelSpec,
    plan: &FoldPlan,
    clock: &mut dyn Clock,
) -> Result<Vec<FoldResult>, EvalError> {
    let mut results = Vec::with_capacity(plan.folds.len());
    for (fold, test_rows) in plan.folds.iter().enumerate() {
        let mut train_rows: Vec<u32> = plan
            .folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != fold)
            .flat_map(|(_, rows)| rows.iter().copied())
            .collect();
        train_rows.sort_unstable();

        let (trained, train_seconds) = match &model.kind {
            ModelKind::SingleTree(config) => {
                let view = ds.select_rows(&train_rows)?;
                let started = clock.now_seconds();
                let tree = build_tree(&view, config)?;
                (Trained::Tree(tree), clock.now_seconds() - started)
            }
            ModelKind::Forest(config) => {
                let fold_config = ForestConfig {
                    seed: child_seed(config.seed, fold as u64),
                    ..config.clone()
                };
                let started = clock.now_seconds();
                let forest = build_forest_subset(ds, &train_rows, &fold_config)?;
                (Trained::Forest(forest), clock.now_seconds() - started)
            }
        };

        let correct = test_rows
            .iter()
            .filter(|&&row| {
                let predicted = match &trained {
                    Trained::Tree(t) => t.predict_row(ds, row as usize),
                    Trained::Forest(f) => f.predict_row(ds, row as usize),
                };
                predicted == ds.label(row as usize)
            })
            .count();
        let (leaf_metric, binned, empty_outer) = match &trained {
            Trained::Tree(t) => (
                t.stats.leaf_count as f64,
                t.stats.binned_internal_nodes,
                t.stats.empty_outer_bin_nodes,
            ),
            Trained::Forest(f) => (
                f.mean_leaf_count(),
                f.trees.iter().map(|t| t.stats.binned_internal_nodes).sum(),
                f.trees.iter().map(|t| t.stats.empty_outer_bin_nodes).sum(),
            ),
        };
        results.push(FoldResult {
            fold,
            accuracy: correct as f64 / test_rows.len() as f64,
            train_seconds,
            leaf_metric,
            binned_internal_nodes: binned,
            empty_outer_bin_nodes: empty_outer,
        });
    }
    Ok(results)
}

/// Where and when a report was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub hardware: String,
    pub timestamp: String,
    pub seed: u64,
}

impl Environment {
    pub fn capture(seed: u64) -> Environment {
        let cpus = std::thread::available_parallelism().map_or(1, usize::from);
        Environment {
            hardware: format!(
                "{} {}, {} logical cpu(s)",
                std::env::consts::OS,
                std::env::consts::ARCH,
                cpus
            ),
            timestamp: chrono::Utc::now().to_rfc3339(),
            seed,
        }
    }
}

/// Aggregated metrics for one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub dataset: String,
    pub folds: Vec<FoldResult>,
    pub accuracy_mean: f64,
    /// Population standard deviation over fold accuracies.
    pub accuracy_std: f64,
    pub train_seconds_total: f64,
    pub leaf_metric_mean: f64,
}

impl RunRecord {
    fn from_folds(model: String, dataset: String, folds: Vec<FoldResult>) -> RunRecord {
        let accuracies: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let (moments, _) = compute_moments(&accuracies);
        let leaf_metric_mean =
            folds.iter().map(|f| f.leaf_metric).sum::<f64>() / folds.len() as f64;
        RunRecord {
            model,
            dataset,
            accuracy_mean: moments.mean,
            accuracy_std: moments.stddev,
            train_seconds_total: folds.iter().map(|f| f.train_seconds).sum(),
            leaf_metric_mean,
            folds,
        }
    }
}

/// Full benchmark output: one record per model and dataset, fold-level
/// results nested inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format: String,
    pub environment: Environment,
    pub k: usize,
    pub runs: Vec<RunRecord>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<EvalReport, EvalError> {
        let report: EvalReport = serde_json::from_str(text)?;
        if report.format != REPORT_FORMAT_TAG {
            return Err(EvalError::WrongFormat {
                found: report.format,
                expected: REPORT_FORMAT_TAG.to_string(),
            });
        }
        Ok(report)
    }

    /// Seed-deterministic accuracy table, one row per model and dataset.
    pub fn accuracy_table(&self) -> String {
        let mut out = String::from("dataset,model,accuracy_mean,accuracy_std\n");
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                run.dataset, run.model, run.accuracy_mean, run.accuracy_std
            ));
        }
        out
    }

    /// Wall-time table; the only table whose values vary between runs.
    pub fn time_table(&self) -> String {
        let mut out = String::from("dataset,model,train_seconds_total\n");
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{}\n",
                run.dataset, run.model, run.train_seconds_total
            ));
        }
        out
    }

    /// Seed-deterministic leaf-count table.
    pub fn leaf_table(&self) -> String {
        let mut out = String::from("dataset,model,leaf_metric_mean\n");
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{}\n",
                run.dataset, run.model, run.leaf_metric_mean
            ));
        }
        out
    }

    /// Human-readable per-run summary.
    pub fn summary_text(&self) -> String {
        let mut out = format!(
            "benchmark: k={} seed={} ({})\n",
            self.k, self.environment.seed, self.environment.hardware
        );
        for run in &self.runs {
            out.push_str(&format!(
                "  {} on {}: accuracy {:.4} +/- {:.4}, {:.3}s train, {:.1} leaves\n",
                run.model,
                run.dataset,
                run.accuracy_mean,
                run.accuracy_std,
                run.train_seconds_total,
                run.leaf_metric_mean
            ));
        }
        out
    }
}

/// Runs the full cross-product of datasets and models under one master
/// seed. Fold plans derive their seed from the dataset position and forest
/// seeds from the dataset-model pair, so the `seed` field inside a
/// `ForestConfig` passed here is intentionally overridden.
pub fn run_benchmark(
    datasets: &[(String, Dataset)],
    models: &[ModelSpec],
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    if datasets.is_empty() || models.is_empty() {
        return Err(EvalError::EmptyBenchmark);
    }
    for (i, model) in models.iter().enumerate() {
        if models[..i].iter().any(|other| other.name == model.name) {
            return Err(EvalError::DuplicateModelName { name: model.name.clone() });
        }
    }

    // Offsetting pair seeds far past dataset indices keeps the derived
    // fold-plan and forest streams distinct.
    const PAIR_SEED_OFFSET: u64 = 1_000_003;

    let mut runs = Vec::with_capacity(datasets.len() * models.len());
    for (d_idx, (name, ds)) in datasets.iter().enumerate() {
        let plan = make_folds(ds.labels(), k, child_seed(seed, d_idx as u64))?;
        for (m_idx, model) in models.iter().enumerate() {
            let pair = (d_idx * models.len() + m_idx) as u64;
            let effective = match &model.kind {
                ModelKind::Forest(config) => ModelSpec {
                    name: model.name.clone(),
                    kind: ModelKind::Forest(ForestConfig {
                        seed: child_seed(seed, PAIR_SEED_OFFSET + pair),
                        ..config.clone()
                    }),
                },
                ModelKind::SingleTree(_) => model.clone(),
            };
            let folds = run_cv(ds, &effective, &plan)?;
            runs.push(RunRecord::from_folds(model.name.clone(), name.clone(), folds));
        }
    }

    Ok(EvalReport {
        format: REPORT_FORMAT_TAG.to_string(),
        environment: Environment::capture(seed),
        k,
        runs,
    })
}

/// Loads every manifest, applies its missing-value policy, and benchmarks
/// the resulting datasets.
pub fn run_benchmark_manifests(
    manifests: &[&Path],
    models: &[ModelSpec],
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let mut datasets = Vec::with_capacity(manifests.len());
    for path in manifests {
        let loaded = load_dataset_from_manifest(path)?;
        let ds = loaded.dataset.apply_missing_policy(loaded.policy)?;
        datasets.push((loaded.name, ds));
    }
    run_benchmark(&datasets, models, k, seed)
}

/// Cross-validated metrics for one skew-cap setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaAblation {
    pub gamma_max: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    /// Fraction of binned internal nodes with an empty outermost bin,
    /// pooled over all folds; 0 when no binned nodes exist.
    pub empty_outer_bin_rate: f64,
    pub folds: Vec<FoldResult>,
}

/// Cross-validates an adaptive tree once per skew cap, echoing the caps in
/// input order. The fold plan is derived exactly as `run_benchmark` derives
/// it for its first dataset, so the cap-zero row is comparable to a
/// symmetric-binning benchmark run under the same master seed.
pub fn run_gamma_ablation(
    ds: &Dataset,
    gamma_caps: &[f64],
    alpha: f64,
    k: usize,
    seed: u64,
) -> Result<Vec<GammaAblation>, EvalError> {
    let plan = make_folds(ds.labels(), k, child_seed(seed, 0))?;
    let mut results = Vec::with_capacity(gamma_caps.len());
    for &gamma_max in gamma_caps {
        let model = ModelSpec {
            name: format!("amsd_cap_{gamma_max}"),
            kind: ModelKind::SingleTree(TreeConfig::new(SplitterStrategy::Amsd {
                alpha,
                gamma_max,
            })),
        };
        let folds = run_cv(ds, &model, &plan)?;
        let accuracies: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let (moments, _) = compute_moments(&accuracies);
        let binned: usize = folds.iter().map(|f| f.binned_internal_nodes).sum();
        let empty: usize = folds.iter().map(|f| f.empty_outer_bin_nodes).sum();
        results.push(GammaAblation {
            gamma_max,
            accuracy_mean: moments.mean,
            accuracy_std: moments.stddev,
            empty_outer_bin_rate: if binned == 0 { 0.0 } else { empty as f64 / binned as f64 },
            folds,
        });
    }
    Ok(results)
}

/// The standard four-model comparison: an exhaustive-search tree, the two
/// binned trees, and a forest over the adaptive splitter.
pub fn standard_models(n_trees: usize) -> Vec<ModelSpec> {
    vec![
        ModelSpec {
            name: "tree_exhaustive".to_string(),
            kind: ModelKind::SingleTree(TreeConfig::new(SplitterStrategy::Exhaustive)),
        },
        ModelSpec {
            name: "tree_msd".to_string(),
            kind: ModelKind::SingleTree(TreeConfig::new(SplitterStrategy::Msd)),
        },
        ModelSpec {
            name: "tree_amsd".to_string(),
            kind: ModelKind::SingleTree(TreeConfig::new(SplitterStrategy::amsd_default())),
        },
        ModelSpec {
            name: "rf_amsd".to_string(),
            kind: ModelKind::Forest(ForestConfig {
                n_trees,
                tree_config: TreeConfig::new(SplitterStrategy::amsd_default()),
                ..ForestConfig::default()
            }),
        },
    ]
}
