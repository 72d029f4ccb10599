//! Random forests: bootstrap resampling, per-node random attribute
//! subspaces, majority voting, and a deterministic per-tree seeding scheme
//! that makes parallel and serial builds identical.

use crate::data::{argmax_tie_lowest, Dataset};
use crate::tree::{
    build_tree_with_sampler, AttributeSampler, DecisionTree, TreeConfig, TreeError,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Format tag for serialized forests.
pub const FOREST_FORMAT_TAG: &str = "amsd.forest.v1";

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("forest needs at least one tree")]
    ZeroTrees,
    #[error("mtry {mtry} out of range 1..={max}")]
    BadMtry { mtry: usize, max: usize },
    #[error("bootstrap size must be positive")]
    ZeroBootstrap,
    #[error("cannot build a forest from zero rows")]
    EmptyData,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("unsupported model format {found:?}, expected {expected:?}")]
    WrongFormat { found: String, expected: String },
    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Ensemble parameters. `workers` controls build parallelism only and is
/// deliberately excluded from serialized models: it never affects results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Attributes sampled per node; `None` means floor(sqrt(predictors)),
    /// at least 1.
    pub mtry: Option<usize>,
    pub seed: u64,
    pub tree_config: TreeConfig,
    /// Rows drawn per bootstrap sample; `None` matches the training size.
    pub bootstrap_size: Option<usize>,
    #[serde(skip)]
    pub workers: Option<usize>,
    /// Diagnostic switch: every tree trains on the original rows instead of
    /// a bootstrap sample, isolating the effect of attribute subspacing.
    #[serde(default)]
    pub identity_bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            mtry: None,
            seed: 0,
            tree_config: TreeConfig::default(),
            bootstrap_size: None,
            workers: None,
            identity_bootstrap: false,
        }
    }
}

impl ForestConfig {
    /// The per-node subspace width used for a dataset with `n_attrs`
    /// predictors.
    pub fn resolved_mtry(&self, n_attrs: usize) -> usize {
        self.mtry.unwrap_or_else(|| ((n_attrs as f64).sqrt().floor() as usize).max(1))
    }
}

/// A trained ensemble; trees vote with equal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub config: ForestConfig,
    /// The derived seed each tree consumed, in tree order.
    pub tree_seeds: Vec<u64>,
}

/// Derives a stream seed from a master seed and a stream index by running
/// one SplitMix64 step over their combination. Consecutive indices give
/// statistically unrelated streams, and the same inputs always give the
/// same output, which is what makes forest builds reproducible.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Samples `mtry` attributes per node without replacement.
struct SubspaceSampler {
    rng: ChaCha8Rng,
    mtry: usize,
}

impl AttributeSampler for SubspaceSampler {
    fn sample(&mut self, eligible: &[usize]) -> Vec<usize> {
        if eligible.len() <= self.mtry {
            return eligible.to_vec();
        }
        // Partial Fisher-Yates over a scratch copy, then sorted so the
        // induction tie-break stays "lowest attribute index".
        let mut pool = eligible.to_vec();
        for i in 0..self.mtry {
            let j = self.rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        let mut subset = pool[..self.mtry].to_vec();
        subset.sort_unstable();
        subset
    }
}

/// Trains a forest on every row of the dataset.
pub fn build_forest(ds: &Dataset, config: &ForestConfig) -> Result<Forest, ForestError> {
    let rows: Vec<u32> = (0..ds.row_count() as u32).collect();
    build_forest_subset(ds, &rows, config)
}

/// Trains a forest on a row subset; cross-validation folds use this to
/// train on everything outside the held-out fold.
pub fn build_forest_subset(
    ds: &Dataset,
    rows: &[u32],
    config: &ForestConfig,
) -> Result<Forest, ForestError> {
    if rows.is_empty() {
        return Err(ForestError::EmptyData);
    }
    if config.n_trees == 0 {
        return Err(ForestError::ZeroTrees);
    }
    let n_attrs = ds.n_attributes();
    let mtry = config.resolved_mtry(n_attrs);
    if mtry == 0 || mtry > n_attrs {
        return Err(ForestError::BadMtry { mtry, max: n_attrs });
    }
    if config.bootstrap_size == Some(0) {
        return Err(ForestError::ZeroBootstrap);
    }

    let tree_seeds: Vec<u64> =
        (0..config.n_trees).map(|t| child_seed(config.seed, t as u64)).collect();

    let build_one = |seed: u64| -> Result<DecisionTree, ForestError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample: Vec<u32> = if config.identity_bootstrap {
            rows.to_vec()
        } else {
            let draws = config.bootstrap_size.unwrap_or(rows.len());
            (0..draws).map(|_| rows[rng.gen_range(0..rows.len())]).collect()
        };
        let view = ds.select_rows(&sample).expect("bootstrap indices are valid");
        let mut sampler = SubspaceSampler { rng, mtry };
        Ok(build_tree_with_sampler(&view, &config.tree_config, &mut sampler)?)
    };

    // An indexed parallel collect keeps tree order fixed, so any worker
    // count yields the same forest as a serial build.
    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let trees: Vec<DecisionTree> = if workers <= 1 {
        tree_seeds.iter().map(|&s| build_one(s)).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction");
        pool.install(|| {
            use rayon::prelude::*;
            tree_seeds.par_iter().map(|&s| build_one(s)).collect::<Result<_, _>>()
        })?
    };

    Ok(Forest { trees, config: config.clone(), tree_seeds })
}

impl Forest {
    pub fn check_compatible(&self, ds: &Dataset) -> Result<(), TreeError> {
        self.trees[0].check_compatible(ds)
    }

    /// Majority vote over all trees; ties go to the lowest class code.
    pub fn predict_row(&self, ds: &Dataset, row: usize) -> u32 {
        argmax_tie_lowest(&self.vote_counts(ds, row)).expect("forests are never empty") as u32
    }

    /// Per-class vote fractions for one row.
    pub fn predict_proba(&self, ds: &Dataset, row: usize) -> Vec<f64> {
        let votes = self.vote_counts(ds, row);
        let total = self.trees.len() as f64;
        votes.into_iter().map(|v| v as f64 / total).collect()
    }

    fn vote_counts(&self, ds: &Dataset, row: usize) -> Vec<usize> {
        let n_classes = self.trees[0].dictionary.schema.class_labels.len();
        let mut votes = vec![0usize; n_classes];
        for tree in &self.trees {
            votes[tree.predict_row(ds, row) as usize] += 1;
        }
        votes
    }

    /// Predicts every row after verifying the dataset fingerprint.
    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<u32>, ForestError> {
        self.check_compatible(ds)?;
        Ok((0..ds.row_count()).map(|r| self.predict_row(ds, r)).collect())
    }

    /// Mean leaf count across member trees.
    pub fn mean_leaf_count(&self) -> f64 {
        let total: usize = self.trees.iter().map(|t| t.stats.leaf_count).sum();
        total as f64 / self.trees.len() as f64
    }

    pub fn to_json(&self) -> String {
        let doc = ForestDocument {
            format: FOREST_FORMAT_TAG.to_string(),
            config: self.config.clone(),
            tree_seeds: self.tree_seeds.clone(),
            trees: self.trees.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("forest documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Forest, ForestError> {
        let doc: ForestDocument = serde_json::from_str(text)?;
        if doc.format != FOREST_FORMAT_TAG {
            return Err(ForestError::WrongFormat {
                found: doc.format,
                expected: FOREST_FORMAT_TAG.to_string(),
            });
        }
        if doc.trees.is_empty() {
            return Err(ForestError::ZeroTrees);
        }
        Ok(Forest { trees: doc.trees, config: doc.config, tree_seeds: doc.tree_seeds })
    }
}

#[derive(Serialize, Deserialize)]
struct ForestDocument {
    format: String,
    config: ForestConfig,
    tree_seeds: Vec<u64>,
    trees: Vec<DecisionTree>,
}
