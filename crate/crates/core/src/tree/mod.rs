//! Recursive tree induction over row views, prediction with fallback
//! routing, and traversal metrics.

mod format;

pub use format::TREE_FORMAT_TAG;

use crate::data::{argmax_tie_lowest, AttributeKind, DataDictionary, Dataset, RowView, MISSING_CODE};
use crate::splitters::{propose, select_best, SplitKind, SplitRule, SplitterStrategy};
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("cannot build a tree from an empty row view")]
    EmptyView,
    #[error("dataset has no predictor attributes")]
    NoPredictors,
    #[error("{missing} training rows have missing labels; apply a missing-value policy first")]
    MissingLabels { missing: usize },
    #[error("model was trained on different data: fingerprint {model} vs input {data}")]
    FingerprintMismatch { model: String, data: String },
    #[error("unsupported model format {found:?}, expected {expected:?}")]
    WrongFormat { found: String, expected: String },
    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Stopping and strategy knobs for a single tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub strategy: SplitterStrategy,
    /// Nodes smaller than this become leaves without a split attempt.
    pub min_node_size: usize,
    /// `None` means unbounded depth.
    pub max_depth: Option<usize>,
    /// The winning candidate's gain ratio must reach this value.
    pub min_gain_ratio: f64,
}

impl TreeConfig {
    pub fn new(strategy: SplitterStrategy) -> Self {
        TreeConfig { strategy, min_node_size: 2, max_depth: None, min_gain_ratio: 0.0 }
    }
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig::new(SplitterStrategy::amsd_default())
    }
}

/// A decision node or a leaf. Children are indexed by the rule's child
/// numbering; `fallback_child` receives rows the rule cannot route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        rule: SplitRule,
        children: Vec<TreeNode>,
        /// Index of the largest training child; ties go to the lowest index.
        fallback_child: usize,
    },
    Leaf {
        /// Training class distribution at this leaf.
        class_counts: Vec<usize>,
        /// Majority class; ties go to the lowest class code.
        predicted_class: u32,
    },
}

/// Counters recorded while a tree is grown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildStats {
    pub node_count: usize,
    pub leaf_count: usize,
    /// Edges on the longest root-to-leaf path; a lone leaf has depth 0.
    pub max_depth: usize,
    /// Wall time spent inside induction. Excluded from serialization, and
    /// from equality so structural comparisons ignore timing jitter: it is
    /// the one field that differs between otherwise identical builds.
    #[serde(skip)]
    pub build_seconds: f64,
    /// Internal nodes whose selected rule is a four-bin split.
    pub binned_internal_nodes: usize,
    /// Binned internal nodes where an outermost bin (lowest or highest)
    /// received zero training rows.
    pub empty_outer_bin_nodes: usize,
}

impl PartialEq for BuildStats {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count
            && self.leaf_count == other.leaf_count
            && self.max_depth == other.max_depth
            && self.binned_internal_nodes == other.binned_internal_nodes
            && self.empty_outer_bin_nodes == other.empty_outer_bin_nodes
    }
}

/// Counts obtained by walking a finished tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeMetrics {
    pub node_count: usize,
    pub leaf_count: usize,
    pub max_depth: usize,
}

/// A trained tree plus everything needed to apply it to new files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub dictionary: DataDictionary,
    /// Digest of `dictionary`; prediction inputs must hash identically.
    pub fingerprint: String,
    pub config: TreeConfig,
    pub stats: BuildStats,
}

/// Chooses which eligible attributes each node may consider. The default
/// implementation of `note_choice` ignores the outcome; instrumentation and
/// random-subspace sampling override the hooks.
pub trait AttributeSampler {
    /// Returns a subset of `eligible`; order does not matter, duplicates are
    /// ignored, and an empty return means "consider nothing here".
    fn sample(&mut self, eligible: &[usize]) -> Vec<usize>;

    /// Observes which attribute the node actually split on, if any.
    fn note_choice(&mut self, _chosen: Option<usize>) {}
}

/// Considers every eligible attribute at every node.
pub struct AllAttributes;

impl AttributeSampler for AllAttributes {
    fn sample(&mut self, eligible: &[usize]) -> Vec<usize> {
        eligible.to_vec()
    }
}

/// Grows a tree over the view considering all attributes at each node.
pub fn build_tree(view: &RowView<'_>, config: &TreeConfig) -> Result<DecisionTree, TreeError> {
    build_tree_with_sampler(view, config, &mut AllAttributes)
}

/// Grows a tree, delegating per-node attribute choice to the sampler.
pub fn build_tree_with_sampler(
    view: &RowView<'_>,
    config: &TreeConfig,
    sampler: &mut dyn AttributeSampler,
) -> Result<DecisionTree, TreeError> {
    let started = Instant::now();
    if view.is_empty() {
        return Err(TreeError::EmptyView);
    }
    let ds = view.dataset();
    if ds.n_attributes() == 0 {
        return Err(TreeError::NoPredictors);
    }
    let missing = view.row_ids().iter().filter(|&&r| ds.label(r as usize) == MISSING_CODE).count();
    if missing > 0 {
        return Err(TreeError::MissingLabels { missing });
    }

    let mut induction = Induction {
        ds,
        config,
        sampler,
        stats: BuildStats {
            node_count: 0,
            leaf_count: 0,
            max_depth: 0,
            build_seconds: 0.0,
            binned_internal_nodes: 0,
            empty_outer_bin_nodes: 0,
        },
    };
    let mut consumed = vec![false; ds.n_attributes()];
    let root = induction.grow(view.clone(), 0, &mut consumed);
    let mut stats = induction.stats;
    stats.build_seconds = started.elapsed().as_secs_f64();

    let dictionary = ds.dictionary();
    let fingerprint = dictionary.fingerprint();
    Ok(DecisionTree { root, dictionary, fingerprint, config: config.clone(), stats })
}

struct Induction<'a> {
    ds: &'a Dataset,
    config: &'a TreeConfig,
    sampler: &'a mut dyn AttributeSampler,
    stats: BuildStats,
}

impl Induction<'_> {
    fn grow(&mut self, view: RowView<'_>, depth: usize, consumed: &mut [bool]) -> TreeNode {
        let class_counts = view.class_counts();
        let distinct_classes = class_counts.iter().filter(|&&c| c > 0).count();
        let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
        if distinct_classes <= 1 || view.len() < self.config.min_node_size || depth_capped {
            return self.leaf(class_counts, depth);
        }

        let eligible: Vec<usize> = (0..self.ds.n_attributes())
            .filter(|&a| {
                self.ds.schema().attributes[a].kind == AttributeKind::Continuous || !consumed[a]
            })
            .collect();
        if eligible.is_empty() {
            return self.leaf(class_counts, depth);
        }

        let mut subset = self.sampler.sample(&eligible);
        subset.sort_unstable();
        subset.dedup();
        debug_assert!(subset.iter().all(|a| eligible.contains(a)), "sampler left the eligible set");

        // Ascending attribute order makes select_best's first-wins tie rule
        // mean "lowest attribute index".
        let candidates: Vec<_> = subset
            .iter()
            .filter_map(|&attr| propose(&view, attr, &self.config.strategy))
            .collect();
        let best = select_best(candidates);
        self.sampler.note_choice(best.as_ref().map(|(rule, _)| rule.attribute));

        let Some((rule, score)) = best else {
            return self.leaf(class_counts, depth);
        };
        let ratio = score.gain_ratio.expect("selected candidates always carry a gain ratio");
        if ratio < self.config.min_gain_ratio {
            return self.leaf(class_counts, depth);
        }

        // Rows missing the split attribute are dropped from the subtree.
        let arity = rule.arity();
        let mut child_rows: Vec<Vec<u32>> = vec![Vec::new(); arity];
        for &r in view.row_ids() {
            if let Some(child) = rule.route_value(self.ds.attr_value(rule.attribute, r as usize)) {
                child_rows[child].push(r);
            }
        }
        debug_assert_eq!(
            child_rows.iter().map(Vec::len).collect::<Vec<_>>(),
            score.child_counts,
            "partition disagrees with the candidate score"
        );

        let sizes: Vec<usize> = child_rows.iter().map(Vec::len).collect();
        let fallback_child =
            argmax_tie_lowest(&sizes).expect("a selected rule routes at least one row");

        self.stats.node_count += 1;
        if matches!(rule.kind, SplitKind::Binned(_)) {
            self.stats.binned_internal_nodes += 1;
            if sizes[0] == 0 || sizes[3] == 0 {
                self.stats.empty_outer_bin_nodes += 1;
            }
        }

        let categorical = matches!(rule.kind, SplitKind::Categorical { .. });
        if categorical {
            consumed[rule.attribute] = true;
        }
        let children: Vec<TreeNode> = child_rows
            .into_iter()
            .map(|rows| {
                if rows.is_empty() {
                    // An empty child predicts its parent's majority so that
                    // inference is defined everywhere.
                    self.leaf(class_counts.clone(), depth + 1)
                } else {
                    self.grow(view.narrow(rows), depth + 1, consumed)
                }
            })
            .collect();
        if categorical {
            consumed[rule.attribute] = false;
        }

        TreeNode::Internal { rule, children, fallback_child }
    }

    fn leaf(&mut self, class_counts: Vec<usize>, depth: usize) -> TreeNode {
        self.stats.node_count += 1;
        self.stats.leaf_count += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let predicted_class =
            argmax_tie_lowest(&class_counts).expect("leaves are built from non-empty counts") as u32;
        TreeNode::Leaf { class_counts, predicted_class }
    }
}

impl DecisionTree {
    /// Errors unless the dataset's dictionary hashes like the training data.
    pub fn check_compatible(&self, ds: &Dataset) -> Result<(), TreeError> {
        let data = ds.dictionary().fingerprint();
        if data != self.fingerprint {
            return Err(TreeError::FingerprintMismatch {
                model: self.fingerprint.clone(),
                data,
            });
        }
        Ok(())
    }

    /// Predicted class code for one row. Missing and unroutable values
    /// follow each node's fallback child. The caller is responsible for
    /// schema compatibility; `predict_all` checks it once per dataset.
    pub fn predict_row(&self, ds: &Dataset, row: usize) -> u32 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { predicted_class, .. } => return *predicted_class,
                TreeNode::Internal { rule, children, fallback_child } => {
                    let child = rule
                        .route_value(ds.attr_value(rule.attribute, row))
                        .unwrap_or(*fallback_child);
                    node = &children[child];
                }
            }
        }
    }

    /// Predicts every row after verifying the dataset fingerprint.
    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<u32>, TreeError> {
        self.check_compatible(ds)?;
        Ok((0..ds.row_count()).map(|r| self.predict_row(ds, r)).collect())
    }

    /// Exact node, leaf, and depth counts by traversal.
    pub fn metrics(&self) -> TreeMetrics {
        fn walk(node: &TreeNode, depth: usize, m: &mut TreeMetrics) {
            m.node_count += 1;
            match node {
                TreeNode::Leaf { .. } => {
                    m.leaf_count += 1;
                    m.max_depth = m.max_depth.max(depth);
                }
                TreeNode::Internal { children, .. } => {
                    for child in children {
                        walk(child, depth + 1, m);
                    }
                }
            }
        }
        let mut metrics = TreeMetrics { node_count: 0, leaf_count: 0, max_depth: 0 };
        walk(&self.root, 0, &mut metrics);
        metrics
    }
}
