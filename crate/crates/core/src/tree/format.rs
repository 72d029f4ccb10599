//! JSON envelope for trained trees: a format tag, the data dictionary and
//! its fingerprint, the build configuration, build statistics, and the node
//! structure itself.

use super::{BuildStats, DecisionTree, TreeConfig, TreeError, TreeNode};
use crate::data::DataDictionary;
use serde::{Deserialize, Serialize};

/// Format tag checked on load; bump the suffix for incompatible changes.
pub const TREE_FORMAT_TAG: &str = "amsd.tree.v1";

#[derive(Serialize, Deserialize)]
struct TreeDocument {
    format: String,
    fingerprint: String,
    dictionary: DataDictionary,
    config: TreeConfig,
    stats: BuildStats,
    root: TreeNode,
}

impl DecisionTree {
    /// Serializes the tree as pretty-printed JSON.
    pub fn to_json(&self) -> String {
        let doc = TreeDocument {
            format: TREE_FORMAT_TAG.to_string(),
            fingerprint: self.fingerprint.clone(),
            dictionary: self.dictionary.clone(),
            config: self.config.clone(),
            stats: self.stats.clone(),
            root: self.root.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("tree documents always serialize")
    }

    /// Parses a serialized tree, rejecting unknown format tags. Malformed
    /// JSON errors carry the line and column of the problem.
    pub fn from_json(text: &str) -> Result<DecisionTree, TreeError> {
        let doc: TreeDocument = serde_json::from_str(text)?;
        if doc.format != TREE_FORMAT_TAG {
            return Err(TreeError::WrongFormat {
                found: doc.format,
                expected: TREE_FORMAT_TAG.to_string(),
            });
        }
        Ok(DecisionTree {
            root: doc.root,
            dictionary: doc.dictionary,
            fingerprint: doc.fingerprint,
            config: doc.config,
            stats: doc.stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::splitters::SplitterStrategy;
    use crate::tree::build_tree;

    fn sample_tree() -> (Dataset, DecisionTree) {
        let ds = Dataset::from_continuous(
            &["x", "y"],
            vec![
                vec![1.0, 2.0, 3.0, 7.0, 8.0, 9.0],
                vec![4.0, 2.0, 6.0, 1.0, 3.0, 5.0],
            ],
            vec![0, 0, 0, 1, 1, 1],
            &["a", "b"],
        )
        .unwrap();
        let tree = build_tree(&ds.all_rows(), &crate::tree::TreeConfig::new(
            SplitterStrategy::amsd_default(),
        ))
        .unwrap();
        (ds, tree)
    }

    #[test]
    fn round_trip_preserves_everything() {
        let (ds, tree) = sample_tree();
        let text = tree.to_json();
        let loaded = DecisionTree::from_json(&text).unwrap();
        assert_eq!(loaded, tree);
        assert_eq!(loaded.predict_all(&ds).unwrap(), tree.predict_all(&ds).unwrap());
        // Serialization is deterministic.
        assert_eq!(loaded.to_json(), text);
    }

    #[test]
    fn minimal_handwritten_document_loads() {
        let text = r#"{
            "format": "amsd.tree.v1",
            "fingerprint": "0000000000000000",
            "dictionary": {
                "schema": {
                    "attributes": [{"name": "x", "kind": "continuous"}],
                    "class_attribute": "class",
                    "class_labels": ["no", "yes"]
                },
                "categories": [null]
            },
            "config": {
                "strategy": {"amsd": {"alpha": 0.25, "gamma_max": 2.0}},
                "min_node_size": 2,
                "max_depth": null,
                "min_gain_ratio": 0.0
            },
            "stats": {
                "node_count": 1,
                "leaf_count": 1,
                "max_depth": 0,
                "binned_internal_nodes": 0,
                "empty_outer_bin_nodes": 0
            },
            "root": {"leaf": {"class_counts": [3, 9], "predicted_class": 1}}
        }"#;
        let tree = DecisionTree::from_json(text).unwrap();
        assert_eq!(
            tree.root,
            TreeNode::Leaf { class_counts: vec![3, 9], predicted_class: 1 }
        );
        assert_eq!(tree.config.strategy, SplitterStrategy::Amsd { alpha: 0.25, gamma_max: 2.0 });
    }

    #[test]
    fn wrong_format_tag_is_rejected() {
        let (_, tree) = sample_tree();
        let text = tree.to_json().replace("amsd.tree.v1", "amsd.tree.v9");
        match DecisionTree::from_json(&text) {
            Err(TreeError::WrongFormat { found, expected }) => {
                assert_eq!(found, "amsd.tree.v9");
                assert_eq!(expected, TREE_FORMAT_TAG);
            }
            other => panic!("unexpected result {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_a_position() {
        let err = DecisionTree::from_json("{\"format\": \"amsd.tree.v1\",\n  broken").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("line 2"), "position missing from: {message}");
    }
}
