//! Split proposal and scoring: entropy-based split quality, the exhaustive
//! threshold search, the two statistical-binning strategies, categorical
//! multiway splits, and the gain-ratio selection rule.

use crate::data::{AttrValue, AttributeKind, RowView};
use crate::stats::{
    adaptive_multipliers, assign_bin, compute_moments, split_points_amsd, split_points_msd,
    MomentsStatus, SplitPoints,
};
use serde::{Deserialize, Serialize};

/// Split info at or below this threshold makes gain ratio undefined.
pub const SPLIT_INFO_EPS: f64 = 1e-12;

/// How continuous attributes are searched for splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitterStrategy {
    /// Sort-and-sweep over every class-boundary midpoint.
    Exhaustive,
    /// Four fixed bins at one standard deviation around the mean.
    Msd,
    /// Four bins with skew-adjusted outer cut points.
    Amsd { alpha: f64, gamma_max: f64 },
}

impl SplitterStrategy {
    /// Skew-adaptive binning at the standard constants.
    pub fn amsd_default() -> Self {
        SplitterStrategy::Amsd {
            alpha: crate::stats::DEFAULT_ALPHA,
            gamma_max: crate::stats::DEFAULT_GAMMA_MAX,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SplitterStrategy::Exhaustive => "exhaustive",
            SplitterStrategy::Msd => "msd",
            SplitterStrategy::Amsd { .. } => "amsd",
        }
    }
}

/// A routable test on one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub attribute: usize,
    pub kind: SplitKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// Four bins over the cut points; boundary values go to the upper bin.
    Binned(SplitPoints),
    /// Two children: `x < t` left, `x >= t` right.
    Threshold(f64),
    /// One child per training-time category code.
    Categorical { arity: usize },
}

impl SplitRule {
    pub fn arity(&self) -> usize {
        match &self.kind {
            SplitKind::Binned(_) => 4,
            SplitKind::Threshold(_) => 2,
            SplitKind::Categorical { arity } => *arity,
        }
    }

    /// Child index for a value; `None` means the value cannot be routed
    /// (missing, or a category the rule has no child for) and the caller
    /// must use the fallback child.
    pub fn route_value(&self, value: AttrValue) -> Option<usize> {
        match (&self.kind, value) {
            (SplitKind::Binned(points), AttrValue::Continuous(x)) => Some(assign_bin(x, points)),
            (SplitKind::Threshold(t), AttrValue::Continuous(x)) => {
                Some(if x < *t { 0 } else { 1 })
            }
            (SplitKind::Categorical { arity }, AttrValue::Categorical(code)) => {
                let c = code as usize;
                if c < *arity {
                    Some(c)
                } else {
                    None
                }
            }
            (_, AttrValue::Missing) => None,
            _ => {
                debug_assert!(false, "value kind does not match rule kind");
                None
            }
        }
    }
}

/// Quality of a proposed split over the rows that carry the attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScore {
    pub info_gain: f64,
    pub split_info: f64,
    /// `None` when split info is at or below [`SPLIT_INFO_EPS`]; such
    /// candidates are rejected outright.
    pub gain_ratio: Option<f64>,
    /// Rows routed to each child, in child order.
    pub child_counts: Vec<usize>,
}

/// Shannon entropy in bits of a class-count vector.
///
/// Panics when the counts sum to zero: entropy of an empty node is
/// undefined and asking for it is a caller bug.
pub fn class_entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    assert!(total > 0, "entropy of an empty class distribution is undefined");
    entropy_of(counts, total)
}

fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let nf = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / nf;
            h -= p * p.log2();
        }
    }
    h
}

/// Scores an explicit row-to-child assignment.
///
/// Panics when `labels` is empty or any child index reaches `arity`.
pub fn score_partition(
    labels: &[u32],
    child_of: &[usize],
    arity: usize,
    n_classes: usize,
) -> SplitScore {
    assert!(!labels.is_empty(), "cannot score an empty partition");
    assert_eq!(labels.len(), child_of.len());
    let mut matrix = vec![vec![0usize; n_classes]; arity];
    for (&label, &child) in labels.iter().zip(child_of) {
        assert!(child < arity, "child index {child} out of range for arity {arity}");
        matrix[child][label as usize] += 1;
    }
    score_from_matrix(&matrix)
}

/// Scores a child-by-class count matrix. The matrix must hold at least one
/// row assignment in total.
fn score_from_matrix(matrix: &[Vec<usize>]) -> SplitScore {
    let n_classes = matrix.first().map_or(0, Vec::len);
    let mut parent = vec![0usize; n_classes];
    let mut child_counts = Vec::with_capacity(matrix.len());
    for child in matrix {
        let mut n = 0;
        for (class, &c) in child.iter().enumerate() {
            parent[class] += c;
            n += c;
        }
        child_counts.push(n);
    }
    let total: usize = child_counts.iter().sum();
    assert!(total > 0, "cannot score an empty partition");

    let nf = total as f64;
    // Subtraction order matters for reproducibility: the exhaustive sweep
    // recomputes this expression incrementally and must land on the same
    // bits. Keep both in sync with weighted_ig below.
    let parent_h = entropy_of(&parent, total);
    let mut info_gain = parent_h;
    let mut split_info = 0.0;
    for (child, &n) in matrix.iter().zip(&child_counts) {
        if n > 0 {
            let w = n as f64 / nf;
            info_gain -= w * entropy_of(child, n);
            split_info -= w * w.log2();
        }
    }
    let gain_ratio = (split_info > SPLIT_INFO_EPS).then(|| info_gain / split_info);
    SplitScore { info_gain, split_info, gain_ratio, child_counts }
}

/// Proposes a split for one attribute under the given strategy. Categorical
/// attributes always get the multiway split; the strategy only decides how
/// continuous attributes are handled.
pub fn propose(
    view: &RowView<'_>,
    attribute: usize,
    strategy: &SplitterStrategy,
) -> Option<(SplitRule, SplitScore)> {
    match view.dataset().schema().attributes[attribute].kind {
        AttributeKind::Categorical => propose_categorical(view, attribute),
        AttributeKind::Continuous => match strategy {
            SplitterStrategy::Exhaustive => propose_exhaustive(view, attribute),
            SplitterStrategy::Msd => propose_msd(view, attribute),
            SplitterStrategy::Amsd { alpha, gamma_max } => {
                propose_amsd(view, attribute, *alpha, *gamma_max)
            }
        },
    }
}

/// Four-bin split at symmetric one-standard-deviation cut points. `None`
/// when the attribute's non-missing values are degenerate.
pub fn propose_msd(view: &RowView<'_>, attribute: usize) -> Option<(SplitRule, SplitScore)> {
    let (values, labels) = view.gather_continuous(attribute);
    let (moments, status) = compute_moments(&values);
    if status == MomentsStatus::Degenerate {
        return None;
    }
    binned_candidate(view, attribute, &values, &labels, split_points_msd(&moments))
}

/// Four-bin split with skew-adjusted outer cut points.
pub fn propose_amsd(
    view: &RowView<'_>,
    attribute: usize,
    alpha: f64,
    gamma_max: f64,
) -> Option<(SplitRule, SplitScore)> {
    let (values, labels) = view.gather_continuous(attribute);
    let (moments, status) = compute_moments(&values);
    if status == MomentsStatus::Degenerate {
        return None;
    }
    let k = adaptive_multipliers(moments.skewness, alpha, gamma_max);
    binned_candidate(view, attribute, &values, &labels, split_points_amsd(&moments, &k))
}

fn binned_candidate(
    view: &RowView<'_>,
    attribute: usize,
    values: &[f64],
    labels: &[u32],
    points: SplitPoints,
) -> Option<(SplitRule, SplitScore)> {
    // Extreme multipliers or fp collapse can fold the cut points together;
    // such a rule could not route values into four ordered bins.
    if !points.is_ordered() {
        return None;
    }
    let n_classes = view.dataset().n_classes();
    let mut matrix = vec![vec![0usize; n_classes]; 4];
    for (&x, &label) in values.iter().zip(labels) {
        matrix[assign_bin(x, &points)][label as usize] += 1;
    }
    let score = score_from_matrix(&matrix);
    Some((SplitRule { attribute, kind: SplitKind::Binned(points) }, score))
}

/// Midpoint that cannot overflow; halving first keeps extremes finite.
fn midpoint(a: f64, b: f64) -> f64 {
    a * 0.5 + b * 0.5
}

/// Sort-and-sweep search over all distinct-value midpoints, selecting the
/// threshold with maximum information gain; gain ties keep the smaller
/// threshold. `None` when fewer than two distinct values exist.
pub fn propose_exhaustive(view: &RowView<'_>, attribute: usize) -> Option<(SplitRule, SplitScore)> {
    let (values, labels) = view.gather_continuous(attribute);
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));

    let n_classes = view.dataset().n_classes();
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for &label in &labels {
        right[label as usize] += 1;
    }
    let nf = n as f64;
    let parent_h = entropy_of(&right, n);

    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for i in 0..n - 1 {
        let idx = order[i];
        left[labels[idx] as usize] += 1;
        right[labels[idx] as usize] -= 1;
        let (a, b) = (values[idx], values[order[i + 1]]);
        if b > a {
            let t = midpoint(a, b);
            // A midpoint that rounds back onto the lower value would route
            // both sides identically; skip it.
            if t > a {
                let nl = i + 1;
                let nr = n - nl;
                // Same accumulation order as score_from_matrix.
                let mut ig = parent_h;
                ig -= (nl as f64 / nf) * entropy_of(&left, nl);
                ig -= (nr as f64 / nf) * entropy_of(&right, nr);
                if best.as_ref().is_none_or(|(_, bg, _)| ig > *bg) {
                    best = Some((t, ig, left.clone()));
                }
            }
        }
    }

    let (t, _, left_counts) = best?;
    let mut right_counts = vec![0usize; n_classes];
    for &label in &labels {
        right_counts[label as usize] += 1;
    }
    for (r, &l) in right_counts.iter_mut().zip(&left_counts) {
        *r -= l;
    }
    let score = score_from_matrix(&[left_counts, right_counts]);
    Some((SplitRule { attribute, kind: SplitKind::Threshold(t) }, score))
}

/// One child per category code. `None` when fewer than two categories are
/// present among the non-missing rows.
pub fn propose_categorical(view: &RowView<'_>, attribute: usize) -> Option<(SplitRule, SplitScore)> {
    let ds = view.dataset();
    let arity = ds.categories(attribute).map_or(0, <[String]>::len);
    if arity < 2 {
        return None;
    }
    let n_classes = ds.n_classes();
    let mut matrix = vec![vec![0usize; n_classes]; arity];
    let mut any = false;
    for i in 0..view.len() {
        if let AttrValue::Categorical(code) = view.value_at(attribute, i) {
            matrix[code as usize][view.label_at(i) as usize] += 1;
            any = true;
        }
    }
    if !any {
        return None;
    }
    let score = score_from_matrix(&matrix);
    let present = score.child_counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return None;
    }
    Some((SplitRule { attribute, kind: SplitKind::Categorical { arity } }, score))
}

/// Picks the winning candidate: positive information gain is required, the
/// average-gain safeguard drops positive candidates below the mean positive
/// gain, and the survivor with the highest gain ratio wins. Ties keep the
/// earliest candidate, so callers must supply candidates in ascending
/// attribute order.
pub fn select_best(
    candidates: Vec<(SplitRule, SplitScore)>,
) -> Option<(SplitRule, SplitScore)> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (_, score) in &candidates {
        if score.info_gain > 0.0 && score.gain_ratio.is_some() {
            sum += score.info_gain;
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let mean_gain = sum / count as f64;

    let pick = |min_gain: f64| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, score)) in candidates.iter().enumerate() {
            let Some(ratio) = score.gain_ratio else { continue };
            if score.info_gain > 0.0
                && score.info_gain >= min_gain
                && best.is_none_or(|(_, br)| ratio > br)
            {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    };

    // Rounding in the mean can strand it above every gain; fall back to the
    // unfiltered positive set rather than returning nothing.
    let winner = pick(mean_gain).or_else(|| pick(f64::NEG_INFINITY))?;
    Some(candidates.into_iter().nth(winner).expect("winner index in range"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn continuous_ds(values: Vec<f64>, labels: Vec<u32>, n_classes: usize) -> Dataset {
        let class_labels: Vec<String> = (0..n_classes).map(|i| format!("k{i}")).collect();
        let refs: Vec<&str> = class_labels.iter().map(String::as_str).collect();
        Dataset::from_continuous(&["x"], vec![values], labels, &refs).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(class_entropy(&[8]), 0.0);
        assert_eq!(class_entropy(&[4, 4]), 1.0);
        assert_relative_eq!(class_entropy(&[9, 5]), 0.9402859586706311, max_relative = 1e-12);
        assert_eq!(class_entropy(&[2, 2, 2, 2]), 2.0);
        // Zero-count classes contribute nothing.
        assert_eq!(class_entropy(&[0, 4, 0, 4]), 1.0);
    }

    #[test]
    #[should_panic(expected = "empty class distribution")]
    fn entropy_of_nothing_panics() {
        class_entropy(&[0, 0]);
    }

    #[test]
    #[should_panic(expected = "empty partition")]
    fn scoring_nothing_panics() {
        score_partition(&[], &[], 2, 2);
    }

    #[test]
    fn perfect_binary_partition_scores_one() {
        let score = score_partition(&[0, 0, 1, 1], &[0, 0, 1, 1], 2, 2);
        assert_eq!(score.info_gain, 1.0);
        assert_eq!(score.split_info, 1.0);
        assert_eq!(score.gain_ratio, Some(1.0));
        assert_eq!(score.child_counts, vec![2, 2]);
    }

    #[test]
    fn useless_partition_scores_zero_gain() {
        // Both children mirror the parent distribution exactly.
        let score = score_partition(&[0, 1, 0, 1], &[0, 0, 1, 1], 2, 2);
        assert_abs_diff_eq!(score.info_gain, 0.0, epsilon = 1e-15);
        assert_eq!(score.split_info, 1.0);
    }

    #[test]
    fn single_child_partition_has_no_gain_ratio() {
        let score = score_partition(&[0, 1, 1], &[1, 1, 1], 2, 2);
        assert_eq!(score.split_info, 0.0);
        assert_eq!(score.gain_ratio, None);
        assert_eq!(score.child_counts, vec![0, 3]);
    }

    #[test]
    fn msd_on_two_points_splits_them() {
        let ds = continuous_ds(vec![1.0, 2.0], vec![0, 1], 2);
        let (rule, score) = propose_msd(&ds.all_rows(), 0).unwrap();
        // mean 1.5, stddev 0.5: cut points 1.0 / 1.5 / 2.0; the value 1.0
        // sits on the lower cut and belongs to bin 1, the value 2.0 on the
        // upper cut and belongs to bin 3.
        match rule.kind {
            SplitKind::Binned(p) => {
                assert_eq!((p.s1, p.s2, p.s3), (1.0, 1.5, 2.0));
            }
            ref other => panic!("unexpected rule {other:?}"),
        }
        assert_eq!(score.child_counts, vec![0, 1, 0, 1]);
        assert_eq!(score.info_gain, 1.0);
        assert_eq!(score.gain_ratio, Some(1.0));
    }

    #[test]
    fn amsd_spike_shifts_outer_points() {
        let ds = continuous_ds(vec![0.0, 0.0, 0.0, 0.0, 10.0], vec![0, 0, 0, 0, 1], 2);
        let (rule, score) = propose_amsd(&ds.all_rows(), 0, 0.25, 2.0).unwrap();
        // Skewness 1.5 gives multipliers (0.625, 1.375) around mean 2,
        // stddev 4.
        match rule.kind {
            SplitKind::Binned(p) => assert_eq!((p.s1, p.s2, p.s3), (-0.5, 2.0, 7.5)),
            ref other => panic!("unexpected rule {other:?}"),
        }
        assert_eq!(score.child_counts, vec![0, 4, 0, 1]);
        assert_eq!(score.gain_ratio, Some(1.0));
    }

    #[test]
    fn degenerate_attribute_proposes_nothing() {
        let ds = continuous_ds(vec![5.0; 6], vec![0, 1, 0, 1, 0, 1], 2);
        assert!(propose_msd(&ds.all_rows(), 0).is_none());
        assert!(propose_amsd(&ds.all_rows(), 0, 0.25, 2.0).is_none());
        assert!(propose_exhaustive(&ds.all_rows(), 0).is_none());

        let ds = continuous_ds(vec![1.0], vec![0], 2);
        assert!(propose_msd(&ds.all_rows(), 0).is_none());
    }

    #[test]
    fn exhaustive_picks_boundary_midpoint() {
        let ds = continuous_ds(vec![1.0, 2.0, 3.0, 10.0, 11.0, 12.0], vec![0, 0, 0, 1, 1, 1], 2);
        let (rule, score) = propose_exhaustive(&ds.all_rows(), 0).unwrap();
        assert_eq!(rule.kind, SplitKind::Threshold(6.5));
        assert_eq!(score.info_gain, 1.0);
        assert_eq!(score.child_counts, vec![3, 3]);
    }

    #[test]
    fn exhaustive_gain_ties_keep_smaller_threshold() {
        // Classes alternate symmetrically: thresholds at 1.5 and 3.5 give
        // identical gain; the sweep must keep 1.5.
        let ds = continuous_ds(vec![1.0, 2.0, 3.0, 4.0], vec![0, 1, 1, 0], 2);
        let (rule, _) = propose_exhaustive(&ds.all_rows(), 0).unwrap();
        assert_eq!(rule.kind, SplitKind::Threshold(1.5));
    }

    #[test]
    fn exhaustive_skips_duplicate_values() {
        let ds = continuous_ds(vec![1.0, 1.0, 1.0, 2.0], vec![0, 0, 1, 1], 2);
        let (rule, score) = propose_exhaustive(&ds.all_rows(), 0).unwrap();
        // The only legal threshold is between the duplicates and 2.0.
        assert_eq!(rule.kind, SplitKind::Threshold(1.5));
        assert_eq!(score.child_counts, vec![3, 1]);
    }

    #[test]
    fn missing_rows_are_excluded_from_scoring() {
        let ds = Dataset::from_continuous(
            &["x"],
            vec![vec![1.0, f64::NAN, 2.0, f64::NAN]],
            vec![0, 0, 1, 1],
            &["a", "b"],
        )
        .unwrap();
        let (_, score) = propose_msd(&ds.all_rows(), 0).unwrap();
        assert_eq!(score.child_counts.iter().sum::<usize>(), 2);
        let (_, score) = propose_exhaustive(&ds.all_rows(), 0).unwrap();
        assert_eq!(score.child_counts.iter().sum::<usize>(), 2);
    }

    fn categorical_ds(codes: Vec<u32>, cats: &[&str], labels: Vec<u32>) -> Dataset {
        use crate::data::{Attribute, Column, Schema};
        let schema = Schema {
            attributes: vec![Attribute {
                name: "g".into(),
                kind: AttributeKind::Categorical,
            }],
            class_attribute: "class".into(),
            class_labels: vec!["a".into(), "b".into()],
        };
        let column = Column::Categorical {
            codes,
            categories: cats.iter().map(|s| (*s).into()).collect(),
        };
        Dataset::from_parts(schema, vec![column], labels).unwrap()
    }

    #[test]
    fn categorical_split_covers_all_codes() {
        let ds = categorical_ds(vec![0, 0, 1, 2], &["r", "g", "b"], vec![0, 0, 1, 1]);
        let (rule, score) = propose_categorical(&ds.all_rows(), 0).unwrap();
        assert_eq!(rule.kind, SplitKind::Categorical { arity: 3 });
        assert_eq!(score.child_counts, vec![2, 1, 1]);
        assert_eq!(score.info_gain, 1.0);
    }

    #[test]
    fn categorical_needs_two_present_categories() {
        let ds = categorical_ds(vec![1, 1, 1], &["r", "g", "b"], vec![0, 1, 0]);
        assert!(propose_categorical(&ds.all_rows(), 0).is_none());
    }

    #[test]
    fn routing_matches_rule_semantics() {
        let rule = SplitRule {
            attribute: 0,
            kind: SplitKind::Binned(SplitPoints { s1: -1.0, s2: 0.0, s3: 1.0 }),
        };
        assert_eq!(rule.route_value(AttrValue::Continuous(-1.0)), Some(1));
        assert_eq!(rule.route_value(AttrValue::Missing), None);

        let rule = SplitRule { attribute: 0, kind: SplitKind::Threshold(2.0) };
        assert_eq!(rule.route_value(AttrValue::Continuous(1.9)), Some(0));
        assert_eq!(rule.route_value(AttrValue::Continuous(2.0)), Some(1));

        let rule = SplitRule { attribute: 0, kind: SplitKind::Categorical { arity: 3 } };
        assert_eq!(rule.route_value(AttrValue::Categorical(2)), Some(2));
        assert_eq!(rule.route_value(AttrValue::Categorical(3)), None);
        assert_eq!(rule.route_value(AttrValue::Missing), None);
    }

    fn threshold_candidate(attr: usize, info_gain: f64, split_info: f64) -> (SplitRule, SplitScore) {
        (
            SplitRule { attribute: attr, kind: SplitKind::Threshold(0.0) },
            SplitScore {
                info_gain,
                split_info,
                gain_ratio: (split_info > SPLIT_INFO_EPS).then(|| info_gain / split_info),
                child_counts: vec![1, 1],
            },
        )
    }

    #[test]
    fn average_gain_safeguard_blocks_cheap_ratio_wins() {
        // Candidate 1 has the higher ratio only because its split info is
        // tiny; its gain is far below the mean and must be excluded.
        let a = threshold_candidate(0, 0.9, 3.0); // ratio 0.3
        let b = threshold_candidate(1, 0.1, 0.11); // ratio ~0.91
        let (rule, _) = select_best(vec![a, b]).unwrap();
        assert_eq!(rule.attribute, 0);
    }

    #[test]
    fn selection_requires_positive_gain() {
        let a = threshold_candidate(0, 0.0, 1.0);
        let b = threshold_candidate(1, -0.5, 1.0);
        assert!(select_best(vec![a, b]).is_none());
        assert!(select_best(Vec::new()).is_none());
    }

    #[test]
    fn selection_ignores_candidates_without_ratio() {
        let a = threshold_candidate(0, 1.0e-13, 0.0); // ratio None
        assert!(select_best(vec![a.clone()]).is_none());
        let b = threshold_candidate(1, 0.4, 1.0);
        let (rule, _) = select_best(vec![a, b]).unwrap();
        assert_eq!(rule.attribute, 1);
    }

    #[test]
    fn ratio_ties_keep_the_earliest_candidate() {
        let a = threshold_candidate(2, 0.5, 1.0);
        let b = threshold_candidate(5, 0.5, 1.0);
        let (rule, _) = select_best(vec![a, b]).unwrap();
        assert_eq!(rule.attribute, 2);
    }

    /// Reference search: recount the two sides from scratch at every legal
    /// midpoint and apply the same max-gain, smaller-threshold-wins rule.
    fn brute_force_threshold(values: &[f64], labels: &[u32], n_classes: usize) -> Option<(f64, f64)> {
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut best: Option<(f64, f64)> = None;
        for w in sorted.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b > a {
                let t = a * 0.5 + b * 0.5;
                if t > a {
                    let mut left = vec![0usize; n_classes];
                    let mut right = vec![0usize; n_classes];
                    for (&v, &l) in values.iter().zip(labels) {
                        if v < t {
                            left[l as usize] += 1;
                        } else {
                            right[l as usize] += 1;
                        }
                    }
                    let nl: usize = left.iter().sum();
                    let nr: usize = right.iter().sum();
                    let nf = (nl + nr) as f64;
                    let mut parent = left.clone();
                    for (p, &r) in parent.iter_mut().zip(&right) {
                        *p += r;
                    }
                    let mut ig = entropy_of(&parent, nl + nr);
                    ig -= (nl as f64 / nf) * entropy_of(&left, nl);
                    ig -= (nr as f64 / nf) * entropy_of(&right, nr);
                    if best.is_none_or(|(_, bg)| ig > bg) {
                        best = Some((t, ig));
                    }
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn exhaustive_matches_brute_force(
            values in proptest::collection::vec(-100i32..100, 2..60),
            seed in 0u64..1000,
        ) {
            // Quantized values force plenty of duplicates and exact ties.
            let values: Vec<f64> = values.iter().map(|&v| v as f64 / 4.0).collect();
            let labels: Vec<u32> =
                values.iter().enumerate().map(|(i, _)| ((i as u64 * 7 + seed) % 3 % 2) as u32).collect();
            let ds = continuous_ds(values.clone(), labels.clone(), 2);
            let engine = propose_exhaustive(&ds.all_rows(), 0);
            let oracle = brute_force_threshold(&values, &labels, 2);
            match (engine, oracle) {
                (None, None) => {}
                (Some((rule, score)), Some((t, ig))) => {
                    prop_assert_eq!(rule.kind, SplitKind::Threshold(t));
                    prop_assert!((score.info_gain - ig).abs() <= 1e-12);
                }
                (engine, oracle) => {
                    return Err(TestCaseError::fail(format!(
                        "engine {engine:?} disagrees with oracle {oracle:?}"
                    )));
                }
            }
        }

        #[test]
        fn scores_obey_gain_and_ratio_bounds(
            labels in proptest::collection::vec(0u32..3, 1..80),
            arity in 2usize..5,
            seed in 0u64..1000,
        ) {
            let child_of: Vec<usize> =
                labels.iter().enumerate().map(|(i, _)| ((i as u64 * 31 + seed) % arity as u64) as usize).collect();
            let score = score_partition(&labels, &child_of, arity, 3);
            prop_assert!(score.info_gain >= -1e-12);
            prop_assert!(score.split_info >= 0.0);
            if let Some(ratio) = score.gain_ratio {
                // Mutual information never exceeds the split entropy.
                prop_assert!(ratio <= 1.0 + 1e-9);
            }
        }

        #[test]
        fn proposal_counts_match_rerouting(
            raw in proptest::collection::vec(-50i32..50, 4..80),
            strategy_idx in 0usize..3,
        ) {
            let values: Vec<f64> = raw.iter().map(|&v| v as f64 / 2.0).collect();
            let labels: Vec<u32> = raw.iter().map(|&v| (v.rem_euclid(2)) as u32).collect();
            let ds = continuous_ds(values.clone(), labels, 2);
            let strategy = match strategy_idx {
                0 => SplitterStrategy::Exhaustive,
                1 => SplitterStrategy::Msd,
                _ => SplitterStrategy::amsd_default(),
            };
            if let Some((rule, score)) = propose(&ds.all_rows(), 0, &strategy) {
                let mut counts = vec![0usize; rule.arity()];
                for &x in &values {
                    let child = rule.route_value(AttrValue::Continuous(x)).unwrap();
                    counts[child] += 1;
                }
                prop_assert_eq!(counts, score.child_counts);
            }
        }

        #[test]
        fn binned_rules_always_have_two_nonempty_children(
            raw in proptest::collection::vec(-1000i32..1000, 2..100),
        ) {
            let values: Vec<f64> = raw.iter().map(|&v| v as f64 / 8.0).collect();
            let labels: Vec<u32> = raw.iter().map(|&v| (v.rem_euclid(2)) as u32).collect();
            let ds = continuous_ds(values, labels, 2);
            if let Some((_, score)) = propose_msd(&ds.all_rows(), 0) {
                let nonempty = score.child_counts.iter().filter(|&&c| c > 0).count();
                prop_assert!(nonempty >= 2);
            }
        }
    }
}
