//! Split-search scalability measurement. Times only the root-node
//! candidate-proposal step on synthetic continuous data, because full-tree
//! timing confounds tree shape with per-node split cost.

use crate::data::Dataset;
use crate::eval::synth::{gaussian_mixture, GaussianMixtureSpec};
use crate::eval::EvalError;
use crate::forest::child_seed;
use crate::splitters::{propose, SplitterStrategy};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub attrs: usize,
    /// Timed repetitions per point; raised to 5 if set lower, medians over
    /// fewer repetitions are too noisy to trust.
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig { attrs: 4, repetitions: 7, seed: 0 }
    }
}

/// One timed measurement: a strategy proposing root splits at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub strategy: String,
    pub n: usize,
    pub median_seconds: f64,
    /// Growth versus the previous size, normalized to an exact doubling:
    /// (t / t_prev)^(ln 2 / ln(n / n_prev)). 2.0 means "doubling the data
    /// doubles the time"; absent on the first size of each strategy.
    pub doubling_ratio: Option<f64>,
}

/// Times root-node split proposals for every strategy over ascending data
/// sizes. Runs strictly serially so measurements do not disturb each other,
/// and reuses the same per-size dataset across strategies so they compete
/// on identical inputs.
pub fn run_scaling_experiment(
    config: &ScalingConfig,
    sizes: &[usize],
    strategies: &[SplitterStrategy],
) -> Result<Vec<ScalingPoint>, EvalError> {
    if !sizes.windows(2).all(|pair| pair[0] < pair[1]) {
        return Err(EvalError::SizesNotAscending(sizes.to_vec()));
    }
    if sizes.is_empty() || strategies.is_empty() {
        return Ok(Vec::new());
    }
    let repetitions = config.repetitions.max(5);

    let datasets: Vec<Dataset> = sizes
        .iter()
        .map(|&n| {
            gaussian_mixture(&GaussianMixtureSpec {
                rows: n,
                attrs: config.attrs,
                classes: 2,
                separation: 1.0,
                seed: child_seed(config.seed, n as u64),
            })
        })
        .collect();

    let mut points = Vec::with_capacity(sizes.len() * strategies.len());
    for strategy in strategies {
        let mut previous: Option<(usize, f64)> = None;
        for (i, &n) in sizes.iter().enumerate() {
            let view = datasets[i].all_rows();
            let mut times: Vec<f64> = (0..repetitions)
                .map(|_| {
                    let started = Instant::now();
                    for attr in 0..config.attrs {
                        std::hint::black_box(propose(&view, attr, strategy));
                    }
                    started.elapsed().as_secs_f64()
                })
                .collect();
            times.sort_by(f64::total_cmp);
            let median_seconds = times[times.len() / 2];

            let doubling_ratio = previous.and_then(|(n_prev, t_prev)| {
                if t_prev <= 0.0 {
                    return None;
                }
                let exponent = std::f64::consts::LN_2 / (n as f64 / n_prev as f64).ln();
                Some((median_seconds / t_prev).powf(exponent))
            });
            points.push(ScalingPoint {
                strategy: strategy.name().to_string(),
                n,
                median_seconds,
                doubling_ratio,
            });
            previous = Some((n, median_seconds));
        }
    }
    Ok(points)
}

/// Flat delimited table over scaling points; the ratio column is empty
/// where no previous size exists.
pub fn scaling_table(points: &[ScalingPoint]) -> String {
    let mut out = String::from("strategy,n,median_seconds,doubling_ratio\n");
    for point in points {
        let ratio = point.doubling_ratio.map_or(String::new(), |r| r.to_string());
        out.push_str(&format!(
            "{},{},{},{}\n",
            point.strategy, point.n, point.median_seconds, ratio
        ));
    }
    out
}
