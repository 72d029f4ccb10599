//! Implementations behind the subcommands. Each returns `anyhow::Result`
//! and reports through stdout; files go through `output::write_atomic`.

use crate::output::write_atomic;
use crate::{
    AblateGammaArgs, BenchmarkArgs, FormatArg, PredictArgs, ScaleArgs, TrainArgs,
};
use amsd_core::data::{
    load_csv, load_csv_with_dictionary, load_dataset_from_manifest, DataDictionary, Dataset,
    LoadOptions, MissingPolicy, MISSING_CODE,
};
use amsd_core::eval::scaling::{run_scaling_experiment, scaling_table, ScalingConfig};
use amsd_core::eval::synth::{skewed_family, SkewedFamilySpec};
use amsd_core::eval::{
    run_benchmark, run_gamma_ablation, standard_models, GammaAblation, ModelKind,
};
use amsd_core::forest::{build_forest, Forest, ForestConfig, FOREST_FORMAT_TAG};
use amsd_core::tree::{build_tree, DecisionTree, TreeConfig, TREE_FORMAT_TAG};
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn stem_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
}

/// Loads training data from `--data` (plain CSV, class last) or
/// `--manifest`, then applies the missing-value policy: the explicit flag
/// wins, then the manifest's choice, then imputation.
fn load_training_data(
    data: &Option<PathBuf>,
    manifest: &Option<PathBuf>,
    policy_flag: Option<MissingPolicy>,
) -> anyhow::Result<(String, Dataset)> {
    let (name, dataset, default_policy) = match (data, manifest) {
        (Some(path), None) => {
            let ds = load_csv(path, &LoadOptions::default())
                .with_context(|| format!("loading {}", path.display()))?;
            (stem_name(path), ds, MissingPolicy::ImputeMeanMode)
        }
        (None, Some(path)) => {
            let loaded = load_dataset_from_manifest(path)
                .with_context(|| format!("loading manifest {}", path.display()))?;
            (loaded.name, loaded.dataset, loaded.policy)
        }
        _ => bail!("exactly one of --data or --manifest is required"),
    };
    let dataset = dataset.apply_missing_policy(policy_flag.unwrap_or(default_policy))?;
    Ok((name, dataset))
}

pub fn train(args: &TrainArgs) -> anyhow::Result<()> {
    let (name, ds) =
        load_training_data(&args.data, &args.manifest, args.missing_policy.map(Into::into))?;
    let tree_config = TreeConfig::new(args.strategy.to_strategy(args.alpha, args.gamma_max));
    let model_out =
        args.model_out.clone().unwrap_or_else(|| args.out_dir.join("model.json"));

    if let Some(n_trees) = args.trees {
        let config = ForestConfig {
            n_trees,
            mtry: args.mtry,
            seed: args.seed,
            tree_config,
            workers: args.workers,
            ..ForestConfig::default()
        };
        let forest = build_forest(&ds, &config)?;
        write_atomic(&model_out, &forest.to_json())?;
        let build_seconds: f64 = forest.trees.iter().map(|t| t.stats.build_seconds).sum();
        println!(
            "trained a {n_trees}-tree forest ({}) on {name}: {} rows, {} attributes",
            config.tree_config.strategy.name(),
            ds.row_count(),
            ds.n_attributes()
        );
        println!(
            "mean leaves per tree: {:.1}; build time {build_seconds:.3}s",
            forest.mean_leaf_count()
        );
    } else {
        let tree = build_tree(&ds.all_rows(), &tree_config)?;
        write_atomic(&model_out, &tree.to_json())?;
        println!(
            "trained a single tree ({}) on {name}: {} rows, {} attributes",
            tree.config.strategy.name(),
            ds.row_count(),
            ds.n_attributes()
        );
        println!(
            "leaves: {}, nodes: {}, depth: {}; build time {:.3}s",
            tree.stats.leaf_count,
            tree.stats.node_count,
            tree.stats.max_depth,
            tree.stats.build_seconds
        );
    }
    println!("model written to {}", model_out.display());
    Ok(())
}

enum Model {
    Tree(DecisionTree),
    Forest(Forest),
}

impl Model {
    fn dictionary(&self) -> &DataDictionary {
        match self {
            Model::Tree(t) => &t.dictionary,
            Model::Forest(f) => &f.trees[0].dictionary,
        }
    }

    fn predict_all(&self, ds: &Dataset) -> anyhow::Result<Vec<u32>> {
        Ok(match self {
            Model::Tree(t) => t.predict_all(ds)?,
            Model::Forest(f) => f.predict_all(ds)?,
        })
    }
}

#[derive(Deserialize)]
struct FormatProbe {
    format: String,
}

pub fn predict(args: &PredictArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.model_in)
        .with_context(|| format!("reading model {}", args.model_in.display()))?;
    let probe: FormatProbe = serde_json::from_str(&text)
        .context("model file is not a JSON document with a format tag")?;
    let model = match probe.format.as_str() {
        TREE_FORMAT_TAG => Model::Tree(DecisionTree::from_json(&text)?),
        FOREST_FORMAT_TAG => Model::Forest(Forest::from_json(&text)?),
        other => bail!("unsupported model format {other:?}"),
    };

    let ds = load_csv_with_dictionary(&args.data, &LoadOptions::default(), model.dictionary())
        .with_context(|| format!("loading {}", args.data.display()))?;
    let predictions = model.predict_all(&ds)?;

    let class_labels = &model.dictionary().schema.class_labels;
    let mut lines = String::with_capacity(predictions.len() * 8);
    for &p in &predictions {
        lines.push_str(&class_labels[p as usize]);
        lines.push('\n');
    }
    let path = args.out_dir.join("predictions.txt");
    write_atomic(&path, &lines)?;
    println!("{} predictions written to {}", predictions.len(), path.display());

    let labeled: Vec<usize> =
        (0..ds.row_count()).filter(|&r| ds.label(r) != MISSING_CODE).collect();
    if !labeled.is_empty() {
        let correct =
            labeled.iter().filter(|&&r| predictions[r] == ds.label(r)).count();
        println!(
            "accuracy {:.4} ({correct}/{} labeled rows)",
            correct as f64 / labeled.len() as f64,
            labeled.len()
        );
    }
    Ok(())
}

pub fn benchmark(args: &BenchmarkArgs) -> anyhow::Result<()> {
    let mut datasets = Vec::with_capacity(args.manifest.len());
    for path in &args.manifest {
        let loaded = load_dataset_from_manifest(path)
            .with_context(|| format!("loading manifest {}", path.display()))?;
        let policy = args.missing_policy.map(Into::into).unwrap_or(loaded.policy);
        datasets.push((loaded.name, loaded.dataset.apply_missing_policy(policy)?));
    }

    let mut models = standard_models(args.trees);
    if args.workers.is_some() {
        for model in &mut models {
            if let ModelKind::Forest(config) = &mut model.kind {
                config.workers = args.workers;
            }
        }
    }

    let report = run_benchmark(&datasets, &models, args.folds, args.seed)?;
    write_atomic(&args.out_dir.join("report.json"), &report.to_json())?;
    write_atomic(&args.out_dir.join("accuracy.csv"), &report.accuracy_table())?;
    write_atomic(&args.out_dir.join("time.csv"), &report.time_table())?;
    write_atomic(&args.out_dir.join("leaves.csv"), &report.leaf_table())?;

    match args.format {
        FormatArg::Report => print!("{}", report.summary_text()),
        FormatArg::Table => print!("{}", report.accuracy_table()),
    }
    println!("report written to {}", args.out_dir.join("report.json").display());
    Ok(())
}

#[derive(Serialize)]
struct AblationDocument<'a> {
    format: &'static str,
    dataset: &'a str,
    alpha: f64,
    k: usize,
    seed: u64,
    results: &'a [GammaAblation],
}

fn ablation_table(results: &[GammaAblation]) -> String {
    let mut out = String::from("gamma_max,accuracy_mean,accuracy_std,empty_outer_bin_rate\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.gamma_max, r.accuracy_mean, r.accuracy_std, r.empty_outer_bin_rate
        ));
    }
    out
}

pub fn ablate_gamma(args: &AblateGammaArgs) -> anyhow::Result<()> {
    let (name, ds) = match &args.manifest {
        Some(path) => {
            let loaded = load_dataset_from_manifest(path)
                .with_context(|| format!("loading manifest {}", path.display()))?;
            let policy = args.missing_policy.map(Into::into).unwrap_or(loaded.policy);
            (loaded.name, loaded.dataset.apply_missing_policy(policy)?)
        }
        None => {
            let spec = SkewedFamilySpec { rows: 800, seed: args.seed, ..Default::default() };
            ("skewed_builtin".to_string(), skewed_family(&spec))
        }
    };

    let results = run_gamma_ablation(&ds, &args.gamma_max, args.alpha, args.folds, args.seed)?;
    let doc = AblationDocument {
        format: "amsd.ablation.v1",
        dataset: &name,
        alpha: args.alpha,
        k: args.folds,
        seed: args.seed,
        results: &results,
    };
    write_atomic(&args.out_dir.join("ablate.json"), &serde_json::to_string_pretty(&doc)?)?;
    write_atomic(&args.out_dir.join("ablate.csv"), &ablation_table(&results))?;

    match args.format {
        FormatArg::Report => {
            println!("skew-cap sweep on {name} (alpha {}, k={}):", args.alpha, args.folds);
            for r in &results {
                println!(
                    "  gamma_max {:>5}: accuracy {:.4} +/- {:.4}, empty outer bins at {:.2}% of binned nodes",
                    r.gamma_max,
                    r.accuracy_mean,
                    r.accuracy_std,
                    100.0 * r.empty_outer_bin_rate
                );
            }
        }
        FormatArg::Table => print!("{}", ablation_table(&results)),
    }
    println!("results written to {}", args.out_dir.join("ablate.json").display());
    Ok(())
}

pub fn scale(args: &ScaleArgs) -> anyhow::Result<()> {
    let strategies: Vec<_> =
        args.strategy.iter().map(|s| s.to_strategy(args.alpha, args.gamma_max)).collect();
    let config = ScalingConfig { seed: args.seed, ..ScalingConfig::default() };
    let points = run_scaling_experiment(&config, &args.sizes, &strategies)?;
    let table = scaling_table(&points);
    write_atomic(&args.out_dir.join("scaling.csv"), &table)?;

    match args.format {
        FormatArg::Report => println!("{}", serde_json::to_string_pretty(&points)?),
        FormatArg::Table => print!("{table}"),
    }
    println!("table written to {}", args.out_dir.join("scaling.csv").display());
    Ok(())
}
