//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use descforge::dataset::{
    self, load_csv, load_table, split_random, synthesize, synthesize_rank_one, write_csv,
    ActivityVector, DescriptorTable, ScalingMode, Split, SynthSpec, REFERENCE_SEED,
};
use descforge::mcuve::{run_mcuve_with_stability, McuveConfig};
use descforge::pls::{max_latent, PlsModel};
use descforge::seed;
use descforge::strs::{run_strs, StrsConfig};
use descforge::validation::{
    r_squared, rmsep, select_n_latent, CrossValidator, DEFAULT_ALPHA, DEFAULT_FOLDS,
    DEFAULT_MC_TRAIN_FRACTION,
};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    Command, CvArg, DataArgs, EvaluateArgs, FitArgs, MethodArg, NlvCurveArgs, PredictArgs,
    SelectArgs, SplitArgs, SweepArgs, SynthArgs,
};
use crate::config::Settings;
use crate::report::{
    read_json, write_coefficients_csv, write_json, write_predictions_csv, write_rows,
    write_rows_to, write_stability_csv, write_trace_csv, EvalReport, ModelDocument, PredictionRow,
    SelectionDocument, TruthDocument,
};
use crate::CliError;

pub const DEFAULT_ACTIVITY_COLUMN: &str = "activity";
pub const DEFAULT_TEST_FRACTION: f64 = 0.25;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_PLS_NLV: usize = 2;
pub const DEFAULT_MAX_LV: usize = 15;
pub const DEFAULT_MC_ITERATIONS: usize = 100;
pub const DEFAULT_SWEEP_RUNS: [usize; 4] = [50, 100, 200, 500];
pub const DEFAULT_REPLICATES: usize = 50;

type CmdResult = Result<(), CliError>;

pub fn dispatch(command: &Command, seed_flag: Option<u64>, settings: &Settings) -> CmdResult {
    match command {
        Command::Synth(a) => synth(a, seed_flag, settings),
        Command::Fit(a) => fit(a, settings),
        Command::Predict(a) => predict(a, settings),
        Command::Select(a) => select(a, seed_flag, settings),
        Command::Evaluate(a) => evaluate(a, seed_flag, settings),
        Command::SweepRuns(a) => sweep_runs(a, seed_flag, settings),
        Command::NlvCurve(a) => nlv_curve(a, seed_flag, settings),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// A loaded dataset after the optional constant-column drop.
pub struct Dataset {
    pub table: DescriptorTable,
    pub activity: ActivityVector,
    pub dropped: Vec<String>,
}

impl Dataset {
    pub fn load(path: &Path, activity_column: &str, drop_constant: bool) -> anyhow::Result<Self> {
        let (table, activity) = load_csv(path, activity_column)
            .with_context(|| format!("loading {}", path.display()))?;
        if drop_constant {
            let (table, dropped) = table.drop_constant_columns()?;
            return Ok(Self {
                table,
                activity,
                dropped,
            });
        }
        // Rejects zero-variance columns by name.
        dataset::fit_scaling(&table, &activity, ScalingMode::Autoscale)?;
        Ok(Self {
            table,
            activity,
            dropped: Vec::new(),
        })
    }

    fn from_args(data: &DataArgs, settings: &Settings) -> Result<Self, CliError> {
        let column = activity_column(data.activity_col.clone(), settings)?;
        let drop = settings.switch(data.drop_constant, "drop-constant")?;
        Ok(Self::load(&data.data, &column, drop)?)
    }

    fn names(&self) -> &[String] {
        self.table.descriptor_names()
    }

    /// Descriptor indices for the given names, in the given order.
    fn resolve(&self, names: &[String]) -> anyhow::Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.table
                    .column_index(n)
                    .ok_or_else(|| anyhow!("descriptor `{n}` not found in dataset"))
            })
            .collect()
    }
}

/// Training and test matrices of one split.
pub struct Partition {
    pub split: Split,
    pub x_train: Array2<f64>,
    pub y_train: Array1<f64>,
    pub x_test: Array2<f64>,
    pub y_test: Array1<f64>,
}

impl Partition {
    pub fn new(data: &Dataset, test_fraction: f64, seed_value: u64) -> anyhow::Result<Self> {
        let x = data.table.values();
        let y = data.activity.values();
        let split = split_random(x.nrows(), test_fraction, seed_value)?;
        Ok(Self {
            x_train: x.select(Axis(0), &split.train),
            y_train: y.select(Axis(0), &split.train),
            x_test: x.select(Axis(0), &split.test),
            y_test: y.select(Axis(0), &split.test),
            split,
        })
    }
}

/// The common k-fold protocol: STRS and `evaluate` share fold assignments
/// for a given master seed.
pub fn kfold_validator(folds: usize, seed_value: u64) -> CrossValidator {
    CrossValidator::kfold(folds, seed::derive(seed_value, seed::stream::STRS_CV, 0))
}

fn activity_column(flag: Option<String>, settings: &Settings) -> Result<String, CliError> {
    settings.value(flag, "activity-col", DEFAULT_ACTIVITY_COLUMN.to_owned())
}

fn test_fraction(split: &SplitArgs, settings: &Settings) -> Result<f64, CliError> {
    settings.value(split.test_fraction, "test-fraction", DEFAULT_TEST_FRACTION)
}

fn folds(split: &SplitArgs, settings: &Settings) -> Result<usize, CliError> {
    let k = settings.value(split.folds, "folds", DEFAULT_FOLDS)?;
    if k < 2 {
        return Err(CliError::usage(format!("--folds must be >= 2, got {k}")));
    }
    Ok(k)
}

fn out_dir(flag: Option<PathBuf>, settings: &Settings) -> Result<PathBuf, CliError> {
    let dir = settings.value(flag, "out-dir", PathBuf::from("."))?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn positive(name: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::usage(format!("--{name} must be >= 1")));
    }
    Ok(v)
}

/// Fit on the training split restricted to `subset`, score it by k-fold
/// RMSECV and on the test split.
pub struct SubsetEvaluation {
    pub model: PlsModel,
    pub rmsecv: f64,
    pub rmsep: f64,
    pub r_squared: f64,
    pub train_predicted: Array1<f64>,
    pub test_predicted: Array1<f64>,
}

pub fn evaluate_subset(
    part: &Partition,
    subset: &[usize],
    n_latent: usize,
    cv: &CrossValidator,
) -> anyhow::Result<SubsetEvaluation> {
    let m = part.x_train.nrows();
    let a = n_latent.min(cv.max_latent(m, subset.len()));
    if a == 0 {
        bail!(
            "no latent variable fits {m} training samples and {} descriptors",
            subset.len()
        );
    }
    let cv_result = cv.rmsecv_columns(part.x_train.view(), part.y_train.view(), subset, a)?;
    let model = PlsModel::fit_columns(
        part.x_train.view(),
        part.y_train.view(),
        subset,
        a,
        cv.scaling,
    )?;
    let test_predicted = model.predict_full(part.x_test.view())?;
    let train_predicted = model.predict_full(part.x_train.view())?;
    Ok(SubsetEvaluation {
        rmsecv: cv_result.rmsecv,
        rmsep: rmsep(part.y_test.view(), test_predicted.view())?,
        r_squared: r_squared(part.y_test.view(), test_predicted.view())?,
        model,
        train_predicted,
        test_predicted,
    })
}

fn prediction_rows<'a>(
    data: &'a Dataset,
    part: &'a Partition,
    eval: &'a SubsetEvaluation,
) -> impl Iterator<Item = PredictionRow<'a>> {
    let ids = data.table.sample_ids();
    let train = part
        .split
        .train
        .iter()
        .enumerate()
        .map(move |(r, &i)| PredictionRow {
            sample_id: &ids[i],
            split: "train",
            observed: part.y_train[r],
            predicted: eval.train_predicted[r],
        });
    let test = part
        .split
        .test
        .iter()
        .enumerate()
        .map(move |(r, &i)| PredictionRow {
            sample_id: &ids[i],
            split: "test",
            observed: part.y_test[r],
            predicted: eval.test_predicted[r],
        });
    train.chain(test)
}

fn model_document(model: PlsModel, names: &[String]) -> ModelDocument {
    ModelDocument {
        descriptor_names: model
            .column_map()
            .iter()
            .map(|&j| names[j].clone())
            .collect(),
        model,
    }
}

fn print_report(r: &EvalReport) {
    println!(
        "{}: {} of {} descriptors, nLV {}, RMSECV {:.4}, RMSEP {:.4}, r2 {:.4}",
        r.method, r.n_selected, r.n_descriptors, r.n_latent, r.rmsecv, r.rmsep, r.r_squared
    );
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn synth(a: &SynthArgs, seed_flag: Option<u64>, settings: &Settings) -> CmdResult {
    let seed_value = settings.seed(seed_flag, REFERENCE_SEED)?;
    let reference = SynthSpec::reference(seed_value);
    let m = settings.value(a.m, "m", reference.m)?;
    let p = settings.value(a.p, "p", reference.p)?;
    let noise_sd = settings.value(a.noise, "noise", reference.noise_sd)?;
    let rank_one = settings.switch(a.rank_one, "rank-one")?;
    let column = activity_column(a.activity_col.clone(), settings)?;

    let synthetic = if rank_one {
        let coefficients = settings.list(a.coefficients.clone(), "coefficients", vec![1.0])?;
        let &[coefficient] = coefficients.as_slice() else {
            return Err(CliError::usage("--rank-one takes a single coefficient"));
        };
        synthesize_rank_one(m, p, coefficient, noise_sd, seed_value)?
    } else {
        synthesize(&SynthSpec {
            m,
            p,
            informative: settings.list(
                a.informative.clone(),
                "informative",
                reference.informative,
            )?,
            coefficients: settings.list(
                a.coefficients.clone(),
                "coefficients",
                reference.coefficients,
            )?,
            noise_sd,
            seed: seed_value,
        })
        .map_err(|e| CliError::usage(e.to_string()))?
    };

    if let Some(parent) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let file =
        std::fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_csv(
        std::io::BufWriter::new(file),
        &synthetic.table,
        &synthetic.activity,
        &column,
    )?;
    let truth_path = truth_path(&a.out);
    write_json(
        &truth_path,
        &TruthDocument {
            m,
            p,
            rank_one,
            truth: synthetic.truth,
        },
    )?;
    println!("wrote {} and {}", a.out.display(), truth_path.display());
    Ok(())
}

/// `data.csv` → `data.truth.json`.
pub fn truth_path(csv: &Path) -> PathBuf {
    csv.with_extension("truth.json")
}

// ---------------------------------------------------------------------------
// fit / predict
// ---------------------------------------------------------------------------

fn fit(a: &FitArgs, settings: &Settings) -> CmdResult {
    let data = Dataset::from_args(&a.data, settings)?;
    let nlv = positive("nlv", settings.value(a.nlv, "nlv", DEFAULT_PLS_NLV)?)?;
    let columns = match settings.optional_list(a.subset.clone(), "subset")? {
        Some(names) => data.resolve(&names)?,
        None => (0..data.table.n_descriptors()).collect(),
    };
    let model = PlsModel::fit_columns(
        data.table.values(),
        data.activity.values(),
        &columns,
        nlv,
        ScalingMode::Autoscale,
    )?;
    let n = model.n_latent();
    write_json(&a.out, &model_document(model, data.names()))?;
    println!(
        "fitted {} descriptors, nLV {n}; wrote {}",
        columns.len(),
        a.out.display()
    );
    Ok(())
}

fn predict(a: &PredictArgs, settings: &Settings) -> CmdResult {
    let doc: ModelDocument = read_json(&a.model)?;
    let column = settings.optional(a.activity_col.clone(), "activity-col")?;
    let (table, activity) = load_table(&a.data, column.as_deref())
        .with_context(|| format!("loading {}", a.data.display()))?;
    let idx = doc
        .descriptor_names
        .iter()
        .map(|n| {
            table
                .column_index(n)
                .ok_or_else(|| anyhow!("descriptor `{n}` required by the model is missing"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let predicted = doc
        .model
        .predict(table.values().select(Axis(1), &idx).view())?;

    let mut header = vec!["sample_id", "predicted"];
    if activity.is_some() {
        header.push("observed");
    }
    let rows: Vec<Vec<String>> = (0..table.n_samples())
        .map(|i| {
            let mut r = vec![table.sample_ids()[i].clone(), predicted[i].to_string()];
            if let Some(y) = &activity {
                r.push(y.values()[i].to_string());
            }
            r
        })
        .collect();
    match &a.out {
        Some(path) => write_rows_to(path, &header, &rows)?,
        None => write_rows(std::io::stdout().lock(), &header, &rows)?,
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// select / evaluate
// ---------------------------------------------------------------------------

fn select(a: &SelectArgs, seed_flag: Option<u64>, settings: &Settings) -> CmdResult {
    let start = Instant::now();
    let seed_value = settings.seed(seed_flag, DEFAULT_SEED)?;
    let method = a.method;
    let data = Dataset::from_args(&a.data, settings)?;
    let part = Partition::new(&data, test_fraction(&a.split, settings)?, seed_value)?;
    let folds = folds(&a.split, settings)?;
    let sample_ratio = settings.value(a.sample_ratio, "sample-ratio", DEFAULT_MC_TRAIN_FRACTION)?;
    let dir = out_dir(a.out_dir.clone(), settings)?;
    let (x, y) = (part.x_train.view(), part.y_train.view());

    let (result, stability, n_latent) = match method {
        MethodArg::Strs => {
            let defaults = StrsConfig::default();
            let config = StrsConfig {
                n_runs: settings.value(a.runs, "runs", defaults.n_runs)?,
                sample_ratio,
                n_latent: positive("nlv", settings.value(a.nlv, "nlv", defaults.n_latent)?)?,
                cv_folds: folds,
                seed: seed_value,
                min_subset: settings.value(a.min_subset, "min-subset", defaults.min_subset)?,
                scaling: ScalingMode::Autoscale,
            };
            config
                .validate()
                .map_err(|e| CliError::usage(e.to_string()))?;
            (run_strs(x, y, &config)?, None, config.n_latent)
        }
        MethodArg::Mcuve => {
            let defaults = McuveConfig::default();
            let config = McuveConfig {
                n_iterations: settings.value(a.iterations, "iterations", defaults.n_iterations)?,
                sample_ratio,
                n_latent: positive("nlv", settings.value(a.nlv, "nlv", defaults.n_latent)?)?,
                max_selected: settings.optional(a.max_selected, "max-selected")?,
                cv_folds: folds,
                cut_stride: settings.value(a.cut_stride, "cut-stride", defaults.cut_stride)?,
                seed: seed_value,
                scaling: ScalingMode::Autoscale,
            };
            config
                .validate()
                .map_err(|e| CliError::usage(e.to_string()))?;
            let (result, stability) = run_mcuve_with_stability(x, y, &config)?;
            (result, Some(stability), config.n_latent)
        }
    };

    let subset = result.best_subset.clone();
    let cv = kfold_validator(folds, seed_value);
    let eval = evaluate_subset(&part, &subset, n_latent, &cv)?;
    let names = data.names();
    let report = EvalReport {
        method: result.method.name().to_owned(),
        n_descriptors: names.len(),
        n_selected: subset.len(),
        n_latent: eval.model.n_latent(),
        rmsecv: result.best_rmsecv,
        rmsep: eval.rmsep,
        r_squared: eval.r_squared,
        n_train: part.split.train.len(),
        n_test: part.split.test.len(),
        seed: seed_value,
        selected: subset.iter().map(|&j| names[j].clone()).collect(),
        wall_time: 0.0,
    };

    let doc = SelectionDocument::new(result, names, data.dropped.clone());
    write_json(&dir.join("selection.json"), &doc)?;
    write_trace_csv(&dir.join("trace.csv"), &doc.traces)?;
    write_coefficients_csv(&dir.join("coefficients.csv"), &doc.traces, names)?;
    if let Some(stability) = &stability {
        write_stability_csv(&dir.join("stability.csv"), stability, names)?;
    }
    write_predictions_csv(
        &dir.join("predictions.csv"),
        prediction_rows(&data, &part, &eval),
    )?;
    write_json(&dir.join("model.json"), &model_document(eval.model, names))?;
    finish_report(&dir, report, start)
}

fn finish_report(dir: &Path, mut report: EvalReport, start: Instant) -> CmdResult {
    report.wall_time = start.elapsed().as_secs_f64();
    report.validate()?;
    write_json(&dir.join("report.json"), &report)?;
    print_report(&report);
    Ok(())
}

fn evaluate(a: &EvaluateArgs, seed_flag: Option<u64>, settings: &Settings) -> CmdResult {
    let start = Instant::now();
    let seed_value = settings.seed(seed_flag, DEFAULT_SEED)?;
    let data = Dataset::from_args(&a.data, settings)?;
    let part = Partition::new(&data, test_fraction(&a.split, settings)?, seed_value)?;
    let folds = folds(&a.split, settings)?;
    let nlv = positive("nlv", settings.value(a.nlv, "nlv", DEFAULT_PLS_NLV)?)?;
    let dir = out_dir(a.out_dir.clone(), settings)?;

    let mut subset: Vec<usize> = match (
        &a.selection,
        settings.optional_list(a.subset.clone(), "subset")?,
    ) {
        (Some(path), _) => {
            let doc: SelectionDocument = read_json(path)?;
            let names: Vec<String> = doc.best_subset.into_iter().map(|d| d.name).collect();
            data.resolve(&names)?
        }
        (None, Some(names)) => data.resolve(&names)?,
        (None, None) => (0..data.table.n_descriptors()).collect(),
    };
    subset.sort_unstable();
    subset.dedup();

    let cv = kfold_validator(folds, seed_value);
    let eval = evaluate_subset(&part, &subset, nlv, &cv)?;
    let names = data.names();
    let report = EvalReport {
        method: "pls".to_owned(),
        n_descriptors: names.len(),
        n_selected: subset.len(),
        n_latent: eval.model.n_latent(),
        rmsecv: eval.rmsecv,
        rmsep: eval.rmsep,
        r_squared: eval.r_squared,
        n_train: part.split.train.len(),
        n_test: part.split.test.len(),
        seed: seed_value,
        selected: subset.iter().map(|&j| names[j].clone()).collect(),
        wall_time: 0.0,
    };
    write_predictions_csv(
        &dir.join("predictions.csv"),
        prediction_rows(&data, &part, &eval),
    )?;
    write_json(&dir.join("model.json"), &model_document(eval.model, names))?;
    finish_report(&dir, report, start)
}

// ---------------------------------------------------------------------------
// sweep-runs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_runs: usize,
    pub replicate: usize,
    pub seed: u64,
    pub rmsecv: f64,
    pub n_selected: usize,
}

/// `replicates` STRS runs for every entry of `runs`. Replicate `r` of run
/// count `n` uses seed `derive(derive(master, REPLICATE, n), REPLICATE, r)`,
/// so the groups are independent. Rows come back ordered by run count, then
/// replicate.
pub fn sweep(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    runs: &[usize],
    replicates: usize,
    master_seed: u64,
    base: &StrsConfig,
) -> descforge::Result<Vec<SweepRow>> {
    let jobs: Vec<(usize, usize)> = runs
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(n_runs, replicate)| {
            let group = seed::derive(master_seed, seed::stream::REPLICATE, n_runs as u64);
            let seed_value = seed::derive(group, seed::stream::REPLICATE, replicate as u64);
            let config = StrsConfig {
                n_runs,
                seed: seed_value,
                ..base.clone()
            };
            let result = run_strs(x, y, &config)?;
            Ok(SweepRow {
                n_runs,
                replicate,
                seed: seed_value,
                rmsecv: result.best_rmsecv,
                n_selected: result.best_subset.len(),
            })
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn sweep_runs(a: &SweepArgs, seed_flag: Option<u64>, settings: &Settings) -> CmdResult {
    let seed_value = settings.seed(seed_flag, DEFAULT_SEED)?;
    let runs = settings.list(a.runs.clone(), "runs", DEFAULT_SWEEP_RUNS.to_vec())?;
    let replicates = settings.value(a.replicates, "replicates", DEFAULT_REPLICATES)?;
    if replicates < 2 {
        return Err(CliError::usage(format!(
            "--replicates must be >= 2, got {replicates}"
        )));
    }
    if runs.is_empty() {
        return Err(CliError::usage("--runs needs at least one value"));
    }
    let defaults = StrsConfig::default();
    let base = StrsConfig {
        sample_ratio: settings.value(a.sample_ratio, "sample-ratio", defaults.sample_ratio)?,
        n_latent: positive("nlv", settings.value(a.nlv, "nlv", defaults.n_latent)?)?,
        cv_folds: folds(&a.split, settings)?,
        ..defaults
    };
    for &n in &runs {
        StrsConfig {
            n_runs: n,
            ..base.clone()
        }
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let data = Dataset::from_args(&a.data, settings)?;
    let part = Partition::new(&data, test_fraction(&a.split, settings)?, seed_value)?;
    let dir = out_dir(a.out_dir.clone(), settings)?;

    let rows = sweep(
        part.x_train.view(),
        part.y_train.view(),
        &runs,
        replicates,
        seed_value,
        &base,
    )?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n_runs.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
                r.rmsecv.to_string(),
                r.n_selected.to_string(),
            ]
        })
        .collect();
    let path = dir.join("sweep.csv");
    write_rows_to(
        &path,
        &["n_runs", "replicate", "seed", "rmsecv", "n_selected"],
        &table,
    )?;
    for &n in &runs {
        let mut v: Vec<f64> = rows
            .iter()
            .filter(|r| r.n_runs == n)
            .map(|r| r.rmsecv)
            .collect();
        println!("N={n}: median RMSECV {:.4}", median(&mut v));
    }
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// nlv-curve
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct NlvSummary {
    chosen: usize,
    argmin: usize,
    alpha: f64,
    cv: &'static str,
    seed: u64,
}

fn nlv_curve(a: &NlvCurveArgs, seed_flag: Option<u64>, settings: &Settings) -> CmdResult {
    let seed_value = settings.seed(seed_flag, DEFAULT_SEED)?;
    let max_lv = positive(
        "max-lv",
        settings.value(a.max_lv, "max-lv", DEFAULT_MAX_LV)?,
    )?;
    let alpha = settings.value(a.alpha, "alpha", DEFAULT_ALPHA)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CliError::usage(format!(
            "--alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let scheme = settings.choice(a.cv, "cv")?.unwrap_or(CvArg::Kfold);
    let cv = match scheme {
        CvArg::Kfold => CrossValidator::kfold(folds(&a.split, settings)?, seed_value),
        CvArg::MonteCarlo => CrossValidator::monte_carlo(
            positive(
                "mc-iterations",
                settings.value(a.mc_iterations, "mc-iterations", DEFAULT_MC_ITERATIONS)?,
            )?,
            DEFAULT_MC_TRAIN_FRACTION,
            seed_value,
        ),
    };
    let data = Dataset::from_args(&a.data, settings)?;
    let part = Partition::new(&data, test_fraction(&a.split, settings)?, seed_value)?;
    let dir = out_dir(a.out_dir.clone(), settings)?;
    let (m, p) = part.x_train.dim();
    let limit = cv.max_latent(m, p).min(max_latent(m, p));
    if max_lv > limit {
        return Err(CliError::usage(format!(
            "--max-lv {max_lv} exceeds {limit}, the most any fold supports"
        )));
    }

    let selection = select_n_latent(part.x_train.view(), part.y_train.view(), max_lv, &cv, alpha)?;
    let model = PlsModel::fit(part.x_train.view(), part.y_train.view(), max_lv, cv.scaling)?;
    let rows: Vec<Vec<String>> = selection
        .curve
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let pred = model
                .truncated(point.n_latent)
                .predict(part.x_test.view())?;
            Ok(vec![
                point.n_latent.to_string(),
                point.rmsecv.to_string(),
                rmsep(part.y_test.view(), pred.view())?.to_string(),
                selection.f_ratio[i].to_string(),
                selection.f_critical[i].to_string(),
            ])
        })
        .collect::<descforge::Result<_>>()?;
    write_rows_to(
        &dir.join("nlv_curve.csv"),
        &["n_latent", "rmsecv", "rmsep", "f_ratio", "f_critical"],
        &rows,
    )?;
    write_json(
        &dir.join("nlv.json"),
        &NlvSummary {
            chosen: selection.chosen,
            argmin: selection.argmin,
            alpha,
            cv: match scheme {
                CvArg::Kfold => "kfold",
                CvArg::MonteCarlo => "monte-carlo",
            },
            seed: seed_value,
        },
    )?;
    println!(
        "chosen nLV {} (minimum RMSECV at {})",
        selection.chosen, selection.argmin
    );
    Ok(())
}
