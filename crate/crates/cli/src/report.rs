//! JSON documents and CSV emitters written by the commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use descforge::dataset::GroundTruth;
use descforge::mcuve::StabilityVector;
use descforge::pls::PlsModel;
use descforge::selection::{Method, MethodConfig, RunTrace, SelectionResult};
use serde::{Deserialize, Serialize};

/// Headline numbers for one (method, dataset, seed) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `strs`, `mcuve` or `pls`.
    pub method: String,
    pub n_descriptors: usize,
    pub n_selected: usize,
    pub n_latent: usize,
    pub rmsecv: f64,
    pub rmsep: f64,
    pub r_squared: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub selected: Vec<String>,
    /// Seconds; the only field that differs between identical runs.
    pub wall_time: f64,
}

impl EvalReport {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rmsecv", self.rmsecv),
            ("rmsep", self.rmsep),
            ("r_squared", self.r_squared),
            ("wall_time", self.wall_time),
        ] {
            if !v.is_finite() {
                bail!("report field {name} is not finite ({v})");
            }
        }
        if self.n_selected > self.n_descriptors {
            bail!(
                "report selects {} of {} descriptors",
                self.n_selected,
                self.n_descriptors
            );
        }
        if self.selected.len() != self.n_selected {
            bail!(
                "report lists {} names for {} selected descriptors",
                self.selected.len(),
                self.n_selected
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedDescriptor {
    pub index: usize,
    pub name: String,
}

/// `selection.json`: a [`SelectionResult`] with descriptor names attached.
/// Indices refer to the dataset after any dropped constant columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDocument {
    pub method: Method,
    pub seed: u64,
    pub n_descriptors: usize,
    pub dropped_constant: Vec<String>,
    pub best_subset: Vec<NamedDescriptor>,
    pub best_rmsecv: f64,
    pub best_run_index: usize,
    pub config: MethodConfig,
    pub traces: Vec<RunTrace>,
}

impl SelectionDocument {
    pub fn new(result: SelectionResult, names: &[String], dropped_constant: Vec<String>) -> Self {
        Self {
            method: result.method,
            seed: result.seed,
            n_descriptors: names.len(),
            dropped_constant,
            best_subset: result
                .best_subset
                .iter()
                .map(|&index| NamedDescriptor {
                    index,
                    name: names[index].clone(),
                })
                .collect(),
            best_rmsecv: result.best_rmsecv,
            best_run_index: result.best_run_index,
            config: result.config,
            traces: result.traces,
        }
    }
}

/// `model.json`: a fitted model plus the names of the columns it reads, in
/// the order it reads them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub descriptor_names: Vec<String>,
    pub model: PlsModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub m: usize,
    pub p: usize,
    pub rank_one: bool,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// `run,retention_ratio,enforced_count,selected_count,rmsecv,degenerate`;
/// failed runs show `inf`.
pub fn write_trace_csv(path: &Path, traces: &[RunTrace]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "run",
        "retention_ratio",
        "enforced_count",
        "selected_count",
        "rmsecv",
        "degenerate",
    ])?;
    for t in traces {
        w.write_record([
            t.run_index.to_string(),
            t.retention_ratio.to_string(),
            t.enforced_count.to_string(),
            t.selected_indices.len().to_string(),
            t.rmsecv.to_string(),
            t.degenerate_flag.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per run, one column per descriptor.
pub fn write_coefficients_csv(path: &Path, traces: &[RunTrace], names: &[String]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(std::iter::once("run").chain(names.iter().map(String::as_str)))?;
    for t in traces {
        w.write_record(
            std::iter::once(t.run_index.to_string())
                .chain(t.coefficient_vector.iter().map(f64::to_string)),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stability_csv(
    path: &Path,
    stability: &StabilityVector,
    names: &[String],
) -> Result<()> {
    let mut rank = vec![0; names.len()];
    for (r, j) in stability.ranking().into_iter().enumerate() {
        rank[j] = r + 1;
    }
    let mut w = csv_writer(path)?;
    w.write_record(["descriptor", "stability", "rank"])?;
    for (j, name) in names.iter().enumerate() {
        w.write_record([
            name.clone(),
            stability.values[j].to_string(),
            rank[j].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub struct PredictionRow<'a> {
    pub sample_id: &'a str,
    pub split: &'static str,
    pub observed: f64,
    pub predicted: f64,
}

pub fn write_predictions_csv<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = PredictionRow<'a>>,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["sample_id", "split", "observed", "predicted"])?;
    for r in rows {
        w.write_record([
            r.sample_id.to_owned(),
            r.split.to_owned(),
            r.observed.to_string(),
            r.predicted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<W: Write>(writer: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows_to(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_rows(create(path)?, header, rows)
}
