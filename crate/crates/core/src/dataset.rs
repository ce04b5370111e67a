//! Descriptor tables, activity vectors, scaling, splitting and synthetic data.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Header name that marks the optional sample-id column.
pub const ID_COLUMN: &str = "id";

/// m × p descriptor matrix with column names and sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorTable {
    values: Array2<f64>,
    descriptor_names: Vec<String>,
    sample_ids: Vec<String>,
}

impl DescriptorTable {
    pub fn new(
        values: Array2<f64>,
        descriptor_names: Vec<String>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        let (m, p) = values.dim();
        if m < 2 || p < 2 {
            return Err(Error::InvalidData(format!(
                "descriptor table must be at least 2x2, got {m}x{p}"
            )));
        }
        if descriptor_names.len() != p {
            return Err(Error::Shape {
                expected: format!("{p} descriptor names"),
                actual: descriptor_names.len().to_string(),
            });
        }
        if sample_ids.len() != m {
            return Err(Error::Shape {
                expected: format!("{m} sample ids"),
                actual: sample_ids.len().to_string(),
            });
        }
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::ParseCell {
                row: i + 1,
                column: descriptor_names[j].clone(),
                value: v.to_string(),
            });
        }
        let mut seen = HashSet::new();
        if let Some(dup) = descriptor_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::DuplicateColumn(dup.clone()));
        }
        seen.clear();
        if let Some(dup) = sample_ids.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::DuplicateSample(dup.clone()));
        }
        Ok(Self {
            values,
            descriptor_names,
            sample_ids,
        })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn descriptor_names(&self) -> &[String] {
        &self.descriptor_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_descriptors(&self) -> usize {
        self.values.ncols()
    }

    /// Rows in the given order. Fewer than two rows is rejected.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(
            self.values.select(Axis(0), rows),
            self.descriptor_names.clone(),
            rows.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        )
    }

    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        Self::new(
            self.values.select(Axis(1), columns),
            columns
                .iter()
                .map(|&j| self.descriptor_names[j].clone())
                .collect(),
            self.sample_ids.clone(),
        )
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.descriptor_names.iter().position(|n| n == name)
    }

    /// Indices of columns whose sample standard deviation is numerically zero.
    pub fn constant_columns(&self) -> Vec<usize> {
        column_stats(self.values.view())
            .into_iter()
            .enumerate()
            .filter(|(_, (mean, std))| is_degenerate(*mean, *std))
            .map(|(j, _)| j)
            .collect()
    }

    /// Removes zero-variance columns, returning the reduced table and the
    /// names that were dropped.
    pub fn drop_constant_columns(&self) -> Result<(Self, Vec<String>)> {
        let constant: HashSet<usize> = self.constant_columns().into_iter().collect();
        let keep: Vec<usize> = (0..self.n_descriptors())
            .filter(|j| !constant.contains(j))
            .collect();
        let mut dropped: Vec<usize> = constant.into_iter().collect();
        dropped.sort_unstable();
        let names = dropped
            .iter()
            .map(|&j| self.descriptor_names[j].clone())
            .collect();
        Ok((self.select_columns(&keep)?, names))
    }
}

/// Measured activity (pIC50 or any continuous response), one per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityVector(Array1<f64>);

impl ActivityVector {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "activity value at row {} is not finite",
                i + 1
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self(self.0.select(Axis(0), rows))
    }
}

fn check_pair(table: &DescriptorTable, activity: &ActivityVector) -> Result<()> {
    if table.n_samples() != activity.len() {
        return Err(Error::Shape {
            expected: format!("{} activity values", table.n_samples()),
            actual: activity.len().to_string(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

pub fn load_csv(
    path: impl AsRef<Path>,
    activity_column: &str,
) -> Result<(DescriptorTable, ActivityVector)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, activity_column)
}

/// Parses a header-first, comma-separated table. A column named `id` becomes
/// the sample ids; `activity_column` becomes the response; every other column
/// is a descriptor, in file order.
pub fn read_csv<R: Read>(
    reader: R,
    activity_column: &str,
) -> Result<(DescriptorTable, ActivityVector)> {
    let (table, activity) = read_table(reader, Some(activity_column))?;
    Ok((table, activity.expect("activity column requested")))
}

/// Like [`load_csv`] but the activity column is optional; with `None` every
/// non-id column is a descriptor.
pub fn load_table(
    path: impl AsRef<Path>,
    activity_column: Option<&str>,
) -> Result<(DescriptorTable, Option<ActivityVector>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_table(file, activity_column)
}

/// Reader behind [`read_csv`] and [`load_table`]. A requested activity
/// column that is missing is an error.
pub fn read_table<R: Read>(
    reader: R,
    activity_column: Option<&str>,
) -> Result<(DescriptorTable, Option<ActivityVector>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();

    let mut seen = HashSet::new();
    if let Some(dup) = headers.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(Error::DuplicateColumn(dup.clone()));
    }
    let activity_idx = match activity_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingActivity(name.to_owned()))?,
        ),
        None => None,
    };
    let id_idx = headers.iter().position(|h| h == ID_COLUMN);
    let descriptor_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| Some(c) != activity_idx && Some(c) != id_idx)
        .collect();

    let mut values = Vec::new();
    let mut activity = Vec::new();
    let mut ids = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let cell = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::ParseCell {
                    row: row + 1,
                    column: headers[c].clone(),
                    value: raw.to_owned(),
                }),
            }
        };
        for &c in &descriptor_cols {
            values.push(cell(c)?);
        }
        if let Some(c) = activity_idx {
            activity.push(cell(c)?);
        }
        ids.push(match id_idx {
            Some(c) => record.get(c).unwrap_or("").to_owned(),
            None => (row + 1).to_string(),
        });
    }

    let m = ids.len();
    let values = Array2::from_shape_vec((m, descriptor_cols.len()), values)
        .map_err(|e| Error::InvalidData(e.to_string()))?;
    let names = descriptor_cols
        .iter()
        .map(|&c| headers[c].clone())
        .collect();
    let table = DescriptorTable::new(values, names, ids)?;
    let activity = match activity_idx {
        Some(_) => Some(ActivityVector::new(Array1::from(activity))?),
        None => None,
    };
    Ok((table, activity))
}

/// Writes `id,<descriptors...>,<activity_name>`. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_csv<W: Write>(
    writer: W,
    table: &DescriptorTable,
    activity: &ActivityVector,
    activity_name: &str,
) -> Result<()> {
    check_pair(table, activity)?;
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![ID_COLUMN.to_owned()];
    header.extend(table.descriptor_names().iter().cloned());
    header.push(activity_name.to_owned());
    wtr.write_record(&header)?;
    for (i, row) in table.values().outer_iter().enumerate() {
        let mut rec = Vec::with_capacity(row.len() + 2);
        rec.push(table.sample_ids()[i].clone());
        rec.extend(row.iter().map(|v| v.to_string()));
        rec.push(activity.values()[i].to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    /// Subtract column means.
    Center,
    /// Subtract column means and divide by the sample standard deviation.
    Autoscale,
}

/// Column means/standard deviations for X plus the response mean. The
/// response is always centred only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub mode: ScalingMode,
    pub x_means: Array1<f64>,
    pub x_stds: Array1<f64>,
    pub y_mean: f64,
}

fn is_degenerate(mean: f64, std: f64) -> bool {
    std <= 1e-12 * (1.0 + mean.abs())
}

/// Per-column (mean, sample std).
fn column_stats(x: ArrayView2<'_, f64>) -> Vec<(f64, f64)> {
    let m = x.nrows() as f64;
    x.columns()
        .into_iter()
        .map(|col| {
            let mean = col.sum() / m;
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let std = if m > 1.0 {
                (ss / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            (mean, std)
        })
        .collect()
}

impl ScalingParams {
    /// Fits scaling on `x`, `y`. Autoscale rejects zero-variance columns and
    /// reports them by index.
    pub fn fit(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, mode: ScalingMode) -> Result<Self> {
        let params = Self::fit_lenient(x, y, mode);
        if mode == ScalingMode::Autoscale {
            let bad: Vec<String> = column_stats(x)
                .into_iter()
                .enumerate()
                .filter(|(_, (mean, std))| is_degenerate(*mean, *std))
                .map(|(j, _)| format!("column {j}"))
                .collect();
            if !bad.is_empty() {
                return Err(Error::ZeroVariance(bad));
            }
        }
        Ok(params)
    }

    /// Like [`ScalingParams::fit`] but a zero-variance column keeps std 1, so
    /// it is centred to an all-zero column instead of failing. Used for model
    /// fits on resampled subsets where a sparse descriptor can be constant.
    pub fn fit_lenient(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, mode: ScalingMode) -> Self {
        let stats = column_stats(x);
        let x_means = stats.iter().map(|s| s.0).collect();
        let x_stds = stats
            .iter()
            .map(|&(mean, std)| match mode {
                ScalingMode::Autoscale if !is_degenerate(mean, std) => std,
                _ => 1.0,
            })
            .collect();
        let y_mean = if y.is_empty() {
            0.0
        } else {
            y.sum() / y.len() as f64
        };
        Self {
            mode,
            x_means,
            x_stds,
            y_mean,
        }
    }

    pub fn n_columns(&self) -> usize {
        self.x_means.len()
    }

    pub fn scale_x(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_columns(x.ncols())?;
        Ok((&x - &self.x_means) / &self.x_stds)
    }

    pub fn unscale_x(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_columns(x.ncols())?;
        Ok(&x * &self.x_stds + &self.x_means)
    }

    pub fn scale_y(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        y.mapv(|v| v - self.y_mean)
    }

    pub fn unscale_y(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        y.mapv(|v| v + self.y_mean)
    }

    /// Restriction to a subset of columns.
    pub fn select(&self, columns: &[usize]) -> Self {
        Self {
            mode: self.mode,
            x_means: self.x_means.select(Axis(0), columns),
            x_stds: self.x_stds.select(Axis(0), columns),
            y_mean: self.y_mean,
        }
    }

    fn check_columns(&self, n: usize) -> Result<()> {
        if n != self.n_columns() {
            return Err(Error::Shape {
                expected: format!("{} columns", self.n_columns()),
                actual: n.to_string(),
            });
        }
        Ok(())
    }
}

/// Table-level scaling fit; zero-variance errors carry descriptor names.
pub fn fit_scaling(
    table: &DescriptorTable,
    activity: &ActivityVector,
    mode: ScalingMode,
) -> Result<ScalingParams> {
    check_pair(table, activity)?;
    ScalingParams::fit(table.values(), activity.values(), mode).map_err(|e| match e {
        Error::ZeroVariance(_) => Error::ZeroVariance(
            table
                .constant_columns()
                .into_iter()
                .map(|j| table.descriptor_names()[j].clone())
                .collect(),
        ),
        other => other,
    })
}

/// Returns scaled copies of `table` and `activity` using previously fitted
/// parameters (for test data: the training-set parameters).
pub fn apply_scaling(
    table: &DescriptorTable,
    activity: &ActivityVector,
    params: &ScalingParams,
) -> Result<(DescriptorTable, ActivityVector)> {
    check_pair(table, activity)?;
    let x = params.scale_x(table.values())?;
    let y = params.scale_y(activity.values());
    Ok((
        DescriptorTable::new(
            x,
            table.descriptor_names().to_vec(),
            table.sample_ids().to_vec(),
        )?,
        ActivityVector::new(y)?,
    ))
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Disjoint train/test partition of `0..m`, each side sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_random(m: usize, test_fraction: f64, seed: u64) -> Result<Split> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (m as f64 * test_fraction).round() as usize;
    if n_test < 2 || m.saturating_sub(n_test) < 2 {
        return Err(Error::InvalidParameter(format!(
            "split of {m} samples at test fraction {test_fraction} leaves {} train / {n_test} test; both need at least 2",
            m.saturating_sub(n_test)
        )));
    }
    let mut rng = seed::rng(seed, seed::stream::SPLIT, 0);
    let mut is_test = vec![false; m];
    for i in index::sample(&mut rng, m, n_test) {
        is_test[i] = true;
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| is_test[i]);
    Ok(Split { train, test })
}

// ---------------------------------------------------------------------------
// Synthetic planted-model data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub m: usize,
    pub p: usize,
    pub informative: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Seed of the frozen reference dataset used by the recovery experiments.
pub const REFERENCE_SEED: u64 = 20_240_101;

impl SynthSpec {
    /// 100 × 50, informative columns {3, 7, 11} with coefficients {2, 3, −1},
    /// noise sd 0.05.
    pub fn reference(seed: u64) -> Self {
        Self {
            m: 100,
            p: 50,
            informative: vec![3, 7, 11],
            coefficients: vec![2.0, 3.0, -1.0],
            noise_sd: 0.05,
            seed,
        }
    }
}

/// Planted truth written next to a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub informative: Vec<usize>,
    pub informative_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub table: DescriptorTable,
    pub activity: ActivityVector,
    pub truth: GroundTruth,
}

pub fn descriptor_name(j: usize) -> String {
    format!("d{j}")
}

fn synthetic_ids(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("s{i}")).collect()
}

/// X entries i.i.d. N(0, 1); `y = Σ c_j X[:, informative_j] + N(0, noise_sd²)`.
pub fn synthesize(spec: &SynthSpec) -> Result<Synthetic> {
    let SynthSpec {
        m,
        p,
        ref informative,
        ref coefficients,
        noise_sd,
        seed,
    } = *spec;
    if informative.len() != coefficients.len() {
        return Err(Error::InvalidParameter(format!(
            "{} informative indices but {} coefficients",
            informative.len(),
            coefficients.len()
        )));
    }
    if let Some(&j) = informative.iter().find(|&&j| j >= p) {
        return Err(Error::InvalidParameter(format!(
            "informative index {j} out of range for {p} descriptors"
        )));
    }
    let mut uniq = HashSet::new();
    if let Some(&j) = informative.iter().find(|&&j| !uniq.insert(j)) {
        return Err(Error::InvalidParameter(format!(
            "informative index {j} repeated"
        )));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise sd must be >= 0, got {noise_sd}"
        )));
    }

    let mut x_rng = seed::rng(seed, seed::stream::SYNTH, 0);
    let x = Array2::from_shape_simple_fn((m, p), || x_rng.sample::<f64, _>(StandardNormal));
    let mut noise_rng = seed::rng(seed, seed::stream::SYNTH, 1);
    let y: Array1<f64> = x
        .outer_iter()
        .map(|row| {
            let signal: f64 = informative
                .iter()
                .zip(coefficients)
                .map(|(&j, c)| c * row[j])
                .sum();
            let eps: f64 = noise_rng.sample(StandardNormal);
            signal + noise_sd * eps
        })
        .collect();

    let names: Vec<String> = (0..p).map(descriptor_name).collect();
    let truth = GroundTruth {
        informative: informative.clone(),
        informative_names: informative.iter().map(|&j| names[j].clone()).collect(),
        coefficients: coefficients.clone(),
        noise_sd,
        seed,
    };
    Ok(Synthetic {
        table: DescriptorTable::new(x, names, synthetic_ids(m))?,
        activity: ActivityVector::new(y)?,
        truth,
    })
}

/// Rank-one descriptors: `X = u vᵀ` with `u`, `v` standard normal, and
/// `y = coefficient · u + N(0, noise_sd²)`. A single latent direction carries
/// all of the signal.
pub fn synthesize_rank_one(
    m: usize,
    p: usize,
    coefficient: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Synthetic> {
    let mut rng = seed::rng(seed, seed::stream::SYNTH, 2);
    let u: Array1<f64> = (0..m)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let v: Array1<f64> = (0..p)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let x = Array2::from_shape_fn((m, p), |(i, j)| u[i] * v[j]);
    let y = u.mapv(|ui| coefficient * ui + noise_sd * rng.sample::<f64, _>(StandardNormal));
    Ok(Synthetic {
        table: DescriptorTable::new(x, (0..p).map(descriptor_name).collect(), synthetic_ids(m))?,
        activity: ActivityVector::new(y)?,
        truth: GroundTruth {
            informative: Vec::new(),
            informative_names: Vec::new(),
            coefficients: vec![coefficient],
            noise_sd,
            seed,
        },
    })
}
