//! Monte Carlo uninformative variable elimination (MC-UVE).
//!
//! Coefficients from many PLS fits on random subsamples give each descriptor
//! a stability index `mean(b_j) / (std(b_j) + ε)`. Descriptors are ranked by
//! `|stability|` and the best cut size is picked by k-fold RMSECV.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::ScalingMode;
use crate::error::{Error, Result};
use crate::pls::{max_latent, PlsModel};
use crate::seed;
use crate::selection::{rank_by_weight, Method, MethodConfig, RunTrace, SelectionResult};
use crate::strs::score_subset;
use crate::validation::CrossValidator;

pub const STABILITY_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McuveConfig {
    pub n_iterations: usize,
    pub sample_ratio: f64,
    pub n_latent: usize,
    /// Largest cut size scanned; `None` means half the descriptors, rounded
    /// up.
    pub max_selected: Option<usize>,
    pub cv_folds: usize,
    /// Step between scanned cut sizes.
    pub cut_stride: usize,
    pub seed: u64,
    pub scaling: ScalingMode,
}

impl Default for McuveConfig {
    fn default() -> Self {
        Self {
            n_iterations: 500,
            sample_ratio: 0.8,
            n_latent: 2,
            max_selected: None,
            cv_folds: 10,
            cut_stride: 1,
            seed: 0,
            scaling: ScalingMode::Autoscale,
        }
    }
}

impl McuveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_iterations must be >= 2, got {}",
                self.n_iterations
            )));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sample_ratio must lie in (0, 1), got {}",
                self.sample_ratio
            )));
        }
        if self.n_latent == 0 {
            return Err(Error::InvalidParameter("n_latent must be >= 1".into()));
        }
        if self.cut_stride == 0 {
            return Err(Error::InvalidParameter("cut_stride must be >= 1".into()));
        }
        if self.max_selected == Some(0) {
            return Err(Error::InvalidParameter("max_selected must be >= 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "cv_folds must be >= 2, got {}",
                self.cv_folds
            )));
        }
        Ok(())
    }

    pub fn max_selected_for(&self, p: usize) -> usize {
        self.max_selected.unwrap_or_else(|| p.div_ceil(2)).min(p)
    }

    /// Cut sizes scanned: `1, 1 + stride, …` and always `max_selected`.
    pub fn cut_sizes(&self, p: usize) -> Vec<usize> {
        let max = self.max_selected_for(p);
        let mut cuts: Vec<usize> = (1..=max).step_by(self.cut_stride).collect();
        if cuts.last() != Some(&max) {
            cuts.push(max);
        }
        cuts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVector {
    pub values: Vec<f64>,
    /// Resampled fits that failed and were left out.
    pub failed_fits: usize,
}

impl StabilityVector {
    /// Descriptor indices by `|stability|`, most stable first.
    pub fn ranking(&self) -> Vec<usize> {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        rank_by_weight(0..abs.len(), &abs)
    }
}

pub fn compute_stability(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &McuveConfig,
) -> Result<StabilityVector> {
    config.validate()?;
    let (m, p) = x.dim();
    if y.len() != m {
        return Err(Error::Shape {
            expected: format!("{m} responses"),
            actual: y.len().to_string(),
        });
    }
    let n_sample = (config.sample_ratio * m as f64).round() as usize;
    if n_sample < 2 {
        return Err(Error::InvalidParameter(format!(
            "sample ratio {} of {m} samples leaves fewer than 2 per fit",
            config.sample_ratio
        )));
    }
    let n_latent = config.n_latent.min(max_latent(n_sample, p));

    let fits: Vec<Result<Vec<f64>>> = (0..config.n_iterations)
        .into_par_iter()
        .map(|it| {
            let mut rng = seed::rng(config.seed, seed::stream::MCUVE_ITER, it as u64);
            let mut rows = index::sample(&mut rng, m, n_sample).into_vec();
            rows.sort_unstable();
            let model = PlsModel::fit(
                x.select(Axis(0), &rows).view(),
                y.select(Axis(0), &rows).view(),
                n_latent,
                config.scaling,
            )?;
            Ok(model.coefficients().to_vec())
        })
        .collect();

    let limit = config.n_iterations / 10;
    let failed = fits.iter().filter(|f| f.is_err()).count();
    if failed > limit || config.n_iterations - failed < 2 {
        let first = fits
            .iter()
            .find_map(|f| f.as_ref().err().map(|e| e.to_string()))
            .unwrap_or_default();
        return Err(Error::TooManyFailures {
            failed,
            total: config.n_iterations,
            limit,
            first,
        });
    }
    let rows: Vec<Vec<f64>> = fits.into_iter().filter_map(|f| f.ok()).collect();
    let n = rows.len();
    let coef = Array2::from_shape_vec((n, p), rows.into_iter().flatten().collect())
        .map_err(|e| Error::InvalidData(e.to_string()))?;

    let values = coef
        .columns()
        .into_iter()
        .map(|col| {
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / (n - 1) as f64;
            mean / (var.sqrt() + STABILITY_EPSILON)
        })
        .collect();
    Ok(StabilityVector {
        values,
        failed_fits: failed,
    })
}

/// Runs MC-UVE, returning the selection together with the stability vector
/// it was ranked by.
pub fn run_mcuve_with_stability(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &McuveConfig,
) -> Result<(SelectionResult, StabilityVector)> {
    let stability = compute_stability(x, y, config)?;
    let (m, p) = x.dim();
    if config.cv_folds > m {
        return Err(Error::InvalidParameter(format!(
            "{} folds exceed {m} samples",
            config.cv_folds
        )));
    }
    let ranking = stability.ranking();
    let cv = CrossValidator::kfold(
        config.cv_folds,
        seed::derive(config.seed, seed::stream::MCUVE_CV, 0),
    )
    .with_scaling(config.scaling);

    let traces: Vec<RunTrace> = config
        .cut_sizes(p)
        .into_par_iter()
        .enumerate()
        .map(|(pos, cut)| {
            let mut subset = ranking[..cut].to_vec();
            subset.sort_unstable();
            let ratio = cut as f64 / p as f64;
            match score_subset(x, y, &subset, config.n_latent, &cv, m, p) {
                Ok((rmsecv, coefficient_vector)) => RunTrace {
                    run_index: pos + 1,
                    retention_ratio: ratio,
                    enforced_count: cut,
                    selected_indices: subset,
                    coefficient_vector,
                    rmsecv,
                    degenerate_flag: false,
                    failure: None,
                },
                Err(e) => RunTrace {
                    run_index: pos + 1,
                    retention_ratio: ratio,
                    enforced_count: cut,
                    selected_indices: subset,
                    coefficient_vector: vec![0.0; p],
                    rmsecv: f64::INFINITY,
                    degenerate_flag: true,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();

    let result = SelectionResult::from_traces(
        Method::Mcuve,
        config.seed,
        MethodConfig::Mcuve(config.clone()),
        traces,
    )?;
    Ok((result, stability))
}

pub fn run_mcuve(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &McuveConfig,
) -> Result<SelectionResult> {
    run_mcuve_with_stability(x, y, config).map(|(r, _)| r)
}
