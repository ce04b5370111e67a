//! Self-tuned reweighted sampling (STRS).
//!
//! Each of `N` sampling runs fits PLS on a Monte Carlo subsample restricted to
//! the surviving descriptors, keeps the top `round(p · rᵢ)` descriptors by
//! normalised `|b|` (enforced selection, with `rᵢ` an exponentially
//! decreasing retention ratio), then lets those descriptors compete through
//! weighted sampling with replacement. Every run's survivors are scored by
//! k-fold RMSECV on the full training set and the lowest-scoring subset wins.
//!
//! Random draws in run `i` come from the stream `(seed, STRS_RUN, i)`: first
//! the Monte Carlo subsample, then the competitive draws. All runs are scored
//! on one common fold assignment.

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::ScalingMode;
use crate::error::{Error, Result};
use crate::pls::{max_latent, PlsModel};
use crate::seed;
use crate::selection::{rank_by_weight, Method, MethodConfig, RunTrace, SelectionResult};
use crate::validation::CrossValidator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrsConfig {
    pub n_runs: usize,
    pub sample_ratio: f64,
    pub n_latent: usize,
    pub cv_folds: usize,
    pub seed: u64,
    pub min_subset: usize,
    pub scaling: ScalingMode,
}

impl Default for StrsConfig {
    fn default() -> Self {
        Self {
            n_runs: 100,
            sample_ratio: 0.8,
            n_latent: 10,
            cv_folds: 10,
            seed: 0,
            min_subset: 2,
            scaling: ScalingMode::Autoscale,
        }
    }
}

impl StrsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_runs must be >= 2, got {}",
                self.n_runs
            )));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sample_ratio must lie in (0, 1), got {}",
                self.sample_ratio
            )));
        }
        if self.min_subset < 2 {
            return Err(Error::InvalidParameter(format!(
                "min_subset must be >= 2, got {}",
                self.min_subset
            )));
        }
        if self.n_latent == 0 {
            return Err(Error::InvalidParameter("n_latent must be >= 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "cv_folds must be >= 2, got {}",
                self.cv_folds
            )));
        }
        Ok(())
    }
}

/// Constants of the retention schedule `rᵢ = a·e^{−k·i}` fixed by `r₁ = 1`
/// and `r_N = 2/p`: `k = ln(p/2)/(N−1)`, `a = (p/2)^{1/(N−1)} = e^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdfConstants {
    pub a: f64,
    pub k: f64,
    pub n_runs: usize,
}

impl RdfConstants {
    pub fn new(p: usize, n_runs: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParameter(format!(
                "retention schedule needs at least 3 descriptors, got {p}"
            )));
        }
        if n_runs < 2 {
            return Err(Error::InvalidParameter(format!(
                "retention schedule needs N >= 2, got {n_runs}"
            )));
        }
        let k = (p as f64 / 2.0).ln() / (n_runs - 1) as f64;
        Ok(Self {
            a: k.exp(),
            k,
            n_runs,
        })
    }

    /// Retention ratio of run `i` (1-based). Evaluated as `e^{−k(i−1)}`,
    /// algebraically `a·e^{−k·i}`, so run 1 is exactly 1.
    pub fn ratio(&self, i: usize) -> f64 {
        (-self.k * (i as f64 - 1.0)).exp()
    }
}

pub fn rdf_constants(p: usize, n_runs: usize) -> Result<RdfConstants> {
    RdfConstants::new(p, n_runs)
}

pub fn rdf_ratio(i: usize, constants: &RdfConstants) -> f64 {
    constants.ratio(i)
}

/// Enforced count for run `i`: `round(p · rᵢ)` clamped to `[min_subset, p]`.
pub fn enforced_count(p: usize, ratio: f64, min_subset: usize) -> usize {
    ((p as f64 * ratio).round() as usize).clamp(min_subset.min(p), p)
}

/// The `count` largest-weight descriptors (ascending index order). Only
/// strictly positive weights are eligible; ties go to the lower index.
pub fn enforced_selection(weights: &[f64], count: usize) -> Vec<usize> {
    let positive = (0..weights.len()).filter(|&j| weights[j] > 0.0);
    let mut top: Vec<usize> = rank_by_weight(positive, weights)
        .into_iter()
        .take(count)
        .collect();
    top.sort_unstable();
    top
}

/// `n_draws` independent draws with replacement, index `j` drawn with
/// probability `w_j / Σw`. Returns the distinct drawn indices, ascending.
pub fn tuned_reweighted_sampling<R: Rng + ?Sized>(
    weights: &[f64],
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n_draws == 0 {
        return Err(Error::InvalidParameter("n_draws must be >= 1".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "weights must be finite and non-negative, got {w}"
        )));
    }
    let support: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 0.0).collect();
    if support.is_empty() {
        return Err(Error::ZeroWeights);
    }
    let mut cumulative = Vec::with_capacity(support.len());
    let mut total = 0.0;
    for &j in &support {
        total += weights[j];
        cumulative.push(total);
    }

    let mut hit = vec![false; support.len()];
    for _ in 0..n_draws {
        let u = rng.random::<f64>() * total;
        let pos = cumulative
            .partition_point(|&c| c <= u)
            .min(support.len() - 1);
        hit[pos] = true;
    }
    Ok(support
        .into_iter()
        .zip(hit)
        .filter_map(|(j, h)| h.then_some(j))
        .collect())
}

/// Runs STRS on training data `x` (m × p), `y`. Scaling is refitted inside
/// every model fit, so raw or pre-scaled inputs give the same selection.
pub fn run_strs(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &StrsConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let (m, p) = x.dim();
    if y.len() != m {
        return Err(Error::Shape {
            expected: format!("{m} responses"),
            actual: y.len().to_string(),
        });
    }
    let rdf = RdfConstants::new(p, config.n_runs)?;
    if config.min_subset > p {
        return Err(Error::InvalidParameter(format!(
            "min_subset {} exceeds the {p} available descriptors",
            config.min_subset
        )));
    }
    let n_sample = (config.sample_ratio * m as f64).round() as usize;
    if n_sample < 3 {
        return Err(Error::InvalidParameter(format!(
            "sample ratio {} of {m} samples leaves fewer than 3 per run",
            config.sample_ratio
        )));
    }
    if config.cv_folds > m {
        return Err(Error::InvalidParameter(format!(
            "{} folds exceed {m} samples",
            config.cv_folds
        )));
    }
    let cv = CrossValidator::kfold(
        config.cv_folds,
        seed::derive(config.seed, seed::stream::STRS_CV, 0),
    )
    .with_scaling(config.scaling);

    let mut live: Vec<usize> = (0..p).collect();
    let mut traces = Vec::with_capacity(config.n_runs);
    for i in 1..=config.n_runs {
        let ratio = rdf.ratio(i);
        let target = enforced_count(p, ratio, config.min_subset);
        let mut rng = seed::rng(config.seed, seed::stream::STRS_RUN, i as u64);
        let run = RunContext {
            x,
            y,
            config,
            cv: &cv,
            n_sample,
        };
        let trace = match run.sample(&live, target.min(live.len()), &mut rng) {
            Ok((selected, degenerate)) => {
                let scored = run.score(&selected);
                live = selected.clone();
                match scored {
                    Ok((rmsecv, coefficient_vector)) => RunTrace {
                        run_index: i,
                        retention_ratio: ratio,
                        enforced_count: target,
                        selected_indices: selected,
                        coefficient_vector,
                        rmsecv,
                        degenerate_flag: degenerate,
                        failure: None,
                    },
                    Err(e) => failed_trace(i, ratio, target, selected, p, e),
                }
            }
            Err(e) => failed_trace(i, ratio, target, Vec::new(), p, e),
        };
        traces.push(trace);
    }

    SelectionResult::from_traces(
        Method::Strs,
        config.seed,
        MethodConfig::Strs(config.clone()),
        traces,
    )
}

fn failed_trace(
    run_index: usize,
    ratio: f64,
    target: usize,
    selected: Vec<usize>,
    p: usize,
    e: Error,
) -> RunTrace {
    RunTrace {
        run_index,
        retention_ratio: ratio,
        enforced_count: target,
        selected_indices: selected,
        coefficient_vector: vec![0.0; p],
        rmsecv: f64::INFINITY,
        degenerate_flag: true,
        failure: Some(e.to_string()),
    }
}

struct RunContext<'a, 'b> {
    x: ArrayView2<'a, f64>,
    y: ArrayView1<'a, f64>,
    config: &'b StrsConfig,
    cv: &'b CrossValidator,
    n_sample: usize,
}

impl RunContext<'_, '_> {
    /// Monte Carlo fit, enforced selection and competitive sampling. Returns
    /// the surviving subset and whether the weights were degenerate.
    fn sample<R: Rng>(
        &self,
        live: &[usize],
        target: usize,
        rng: &mut R,
    ) -> Result<(Vec<usize>, bool)> {
        let (m, p) = self.x.dim();
        let mut rows = index::sample(rng, m, self.n_sample).into_vec();
        rows.sort_unstable();
        let xs = self.x.select(Axis(0), &rows);
        let ys = self.y.select(Axis(0), &rows);
        let n_latent = self
            .config
            .n_latent
            .min(max_latent(self.n_sample, live.len()));
        let model =
            PlsModel::fit_columns(xs.view(), ys.view(), live, n_latent, self.config.scaling)?;
        let weights = model.descriptor_weights(p)?;
        let w = weights.as_slice();

        let mut enforced = enforced_selection(w, target);
        if enforced.len() < target {
            // Fewer positive weights than the schedule asks for: fill from the
            // remaining live descriptors so the count invariant still holds.
            let extra: Vec<usize> = live
                .iter()
                .copied()
                .filter(|j| !enforced.contains(j))
                .collect();
            enforced.extend(
                rank_by_weight(extra, w)
                    .into_iter()
                    .take(target - enforced.len()),
            );
            enforced.sort_unstable();
        }

        let mut candidate_weights = vec![0.0; p];
        for &j in &enforced {
            candidate_weights[j] = w[j];
        }
        if candidate_weights.iter().all(|&v| v == 0.0) {
            for &j in &enforced {
                candidate_weights[j] = 1.0;
            }
        }
        let mut selected = tuned_reweighted_sampling(&candidate_weights, enforced.len(), rng)?;
        let floor = self.config.min_subset.min(enforced.len());
        if selected.len() < floor {
            let rest: Vec<usize> = enforced
                .iter()
                .copied()
                .filter(|j| !selected.contains(j))
                .collect();
            let need = floor - selected.len();
            selected.extend(rank_by_weight(rest, w).into_iter().take(need));
            selected.sort_unstable();
        }
        Ok((selected, weights.degenerate))
    }

    /// k-fold RMSECV on the full training set and the zero-padded
    /// coefficient vector of the subset model.
    fn score(&self, selected: &[usize]) -> Result<(f64, Vec<f64>)> {
        let (m, p) = self.x.dim();
        score_subset(
            self.x,
            self.y,
            selected,
            self.config.n_latent,
            self.cv,
            m,
            p,
        )
    }
}

/// Shared by STRS and MC-UVE: RMSECV of `subset` with the latent count
/// clamped to what every fold supports, plus full-training-set coefficients
/// scattered into a `p`-length vector.
pub(crate) fn score_subset(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    subset: &[usize],
    n_latent: usize,
    cv: &CrossValidator,
    m: usize,
    p: usize,
) -> Result<(f64, Vec<f64>)> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty descriptor subset".into()));
    }
    let cv_latent = n_latent.min(cv.max_latent(m, subset.len()));
    if cv_latent == 0 {
        return Err(Error::LatentCount {
            requested: n_latent,
            max: 0,
        });
    }
    let result = cv.rmsecv_columns(x, y, subset, cv_latent)?;
    let model = PlsModel::fit_columns(
        x,
        y,
        subset,
        n_latent.min(max_latent(m, subset.len())),
        cv.scaling,
    )?;
    let mut coefficients = vec![0.0; p];
    for (&j, b) in subset.iter().zip(model.coefficients()) {
        coefficients[j] = *b;
    }
    Ok((result.rmsecv, coefficients))
}
