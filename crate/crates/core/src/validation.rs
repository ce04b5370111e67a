//! Cross-validation engines, latent-variable count selection and prediction
//! metrics.
//!
//! Scaling is refitted inside every training fold. Fold assignments come from
//! seeded streams and per-fold work is independent, so results are identical
//! for any rayon thread count.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::dataset::ScalingMode;
use crate::error::{Error, Result};
use crate::pls::{max_latent, PlsModel};
use crate::seed;

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MC_TRAIN_FRACTION: f64 = 0.8;

/// Squared-error total of one fold (or one Monte Carlo iteration).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldError {
    pub n: usize,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub rmsecv: f64,
    pub per_fold_errors: Vec<FoldError>,
    pub n_latent: usize,
    pub fold_assignment_seed: u64,
}

impl CvResult {
    /// Number of pooled held-out residuals.
    pub fn n_residuals(&self) -> usize {
        self.per_fold_errors.iter().map(|f| f.n).sum()
    }

    pub fn mse(&self) -> f64 {
        self.rmsecv * self.rmsecv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CvScheme {
    KFold {
        folds: usize,
    },
    MonteCarlo {
        iterations: usize,
        train_fraction: f64,
    },
}

/// A cross-validation protocol: scheme, assignment seed and per-fold
/// scaling mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossValidator {
    pub scheme: CvScheme,
    pub seed: u64,
    pub scaling: ScalingMode,
}

type FoldPlan = Vec<(Vec<usize>, Vec<usize>)>;

impl CrossValidator {
    pub fn kfold(folds: usize, seed: u64) -> Self {
        Self {
            scheme: CvScheme::KFold { folds },
            seed,
            scaling: ScalingMode::Autoscale,
        }
    }

    pub fn monte_carlo(iterations: usize, train_fraction: f64, seed: u64) -> Self {
        Self {
            scheme: CvScheme::MonteCarlo {
                iterations,
                train_fraction,
            },
            seed,
            scaling: ScalingMode::Autoscale,
        }
    }

    pub fn with_scaling(mut self, scaling: ScalingMode) -> Self {
        self.scaling = scaling;
        self
    }

    /// Smallest training-set size any fold will see for `m` samples.
    pub fn min_train_size(&self, m: usize) -> usize {
        match self.scheme {
            CvScheme::KFold { folds } => {
                let k = folds.max(1);
                m - m.div_ceil(k)
            }
            CvScheme::MonteCarlo { train_fraction, .. } => {
                (train_fraction * m as f64).round() as usize
            }
        }
    }

    /// Largest latent count every training fold can support with `p`
    /// descriptors.
    pub fn max_latent(&self, m: usize, p: usize) -> usize {
        max_latent(self.min_train_size(m), p)
    }

    /// (train, held-out) index sets in evaluation order.
    pub fn plan(&self, m: usize) -> Result<FoldPlan> {
        match self.scheme {
            CvScheme::KFold { folds } => {
                let assignment = kfold_assignment(m, folds, self.seed)?;
                Ok((0..folds)
                    .map(|f| {
                        let test: Vec<usize> = (0..m).filter(|&i| assignment[i] == f).collect();
                        let train = (0..m).filter(|&i| assignment[i] != f).collect();
                        (train, test)
                    })
                    .collect())
            }
            CvScheme::MonteCarlo {
                iterations,
                train_fraction,
            } => {
                if iterations == 0 {
                    return Err(Error::InvalidParameter(
                        "Monte Carlo CV needs at least one iteration".into(),
                    ));
                }
                if !(train_fraction > 0.0 && train_fraction < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "train fraction must lie in (0, 1), got {train_fraction}"
                    )));
                }
                let n_train = (train_fraction * m as f64).round() as usize;
                if n_train < 2 || n_train >= m {
                    return Err(Error::InvalidParameter(format!(
                        "train fraction {train_fraction} of {m} samples leaves no usable split"
                    )));
                }
                Ok((0..iterations)
                    .map(|it| {
                        let mut rng = seed::rng(self.seed, seed::stream::MCCV, it as u64);
                        let mut in_train = vec![false; m];
                        for i in index::sample(&mut rng, m, n_train) {
                            in_train[i] = true;
                        }
                        let (train, test): (Vec<usize>, Vec<usize>) =
                            (0..m).partition(|&i| in_train[i]);
                        (train, test)
                    })
                    .collect())
            }
        }
    }

    /// RMSECV of an `n_latent` PLS model over all columns of `x`.
    pub fn rmsecv(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        n_latent: usize,
    ) -> Result<CvResult> {
        let plan = self.plan(x.nrows())?;
        self.rmsecv_with_plan(x, y, n_latent, &plan)
    }

    /// RMSECV restricted to the given descriptor columns.
    pub fn rmsecv_columns(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        columns: &[usize],
        n_latent: usize,
    ) -> Result<CvResult> {
        let sub = x.select(Axis(1), columns);
        self.rmsecv(sub.view(), y, n_latent)
    }

    /// RMSECV under an explicit fold plan.
    pub fn rmsecv_with_plan(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        n_latent: usize,
        plan: &[(Vec<usize>, Vec<usize>)],
    ) -> Result<CvResult> {
        let mut curve = self.curve_with_plan(x, y, n_latent, plan, Some(n_latent))?;
        Ok(curve.pop().expect("one curve point"))
    }

    /// RMSECV for every latent count `1..=max_lv`, fitting each fold once.
    pub fn curve(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        max_lv: usize,
    ) -> Result<Vec<CvResult>> {
        let plan = self.plan(x.nrows())?;
        self.curve_with_plan(x, y, max_lv, &plan, None)
    }

    fn curve_with_plan(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        max_lv: usize,
        plan: &[(Vec<usize>, Vec<usize>)],
        only: Option<usize>,
    ) -> Result<Vec<CvResult>> {
        let m = x.nrows();
        if y.len() != m {
            return Err(Error::Shape {
                expected: format!("{m} responses"),
                actual: y.len().to_string(),
            });
        }
        if let Some((train, _)) = plan.iter().find(|(train, _)| train.len() < max_lv + 1) {
            return Err(Error::FoldTooSmall {
                train: train.len(),
                n_latent: max_lv,
            });
        }
        let lvs: Vec<usize> = match only {
            Some(a) => vec![a],
            None => (1..=max_lv).collect(),
        };

        // residuals[fold][lv_index][held-out position]
        let residuals: Vec<Vec<Array1<f64>>> = plan
            .par_iter()
            .map(|(train, test)| -> Result<Vec<Array1<f64>>> {
                let xt = x.select(Axis(0), train);
                let yt = y.select(Axis(0), train);
                let xv = x.select(Axis(0), test);
                let yv = y.select(Axis(0), test);
                let model = PlsModel::fit(xt.view(), yt.view(), max_lv, self.scaling)?;
                lvs.iter()
                    .map(|&a| Ok(&yv - &model.truncated(a).predict(xv.view())?))
                    .collect()
            })
            .collect::<Result<_>>()?;

        let kfold = matches!(self.scheme, CvScheme::KFold { .. });
        Ok(lvs
            .iter()
            .enumerate()
            .map(|(li, &a)| {
                let per_fold_errors: Vec<FoldError> = residuals
                    .iter()
                    .map(|r| FoldError {
                        n: r[li].len(),
                        sse: r[li].iter().map(|e| e * e).sum(),
                    })
                    .collect();
                let (sse, n) = if kfold {
                    // Pool per sample in index order so the total does not
                    // depend on how samples were dealt into folds.
                    let mut sq = vec![0.0; m];
                    for ((_, test), r) in plan.iter().zip(&residuals) {
                        for (&i, e) in test.iter().zip(r[li].iter()) {
                            sq[i] = e * e;
                        }
                    }
                    (sq.iter().sum::<f64>(), m)
                } else {
                    (
                        per_fold_errors.iter().map(|f| f.sse).sum::<f64>(),
                        per_fold_errors.iter().map(|f| f.n).sum::<usize>(),
                    )
                };
                CvResult {
                    rmsecv: (sse / n as f64).sqrt(),
                    per_fold_errors,
                    n_latent: a,
                    fold_assignment_seed: self.seed,
                }
            })
            .collect())
    }
}

/// Fold label per sample: a seeded shuffle dealt into `k` contiguous blocks,
/// the first `m mod k` blocks one larger.
pub fn kfold_assignment(m: usize, k: usize, seed_value: u64) -> Result<Vec<usize>> {
    if k < 2 || k > m {
        return Err(Error::InvalidParameter(format!(
            "fold count must lie in [2, {m}], got {k}"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut seed::rng(seed_value, seed::stream::KFOLD, 0));
    let base = m / k;
    let extra = m % k;
    let mut assignment = vec![0; m];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &i in &order[pos..pos + size] {
            assignment[i] = fold;
        }
        pos += size;
    }
    Ok(assignment)
}

pub fn kfold_rmsecv(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    n_latent: usize,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    CrossValidator::kfold(k, seed).rmsecv(x, y, n_latent)
}

pub fn monte_carlo_cv(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    n_latent: usize,
    n_iterations: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<CvResult> {
    CrossValidator::monte_carlo(n_iterations, train_fraction, seed).rmsecv(x, y, n_latent)
}

/// Outcome of latent-count selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlvSelection {
    pub chosen: usize,
    /// Latent count with the lowest RMSECV (smallest on ties).
    pub argmin: usize,
    pub alpha: f64,
    pub curve: Vec<CvResult>,
    /// MSE(candidate) / MSE(argmin), per curve point.
    pub f_ratio: Vec<f64>,
    /// Upper-alpha quantile of F(n_candidate, n_argmin), per curve point.
    pub f_critical: Vec<f64>,
}

/// Chooses the smallest latent count whose pooled CV mean squared error is
/// not significantly larger than the minimum, by a one-sided F-test at
/// level `alpha`.
pub fn select_n_latent(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    max_lv: usize,
    cv: &CrossValidator,
    alpha: f64,
) -> Result<NlvSelection> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if max_lv == 0 {
        return Err(Error::LatentCount {
            requested: 0,
            max: max_latent(x.nrows(), x.ncols()),
        });
    }
    let curve = cv.curve(x, y, max_lv)?;
    select_from_curve(curve, alpha)
}

/// F-test selection over an already computed RMSECV curve (ordered by
/// latent count starting at 1).
pub fn select_from_curve(curve: Vec<CvResult>, alpha: f64) -> Result<NlvSelection> {
    let best = curve
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.mse().total_cmp(&b.mse()))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidParameter("empty RMSECV curve".into()))?;
    let best_mse = curve[best].mse();
    let best_n = curve[best].n_residuals() as f64;

    let mut f_ratio = Vec::with_capacity(curve.len());
    let mut f_critical = Vec::with_capacity(curve.len());
    let mut chosen = None;
    for (i, point) in curve.iter().enumerate() {
        let mse = point.mse();
        let ratio = if mse <= best_mse { 1.0 } else { mse / best_mse };
        let crit = FisherSnedecor::new(point.n_residuals() as f64, best_n)
            .map(|f| f.inverse_cdf(1.0 - alpha))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let acceptable = mse <= best_mse || ratio <= crit;
        if chosen.is_none() && i <= best && acceptable {
            chosen = Some(i);
        }
        f_ratio.push(ratio);
        f_critical.push(crit);
    }
    let chosen = chosen.unwrap_or(best);
    Ok(NlvSelection {
        chosen: curve[chosen].n_latent,
        argmin: curve[best].n_latent,
        alpha,
        curve,
        f_ratio,
        f_critical,
    })
}

fn check_metric_inputs(y_true: ArrayView1<'_, f64>, y_pred: ArrayView1<'_, f64>) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape {
            expected: format!("{} predictions", y_true.len()),
            actual: y_pred.len().to_string(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::InvalidData("metrics need at least 2 samples".into()));
    }
    Ok(())
}

fn sse(y_true: ArrayView1<'_, f64>, y_pred: ArrayView1<'_, f64>) -> f64 {
    y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum()
}

/// Root mean squared error of prediction.
pub fn rmsep(y_true: ArrayView1<'_, f64>, y_pred: ArrayView1<'_, f64>) -> Result<f64> {
    check_metric_inputs(y_true, y_pred)?;
    Ok((sse(y_true, y_pred) / y_true.len() as f64).sqrt())
}

/// Coefficient of determination `1 − SSres/SStot`, SStot about the mean of
/// `y_true`.
pub fn r_squared(y_true: ArrayView1<'_, f64>, y_pred: ArrayView1<'_, f64>) -> Result<f64> {
    check_metric_inputs(y_true, y_pred)?;
    let mean = y_true.sum() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::ConstantResponse);
    }
    Ok(1.0 - sse(y_true, y_pred) / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn metrics_by_hand() {
        let t = array![1.0, 2.0, 3.0];
        let p = array![2.0, 3.0, 4.0];
        // SSres = 3, SStot = 2.
        assert!((rmsep(t.view(), p.view()).unwrap() - 1.0).abs() < 1e-12);
        assert!((r_squared(t.view(), p.view()).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(rmsep(t.view(), t.view()).unwrap(), 0.0);
        assert_eq!(r_squared(t.view(), t.view()).unwrap(), 1.0);
        let shifted = &t - 0.7;
        assert!((rmsep(t.view(), shifted.view()).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn metric_errors() {
        let c = array![2.0, 2.0, 2.0];
        assert!(matches!(
            r_squared(c.view(), c.view()),
            Err(Error::ConstantResponse)
        ));
        assert!(rmsep(array![1.0].view(), array![1.0].view()).is_err());
        assert!(rmsep(array![1.0, 2.0].view(), array![1.0].view()).is_err());
    }

    #[test]
    fn fold_sizes_follow_remainder_rule() {
        let a = kfold_assignment(23, 5, 1).unwrap();
        let mut sizes = [0usize; 5];
        for f in a {
            sizes[f] += 1;
        }
        assert_eq!(sizes, [5, 5, 5, 4, 4]);
        assert!(kfold_assignment(5, 1, 0).is_err());
        assert!(kfold_assignment(5, 6, 0).is_err());
    }

    fn line(m: usize) -> (Array2<f64>, Array1<f64>) {
        let x = Array2::from_shape_fn((m, 1), |(i, _)| i as f64 * 0.37 - 3.0);
        let y = x.column(0).mapv(|v| 2.0 * v);
        (x, y)
    }

    #[test]
    fn noiseless_line_has_zero_cv_error() {
        let (x, y) = line(20);
        let r = kfold_rmsecv(x.view(), y.view(), 1, 5, 3).unwrap();
        assert!(r.rmsecv < 1e-8);
        let r = monte_carlo_cv(x.view(), y.view(), 1, 10, 0.8, 3).unwrap();
        assert!(r.rmsecv < 1e-8);
    }

    #[test]
    fn fold_too_small_is_rejected() {
        let (x, y) = line(6);
        assert!(matches!(
            kfold_rmsecv(x.view(), y.view(), 5, 3, 0),
            Err(Error::FoldTooSmall { .. })
        ));
    }

    #[test]
    fn monte_carlo_single_iteration_is_one_split() {
        let x = array![
            [1.0, 0.2],
            [2.0, 1.1],
            [3.0, -0.4],
            [4.0, 0.9],
            [5.0, 0.0],
            [6.0, 2.0]
        ];
        let y = array![1.0, 2.5, 2.9, 4.4, 5.2, 6.6];
        let cv = CrossValidator::monte_carlo(1, 0.5, 11);
        let r = cv.rmsecv(x.view(), y.view(), 1).unwrap();
        let (train, test) = cv.plan(6).unwrap().remove(0);
        let model = PlsModel::fit(
            x.select(Axis(0), &train).view(),
            y.select(Axis(0), &train).view(),
            1,
            ScalingMode::Autoscale,
        )
        .unwrap();
        let pred = model.predict(x.select(Axis(0), &test).view()).unwrap();
        let direct = rmsep(y.select(Axis(0), &test).view(), pred.view()).unwrap();
        assert!((r.rmsecv - direct).abs() < 1e-14);
    }

    #[test]
    fn selection_limits() {
        let mk = |mses: &[f64]| -> Vec<CvResult> {
            mses.iter()
                .enumerate()
                .map(|(i, &m)| CvResult {
                    rmsecv: m.sqrt(),
                    per_fold_errors: vec![FoldError {
                        n: 50,
                        sse: m * 50.0,
                    }],
                    n_latent: i + 1,
                    fold_assignment_seed: 0,
                })
                .collect()
        };
        let curve = mk(&[2.0, 1.05, 1.0, 1.2]);
        // F(50, 50) upper 5% point is about 1.6: 1.05 is not significantly worse.
        let s = select_from_curve(curve.clone(), 0.05).unwrap();
        assert_eq!((s.argmin, s.chosen), (3, 2));
        // alpha = 1 accepts nothing worse than the minimum.
        let s = select_from_curve(curve.clone(), 1.0).unwrap();
        assert_eq!(s.chosen, 3);
        // A vanishing level accepts everything up to the minimum.
        let s = select_from_curve(curve, 1e-12).unwrap();
        assert_eq!(s.chosen, 1);
    }
}
