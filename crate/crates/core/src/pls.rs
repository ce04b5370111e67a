//! Single-response partial least squares (PLS1) via NIPALS.
//!
//! The fitted model keeps the composite weight matrix `R = W (PᵀW)⁻¹`, so
//! scores of the (scaled) input are `T = X R` directly and the composite
//! coefficient vector is `b = R c`, where `c` regresses `y` on `T`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{ScalingMode, ScalingParams};
use crate::error::{Error, Result};

/// Relative tolerance below which a residual is treated as exhausted.
pub const EXHAUSTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    n_latent: usize,
    n_requested: usize,
    x_weights: Array2<f64>,
    inner_coefficients: Array1<f64>,
    coefficients: Array1<f64>,
    scaling: ScalingParams,
    column_map: Vec<usize>,
}

/// Largest admissible latent-variable count for an `m × p` training matrix.
pub fn max_latent(m: usize, p: usize) -> usize {
    p.min(m.saturating_sub(1))
}

impl PlsModel {
    /// Fits on every column of `x`. Scaling is fitted on `x`, `y` and
    /// stored; zero-variance columns (possible on resampled subsets) are
    /// centred to zero and receive a zero coefficient.
    pub fn fit(
        x: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        n_latent: usize,
        mode: ScalingMode,
    ) -> Result<Self> {
        let (m, p) = x.dim();
        if y.len() != m {
            return Err(Error::Shape {
                expected: format!("{m} responses"),
                actual: y.len().to_string(),
            });
        }
        if m < 2 {
            return Err(Error::InvalidData(format!(
                "PLS needs at least 2 samples, got {m}"
            )));
        }
        let max = max_latent(m, p);
        if n_latent == 0 || n_latent > max {
            return Err(Error::LatentCount {
                requested: n_latent,
                max,
            });
        }

        let scaling = ScalingParams::fit_lenient(x, y, mode);
        let x0 = scaling.scale_x(x)?;
        let y0 = scaling.scale_y(y);
        let (x_weights, inner_coefficients) = nipals(x0, y0, n_latent);
        let coefficients = x_weights.dot(&inner_coefficients);

        Ok(Self {
            n_latent: inner_coefficients.len(),
            n_requested: n_latent,
            x_weights,
            inner_coefficients,
            coefficients,
            scaling,
            column_map: (0..p).collect(),
        })
    }

    /// Fits on the listed columns of `x_full`; `column_map` records them.
    pub fn fit_columns(
        x_full: ArrayView2<'_, f64>,
        y: ArrayView1<'_, f64>,
        columns: &[usize],
        n_latent: usize,
        mode: ScalingMode,
    ) -> Result<Self> {
        if let Some(&j) = columns.iter().find(|&&j| j >= x_full.ncols()) {
            return Err(Error::InvalidParameter(format!(
                "column {j} out of range for {} descriptors",
                x_full.ncols()
            )));
        }
        let sub = x_full.select(Axis(1), columns);
        let mut model = Self::fit(sub.view(), y, n_latent, mode)?;
        model.column_map = columns.to_vec();
        Ok(model)
    }

    /// Components actually extracted (≤ requested when the residual exhausts).
    pub fn n_latent(&self) -> usize {
        self.n_latent
    }

    pub fn n_requested(&self) -> usize {
        self.n_requested
    }

    /// Composite weights `R` (subset size × n_latent).
    pub fn x_weights(&self) -> ArrayView2<'_, f64> {
        self.x_weights.view()
    }

    /// `c`: regression of the centred response on the scores.
    pub fn inner_coefficients(&self) -> ArrayView1<'_, f64> {
        self.inner_coefficients.view()
    }

    /// `b = R c` in scaled descriptor units, one entry per fitted column.
    pub fn coefficients(&self) -> ArrayView1<'_, f64> {
        self.coefficients.view()
    }

    pub fn scaling(&self) -> &ScalingParams {
        &self.scaling
    }

    pub fn column_map(&self) -> &[usize] {
        &self.column_map
    }

    /// Coefficients in raw descriptor units.
    pub fn raw_coefficients(&self) -> Array1<f64> {
        &self.coefficients / &self.scaling.x_stds
    }

    pub fn intercept(&self) -> f64 {
        self.scaling.y_mean - self.raw_coefficients().dot(&self.scaling.x_means)
    }

    /// Same model restricted to its first `a` components.
    pub fn truncated(&self, a: usize) -> Self {
        let a = a.min(self.n_latent);
        let x_weights = self.x_weights.slice(s![.., ..a]).to_owned();
        let inner_coefficients = self.inner_coefficients.slice(s![..a]).to_owned();
        let coefficients = x_weights.dot(&inner_coefficients);
        Self {
            n_latent: a,
            n_requested: a.max(1).min(self.n_requested),
            x_weights,
            inner_coefficients,
            coefficients,
            scaling: self.scaling.clone(),
            column_map: self.column_map.clone(),
        }
    }

    /// Predicts from a matrix holding exactly the fitted columns, in
    /// `column_map` order.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let xs = self.scaling.scale_x(x)?;
        Ok(self.scaling.unscale_y(xs.dot(&self.coefficients).view()))
    }

    /// Predicts from a full-width matrix, projecting through `column_map`.
    pub fn predict_full(&self, x_full: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let needed = self.column_map.iter().max().map_or(0, |&j| j + 1);
        if x_full.ncols() < needed {
            return Err(Error::Shape {
                expected: format!("at least {needed} columns"),
                actual: x_full.ncols().to_string(),
            });
        }
        self.predict(x_full.select(Axis(1), &self.column_map).view())
    }

    /// Latent scores `T = X R` of (raw, fitted-column) input.
    pub fn scores(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok(self.scaling.scale_x(x)?.dot(&self.x_weights))
    }

    /// Prediction through the latent path `T c`, for cross-checking
    /// [`PlsModel::predict`].
    pub fn predict_latent(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let t = self.scores(x)?;
        Ok(self
            .scaling
            .unscale_y(t.dot(&self.inner_coefficients).view()))
    }

    /// Normalised `|b|` weights scattered into a `full_p`-length vector.
    pub fn descriptor_weights(&self, full_p: usize) -> Result<DescriptorWeights> {
        DescriptorWeights::from_coefficients(
            self.coefficients
                .as_slice()
                .expect("contiguous coefficients"),
            &self.column_map,
            full_p,
        )
    }
}

/// Single-response NIPALS with X and y deflation. Returns the composite
/// weights `R` and the inner coefficients `c`; stops early when the X
/// residual or the covariance with the y residual vanishes.
fn nipals(mut x: Array2<f64>, mut y: Array1<f64>, n_latent: usize) -> (Array2<f64>, Array1<f64>) {
    let p = x.ncols();
    let x_norm0 = frobenius(&x);
    let y_norm0 = y.dot(&y).sqrt();
    let mut ws: Vec<Array1<f64>> = Vec::with_capacity(n_latent);
    let mut ps: Vec<Array1<f64>> = Vec::with_capacity(n_latent);
    let mut qs: Vec<f64> = Vec::with_capacity(n_latent);

    for _ in 0..n_latent {
        if x_norm0 == 0.0 || frobenius(&x) <= EXHAUSTION_TOL * x_norm0 {
            break;
        }
        // For one response the NIPALS inner loop converges after a single
        // pass: the weight is the normalised covariance direction.
        let mut w = x.t().dot(&y);
        let w_norm = w.dot(&w).sqrt();
        if w_norm <= EXHAUSTION_TOL * x_norm0 * y_norm0 || w_norm == 0.0 {
            break;
        }
        w /= w_norm;
        let t = x.dot(&w);
        let tt = t.dot(&t);
        if tt <= f64::MIN_POSITIVE {
            break;
        }
        let loading = x.t().dot(&t) / tt;
        let q = y.dot(&t) / tt;

        let t_col = t.view().insert_axis(Axis(1));
        let l_row = loading.view().insert_axis(Axis(0));
        x -= &t_col.dot(&l_row);
        y.scaled_add(-q, &t);

        ws.push(w);
        ps.push(loading);
        qs.push(q);
    }

    let a = qs.len();
    let mut w_mat = Array2::zeros((p, a));
    let mut p_mat = Array2::zeros((p, a));
    for k in 0..a {
        w_mat.column_mut(k).assign(&ws[k]);
        p_mat.column_mut(k).assign(&ps[k]);
    }
    // R = W (PᵀW)⁻¹  ⇔  (PᵀW)ᵀ Rᵀ = Wᵀ
    let ptw = p_mat.t().dot(&w_mat);
    let r_t = solve(ptw.t().to_owned(), w_mat.t().to_owned());
    (r_t.reversed_axes(), Array1::from(qs))
}

fn frobenius(x: &Array2<f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting. `A` is the
/// small (n_latent × n_latent) and, in exact arithmetic, unit upper
/// triangular `(PᵀW)ᵀ`.
fn solve(mut a: Array2<f64>, mut b: Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))
            .unwrap_or(col);
        if pivot != col {
            for k in 0..n {
                a.swap([col, k], [pivot, k]);
            }
            for k in 0..b.ncols() {
                b.swap([col, k], [pivot, k]);
            }
        }
        let d = a[[col, col]];
        for row in col + 1..n {
            let f = a[[row, col]] / d;
            if f != 0.0 {
                for k in col..n {
                    a[[row, k]] -= f * a[[col, k]];
                }
                for k in 0..b.ncols() {
                    b[[row, k]] -= f * b[[col, k]];
                }
            }
        }
    }
    for row in (0..n).rev() {
        for k in 0..b.ncols() {
            let mut acc = b[[row, k]];
            for j in row + 1..n {
                acc -= a[[row, j]] * b[[j, k]];
            }
            b[[row, k]] = acc / a[[row, row]];
        }
    }
    b
}

/// `w_i = |b_i| / Σ|b|` over the full descriptor space; descriptors outside
/// the fitted subset are exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorWeights {
    pub weights: Vec<f64>,
    /// Set when every coefficient was zero and uniform weights over the
    /// subset were substituted.
    pub degenerate: bool,
}

impl DescriptorWeights {
    pub fn from_coefficients(
        coefficients: &[f64],
        column_map: &[usize],
        full_p: usize,
    ) -> Result<Self> {
        if coefficients.len() != column_map.len() {
            return Err(Error::Shape {
                expected: format!("{} coefficients", column_map.len()),
                actual: coefficients.len().to_string(),
            });
        }
        if column_map.len() > full_p || column_map.iter().any(|&j| j >= full_p) {
            return Err(Error::InvalidParameter(format!(
                "column map does not fit in {full_p} descriptors"
            )));
        }
        let total: f64 = coefficients.iter().map(|b| b.abs()).sum();
        let mut weights = vec![0.0; full_p];
        let degenerate = !(total > 0.0 && total.is_finite());
        if degenerate {
            let u = 1.0 / column_map.len().max(1) as f64;
            for &j in column_map {
                weights[j] = u;
            }
        } else {
            for (&j, b) in column_map.iter().zip(coefficients) {
                weights[j] = b.abs() / total;
            }
        }
        Ok(Self {
            weights,
            degenerate,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn univariate_slope_matches_least_squares() {
        let x = array![[-1.0], [0.0], [1.0]];
        let y = array![-2.0, 0.0, 2.0];
        let m = PlsModel::fit(x.view(), y.view(), 1, ScalingMode::Autoscale).unwrap();
        // Normal equations: slope = Σxy / Σx² = 4 / 2.
        assert!((m.raw_coefficients()[0] - 2.0).abs() < 1e-12);
        assert!(m.intercept().abs() < 1e-12);
        let pred = m.predict(array![[4.0]].view()).unwrap();
        assert!((pred[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn exact_fit_reproduces_training_response() {
        let x = array![
            [1.0, 0.5, -1.0],
            [2.0, -0.3, 0.4],
            [0.1, 1.5, 2.0],
            [-1.2, 0.7, 0.3],
            [0.8, -2.0, 1.1],
            [1.7, 0.2, -0.6]
        ];
        let y = x.dot(&array![1.5, -2.0, 0.5]) + 3.0;
        let m = PlsModel::fit(x.view(), y.view(), 3, ScalingMode::Autoscale).unwrap();
        let pred = m.predict(x.view()).unwrap();
        for (p, t) in pred.iter().zip(y.iter()) {
            assert!((p - t).abs() < 1e-8);
        }
    }

    #[test]
    fn mean_row_predicts_mean_response() {
        let x = array![[1.0, 2.0], [3.0, 1.0], [0.0, 5.0], [4.0, 4.0]];
        let y = array![1.0, 2.0, 4.0, 9.0];
        let m = PlsModel::fit(x.view(), y.view(), 1, ScalingMode::Autoscale).unwrap();
        let means = x.mean_axis(Axis(0)).unwrap().insert_axis(Axis(0));
        let pred = m.predict(means.view()).unwrap();
        assert!((pred[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_latent_counts_and_shapes() {
        let x = array![[1.0, 2.0], [3.0, 1.0], [0.0, 5.0]];
        let y = array![1.0, 2.0, 4.0];
        assert!(matches!(
            PlsModel::fit(x.view(), y.view(), 0, ScalingMode::Autoscale),
            Err(Error::LatentCount { .. })
        ));
        assert!(matches!(
            PlsModel::fit(x.view(), y.view(), 3, ScalingMode::Autoscale),
            Err(Error::LatentCount { max: 2, .. })
        ));
        let m = PlsModel::fit(x.view(), y.view(), 2, ScalingMode::Autoscale).unwrap();
        assert!(matches!(
            m.predict(array![[1.0]].view()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn rank_deficient_input_stops_early() {
        // Second column is twice the first: only one direction exists.
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [5.0, 10.0]];
        let y = array![1.0, 2.0, 2.5, 6.0];
        let m = PlsModel::fit(x.view(), y.view(), 2, ScalingMode::Autoscale).unwrap();
        assert_eq!(m.n_latent(), 1);
        assert_eq!(m.n_requested(), 2);
    }

    #[test]
    fn constant_response_gives_zero_coefficients() {
        let x = array![[1.0, 2.0], [2.0, 1.0], [3.0, 7.0]];
        let y = array![4.0, 4.0, 4.0];
        let m = PlsModel::fit(x.view(), y.view(), 1, ScalingMode::Autoscale).unwrap();
        assert_eq!(m.n_latent(), 0);
        assert!(m.coefficients().iter().all(|&b| b == 0.0));
        let w = m.descriptor_weights(2).unwrap();
        assert!(w.degenerate);
        assert_eq!(w.weights, [0.5, 0.5]);
    }

    #[test]
    fn weights_normalise_absolute_coefficients() {
        let w = DescriptorWeights::from_coefficients(&[3.0, -1.0], &[0, 1], 2).unwrap();
        assert_eq!(w.weights, [0.75, 0.25]);
        assert!(!w.degenerate);
        let w = DescriptorWeights::from_coefficients(&[1.0, 1.0], &[0, 2], 4).unwrap();
        assert_eq!(w.weights, [0.5, 0.0, 0.5, 0.0]);
        let w = DescriptorWeights::from_coefficients(&[0.0, 0.0], &[0, 1], 2).unwrap();
        assert_eq!(w.weights, [0.5, 0.5]);
        assert!(w.degenerate);
        assert!(DescriptorWeights::from_coefficients(&[1.0], &[5], 4).is_err());
    }

    #[test]
    fn truncation_matches_smaller_fit() {
        let x = array![
            [1.0, 0.5, -1.0, 0.2],
            [2.0, -0.3, 0.4, 1.0],
            [0.1, 1.5, 2.0, -0.7],
            [-1.2, 0.7, 0.3, 0.0],
            [0.8, -2.0, 1.1, 0.9],
            [1.7, 0.2, -0.6, -1.4],
            [0.3, 0.9, 0.8, 0.5]
        ];
        let y = array![1.0, -2.0, 0.5, 3.0, 2.2, -0.4, 1.1];
        let full = PlsModel::fit(x.view(), y.view(), 4, ScalingMode::Autoscale).unwrap();
        for a in 1..=4 {
            let small = PlsModel::fit(x.view(), y.view(), a, ScalingMode::Autoscale).unwrap();
            let cut = full.truncated(a);
            for (u, v) in small.coefficients().iter().zip(cut.coefficients()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fit_columns_records_map_and_predicts_full_width() {
        let x = array![
            [1.0, 9.0, 2.0],
            [2.0, 8.0, 1.0],
            [3.0, 1.0, 7.0],
            [4.0, 0.0, 3.0]
        ];
        let y = array![1.0, 2.0, 3.0, 5.0];
        let m =
            PlsModel::fit_columns(x.view(), y.view(), &[0, 2], 2, ScalingMode::Autoscale).unwrap();
        assert_eq!(m.column_map(), [0, 2]);
        let direct = m.predict(x.select(Axis(1), &[0, 2]).view()).unwrap();
        assert_eq!(direct, m.predict_full(x.view()).unwrap());
        let w = m.descriptor_weights(3).unwrap();
        assert_eq!(w.weights[1], 0.0);
    }
}
