//! PLS against an independent least-squares oracle, plus structural
//! properties of the fitted model.

use descforge::dataset::ScalingMode;
use descforge::pls::{DescriptorWeights, PlsModel};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ordinary least squares with intercept through the normal equations,
/// solved by nalgebra's LU. Returns (slopes, intercept).
fn ols_normal_equations(x: &Array2<f64>, y: &Array1<f64>) -> (Vec<f64>, f64) {
    let (m, p) = x.dim();
    let a = DMatrix::from_fn(m, p + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let b = DVector::from_iterator(m, y.iter().copied());
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let beta = ata.lu().solve(&atb).expect("full-rank design");
    (beta.iter().skip(1).copied().collect(), beta[0])
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
    let x = Array2::from_shape_fn((m, p), |_| rng.random::<f64>() * 4.0 - 2.0);
    let beta: Array1<f64> = (0..p).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
    let noise: Array1<f64> = (0..m).map(|_| rng.random::<f64>() * 0.2 - 0.1).collect();
    let y = x.dot(&beta) + 1.5 + noise;
    (x, y)
}

#[test]
fn full_component_pls_equals_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let p = rng.random_range(2..=10);
        let m = rng.random_range(p + 2..=20);
        let (x, y) = random_instance(&mut rng, m, p);
        let model = PlsModel::fit(x.view(), y.view(), p, ScalingMode::Autoscale).unwrap();
        let (slopes, intercept) = ols_normal_equations(&x, &y);
        let raw = model.raw_coefficients();
        for (got, want) in raw.iter().zip(&slopes) {
            assert!(
                (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
        assert!((model.intercept() - intercept).abs() <= 1e-6 * intercept.abs().max(1.0));
    }
}

#[test]
fn ten_by_six_full_rank_matches_pseudoinverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (x, y) = random_instance(&mut rng, 10, 6);
    let model = PlsModel::fit(x.view(), y.view(), 6, ScalingMode::Autoscale).unwrap();
    let xc = DMatrix::from_fn(10, 7, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let pinv = xc.pseudo_inverse(1e-12).unwrap();
    let beta = pinv * DVector::from_iterator(10, y.iter().copied());
    for (got, want) in model.raw_coefficients().iter().zip(beta.iter().skip(1)) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

fn matrix_strategy() -> impl Strategy<Value = (Array2<f64>, Array1<f64>, usize)> {
    (3usize..8, 4usize..16).prop_flat_map(|(p, extra)| {
        let m = p + extra;
        (
            proptest::collection::vec(-3.0f64..3.0, m * p),
            proptest::collection::vec(-3.0f64..3.0, m),
            1..=p,
        )
            .prop_map(move |(xv, yv, a)| {
                (
                    Array2::from_shape_vec((m, p), xv).unwrap(),
                    Array1::from(yv),
                    a,
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composite_and_latent_paths_agree((x, y, a) in matrix_strategy()) {
        let model = PlsModel::fit(x.view(), y.view(), a, ScalingMode::Autoscale).unwrap();
        let direct = model.predict(x.view()).unwrap();
        let latent = model.predict_latent(x.view()).unwrap();
        for (u, v) in direct.iter().zip(latent.iter()) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn autoscaling_absorbs_column_rescaling((x, y, a) in matrix_strategy(), alpha in 0.01f64..100.0, col in 0usize..3) {
        let mut xs = x.clone();
        xs.column_mut(col).mapv_inplace(|v| v * alpha);
        let m1 = PlsModel::fit(x.view(), y.view(), a, ScalingMode::Autoscale).unwrap();
        let m2 = PlsModel::fit(xs.view(), y.view(), a, ScalingMode::Autoscale).unwrap();
        let p1 = m1.predict(x.view()).unwrap();
        let p2 = m2.predict(xs.view()).unwrap();
        for (u, v) in p1.iter().zip(p2.iter()) {
            prop_assert!((u - v).abs() < 1e-8 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn weights_are_a_distribution_and_permute_with_columns((x, y, a) in matrix_strategy(), seed in any::<u64>()) {
        let p = x.ncols();
        let model = PlsModel::fit(x.view(), y.view(), a, ScalingMode::Autoscale).unwrap();
        let w = model.descriptor_weights(p).unwrap();
        prop_assert!(w.weights.iter().all(|&v| v >= 0.0));
        prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let mut perm: Vec<usize> = (0..p).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let xp = x.select(Axis(1), &perm);
        let wp = PlsModel::fit(xp.view(), y.view(), a, ScalingMode::Autoscale)
            .unwrap()
            .descriptor_weights(p)
            .unwrap();
        for (k, &j) in perm.iter().enumerate() {
            prop_assert!((wp.weights[k] - w.weights[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_padding_outside_subset(coefs in proptest::collection::vec(-5.0f64..5.0, 1..6), full_extra in 0usize..6) {
        let n = coefs.len();
        let full_p = n * 2 + full_extra;
        let map: Vec<usize> = (0..n).map(|i| 2 * i).collect();
        let w = DescriptorWeights::from_coefficients(&coefs, &map, full_p).unwrap();
        for j in 0..full_p {
            if !map.contains(&j) {
                prop_assert_eq!(w.weights[j], 0.0);
            }
        }
        prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
