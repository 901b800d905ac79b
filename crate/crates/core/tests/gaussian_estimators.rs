//! Estimators on correlated Gaussian tasks, checked against the closed-form
//! mutual information with critics built from the true densities.

use mitk::critic::{Dense, Mlp};
use mitk::estimators::{
    dv_bound, est_ba_lower, est_ba_upper, est_l1out, evaluate_fresh, infonce_bound, l1out_bound,
    nwj_bound, train_estimator, train_with_model, tuba_bound, DecoderParams, EstimatorKind, Model,
    TrainConfig,
};
use mitk::gaussian::{GaussianTask, SampleBatch};
use mitk::rng::stream_rng;
use ndarray::{Array1, Array2};
use rand::Rng;

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// `S[i][j] = log p(y_j | x_i) − log p(y_j)`.
fn log_ratio_scores(batch: &SampleBatch<f64>) -> Array2<f64> {
    let task = batch.task;
    let l = task.cond_log_density_matrix(batch);
    let marg: Vec<f64> = batch
        .ys
        .outer_iter()
        .map(|y| task.marginal_log_density(&y.to_vec()).unwrap())
        .collect();
    Array2::from_shape_fn(l.dim(), |(i, j)| l[[j, i]] - marg[j])
}

fn batches(
    task: &GaussianTask<f64>,
    n: usize,
    count: usize,
    seed: u64,
) -> impl Iterator<Item = SampleBatch<f64>> + '_ {
    (0..count as u64).map(move |s| task.sample_stream(n, seed, s).unwrap())
}

fn exact_decoder(dim: usize, rho: f64) -> DecoderParams<f64> {
    let mean = Mlp::from_layers(vec![Dense {
        w: Array2::eye(dim) * rho,
        b: Array1::zeros(dim),
    }])
    .unwrap();
    DecoderParams::new(mean, Array1::from_elem(dim, (1.0 - rho * rho).ln())).unwrap()
}

#[test]
fn ba_upper_zero_without_dependence() {
    let task = GaussianTask::<f64>::new(3, 0.0).unwrap();
    let b = task.sample(100, 0).unwrap();
    let v = est_ba_upper(
        &b,
        |y, x| task.cond_log_density(y, x),
        |y| task.marginal_log_density(y),
    )
    .unwrap();
    assert!(v.abs() < 1e-12);
}

#[test]
fn ba_upper_true_marginal_matches_mi_over_a_million_samples() {
    let task = GaussianTask::<f64>::new(1, 0.5).unwrap();
    let chunks: Vec<f64> = batches(&task, 10_000, 100, 0)
        .map(|b| {
            est_ba_upper(
                &b,
                |y, x| task.cond_log_density(y, x),
                |y| task.marginal_log_density(y),
            )
            .unwrap()
        })
        .collect();
    let (m, se) = mean_se(&chunks);
    assert!((m - 0.143841).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn ba_upper_wrong_marginal_overestimates() {
    let task = GaussianTask::<f64>::new(1, 0.5).unwrap();
    // q = N(0, 2): adds KL(N(0,1) ‖ N(0,2)) = (ln 2 + 1/2 − 1)/2
    let wrong = |y: &[f64]| Ok(-0.5 * (2.0 * std::f64::consts::PI * 2.0).ln() - y[0] * y[0] / 4.0);
    let gap = 0.5 * (2f64.ln() - 0.5);
    let (mut right, mut bad) = (vec![], vec![]);
    for b in batches(&task, 10_000, 50, 42) {
        right.push(
            est_ba_upper(
                &b,
                |y, x| task.cond_log_density(y, x),
                |y| task.marginal_log_density(y),
            )
            .unwrap(),
        );
        bad.push(est_ba_upper(&b, |y, x| task.cond_log_density(y, x), wrong).unwrap());
    }
    let (mr, _) = mean_se(&right);
    let (mb, se) = mean_se(&bad);
    assert!(mb > mr);
    assert!(
        (mb - (task.true_mi() + gap)).abs() < 3.0 * se,
        "{mb} ± {se}"
    );
}

#[test]
fn ba_lower_exact_decoder_is_unbiased() {
    for (d, rho) in [(1, 0.5), (5, 0.3), (20, 0.425757)] {
        let task = GaussianTask::<f64>::new(d, rho).unwrap();
        let dec = exact_decoder(d, rho);
        let v: Vec<f64> = batches(&task, 2000, 100, 43)
            .map(|b| est_ba_lower(&b, &dec, task.entropy_x()).unwrap())
            .collect();
        let (m, se) = mean_se(&v);
        assert!(
            (m - task.true_mi()).abs() < 3.0 * se,
            "d={d}: {m} ± {se} vs {}",
            task.true_mi()
        );
    }
}

#[test]
fn ba_lower_marginal_decoder_gives_zero() {
    let task = GaussianTask::<f64>::new(4, 0.6).unwrap();
    let dec = exact_decoder(4, 0.0);
    let v: Vec<f64> = batches(&task, 2000, 50, 44)
        .map(|b| est_ba_lower(&b, &dec, task.entropy_x()).unwrap())
        .collect();
    let (m, se) = mean_se(&v);
    assert!(m.abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn l1out_sits_above_mi() {
    let task = GaussianTask::<f64>::from_target_mi(20, 2.0).unwrap();
    let v: Vec<f64> = batches(&task, 128, 500, 45)
        .map(|b| est_l1out(&b).unwrap())
        .collect();
    let (m, se) = mean_se(&v);
    assert!(m >= task.true_mi() - 3.0 * se, "{m} ± {se}");
}

#[test]
fn l1out_with_two_samples_by_hand() {
    let l: Array2<f64> = ndarray::array![[-1.0, -3.0], [-2.5, -0.5]];
    // (-1 + 3 + -0.5 + 2.5) / 2
    assert!((l1out_bound(l.view()).unwrap() - 2.0).abs() < 1e-15);
    let task = GaussianTask::<f64>::new(2, 0.7).unwrap();
    let b = task.sample(2, 0).unwrap();
    assert!(est_l1out(&b).unwrap().is_finite());
}

#[test]
fn dv_and_nwj_with_true_log_ratio_recover_mi() {
    let task = GaussianTask::<f64>::new(1, 0.5).unwrap();
    let (mut dv, mut nwj) = (vec![], vec![]);
    for b in batches(&task, 1000, 100, 46) {
        let s = log_ratio_scores(&b);
        dv.push(dv_bound(s.view()).unwrap());
        nwj.push(nwj_bound((s + 1.0).view()).unwrap());
    }
    let (m, se) = mean_se(&nwj);
    assert!((m - task.true_mi()).abs() < 3.0 * se, "nwj {m} ± {se}");
    // the batch log partition is only consistent, so allow its O(1/n) bias
    let (m, se) = mean_se(&dv);
    assert!(
        (m - task.true_mi()).abs() < 3.0 * se + 1e-3,
        "dv {m} ± {se}"
    );
}

#[test]
fn tuba_is_tight_at_the_true_partition_and_loose_otherwise() {
    let task = GaussianTask::<f64>::new(2, 0.5).unwrap();
    let (mut tight, mut loose) = (vec![], vec![]);
    for b in batches(&task, 1000, 100, 47) {
        let s = log_ratio_scores(&b);
        tight.push(tuba_bound(s.view(), &vec![0.0; 1000]).unwrap());
        loose.push(tuba_bound(s.view(), &vec![0.5; 1000]).unwrap());
    }
    let (mt, se) = mean_se(&tight);
    assert!((mt - task.true_mi()).abs() < 3.0 * se, "{mt} ± {se}");
    // expected loss from a ≡ e^0.5 is e^-0.5 + 0.5 − 1
    let (ml, se) = mean_se(&loose);
    let expect = task.true_mi() - ((-0.5f64).exp() - 0.5);
    assert!((ml - expect).abs() < 3.0 * se, "{ml} ± {se} vs {expect}");
}

#[test]
fn infonce_never_exceeds_log_batch_size() {
    let task = GaussianTask::<f64>::from_target_mi(20, 10.0).unwrap();
    for b in batches(&task, 128, 20, 48) {
        let s = log_ratio_scores(&b);
        assert!(infonce_bound(s.view()).unwrap() <= 128f64.ln() + 1e-12);
        assert!(infonce_bound((s * 50.0).view()).unwrap() <= 128f64.ln() + 1e-12);
    }
}

#[test]
fn infonce_saturates_when_mi_exceeds_log_batch_size() {
    // MI ≈ 3.11 with K = 8 (ln 8 ≈ 2.08) and MI = 10 with K = 128 (ln 128 ≈ 4.85)
    for (task, k) in [
        (GaussianTask::<f64>::new(1, 0.999).unwrap(), 8),
        (GaussianTask::<f64>::from_target_mi(20, 10.0).unwrap(), 128),
    ] {
        let v: Vec<f64> = batches(&task, k, 200, 49)
            .map(|b| infonce_bound(log_ratio_scores(&b).view()).unwrap())
            .collect();
        let (m, _) = mean_se(&v);
        let cap = (k as f64).ln();
        // pinned near the cap, far below the truth
        assert!(m <= cap);
        assert!(task.true_mi() - m > 1.0, "K={k}: {m} vs {}", task.true_mi());
        assert!(
            cap - m < (task.true_mi() - m) / 3.0,
            "K={k}: {m} vs cap {cap}"
        );
    }
}

#[test]
fn tangent_inequality_for_the_log() {
    let mut rng = stream_rng(50, 0);
    for _ in 0..10_000 {
        let x: f64 = (rng.random_range(-10.0..10.0f64)).exp();
        let a: f64 = (rng.random_range(-10.0..10.0f64)).exp();
        let slack = x / a + a.ln() - 1.0 - x.ln();
        assert!(slack >= -1e-12 * (1.0 + (x / a).abs()), "x={x} a={a}");
    }
    assert!((2f64 / 2.0 + 2f64.ln() - 1.0 - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn trained_decoder_climbs_from_below() {
    let task = GaussianTask::<f64>::new(1, 0.5).unwrap();
    let mut cfg = TrainConfig::new(EstimatorKind::BaLower);
    cfg.steps = 2000;
    cfg.critic.hidden = vec![16];
    let fresh_mean = |model: &Model<f64>| {
        mean_se(&evaluate_fresh(EstimatorKind::BaLower, model, &task, 500, 128, 0).unwrap())
    };
    let init = Model::init(EstimatorKind::BaLower, &cfg.critic, 1, cfg.seed).unwrap();
    let (m0, _) = fresh_mean(&init);
    let (_, trained) = train_with_model(&task, &cfg).unwrap();
    let (m1, se) = fresh_mean(&trained);
    assert!(m0 < m1, "{m0} then {m1}");
    assert!(m1 <= task.true_mi() + 3.0 * se, "{m1} ± {se}");
    assert!(m1 > task.true_mi() - 0.02, "{m1} still far below");
}

#[test]
fn training_is_deterministic() {
    let task = GaussianTask::<f64>::from_target_mi(3, 1.0).unwrap();
    for kind in [
        EstimatorKind::Nwj,
        EstimatorKind::Tuba,
        EstimatorKind::L1Out,
    ] {
        let mut cfg = TrainConfig::new(kind);
        cfg.steps = 30;
        cfg.batch_size = 16;
        cfg.eval_interval = 10;
        cfg.seed = 9;
        cfg.critic.hidden = vec![8];
        cfg.critic.embed = 4;
        let a = train_estimator(&task, &cfg).unwrap();
        let b = train_estimator(&task, &cfg).unwrap();
        assert_eq!(a.points, b.points);
        cfg.seed = 10;
        let c = train_estimator(&task, &cfg).unwrap();
        assert_ne!(a.points, c.points);
    }
}
