//! Variational identities and inequalities checked against the exact measures.

use mitk::discrete::random::{random_joint2, random_pmf};
use mitk::discrete::{kl_divergence, mutual_information, Axis, JointPmf2, Pmf};
use mitk::rng::stream_rng;
use mitk::variational::{
    dpi_check, dv_supremum, dv_value, golden_decomposition, gyp_mi_supremum, gyp_supremum,
    product_distance_minimize, CriticVector, MarkovChainSpec, DV_DEFAULT_LR, DV_DEFAULT_STEPS,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn dv_value_never_exceeds_kl() {
    let mut rng = stream_rng(31, 0);
    let mut worst = f64::INFINITY;
    for k in 0..10_000 {
        let n = 2 + k % 9;
        let p = random_pmf::<f64, _>(&mut rng, n);
        let q = random_pmf::<f64, _>(&mut rng, n);
        let g = CriticVector::new((0..n).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let kl = kl_divergence(&p, &q).unwrap().value();
        worst = worst.min(kl - dv_value(&p, &q, &g).unwrap());
    }
    assert!(worst >= -1e-12, "worst slack {worst:e}");
}

#[test]
fn dv_value_at_log_ratio_is_kl() {
    let mut rng = stream_rng(32, 0);
    for n in 2..=16 {
        let p = random_pmf::<f64, _>(&mut rng, n);
        let q = random_pmf::<f64, _>(&mut rng, n);
        let g: Vec<f64> = p
            .probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a / b).ln())
            .collect();
        let v = dv_value(&p, &q, &CriticVector::new(g).unwrap()).unwrap();
        assert!((v - kl_divergence(&p, &q).unwrap().value()).abs() < 1e-12);
    }
}

#[test]
fn dv_supremum_reaches_kl_up_to_alphabet_16() {
    let mut rng = stream_rng(33, 0);
    for n in 2..=16 {
        for _ in 0..10 {
            let p = random_pmf::<f64, _>(&mut rng, n);
            let q = random_pmf::<f64, _>(&mut rng, n);
            let fit = dv_supremum(&p, &q, DV_DEFAULT_STEPS, DV_DEFAULT_LR).unwrap();
            let kl = kl_divergence(&p, &q).unwrap().value();
            assert!(
                (fit.value - kl).abs() < 1e-9,
                "n={n}: {} vs {kl}",
                fit.value
            );
        }
    }
}

#[test]
fn gyp_is_monotone_in_blocks_and_exact_at_the_finest() {
    let mut rng = stream_rng(34, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=7);
        let p = random_pmf::<f64, _>(&mut rng, n);
        let q = random_pmf::<f64, _>(&mut rng, n);
        let mut prev = -1.0;
        for m in 1..=n {
            let v = gyp_supremum(&p, &q, m).unwrap().value.value();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        let kl = kl_divergence(&p, &q).unwrap().value();
        assert!((prev - kl).abs() < 1e-12);
        // one block: P[Ω] ln(P[Ω]/Q[Ω]) with both sums rounding near 1
        assert!(gyp_supremum(&p, &q, 1).unwrap().value.value().abs() < 1e-15);
    }
}

#[test]
fn gyp_mi_is_monotone_and_exact_at_the_finest() {
    let mut rng = stream_rng(35, 0);
    for _ in 0..30 {
        let (r, c) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let j = random_joint2::<f64, _>(&mut rng, r, c);
        let mut prev = -1.0;
        for m in 1..=r.max(c) {
            let v = gyp_mi_supremum(&j, m).unwrap().value;
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!((prev - mutual_information(&j)).abs() < 1e-12);
    }
}

#[test]
fn product_fit_stays_above_mi_and_reaches_it() {
    let mut rng = stream_rng(36, 0);
    for _ in 0..500 {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let j = random_joint2::<f64, _>(&mut rng, r, c);
        let mi = mutual_information(&j);
        let fit = product_distance_minimize(&j, 3).unwrap();
        assert!(fit.history.iter().all(|&v| v >= mi - 1e-10));
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!((fit.value - mi).abs() < 1e-12);
    }
}

#[test]
fn golden_identity_holds_for_any_full_support_auxiliary() {
    let mut rng = stream_rng(37, 0);
    for k in 0..1000 {
        let (r, c) = (2 + k % 5, 2 + (k / 5) % 5);
        let j = random_joint2::<f64, _>(&mut rng, r, c);
        let aux = if k % 2 == 0 { Axis::Rows } else { Axis::Cols };
        let q = Pmf::new(
            j.labels(aux).to_vec(),
            random_pmf::<f64, _>(&mut rng, j.labels(aux).len())
                .probs()
                .to_vec(),
        )
        .unwrap();
        let t = golden_decomposition(&j, &q, aux).unwrap();
        let diff = t.difference().expect("full-support auxiliary");
        assert!((diff - mutual_information(&j)).abs() < 1e-12);
        assert!(t.conditional.value() >= mutual_information(&j) - 1e-12);
    }
}

#[test]
fn golden_terms_infinite_when_auxiliary_misses_support() {
    let j = JointPmf2::<f64>::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
    let q = Pmf::new(j.labels(Axis::Rows).to_vec(), vec![1.0, 0.0]).unwrap();
    let t = golden_decomposition(&j, &q, Axis::Rows).unwrap();
    assert_eq!(t.difference(), None);
}

#[test]
fn data_processing_on_10k_chains() {
    let mut rng = stream_rng(38, 0);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let (nx, ny, nz) = (
            rng.random_range(2..=4),
            rng.random_range(2..=4),
            rng.random_range(2..=4),
        );
        let spec = MarkovChainSpec::<f64>::random(&mut rng, nx, ny, nz);
        let r = dpi_check(&spec);
        worst = worst.min(r.worst_slack());
        assert!(r.ixz_given_y.abs() < 1e-12);
    }
    assert!(worst >= -1e-12, "worst slack {worst:e}");
}

proptest! {
    #[test]
    fn dv_bounded_by_kl_for_arbitrary_critics(
        g in prop::collection::vec(-20.0f64..20.0, 4),
        seed in any::<u64>(),
    ) {
        let mut rng = stream_rng(seed, 0);
        let p = random_pmf::<f64, _>(&mut rng, 4);
        let q = random_pmf::<f64, _>(&mut rng, 4);
        let v = dv_value(&p, &q, &CriticVector::new(g.clone()).unwrap()).unwrap();
        prop_assert!(v <= kl_divergence(&p, &q).unwrap().value() + 1e-12);
        // shifting the critic by a constant leaves the value unchanged
        let shifted: Vec<f64> = g.iter().map(|x| x + 3.0).collect();
        let w = dv_value(&p, &q, &CriticVector::new(shifted).unwrap()).unwrap();
        prop_assert!((v - w).abs() < 1e-12);
    }
}
