//! Gradient checks against central finite differences, plus forward-pass
//! oracles written with plain loops.

use mitk::critic::{
    backward, critic_backward, init_critic, score_forward, score_matrix, AdamConfig, AdamState,
    BaselineParams, CriticArch, CriticForm, CriticParams, Dense, Mlp, ParamSet,
};
use mitk::estimators::{
    est_ba_lower, infonce_bound_grad, nwj_bound_grad, tuba_bound_grad, DecoderParams,
};
use mitk::gaussian::{GaussianTask, SampleBatch};
use mitk::rng::stream_rng;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;
const MAX_REL_ERR: f64 = 1e-5;
const INSTANCES: usize = 50;
/// Pre-activations closer than this to the ReLU kink make central
/// differences invalid at the chosen step.
const KINK_MARGIN: f64 = 1e-3;

/// Denominator floor for the direct checks.
const REL_FLOOR: f64 = 1e-8;
/// Composed objectives are shift invariant in some directions, so a few
/// entries are exactly zero analytically and ~1e-12 roundoff numerically.
const COMPOSED_FLOOR: f64 = 1e-4;

fn rel_err(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

/// Plain-loop forward pass returning the output and the smallest hidden
/// pre-activation magnitude.
fn reference_forward(net: &Mlp<f64>, input: &[f64]) -> (Vec<f64>, f64) {
    let mut a = input.to_vec();
    let mut closest = f64::INFINITY;
    let last = net.layers().len() - 1;
    for (l, Dense { w, b }) in net.layers().iter().enumerate() {
        let mut z = b.to_vec();
        for (i, &ai) in a.iter().enumerate() {
            for (o, zo) in z.iter_mut().enumerate() {
                *zo += ai * w[[i, o]];
            }
        }
        if l < last {
            for zo in z.iter_mut() {
                closest = closest.min(zo.abs());
                *zo = zo.max(0.0);
            }
        }
        a = z;
    }
    (a, closest)
}

fn reference_scores(p: &CriticParams<f64>, batch: &SampleBatch<f64>) -> (Array2<f64>, f64) {
    let n = batch.len();
    let mut s = Array2::zeros((n, n));
    let mut closest = f64::INFINITY;
    match p {
        CriticParams::Joint(net) => {
            for i in 0..n {
                for j in 0..n {
                    let mut inp = batch.xs.row(i).to_vec();
                    inp.extend(batch.ys.row(j).iter());
                    let (out, c) = reference_forward(net, &inp);
                    s[[i, j]] = out[0];
                    closest = closest.min(c);
                }
            }
        }
        CriticParams::Separable { x_tower, y_tower } => {
            let hx: Vec<(Vec<f64>, f64)> = (0..n)
                .map(|i| reference_forward(x_tower, &batch.xs.row(i).to_vec()))
                .collect();
            let uy: Vec<(Vec<f64>, f64)> = (0..n)
                .map(|j| reference_forward(y_tower, &batch.ys.row(j).to_vec()))
                .collect();
            for i in 0..n {
                for j in 0..n {
                    s[[i, j]] = hx[i].0.iter().zip(&uy[j].0).map(|(a, b)| a * b).sum();
                }
            }
            for (_, c) in hx.iter().chain(&uy) {
                closest = closest.min(*c);
            }
        }
    }
    (s, closest)
}

fn jitter<P: ParamSet<f64>>(p: &mut P, rng: &mut ChaCha8Rng, scale: f64) {
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            *v += rng.random_range(-scale..scale);
        }
    }
}

/// Max relative error of `analytic` against central differences of `f`.
fn fd_max_rel_err<P: ParamSet<f64>>(
    params: &P,
    analytic: &P,
    floor: f64,
    f: impl Fn(&P) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    let grads: Vec<Vec<f64>> = analytic.tensors().iter().map(|t| t.to_vec()).collect();
    for (ti, g) in grads.iter().enumerate() {
        for (k, &a) in g.iter().enumerate() {
            let mut plus = params.clone();
            plus.tensors_mut()[ti][k] += H;
            let mut minus = params.clone();
            minus.tensors_mut()[ti][k] -= H;
            let numeric = (f(&plus) - f(&minus)) / (2.0 * H);
            let e = rel_err(a, numeric, floor);
            if e > MAX_REL_ERR {
                eprintln!("tensor {ti} entry {k}: analytic {a:e} numeric {numeric:e}");
            }
            worst = worst.max(e);
        }
    }
    worst
}

struct Instance {
    params: CriticParams<f64>,
    batch: SampleBatch<f64>,
    upstream: Array2<f64>,
}

fn random_instance(rng: &mut ChaCha8Rng, seed: u64) -> Instance {
    loop {
        let form = if rng.random_bool(0.5) {
            CriticForm::Joint
        } else {
            CriticForm::Separable
        };
        let depth = rng.random_range(1..=2);
        let arch = CriticArch {
            form,
            hidden: (0..depth).map(|_| rng.random_range(2..=16)).collect(),
            embed: rng.random_range(1..=16),
        };
        let dim = rng.random_range(1..=4);
        let n = rng.random_range(2..=6);
        let mut params = init_critic::<f64>(&arch, dim, rng.random()).unwrap();
        jitter(&mut params, rng, 0.3);
        let task = GaussianTask::new(dim, rng.random_range(-0.9..0.9)).unwrap();
        let batch = task.sample_stream(n, seed, rng.random()).unwrap();
        let (_, closest) = reference_scores(&params, &batch);
        if closest < KINK_MARGIN {
            continue;
        }
        let upstream = Array2::from_shape_simple_fn((n, n), || rng.random_range(-1.0..1.0));
        return Instance {
            params,
            batch,
            upstream,
        };
    }
}

fn weighted_sum(p: &CriticParams<f64>, batch: &SampleBatch<f64>, up: &Array2<f64>) -> f64 {
    (&score_matrix(p, batch).unwrap() * up).sum()
}

#[test]
fn critic_gradients_match_finite_differences() {
    let mut rng = stream_rng(11, 0);
    let mut worst: f64 = 0.0;
    for k in 0..INSTANCES {
        let inst = random_instance(&mut rng, k as u64);
        let g = backward(&inst.params, &inst.batch, inst.upstream.view()).unwrap();
        let e = fd_max_rel_err(&inst.params, &g, REL_FLOOR, |p| {
            weighted_sum(p, &inst.batch, &inst.upstream)
        });
        assert!(e < MAX_REL_ERR, "instance {k}: relative error {e:e}");
        worst = worst.max(e);
    }
    println!("critic: worst relative error {worst:e}");
}

#[test]
fn objective_gradients_through_the_critic() {
    // value and gradient of each bound composed with the critic
    let mut rng = stream_rng(12, 0);
    for k in 0..20 {
        let inst = random_instance(&mut rng, 100 + k);
        for which in 0..2 {
            let grad_fn = if which == 0 {
                nwj_bound_grad
            } else {
                infonce_bound_grad
            };
            let value = |p: &CriticParams<f64>| {
                let s = score_matrix(p, &inst.batch).unwrap();
                grad_fn(s.view()).unwrap().0
            };
            let (s, cache) =
                score_forward(&inst.params, inst.batch.xs.view(), inst.batch.ys.view()).unwrap();
            let (_, ds) = grad_fn(s.view()).unwrap();
            let g = critic_backward(&inst.params, &cache, ds.view()).unwrap();
            let e = fd_max_rel_err(&inst.params, &g, COMPOSED_FLOOR, value);
            assert!(e < MAX_REL_ERR, "instance {k} objective {which}: {e:e}");
        }
    }
}

#[test]
fn baseline_gradients_match_finite_differences() {
    let mut rng = stream_rng(13, 0);
    let mut checked = 0;
    while checked < INSTANCES {
        let dim = rng.random_range(1..=4);
        let n = rng.random_range(2..=6);
        let hidden = rng.random_range(2..=16);
        let mut net = Mlp::<f64>::init(&[dim, hidden, 1], &mut rng).unwrap();
        jitter(&mut net, &mut rng, 0.3);
        let task = GaussianTask::new(dim, 0.5).unwrap();
        let batch = task.sample_stream(n, 0, rng.random()).unwrap();
        let closest = batch
            .ys
            .outer_iter()
            .map(|y| reference_forward(&net, &y.to_vec()).1)
            .fold(f64::INFINITY, f64::min);
        if closest < KINK_MARGIN {
            continue;
        }
        let base = BaselineParams::from_mlp(net).unwrap();
        let scores = Array2::from_shape_simple_fn((n, n), || rng.random_range(-2.0..2.0));
        let f = |b: &BaselineParams<f64>| {
            let la = b.log_a(batch.ys.view()).unwrap();
            tuba_bound_grad(scores.view(), &la).unwrap().0
        };
        let (la, cache) = base.forward(batch.ys.view()).unwrap();
        let (_, _, dla) = tuba_bound_grad(scores.view(), &la).unwrap();
        let g = base.backward(&cache, &dla).unwrap();
        let e = fd_max_rel_err(&base, &g, REL_FLOOR, f);
        assert!(e < MAX_REL_ERR, "baseline instance {checked}: {e:e}");
        checked += 1;
    }
}

#[test]
fn decoder_gradients_match_finite_differences() {
    let mut rng = stream_rng(14, 0);
    let mut checked = 0;
    while checked < INSTANCES {
        let dim = rng.random_range(1..=4);
        let n = rng.random_range(2..=6);
        let hidden: Vec<usize> = (0..rng.random_range(1..=2))
            .map(|_| rng.random_range(2..=16))
            .collect();
        let mut dec = DecoderParams::<f64>::init(dim, &hidden, rng.random()).unwrap();
        jitter(&mut dec, &mut rng, 0.3);
        let task = GaussianTask::new(dim, rng.random_range(-0.9..0.9)).unwrap();
        let batch = task.sample_stream(n, 1, rng.random()).unwrap();
        let closest = batch
            .ys
            .outer_iter()
            .map(|y| reference_forward(&dec.mean, &y.to_vec()).1)
            .fold(f64::INFINITY, f64::min);
        if closest < KINK_MARGIN {
            continue;
        }
        let (_, g) = dec.mean_log_density_grad(&batch).unwrap();
        let e = fd_max_rel_err(&dec, &g, REL_FLOOR, |d| {
            est_ba_lower(&batch, d, 0.0).unwrap()
        });
        assert!(e < MAX_REL_ERR, "decoder instance {checked}: {e:e}");
        checked += 1;
    }
}

#[test]
fn score_matrix_matches_loop_oracle_and_is_pure() {
    let mut rng = stream_rng(15, 0);
    for k in 0..20 {
        let inst = random_instance(&mut rng, 200 + k);
        let s = score_matrix(&inst.params, &inst.batch).unwrap();
        let (r, _) = reference_scores(&inst.params, &inst.batch);
        for (a, b) in s.iter().zip(r.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let again = score_matrix(&inst.params, &inst.batch).unwrap();
        assert!(s
            .iter()
            .zip(again.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn joint_and_separable_scores_differ() {
    let task = GaussianTask::new(3, 0.5).unwrap();
    let batch = task.sample(5, 0).unwrap();
    let mk = |form| CriticArch {
        form,
        hidden: vec![8],
        embed: 4,
    };
    let a = score_matrix(
        &init_critic::<f64>(&mk(CriticForm::Joint), 3, 1).unwrap(),
        &batch,
    )
    .unwrap();
    let b = score_matrix(
        &init_critic::<f64>(&mk(CriticForm::Separable), 3, 1).unwrap(),
        &batch,
    )
    .unwrap();
    assert!(a.iter().zip(b.iter()).any(|(x, y)| (x - y).abs() > 1e-6));
}

#[test]
fn backward_is_linear_and_zero_for_zero_upstream() {
    let mut rng = stream_rng(16, 0);
    for k in 0..10 {
        let inst = random_instance(&mut rng, 300 + k);
        let zero = backward(
            &inst.params,
            &inst.batch,
            Array2::zeros(inst.upstream.dim()).view(),
        )
        .unwrap();
        assert!(zero.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
        let g1 = backward(&inst.params, &inst.batch, inst.upstream.view()).unwrap();
        let doubled = &inst.upstream * 2.0;
        let g2 = backward(&inst.params, &inst.batch, doubled.view()).unwrap();
        for (a, b) in g1.tensors().iter().zip(g2.tensors()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((2.0 * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
    }
}

#[test]
fn separable_towers_run_once_per_sample() {
    let task = GaussianTask::new(4, 0.3).unwrap();
    for n in [2, 7, 32] {
        let batch = task.sample(n, 0).unwrap();
        let arch = CriticArch {
            form: CriticForm::Separable,
            hidden: vec![8],
            embed: 4,
        };
        let p = init_critic::<f64>(&arch, 4, 0).unwrap();
        let (_, cache) = score_forward(&p, batch.xs.view(), batch.ys.view()).unwrap();
        assert_eq!(cache.rows_forwarded(), (n, n));
    }
}

#[test]
fn init_weight_moments() {
    // 10^4 draws from one layer: mean 0 within 3 standard errors, variance bound²/3
    let p = init_critic::<f64>(
        &CriticArch {
            form: CriticForm::Joint,
            hidden: vec![100],
            embed: 1,
        },
        50,
        7,
    )
    .unwrap();
    let CriticParams::Joint(net) = p else {
        unreachable!()
    };
    let w = &net.layers()[0].w;
    assert_eq!(w.len(), 100 * 100);
    let bound = (6.0f64 / 200.0).sqrt();
    let n = w.len() as f64;
    let mean = w.sum() / n;
    let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    assert!((var - bound * bound / 3.0).abs() < 0.05 * bound * bound / 3.0);
    assert!(w.iter().all(|v| v.abs() <= bound));
    assert!(net.layers().iter().all(|l| l.b.iter().all(|&b| b == 0.0)));
}

#[test]
fn adam_examples() {
    let cfg = AdamConfig {
        lr: 0.1,
        ..AdamConfig::default()
    };
    let mut p = vec![0.0f64];
    let mut st = AdamState::new(&p, cfg);
    st.step(&mut p, &vec![0.0]).unwrap();
    assert_eq!(p, [0.0]);
    let mut p = vec![0.0f64];
    let mut st = AdamState::new(&p, cfg);
    st.step(&mut p, &vec![1.0]).unwrap();
    assert!((p[0] + 0.1).abs() < 1e-8);
    let mut prev = p[0];
    for _ in 0..20 {
        st.step(&mut p, &vec![1.0]).unwrap();
        assert!(p[0] < prev);
        prev = p[0];
    }
    assert!(st.step(&mut p, &vec![1.0, 2.0]).is_err());
}

#[test]
fn decoder_from_parts_checks_shapes() {
    let mean = Mlp::from_layers(vec![Dense {
        w: Array2::<f64>::eye(2),
        b: Array1::zeros(2),
    }])
    .unwrap();
    assert!(DecoderParams::new(mean.clone(), Array1::zeros(2)).is_ok());
    assert!(DecoderParams::new(mean, Array1::zeros(3)).is_err());
}
