//! Training loop, held-out evaluation and trajectory output.

use std::fmt::Write as _;
use std::io::Write;

use crate::critic::{
    critic_backward, init_critic, score_forward, AdamConfig, AdamState, BaselineParams, CriticArch,
    CriticParams, ParamSet,
};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianTask, SampleBatch};
use crate::scalar::Scalar;

use super::bounds;
use super::decoder::DecoderParams;
use super::estimate::{est_ba_lower, est_ba_upper, est_l1out};
use super::kind::EstimatorKind;

/// Stream offsets keep training, evaluation and post-hoc batches disjoint.
pub const TRAIN_STREAM_BASE: u64 = 1 << 40;
pub const EVAL_STREAM_BASE: u64 = 2 << 40;
pub const FRESH_STREAM_BASE: u64 = 3 << 40;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig<T> {
    pub kind: EstimatorKind,
    pub steps: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub eval_interval: usize,
    pub critic: CriticArch,
    pub adam: AdamConfig<T>,
    /// Weight on the previous smoothed value.
    pub ema: T,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn new(kind: EstimatorKind) -> Self {
        TrainConfig {
            kind,
            steps: 20_000,
            batch_size: 128,
            seed: 0,
            eval_interval: 100,
            critic: CriticArch::default(),
            adam: AdamConfig::default(),
            ema: T::c(0.9),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument(
                "batch size must be at least 2".into(),
            ));
        }
        if self.eval_interval == 0 {
            return Err(Error::InvalidArgument(
                "eval interval must be positive".into(),
            ));
        }
        if !(self.ema >= T::zero() && self.ema < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "ema must be in [0, 1), got {}",
                self.ema
            )));
        }
        if self.adam.lr.is_nan() || self.adam.lr <= T::zero() {
            return Err(Error::InvalidArgument(
                "learning rate must be positive".into(),
            ));
        }
        Ok(())
    }

    /// One-line `key=value` rendering recorded with every trajectory.
    pub fn snapshot(&self) -> String {
        let widths: Vec<String> = self.critic.hidden.iter().map(|w| w.to_string()).collect();
        format!(
            "estimator={} steps={} batch_size={} seed={} eval_interval={} critic.form={} critic.widths={} critic.embed={} adam.lr={} adam.beta1={} adam.beta2={} adam.eps={} ema={}",
            self.kind,
            self.steps,
            self.batch_size,
            self.seed,
            self.eval_interval,
            self.critic.form,
            widths.join(","),
            self.critic.embed,
            self.adam.lr,
            self.adam.beta1,
            self.adam.beta2,
            self.adam.eps,
            self.ema
        )
    }
}

/// Whatever parameters an estimator carries.
#[derive(Clone, Debug, PartialEq)]
pub enum Model<T> {
    /// Exact-density estimators with nothing to learn.
    Exact,
    Critic(CriticParams<T>),
    CriticBaseline {
        critic: CriticParams<T>,
        baseline: BaselineParams<T>,
    },
    Decoder(DecoderParams<T>),
}

impl<T: Scalar> Model<T> {
    pub fn init(kind: EstimatorKind, arch: &CriticArch, dim: usize, seed: u64) -> Result<Self> {
        Ok(match kind {
            EstimatorKind::BaUpperR | EstimatorKind::L1Out => Model::Exact,
            EstimatorKind::BaLower => Model::Decoder(DecoderParams::init(dim, &arch.hidden, seed)?),
            EstimatorKind::Tuba => Model::CriticBaseline {
                critic: init_critic(arch, dim, seed)?,
                baseline: BaselineParams::init(dim, &arch.hidden, seed)?,
            },
            _ => Model::Critic(init_critic(arch, dim, seed)?),
        })
    }

    fn all_finite(&self) -> bool {
        match self {
            Model::Exact => true,
            Model::Critic(c) => c.all_finite(),
            Model::CriticBaseline { critic, baseline } => {
                critic.all_finite() && baseline.all_finite()
            }
            Model::Decoder(d) => d.all_finite(),
        }
    }
}

fn mismatch(kind: EstimatorKind) -> Error {
    Error::InvalidArgument(format!("model does not fit estimator {kind}"))
}

/// Estimate of `kind` on one batch at fixed parameters.
pub fn evaluate<T: Scalar>(
    kind: EstimatorKind,
    model: &Model<T>,
    batch: &SampleBatch<T>,
) -> Result<T> {
    let task = batch.task;
    match (kind, model) {
        (EstimatorKind::BaUpperR, _) => est_ba_upper(
            batch,
            |y, x| task.cond_log_density(y, x),
            |y| task.marginal_log_density(y),
        ),
        (EstimatorKind::L1Out, _) => est_l1out(batch),
        (EstimatorKind::BaLower, Model::Decoder(d)) => est_ba_lower(batch, d, task.entropy_x()),
        (EstimatorKind::Tuba, Model::CriticBaseline { critic, baseline }) => {
            super::estimate::est_tuba(batch, critic, baseline)
        }
        (EstimatorKind::Dv, Model::Critic(c)) => super::estimate::est_dv(batch, c),
        (EstimatorKind::Nwj, Model::Critic(c)) => super::estimate::est_nwj(batch, c),
        (EstimatorKind::InfoNce, Model::Critic(c)) => super::estimate::est_infonce(batch, c),
        _ => Err(mismatch(kind)),
    }
}

/// Estimates on `n_batches` fresh batches that training never saw.
pub fn evaluate_fresh<T: Scalar>(
    kind: EstimatorKind,
    model: &Model<T>,
    task: &GaussianTask<T>,
    n_batches: usize,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<T>> {
    (0..n_batches as u64)
        .map(|b| {
            evaluate(
                kind,
                model,
                &task.sample_stream(batch_size, seed, FRESH_STREAM_BASE + b)?,
            )
        })
        .collect()
}

struct Trainer<T, P> {
    params: P,
    adam: AdamState<T, P>,
}

impl<T: Scalar, P: ParamSet<T>> Trainer<T, P> {
    fn new(params: P, config: AdamConfig<T>) -> Self {
        let adam = AdamState::new(&params, config);
        Trainer { params, adam }
    }
}

/// A bound's value and its gradient in the score matrix.
type ScoreObjective<T> = fn(ndarray::ArrayView2<'_, T>) -> Result<(T, ndarray::Array2<T>)>;

fn critic_ascent<T: Scalar>(
    trainer: &mut Trainer<T, CriticParams<T>>,
    batch: &SampleBatch<T>,
    objective: ScoreObjective<T>,
) -> Result<T> {
    let (scores, cache) = score_forward(&trainer.params, batch.xs.view(), batch.ys.view())?;
    let (value, mut d_scores) = objective(scores.view())?;
    d_scores.mapv_inplace(|v| -v);
    let grads = critic_backward(&trainer.params, &cache, d_scores.view())?;
    trainer.adam.step(&mut trainer.params, &grads)?;
    Ok(value)
}

enum Learner<T> {
    Exact,
    Critic(EstimatorKind, Trainer<T, CriticParams<T>>),
    Tuba(Trainer<T, CriticParams<T>>, Trainer<T, BaselineParams<T>>),
    Decoder(Trainer<T, DecoderParams<T>>),
}

impl<T: Scalar> Learner<T> {
    fn new(model: Model<T>, kind: EstimatorKind, adam: AdamConfig<T>) -> Self {
        match model {
            Model::Exact => Learner::Exact,
            Model::Critic(c) => Learner::Critic(kind, Trainer::new(c, adam)),
            Model::CriticBaseline { critic, baseline } => {
                Learner::Tuba(Trainer::new(critic, adam), Trainer::new(baseline, adam))
            }
            Model::Decoder(d) => Learner::Decoder(Trainer::new(d, adam)),
        }
    }

    fn model(&self) -> Model<T> {
        match self {
            Learner::Exact => Model::Exact,
            Learner::Critic(_, t) => Model::Critic(t.params.clone()),
            Learner::Tuba(c, b) => Model::CriticBaseline {
                critic: c.params.clone(),
                baseline: b.params.clone(),
            },
            Learner::Decoder(d) => Model::Decoder(d.params.clone()),
        }
    }

    /// One optimizer step ascending the bound; returns the pre-step training value.
    fn step(&mut self, batch: &SampleBatch<T>) -> Result<Option<T>> {
        Ok(Some(match self {
            Learner::Exact => return Ok(None),
            Learner::Critic(kind, t) => match kind {
                EstimatorKind::Dv => critic_ascent(t, batch, bounds::dv_bound_grad)?,
                EstimatorKind::Nwj => critic_ascent(t, batch, bounds::nwj_bound_grad)?,
                EstimatorKind::InfoNce => critic_ascent(t, batch, bounds::infonce_bound_grad)?,
                k => return Err(mismatch(*k)),
            },
            Learner::Tuba(c, b) => {
                let (scores, cache) = score_forward(&c.params, batch.xs.view(), batch.ys.view())?;
                let (log_a, b_cache) = b.params.forward(batch.ys.view())?;
                let (value, mut d_scores, d_log_a) =
                    bounds::tuba_bound_grad(scores.view(), &log_a)?;
                d_scores.mapv_inplace(|v| -v);
                let neg: Vec<T> = d_log_a.iter().map(|&v| -v).collect();
                let g_critic = critic_backward(&c.params, &cache, d_scores.view())?;
                let g_base = b.params.backward(&b_cache, &neg)?;
                c.adam.step(&mut c.params, &g_critic)?;
                b.adam.step(&mut b.params, &g_base)?;
                value
            }
            Learner::Decoder(d) => {
                let (value, mut grads) = d.params.mean_log_density_grad(batch)?;
                grads.scale(-T::one());
                d.adam.step(&mut d.params, &grads)?;
                value
            }
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint<T> {
    pub step: usize,
    pub estimate: T,
    pub smoothed: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateTrajectory<T> {
    pub kind: EstimatorKind,
    pub points: Vec<TrajectoryPoint<T>>,
    pub config: String,
    pub seed: u64,
    pub true_mi: T,
    pub dim: usize,
}

impl<T: Scalar> EstimateTrajectory<T> {
    pub fn initial(&self) -> &TrajectoryPoint<T> {
        &self.points[0]
    }

    pub fn last(&self) -> &TrajectoryPoint<T> {
        self.points
            .last()
            .expect("trajectories hold at least one point")
    }
}

pub fn train_estimator<T: Scalar>(
    task: &GaussianTask<T>,
    cfg: &TrainConfig<T>,
) -> Result<EstimateTrajectory<T>> {
    Ok(train_with_model(task, cfg)?.0)
}

/// Trains and also returns the final parameters.
pub fn train_with_model<T: Scalar>(
    task: &GaussianTask<T>,
    cfg: &TrainConfig<T>,
) -> Result<(EstimateTrajectory<T>, Model<T>)> {
    cfg.validate()?;
    let snapshot = cfg.snapshot();
    let non_finite = |step: usize| Error::NonFinite {
        step,
        snapshot: snapshot.clone(),
    };
    let kind = cfg.kind;
    let mut learner = Learner::new(
        Model::init(kind, &cfg.critic, task.dim(), cfg.seed)?,
        kind,
        cfg.adam,
    );
    let mut points = Vec::with_capacity(cfg.steps / cfg.eval_interval + 2);
    let mut smoothed = T::zero();
    let mut record =
        |step: usize, model: &Model<T>, points: &mut Vec<TrajectoryPoint<T>>| -> Result<()> {
            let batch =
                task.sample_stream(cfg.batch_size, cfg.seed, EVAL_STREAM_BASE + step as u64)?;
            let estimate = evaluate(kind, model, &batch)?;
            if !estimate.is_finite() {
                return Err(non_finite(step));
            }
            smoothed = if points.is_empty() {
                estimate
            } else {
                cfg.ema * smoothed + (T::one() - cfg.ema) * estimate
            };
            points.push(TrajectoryPoint {
                step,
                estimate,
                smoothed,
            });
            Ok(())
        };
    record(0, &learner.model(), &mut points)?;
    for step in 1..=cfg.steps {
        if kind.is_trainable() {
            let batch =
                task.sample_stream(cfg.batch_size, cfg.seed, TRAIN_STREAM_BASE + step as u64)?;
            if let Some(v) = learner.step(&batch)? {
                if !v.is_finite() {
                    return Err(non_finite(step));
                }
            }
        }
        if step % cfg.eval_interval == 0 || step == cfg.steps {
            let model = learner.model();
            if !model.all_finite() {
                return Err(non_finite(step));
            }
            record(step, &model, &mut points)?;
        }
    }
    let trajectory = EstimateTrajectory {
        kind,
        points,
        config: snapshot.clone(),
        seed: cfg.seed,
        true_mi: task.true_mi(),
        dim: task.dim(),
    };
    Ok((trajectory, learner.model()))
}

/// Decimal rendering with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.8}", v);
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    // rounding can carry into a new leading digit
    let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
    if digits.trim_start_matches('0').len() > 9 && decimals > 0 {
        format!("{:.*}", decimals - 1, v)
    } else {
        s
    }
}

/// Short label for an MI value: fixed six decimals with trailing zeros dropped.
pub fn mi_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// `<estimator>_<dim>_<targetmi>_<seed>.csv`.
pub fn csv_file_name(kind: EstimatorKind, dim: usize, target_mi: f64, seed: u64) -> String {
    format!("{}_{}_{}_{}.csv", kind, dim, mi_label(target_mi), seed)
}

pub const CSV_HEADER: &str = "step,estimate,smoothed,true_mi,estimator,seed";

pub fn trajectory_csv<T: Scalar>(traj: &EstimateTrajectory<T>) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let true_mi = format_sig9(traj.true_mi.to_f64_lossy());
    for p in &traj.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.step,
            format_sig9(p.estimate.to_f64_lossy()),
            format_sig9(p.smoothed.to_f64_lossy()),
            true_mi,
            traj.kind,
            traj.seed
        );
    }
    out
}

pub fn write_trajectory_csv<T: Scalar, W: Write>(
    traj: &EstimateTrajectory<T>,
    mut w: W,
) -> Result<()> {
    w.write_all(trajectory_csv(traj).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critic::CriticForm;

    fn tiny(kind: EstimatorKind) -> TrainConfig<f64> {
        let mut cfg = TrainConfig::new(kind);
        cfg.steps = 30;
        cfg.batch_size = 16;
        cfg.eval_interval = 10;
        cfg.critic = CriticArch {
            form: CriticForm::Separable,
            hidden: vec![8],
            embed: 4,
        };
        cfg
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(2.0), "2.00000000");
        assert_eq!(format_sig9(0.143841036), "0.143841036");
        assert_eq!(format_sig9(-12.3456789012), "-12.3456789");
        assert_eq!(format_sig9(0.0), "0.00000000");
        assert_eq!(format_sig9(9.9999999999), "10.0000000");
        assert_eq!(format_sig9(123456789.4), "123456789");
    }

    #[test]
    fn labels_and_names() {
        assert_eq!(mi_label(2.0), "2");
        assert_eq!(mi_label(0.5), "0.5");
        assert_eq!(
            csv_file_name(EstimatorKind::Nwj, 20, 2.0, 0),
            "nwj_20_2_0.csv"
        );
    }

    #[test]
    fn eval_schedule() {
        let task = GaussianTask::new(2, 0.5).unwrap();
        for kind in EstimatorKind::ALL {
            let t = train_estimator(&task, &tiny(kind)).unwrap();
            let steps: Vec<usize> = t.points.iter().map(|p| p.step).collect();
            assert_eq!(steps, [0, 10, 20, 30], "{kind}");
        }
        let mut cfg = tiny(EstimatorKind::Nwj);
        cfg.steps = 0;
        assert_eq!(train_estimator(&task, &cfg).unwrap().points.len(), 1);
        cfg.steps = 25;
        let t = train_estimator(&task, &cfg).unwrap();
        assert_eq!(
            t.points.iter().map(|p| p.step).collect::<Vec<_>>(),
            [0, 10, 20, 25]
        );
    }

    #[test]
    fn deterministic() {
        let task = GaussianTask::new(3, 0.4).unwrap();
        let cfg = tiny(EstimatorKind::Tuba);
        let a = trajectory_csv(&train_estimator(&task, &cfg).unwrap());
        let b = trajectory_csv(&train_estimator(&task, &cfg).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let task = GaussianTask::new(2, 0.9).unwrap();
        let mut cfg = tiny(EstimatorKind::Nwj);
        cfg.adam.lr = 1e6;
        cfg.steps = 200;
        match train_estimator(&task, &cfg) {
            Err(Error::NonFinite { step, snapshot }) => {
                assert!(step >= 1);
                assert!(snapshot.contains("estimator=nwj"));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
