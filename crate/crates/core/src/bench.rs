//! Multi-run benchmark sweeps: configuration, parallel dispatch and summary
//! statistics.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::critic::{AdamConfig, CriticArch, CriticForm};
use crate::error::{Error, Result};
use crate::estimators::{
    csv_file_name, format_sig9, train_estimator, trajectory_csv, Direction, EstimateTrajectory,
    EstimatorKind, TrainConfig,
};
use crate::gaussian::GaussianTask;

/// How the task's correlation is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TaskSpec {
    Rho(f64),
    TargetMi(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub dim: usize,
    pub task: TaskSpec,
    pub estimators: Vec<EstimatorKind>,
    pub steps: usize,
    pub batch_size: usize,
    /// Master seed; run `i` uses `seed + i`.
    pub seed: u64,
    pub num_seeds: usize,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub eval_interval: usize,
    pub ema: f64,
    pub critic: CriticArch,
    pub adam: AdamConfig<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dim: 20,
            task: TaskSpec::TargetMi(2.0),
            estimators: vec![EstimatorKind::Nwj],
            steps: 20_000,
            batch_size: 128,
            seed: 0,
            num_seeds: 1,
            out_dir: PathBuf::from("out"),
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            eval_interval: 100,
            ema: 0.9,
            critic: CriticArch::default(),
            adam: AdamConfig::default(),
        }
    }
}

fn parse_val<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value `{value}` for `{key}`")))
}

fn parse_list<V: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_val(key, s))
        .collect()
}

impl BenchConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "dim" => self.dim = parse_val(key, value)?,
            "rho" => self.task = TaskSpec::Rho(parse_val(key, value)?),
            "target_mi" | "target-mi" => self.task = TaskSpec::TargetMi(parse_val(key, value)?),
            "estimator" | "estimators" => {
                self.estimators = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "steps" => self.steps = parse_val(key, value)?,
            "batch_size" | "batch-size" => self.batch_size = parse_val(key, value)?,
            "seed" => self.seed = parse_val(key, value)?,
            "seeds" => self.num_seeds = parse_val(key, value)?,
            "out" => self.out_dir = PathBuf::from(value.trim()),
            "workers" => self.workers = parse_val(key, value)?,
            "eval_interval" | "eval-interval" => self.eval_interval = parse_val(key, value)?,
            "ema" => self.ema = parse_val(key, value)?,
            "critic.form" => self.critic.form = value.trim().parse::<CriticForm>()?,
            "critic.widths" => self.critic.hidden = parse_list(key, value)?,
            "critic.embed" => self.critic.embed = parse_val(key, value)?,
            "adam.lr" => self.adam.lr = parse_val(key, value)?,
            "adam.beta1" => self.adam.beta1 = parse_val(key, value)?,
            "adam.beta2" => self.adam.beta2 = parse_val(key, value)?,
            "adam.eps" => self.adam.eps = parse_val(key, value)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: n + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                line: n + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::InvalidArgument("estimator list is empty".into()));
        }
        if self.num_seeds == 0 {
            return Err(Error::InvalidArgument("seed list is empty".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        self.task()?;
        self.train_config(self.estimators[0], self.seed).validate()
    }

    pub fn task(&self) -> Result<GaussianTask<f64>> {
        match self.task {
            TaskSpec::Rho(r) => GaussianTask::new(self.dim, r),
            TaskSpec::TargetMi(m) => GaussianTask::from_target_mi(self.dim, m),
        }
    }

    /// MI value used in file names: the requested target, or the exact MI
    /// of a task given by its correlation.
    pub fn mi_for_names(&self) -> Result<f64> {
        Ok(match self.task {
            TaskSpec::TargetMi(m) => m,
            TaskSpec::Rho(_) => self.task()?.true_mi(),
        })
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.num_seeds as u64)
            .map(|i| self.seed.wrapping_add(i))
            .collect()
    }

    pub fn train_config(&self, kind: EstimatorKind, seed: u64) -> TrainConfig<f64> {
        TrainConfig {
            kind,
            steps: self.steps,
            batch_size: self.batch_size,
            seed,
            eval_interval: self.eval_interval,
            critic: self.critic.clone(),
            adam: self.adam,
            ema: self.ema,
        }
    }

    /// Resolved configuration in the same `key=value` form the loader reads.
    pub fn render(&self) -> String {
        let task = match self.task {
            TaskSpec::Rho(r) => format!("rho={r}"),
            TaskSpec::TargetMi(m) => format!("target_mi={m}"),
        };
        let ests: Vec<&str> = self.estimators.iter().map(|k| k.tag()).collect();
        let widths: Vec<String> = self.critic.hidden.iter().map(|w| w.to_string()).collect();
        [
            format!("dim={}", self.dim),
            task,
            format!("estimators={}", ests.join(",")),
            format!("steps={}", self.steps),
            format!("batch_size={}", self.batch_size),
            format!("seed={}", self.seed),
            format!("seeds={}", self.num_seeds),
            format!("out={}", self.out_dir.display()),
            format!("workers={}", self.workers),
            format!("eval_interval={}", self.eval_interval),
            format!("ema={}", self.ema),
            format!("critic.form={}", self.critic.form),
            format!("critic.widths={}", widths.join(",")),
            format!("critic.embed={}", self.critic.embed),
            format!("adam.lr={}", self.adam.lr),
            format!("adam.beta1={}", self.adam.beta1),
            format!("adam.beta2={}", self.adam.beta2),
            format!("adam.eps={}", self.adam.eps),
        ]
        .join("\n")
            + "\n"
    }
}

/// Outcome of one (estimator, seed) run.
#[derive(Debug)]
pub struct RunRecord {
    pub kind: EstimatorKind,
    pub seed: u64,
    pub csv_path: PathBuf,
    pub result: Result<EstimateTrajectory<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub kind: EstimatorKind,
    pub true_mi: f64,
    pub mean: f64,
    pub bias: f64,
    /// Sample standard deviation across seeds (zero for a single seed).
    pub std: f64,
    pub se: f64,
    pub runs: usize,
    pub failed: usize,
    /// The bound direction failed by more than 3 standard errors. Only
    /// assessed with at least three successful seeds.
    pub violation: bool,
}

pub const MIN_SEEDS_FOR_FLAG: usize = 3;

pub fn summarize(kind: EstimatorKind, true_mi: f64, finals: &[f64], failed: usize) -> SummaryRow {
    let n = finals.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        finals.iter().sum::<f64>() / n as f64
    };
    let std = if n < 2 {
        0.0
    } else {
        (finals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let se = if n == 0 {
        f64::NAN
    } else {
        std / (n as f64).sqrt()
    };
    let violation = n >= MIN_SEEDS_FOR_FLAG
        && match kind.direction() {
            Direction::Upper => mean < true_mi - 3.0 * se,
            Direction::Lower => mean > true_mi + 3.0 * se,
        };
    SummaryRow {
        kind,
        true_mi,
        mean,
        bias: mean - true_mi,
        std,
        se,
        runs: n,
        failed,
        violation,
    }
}

pub const SUMMARY_HEADER: &str =
    "estimator,direction,true_mi,mean,bias,std,se,runs,failed,violation";

impl SummaryRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.kind.direction(),
            format_sig9(self.true_mi),
            format_sig9(self.mean),
            format_sig9(self.bias),
            format_sig9(self.std),
            format_sig9(self.se),
            self.runs,
            self.failed,
            self.violation
        )
    }
}

/// Plain aligned table, one row per estimator.
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let header = [
        "estimator",
        "dir",
        "true_mi",
        "mean",
        "bias",
        "std",
        "se",
        "runs",
        "failed",
        "violation",
    ];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        cells.push(vec![
            r.kind.to_string(),
            r.kind.direction().to_string(),
            format!("{:.6}", r.true_mi),
            format!("{:.6}", r.mean),
            format!("{:+.6}", r.bias),
            format!("{:.6}", r.std),
            format!("{:.6}", r.se),
            r.runs.to_string(),
            r.failed.to_string(),
            if r.violation { "YES" } else { "no" }.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, &w))| {
                if i == 0 {
                    format!("{s:<w$}")
                } else {
                    format!("{s:>w$}")
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

impl BenchOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(|r| r.result.is_ok())
    }
}

impl fmt::Display for BenchOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_summary_table(&self.summary))
    }
}

/// Runs every estimator × seed pair over a pool of `cfg.workers` threads,
/// writes one trajectory CSV per run plus `summary.csv` and `config.txt`.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    cfg.validate()?;
    let task = cfg.task()?;
    let mi_name = cfg.mi_for_names()?;
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("config.txt"), cfg.render())?;
    let jobs: Vec<(EstimatorKind, u64)> = cfg
        .estimators
        .iter()
        .flat_map(|&k| cfg.seeds().into_iter().map(move |s| (k, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let runs: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(kind, seed)| {
                let csv_path = cfg
                    .out_dir
                    .join(csv_file_name(kind, cfg.dim, mi_name, seed));
                let result = train_estimator(&task, &cfg.train_config(kind, seed)).and_then(|t| {
                    fs::write(&csv_path, trajectory_csv(&t))?;
                    Ok(t)
                });
                RunRecord {
                    kind,
                    seed,
                    csv_path,
                    result,
                }
            })
            .collect()
    });
    let mut kinds = cfg.estimators.clone();
    kinds.sort_by_key(|k| k.tag());
    kinds.dedup();
    let summary: Vec<SummaryRow> = kinds
        .into_iter()
        .map(|kind| {
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.kind == kind).collect();
            let finals: Vec<f64> = mine
                .iter()
                .filter_map(|r| r.result.as_ref().ok())
                .map(|t| t.last().smoothed)
                .collect();
            let failed = mine.len() - finals.len();
            summarize(kind, task.true_mi(), &finals, failed)
        })
        .collect();
    let mut csv = String::from(SUMMARY_HEADER);
    csv.push('\n');
    for row in &summary {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    fs::write(cfg.out_dir.join("summary.csv"), csv)?;
    Ok(BenchOutcome { runs, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_parsing() {
        let mut c = BenchConfig::default();
        c.apply_text("# comment\nsteps = 50\nestimators = nwj, infonce\ncritic.widths=8,8\n")
            .unwrap();
        c.set("steps", "70").unwrap();
        assert_eq!(c.steps, 70);
        assert_eq!(c.estimators, [EstimatorKind::Nwj, EstimatorKind::InfoNce]);
        assert_eq!(c.critic.hidden, [8, 8]);
        assert!(c.apply_text("bogus=1").is_err());
        assert!(c.apply_text("no equals sign").is_err());
    }

    #[test]
    fn render_round_trips() {
        let mut c = BenchConfig::default();
        c.set("rho", "0.3").unwrap();
        c.set("estimators", "l1out,dv").unwrap();
        let mut d = BenchConfig::default();
        d.apply_text(&c.render()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn summary_statistics() {
        let row = summarize(EstimatorKind::Nwj, 2.0, &[1.0, 2.0, 3.0], 0);
        assert_eq!(row.mean, 2.0);
        assert_eq!(row.std, 1.0);
        assert!((row.se - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(!row.violation);
        let high = summarize(EstimatorKind::Nwj, 2.0, &[3.0, 3.1, 2.9], 0);
        assert!(high.violation);
        let low_upper = summarize(EstimatorKind::L1Out, 2.0, &[1.0, 1.1, 0.9], 0);
        assert!(low_upper.violation);
        let two = summarize(EstimatorKind::Nwj, 2.0, &[3.0, 3.1], 0);
        assert!(!two.violation);
        let one = summarize(EstimatorKind::Nwj, 2.0, &[1.5], 0);
        assert_eq!((one.mean, one.std), (1.5, 0.0));
    }

    #[test]
    fn table_is_aligned() {
        let rows = vec![
            summarize(EstimatorKind::InfoNce, 2.0, &[1.8, 1.9, 1.85], 0),
            summarize(EstimatorKind::L1Out, 2.0, &[2.5, 2.4, 2.6], 0),
        ];
        let t = format_summary_table(&rows);
        let lens: Vec<usize> = t.lines().map(|l| l.len()).collect();
        assert_eq!(lens.len(), 3);
        assert!(t.lines().nth(1).unwrap().starts_with("infonce"));
    }
}
