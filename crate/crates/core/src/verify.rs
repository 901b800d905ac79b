//! Randomized verification suite over the finite-alphabet theorems. Each
//! probe draws its own tables from a generator keyed by the master seed plus
//! the trial index and reports the worst slack: for an inequality
//! `lhs ≤ rhs` the slack is `rhs − lhs`; for an identity it is the negated
//! absolute error. A probe passes when its worst slack is at least `−tol`.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrete::random::{
    random_cond, random_joint2, random_joint3, random_joint_n, random_pmf,
};
use crate::discrete::{
    conditional_entropy, conditional_mutual_information, conditional_mutual_information_direct,
    entropy, joint_entropy, kl_divergence, mi_chain_rule_terms, mutual_information,
    mutual_information_groups, mutual_information_via_entropies, Axis, Axis3, ExtReal, JointPmf2,
    Pmf,
};
use crate::error::Result;
use crate::rng::stream_rng;
use crate::variational::{
    alpha_grid, dpi_check, dv_supremum, dv_value, entropy_concavity_probe,
    entropy_continuity_probe, golden_decomposition, gyp_mi_supremum, gyp_supremum, jensen_probe,
    kl_convexity_probe, markov_joint, mi_concavity_convexity_probe, product_distance_minimize,
    CriticVector, MarkovChainSpec, ProbeReport, DV_DEFAULT_LR, DV_DEFAULT_STEPS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Perturbs the KL oracle used by the suite; a negative control that must fail.
    pub corrupt_oracle: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 1000,
            seed: 0,
            corrupt_oracle: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeLine {
    pub id: &'static str,
    pub what: &'static str,
    pub trials: usize,
    pub checks: usize,
    pub worst_slack: f64,
    /// Human-readable tolerance; individual checks may use tighter ones.
    pub tol: &'static str,
    pub failures: usize,
    pub witness: Option<String>,
}

impl ProbeLine {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for ProbeLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slack = if self.checks == 0 {
            "n/a".to_string()
        } else {
            format!("{:.3e}", self.worst_slack)
        };
        write!(
            f,
            "{:<11} {:<44} trials={:<6} worst_slack={:<11} tol={:<7} {}",
            self.id,
            self.what,
            self.trials,
            slack,
            self.tol,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub lines: Vec<ProbeLine>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(ProbeLine::passed)
    }
}

struct Oracle {
    corrupt: bool,
}

impl Oracle {
    fn kl(&self, p: &Pmf<f64>, q: &Pmf<f64>) -> Result<ExtReal<f64>> {
        let d = kl_divergence(p, q)?;
        Ok(match d {
            ExtReal::Finite(v) if self.corrupt => ExtReal::Finite(v - 1e-3),
            other => other,
        })
    }

    fn mi_via_kl(&self, j: &JointPmf2<f64>) -> Result<f64> {
        let flat = j.flatten();
        let prod = JointPmf2::product(&j.marginal(Axis::Rows), &j.marginal(Axis::Cols))?.flatten();
        Ok(self.kl(&flat, &prod)?.value())
    }
}

/// Worst slack plus a count of checks that fell outside their own tolerance.
#[derive(Default)]
struct Tally {
    report: ProbeReport<f64>,
    failures: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn check(&mut self, slack: f64, ok: bool, witness: impl Fn() -> String) {
        if !ok && self.first_failure.is_none() {
            self.first_failure = Some(witness());
        }
        self.failures += usize::from(!ok);
        self.report.record(slack, witness);
    }

    /// `slack ≥ −tol`.
    fn within(&mut self, slack: f64, tol: f64, witness: impl Fn() -> String) {
        self.check(slack, slack >= -tol, witness);
    }

    fn strict(&mut self, slack: f64, witness: impl Fn() -> String) {
        self.check(slack, slack > 0.0, witness);
    }

    fn probe(&mut self, report: ProbeReport<f64>, tol: f64) {
        if !report.holds(tol) {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = report.witness.clone();
            }
        }
        self.report.merge(report);
    }

    fn merge(&mut self, other: Tally) {
        self.failures += other.failures;
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
        self.report.merge(other.report);
    }
}

fn trial_rng(seed: u64, trial: usize, probe: u64) -> ChaCha8Rng {
    stream_rng(seed.wrapping_add(trial as u64), probe)
}

fn size<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Runs `body` for each trial (in parallel) and merges the reports in trial order.
fn run_trials<F>(trials: usize, seed: u64, probe: u64, body: F) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) -> Result<()> + Sync,
{
    let parts: Vec<Result<Tally>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t, probe);
            let mut r = Tally::default();
            body(&mut rng, &mut r)?;
            Ok(r)
        })
        .collect();
    let mut total = Tally::default();
    for p in parts {
        total.merge(p?);
    }
    Ok(total)
}

fn identity_slack(a: f64, b: f64) -> f64 {
    0.0 - (a - b).abs()
}

fn random_alphas<R: Rng>(rng: &mut R) -> Vec<f64> {
    let mut a = alpha_grid::<f64>();
    a.extend((0..20).map(|_| rng.random::<f64>()));
    a
}

fn line(
    id: &'static str,
    what: &'static str,
    trials: usize,
    tol: &'static str,
    t: Tally,
) -> ProbeLine {
    let checks = t.report.checks;
    ProbeLine {
        id,
        what,
        trials,
        checks,
        worst_slack: if checks == 0 {
            0.0
        } else {
            t.report.worst_slack
        },
        tol,
        failures: t.failures,
        witness: t.first_failure,
    }
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let n = opts.trials;
    let seed = opts.seed;
    let oracle = Oracle {
        corrupt: opts.corrupt_oracle,
    };
    let mut lines = Vec::new();
    let mut warnings = Vec::new();
    if n == 0 {
        warnings.push("trials=0: every probe passes vacuously".to_string());
    }

    let r = run_trials(n, seed, 1, |rng, rep| {
        let (a, b) = (size(rng, 1, 6), size(rng, 1, 6));
        let j = random_joint2::<f64, _>(rng, a, b);
        let hxy = joint_entropy(&j);
        let hx = entropy(&j.marginal(Axis::Rows));
        let hy = entropy(&j.marginal(Axis::Cols));
        let w = || format!("{}", j.probs());
        rep.within(
            identity_slack(hxy, hx + conditional_entropy(&j, Axis::Rows)),
            1e-12,
            w,
        );
        rep.within(
            identity_slack(hxy, hy + conditional_entropy(&j, Axis::Cols)),
            1e-12,
            w,
        );
        rep.within(hx + hy - hxy, 1e-12, w);
        Ok(())
    })?;
    lines.push(line(
        "T1",
        "entropy chain rule and subadditivity",
        n,
        "1e-12",
        r,
    ));

    let r = run_trials(n, seed, 2, |rng, rep| {
        let (a, b) = (size(rng, 1, 6), size(rng, 1, 6));
        let j = random_joint2::<f64, _>(rng, a, b);
        let mi = mutual_information(&j);
        let hx = entropy(&j.marginal(Axis::Rows));
        let hy = entropy(&j.marginal(Axis::Cols));
        let w = || format!("{}", j.probs());
        rep.within(
            identity_slack(mi, hx - conditional_entropy(&j, Axis::Cols)),
            1e-12,
            w,
        );
        rep.within(
            identity_slack(mi, hy - conditional_entropy(&j, Axis::Rows)),
            1e-12,
            w,
        );
        rep.within(
            identity_slack(mi, mutual_information(&j.transpose())),
            1e-12,
            w,
        );
        rep.within(mi, 1e-12, w);
        rep.within(hx - conditional_entropy(&j, Axis::Cols), 1e-12, w);
        let shape3 = (size(rng, 1, 3), size(rng, 1, 3), size(rng, 1, 3));
        let j3 = random_joint3::<f64, _>(rng, shape3);
        let w3 = || format!("{}", j3.probs());
        for ax in [Axis3::X, Axis3::Y, Axis3::Z] {
            let c9 = conditional_mutual_information(&j3, ax);
            rep.within(
                identity_slack(c9, conditional_mutual_information_direct(&j3, ax)),
                1e-12,
                w3,
            );
            rep.within(c9, 1e-12, w3);
        }
        Ok(())
    })?;
    lines.push(line(
        "T2",
        "MI entropy forms, symmetry, nonnegativity",
        n,
        "1e-12",
        r,
    ));

    let r = run_trials(n, seed, 3, |rng, rep| {
        let vars = size(rng, 1, 4);
        let shape: Vec<usize> = (0..=vars).map(|_| size(rng, 2, 3)).collect();
        let j = random_joint_n::<f64, _>(rng, &shape);
        let terms = mi_chain_rule_terms(&j)?;
        let xs: Vec<usize> = (0..vars).collect();
        let total = mutual_information_groups(&j, &xs, &[vars]);
        rep.within(identity_slack(terms.iter().sum(), total), 1e-10, || {
            format!("shape={shape:?}")
        });
        Ok(())
    })?;
    lines.push(line("T3", "MI chain rule", n, "1e-10", r));

    let r = run_trials(n, seed, 4, |rng, rep| {
        let k = size(rng, 2, 8);
        let (p1, q1, p2, q2) = (
            random_pmf::<f64, _>(rng, k),
            random_pmf(rng, k),
            random_pmf(rng, k),
            random_pmf(rng, k),
        );
        let alphas = random_alphas(rng);
        rep.probe(kl_convexity_probe((&p1, &q1), (&p2, &q2), &alphas)?, 1e-12);
        rep.probe(kl_convexity_probe((&p1, &q1), (&p1, &q1), &alphas)?, 1e-12);
        Ok(())
    })?;
    lines.push(line("T4", "KL joint convexity", n, "1e-12", r));

    let r = run_trials(n, seed, 5, |rng, rep| {
        let k = size(rng, 2, 8);
        let (p1, p2) = (random_pmf::<f64, _>(rng, k), random_pmf(rng, k));
        rep.probe(
            entropy_concavity_probe(&p1, &p2, &random_alphas(rng))?,
            1e-12,
        );
        Ok(())
    })?;
    lines.push(line("T5", "entropy concavity", n, "1e-12", r));

    let r = run_trials(n, seed, 6, |rng, rep| {
        let (a, b) = (size(rng, 2, 5), size(rng, 2, 5));
        let (px1, px2) = (random_pmf::<f64, _>(rng, a), random_pmf(rng, a));
        let (c1, c2) = (random_cond::<f64, _>(rng, a, b), random_cond(rng, a, b));
        let shape = mi_concavity_convexity_probe(&px1, &px2, &c1, &c2, &random_alphas(rng))?;
        rep.probe(shape.concave_in_input, 1e-12);
        rep.probe(shape.convex_in_channel, 1e-12);
        Ok(())
    })?;
    lines.push(line(
        "T6",
        "MI concave in input, convex in channel",
        n,
        "1e-12",
        r,
    ));

    let r = run_trials(n, seed, 7, |rng, rep| {
        let k = size(rng, 3, 8);
        let p = random_pmf::<f64, _>(rng, k);
        let errs = entropy_continuity_probe(&p, &[1e-2, 1e-4, 1e-6])?;
        let w = || format!("p={:?} deltas={errs:?}", p.probs());
        rep.strict(errs[0] - errs[1], w);
        rep.strict(errs[1] - errs[2], w);
        Ok(())
    })?;
    lines.push(line(
        "continuity",
        "entropy change shrinks with perturbation",
        n,
        "strict",
        r,
    ));

    let r = run_trials(n, seed, 8, |rng, rep| {
        let k = size(rng, 2, 8);
        let p = random_pmf::<f64, _>(rng, k);
        let vals: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..5.0)).collect();
        let convex: [fn(f64) -> f64; 4] = [|t| t * t, |t| t * t.ln(), f64::exp, |t| 2.0 * t - 1.0];
        for f in convex {
            let (lhs, rhs) = jensen_probe(f, &p, &vals)?;
            rep.within(lhs - rhs, 1e-12, || format!("p={:?} x={vals:?}", p.probs()));
        }
        Ok(())
    })?;
    lines.push(line("T7", "Jensen inequality", n, "1e-12", r));

    let r = run_trials(n, seed, 9, |rng, rep| {
        let k = size(rng, 1, 10);
        let (p, q) = (random_pmf::<f64, _>(rng, k), random_pmf(rng, k));
        let w = || format!("p={:?} q={:?}", p.probs(), q.probs());
        rep.within(oracle.kl(&p, &q)?.value(), 1e-12, w);
        rep.within(identity_slack(oracle.kl(&p, &p)?.value(), 0.0), 1e-12, w);
        Ok(())
    })?;
    lines.push(line("T8", "divergence inequality", n, "1e-12", r));

    let chains = n * 10;
    let r = run_trials(chains, seed, 10, |rng, rep| {
        let (nx, ny, nz) = if rng.random_bool(0.5) {
            (2, 2, 2)
        } else {
            (size(rng, 2, 4), size(rng, 2, 4), size(rng, 2, 4))
        };
        let spec = MarkovChainSpec::<f64>::random(rng, nx, ny, nz);
        let d = dpi_check(&spec);
        let w = || format!("{}", markov_joint(&spec).probs());
        rep.within(d.ixy - d.ixz, 1e-12, w);
        rep.within(d.ixy - d.ixy_given_z, 1e-12, w);
        rep.within(-d.ixz_given_y.abs(), 1e-12, w);
        Ok(())
    })?;
    lines.push(line(
        "T9",
        "data processing along X->Y->Z",
        chains,
        "1e-12",
        r,
    ));

    let r = run_trials(n, seed, 11, |rng, rep| {
        let (a, b) = (size(rng, 1, 6), size(rng, 1, 6));
        let j = random_joint2::<f64, _>(rng, a, b);
        let mi = mutual_information(&j);
        for (axis, k) in [(Axis::Rows, a), (Axis::Cols, b)] {
            let q = random_pmf::<f64, _>(rng, k);
            let q = Pmf::new(j.labels(axis).to_vec(), q.probs().to_vec())?;
            let t = golden_decomposition(&j, &q, axis)?;
            let diff = t.difference().unwrap_or(f64::NAN);
            rep.within(identity_slack(diff, mi), 1e-10, || {
                format!("{} q={:?}", j.probs(), q.probs())
            });
        }
        Ok(())
    })?;
    lines.push(line("T10", "golden identity", n, "1e-10", r));

    let r = run_trials(n, seed, 12, |rng, rep| {
        let (a, b) = (size(rng, 1, 6), size(rng, 1, 6));
        let j = random_joint2::<f64, _>(rng, a, b);
        let mi = mutual_information(&j);
        let fit = product_distance_minimize(&j, 5)?;
        let w = || format!("{}", j.probs());
        rep.within(identity_slack(fit.value, mi), 1e-8, w);
        let px = j.marginal(Axis::Rows);
        let py = j.marginal(Axis::Cols);
        for (fitted, truth) in [(&fit.qx, &px), (&fit.qy, &py)] {
            for (u, v) in fitted.probs().iter().zip(truth.probs()) {
                rep.within(identity_slack(*u, *v), 1e-8, w);
            }
        }
        for h in &fit.history {
            rep.within(h - mi, 1e-10, w);
        }
        Ok(())
    })?;
    lines.push(line(
        "T11",
        "distance to product distributions",
        n,
        "1e-8",
        r,
    ));

    let r = run_trials(n, seed, 13, |rng, rep| {
        let k = size(rng, 1, 16);
        let (p, q) = (random_pmf::<f64, _>(rng, k), random_pmf(rng, k));
        let kl = oracle.kl(&p, &q)?.value();
        let fit = dv_supremum(&p, &q, DV_DEFAULT_STEPS, DV_DEFAULT_LR)?;
        let w = || format!("p={:?} q={:?}", p.probs(), q.probs());
        rep.within(identity_slack(fit.value, kl), 1e-6, w);
        let g = CriticVector::new((0..k).map(|_| rng.random_range(-3.0..3.0)).collect())?;
        rep.within(kl - dv_value(&p, &q, &g)?, 1e-12, w);
        Ok(())
    })?;
    lines.push(line("T12", "Donsker-Varadhan supremum", n, "1e-6", r));

    let r = run_trials(n, seed, 14, |rng, rep| {
        let k = size(rng, 1, 8);
        let (p, q) = (random_pmf::<f64, _>(rng, k), random_pmf(rng, k));
        let kl = oracle.kl(&p, &q)?.value();
        let w = || format!("p={:?} q={:?}", p.probs(), q.probs());
        let mut prev = f64::NEG_INFINITY;
        for m in 1..=k {
            let v = gyp_supremum(&p, &q, m)?.value.value();
            rep.within((v - prev).min(0.0), 0.0, w);
            prev = v;
        }
        rep.check(identity_slack(prev, kl), prev == kl, w);
        let (a, b) = (size(rng, 1, 4), size(rng, 1, 4));
        let j = random_joint2::<f64, _>(rng, a, b);
        let fine = gyp_mi_supremum(&j, a.max(b))?.value;
        let mi = mutual_information(&j);
        rep.check(identity_slack(fine, mi), fine == mi, || {
            format!("{}", j.probs())
        });
        Ok(())
    })?;
    lines.push(line(
        "T13",
        "Gelfand-Yaglom-Perez finest partition",
        n,
        "exact",
        r,
    ));

    let r = run_trials(n, seed, 15, |rng, rep| {
        let (a, b) = (size(rng, 1, 8), size(rng, 1, 8));
        let j = random_joint2::<f64, _>(rng, a, b);
        let direct = mutual_information(&j);
        let via_kl = oracle.mi_via_kl(&j)?;
        let via_h = mutual_information_via_entropies(&j);
        let w = || format!("{}", j.probs());
        rep.within(identity_slack(direct, via_kl), 1e-12, w);
        rep.within(identity_slack(direct, via_h), 1e-12, w);
        rep.within(identity_slack(via_kl, via_h), 1e-12, w);
        Ok(())
    })?;
    lines.push(line(
        "cross",
        "MI as KL, direct sum and entropies agree",
        n,
        "1e-12",
        r,
    ));

    Ok(VerifyReport { lines, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let rep = run_verify(&VerifyOptions {
            trials: 20,
            seed: 3,
            corrupt_oracle: false,
        })
        .unwrap();
        for l in &rep.lines {
            assert!(l.passed(), "{l}");
        }
        assert_eq!(rep.lines.len(), 15);
    }

    #[test]
    fn zero_trials_is_vacuous_with_warning() {
        let rep = run_verify(&VerifyOptions {
            trials: 0,
            seed: 0,
            corrupt_oracle: false,
        })
        .unwrap();
        assert!(rep.passed());
        assert!(!rep.warnings.is_empty());
    }

    #[test]
    fn corrupted_oracle_fails() {
        let rep = run_verify(&VerifyOptions {
            trials: 10,
            seed: 0,
            corrupt_oracle: true,
        })
        .unwrap();
        assert!(!rep.passed());
    }
}
