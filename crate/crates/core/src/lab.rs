//! Binomial tails against the Chernoff bounds, and measured failure rates of
//! the partition and label conditions.

use std::fmt::Write as _;

use rand::distributions::{Bernoulli, Distribution};

use crate::error::{Error, Result};
use crate::generate::random_regular;
use crate::graph::Graph;
use crate::labeling::{check_x_conditions, sample_x};
use crate::params::{Mode, PipelineParams};
use crate::partition::{check_partition, sample_partition};
use crate::report::Condition;
use crate::seed::{self, Stream};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffBounds {
    /// `exp(-t^2 / (3np))` for `P(X > np + t)`.
    pub upper: f64,
    /// `exp(-t^2 / (2np))` for `P(X < np - t)`.
    pub lower: f64,
}

pub fn chernoff_bounds(n: u64, p: f64, t: f64) -> Result<ChernoffBounds> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Param(format!("p = {p} is not in (0, 1)")));
    }
    let np = n as f64 * p;
    if !(0.0..=np).contains(&t) {
        return Err(Error::Param(format!("t = {t} outside [0, np] = [0, {np}]")));
    }
    Ok(ChernoffBounds {
        upper: (-t * t / (3.0 * np)).exp(),
        lower: (-t * t / (2.0 * np)).exp(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailEstimate {
    pub n: u64,
    pub p: f64,
    pub t: f64,
    pub trials: u64,
    /// Fraction of samples with `X > np + t`.
    pub above: f64,
    /// Fraction of samples with `X < np - t`.
    pub below: f64,
    pub se_above: f64,
    pub se_below: f64,
    /// Smallest nonzero frequency the run can report.
    pub resolution: f64,
}

fn stderr(rate: f64, trials: u64) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

fn workers(jobs: u64) -> u64 {
    let cpus = std::thread::available_parallelism().map_or(1, |c| c.get()) as u64;
    cpus.min(jobs).max(1)
}

/// Runs `trials` independent jobs, each with its own derived seed, and sums
/// the per-job count vectors. The result does not depend on the worker
/// count.
fn par_counts<F>(trials: u64, width: usize, job: F) -> Vec<u64>
where
    F: Fn(u64, &mut [u64]) + Sync,
{
    let w = workers(trials);
    let job = &job;
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..w)
            .map(|k| {
                s.spawn(move || {
                    let mut acc = vec![0u64; width];
                    let mut i = k;
                    while i < trials {
                        job(i, &mut acc);
                        i += w;
                    }
                    acc
                })
            })
            .collect();
        let mut total = vec![0u64; width];
        for h in handles {
            for (t, x) in total.iter_mut().zip(h.join().expect("worker panicked")) {
                *t += x;
            }
        }
        total
    })
}

/// Monte Carlo frequencies of both tails of `BIN(n, p)` for each deviation
/// in `ts`, from one shared set of samples. Each sample is a sum of `n`
/// Bernoulli draws.
pub fn binomial_tail_estimates(
    n: u64,
    p: f64,
    ts: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    if trials == 0 {
        return Err(Error::Param("trials must be at least 1".into()));
    }
    let bern = Bernoulli::new(p).map_err(|e| Error::Param(format!("p = {p}: {e}")))?;
    let np = n as f64 * p;
    let counts = par_counts(trials, 2 * ts.len(), |i, acc| {
        let mut rng = seed::rng(seed::derive(seed, Stream::Tail, i));
        let x = (0..n).filter(|_| bern.sample(&mut rng)).count() as f64;
        for (j, &t) in ts.iter().enumerate() {
            acc[2 * j] += u64::from(x > np + t);
            acc[2 * j + 1] += u64::from(x < np - t);
        }
    });
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let above = counts[2 * j] as f64 / trials as f64;
            let below = counts[2 * j + 1] as f64 / trials as f64;
            TailEstimate {
                n,
                p,
                t,
                trials,
                above,
                below,
                se_above: stderr(above, trials),
                se_below: stderr(below, trials),
                resolution: 1.0 / trials as f64,
            }
        })
        .collect())
}

pub fn binomial_tail_estimate(n: u64, p: f64, t: f64, trials: u64, seed: u64) -> Result<TailEstimate> {
    Ok(binomial_tail_estimates(n, p, &[t], trials, seed)?.remove(0))
}

pub const TAIL_CSV_HEADER: &str = "n,p,t,trials,above,se_above,upper_bound,below,se_below,lower_bound";

pub fn tail_csv_row(e: &TailEstimate) -> Result<String> {
    let b = chernoff_bounds(e.n, e.p, e.t)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{}",
        e.n, e.p, e.t, e.trials, e.above, e.se_above, b.upper, e.below, e.se_below, b.lower
    ))
}

/// The six sampled conditions, in order.
pub const SAMPLED_CONDITIONS: [Condition; 6] = [
    Condition::PartSize,
    Condition::NeighbourShare,
    Condition::RankHigh,
    Condition::RankLow,
    Condition::RightHigh,
    Condition::RightLow,
];

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub condition: Condition,
    pub n: usize,
    pub d: usize,
    pub b: f64,
    pub eps: f64,
    pub slack: f64,
    pub trials: u64,
    /// Fraction of trials with at least one violation.
    pub rate: f64,
    pub stderr: f64,
    /// Mean `measured / bound` of the worst violation, over failing trials.
    pub mean_excess: f64,
}

pub const RATE_CSV_HEADER: &str = "condition,n,d,b,eps,slack,trials,rate,stderr,mean_excess";

impl RateRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.condition.id(),
            self.n,
            self.d,
            self.b,
            self.eps,
            self.slack,
            self.trials,
            self.rate,
            self.stderr,
            self.mean_excess
        )
    }
}

/// Setup for [`condition_failure_rates`].
#[derive(Clone, Debug)]
pub struct RateSweep<'g> {
    pub n: usize,
    pub d: usize,
    pub b: f64,
    pub eps: f64,
    pub slacks: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Use this graph in every trial instead of drawing a fresh one.
    pub graph: Option<&'g Graph>,
}

/// Per trial: one graph, one partition, one set of labels; every slack in
/// the sweep is evaluated on the same sample, so windows nest trial by trial.
pub fn condition_failure_rates(sweep: &RateSweep<'_>) -> Result<Vec<RateRow>> {
    if sweep.trials == 0 {
        return Err(Error::Param("trials must be at least 1".into()));
    }
    if let Some(g) = sweep.graph {
        if g.order() != sweep.n || g.regular_degree() != Some(sweep.d) {
            return Err(Error::Param(format!(
                "supplied graph is not {}-regular on {} vertices",
                sweep.d, sweep.n
            )));
        }
    }
    for &s in &sweep.slacks {
        PipelineParams::empirical(sweep.b, sweep.eps, s).validate()?;
    }
    let base = PipelineParams::empirical(sweep.b, sweep.eps, 1.0);
    let width = sweep.slacks.len() * SAMPLED_CONDITIONS.len();
    let first_error = std::sync::Mutex::new(None::<(u64, Error)>);
    // per (slack, condition): failing trials, and excess ratios in millionths
    let counts = par_counts(sweep.trials, 2 * width, |i, acc| {
        let trial_seed = seed::derive(sweep.seed, Stream::Trial, i);
        let mut run = || -> Result<()> {
            let owned;
            let g = match sweep.graph {
                Some(g) => g,
                None => {
                    owned = random_regular(sweep.n, sweep.d, seed::derive(trial_seed, Stream::Graph, 0))?;
                    &owned
                }
            };
            let part = sample_partition(g, &base, seed::derive(trial_seed, Stream::Partition, 0))?;
            let xa = sample_x(g, &part, seed::derive(trial_seed, Stream::Labels, 0));
            for (si, &slack) in sweep.slacks.iter().enumerate() {
                let p = PipelineParams {
                    slack,
                    mode: Mode::Empirical,
                    ..base
                };
                let mut report = check_partition(g, &part, &p)?;
                report.merge(check_x_conditions(g, &part, &xa, &p)?);
                for (ci, &c) in SAMPLED_CONDITIONS.iter().enumerate() {
                    if let Some(w) = report.summary(c).and_then(|s| s.worst.as_ref()) {
                        let slot = si * SAMPLED_CONDITIONS.len() + ci;
                        acc[2 * slot] += 1;
                        let ratio = w.excess_ratio().min(1e9);
                        acc[2 * slot + 1] += (ratio * 1e6).round() as u64;
                    }
                }
            }
            Ok(())
        };
        if let Err(e) = run() {
            let mut slot = first_error.lock().unwrap();
            if slot.as_ref().is_none_or(|(j, _)| i < *j) {
                *slot = Some((i, e));
            }
        }
    });
    if let Some((_, e)) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut rows = Vec::with_capacity(width);
    for (si, &slack) in sweep.slacks.iter().enumerate() {
        for (ci, &c) in SAMPLED_CONDITIONS.iter().enumerate() {
            let slot = si * SAMPLED_CONDITIONS.len() + ci;
            let fails = counts[2 * slot];
            let rate = fails as f64 / sweep.trials as f64;
            rows.push(RateRow {
                condition: c,
                n: sweep.n,
                d: sweep.d,
                b: sweep.b,
                eps: sweep.eps,
                slack,
                trials: sweep.trials,
                rate,
                stderr: stderr(rate, sweep.trials),
                mean_excess: if fails == 0 {
                    0.0
                } else {
                    counts[2 * slot + 1] as f64 / 1e6 / fails as f64
                },
            });
        }
    }
    Ok(rows)
}

pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{RATE_CSV_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chernoff_examples() {
        let b = chernoff_bounds(1000, 0.5, 0.0).unwrap();
        assert_eq!((b.upper, b.lower), (1.0, 1.0));
        let b = chernoff_bounds(1000, 0.5, 100.0).unwrap();
        assert!((b.upper - (-20.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((b.upper - 1.27e-3).abs() < 1e-5);
        assert!((b.lower - (-10.0f64).exp()).abs() < 1e-15);
        assert!(chernoff_bounds(10, 0.5, 6.0).is_err());
        assert!(chernoff_bounds(10, 1.0, 1.0).is_err());
        assert!(chernoff_bounds(10, 0.5, -1.0).is_err());
    }

    #[test]
    fn tail_estimates_are_deterministic() {
        let a = binomial_tail_estimates(200, 0.3, &[6.0, 30.0, 60.0], 2000, 5).unwrap();
        let b = binomial_tail_estimates(200, 0.3, &[6.0, 30.0, 60.0], 2000, 5).unwrap();
        assert_eq!(a, b);
        assert!(a[0].above >= a[1].above && a[1].above >= a[2].above);
        assert_eq!(a[2].above, 0.0);
        assert_eq!(a[2].resolution, 1.0 / 2000.0);
        assert_ne!(a, binomial_tail_estimates(200, 0.3, &[6.0, 30.0, 60.0], 2000, 6).unwrap());
    }

    #[test]
    fn tail_estimate_matches_exact_binomial() {
        // BIN(20, 0.5): P(X > 12) = 0.131588..., P(X < 8) = same by symmetry
        let e = binomial_tail_estimate(20, 0.5, 2.0, 20_000, 1).unwrap();
        let exact = (13..=20u64)
            .map(|k| {
                let c: f64 = (0..k).map(|i| (20 - i) as f64 / (i + 1) as f64).product();
                c / 2f64.powi(20)
            })
            .sum::<f64>();
        assert!((exact - 0.131588).abs() < 1e-5);
        assert!((e.above - exact).abs() < 4.0 * e.se_above, "{} vs {exact}", e.above);
        assert!((e.below - exact).abs() < 4.0 * e.se_below, "{} vs {exact}", e.below);
    }

    #[test]
    fn huge_slack_has_zero_rates_and_rates_nest() {
        let sweep = RateSweep {
            n: 300,
            d: 20,
            b: 0.2,
            eps: 0.05,
            slacks: vec![1.0, 1.5, 2.0, 1e6],
            trials: 6,
            seed: 3,
            graph: None,
        };
        let rows = condition_failure_rates(&sweep).unwrap();
        assert_eq!(rows.len(), 24);
        for ci in 0..6 {
            let r: Vec<f64> = (0..4).map(|si| rows[si * 6 + ci].rate).collect();
            assert!(r[0] >= r[1] && r[1] >= r[2], "{r:?}");
            assert_eq!(r[3], 0.0);
        }
        assert_eq!(rows, condition_failure_rates(&sweep).unwrap());
        let csv = rates_csv(&rows);
        assert!(csv.starts_with(RATE_CSV_HEADER));
        assert!(csv.contains("\ncond2,300,20,0.2,0.05,1,6,"));
    }
}
