//! End-to-end construction: partition, labels, initial and residual weights,
//! the union pass over `G[U]`, separation checks and the final shift.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::error::{Error, Result, Stage, StageFailure};
use crate::graph::Graph;
use crate::kkp::{run_kkp, separation_checks, KkpDiagnostics};
use crate::labeling::{
    assign_omega_prime, compute_budgets, feasibility, find_x, initial_weighting, Budgets,
    FeasibilityReport, XAssignment,
};
use crate::params::{degree_range, DegreeRange, LogPowers, Mode, PipelineParams};
use crate::partition::{find_partition, VertexPartition, CLASSES};
use crate::report::ConditionReport;
use crate::verify::{finalize_and_check, regular_lower_bound, VerificationResult};
use crate::weights::WeightingState;

#[derive(Clone, Debug)]
pub enum Outcome {
    Irregular,
    /// Every stage ran but the final weighting has a collision.
    NotIrregular,
    Failed(StageFailure),
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Irregular => "irregular",
            Outcome::NotIrregular => "not-irregular",
            Outcome::Failed(_) => "stage-failure",
        }
    }
}

/// Everything one run produced. Intermediate states are kept so callers can
/// check stage invariants.
#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub n: usize,
    pub d: usize,
    pub params: PipelineParams,
    pub seed: u64,
    pub budgets: Budgets,
    pub range: DegreeRange,
    pub partition: Option<VertexPartition>,
    pub partition_attempts: Option<usize>,
    pub labels: Option<XAssignment>,
    pub label_attempts: Option<usize>,
    /// Condition reports: accepted samples, or the last rejected one.
    pub partition_report: Option<ConditionReport>,
    pub label_report: Option<ConditionReport>,
    pub feasibility: Option<FeasibilityReport>,
    pub omega1: Option<WeightingState>,
    pub omega2: Option<WeightingState>,
    pub kkp: Option<KkpDiagnostics>,
    pub separation: Option<ConditionReport>,
    pub omega3: Option<WeightingState>,
    pub verification: Option<VerificationResult>,
    pub outcome: Outcome,
    /// Wall-clock time per stage; not part of the report.
    pub timings: Vec<(Stage, Duration)>,
}

/// `(n/d)(1 + 8/ln^b n)`.
pub fn theorem_cap(n: usize, d: usize, b: f64) -> Result<f64> {
    let lp = LogPowers::new(n)?;
    Ok(n as f64 / d as f64 * (1.0 + 8.0 / lp.pow(b)))
}

fn budgets_kv(out: &mut String, b: &Budgets) {
    let _ = writeln!(out, "budgets.base={}", b.base);
    let _ = writeln!(out, "budgets.class_step={}", b.class_step);
    let _ = writeln!(out, "budgets.fine_cap={}", b.fine_cap);
    let _ = writeln!(out, "budgets.kkp_step={}", b.kkp_step);
    let _ = writeln!(out, "budgets.B0={}", b.b0);
    let _ = writeln!(out, "budgets.N={}", b.big_n);
    let _ = writeln!(out, "budgets.label_cap={}", b.label_cap());
    for (i, f) in b.flags.iter().enumerate() {
        let _ = writeln!(out, "budgets.near_integer.{i}={f}");
    }
}

fn range_kv(out: &mut String, r: &DegreeRange) {
    let _ = writeln!(out, "range.low={}", r.low);
    let _ = writeln!(out, "range.high={}", r.high);
    let _ = writeln!(
        out,
        "range.status={}",
        if r.contains { "FEASIBLE" } else { "INFEASIBLE" }
    );
}

/// Lower bound, the theorem's cap, the budgets and the degree range for
/// `(n, d, b, eps)`, as `key=value` lines.
pub fn bounds_table(n: usize, d: usize, b: f64, eps: f64) -> Result<String> {
    if d == 0 || d >= n {
        return Err(Error::Param(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "n={n}\nd={d}\nb={b}\neps={eps}");
    let _ = writeln!(out, "lower_bound={}", regular_lower_bound(n as u64, d as u64)?);
    let _ = writeln!(out, "theorem_cap={}", theorem_cap(n, d, b)?);
    match compute_budgets(n, d, b, eps) {
        Ok(budgets) => budgets_kv(&mut out, &budgets),
        Err(e) => {
            let _ = writeln!(out, "budgets.error={e}");
        }
    }
    range_kv(&mut out, &degree_range(n, d, b, eps)?);
    Ok(out)
}

impl PipelineRun {
    pub fn succeeded(&self) -> bool {
        matches!(self.outcome, Outcome::Irregular)
    }

    pub fn failure(&self) -> Option<&StageFailure> {
        match &self.outcome {
            Outcome::Failed(f) => Some(f),
            _ => None,
        }
    }

    /// Flat `key=value` report; identical inputs give identical bytes.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let _ = writeln!(out, "n={}\nd={}", self.n, self.d);
        let _ = writeln!(out, "b={}\neps={}\nslack={}", p.b, p.eps, p.slack);
        let _ = writeln!(out, "mode={}\nseed={}\nmax_retries={}", p.mode, self.seed, p.max_retries);
        let _ = writeln!(
            out,
            "bound.lower={}",
            regular_lower_bound(self.n as u64, self.d as u64).unwrap_or(0)
        );
        if let Ok(cap) = theorem_cap(self.n, self.d, p.b) {
            let _ = writeln!(out, "bound.theorem_cap={cap}");
        }
        budgets_kv(&mut out, &self.budgets);
        range_kv(&mut out, &self.range);
        if let Some(a) = self.partition_attempts {
            let _ = writeln!(out, "partition.attempts={a}");
        }
        if let Some(part) = &self.partition {
            let sizes: Vec<String> = part.sizes[1..=CLASSES].iter().map(|s| s.to_string()).collect();
            let _ = writeln!(out, "partition.n0={}", part.n0());
            let _ = writeln!(out, "partition.u_size={}", part.u_size());
            let _ = writeln!(out, "partition.class_sizes={}", sizes.join(","));
        }
        if let Some(r) = &self.partition_report {
            out.push_str(&r.to_kv("partition"));
        }
        if let Some(a) = self.label_attempts {
            let _ = writeln!(out, "labels.attempts={a}");
        }
        if let Some(r) = &self.label_report {
            out.push_str(&r.to_kv("labels"));
        }
        if let Some(f) = &self.feasibility {
            out.push_str(&f.to_kv("residual"));
        }
        if let Some(k) = &self.kkp {
            out.push_str(&k.to_kv("kkp"));
        }
        if let Some(r) = &self.separation {
            out.push_str(&r.to_kv("separation"));
        }
        if let Some(v) = &self.verification {
            out.push_str(&v.to_kv("final"));
        }
        let _ = writeln!(out, "outcome={}", self.outcome.name());
        if let Outcome::Failed(f) = &self.outcome {
            let _ = writeln!(out, "failure.stage={}", f.stage.name());
            let _ = writeln!(out, "failure.witness={}", f.witness);
        }
        out
    }
}

/// Runs every stage on a regular graph. Parameter problems are errors;
/// stage failures are reported through [`PipelineRun::outcome`].
pub fn run_pipeline(g: &Graph, params: &PipelineParams, seed: u64) -> Result<PipelineRun> {
    params.validate()?;
    let n = g.order();
    let d = g
        .regular_degree()
        .ok_or_else(|| Error::Param("the input graph is not regular".into()))?;
    let budgets = compute_budgets(n, d, params.b, params.eps)?;
    let range = degree_range(n, d, params.b, params.eps)?;
    if params.mode == Mode::Strict {
        if !range.contains {
            return Err(Error::Param(format!(
                "strict mode needs d in [ln^(1+6b+12eps) n, n/ln^(2b+5eps) n] = [{}, {}], got d={d}",
                range.low, range.high
            )));
        }
        if budgets.big_n < 1 {
            return Err(Error::Param(format!(
                "strict mode needs N >= 1, got N={}",
                budgets.big_n
            )));
        }
    }
    let mut run = PipelineRun {
        n,
        d,
        params: *params,
        seed,
        budgets,
        range,
        partition: None,
        partition_attempts: None,
        labels: None,
        label_attempts: None,
        partition_report: None,
        label_report: None,
        feasibility: None,
        omega1: None,
        omega2: None,
        kkp: None,
        separation: None,
        omega3: None,
        verification: None,
        outcome: Outcome::Irregular,
        timings: Vec::new(),
    };
    match stages(g, &mut run) {
        Ok(()) => Ok(run),
        Err(Error::Stage(f)) => {
            if let Some(r) = &f.report {
                match f.stage {
                    Stage::Partition => run.partition_report = Some(r.clone()),
                    Stage::Labels => run.label_report = Some(r.clone()),
                    _ => {}
                }
            }
            run.outcome = Outcome::Failed(*f);
            Ok(run)
        }
        Err(e) => Err(e),
    }
}

fn timed<T>(run: &mut PipelineRun, stage: Stage, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    run.timings.push((stage, t.elapsed()));
    out
}

fn stages(g: &Graph, run: &mut PipelineRun) -> Result<()> {
    let p = run.params;
    let seed = run.seed;
    let found = timed(run, Stage::Partition, || find_partition(g, &p, seed))?;
    run.partition_attempts = Some(found.attempts);
    run.partition_report = Some(found.report);
    let part = found.value;
    run.partition = Some(part.clone());

    let found = timed(run, Stage::Labels, || find_x(g, &part, &p, seed))?;
    run.label_attempts = Some(found.attempts);
    run.label_report = Some(found.report);
    let xa = found.value;
    run.labels = Some(xa.clone());

    let budgets = run.budgets.clone();
    let omega0 = timed(run, Stage::InitialWeights, || {
        initial_weighting(g, &part, &xa, &budgets)
    });
    let residual = timed(run, Stage::ResidualWeights, || {
        assign_omega_prime(g, omega0, &part, &xa, &budgets, p.mode)
    });
    let (omega1, feas) = match residual {
        Ok(x) => x,
        Err(e) => {
            let omega0 = initial_weighting(g, &part, &xa, &budgets);
            run.feasibility = Some(feasibility(&omega0, &part, &xa, &budgets));
            return Err(e);
        }
    };
    run.feasibility = Some(feas);
    run.omega1 = Some(omega1.clone());

    let (omega2, diag) = timed(run, Stage::UnionPass, || {
        run_kkp(g, &part, omega1.clone(), &budgets, p.mode)
    })?;
    run.kkp = Some(diag);

    let sep = timed(run, Stage::Separation, || {
        separation_checks(g, &part, &omega1, &omega2)
    });
    run.separation = Some(sep.clone());
    if p.mode == Mode::Strict && !sep.passed() {
        let v = sep.tightest().expect("a failed report has a violation");
        return Err(Error::Stage(Box::new(StageFailure {
            stage: Stage::Separation,
            witness: format!("{} {}: {}", v.condition.label(), v.subject, v.witness),
            report: Some(sep),
        })));
    }
    run.omega2 = Some(omega2.clone());

    let (omega3, ver) = timed(run, Stage::Finalize, || finalize_and_check(g, &omega2, &budgets))?;
    if !ver.irregular {
        run.outcome = Outcome::NotIrregular;
    }
    run.omega3 = Some(omega3);
    run.verification = Some(ver);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::random_regular;

    #[test]
    fn bounds_example() {
        let t = bounds_table(13, 3, 1.0, 0.0833).unwrap();
        assert!(t.contains("lower_bound=5\n"), "{t}");
        assert!(t.contains("range.status=INFEASIBLE"));
        let t = bounds_table(100, 40, 0.2, 0.05).unwrap();
        assert!(t.contains("budgets.error="), "{t}");
    }

    #[test]
    fn theorem_cap_value() {
        // (20000/1000)(1 + 8/ln^0.2(20000))
        let lnln = 20_000f64.ln().ln();
        let expect = 20.0 * (1.0 + 8.0 / (0.2 * lnln).exp());
        assert!((theorem_cap(20_000, 1000, 0.2).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn strict_refuses_out_of_range() {
        let g = random_regular(200, 10, 1).unwrap();
        let err = run_pipeline(&g, &PipelineParams::strict(1.0, 1.0 / 12.0), 1).unwrap_err();
        assert!(matches!(err, Error::Param(_)));
        assert!(err.to_string().contains("strict mode"), "{err}");
    }

    #[test]
    fn large_degree_is_a_parameter_error() {
        let g = random_regular(60, 30, 1).unwrap();
        let err = run_pipeline(&g, &PipelineParams::empirical(0.2, 0.05, 1.0), 1).unwrap_err();
        assert!(err.to_string().contains("KKP"), "{err}");
    }

    #[test]
    fn failures_are_reported_with_stage() {
        let g = random_regular(400, 20, 2).unwrap();
        let p = PipelineParams::empirical(0.2, 0.05, 1.0).with_retries(2);
        let run = run_pipeline(&g, &p, 5).unwrap();
        let f = run.failure().expect("tight windows at n=400 fail");
        let report = run.report();
        assert!(report.contains(&format!("failure.stage={}", f.stage.name())));
        assert!(report.contains("outcome=stage-failure"));
        assert_eq!(report, run_pipeline(&g, &p, 5).unwrap().report());
    }
}
