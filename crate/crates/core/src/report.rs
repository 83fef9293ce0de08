//! Condition reports: which inequalities were checked, which failed, and the
//! numbers behind each failure.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// `||U_i| - n/(7 ln^{b+e} n)| <= n/(7 ln^{2b+4e} n)`.
    PartSize,
    /// `|d_{U_i}(v) - d/(7 ln^{b+e} n)| <= d/(7 ln^{2b+4e} n)`.
    NeighbourShare,
    /// Rank window for labels at or above the threshold.
    RankHigh,
    /// Rank cap for labels below the threshold.
    RankLow,
    /// `|R_v|` window for labels at or above the threshold.
    RightHigh,
    /// `|R_v|` cap for labels below the threshold.
    RightLow,
    /// All labels pairwise distinct.
    DistinctLabels,
    /// Every weighted degree in `V0` below every weighted degree in `U`.
    SeparationV0U,
    /// `max sigma(U_i) < min sigma(U_{i+1})`.
    SeparationClasses,
    /// Weighted degrees in `V0` untouched by the union pass.
    V0Fixed,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::PartSize => "cond1",
            Condition::NeighbourShare => "cond2",
            Condition::RankHigh => "cond3",
            Condition::RankLow => "cond4",
            Condition::RightHigh => "cond5",
            Condition::RightLow => "cond6",
            Condition::DistinctLabels => "distinct",
            Condition::SeparationV0U => "sep_v0_u",
            Condition::SeparationClasses => "sep_classes",
            Condition::V0Fixed => "v0_fixed",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Condition::PartSize => "(1°)",
            Condition::NeighbourShare => "(2°)",
            Condition::RankHigh => "(3°)",
            Condition::RankLow => "(4°)",
            Condition::RightHigh => "(5°)",
            Condition::RightLow => "(6°)",
            Condition::DistinctLabels => "(distinct labels)",
            Condition::SeparationV0U => "(V0 below U)",
            Condition::SeparationClasses => "(U_i below U_i+1)",
            Condition::V0Fixed => "(V0 unchanged)",
        }
    }
}

/// One failed inequality, instantiated with numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    /// What the inequality was evaluated for, e.g. `i=3` or `v=17 i=2`.
    pub subject: String,
    /// Left-hand side (a deviation for two-sided windows).
    pub measured: f64,
    /// Allowed right-hand side, slack included.
    pub bound: f64,
    pub witness: String,
}

impl Violation {
    /// `measured / bound`; infinite when the bound is zero.
    pub fn excess_ratio(&self) -> f64 {
        if self.bound > 0.0 {
            self.measured / self.bound
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSummary {
    pub condition: Condition,
    pub evaluated: usize,
    pub violations: usize,
    pub worst: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub slack: f64,
    pub checks: Vec<CheckSummary>,
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    pub fn new(slack: f64) -> Self {
        ConditionReport {
            slack,
            checks: Vec::new(),
            violations: Vec::new(),
        }
    }

    fn summary_mut(&mut self, condition: Condition) -> &mut CheckSummary {
        let pos = match self.checks.iter().position(|c| c.condition == condition) {
            Some(p) => p,
            None => {
                self.checks.push(CheckSummary {
                    condition,
                    evaluated: 0,
                    violations: 0,
                    worst: None,
                });
                self.checks.len() - 1
            }
        };
        &mut self.checks[pos]
    }

    /// Registers a condition with zero evaluations so it shows up in output.
    pub fn declare(&mut self, condition: Condition) {
        self.summary_mut(condition);
    }

    /// Records one evaluation of `measured <= bound`.
    pub fn check(
        &mut self,
        condition: Condition,
        measured: f64,
        bound: f64,
        subject: impl FnOnce() -> String,
        witness: impl FnOnce() -> String,
    ) -> bool {
        let ok = measured <= bound;
        let summary = self.summary_mut(condition);
        summary.evaluated += 1;
        if ok {
            return true;
        }
        let v = Violation {
            condition,
            subject: subject(),
            measured,
            bound,
            witness: witness(),
        };
        summary.violations += 1;
        if summary
            .worst
            .as_ref()
            .is_none_or(|w| v.excess_ratio() > w.excess_ratio())
        {
            summary.worst = Some(v.clone());
        }
        self.violations.push(v);
        false
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self, condition: Condition) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn failed(&self, condition: Condition) -> bool {
        self.summary(condition).is_some_and(|c| c.violations > 0)
    }

    /// The violation with the largest `measured / bound`.
    pub fn tightest(&self) -> Option<&Violation> {
        self.checks
            .iter()
            .filter_map(|c| c.worst.as_ref())
            .max_by(|a, b| a.excess_ratio().total_cmp(&b.excess_ratio()))
    }

    pub fn merge(&mut self, other: ConditionReport) {
        for c in other.checks {
            let s = self.summary_mut(c.condition);
            s.evaluated += c.evaluated;
            s.violations += c.violations;
            if let Some(w) = c.worst {
                if s
                    .worst
                    .as_ref()
                    .is_none_or(|x| w.excess_ratio() > x.excess_ratio())
                {
                    s.worst = Some(w);
                }
            }
        }
        self.violations.extend(other.violations);
    }

    /// Flat `key=value` lines under `prefix`.
    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{prefix}.slack={}", self.slack);
        let _ = writeln!(out, "{prefix}.passed={}", self.passed());
        for c in &self.checks {
            let id = c.condition.id();
            let _ = writeln!(out, "{prefix}.{id}.evaluated={}", c.evaluated);
            let _ = writeln!(out, "{prefix}.{id}.violations={}", c.violations);
            if let Some(w) = &c.worst {
                let _ = writeln!(out, "{prefix}.{id}.worst.subject={}", w.subject);
                let _ = writeln!(out, "{prefix}.{id}.worst.measured={}", w.measured);
                let _ = writeln!(out, "{prefix}.{id}.worst.bound={}", w.bound);
                let _ = writeln!(out, "{prefix}.{id}.worst.witness={}", w.witness);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_worst_and_tightest() {
        let mut r = ConditionReport::new(1.0);
        assert!(r.check(Condition::PartSize, 1.0, 2.0, || "i=1".into(), String::new));
        assert!(!r.check(Condition::PartSize, 3.0, 2.0, || "i=2".into(), || "w2".into()));
        assert!(!r.check(Condition::PartSize, 5.0, 2.0, || "i=3".into(), || "w3".into()));
        assert!(!r.check(Condition::NeighbourShare, 2.1, 2.0, || "v=0".into(), || "x".into()));
        assert!(!r.passed());
        let s = r.summary(Condition::PartSize).unwrap();
        assert_eq!((s.evaluated, s.violations), (3, 2));
        assert_eq!(s.worst.as_ref().unwrap().subject, "i=3");
        assert_eq!(r.tightest().unwrap().subject, "i=3");
        let kv = r.to_kv("p");
        assert!(kv.contains("p.cond1.violations=2\n"));
        assert!(kv.contains("p.cond1.worst.witness=w3\n"));
    }

    #[test]
    fn equality_passes() {
        let mut r = ConditionReport::new(1.0);
        assert!(r.check(Condition::RankLow, 2.0, 2.0, String::new, String::new));
        assert!(r.passed());
    }
}
