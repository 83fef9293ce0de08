//! Ground truth: weighted degrees, global irregularity, the final shift, lower
//! bounds and an exact solver for small graphs.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::labeling::Budgets;
use crate::weights::{self, WeightStage, WeightingState};

/// `σ(v)` for every vertex; `w` must hold one weight per edge.
pub fn weighted_degrees(g: &Graph, w: &[i64]) -> Result<Vec<i64>> {
    if w.len() != g.size() {
        return Err(Error::Input(format!(
            "missing edge weights: {} weights for {} edges",
            w.len(),
            g.size()
        )));
    }
    Ok(weights::weighted_degrees(g, w))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationResult {
    pub irregular: bool,
    /// Lexicographically smallest pair `u < v` with `σ(u) = σ(v)`.
    pub witness: Option<(Vertex, Vertex)>,
    pub witness_sigma: Option<i64>,
    pub min_label: Option<i64>,
    pub max_label: Option<i64>,
    pub cap: Option<i64>,
    /// `max_label <= cap`, when a cap is known.
    pub bound_ok: Option<bool>,
    pub distinct_sigma: usize,
    pub sigma_min: Option<i64>,
    pub sigma_max: Option<i64>,
}

impl VerificationResult {
    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{prefix}.irregular={}", self.irregular);
        if let (Some((u, v)), Some(s)) = (self.witness, self.witness_sigma) {
            let _ = writeln!(out, "{prefix}.witness={u},{v}");
            let _ = writeln!(out, "{prefix}.witness_sigma={s}");
        }
        let opt = |x: Option<i64>| x.map_or("none".to_string(), |v| v.to_string());
        let _ = writeln!(out, "{prefix}.min_label={}", opt(self.min_label));
        let _ = writeln!(out, "{prefix}.max_label={}", opt(self.max_label));
        if let Some(cap) = self.cap {
            let _ = writeln!(out, "{prefix}.label_cap={cap}");
        }
        if let Some(ok) = self.bound_ok {
            let _ = writeln!(out, "{prefix}.bound_ok={ok}");
        }
        let _ = writeln!(out, "{prefix}.distinct_sigma={}", self.distinct_sigma);
        let _ = writeln!(out, "{prefix}.sigma_min={}", opt(self.sigma_min));
        let _ = writeln!(out, "{prefix}.sigma_max={}", opt(self.sigma_max));
        out
    }
}

/// Checks that all weighted degrees are pairwise distinct over the whole
/// vertex set.
pub fn is_irregular(g: &Graph, w: &[i64]) -> Result<VerificationResult> {
    let sigma = weighted_degrees(g, w)?;
    let mut by_value: Vec<(i64, Vertex)> = sigma
        .iter()
        .enumerate()
        .map(|(v, &s)| (s, v as Vertex))
        .collect();
    by_value.sort_unstable();
    let mut witness: Option<(Vertex, Vertex)> = None;
    let mut distinct = 0;
    for (i, &(s, v)) in by_value.iter().enumerate() {
        if i == 0 || by_value[i - 1].0 != s {
            distinct += 1;
            if let Some(&(s2, v2)) = by_value.get(i + 1) {
                if s2 == s && witness.is_none_or(|x| (v, v2) < x) {
                    witness = Some((v, v2));
                }
            }
        }
    }
    Ok(VerificationResult {
        irregular: witness.is_none(),
        witness_sigma: witness.map(|(u, _)| sigma[u as usize]),
        witness,
        min_label: w.iter().min().copied(),
        max_label: w.iter().max().copied(),
        cap: None,
        bound_ok: None,
        distinct_sigma: distinct,
        sigma_min: sigma.iter().min().copied(),
        sigma_max: sigma.iter().max().copied(),
    })
}

/// `ω3 = ω2 + 1` on every edge, then verification against the label cap.
pub fn finalize_and_check(
    g: &Graph,
    state: &WeightingState,
    budgets: &Budgets,
) -> Result<(WeightingState, VerificationResult)> {
    if state.stage() != WeightStage::Omega2 {
        return Err(Error::Internal(format!(
            "finalize needs stage omega2, found {}",
            state.stage()
        )));
    }
    if let Some(e) = (0..g.size()).find(|&e| state.weight(e as EdgeId) < 0) {
        let (u, v) = g.edge(e as EdgeId);
        return Err(Error::Internal(format!(
            "negative weight {} on edge ({u}, {v}) before the final shift",
            state.weight(e as EdgeId)
        )));
    }
    let shifted: Vec<i64> = state.weights().iter().map(|w| w + 1).collect();
    let out = WeightingState::from_weights(g, WeightStage::Omega3, shifted)?;
    let mut result = is_irregular(g, out.weights())?;
    let cap = budgets.label_cap();
    result.cap = Some(cap);
    result.bound_ok = Some(result.max_label.is_none_or(|m| m <= cap));
    Ok((out, result))
}

/// `⌈(n + d - 1)/d⌉`.
pub fn regular_lower_bound(n: u64, d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::Param("regular lower bound needs d >= 1".into()));
    }
    Ok((n + d - 1).div_ceil(d))
}

/// `max_j ⌈(n_j + δ - 1)/j⌉` over `δ <= j <= Δ`, where `n_j` counts vertices
/// of degree in `[δ, j]` and `δ` is the least positive degree. Equals the
/// regular bound on regular graphs.
pub fn lower_bound(g: &Graph) -> u64 {
    let degrees: Vec<usize> = (0..g.order() as Vertex)
        .map(|v| g.degree(v))
        .filter(|&d| d > 0)
        .collect();
    let Some(&delta) = degrees.iter().min() else {
        return 1;
    };
    let max = *degrees.iter().max().unwrap();
    let mut hist = vec![0u64; max + 1];
    for &d in &degrees {
        hist[d] += 1;
    }
    let mut best = 1;
    let mut count = 0;
    for j in delta..=max {
        count += hist[j];
        best = best.max((count + delta as u64 - 1).div_ceil(j as u64));
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strength {
    /// `s(G) = k`, with a witness indexed by edge id.
    Exact { k: u64, weights: Vec<i64> },
    /// No weighting with labels up to `k_max` exists.
    Above { k_max: u64 },
}

/// Backtracking solver for `s(G)`.
#[derive(Clone, Copy, Debug)]
pub struct ExactSolver {
    pub max_edges: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        ExactSolver { max_edges: 20 }
    }
}

/// [`ExactSolver::solve`] with the default edge guard.
pub fn exact_strength(g: &Graph, k_max: u64) -> Result<Strength> {
    ExactSolver::default().solve(g, k_max)
}

impl ExactSolver {
    pub fn solve(&self, g: &Graph, k_max: u64) -> Result<Strength> {
        let isolated = (0..g.order() as Vertex).filter(|&v| g.degree(v) == 0).count();
        if isolated >= 2 {
            return Err(Error::Domain(format!(
                "s(G) is undefined: {isolated} isolated vertices"
            )));
        }
        if let Some(&(u, v)) = g
            .edges()
            .iter()
            .find(|&&(u, v)| g.degree(u) == 1 && g.degree(v) == 1)
        {
            return Err(Error::Domain(format!(
                "s(G) is undefined: isolated edge ({u}, {v})"
            )));
        }
        if g.size() > self.max_edges {
            return Err(Error::Param(format!(
                "exact solver is limited to {} edges, graph has {}",
                self.max_edges,
                g.size()
            )));
        }
        let mut order: Vec<EdgeId> = (0..g.size() as EdgeId).collect();
        order.sort_by_key(|&e| {
            let (u, v) = g.edge(e);
            (g.degree(u).min(g.degree(v)), e)
        });
        for k in lower_bound(g)..=k_max {
            let mut search = Search::new(g, &order, k as i64);
            if search.run(0) {
                return Ok(Strength::Exact {
                    k,
                    weights: search.weights,
                });
            }
        }
        Ok(Strength::Above { k_max })
    }
}

struct Search<'a> {
    g: &'a Graph,
    order: &'a [EdgeId],
    k: i64,
    weights: Vec<i64>,
    sigma: Vec<i64>,
    remaining: Vec<usize>,
    /// Weighted degrees already held by fully assigned vertices.
    taken: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph, order: &'a [EdgeId], k: i64) -> Self {
        let max_degree = (0..g.order() as Vertex).map(|v| g.degree(v)).max().unwrap_or(0);
        let mut s = Search {
            g,
            order,
            k,
            weights: vec![0; g.size()],
            sigma: vec![0; g.order()],
            remaining: (0..g.order() as Vertex).map(|v| g.degree(v)).collect(),
            taken: vec![false; max_degree * k as usize + 1],
        };
        // an isolated vertex is complete from the start with σ = 0
        for v in 0..g.order() {
            if s.remaining[v] == 0 {
                s.taken[0] = true;
            }
        }
        s
    }

    fn run(&mut self, i: usize) -> bool {
        let Some(&e) = self.order.get(i) else {
            return true;
        };
        let (u, v) = self.g.edge(e);
        for w in 1..=self.k {
            self.weights[e as usize] = w;
            self.sigma[u as usize] += w;
            self.sigma[v as usize] += w;
            self.remaining[u as usize] -= 1;
            self.remaining[v as usize] -= 1;
            let mut claimed = Vec::with_capacity(2);
            let mut ok = true;
            for x in [u, v] {
                if self.remaining[x as usize] == 0 {
                    let s = self.sigma[x as usize] as usize;
                    if self.taken[s] {
                        ok = false;
                        break;
                    }
                    self.taken[s] = true;
                    claimed.push(s);
                }
            }
            if ok && self.run(i + 1) {
                return true;
            }
            for s in claimed {
                self.taken[s] = false;
            }
            self.sigma[u as usize] -= w;
            self.sigma[v as usize] -= w;
            self.remaining[u as usize] += 1;
            self.remaining[v as usize] += 1;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    /// Weights listed around the cycle 0-1, 1-2, ..., (n-1)-0, mapped to edge ids.
    fn around(g: &Graph, w: &[i64]) -> Vec<i64> {
        let n = g.order();
        let mut out = vec![0; g.size()];
        for (i, &x) in w.iter().enumerate() {
            out[g.edge_id(i as Vertex, ((i + 1) % n) as Vertex).unwrap() as usize] = x;
        }
        out
    }

    #[test]
    fn weighted_degree_examples() {
        let k3 = cycle(3);
        // ab, bc, ca = 1, 2, 3
        let w = around(&k3, &[1, 2, 3]);
        assert_eq!(weighted_degrees(&k3, &w).unwrap(), vec![4, 3, 5]);
        let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(weighted_degrees(&p3, &[1, 2]).unwrap(), vec![1, 3, 2]);
        assert!(weighted_degrees(&p3, &[1]).unwrap_err().to_string().contains("missing"));
    }

    #[test]
    fn irregularity_examples() {
        let k3 = cycle(3);
        let r = is_irregular(&k3, &[1, 1, 1]).unwrap();
        assert!(!r.irregular);
        assert_eq!(r.witness, Some((0, 1)));
        assert_eq!(r.witness_sigma, Some(2));
        let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(is_irregular(&p3, &[1, 2]).unwrap().irregular);
        let c5 = cycle(5);
        let w = around(&c5, &[1, 1, 2, 3, 3]);
        let r = is_irregular(&c5, &w).unwrap();
        assert!(r.irregular);
        let mut s = weighted_degrees(&c5, &w).unwrap();
        assert_eq!(s, vec![4, 2, 3, 5, 6]);
        s.sort_unstable();
        assert_eq!(s, vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn witness_is_lexicographically_smallest() {
        // σ = [2, 5, 5, 2]
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = is_irregular(&g, &[2, 3, 2]).unwrap();
        assert_eq!(r.witness, Some((0, 3)));
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(regular_lower_bound(13, 3).unwrap(), 5);
        assert_eq!(regular_lower_bound(4, 3).unwrap(), 2);
        assert_eq!(regular_lower_bound(5, 2).unwrap(), 3);
        assert!(regular_lower_bound(5, 0).is_err());
        assert_eq!(lower_bound(&cycle(5)), 3);
        let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(lower_bound(&p3), 2);
    }

    #[test]
    fn exact_small() {
        let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            exact_strength(&p3, 5).unwrap(),
            Strength::Exact { k: 2, weights: vec![1, 2] }
        );
        for (n, s) in [(3, 3), (4, 3), (5, 3), (6, 4), (7, 5), (8, 5), (9, 5)] {
            let g = cycle(n);
            match exact_strength(&g, 10).unwrap() {
                Strength::Exact { k, weights } => {
                    assert_eq!(k, s, "C{n}");
                    assert!(is_irregular(&g, &weights).unwrap().irregular);
                    assert!(weights.iter().all(|&w| (1..=k as i64).contains(&w)));
                }
                other => panic!("C{n}: {other:?}"),
            }
        }
        assert_eq!(exact_strength(&cycle(7), 4).unwrap(), Strength::Above { k_max: 4 });
    }

    #[test]
    fn exact_domain_errors() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(matches!(exact_strength(&g, 5), Err(Error::Domain(_))));
        let g = Graph::from_edges(5, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(exact_strength(&g, 5), Err(Error::Domain(_))));
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(exact_strength(&g, 5), Ok(Strength::Exact { k: 2, .. })));
        let big = cycle(21);
        assert!(matches!(exact_strength(&big, 5), Err(Error::Param(_))));
    }

    #[test]
    fn finalize_shifts_and_caps() {
        let g = cycle(4);
        let st = WeightingState::from_weights(&g, WeightStage::Omega2, vec![0; 4]).unwrap();
        let budgets = crate::labeling::compute_budgets(20_000, 1000, 0.2, 0.05).unwrap();
        assert_eq!(budgets.label_cap(), 124);
        let (out, r) = finalize_and_check(&g, &st, &budgets).unwrap();
        assert_eq!(out.weights(), &[1, 1, 1, 1]);
        assert_eq!(out.stage(), WeightStage::Omega3);
        assert_eq!(r.min_label, Some(1));
        assert_eq!(r.bound_ok, Some(true));
        assert!(!r.irregular);
        let st = WeightingState::from_weights(&g, WeightStage::Omega2, vec![0, 124, 0, 0]).unwrap();
        assert_eq!(finalize_and_check(&g, &st, &budgets).unwrap().1.bound_ok, Some(false));
        let st = WeightingState::from_weights(&g, WeightStage::Omega2, vec![0, -1, 0, 0]).unwrap();
        assert!(matches!(finalize_and_check(&g, &st, &budgets), Err(Error::Internal(_))));
    }
}
