//! Real labels on `V0`, the initial weighting, and the residual weights on
//! `E[V0, U]` that turn the weighted degrees on `V0` into the consecutive run
//! `B0+1, …, B0+n0`.

use rand::Rng as _;

use crate::error::{Error, Result, Stage};
use crate::graph::{Graph, Vertex};
use crate::params::{LogPowers, Mode, PipelineParams};
use crate::partition::{exhausted, Found, VertexPartition};
use crate::report::{Condition, ConditionReport};
use crate::seed::{self, Stream};
use crate::weights::{WeightStage, WeightingState};

/// Labels `x_v` on `V0` and the quantities derived from them.
#[derive(Clone, Debug)]
pub struct XAssignment {
    /// `x[v]` for `v` in `V0`, NaN on `U`.
    pub x: Vec<f64>,
    /// `V0` sorted by `(x, id)`: `order[j-1] = v_j`.
    pub order: Vec<Vertex>,
    /// `|L_v| = #{u in V0 : x_u < x_v}`; zero on `U`.
    pub rank: Vec<u32>,
    /// `|R_v| = #{u in N_G0(v) : x_u >= 1 - x_v}`; zero on `U`.
    pub right: Vec<u32>,
    /// Number of adjacent equal pairs in the sorted order.
    pub ties: usize,
}

impl PartialEq for XAssignment {
    fn eq(&self, other: &Self) -> bool {
        self.x.len() == other.x.len()
            && self.x.iter().zip(&other.x).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.order == other.order
            && self.rank == other.rank
            && self.right == other.right
            && self.ties == other.ties
    }
}

impl XAssignment {
    /// Derives order, ranks and right-sets from explicit labels.
    pub fn from_labels(g: &Graph, part: &VertexPartition, x: Vec<f64>) -> Self {
        let mut order = part.v0();
        order.sort_by(|&a, &b| x[a as usize].total_cmp(&x[b as usize]).then(a.cmp(&b)));
        let mut rank = vec![0u32; g.order()];
        let mut ties = 0;
        let mut first_equal = 0usize;
        for (j, &v) in order.iter().enumerate() {
            if j > 0 && x[order[j - 1] as usize] == x[v as usize] {
                ties += 1;
            } else {
                first_equal = j;
            }
            rank[v as usize] = first_equal as u32;
        }
        let mut right = vec![0u32; g.order()];
        for &v in &order {
            let xv = x[v as usize];
            right[v as usize] = g
                .neighbors(v)
                .iter()
                .filter(|&&u| !part.in_u(u) && x[u as usize] >= 1.0 - xv)
                .count() as u32;
        }
        XAssignment {
            x,
            order,
            rank,
            right,
            ties,
        }
    }

    /// `u ∈ R_v`.
    pub fn in_right(&self, g: &Graph, part: &VertexPartition, v: Vertex, u: Vertex) -> bool {
        !part.in_u(u)
            && !part.in_u(v)
            && g.has_edge(u, v)
            && self.x[u as usize] >= 1.0 - self.x[v as usize]
    }
}

/// Independent uniform labels on `V0`, drawn in ascending vertex order.
pub fn sample_x(g: &Graph, part: &VertexPartition, seed: u64) -> XAssignment {
    let mut rng = seed::rng(seed);
    let x = (0..g.order() as Vertex)
        .map(|v| if part.in_u(v) { f64::NAN } else { rng.gen::<f64>() })
        .collect();
    XAssignment::from_labels(g, part, x)
}

/// Rank and right-set conditions for every `v` in `V0`, split at the label
/// threshold `1/ln^{2b+3eps} n`, plus label distinctness.
pub fn check_x_conditions(
    g: &Graph,
    part: &VertexPartition,
    xa: &XAssignment,
    p: &PipelineParams,
) -> Result<ConditionReport> {
    let lp = LogPowers::new(g.order())?;
    let (b, e, s) = (p.b, p.eps, p.slack);
    let threshold = 1.0 / lp.pow(2.0 * b + 3.0 * e);
    let rel = 1.0 / lp.pow(2.0 * b + 4.0 * e);
    let low_cap = 1.0 / lp.pow(2.0 * b + 3.0 * e) + 1.0 / lp.pow(4.0 * b + 7.0 * e);
    let n0m1 = xa.order.len().saturating_sub(1) as f64;

    let mut report = ConditionReport::new(s);
    for c in [
        Condition::RankHigh,
        Condition::RankLow,
        Condition::RightHigh,
        Condition::RightLow,
    ] {
        report.declare(c);
    }
    report.check(
        Condition::DistinctLabels,
        xa.ties as f64,
        0.0,
        || "V0".into(),
        || format!("{} tied label pairs", xa.ties),
    );
    for &v in &xa.order {
        let x = xa.x[v as usize];
        let l = xa.rank[v as usize] as f64;
        let r = xa.right[v as usize] as f64;
        let d0 = part.d0(v) as f64;
        if x >= threshold {
            let (center, window) = (x * n0m1, s * x * n0m1 * rel);
            report.check(
                Condition::RankHigh,
                (l - center).abs(),
                window,
                || format!("v={v}"),
                || format!("x={x:.6}: ||L_v| - x(n0-1)| = |{l} - {center:.4}| > {window:.4}"),
            );
            let (center, window) = (x * d0, s * x * d0 * rel);
            report.check(
                Condition::RightHigh,
                (r - center).abs(),
                window,
                || format!("v={v}"),
                || format!("x={x:.6}: ||R_v| - x d0(v)| = |{r} - {center:.4}| > {window:.4}"),
            );
        } else {
            let cap = s * n0m1 * low_cap;
            report.check(
                Condition::RankLow,
                l,
                cap,
                || format!("v={v}"),
                || format!("x={x:.6} below threshold {threshold:.6}: |L_v| = {l} > {cap:.4}"),
            );
            let cap = s * d0 * low_cap;
            report.check(
                Condition::RightLow,
                r,
                cap,
                || format!("v={v}"),
                || format!("x={x:.6} below threshold {threshold:.6}: |R_v| = {r} > {cap:.4}"),
            );
        }
    }
    Ok(report)
}

/// Resamples labels until [`check_x_conditions`] passes.
pub fn find_x(
    g: &Graph,
    part: &VertexPartition,
    p: &PipelineParams,
    seed: u64,
) -> Result<Found<XAssignment>> {
    p.validate()?;
    let mut last = None;
    for attempt in 0..p.max_retries {
        let xa = sample_x(g, part, seed::derive(seed, Stream::Labels, attempt as u64));
        let report = check_x_conditions(g, part, &xa, p)?;
        if report.passed() {
            return Ok(Found {
                value: xa,
                attempts: attempt + 1,
                report,
            });
        }
        last = Some(report);
    }
    Err(exhausted(Stage::Labels, p.max_retries, last))
}

/// Integer quantities that drive the weight windows.
#[derive(Clone, Debug, PartialEq)]
pub struct Budgets {
    pub n: usize,
    pub d: usize,
    /// `⌈n/d⌉`.
    pub base: i64,
    /// `⌈n/(d ln^b n)⌉`.
    pub class_step: i64,
    /// `⌈n/(d ln^{b+eps} n)⌉`.
    pub fine_cap: i64,
    /// `⌊n/(3d)⌋`.
    pub kkp_step: i64,
    pub b0: i64,
    /// May be below 1 for small `n`; the pipeline rejects that.
    pub big_n: i64,
    /// Ceilings whose argument sat within 1e-9 of an integer.
    pub flags: Vec<String>,
}

const NEAR_INTEGER: f64 = 1e-9;

fn ceil_guarded(x: f64, name: &str, flags: &mut Vec<String>) -> i64 {
    let r = x.round();
    if (x - r).abs() < NEAR_INTEGER {
        flags.push(format!(
            "{name}: argument {x} is within 1e-9 of an integer; candidates {} and {}, used {}",
            r,
            r + 1.0,
            x.ceil()
        ));
    }
    x.ceil() as i64
}

pub fn compute_budgets(n: usize, d: usize, b: f64, eps: f64) -> Result<Budgets> {
    if d == 0 || d >= n {
        return Err(Error::Param(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    let lp = LogPowers::new(n)?;
    let nf = n as f64;
    let df = d as f64;
    let mut flags = Vec::new();
    let base = n.div_ceil(d) as i64;
    let kkp_step = (n / (3 * d)) as i64;
    if kkp_step == 0 {
        return Err(Error::Param(format!(
            "d too large for the KKP stage: floor(n/3d) = floor({n}/{}) = 0",
            3 * d
        )));
    }
    let class_step = ceil_guarded(nf / (df * lp.pow(b)), "class_step", &mut flags);
    let fine_cap = ceil_guarded(nf / (df * lp.pow(b + eps)), "fine_cap", &mut flags);
    let mut c = |k: f64, name: &str| ceil_guarded(nf / lp.pow(k), name, &mut flags);
    let b0 = c(b + eps, "B0 term 1") + 4 * c(2.0 * b + eps, "B0 term 2") + 2 * c(2.0 * b + 3.0 * eps, "B0 term 3");
    let big_n = c(2.0 * b + 2.0 * eps, "N term 1") - 2 * c(3.0 * b + 5.0 * eps, "N term 2");
    Ok(Budgets {
        n,
        d,
        base,
        class_step,
        fine_cap,
        kkp_step,
        b0,
        big_n,
        flags,
    })
}

impl Budgets {
    /// `base + 7*class_step + fine_cap + 1`, the largest label the
    /// construction can produce.
    pub fn label_cap(&self) -> i64 {
        self.base + 7 * self.class_step + self.fine_cap + 1
    }
}

/// `ω0`: `base` on `G0` edges with `x_u + x_v >= 1` (else 0),
/// `base + i*class_step` on edges from `V0` to `U_i`, 0 inside `U`.
pub fn initial_weighting(
    g: &Graph,
    part: &VertexPartition,
    xa: &XAssignment,
    budgets: &Budgets,
) -> WeightingState {
    let weights = g
        .edges()
        .iter()
        .map(|&(u, v)| match (part.class(u), part.class(v)) {
            (0, 0) => {
                if xa.x[u as usize] + xa.x[v as usize] >= 1.0 {
                    budgets.base
                } else {
                    0
                }
            }
            (0, i) | (i, 0) => budgets.base + i as i64 * budgets.class_step,
            _ => 0,
        })
        .collect();
    WeightingState::from_weights(g, WeightStage::Omega0, weights)
        .expect("one weight per edge")
}

/// Per-vertex targets and capacities of the residual step.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    /// `Δ_j = B0 + j - σ_ω0(v_j)`, indexed by `j-1`.
    pub deltas: Vec<i64>,
    /// `d_U(v_j) * fine_cap`.
    pub capacities: Vec<i64>,
    /// 1-based positions with `Δ_j < 0` or `Δ_j > capacity`.
    pub infeasible: Vec<usize>,
    /// Positions with `Δ_j` outside `[1, N]`.
    pub outside_sandwich: usize,
    pub big_n: i64,
    /// `(max σ on V0, min σ on U)` after the residual weights, when computed.
    pub separation: Option<(i64, i64)>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.infeasible.is_empty()
    }

    pub fn separated(&self) -> Option<bool> {
        self.separation.map(|(hi, lo)| hi < lo)
    }

    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = String::new();
        let min = self.deltas.iter().min().copied().unwrap_or(0);
        let max = self.deltas.iter().max().copied().unwrap_or(0);
        out.push_str(&format!("{prefix}.vertices={}\n", self.deltas.len()));
        out.push_str(&format!("{prefix}.delta_min={min}\n{prefix}.delta_max={max}\n"));
        out.push_str(&format!("{prefix}.infeasible={}\n", self.infeasible.len()));
        out.push_str(&format!("{prefix}.N={}\n", self.big_n));
        out.push_str(&format!("{prefix}.outside_1_to_N={}\n", self.outside_sandwich));
        if let Some(&j) = self.infeasible.first() {
            out.push_str(&format!(
                "{prefix}.first_infeasible=j={j} delta={} capacity={}\n",
                self.deltas[j - 1],
                self.capacities[j - 1]
            ));
        }
        if let Some((hi, lo)) = self.separation {
            out.push_str(&format!("{prefix}.max_sigma_v0={hi}\n{prefix}.min_sigma_u={lo}\n"));
            out.push_str(&format!("{prefix}.v0_below_u={}\n", hi < lo));
        }
        out
    }
}

/// Computes `Δ_j` and the capacities for a state at `ω0`.
pub fn feasibility(
    state: &WeightingState,
    part: &VertexPartition,
    xa: &XAssignment,
    budgets: &Budgets,
) -> FeasibilityReport {
    let mut deltas = Vec::with_capacity(xa.order.len());
    let mut capacities = Vec::with_capacity(xa.order.len());
    let mut infeasible = Vec::new();
    let mut outside = 0;
    for (idx, &v) in xa.order.iter().enumerate() {
        let j = idx + 1;
        let delta = budgets.b0 + j as i64 - state.sigma(v);
        let cap = part.d_u(v) as i64 * budgets.fine_cap;
        if delta < 0 || delta > cap {
            infeasible.push(j);
        }
        if delta < 1 || delta > budgets.big_n {
            outside += 1;
        }
        deltas.push(delta);
        capacities.push(cap);
    }
    FeasibilityReport {
        deltas,
        capacities,
        infeasible,
        outside_sandwich: outside,
        big_n: budgets.big_n,
        separation: None,
    }
}

/// `ω1 = ω0 + ω'`: each `v_j` spreads `Δ_j` over its edges to `U` in
/// ascending neighbour order, filling each edge up to `fine_cap`.
///
/// Fails when some `Δ_j` leaves `[0, d_U(v_j) * fine_cap]`. In strict mode it
/// also fails when some weighted degree in `V0` is not below every weighted
/// degree in `U`; empirical mode records that in the report instead.
pub fn assign_omega_prime(
    g: &Graph,
    mut state: WeightingState,
    part: &VertexPartition,
    xa: &XAssignment,
    budgets: &Budgets,
    mode: Mode,
) -> Result<(WeightingState, FeasibilityReport)> {
    if state.stage() != WeightStage::Omega0 {
        return Err(Error::Internal(format!(
            "residual weights need stage omega0, found {}",
            state.stage()
        )));
    }
    let mut report = feasibility(&state, part, xa, budgets);
    if let Some(&j) = report.infeasible.first() {
        let v = xa.order[j - 1];
        return Err(Error::stage(
            Stage::ResidualWeights,
            format!(
                "Δ_j infeasible at j={j} (v={v}): Δ_j = {} outside [0, {}] = [0, d_U(v)*fine_cap]; {} of {} positions infeasible",
                report.deltas[j - 1],
                report.capacities[j - 1],
                report.infeasible.len(),
                report.deltas.len()
            ),
        ));
    }
    for (idx, &v) in xa.order.iter().enumerate() {
        let mut remaining = report.deltas[idx];
        for (u, e) in g.incident(v) {
            if remaining == 0 {
                break;
            }
            if !part.in_u(u) {
                continue;
            }
            let add = remaining.min(budgets.fine_cap);
            state.add(g, e, add);
            remaining -= add;
        }
        debug_assert_eq!(remaining, 0);
    }
    state.advance(WeightStage::Omega1)?;

    let max_v0 = xa.order.iter().map(|&v| state.sigma(v)).max();
    let min_u = (0..g.order() as Vertex)
        .filter(|&v| part.in_u(v))
        .map(|v| state.sigma(v))
        .min();
    if let (Some(hi), Some(lo)) = (max_v0, min_u) {
        report.separation = Some((hi, lo));
        if hi >= lo && mode == Mode::Strict {
            return Err(Error::stage(
                Stage::ResidualWeights,
                format!("(V0 below U) fails after residual weights: max σ on V0 = {hi} >= min σ on U = {lo}"),
            ));
        }
    }
    Ok((state, report))
}
