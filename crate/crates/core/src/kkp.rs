//! Distinguishing the vertices of `U` by a vertex-by-vertex pass over the
//! components of `G[U]`.
//!
//! Every `U`-edge starts at `ω1 + m` with `m = ⌊n/3d⌋`. A processed vertex
//! `v` may add anything in `[0, m]` to its forward edges and `±m` (one sign
//! per edge, fixed by where the other endpoint sits in its pair) to its
//! backward edges, and then pins its weighted degree to a pair-set `Σ_v` from
//! the family `{2λm + a, (2λ+1)m + a}`. The last two vertices of each
//! component are handled separately.

use std::fmt::Write as _;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result, Stage};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::labeling::Budgets;
use crate::params::Mode;
use crate::partition::{VertexPartition, CLASSES};
use crate::report::{Condition, ConditionReport};
use crate::weights::{WeightStage, WeightingState};

/// Strict-mode option count required at the last-but-one vertex.
pub const LAST_BUT_ONE_OPTIONS: usize = 45;
/// Strict-mode option count required at the last vertex.
pub const LAST_OPTIONS: usize = 47;
/// Strict-mode cap on congruent sets in `S_t`.
pub const CONGRUENCE_CAP: usize = 20;

/// `{low, low + m}` with `⌊low/m⌋` even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PairSet {
    pub low: i64,
    pub m: i64,
}

impl PairSet {
    pub fn high(&self) -> i64 {
        self.low + self.m
    }

    pub fn contains(&self, value: i64) -> bool {
        value == self.low || value == self.high()
    }

    /// `a` in `low = 2λm + a`.
    pub fn offset(&self) -> i64 {
        self.low.rem_euclid(self.m)
    }

    /// `λ` in `low = 2λm + a`.
    pub fn lambda(&self) -> i64 {
        (self.low - self.offset()) / (2 * self.m)
    }
}

fn pair_low(value: i64, m: i64) -> i64 {
    if value.div_euclid(m) % 2 == 0 {
        value
    } else {
        value - m
    }
}

/// The member of the family containing `value`.
pub fn pair_of(value: i64, m: i64) -> Result<PairSet> {
    if m <= 0 {
        return Err(Error::Param(format!("pair step must be positive, got {m}")));
    }
    Ok(PairSet {
        low: pair_low(value, m),
        m,
    })
}

/// Number of sets in `sets` whose elements are congruent to `value` mod `m`.
pub fn congruent_sets(sets: &[PairSet], value: i64) -> usize {
    sets.iter()
        .filter(|s| s.offset() == value.rem_euclid(s.m))
        .count()
}

/// What happened at the last two vertices of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct EndgameRecord {
    pub last_but_one: Vertex,
    pub last: Vertex,
    /// Final `ω''` on the edge between them.
    pub q: i64,
    /// Sets in `S_t` congruent to each vertex's weighted degree.
    pub congruent: (usize, usize),
    pub s_t: usize,
    /// Progression lengths available to each vertex.
    pub options: (usize, usize),
    pub sigma: (i64, i64),
    /// An extremal progression value or a non-optimal `q` was needed.
    pub relaxed: bool,
    pub thresholds_met: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KkpDiagnostics {
    pub components: usize,
    pub isolated: usize,
    /// Vertices handled by the ordinary step.
    pub ordinary: usize,
    /// Minimum over ordinary vertices of (achievable values - 2|U_i|).
    pub option_margin_min: Option<i64>,
    /// Ordinary vertices with at most `2|U_i|` achievable values.
    pub below_option_bound: usize,
    pub endgames: Vec<EndgameRecord>,
}

impl KkpDiagnostics {
    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{prefix}.components={}", self.components);
        let _ = writeln!(out, "{prefix}.isolated={}", self.isolated);
        let _ = writeln!(out, "{prefix}.ordinary={}", self.ordinary);
        if let Some(m) = self.option_margin_min {
            let _ = writeln!(out, "{prefix}.option_margin_min={m}");
        }
        let _ = writeln!(out, "{prefix}.below_option_bound={}", self.below_option_bound);
        let _ = writeln!(out, "{prefix}.endgames={}", self.endgames.len());
        let relaxed = self.endgames.iter().filter(|e| e.relaxed).count();
        let _ = writeln!(out, "{prefix}.endgames_relaxed={relaxed}");
        let met = self.endgames.iter().filter(|e| e.thresholds_met).count();
        let _ = writeln!(out, "{prefix}.endgames_thresholds_met={met}");
        let worst = self
            .endgames
            .iter()
            .map(|e| e.congruent.0.max(e.congruent.1))
            .max()
            .unwrap_or(0);
        let _ = writeln!(out, "{prefix}.max_congruent_sets={worst}");
        out
    }
}

enum Undo {
    Edge(EdgeId, i64),
    Assign(Vertex),
}

struct Algo<'a> {
    g: &'a Graph,
    part: &'a VertexPartition,
    m: i64,
    mode: Mode,
    state: WeightingState,
    /// Position inside the vertex's component ordering.
    pos: Vec<u32>,
    /// `Σ_v.low` for analysed vertices.
    assigned: Vec<Option<i64>>,
    class_sets: FxHashMap<(u8, i64), u32>,
    multiplicity: FxHashMap<i64, u32>,
    /// Current weighted degrees of analysed vertices, with counts.
    analysed_sigma: FxHashMap<i64, u32>,
    journal: Vec<Undo>,
    diag: KkpDiagnostics,
}

fn fail(witness: String) -> Error {
    Error::stage(Stage::UnionPass, witness)
}

/// Backward neighbours split by the sign they allow: `+m` when the
/// neighbour sits at the low end of its pair, `-m` otherwise.
#[derive(Default)]
struct Backward {
    plus: Vec<(Vertex, EdgeId)>,
    minus: Vec<(Vertex, EdgeId)>,
}

impl<'a> Algo<'a> {
    fn bump(map: &mut FxHashMap<i64, u32>, key: i64, by: i32) {
        let c = map.entry(key).or_insert(0);
        *c = (*c as i64 + by as i64) as u32;
        if *c == 0 {
            map.remove(&key);
        }
    }

    fn apply(&mut self, e: EdgeId, delta: i64) {
        if delta == 0 {
            return;
        }
        let (u, v) = self.g.edge(e);
        for w in [u, v] {
            if self.assigned[w as usize].is_some() {
                let s = self.state.sigma(w);
                Self::bump(&mut self.analysed_sigma, s, -1);
                Self::bump(&mut self.analysed_sigma, s + delta, 1);
            }
        }
        self.state.modify(self.g, e, delta);
        self.journal.push(Undo::Edge(e, delta));
    }

    fn assign(&mut self, v: Vertex) {
        let low = pair_low(self.state.sigma(v), self.m);
        self.assigned[v as usize] = Some(low);
        *self.class_sets.entry((self.part.class(v), low)).or_insert(0) += 1;
        *self.multiplicity.entry(low).or_insert(0) += 1;
        *self.analysed_sigma.entry(self.state.sigma(v)).or_insert(0) += 1;
        self.journal.push(Undo::Assign(v));
    }

    fn undo_to(&mut self, mark: usize) {
        while self.journal.len() > mark {
            match self.journal.pop().unwrap() {
                Undo::Edge(e, delta) => {
                    let (u, v) = self.g.edge(e);
                    for w in [u, v] {
                        if self.assigned[w as usize].is_some() {
                            let s = self.state.sigma(w);
                            Self::bump(&mut self.analysed_sigma, s, -1);
                            Self::bump(&mut self.analysed_sigma, s - delta, 1);
                        }
                    }
                    self.state.revert(self.g, e, delta);
                }
                Undo::Assign(v) => {
                    let low = self.assigned[v as usize].take().unwrap();
                    let key = (self.part.class(v), low);
                    let c = self.class_sets.get_mut(&key).unwrap();
                    *c -= 1;
                    if *c == 0 {
                        self.class_sets.remove(&key);
                    }
                    Self::bump(&mut self.multiplicity, low, -1);
                    Self::bump(&mut self.analysed_sigma, self.state.sigma(v), -1);
                }
            }
        }
    }

    fn u_incident(&self, v: Vertex) -> impl Iterator<Item = (Vertex, EdgeId)> + '_ {
        self.g.incident(v).filter(|&(u, _)| self.part.in_u(u))
    }

    fn backward(&self, v: Vertex, skip: &[Vertex]) -> Backward {
        let mut b = Backward::default();
        for (u, e) in self.u_incident(v) {
            if self.pos[u as usize] >= self.pos[v as usize] || skip.contains(&u) {
                continue;
            }
            let low = self.assigned[u as usize].expect("backward neighbours are analysed");
            if self.state.sigma(u) == low {
                b.plus.push((u, e));
            } else {
                b.minus.push((u, e));
            }
        }
        b
    }

    /// Applies `k` coarse moves (`+m` if positive), highest neighbour id first,
    /// never touching `avoid`.
    fn coarse(&mut self, back: &Backward, k: i64, avoid: Option<Vertex>) {
        let (list, step) = if k > 0 {
            (&back.plus, self.m)
        } else {
            (&back.minus, -self.m)
        };
        let edges: Vec<EdgeId> = list
            .iter()
            .rev()
            .filter(|&&(u, _)| Some(u) != avoid)
            .take(k.unsigned_abs() as usize)
            .map(|&(_, e)| e)
            .collect();
        debug_assert_eq!(edges.len() as u64, k.unsigned_abs());
        for e in edges {
            self.apply(e, step);
        }
    }

    fn process_vertex(&mut self, v: Vertex) -> Result<()> {
        let m = self.m;
        let sigma = self.state.sigma(v);
        let back = self.backward(v, &[]);
        let forward: Vec<EdgeId> = self
            .u_incident(v)
            .filter(|&(u, _)| self.pos[u as usize] > self.pos[v as usize])
            .map(|(_, e)| e)
            .collect();
        debug_assert!(!forward.is_empty());
        let lo = sigma - back.minus.len() as i64 * m;
        let hi = sigma + (back.plus.len() + forward.len()) as i64 * m;
        let size = hi - lo + 1;
        let class = self.part.class(v);
        let bound = 2 * self.part.sizes[class as usize] as i64;
        let margin = size - bound;
        self.diag.option_margin_min = Some(self.diag.option_margin_min.map_or(margin, |x| x.min(margin)));
        if size <= bound {
            self.diag.below_option_bound += 1;
            if self.mode == Mode::Strict {
                return Err(fail(format!(
                    "vertex v={v} in U_{class}: d_U(v)={} gives {size} achievable weighted degrees, need more than 2|U_{class}| = {bound}",
                    back.plus.len() + back.minus.len() + forward.len()
                )));
            }
        }
        let target = (lo..=hi)
            .find(|&t| !self.class_sets.contains_key(&(class, pair_low(t, m))))
            .ok_or_else(|| {
                fail(format!(
                    "vertex v={v} in U_{class}: all {size} achievable weighted degrees [{lo}, {hi}] lie in pair-sets of U_{class}"
                ))
            })?;
        let delta = target - sigma;
        let k = delta
            .div_euclid(m)
            .clamp(-(back.minus.len() as i64), back.plus.len() as i64);
        self.coarse(&back, k, None);
        let mut rest = delta - k * m;
        for e in forward {
            if rest == 0 {
                break;
            }
            let add = rest.min(m);
            self.apply(e, add);
            rest -= add;
        }
        debug_assert_eq!(rest, 0);
        debug_assert_eq!(self.state.sigma(v), target);
        self.assign(v);
        self.diag.ordinary += 1;
        Ok(())
    }

    fn owner_in(&self, list: &[(Vertex, EdgeId)], low: i64) -> bool {
        list.iter().any(|&(u, _)| self.assigned[u as usize] == Some(low))
    }

    /// Admissible values in the progression `sigma + k m` over the backward
    /// edges of `v` (minus `skip`), ascending, with the progression length.
    fn candidates(
        &self,
        v: Vertex,
        skip: &[Vertex],
        avoid: &FxHashSet<i64>,
        non_extremal: bool,
    ) -> (Vec<(i64, i64)>, Backward, usize) {
        let m = self.m;
        let back = self.backward(v, skip);
        let sigma = self.state.sigma(v);
        let (kmin, kmax) = (-(back.minus.len() as i64), back.plus.len() as i64);
        let options = (kmax - kmin + 1) as usize;
        let found = (kmin..=kmax)
            .filter(|&k| {
                if non_extremal && (k == kmin || k == kmax) {
                    return false;
                }
                let val = sigma + k * m;
                let low = pair_low(val, m);
                if avoid.contains(&low) || self.analysed_sigma.contains_key(&val) {
                    return false;
                }
                // the owner of the target pair must not be toggled onto it
                if k > 0 && k == kmax && self.owner_in(&back.plus, low) {
                    return false;
                }
                if k < 0 && k == kmin && self.owner_in(&back.minus, low) {
                    return false;
                }
                true
            })
            .map(|k| (k, sigma + k * m))
            .collect();
        (found, back, options)
    }

    fn owner_among(&self, v: Vertex, low: i64) -> Option<Vertex> {
        self.u_incident(v)
            .map(|(u, _)| u)
            .find(|&u| self.assigned[u as usize] == Some(low))
    }

    /// Tries one choice of `ω''(ab)`; leaves the state changed on success.
    /// With `exhaustive`, every admissible value for `a` is tried before
    /// giving up, otherwise only the smallest.
    fn try_endgame(
        &mut self,
        a: Vertex,
        b: Vertex,
        q: i64,
        s_t: &FxHashSet<i64>,
        non_extremal: bool,
        exhaustive: bool,
    ) -> Option<((i64, i64), (usize, usize))> {
        let mark = self.journal.len();
        let e_ab = self.g.edge_id(a, b).expect("last two vertices are adjacent");
        let current = self.state.weight(e_ab);
        let initial = current - self.m;
        self.apply(e_ab, initial + q - current);

        let (cands, back, opts_a) = self.candidates(a, &[b], s_t, non_extremal);
        let tries = if exhaustive { cands.len() } else { cands.len().min(1) };
        for &(k, sa) in &cands[..tries] {
            let inner = self.journal.len();
            let low_a = pair_low(sa, self.m);
            let owner_a = self.owner_among(a, low_a);
            self.coarse(&back, k, owner_a);
            debug_assert_eq!(self.state.sigma(a), sa);
            self.assign(a);

            let mut avoid = s_t.clone();
            avoid.insert(low_a);
            let mut skip = vec![a];
            skip.extend(owner_a);
            let (cands_b, back_b, opts_b) = self.candidates(b, &skip, &avoid, non_extremal);
            if let Some(&(k, sb)) = cands_b.first() {
                let owner_b = self.owner_among(b, pair_low(sb, self.m));
                self.coarse(&back_b, k, owner_b);
                debug_assert_eq!(self.state.sigma(b), sb);
                self.assign(b);
                return Some(((sa, sb), (opts_a, opts_b)));
            }
            self.undo_to(inner);
        }
        self.undo_to(mark);
        None
    }

    fn process_last_two(&mut self, a: Vertex, b: Vertex) -> Result<()> {
        let m = self.m;
        let s_t_sets: Vec<PairSet> = self
            .multiplicity
            .iter()
            .filter(|&(_, &c)| c >= 2)
            .map(|(&low, _)| PairSet { low, m })
            .collect();
        let s_t: FxHashSet<i64> = s_t_sets.iter().map(|s| s.low).collect();
        let mut by_residue: FxHashMap<i64, usize> = FxHashMap::default();
        for s in &s_t_sets {
            *by_residue.entry(s.offset()).or_insert(0) += 1;
        }
        let e_ab = self.g.edge_id(a, b).expect("last two vertices are adjacent");
        let shift = self.state.weight(e_ab) - m;
        let base_a = self.state.sigma(a) - self.state.weight(e_ab);
        let base_b = self.state.sigma(b) - self.state.weight(e_ab);
        let count = |x: i64| by_residue.get(&x.rem_euclid(m)).copied().unwrap_or(0);
        let mut qs: Vec<(usize, usize, i64, (usize, usize))> = (0..=m)
            .map(|q| {
                let w = shift + q;
                let (ca, cb) = (count(base_a + w), count(base_b + w));
                (ca.max(cb), ca + cb, q, (ca, cb))
            })
            .collect();
        qs.sort_unstable();

        let du_a = self.u_incident(a).count();
        let du_b = self.u_incident(b).count();
        let thresholds_met = du_a >= LAST_BUT_ONE_OPTIONS
            && du_b.saturating_sub(1) >= LAST_OPTIONS
            && qs[0].0 <= CONGRUENCE_CAP;

        let record = |q: i64, c, sig, opts, relaxed| EndgameRecord {
            last_but_one: a,
            last: b,
            q,
            congruent: c,
            s_t: s_t.len(),
            options: opts,
            sigma: sig,
            relaxed,
            thresholds_met,
        };

        if self.mode == Mode::Strict {
            if !thresholds_met {
                return Err(fail(format!(
                    "last two vertices u'={a}, u''={b}: d_U(u')={du_a} (need >= {LAST_BUT_ONE_OPTIONS}), d_U(u'')-1={} (need >= {LAST_OPTIONS}), congruent sets in S_t={} (need <= {CONGRUENCE_CAP})",
                    du_b.saturating_sub(1),
                    qs[0].0
                )));
            }
            let (_, _, q, c) = qs[0];
            return match self.try_endgame(a, b, q, &s_t, true, false) {
                Some((sig, opts)) => {
                    self.diag.endgames.push(record(q, c, sig, opts, false));
                    Ok(())
                }
                None => Err(fail(format!(
                    "last two vertices u'={a}, u''={b}: no admissible non-extremal weighted degree with ω''(u'u'')={q}"
                ))),
            };
        }
        for (non_extremal, exhaustive) in [(true, false), (true, true), (false, true)] {
            for (i, &(_, _, q, c)) in qs.iter().enumerate() {
                if let Some((sig, opts)) = self.try_endgame(a, b, q, &s_t, non_extremal, exhaustive) {
                    let relaxed = !non_extremal || exhaustive || i > 0;
                    self.diag.endgames.push(record(q, c, sig, opts, relaxed));
                    return Ok(());
                }
            }
        }
        Err(fail(format!(
            "last two vertices u'={a} (d_U={du_a}), u''={b} (d_U={du_b}): no choice of ω''(u'u'') in [0, {m}] leaves both an admissible weighted degree; |S_t|={}",
            s_t.len()
        )))
    }

    fn process_isolated(&mut self, v: Vertex) -> Result<()> {
        let s = self.state.sigma(v);
        if self.analysed_sigma.contains_key(&s) {
            let other = (0..self.g.order() as Vertex)
                .find(|&w| self.assigned[w as usize].is_some() && self.state.sigma(w) == s)
                .unwrap();
            return Err(fail(format!(
                "isolated vertex v={v} of G[U] has σ={s}, equal to analysed vertex {other}"
            )));
        }
        self.assign(v);
        self.diag.isolated += 1;
        Ok(())
    }
}

/// Runs the pass over `G[U]` on a state at `ω1` and returns the state at
/// `ω2`.
pub fn run_kkp(
    g: &Graph,
    part: &VertexPartition,
    mut state: WeightingState,
    budgets: &Budgets,
    mode: Mode,
) -> Result<(WeightingState, KkpDiagnostics)> {
    if state.stage() != WeightStage::Omega1 {
        return Err(Error::Internal(format!(
            "the union pass needs stage omega1, found {}",
            state.stage()
        )));
    }
    let m = budgets.kkp_step;
    if m < 1 {
        return Err(Error::Param(format!("kkp step must be positive, got {m}")));
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if part.in_u(u) && part.in_u(v) {
            state.add(g, e as EdgeId, m);
        }
    }
    state.advance(WeightStage::Omega2)?;

    let (sub, old_of) = g.induced_subgraph(&part.u())?;
    let comps = sub.components_with_order();
    let mut pos = vec![u32::MAX; g.order()];
    for c in &comps {
        for (i, &w) in c.order.iter().enumerate() {
            pos[old_of[w as usize] as usize] = i as u32;
        }
    }
    let mut algo = Algo {
        g,
        part,
        m,
        mode,
        state,
        pos,
        assigned: vec![None; g.order()],
        class_sets: FxHashMap::default(),
        multiplicity: FxHashMap::default(),
        analysed_sigma: FxHashMap::default(),
        journal: Vec::new(),
        diag: KkpDiagnostics {
            components: comps.len(),
            ..KkpDiagnostics::default()
        },
    };
    for c in &comps {
        let order: Vec<Vertex> = c.order.iter().map(|&w| old_of[w as usize]).collect();
        match order.len() {
            1 => algo.process_isolated(order[0])?,
            len => {
                for &v in &order[..len - 2] {
                    algo.process_vertex(v)?;
                }
                algo.process_last_two(order[len - 2], order[len - 1])?;
            }
        }
        algo.journal.clear();
    }
    if let Some(w) = class_collision(&algo.state, part) {
        return Err(fail(w));
    }
    Ok((algo.state, algo.diag))
}

fn class_collision(state: &WeightingState, part: &VertexPartition) -> Option<String> {
    let mut seen: FxHashMap<(u8, i64), Vertex> = FxHashMap::default();
    for v in 0..part.tag.len() as Vertex {
        let c = part.class(v);
        if c == 0 {
            continue;
        }
        if let Some(&u) = seen.get(&(c, state.sigma(v))) {
            return Some(format!(
                "vertices {u} and {v} of U_{c} share weighted degree {}",
                state.sigma(v)
            ));
        }
        seen.insert((c, state.sigma(v)), v);
    }
    None
}

/// Checks at `ω2`: `V0` below `U`, `U_i` below `U_{i+1}`, and `V0` weighted
/// degrees unchanged since `before`.
pub fn separation_checks(
    g: &Graph,
    part: &VertexPartition,
    before: &WeightingState,
    after: &WeightingState,
) -> ConditionReport {
    let mut report = ConditionReport::new(1.0);
    let extreme = |t: u8| {
        let mut it = part.members(t).into_iter().map(|v| (after.sigma(v), v));
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for x in it {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        Some((lo, hi))
    };
    let ext: Vec<Option<((i64, Vertex), (i64, Vertex))>> =
        (0..=CLASSES as u8).map(extreme).collect();

    report.declare(Condition::SeparationV0U);
    let u_min = ext[1..].iter().flatten().map(|&(lo, _)| lo).min();
    if let (Some((_, hi)), Some(lo)) = (ext[0], u_min) {
        report.check(
            Condition::SeparationV0U,
            hi.0 as f64,
            (lo.0 - 1) as f64,
            || format!("v={} u={}", hi.1, lo.1),
            || format!("max σ on V0 = {} (v={}) >= min σ on U = {} (u={})", hi.0, hi.1, lo.0, lo.1),
        );
    }
    report.declare(Condition::SeparationClasses);
    for i in 1..CLASSES {
        if let (Some((_, hi)), Some((lo, _))) = (ext[i], ext[i + 1]) {
            report.check(
                Condition::SeparationClasses,
                hi.0 as f64,
                (lo.0 - 1) as f64,
                || format!("i={i}"),
                || {
                    format!(
                        "max σ on U_{i} = {} (v={}) >= min σ on U_{} = {} (u={})",
                        hi.0,
                        hi.1,
                        i + 1,
                        lo.0,
                        lo.1
                    )
                },
            );
        }
    }
    report.declare(Condition::V0Fixed);
    for v in part.v0() {
        let (s1, s2) = (before.sigma(v), after.sigma(v));
        report.check(
            Condition::V0Fixed,
            (s2 - s1).abs() as f64,
            0.0,
            || format!("v={v}"),
            || {
                let changed = g
                    .incident(v)
                    .find(|&(_, e)| before.weight(e) != after.weight(e))
                    .map(|(u, e)| {
                        format!(
                            "; edge ({}, {}) {} -> {}",
                            v.min(u),
                            v.max(u),
                            before.weight(e),
                            after.weight(e)
                        )
                    })
                    .unwrap_or_default();
                format!("σ({v}) changed {s1} -> {s2}{changed}")
            },
        );
    }
    report
}
