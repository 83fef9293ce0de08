//! Random split of the vertex set into a small part `U = U_1 ∪ … ∪ U_7` and
//! the remainder `V0`, with the concentration conditions on part sizes and
//! on every vertex's neighbour counts.

use rand::Rng as _;

use crate::error::{Error, Result, Stage, StageFailure};
use crate::graph::{Graph, Vertex};
use crate::params::{LogPowers, PipelineParams};
use crate::report::{Condition, ConditionReport};
use crate::seed::{self, Stream};

/// Number of sub-parts of `U`.
pub const CLASSES: usize = 7;

/// Membership tag: 0 for `V0`, `i` in 1..=7 for `U_i`.
pub type Tag = u8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPartition {
    pub tag: Vec<Tag>,
    /// `sizes[0] = n0`, `sizes[i] = |U_i|`.
    pub sizes: [usize; CLASSES + 1],
    /// `counts[v][t]` = neighbours of `v` tagged `t`; `counts[v][0] = d0(v)`.
    pub counts: Vec<[u32; CLASSES + 1]>,
}

impl VertexPartition {
    /// Builds the partition and its caches from explicit tags.
    pub fn from_tags(g: &Graph, tag: Vec<Tag>) -> Result<Self> {
        if tag.len() != g.order() {
            return Err(Error::Param(format!(
                "{} tags for {} vertices",
                tag.len(),
                g.order()
            )));
        }
        if let Some(t) = tag.iter().find(|&&t| t as usize > CLASSES) {
            return Err(Error::Param(format!("tag {t} outside 0..=7")));
        }
        let mut sizes = [0usize; CLASSES + 1];
        for &t in &tag {
            sizes[t as usize] += 1;
        }
        let counts = (0..g.order() as Vertex)
            .map(|v| {
                let mut c = [0u32; CLASSES + 1];
                for &w in g.neighbors(v) {
                    c[tag[w as usize] as usize] += 1;
                }
                c
            })
            .collect();
        Ok(VertexPartition { tag, sizes, counts })
    }

    pub fn in_u(&self, v: Vertex) -> bool {
        self.tag[v as usize] != 0
    }

    pub fn class(&self, v: Vertex) -> Tag {
        self.tag[v as usize]
    }

    pub fn u_size(&self) -> usize {
        self.sizes[1..].iter().sum()
    }

    pub fn n0(&self) -> usize {
        self.sizes[0]
    }

    pub fn d0(&self, v: Vertex) -> u32 {
        self.counts[v as usize][0]
    }

    pub fn d_u(&self, v: Vertex) -> u32 {
        self.counts[v as usize][1..].iter().sum()
    }

    pub fn d_class(&self, v: Vertex, i: Tag) -> u32 {
        self.counts[v as usize][i as usize]
    }

    pub fn v0(&self) -> Vec<Vertex> {
        self.members(0)
    }

    pub fn u(&self) -> Vec<Vertex> {
        (0..self.tag.len() as Vertex).filter(|&v| self.in_u(v)).collect()
    }

    pub fn members(&self, t: Tag) -> Vec<Vertex> {
        (0..self.tag.len() as Vertex)
            .filter(|&v| self.tag[v as usize] == t)
            .collect()
    }
}

/// Probability `1 / ln^{b+eps} n` of landing in `U`.
pub fn u_probability(n: usize, p: &PipelineParams) -> Result<f64> {
    let lp = LogPowers::new(n)?;
    let q = 1.0 / lp.pow(p.b + p.eps);
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Param(format!(
            "1/ln^(b+eps) n = {q} is not in (0,1) for n={n}"
        )));
    }
    Ok(q)
}

fn regular_degree(g: &Graph) -> Result<usize> {
    g.regular_degree()
        .ok_or_else(|| Error::Param("the input graph is not regular".into()))
}

/// Each vertex joins `U` independently with probability `1/ln^{b+eps} n` and
/// draws a class uniformly from 1..=7.
pub fn sample_partition(g: &Graph, p: &PipelineParams, seed: u64) -> Result<VertexPartition> {
    p.validate()?;
    regular_degree(g)?;
    let q = u_probability(g.order(), p)?;
    let mut rng = seed::rng(seed);
    let tag = (0..g.order())
        .map(|_| {
            let in_u = rng.gen::<f64>() < q;
            let class = rng.gen_range(1..=CLASSES as Tag);
            if in_u {
                class
            } else {
                0
            }
        })
        .collect();
    VertexPartition::from_tags(g, tag)
}

/// Evaluates the part-size condition for every class and the neighbour-share
/// condition for every vertex and class, right-hand sides scaled by slack.
pub fn check_partition(
    g: &Graph,
    part: &VertexPartition,
    p: &PipelineParams,
) -> Result<ConditionReport> {
    let n = g.order();
    let d = regular_degree(g)? as f64;
    let lp = LogPowers::new(n)?;
    let (b, e) = (p.b, p.eps);
    let nf = n as f64;
    let size_center = nf / (CLASSES as f64 * lp.pow(b + e));
    let size_window = p.slack * nf / (CLASSES as f64 * lp.pow(2.0 * b + 4.0 * e));
    let deg_center = d / (CLASSES as f64 * lp.pow(b + e));
    let deg_window = p.slack * d / (CLASSES as f64 * lp.pow(2.0 * b + 4.0 * e));

    let mut report = ConditionReport::new(p.slack);
    for i in 1..=CLASSES {
        let size = part.sizes[i] as f64;
        report.check(
            Condition::PartSize,
            (size - size_center).abs(),
            size_window,
            || format!("i={i}"),
            || format!("||U_{i}| - {size_center:.4}| = |{size} - {size_center:.4}| > {size_window:.4}"),
        );
    }
    report.declare(Condition::NeighbourShare);
    for v in 0..n as Vertex {
        for i in 1..=CLASSES as Tag {
            let c = part.d_class(v, i) as f64;
            report.check(
                Condition::NeighbourShare,
                (c - deg_center).abs(),
                deg_window,
                || format!("v={v} i={i}"),
                || format!("|d_U{i}({v}) - {deg_center:.4}| = |{c} - {deg_center:.4}| > {deg_window:.4}"),
            );
        }
    }
    Ok(report)
}

/// A Las Vegas result: the accepted sample, how many draws it took, and the
/// report that accepted it.
#[derive(Clone, Debug)]
pub struct Found<T> {
    pub value: T,
    pub attempts: usize,
    pub report: ConditionReport,
}

pub(crate) fn exhausted(
    stage: Stage,
    budget: usize,
    last: Option<ConditionReport>,
) -> Error {
    let witness = match last.as_ref().and_then(|r| r.tightest()) {
        Some(v) => format!(
            "retry budget of {budget} attempts exhausted; tightest {} {}: {}",
            v.condition.label(),
            v.subject,
            v.witness
        ),
        None => format!("retry budget of {budget} attempts exhausted before any sample"),
    };
    Error::Stage(Box::new(StageFailure {
        stage,
        witness,
        report: last,
    }))
}

/// Resamples with seeds derived from `seed` until [`check_partition`] passes.
pub fn find_partition(
    g: &Graph,
    p: &PipelineParams,
    seed: u64,
) -> Result<Found<VertexPartition>> {
    p.validate()?;
    let mut last = None;
    for attempt in 0..p.max_retries {
        let part = sample_partition(g, p, seed::derive(seed, Stream::Partition, attempt as u64))?;
        let report = check_partition(g, &part, p)?;
        if report.passed() {
            return Ok(Found {
                value: part,
                attempts: attempt + 1,
                report,
            });
        }
        last = Some(report);
    }
    Err(exhausted(Stage::Partition, p.max_retries, last))
}
