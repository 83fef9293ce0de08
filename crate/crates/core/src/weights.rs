//! Staged integer edge weights and their CSV form.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum WeightStage {
    /// Initial weights on `G0` and `E[V0, U]`.
    Omega0,
    /// After the residual weights on `E[V0, U]`.
    Omega1,
    /// After the union pass over `G[U]`.
    Omega2,
    /// Final labels, everything shifted by one.
    Omega3,
}

impl WeightStage {
    pub fn name(self) -> &'static str {
        match self {
            WeightStage::Omega0 => "omega0",
            WeightStage::Omega1 => "omega1",
            WeightStage::Omega2 => "omega2",
            WeightStage::Omega3 => "omega3",
        }
    }
}

impl fmt::Display for WeightStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Edge weights with cached weighted degrees and per-edge modification
/// counters. The cache is kept in sync by every mutator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightingState {
    stage: WeightStage,
    weights: Vec<i64>,
    mods: Vec<u8>,
    sigma: Vec<i64>,
}

impl WeightingState {
    pub fn zero(g: &Graph) -> Self {
        WeightingState {
            stage: WeightStage::Omega0,
            weights: vec![0; g.size()],
            mods: vec![0; g.size()],
            sigma: vec![0; g.order()],
        }
    }

    pub fn from_weights(g: &Graph, stage: WeightStage, weights: Vec<i64>) -> Result<Self> {
        if weights.len() != g.size() {
            return Err(Error::Input(format!(
                "{} weights for {} edges",
                weights.len(),
                g.size()
            )));
        }
        let sigma = weighted_degrees(g, &weights);
        Ok(WeightingState {
            stage,
            mods: vec![0; g.size()],
            weights,
            sigma,
        })
    }

    pub fn stage(&self) -> WeightStage {
        self.stage
    }

    /// Moves to a later stage; stages never go backwards.
    pub fn advance(&mut self, to: WeightStage) -> Result<()> {
        if to <= self.stage {
            return Err(Error::Internal(format!(
                "stage transition {} -> {} is not forward",
                self.stage, to
            )));
        }
        self.stage = to;
        Ok(())
    }

    pub fn weight(&self, e: EdgeId) -> i64 {
        self.weights[e as usize]
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn sigma(&self, v: Vertex) -> i64 {
        self.sigma[v as usize]
    }

    pub fn sigmas(&self) -> &[i64] {
        &self.sigma
    }

    pub fn modifications(&self, e: EdgeId) -> u8 {
        self.mods[e as usize]
    }

    /// Adds `delta` to edge `e` without counting a modification.
    pub fn add(&mut self, g: &Graph, e: EdgeId, delta: i64) {
        let (u, v) = g.edge(e);
        self.weights[e as usize] += delta;
        self.sigma[u as usize] += delta;
        self.sigma[v as usize] += delta;
    }

    /// Adds `delta` to edge `e` and counts it as one modification.
    pub fn modify(&mut self, g: &Graph, e: EdgeId, delta: i64) {
        self.add(g, e, delta);
        self.mods[e as usize] = self.mods[e as usize].saturating_add(1);
    }

    /// Undoes one earlier [`modify`](Self::modify) of `delta` on `e`.
    pub(crate) fn revert(&mut self, g: &Graph, e: EdgeId, delta: i64) {
        self.add(g, e, -delta);
        self.mods[e as usize] = self.mods[e as usize].saturating_sub(1);
    }

    /// True when the cached weighted degrees match a fresh recount.
    pub fn cache_consistent(&self, g: &Graph) -> bool {
        weighted_degrees(g, &self.weights) == self.sigma
    }

    pub fn to_csv(&self, g: &Graph, meta: &[(&str, String)]) -> String {
        write_csv(g, &self.weights, self.stage.name(), meta)
    }
}

/// `sigma(v) = sum of weights on edges at v`.
pub fn weighted_degrees(g: &Graph, weights: &[i64]) -> Vec<i64> {
    let mut sigma = vec![0i64; g.order()];
    for (&(u, v), &w) in g.edges().iter().zip(weights) {
        sigma[u as usize] += w;
        sigma[v as usize] += w;
    }
    sigma
}

/// `# key=value` header lines, a `u,v,weight` column line, then one row per
/// edge in edge-id order.
pub fn write_csv(g: &Graph, weights: &[i64], stage: &str, meta: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# stage={stage}");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str("u,v,weight\n");
    for (&(u, v), w) in g.edges().iter().zip(weights) {
        let _ = writeln!(out, "{u},{v},{w}");
    }
    out
}

/// A parsed weight file: header metadata and `(u, v, weight)` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFile {
    pub meta: Vec<(String, String)>,
    pub rows: Vec<(Vertex, Vertex, i64)>,
}

impl WeightFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.trim().split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if line == "u,v,weight" {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [u, v, w] = fields[..] else {
                return Err(Error::parse(format!("line {}", i + 1), "expected u,v,weight"));
            };
            let bad = |what: &str, s: &str| Error::parse(format!("line {}", i + 1), format!("bad {what} `{s}`"));
            rows.push((
                u.parse().map_err(|_| bad("vertex", u))?,
                v.parse().map_err(|_| bad("vertex", v))?,
                w.parse().map_err(|_| bad("weight", w))?,
            ));
        }
        Ok(WeightFile { meta, rows })
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Weights indexed by the edge ids of `g`. Every edge needs exactly one row.
    pub fn weights_for(&self, g: &Graph) -> Result<Vec<i64>> {
        let mut out: Vec<Option<i64>> = vec![None; g.size()];
        for &(u, v, w) in &self.rows {
            let e = g
                .edge_id(u, v)
                .ok_or_else(|| Error::Input(format!("weight given for non-edge ({u}, {v})")))?;
            if out[e as usize].replace(w).is_some() {
                return Err(Error::Input(format!("edge ({u}, {v}) weighted twice")));
            }
        }
        out.iter()
            .enumerate()
            .map(|(e, w)| {
                w.ok_or_else(|| {
                    let (u, v) = g.edge(e as EdgeId);
                    Error::Input(format!("missing weight for edge ({u}, {v})"))
                })
            })
            .collect()
    }
}
