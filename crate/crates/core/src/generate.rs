//! Random d-regular graphs from the pairing model.
//!
//! Half-edges ("points") are paired one at a time, and a pair is accepted
//! only when it creates neither a loop nor a parallel edge. When random picks
//! keep failing, the remaining points are scanned for any acceptable pair;
//! if none is left the whole pairing is discarded and restarted with the next
//! derived seed. The number of restarts is capped.

use rand::Rng as _;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::seed::{self, Stream};

/// Consecutive rejected random picks before falling back to a full scan.
const SCAN_AFTER: usize = 64;

#[derive(Clone, Copy, Debug)]
#[derive(Default)]
pub struct RegularGenerator {
    /// Maximum number of discarded pairings; `None` means `10 * n`.
    pub restart_budget: Option<usize>,
}


/// Simple d-regular graph on `n` vertices, deterministic in `seed`.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    RegularGenerator::default().generate(n, d, seed)
}

impl RegularGenerator {
    pub fn generate(&self, n: usize, d: usize, seed: u64) -> Result<Graph> {
        if d >= n.max(1) && !(n == 0 && d == 0) {
            return Err(Error::Param(format!(
                "degree d={d} must be smaller than n={n}"
            )));
        }
        if (n * d) % 2 == 1 {
            return Err(Error::Param(format!("n*d = {} is odd", n * d)));
        }
        if n > u32::MAX as usize {
            return Err(Error::Param(format!("n={n} exceeds the 32-bit vertex range")));
        }
        let budget = self.restart_budget.unwrap_or(10 * n);
        for attempt in 0..=budget {
            let mut rng = seed::rng(seed::derive(seed, Stream::Graph, attempt as u64));
            if let Some(mut edges) = try_pairing(n, d, &mut rng) {
                edges.sort_unstable();
                return Ok(Graph::from_sorted_unique(n, edges));
            }
        }
        Err(Error::RetryExhausted {
            budget,
            what: format!("no simple pairing for n={n}, d={d}"),
        })
    }
}

fn key(u: Vertex, v: Vertex) -> u64 {
    let (a, b) = (u.min(v), u.max(v));
    ((a as u64) << 32) | b as u64
}

fn try_pairing(n: usize, d: usize, rng: &mut seed::Rng) -> Option<Vec<(Vertex, Vertex)>> {
    let mut points: Vec<Vertex> = (0..n as Vertex)
        .flat_map(|v| std::iter::repeat_n(v, d))
        .collect();
    let mut present: FxHashSet<u64> = FxHashSet::default();
    present.reserve(n * d / 2);
    let mut edges = Vec::with_capacity(n * d / 2);
    let mut misses = 0usize;
    while !points.is_empty() {
        if misses < SCAN_AFTER {
            let i = rng.gen_range(0..points.len());
            let mut j = rng.gen_range(0..points.len() - 1);
            if j >= i {
                j += 1;
            }
            let (u, v) = (points[i], points[j]);
            if u != v && present.insert(key(u, v)) {
                edges.push((u.min(v), u.max(v)));
                let (hi, lo) = (i.max(j), i.min(j));
                points.swap_remove(hi);
                points.swap_remove(lo);
                misses = 0;
            } else {
                misses += 1;
            }
            continue;
        }
        // scan: distinct vertices that still have free points
        let mut open: Vec<Vertex> = points.clone();
        open.sort_unstable();
        open.dedup();
        let mut candidates = Vec::new();
        for (a, &u) in open.iter().enumerate() {
            for &v in &open[a + 1..] {
                if !present.contains(&key(u, v)) {
                    candidates.push((u, v));
                }
            }
        }
        if candidates.is_empty() {
            return None;
        }
        let (u, v) = candidates[rng.gen_range(0..candidates.len())];
        present.insert(key(u, v));
        edges.push((u, v));
        let iu = points.iter().position(|&p| p == u).unwrap();
        points.swap_remove(iu);
        let iv = points.iter().position(|&p| p == v).unwrap();
        points.swap_remove(iv);
        misses = 0;
    }
    Some(edges)
}
