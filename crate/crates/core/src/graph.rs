//! Simple undirected graphs in compressed adjacency form.
//!
//! Vertices are dense ids `0..n`. Edges are stored once as `(min, max)` pairs,
//! sorted lexicographically, so an edge id is stable for a given edge set.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type Vertex = u32;
pub type EdgeId = u32;

/// Immutable simple undirected graph.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<usize>,
    neighbors: Vec<Vertex>,
    incident: Vec<EdgeId>,
    regular_degree: Option<usize>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph from an arbitrary list of pairs. Loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::Param(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Param(format!("self-loop at vertex {u}")));
            }
            edges.push((u.min(v) as Vertex, u.max(v) as Vertex));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Param(format!(
                "parallel edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_unique(n, edges))
    }

    /// `edges` must be sorted, deduplicated and normalised to `(min, max)`.
    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0; offsets[n]];
        let mut incident = vec![0; offsets[n]];
        // Scanning edges in (min, max) order leaves every adjacency list sorted
        // ascending: for vertex w, neighbours below w arrive via edges (x, w)
        // ordered by x, and all of them precede the edges (w, y).
        for (id, &(u, v)) in edges.iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            neighbors[fill[u]] = v as Vertex;
            incident[fill[u]] = id as EdgeId;
            fill[u] += 1;
            neighbors[fill[v]] = u as Vertex;
            incident[fill[v]] = id as EdgeId;
            fill[v] += 1;
        }
        let regular_degree = match degree.first() {
            Some(&d0) if degree.iter().all(|&d| d == d0) => Some(d0),
            None => Some(0),
            _ => None,
        };
        Graph {
            n,
            edges,
            offsets,
            neighbors,
            incident,
            regular_degree,
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbour, edge id)` pairs of `v`, neighbours ascending.
    pub fn incident(&self, v: Vertex) -> impl Iterator<Item = (Vertex, EdgeId)> + '_ {
        let v = v as usize;
        let r = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[r.clone()]
            .iter()
            .copied()
            .zip(self.incident[r].iter().copied())
    }

    /// Common degree when every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n as Vertex).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn edge_id(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok().map(|i| i as EdgeId)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Subgraph induced by `vertices` (any order, duplicates rejected).
    /// Returns the subgraph and the map from new ids to old ids.
    pub fn induced_subgraph(&self, vertices: &[Vertex]) -> Result<(Graph, Vec<Vertex>)> {
        let mut new_id = vec![u32::MAX; self.n];
        let mut old_of = Vec::with_capacity(vertices.len());
        for &v in vertices {
            if v as usize >= self.n {
                return Err(Error::Param(format!(
                    "vertex {v} outside 0..{}",
                    self.n
                )));
            }
            if new_id[v as usize] != u32::MAX {
                return Err(Error::Param(format!("vertex {v} listed twice")));
            }
            new_id[v as usize] = old_of.len() as Vertex;
            old_of.push(v);
        }
        let mut edges = Vec::new();
        for (i, &v) in old_of.iter().enumerate() {
            for &w in self.neighbors(v) {
                let j = new_id[w as usize];
                if j != u32::MAX && (i as Vertex) < j {
                    edges.push((i as Vertex, j));
                }
            }
        }
        edges.sort_unstable();
        Ok((Graph::from_sorted_unique(old_of.len(), edges), old_of))
    }

    /// Connected components, each with a reversed-BFS ordering in which every
    /// vertex but the last has a neighbour later in the ordering.
    ///
    /// BFS starts at the smallest vertex id of each component and enqueues
    /// neighbours in ascending id order. Components come out in ascending
    /// order of their smallest vertex.
    pub fn components_with_order(&self) -> Vec<ComponentOrdering> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for root in 0..self.n as Vertex {
            if seen[root as usize] {
                continue;
            }
            seen[root as usize] = true;
            queue.push_back(root);
            let mut bfs = Vec::new();
            let mut bfs_parent: Vec<Option<Vertex>> = vec![None];
            while let Some(v) = queue.pop_front() {
                bfs.push(v);
                for &w in self.neighbors(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        queue.push_back(w);
                        bfs_parent.push(Some(v));
                    }
                }
            }
            // discovery order equals dequeue order, so bfs_parent[i] belongs to bfs[i]
            let len = bfs.len();
            let order: Vec<Vertex> = bfs.iter().rev().copied().collect();
            let forward: Vec<Option<Vertex>> = bfs_parent.into_iter().rev().collect();
            debug_assert_eq!(forward.len(), len);
            out.push(ComponentOrdering { order, forward });
        }
        out
    }
}

/// One connected component together with its processing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentOrdering {
    /// `u_1 .. u_{n'}`.
    pub order: Vec<Vertex>,
    /// Forward neighbour of `order[j]`; `None` only for the last vertex.
    pub forward: Vec<Option<Vertex>>,
}

impl ComponentOrdering {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
