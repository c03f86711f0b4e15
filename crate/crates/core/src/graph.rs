//! Undirected signed graphs with weights in `[-1, 1] \ {0}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::compensated_sum;

/// Vertex metadata carried through the graph file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub party: String,
    pub state: String,
}

impl Vertex {
    pub fn new(id: impl Into<String>, party: impl Into<String>, state: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            party: party.into(),
            state: state.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Signed graph. Edges are stored once per unordered pair with `u < v`,
/// sorted by `(u, v)`; zero-weight pairs are simply absent.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct SignedGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    // neighbours sorted by index
    adjacency: Vec<Vec<(usize, f64)>>,
    total_abs_weight: f64,
}

impl PartialEq for SignedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl SignedGraph {
    pub fn new(vertices: Vec<Vertex>, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let n = vertices.len();
        let mut seen_ids = HashMap::with_capacity(n);
        for (i, vertex) in vertices.iter().enumerate() {
            if let Some(j) = seen_ids.insert(vertex.id.as_str(), i) {
                return Err(Error::InvalidGraph(format!(
                    "vertex id `{}` appears at positions {j} and {i}",
                    vertex.id
                )));
            }
        }

        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| {
                let (u, v) = if e.u <= e.v { (e.u, e.v) } else { (e.v, e.u) };
                Edge {
                    u,
                    v,
                    weight: e.weight,
                }
            })
            .collect();
        for e in &edges {
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {}", e.u)));
            }
            if e.v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.u, e.v
                )));
            }
            if !e.weight.is_finite() || e.weight == 0.0 || e.weight.abs() > 1.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has weight {} outside [-1, 0) U (0, 1]",
                    e.u, e.v, e.weight
                )));
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        if let Some(w) = edges.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(Error::InvalidGraph(format!(
                "pair ({}, {}) appears more than once",
                w[0].u, w[0].v
            )));
        }

        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }
        let total_abs_weight = compensated_sum(edges.iter().map(|e| e.weight.abs()));

        Ok(Self {
            vertices,
            edges,
            adjacency,
            total_abs_weight,
        })
    }

    /// Graph on anonymous vertices `v0, v1, ...` with placeholder metadata.
    pub fn from_weighted_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let vertices = (0..n).map(|i| Vertex::new(format!("v{i}"), "-", "-")).collect();
        Self::new(
            vertices,
            edges.into_iter().map(|(u, v, weight)| Edge { u, v, weight }),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, vertex: usize) -> &[(usize, f64)] {
        &self.adjacency[vertex]
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.adjacency[vertex].len()
    }

    /// Weight of the unordered pair, `0.0` when no edge exists.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if u >= self.vertices.len() || v >= self.vertices.len() {
            return 0.0;
        }
        let list = &self.adjacency[u];
        match list.binary_search_by_key(&v, |&(j, _)| j) {
            Ok(pos) => list[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Sum of `|w|` over all edges.
    pub fn total_abs_weight(&self) -> f64 {
        self.total_abs_weight
    }

    pub fn has_negative_edges(&self) -> bool {
        self.edges.iter().any(|e| e.weight < 0.0)
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.vertices.clone(),
            self.edges.iter().map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            }),
        )
    }
}

impl TryFrom<GraphRepr> for SignedGraph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        SignedGraph::new(repr.vertices, repr.edges)
    }
}

impl From<SignedGraph> for GraphRepr {
    fn from(g: SignedGraph) -> Self {
        GraphRepr {
            vertices: g.vertices,
            edges: g.edges,
        }
    }
}
