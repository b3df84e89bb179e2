//! Continuous metric multigraphs with exact shortest-path distance.
//!
//! A point lives either on a vertex or at an exact dyadic offset along a
//! named edge. Parallel edges are allowed. The induced metric treats every
//! edge as a continuum: the distance between two points is the length of the
//! shortest path through the graph, computed exactly.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::dyadic::Dyadic;
use crate::metric::{MetricSpace, PointId};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: Dyadic,
}

/// Location on the continuous graph: a vertex, or an offset measured from
/// endpoint `u` of an edge. Offsets 0 and full-length canonicalize to
/// vertices, so representations are unique.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphPoint {
    Vertex(VertexId),
    OnEdge { edge: EdgeId, offset: Dyadic },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    UnknownVertex(VertexId),
    UnknownEdge(EdgeId),
    NonPositiveEdgeLength(EdgeId),
    OffsetOutOfRange { edge: EdgeId, offset: String },
    Unreachable,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::UnknownVertex(v) => write!(f, "unknown vertex {v}"),
            GraphError::UnknownEdge(e) => write!(f, "unknown edge {e}"),
            GraphError::NonPositiveEdgeLength(e) => write!(f, "edge {e} has non-positive length"),
            GraphError::OffsetOutOfRange { edge, offset } => {
                write!(f, "offset {offset} outside edge {edge}")
            }
            GraphError::Unreachable => write!(f, "unreachable"),
        }
    }
}

impl std::error::Error for GraphError {}

#[derive(Clone, Debug, Default)]
pub struct MetricMultigraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl MetricMultigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.vertex_count += 1;
        self.vertex_count - 1
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, length: Dyadic) -> Result<EdgeId, GraphError> {
        if u >= self.vertex_count {
            return Err(GraphError::UnknownVertex(u));
        }
        if v >= self.vertex_count {
            return Err(GraphError::UnknownVertex(v));
        }
        if length.is_zero() {
            return Err(GraphError::NonPositiveEdgeLength(self.edges.len()));
        }
        self.edges.push(Edge { u, v, length });
        Ok(self.edges.len() - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Point at `offset` from endpoint `u` of `edge`; canonicalizes endpoint
    /// offsets to vertices.
    pub fn point_on_edge(&self, edge: EdgeId, offset: Dyadic) -> Result<GraphPoint, GraphError> {
        let rec = self.edges.get(edge).ok_or(GraphError::UnknownEdge(edge))?;
        if offset > rec.length {
            return Err(GraphError::OffsetOutOfRange { edge, offset: offset.to_string() });
        }
        if offset.is_zero() {
            return Ok(GraphPoint::Vertex(rec.u));
        }
        if offset == rec.length {
            return Ok(GraphPoint::Vertex(rec.v));
        }
        Ok(GraphPoint::OnEdge { edge, offset })
    }

    /// Single-source shortest paths over the vertex skeleton.
    pub fn vertex_distances(&self, source: VertexId) -> Vec<Option<Dyadic>> {
        let mut adj: Vec<Vec<(VertexId, &Dyadic)>> = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.u].push((e.v, &e.length));
            adj[e.v].push((e.u, &e.length));
        }
        let mut dist: Vec<Option<Dyadic>> = vec![None; self.vertex_count];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(Dyadic::zero());
        heap.push(Reverse((Dyadic::zero(), source)));
        while let Some(Reverse((d, at))) = heap.pop() {
            if dist[at].as_ref() != Some(&d) {
                continue;
            }
            for (to, len) in &adj[at] {
                let cand = d.add(len);
                let better = match &dist[*to] {
                    None => true,
                    Some(cur) => cand < *cur,
                };
                if better {
                    dist[*to] = Some(cand.clone());
                    heap.push(Reverse((cand, *to)));
                }
            }
        }
        dist
    }

    /// Exact shortest-path distance between two points of the continuum.
    ///
    /// Minimizes over the vertex-routed combinations of the two points'
    /// exits, plus the direct segment when both points share an edge.
    pub fn shortest_path_distance(&self, a: &GraphPoint, b: &GraphPoint) -> Result<Dyadic, GraphError> {
        self.validate_point(a)?;
        self.validate_point(b)?;
        let mut best: Option<Dyadic> = None;
        if let (GraphPoint::OnEdge { edge: ea, offset: oa }, GraphPoint::OnEdge { edge: eb, offset: ob }) = (a, b) {
            if ea == eb {
                best = Some(oa.abs_diff(ob));
            }
        }
        let exits_a = self.exits(a);
        let exits_b = self.exits(b);
        for (va, da) in &exits_a {
            let from_va = self.vertex_distances(*va);
            for (vb, db) in &exits_b {
                if let Some(mid) = &from_va[*vb] {
                    let cand = da.add(mid).add(db);
                    if best.as_ref().map_or(true, |cur| cand < *cur) {
                        best = Some(cand);
                    }
                }
            }
        }
        best.ok_or(GraphError::Unreachable)
    }

    fn validate_point(&self, p: &GraphPoint) -> Result<(), GraphError> {
        match p {
            GraphPoint::Vertex(v) if *v >= self.vertex_count => Err(GraphError::UnknownVertex(*v)),
            GraphPoint::OnEdge { edge, offset } => {
                let rec = self.edges.get(*edge).ok_or(GraphError::UnknownEdge(*edge))?;
                if offset.is_zero() || *offset >= rec.length {
                    // Interior offsets only: endpoints must be canonicalized.
                    return Err(GraphError::OffsetOutOfRange {
                        edge: *edge,
                        offset: offset.to_string(),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn exits(&self, p: &GraphPoint) -> Vec<(VertexId, Dyadic)> {
        match p {
            GraphPoint::Vertex(v) => vec![(*v, Dyadic::zero())],
            GraphPoint::OnEdge { edge, offset } => {
                let rec = &self.edges[*edge];
                let to_v = rec.length.checked_sub(offset).expect("offset within edge");
                vec![(rec.u, offset.clone()), (rec.v, to_v)]
            }
        }
    }
}

/// A finite set of graph points exposed as a [`MetricSpace`].
///
/// Vertex-to-vertex distances are computed once at construction; per-pair
/// queries then combine the stored exits, so each call is a handful of exact
/// additions.
#[derive(Clone, Debug)]
pub struct GraphSpace {
    graph: MetricMultigraph,
    points: Vec<GraphPoint>,
    vertex_table: Vec<Vec<Option<Dyadic>>>,
}

impl GraphSpace {
    pub fn new(graph: MetricMultigraph, points: Vec<GraphPoint>) -> Result<Self, GraphError> {
        for p in &points {
            graph.validate_point(p)?;
        }
        let vertex_table = (0..graph.vertex_count()).map(|v| graph.vertex_distances(v)).collect();
        Ok(GraphSpace { graph, points, vertex_table })
    }

    pub fn graph(&self) -> &MetricMultigraph {
        &self.graph
    }

    pub fn point(&self, id: PointId) -> &GraphPoint {
        &self.points[id]
    }
}

impl MetricSpace for GraphSpace {
    type Dist = Dyadic;

    fn len(&self) -> usize {
        self.points.len()
    }

    fn distance(&self, a: PointId, b: PointId) -> Dyadic {
        let (pa, pb) = (&self.points[a], &self.points[b]);
        let mut best: Option<Dyadic> = None;
        if let (GraphPoint::OnEdge { edge: ea, offset: oa }, GraphPoint::OnEdge { edge: eb, offset: ob }) = (pa, pb) {
            if ea == eb {
                best = Some(oa.abs_diff(ob));
            }
        }
        for (va, da) in self.graph.exits(pa) {
            for (vb, db) in self.graph.exits(pb) {
                if let Some(mid) = &self.vertex_table[va][vb] {
                    let cand = da.add(mid).add(&db);
                    if best.as_ref().map_or(true, |cur| cand < *cur) {
                        best = Some(cand);
                    }
                }
            }
        }
        best.expect("points validated at construction; graph connected between them")
    }
}
