//! Generators for the two adversarial metric-graph families, together with
//! their prescribed leveled trees and exact closed-form distances.
//!
//! Both families live on a two-vertex multigraph whose edge lengths grow
//! geometrically. Each reference point occupies its own tree level, so the
//! explicit depth stays near `2 * sqrt(|R|)` while a search that walks every
//! level touches all `|R|` of them.

use std::fmt;

use crate::dyadic::Dyadic;
use crate::graph::{GraphError, GraphPoint, GraphSpace, MetricMultigraph};
use crate::metric::PointId;
use crate::tree::CoverTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    /// Parameter outside the family's supported range.
    ParameterTooSmall { m: u32, minimum: u32 },
    Graph(GraphError),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::ParameterTooSmall { m, minimum } => {
                write!(f, "parameter m={m} below supported minimum {minimum}")
            }
            DatasetError::Graph(e) => write!(f, "graph construction failed: {e}"),
        }
    }
}

impl std::error::Error for DatasetError {}

impl From<GraphError> for DatasetError {
    fn from(e: GraphError) -> Self {
        DatasetError::Graph(e)
    }
}

pub const TALL_MIN_M: u32 = 11;
pub const BICHROMATIC_MIN_M: u32 = 12;

/// Single-tree adversarial family.
///
/// Point ids: `0` is the hub vertex `r`, ids `1..=m^2` are the chain points
/// (id `i` holds the point whose level is `i`), and id `m^2 + 1` is the
/// query vertex. The reference set is `{0, 1, ..., m^2}`; the query point is
/// not part of it.
#[derive(Clone, Debug)]
pub struct TallDataset {
    pub m: u32,
    pub space: GraphSpace,
    pub reference: Vec<PointId>,
    pub query: PointId,
    pub tree: CoverTree,
}

/// Dual-tree adversarial family: two mirrored chains share the hub vertex.
///
/// Point ids: `0` is the shared hub `r`; ids `1..=m^2` are the query-side
/// chain points; ids `m^2 + 1 ..= 2 m^2` are the reference-side chain points
/// (id `m^2 + i` holds the reference point of level `i`).
#[derive(Clone, Debug)]
pub struct BichromaticDataset {
    pub m: u32,
    pub space: GraphSpace,
    pub query_set: Vec<PointId>,
    pub reference_set: Vec<PointId>,
    pub query_tree: CoverTree,
    pub reference_tree: CoverTree,
}

/// Index of the group (edge) hosting chain point `i`: `ceil(i / m)`.
fn group_of(i: u64, m: u64) -> u64 {
    i.div_ceil(m)
}

/// Shared chain construction: edges `e_1..e_m` of length `2^(k*m+2)` between
/// the hub and the junction vertex; chain point `i` sits on edge
/// `e_{ceil(i/m)}` at exact distance `2^(i+1)` from the junction. Midpoint
/// recursion makes that placement forced: point `k*m` is the midpoint of
/// `e_k`, every other point the midpoint of the segment from its successor
/// to the junction.
fn chain_points(
    graph: &MetricMultigraph,
    edge_ids: &[usize],
    m: u64,
) -> Result<Vec<GraphPoint>, GraphError> {
    let mut pts = Vec::with_capacity((m * m) as usize);
    for i in 1..=m * m {
        let edge = edge_ids[(group_of(i, m) - 1) as usize];
        let len = graph.edge(edge).length.clone();
        // Offsets are measured from the hub endpoint; distance to the
        // junction is 2^(i+1), so the offset is length - 2^(i+1).
        let offset = len
            .checked_sub(&Dyadic::pow2(i as i64 + 1))
            .expect("point lies inside its edge");
        pts.push(graph.point_on_edge(edge, offset)?);
    }
    Ok(pts)
}

/// Prescribed tree over chain ids: level of chain point `i` is `i`; its
/// parent is the hub when `m | i`, otherwise its successor. Root is the hub
/// at level `m^2 + 1`.
fn prescribed_tree(hub: PointId, id_of: impl Fn(u64) -> PointId, m: u64) -> CoverTree {
    let mm = m * m;
    let mut tree = CoverTree::singleton(hub, (mm + 1) as i64);
    for i in (1..=mm).rev() {
        let parent = if i % m == 0 || i == mm { hub } else { id_of(i + 1) };
        tree.attach(id_of(i), parent, i as i64).expect("prescribed structure is valid");
    }
    tree
}

/// Builds the single-tree family for any chain parameter `m >= 2`; the
/// public generator enforces the supported range.
pub(crate) fn tall_imbalanced_unchecked(m: u32) -> Result<TallDataset, DatasetError> {
    let m64 = m as u64;
    let mut graph = MetricMultigraph::new();
    let hub = graph.add_vertex(); // r
    let junction = graph.add_vertex(); // q
    graph.add_edge(hub, junction, Dyadic::one())?; // e_0
    let mut edge_ids = Vec::with_capacity(m as usize);
    for k in 1..=m64 {
        edge_ids.push(graph.add_edge(hub, junction, Dyadic::pow2((k * m64 + 2) as i64))?);
    }

    let mut points = vec![GraphPoint::Vertex(hub)];
    points.extend(chain_points(&graph, &edge_ids, m64)?);
    points.push(GraphPoint::Vertex(junction));

    let space = GraphSpace::new(graph, points)?;
    let reference: Vec<PointId> = (0..=(m64 * m64) as usize).collect();
    let query = (m64 * m64 + 1) as usize;
    let tree = prescribed_tree(0, |i| i as PointId, m64);
    Ok(TallDataset { m, space, reference, query, tree })
}

/// Generates the single-tree adversarial dataset.
pub fn generate_tall_imbalanced(m: u32) -> Result<TallDataset, DatasetError> {
    if m < TALL_MIN_M {
        return Err(DatasetError::ParameterTooSmall { m, minimum: TALL_MIN_M });
    }
    tall_imbalanced_unchecked(m)
}

/// Generates the dual-tree adversarial dataset: two chain families mirrored
/// over a shared hub, one hosting the query set and one the reference set.
pub fn generate_bichromatic(m: u32) -> Result<BichromaticDataset, DatasetError> {
    if m < BICHROMATIC_MIN_M {
        return Err(DatasetError::ParameterTooSmall { m, minimum: BICHROMATIC_MIN_M });
    }
    let m64 = m as u64;
    let mm = m64 * m64;
    let mut graph = MetricMultigraph::new();
    let hub = graph.add_vertex(); // r
    let junction = graph.add_vertex(); // q
    graph.add_edge(hub, junction, Dyadic::one())?; // e_0
    let mut query_edges = Vec::with_capacity(m as usize);
    let mut reference_edges = Vec::with_capacity(m as usize);
    for k in 1..=m64 {
        let len = Dyadic::pow2((k * m64 + 2) as i64);
        query_edges.push(graph.add_edge(hub, junction, len.clone())?);
        reference_edges.push(graph.add_edge(hub, junction, len)?);
    }

    let mut points = vec![GraphPoint::Vertex(hub)];
    points.extend(chain_points(&graph, &query_edges, m64)?);
    points.extend(chain_points(&graph, &reference_edges, m64)?);

    let space = GraphSpace::new(graph, points)?;
    let query_set: Vec<PointId> = (0..=mm as usize).collect();
    let mut reference_set: Vec<PointId> = vec![0];
    reference_set.extend((mm as usize + 1)..=(2 * mm) as usize);

    let query_tree = prescribed_tree(0, |i| i as PointId, m64);
    let reference_tree = prescribed_tree(0, |i| (mm + i) as PointId, m64);
    Ok(BichromaticDataset { m, space, query_set, reference_set, query_tree, reference_tree })
}

impl TallDataset {
    pub fn hub(&self) -> PointId {
        0
    }

    /// Closed-form distance between any two dataset points, derived once
    /// from the shortest-path oracle and frozen here. The hub-to-chain
    /// distance depends on whether the chain point is an edge midpoint
    /// (direct route through its own edge) or an interior point (route
    /// through the junction and the unit edge).
    pub fn closed_form_distance(&self, a: PointId, b: PointId) -> Dyadic {
        closed_form(self.m as u64, ChainRole::tall(a, self.m as u64), ChainRole::tall(b, self.m as u64))
    }
}

impl BichromaticDataset {
    pub fn hub(&self) -> PointId {
        0
    }

    /// Closed-form distance, frozen from the shortest-path oracle. Points
    /// on opposite chains always route through the junction.
    pub fn closed_form_distance(&self, a: PointId, b: PointId) -> Dyadic {
        closed_form(
            self.m as u64,
            ChainRole::bichromatic(a, self.m as u64),
            ChainRole::bichromatic(b, self.m as u64),
        )
    }
}

/// Role of a point id inside a chain family.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ChainRole {
    Hub,
    Junction,
    /// (side, chain index); sides distinguish the mirrored chains.
    Chain(u8, u64),
}

impl ChainRole {
    fn tall(id: PointId, m: u64) -> ChainRole {
        let mm = m * m;
        match id as u64 {
            0 => ChainRole::Hub,
            i if i <= mm => ChainRole::Chain(0, i),
            i if i == mm + 1 => ChainRole::Junction,
            _ => panic!("id {id} outside dataset"),
        }
    }

    fn bichromatic(id: PointId, m: u64) -> ChainRole {
        let mm = m * m;
        match id as u64 {
            0 => ChainRole::Hub,
            i if i <= mm => ChainRole::Chain(0, i),
            i if i <= 2 * mm => ChainRole::Chain(1, i - mm),
            _ => panic!("id {id} outside dataset"),
        }
    }
}

fn closed_form(m: u64, a: ChainRole, b: ChainRole) -> Dyadic {
    use ChainRole::*;
    if a == b {
        return Dyadic::zero();
    }
    match (a, b) {
        (Hub, Junction) | (Junction, Hub) => Dyadic::one(),
        (Junction, Chain(_, i)) | (Chain(_, i), Junction) => Dyadic::pow2(i as i64 + 1),
        (Hub, Chain(_, i)) | (Chain(_, i), Hub) => {
            if i % m == 0 {
                // Edge midpoint: the direct half-edge beats the junction
                // route by exactly the unit edge.
                Dyadic::pow2(i as i64 + 1)
            } else {
                Dyadic::pow2(i as i64 + 1).add(&Dyadic::one())
            }
        }
        (Chain(sa, i), Chain(sb, j)) => {
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            if sa == sb && group_of(hi, m) == group_of(lo, m) {
                // Same edge, both between the junction and the midpoint:
                // the direct segment 2^(hi+1) - 2^(lo+1).
                Dyadic::pow2(hi as i64 + 1)
                    .checked_sub(&Dyadic::pow2(lo as i64 + 1))
                    .expect("hi > lo")
            } else {
                // Different edges: through the junction.
                Dyadic::pow2(hi as i64 + 1).add(&Dyadic::pow2(lo as i64 + 1))
            }
        }
        _ => unreachable!("covered above"),
    }
}
