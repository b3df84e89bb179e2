//! Simultaneous descent over a query tree and a reference tree, answering
//! all first nearest neighbors in one traversal.
//!
//! The recursion is a faithful rendering of the published paired-tree
//! routine, split into its three blocks: final candidates (the reference
//! side is exhausted), reference expansion (the query node sits below the
//! reference level, so the reference set expands and refilters), and query
//! expansion (the query node splits into its children, including the
//! implicit self-child one level down). Defects of the routine are kept on
//! purpose: with identical query and reference sets every point reports
//! itself as its own neighbor. The optional self-exclusion switch removes
//! zero-distance candidates from the distance bounds and the final argmin,
//! which is the minimal repair that makes the traversal comparable against
//! a self-excluding brute-force scan.

use std::collections::BTreeMap;

use crate::metric::{Distance, MetricSpace, NeighborAnswer, PointId};
use crate::tree::CoverTree;

/// Which block of the routine executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    FinalCandidates,
    ReferenceExpansion,
    QueryExpansion,
}

impl BlockKind {
    pub fn label(self) -> &'static str {
        match self {
            BlockKind::FinalCandidates => "final",
            BlockKind::ReferenceExpansion => "ref-expand",
            BlockKind::QueryExpansion => "query-expand",
        }
    }
}

/// One block execution: the reference level `i`, the query level `j`, and
/// the candidate-set size at that moment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockEvent {
    pub kind: BlockKind,
    pub i: i64,
    pub j: i64,
    pub candidates: usize,
}

/// Per-run instrumentation for the paired-tree traversal.
#[derive(Clone, Debug, Default)]
pub struct DualTreeBlocks {
    /// Executions of the final-candidates block.
    pub final_candidates: u64,
    /// Executions of the reference-expansion block.
    pub reference_expansions: u64,
    /// Executions of the query-expansion block.
    pub query_expansions: u64,
    /// Reference expansions attributed to the query point that drove them.
    pub per_query_reference_expansions: BTreeMap<PointId, u64>,
    /// Running max of the reference candidate set |R_i|.
    pub max_reference_set: usize,
    /// Running max of the child-expanded reference set |C(R_i)|.
    pub max_reference_children: usize,
    /// Metric evaluations.
    pub distance_evals: u64,
    /// Raw block log, when enabled; the descend history from which the
    /// bichromaticity degree can be computed under either reading.
    pub event_log: Option<Vec<BlockEvent>>,
}

impl DualTreeBlocks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_log() -> Self {
        DualTreeBlocks { event_log: Some(Vec::new()), ..Self::default() }
    }

    fn record(&mut self, kind: BlockKind, i: i64, j: i64, candidates: usize) {
        if let Some(log) = &mut self.event_log {
            log.push(BlockEvent { kind, i, j, candidates });
        }
    }
}

/// Maximum run of query expansions between reference expansions, computed
/// from a block log. `include_tails` decides whether the runs before the
/// first and after the last reference expansion count; the published
/// definition admits both readings, so both are exposed.
pub fn bichromaticity_degree(events: &[BlockEvent], include_tails: bool) -> u64 {
    let mut best = 0u64;
    let mut current = 0u64;
    let mut seen_reference = false;
    for e in events {
        match e.kind {
            BlockKind::QueryExpansion => current += 1,
            BlockKind::ReferenceExpansion => {
                if seen_reference || include_tails {
                    best = best.max(current);
                }
                seen_reference = true;
                current = 0;
            }
            BlockKind::FinalCandidates => {}
        }
    }
    if include_tails {
        best = best.max(current);
    }
    best
}

struct DualRun<'a, S: MetricSpace> {
    space: &'a S,
    query_tree: &'a CoverTree,
    reference_tree: &'a CoverTree,
    exclude_self: bool,
    answers: BTreeMap<PointId, NeighborAnswer<S::Dist>>,
}

impl<'a, S: MetricSpace> DualRun<'a, S> {
    fn distance(&self, blocks: &mut DualTreeBlocks, a: PointId, b: PointId) -> S::Dist {
        blocks.distance_evals += 1;
        self.space.distance(a, b)
    }

    /// Distance used for bounds and the final argmin: zero-distance
    /// candidates are ignored under self-exclusion.
    fn eligible(&self, d: &S::Dist) -> bool {
        !(self.exclude_self && d.is_zero())
    }

    fn reference_exhausted(&self, reference_set: &[PointId], i: i64) -> bool {
        reference_set.iter().all(|&r| {
            self.reference_tree
                .children(r)
                .iter()
                .all(|&c| self.reference_tree.level(c).unwrap() >= i)
        })
    }

    fn query_exhausted(&self, q: PointId, j: i64) -> bool {
        self.query_tree
            .children(q)
            .iter()
            .all(|&c| self.query_tree.level(c).unwrap() >= j)
    }

    fn recurse(
        &mut self,
        blocks: &mut DualTreeBlocks,
        i: i64,
        j: i64,
        q: PointId,
        reference_set: Vec<PointId>,
    ) {
        blocks.max_reference_set = blocks.max_reference_set.max(reference_set.len());
        let ref_done = self.reference_exhausted(&reference_set, i);
        let query_done = self.query_exhausted(q, j);

        if ref_done && query_done {
            // Final-candidates block: the implicit descent below this point
            // only refilters toward the argmin, so the answer is read off
            // the surviving set. Under self-exclusion the zero-distance
            // candidate is skipped.
            blocks.final_candidates += 1;
            blocks.record(BlockKind::FinalCandidates, i, j, reference_set.len());
            let mut best: Option<(PointId, S::Dist)> = None;
            for &r in &reference_set {
                let d = self.distance(blocks, q, r);
                if !self.eligible(&d) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bid, bd)) => d < *bd || (d == *bd && r < *bid),
                };
                if better {
                    best = Some((r, d));
                }
            }
            let neighbors = best.into_iter().collect();
            let previous = self.answers.insert(q, NeighborAnswer { query: q, neighbors });
            debug_assert!(previous.is_none(), "query {q} finalized twice");
            return;
        }

        if j < i {
            // Reference expansion: children (incl. implicit self-children)
            // of the reference candidates, refiltered around the query
            // node's distance bound.
            blocks.reference_expansions += 1;
            *blocks.per_query_reference_expansions.entry(q).or_insert(0) += 1;
            let mut expanded = reference_set.clone();
            for &r in &reference_set {
                for &c in self.reference_tree.children(r) {
                    if self.reference_tree.level(c).unwrap() == i - 1 {
                        expanded.push(c);
                    }
                }
            }
            expanded.sort_unstable();
            expanded.dedup();
            blocks.max_reference_children = blocks.max_reference_children.max(expanded.len());
            blocks.record(BlockKind::ReferenceExpansion, i, j, expanded.len());

            let with_d: Vec<(PointId, S::Dist)> =
                expanded.iter().map(|&r| (r, self.distance(blocks, q, r))).collect();
            let bound = with_d.iter().filter(|(_, d)| self.eligible(d)).map(|(_, d)| d).min();
            let next: Vec<PointId> = match bound {
                Some(dmin) => {
                    let threshold =
                        dmin.add(&S::Dist::pow2(i)).add(&S::Dist::pow2(j + 2));
                    with_d
                        .iter()
                        .filter(|(_, d)| *d <= threshold)
                        .map(|(r, _)| *r)
                        .collect()
                }
                // Only zero-distance candidates remain under exclusion:
                // no finite bound, keep everything.
                None => expanded,
            };
            self.recurse(blocks, i - 1, j, q, next);
            return;
        }

        // Query expansion: stored children one level down plus the implicit
        // self-child.
        blocks.query_expansions += 1;
        blocks.record(BlockKind::QueryExpansion, i, j, reference_set.len());
        for &c in self.query_tree.children(q) {
            if self.query_tree.level(c).unwrap() == j - 1 {
                self.recurse(blocks, i, j - 1, c, reference_set.clone());
            }
        }
        self.recurse(blocks, i, j - 1, q, reference_set);
    }
}

/// Runs the paired-tree all-nearest-neighbor traversal.
///
/// Returns one answer per query point; a neighbor list may be empty when
/// self-exclusion removes every candidate (a single shared point). With
/// `exclude_self = false` and identical trees, every point reports itself:
/// the routine's documented defect, preserved deliberately.
pub fn find_all_nn<S: MetricSpace>(
    query_tree: &CoverTree,
    reference_tree: &CoverTree,
    space: &S,
    exclude_self: bool,
    blocks: &mut DualTreeBlocks,
) -> BTreeMap<PointId, NeighborAnswer<S::Dist>> {
    let mut run = DualRun {
        space,
        query_tree,
        reference_tree,
        exclude_self,
        answers: BTreeMap::new(),
    };
    run.recurse(
        blocks,
        reference_tree.root_level(),
        query_tree.root_level(),
        query_tree.root(),
        vec![reference_tree.root()],
    );
    run.answers
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_bichromatic, generate_tall_imbalanced};
    use crate::dyadic::Dyadic;
    use crate::metric::{brute_force_knn, FiniteMetric};

    #[test]
    fn single_shared_point_is_one_final_block() {
        let space = FiniteMetric::from_line(&[Dyadic::from_u64(5)]);
        let tree = CoverTree::singleton(0, 0);
        let mut blocks = DualTreeBlocks::new();
        let answers = find_all_nn(&tree, &tree, &space, false, &mut blocks);
        assert_eq!(blocks.final_candidates, 1);
        assert_eq!(blocks.reference_expansions, 0);
        assert_eq!(answers[&0].neighbors, vec![(0, Dyadic::zero())]);
        // With exclusion there is nothing left to answer with.
        let mut blocks = DualTreeBlocks::new();
        let answers = find_all_nn(&tree, &tree, &space, true, &mut blocks);
        assert!(answers[&0].neighbors.is_empty());
    }

    #[test]
    fn identical_trees_return_trivial_self_neighbors() {
        let ds = generate_tall_imbalanced(11).unwrap();
        let mut blocks = DualTreeBlocks::new();
        let answers = find_all_nn(&ds.tree, &ds.tree, &ds.space, false, &mut blocks);
        assert_eq!(answers.len(), 122);
        for (&q, answer) in &answers {
            assert_eq!(answer.neighbors.len(), 1, "query {q}");
            let (nn, d) = &answer.neighbors[0];
            assert_eq!(*nn, q, "query {q} must find itself");
            assert!(d.is_zero());
        }
        assert_eq!(
            blocks.reference_expansions,
            blocks.per_query_reference_expansions.values().sum::<u64>()
        );
    }

    #[test]
    fn bichromatic_counts_follow_the_chain_lengths() {
        let ds = generate_bichromatic(12).unwrap();
        let mut blocks = DualTreeBlocks::new();
        let answers =
            find_all_nn(&ds.query_tree, &ds.reference_tree, &ds.space, false, &mut blocks);
        let mm = 144u64;
        // Every reference set stays tiny while the expansions pile up.
        assert!(blocks.max_reference_set <= 3, "max |R_i| = {}", blocks.max_reference_set);
        assert!(blocks.max_reference_children <= 4);
        // The chain point of level t performs t reference expansions; the
        // shared hub runs the full ladder.
        assert_eq!(blocks.per_query_reference_expansions[&7], 7);
        assert_eq!(blocks.per_query_reference_expansions[&100], 100);
        assert_eq!(blocks.per_query_reference_expansions[&0], mm);
        let total: u64 = (1..=mm).sum::<u64>() + mm;
        assert_eq!(blocks.reference_expansions, total);
        assert!(blocks.reference_expansions >= mm * (mm - 1) / 2);
        // The hub (shared between both sets) finds itself; every chain
        // query point q_t finds the hub, its true nearest reference (its
        // own edge's far half for midpoints, the junction route otherwise).
        assert_eq!(answers[&0].neighbors[0].0, 0);
        for t in [1usize, 5, 77, 144] {
            let (nn, d) = &answers[&t].neighbors[0];
            assert_eq!(*nn, 0, "q_{t} expects the hub");
            assert_eq!(*d, ds.closed_form_distance(t, 0));
        }
    }

    #[test]
    fn self_excluding_run_matches_brute_force_on_a_line() {
        let coords: Vec<Dyadic> =
            [0u64, 3, 4, 11, 16, 40, 41, 97].iter().map(|&v| Dyadic::from_u64(v)).collect();
        let space = FiniteMetric::from_line(&coords);
        let ids: Vec<PointId> = (0..coords.len()).collect();
        let mut counters = crate::search::TraceCounters::new();
        let tree = crate::search::build_by_insert(&space, &ids, &mut counters)
            .unwrap()
            .unwrap();
        let mut blocks = DualTreeBlocks::new();
        let answers = find_all_nn(&tree, &tree, &space, true, &mut blocks);
        for &q in &ids {
            let want = brute_force_knn(&space, q, &ids, 1, true).unwrap();
            let got = &answers[&q];
            assert_eq!(got.neighbors[0].1, want.neighbors[0].1, "query {q}");
            assert_eq!(got.neighbors[0].0, want.neighbors[0].0, "query {q}");
        }
    }

    #[test]
    fn kappa_readings_from_the_event_log() {
        let events = vec![
            BlockEvent { kind: BlockKind::QueryExpansion, i: 5, j: 5, candidates: 1 },
            BlockEvent { kind: BlockKind::ReferenceExpansion, i: 5, j: 4, candidates: 2 },
            BlockEvent { kind: BlockKind::QueryExpansion, i: 4, j: 4, candidates: 2 },
            BlockEvent { kind: BlockKind::QueryExpansion, i: 4, j: 3, candidates: 2 },
            BlockEvent { kind: BlockKind::ReferenceExpansion, i: 4, j: 2, candidates: 3 },
            BlockEvent { kind: BlockKind::QueryExpansion, i: 3, j: 2, candidates: 1 },
        ];
        assert_eq!(bichromaticity_degree(&events, false), 2);
        assert_eq!(bichromaticity_degree(&events, true), 2);
        let head_heavy = &events[..1];
        assert_eq!(bichromaticity_degree(head_heavy, false), 0);
        assert_eq!(bichromaticity_degree(head_heavy, true), 1);
    }
}
