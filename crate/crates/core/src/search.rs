//! Instrumented single-tree algorithms: insertion and nearest-neighbor
//! descent over a leveled tree.
//!
//! Both walk level by level, maintaining a candidate set that is expanded
//! with children and refiltered by a level-dependent threshold. The
//! iteration jumps directly between levels where some candidate has a
//! non-trivial child; the counters record exactly those executed
//! level-iterations, which is the quantity the worst-case datasets blow up.
//! The levels skipped in between carry no children, but their thresholds
//! still determine where an inserted point attaches, so the unwind logic
//! reconstructs the would-be attach level from the closest candidate.

use std::fmt;

use crate::metric::{Distance, MetricSpace, NeighborAnswer, PointId};
use crate::tree::{CoverTree, TreeError};

/// Candidate-set snapshot taken after one executed level-iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSnapshot {
    /// Level of the recorded candidate set (the iteration ran one above).
    pub level: i64,
    /// Member ids, ascending.
    pub candidates: Vec<PointId>,
}

/// Instrumentation for a single run. Counters only ever increase while a
/// run is in progress; the per-level log is ordered by descending level.
#[derive(Clone, Debug, Default)]
pub struct TraceCounters {
    /// Executed level-iterations (self-recursions).
    pub recursions: u64,
    /// Running max of the filtered candidate set size.
    pub max_candidate_set: usize,
    /// Running max of the child-expanded candidate set size.
    pub candidate_children_max: usize,
    /// Metric evaluations performed.
    pub distance_evals: u64,
    /// Candidate sets per executed level, when enabled.
    pub per_level_log: Option<Vec<LevelSnapshot>>,
}

impl TraceCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Enables per-level candidate recording.
    pub fn with_log() -> Self {
        TraceCounters { per_level_log: Some(Vec::new()), ..Self::default() }
    }

    fn log_level(&mut self, level: i64, candidates: &[(PointId, impl Distance)]) {
        if let Some(log) = &mut self.per_level_log {
            log.push(LevelSnapshot {
                level,
                candidates: candidates.iter().map(|(id, _)| *id).collect(),
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchError {
    /// The point is already in the tree, or lies at distance zero from a
    /// tree point; no level can separate it.
    Duplicate(PointId),
    Tree(TreeError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::Duplicate(p) => write!(f, "duplicate point {p}"),
            SearchError::Tree(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SearchError {}

impl From<TreeError> for SearchError {
    fn from(e: TreeError) -> Self {
        SearchError::Tree(e)
    }
}

fn measured<S: MetricSpace>(
    space: &S,
    a: PointId,
    b: PointId,
    counters: &mut TraceCounters,
) -> S::Dist {
    counters.distance_evals += 1;
    space.distance(a, b)
}

fn min_distance<D: Distance>(set: &[(PointId, D)]) -> Option<&D> {
    set.iter().map(|(_, d)| d).min()
}

/// Merges the entering candidates with freshly expanded children, keeping
/// (id, distance) pairs sorted by id. Children already present are skipped.
fn expand<S: MetricSpace>(
    space: &S,
    query: PointId,
    entering: &[(PointId, S::Dist)],
    expansion: &[PointId],
    counters: &mut TraceCounters,
) -> Vec<(PointId, S::Dist)> {
    let mut out = entering.to_vec();
    for &c in expansion {
        if entering.binary_search_by_key(&c, |(id, _)| *id).is_err() {
            let d = measured(space, query, c, counters);
            let pos = out.partition_point(|(id, _)| *id < c);
            out.insert(pos, (c, d));
        }
    }
    out
}

#[derive(PartialEq, Eq, Clone, Copy, Debug)]
enum Outcome {
    ParentFound,
    NoParent,
}

/// Inserts `p` into the tree, recording every executed self-recursion.
///
/// The tree remains structurally valid afterwards; if `p` is farther from
/// the root than the current top scale, the root level grows first. Exact
/// duplicates (by id or by zero distance) are rejected.
pub fn insert<S: MetricSpace>(
    tree: &mut CoverTree,
    space: &S,
    p: PointId,
    counters: &mut TraceCounters,
) -> Result<(), SearchError> {
    if tree.contains(p) {
        return Err(SearchError::Duplicate(p));
    }
    let root = tree.root();
    let d_root = measured(space, p, root, counters);
    if !d_root.is_zero() && d_root > S::Dist::pow2(tree.root_level()) {
        tree.raise_root_level(d_root.ceil_log2());
    }
    let top = tree.root_level();
    match insert_rec(tree, space, p, vec![(root, d_root)], top, counters)? {
        Outcome::ParentFound => Ok(()),
        Outcome::NoParent => unreachable!("root level covers every point"),
    }
}

fn insert_rec<S: MetricSpace>(
    tree: &mut CoverTree,
    space: &S,
    p: PointId,
    entering: Vec<(PointId, S::Dist)>,
    level: i64,
    counters: &mut TraceCounters,
) -> Result<Outcome, SearchError> {
    let entering_ids: Vec<PointId> = entering.iter().map(|(id, _)| *id).collect();
    let expansion = tree.children_at(&entering_ids, level - 1);
    let executed = !expansion.is_empty();
    if executed {
        counters.recursions += 1;
    }
    let expanded = expand(space, p, &entering, &expansion, counters);
    counters.candidate_children_max = counters.candidate_children_max.max(expanded.len());

    let bound = S::Dist::pow2(level);
    match min_distance(&expanded) {
        Some(dmin) if *dmin <= bound => {}
        _ => return Ok(Outcome::NoParent),
    }
    let filtered: Vec<(PointId, S::Dist)> =
        expanded.into_iter().filter(|(_, d)| *d <= bound).collect();
    if executed {
        counters.max_candidate_set = counters.max_candidate_set.max(filtered.len());
        counters.log_level(level - 1, &filtered);
    }
    let filtered_ids: Vec<PointId> = filtered.iter().map(|(id, _)| *id).collect();
    let dmin_down = min_distance(&filtered).expect("filter keeps the closest candidate").clone();

    let inner = match tree.next_branch_level(&filtered_ids, level - 1) {
        Some(next_level) if dmin_down <= S::Dist::pow2(next_level + 1) => {
            // The skipped levels in (next_level, level-1] only refilter;
            // composing their thresholds is the single cut below.
            let gate = S::Dist::pow2(next_level + 1);
            let carried: Vec<(PointId, S::Dist)> =
                filtered.iter().filter(|(_, d)| *d <= gate).cloned().collect();
            insert_rec(tree, space, p, carried, next_level, counters)?
        }
        // Either nothing branches below, or the skipped levels' shrinking
        // guard would have stopped the descent before the next branch.
        _ => Outcome::NoParent,
    };
    if inner == Outcome::ParentFound {
        return Ok(Outcome::ParentFound);
    }

    // Unwind across the skipped window below this level: the attach level
    // is dictated by the closest candidate that was sent down.
    if dmin_down.is_zero() {
        return Err(SearchError::Duplicate(p));
    }
    let feasible = dmin_down.ceil_log2();
    if feasible <= level - 1 {
        let cap = S::Dist::pow2(feasible);
        let parent = filtered
            .iter()
            .find(|(_, d)| *d <= cap)
            .map(|(id, _)| *id)
            .expect("closest candidate is eligible");
        tree.attach(p, parent, feasible - 1)?;
        return Ok(Outcome::ParentFound);
    }

    // Attach at this level if the entering set allows it.
    let parent = entering.iter().find(|(_, d)| *d <= bound).map(|(id, _)| *id);
    if let Some(parent) = parent {
        tree.attach(p, parent, level - 1)?;
        return Ok(Outcome::ParentFound);
    }
    Ok(Outcome::NoParent)
}

/// Nearest-neighbor descent (k = 1).
///
/// Maintains the candidate set `{q : d(p,q) <= d(p,Q) + 2^i}` across the
/// executed levels and returns the closest surviving candidate, ties broken
/// by ascending id.
pub fn nn_search<S: MetricSpace>(
    tree: &CoverTree,
    space: &S,
    query: PointId,
    counters: &mut TraceCounters,
) -> NeighborAnswer<S::Dist> {
    let root = tree.root();
    let d_root = measured(space, query, root, counters);
    let mut candidates: Vec<(PointId, S::Dist)> = vec![(root, d_root)];
    let mut level = tree.root_level();
    loop {
        let ids: Vec<PointId> = candidates.iter().map(|(id, _)| *id).collect();
        let expansion = tree.children_at(&ids, level - 1);
        let executed = !expansion.is_empty();
        if executed {
            counters.recursions += 1;
        }
        let expanded = expand(space, query, &candidates, &expansion, counters);
        counters.candidate_children_max = counters.candidate_children_max.max(expanded.len());
        let dmin = min_distance(&expanded).expect("candidate set never empties").clone();
        let threshold = dmin.add(&S::Dist::pow2(level));
        candidates = expanded.into_iter().filter(|(_, d)| *d <= threshold).collect();
        if executed {
            counters.max_candidate_set = counters.max_candidate_set.max(candidates.len());
            counters.log_level(level - 1, &candidates);
        }
        let ids: Vec<PointId> = candidates.iter().map(|(id, _)| *id).collect();
        match tree.next_branch_level(&ids, level - 1) {
            Some(next) => level = next,
            None => break,
        }
    }
    let best = candidates
        .iter()
        .min_by(|(ia, da), (ib, db)| da.cmp(db).then(ia.cmp(ib)))
        .expect("candidate set never empties")
        .clone();
    NeighborAnswer { query, neighbors: vec![best] }
}

/// Builds a tree by inserting `points` in order; the first point becomes
/// the root. Counters accumulate across all insertions.
pub fn build_by_insert<S: MetricSpace>(
    space: &S,
    points: &[PointId],
    counters: &mut TraceCounters,
) -> Result<Option<CoverTree>, SearchError> {
    let Some((&first, rest)) = points.split_first() else {
        return Ok(None);
    };
    let mut tree = CoverTree::singleton(first, 0);
    for &p in rest {
        insert(&mut tree, space, p, counters)?;
    }
    Ok(Some(tree))
}
