//! Leveled trees over a point set: storage, the four structural invariants,
//! cover sets, and the explicit (collapsed) view with its depth.
//!
//! The stored form is compressed: each point appears once, at its top level
//! `l(p)`, with a parent link attaching it at level `l(p)+1`. The implicit
//! view, where a node `(p, j)` exists for every `j <= l(p)` as a self-child
//! chain, is provided by accessor logic and never materialized.

use std::collections::BTreeMap;
use std::fmt;

use crate::metric::{Distance, MetricSpace, PointId};

/// Compressed leveled tree.
///
/// Invariants maintained by construction and checkable against a metric via
/// [`verify_invariants`]:
/// - the root's stored level is at least every other point's level;
/// - every non-root point p satisfies `d(p, parent(p)) <= 2^(l(p)+1)`;
/// - at every level i, distinct points of the cover set
///   `C_i = {p : l(p) >= i}` are more than `2^i` apart.
#[derive(Clone, Debug)]
pub struct CoverTree {
    root: PointId,
    root_level: i64,
    levels: BTreeMap<PointId, i64>,
    parents: BTreeMap<PointId, PointId>,
    children: BTreeMap<PointId, Vec<PointId>>,
    /// Levels (of stored children) at which any non-trivial child exists,
    /// with multiplicity.
    child_levels: BTreeMap<i64, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    DuplicatePoint(PointId),
    UnknownPoint(PointId),
    LevelAboveParent { point: PointId, level: i64, parent: PointId, parent_level: i64 },
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::DuplicatePoint(p) => write!(f, "point {p} already in tree"),
            TreeError::UnknownPoint(p) => write!(f, "point {p} not in tree"),
            TreeError::LevelAboveParent { point, level, parent, parent_level } => write!(
                f,
                "point {point} at level {level} cannot attach under {parent} at level {parent_level}"
            ),
        }
    }
}

impl std::error::Error for TreeError {}

impl CoverTree {
    /// Tree holding a single root point. `root_level` is the finite
    /// surrogate for the root's conceptually unbounded level; it grows on
    /// demand during insertion.
    pub fn singleton(root: PointId, root_level: i64) -> Self {
        let mut levels = BTreeMap::new();
        levels.insert(root, root_level);
        CoverTree {
            root,
            root_level,
            levels,
            parents: BTreeMap::new(),
            children: BTreeMap::new(),
            child_levels: BTreeMap::new(),
        }
    }

    pub fn root(&self) -> PointId {
        self.root
    }

    pub fn root_level(&self) -> i64 {
        self.root_level
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.levels.contains_key(&p)
    }

    pub fn level(&self, p: PointId) -> Option<i64> {
        self.levels.get(&p).copied()
    }

    pub fn parent(&self, p: PointId) -> Option<PointId> {
        self.parents.get(&p).copied()
    }

    /// Stored (non-trivial) children of `p`, ascending by id.
    pub fn children(&self, p: PointId) -> &[PointId] {
        self.children.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        self.levels.keys().copied()
    }

    /// Raises the root-level surrogate; used when a new point lies farther
    /// from the root than `2^root_level`.
    pub fn raise_root_level(&mut self, new_level: i64) {
        assert!(new_level >= self.root_level, "root level never shrinks");
        self.root_level = new_level;
        self.levels.insert(self.root, new_level);
    }

    /// Attaches `p` at `level` under `parent`. The caller is responsible
    /// for the metric conditions; structural constraints are enforced here.
    pub fn attach(&mut self, p: PointId, parent: PointId, level: i64) -> Result<(), TreeError> {
        if self.contains(p) {
            return Err(TreeError::DuplicatePoint(p));
        }
        let parent_level = self.level(parent).ok_or(TreeError::UnknownPoint(parent))?;
        if level + 1 > parent_level {
            return Err(TreeError::LevelAboveParent { point: p, level, parent, parent_level });
        }
        self.levels.insert(p, level);
        self.parents.insert(p, parent);
        let siblings = self.children.entry(parent).or_default();
        let pos = siblings.partition_point(|&c| c < p);
        siblings.insert(pos, p);
        *self.child_levels.entry(level).or_insert(0) += 1;
        Ok(())
    }

    /// Cover set `C_i = {p : l(p) >= i}`, ascending by id.
    pub fn cover_set(&self, i: i64) -> Vec<PointId> {
        self.levels.iter().filter(|(_, &l)| l >= i).map(|(&p, _)| p).collect()
    }

    /// Distinct levels of stored children, descending.
    pub fn child_level_index(&self) -> Vec<i64> {
        self.child_levels.keys().rev().copied().collect()
    }

    /// Highest level `<= at_most` at which some member of `points` has a
    /// stored child. Expanding at level `j` means looking at children with
    /// level `j - 1`, so the corresponding iteration level is the returned
    /// child level plus one.
    pub fn next_branch_level(&self, points: &[PointId], at_most: i64) -> Option<i64> {
        let mut best: Option<i64> = None;
        for &p in points {
            for &c in self.children(p) {
                let lc = self.levels[&c];
                if lc + 1 <= at_most && best.map_or(true, |b| lc + 1 > b) {
                    best = Some(lc + 1);
                }
            }
        }
        best
    }

    /// Stored children of `points` whose level is exactly `child_level`,
    /// ascending by id.
    pub fn children_at(&self, points: &[PointId], child_level: i64) -> Vec<PointId> {
        let mut out = Vec::new();
        for &p in points {
            for &c in self.children(p) {
                if self.levels[&c] == child_level {
                    out.push(c);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// One violated structural condition, with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    RootNotHighest { point: PointId, level: i64, root_level: i64 },
    ParentBelowChild { point: PointId, parent: PointId },
    Covering { point: PointId, parent: PointId, distance: String, bound: String },
    Separation { level: i64, a: PointId, b: PointId, distance: String },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::RootNotHighest { point, level, root_level } => {
                write!(f, "point {point} at level {level} above root level {root_level}")
            }
            TreeViolation::ParentBelowChild { point, parent } => {
                write!(f, "parent {parent} stored below child {point}")
            }
            TreeViolation::Covering { point, parent, distance, bound } => {
                write!(f, "covering: d({point},{parent}) = {distance} > {bound}")
            }
            TreeViolation::Separation { level, a, b, distance } => {
                write!(f, "separation at level {level}: d({a},{b}) = {distance} <= 2^{level}")
            }
        }
    }
}

/// Checks the root, node/parent, covering and separation conditions with
/// exact distance comparisons. Violations are data; empty means valid.
///
/// Separation is checked at every level where the cover set changes: the
/// sets are scanned top-down, each level contributing only its newly
/// appearing points, so the whole check costs O(n^2) distance evaluations.
pub fn verify_invariants<S: MetricSpace>(tree: &CoverTree, space: &S) -> Vec<TreeViolation> {
    let mut violations = Vec::new();
    let root = tree.root();
    let root_level = tree.root_level();

    for p in tree.points() {
        let lp = tree.level(p).unwrap();
        if p != root && lp > root_level {
            violations.push(TreeViolation::RootNotHighest { point: p, level: lp, root_level });
        }
        if let Some(parent) = tree.parent(p) {
            let lparent = tree.level(parent).unwrap();
            if lparent < lp + 1 {
                violations.push(TreeViolation::ParentBelowChild { point: p, parent });
            }
            let d = space.distance(p, parent);
            let bound = S::Dist::pow2(lp + 1);
            if d > bound {
                violations.push(TreeViolation::Covering {
                    point: p,
                    parent,
                    distance: d.to_string(),
                    bound: bound.to_string(),
                });
            }
        }
    }

    // Group points by level, then sweep levels descending, keeping the
    // running minimum pairwise distance of the growing cover set.
    let mut by_level: BTreeMap<i64, Vec<PointId>> = BTreeMap::new();
    for p in tree.points() {
        if p != root {
            by_level.entry(tree.level(p).unwrap()).or_default().push(p);
        }
    }
    let mut members: Vec<PointId> = vec![root];
    let mut running_min: Option<(S::Dist, PointId, PointId)> = None;
    for (&level, newcomers) in by_level.iter().rev() {
        for (idx, &p) in newcomers.iter().enumerate() {
            for &q in members.iter().chain(newcomers[..idx].iter()) {
                let d = space.distance(p, q);
                if running_min.as_ref().map_or(true, |(m, _, _)| d < *m) {
                    running_min = Some((d, q.min(p), q.max(p)));
                }
            }
        }
        members.extend_from_slice(newcomers);
        if let Some((min_d, a, b)) = &running_min {
            if *min_d <= S::Dist::pow2(level) {
                violations.push(TreeViolation::Separation {
                    level,
                    a: *a,
                    b: *b,
                    distance: min_d.to_string(),
                });
            }
        }
    }

    violations
}

/// Node of the collapsed (explicit) view: a maximal self-child run of one
/// point, labeled by a representative level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExplicitNode {
    pub point: PointId,
    pub level: i64,
}

/// Per-point run decomposition of the implicit self-child chain.
///
/// A run boundary sits below each level at which the point has a
/// non-trivial child, so a point with children at k distinct levels yields
/// k + 1 explicit nodes (the extra one is the infinite leaf tail).
fn point_runs(tree: &CoverTree, p: PointId) -> Vec<ExplicitNode> {
    let mut child_levels: Vec<i64> = tree
        .children(p)
        .iter()
        .map(|&c| tree.levels[&c] + 1)
        .collect();
    child_levels.sort_unstable_by(|a, b| b.cmp(a));
    child_levels.dedup();

    let top = tree.level(p).unwrap();
    let mut runs = Vec::with_capacity(child_levels.len() + 1);
    if child_levels.is_empty() {
        runs.push(ExplicitNode { point: p, level: top });
        return runs;
    }
    // Top run: spans [k1, top] for a non-root point, [k1, +inf) for the
    // root; labeled by its highest finite representative.
    let k1 = child_levels[0];
    let top_label = if p == tree.root() { k1 } else { top };
    runs.push(ExplicitNode { point: p, level: top_label });
    for t in 1..child_levels.len() {
        runs.push(ExplicitNode { point: p, level: child_levels[t - 1] - 1 });
    }
    // Leaf tail below the lowest child-bearing level.
    runs.push(ExplicitNode { point: p, level: child_levels[child_levels.len() - 1] - 1 });
    runs
}

/// All nodes of the explicit (collapsed) view, sorted by (point, level desc).
pub fn explicit_nodes(tree: &CoverTree) -> Vec<ExplicitNode> {
    let mut nodes = Vec::new();
    for p in tree.points() {
        nodes.extend(point_runs(tree, p));
    }
    nodes.sort_by(|a, b| a.point.cmp(&b.point).then(b.level.cmp(&a.level)));
    nodes
}

/// Maximum number of explicit nodes on any node-to-root path, both ends
/// inclusive. A single-point tree has depth 1.
pub fn explicit_depth(tree: &CoverTree) -> usize {
    // Depth of a run = 1 + depth of its explicit parent. For a point's
    // non-top run the parent is the same point's run one slot up; for the
    // top run it is the parent point's run containing level l(p) + 1.
    let mut run_starts: BTreeMap<PointId, Vec<i64>> = BTreeMap::new();
    let mut runs_per_point: BTreeMap<PointId, usize> = BTreeMap::new();
    for p in tree.points() {
        let mut child_levels: Vec<i64> =
            tree.children(p).iter().map(|&c| tree.levels[&c] + 1).collect();
        child_levels.sort_unstable_by(|a, b| b.cmp(a));
        child_levels.dedup();
        runs_per_point.insert(p, child_levels.len() + 1);
        run_starts.insert(p, child_levels);
    }

    // Run index within a point: 0 = top run, then downward. The run of
    // point pp containing level x has index = number of boundaries above x.
    let run_index_containing = |pp: PointId, x: i64| -> usize {
        let bounds = &run_starts[&pp];
        bounds.partition_point(|&k| k > x)
    };

    let mut memo: BTreeMap<(PointId, usize), usize> = BTreeMap::new();

    fn depth_of(
        tree: &CoverTree,
        memo: &mut BTreeMap<(PointId, usize), usize>,
        run_index_containing: &dyn Fn(PointId, i64) -> usize,
        p: PointId,
        run: usize,
    ) -> usize {
        if let Some(&d) = memo.get(&(p, run)) {
            return d;
        }
        let d = if run > 0 {
            1 + depth_of(tree, memo, run_index_containing, p, run - 1)
        } else if p == tree.root() {
            1
        } else {
            let parent = tree.parent(p).expect("non-root has a parent");
            let attach = tree.level(p).unwrap() + 1;
            let parent_run = run_index_containing(parent, attach);
            1 + depth_of(tree, memo, run_index_containing, parent, parent_run)
        };
        memo.insert((p, run), d);
        d
    }

    let mut max_depth = 0;
    for p in tree.points() {
        let count = runs_per_point[&p];
        for run in 0..count {
            let d = depth_of(tree, &mut memo, &run_index_containing, p, run);
            max_depth = max_depth.max(d);
        }
    }
    max_depth
}

/// Line-oriented serialization `node <point> level <l> parent <point|none>`,
/// one line per point, ascending by id. The root's line carries the
/// root-level surrogate.
pub fn tree_to_text(tree: &CoverTree) -> String {
    let mut out = String::new();
    for p in tree.points() {
        let level = tree.level(p).unwrap();
        match tree.parent(p) {
            Some(parent) => {
                out.push_str(&format!("node {p} level {level} parent {parent}\n"));
            }
            None => out.push_str(&format!("node {p} level {level} parent none\n")),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TreeParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tree parse error on line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for TreeParseError {}

/// Parses the output of [`tree_to_text`]. Children may reference parents on
/// any line, so attachment is resolved after reading the whole input.
pub fn tree_from_text(text: &str) -> Result<CoverTree, TreeParseError> {
    let mut entries: Vec<(PointId, i64, Option<PointId>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| TreeParseError { line: idx + 1, message: message.to_string() };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 6 || tokens[0] != "node" || tokens[2] != "level" || tokens[4] != "parent" {
            return Err(err("expected `node <id> level <l> parent <id|none>`"));
        }
        let point: PointId = tokens[1].parse().map_err(|_| err("bad point id"))?;
        let level: i64 = tokens[3].parse().map_err(|_| err("bad level"))?;
        let parent = match tokens[5] {
            "none" => None,
            other => Some(other.parse().map_err(|_| err("bad parent id"))?),
        };
        entries.push((point, level, parent));
    }
    let roots: Vec<_> = entries.iter().filter(|(_, _, par)| par.is_none()).collect();
    if roots.len() != 1 {
        return Err(TreeParseError { line: 0, message: format!("expected 1 root, found {}", roots.len()) });
    }
    let &&(root, root_level, _) = roots.first().unwrap();
    let mut tree = CoverTree::singleton(root, root_level);
    // Attach in descending level order so parents precede children.
    let mut rest: Vec<_> = entries.iter().filter(|(_, _, par)| par.is_some()).collect();
    rest.sort_by(|a, b| b.1.cmp(&a.1));
    for &&(p, level, parent) in &rest {
        tree.attach(p, parent.unwrap(), level)
            .map_err(|e| TreeParseError { line: 0, message: e.to_string() })?;
    }
    Ok(tree)
}
