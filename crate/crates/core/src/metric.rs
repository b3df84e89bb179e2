//! Metric-space abstraction, finite backing stores and the brute-force
//! neighbor oracle every faster algorithm is checked against.

use std::cmp::Ordering;
use std::fmt;

/// Index of a point inside a [`MetricSpace`]. All tie-breaking in the crate
/// is by ascending point index, which keeps every run deterministic.
pub type PointId = usize;

/// Distance values the search algorithms can work with.
///
/// The graph-backed spaces use exact [`crate::dyadic::Dyadic`] values; the
/// random Euclidean test spaces use machine floats wrapped in [`FloatDist`].
/// `Ord` must be a total order consistent with the real-number order.
pub trait Distance: Clone + Ord + Eq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn halve(&self) -> Self;
    fn double(&self) -> Self {
        self.add(self)
    }
    /// Exactly `2^exp` (up to the representation's precision).
    fn pow2(exp: i64) -> Self;
    /// Smallest integer `k` with `pow2(k) >= self`; undefined on zero.
    fn ceil_log2(&self) -> i64;
}

/// A finite collection of points with a distance function between them.
///
/// Implementations are immutable after construction; all methods are
/// read-only and safe to call from multiple threads.
pub trait MetricSpace {
    type Dist: Distance;

    /// Number of points; valid ids are `0..len()`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, a: PointId, b: PointId) -> Self::Dist;
}

/// Finite, non-negative machine float with a total order.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct FloatDist(f64);

impl FloatDist {
    pub fn new(value: f64) -> Self {
        assert!(value.is_finite() && value >= 0.0, "invalid distance {value}");
        FloatDist(value)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Eq for FloatDist {}

impl Ord for FloatDist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("finite by construction")
    }
}

impl PartialOrd for FloatDist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FloatDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Distance for FloatDist {
    fn zero() -> Self {
        FloatDist(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        FloatDist(self.0 + rhs.0)
    }
    fn halve(&self) -> Self {
        FloatDist(self.0 * 0.5)
    }
    fn pow2(exp: i64) -> Self {
        assert!((-1022..=1023).contains(&exp), "pow2 exponent {exp} out of f64 range");
        FloatDist((exp as f64).exp2())
    }
    fn ceil_log2(&self) -> i64 {
        assert!(self.0 > 0.0, "ceil_log2 of zero");
        let mut k = self.0.log2().ceil() as i64;
        while Self::pow2(k) < *self {
            k += 1;
        }
        while k > -1022 && Self::pow2(k - 1) >= *self {
            k -= 1;
        }
        k
    }
}

/// Explicit symmetric distance table, stored as the lower triangle.
#[derive(Clone, Debug)]
pub struct FiniteMetric<D> {
    n: usize,
    lower: Vec<D>,
}

impl<D: Distance> FiniteMetric<D> {
    /// Builds the table from a distance function over `0..n`.
    pub fn from_fn(n: usize, mut dist: impl FnMut(PointId, PointId) -> D) -> Self {
        let mut lower = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for i in 1..n {
            for j in 0..i {
                lower.push(dist(i, j));
            }
        }
        FiniteMetric { n, lower }
    }

    fn slot(&self, i: PointId, j: PointId) -> usize {
        debug_assert!(i > j);
        i * (i - 1) / 2 + j
    }

    /// Overwrites one entry; exists so tests can inject metric faults.
    pub fn set(&mut self, a: PointId, b: PointId, value: D) {
        assert!(a != b, "diagonal is implicitly zero");
        let slot = if a > b { self.slot(a, b) } else { self.slot(b, a) };
        self.lower[slot] = value;
    }
}

impl FiniteMetric<crate::dyadic::Dyadic> {
    /// Points on a line with exact dyadic coordinates; distances are
    /// absolute coordinate differences.
    pub fn from_line(coords: &[crate::dyadic::Dyadic]) -> Self {
        Self::from_fn(coords.len(), |i, j| coords[i].abs_diff(&coords[j]))
    }
}

impl<D: Distance> MetricSpace for FiniteMetric<D> {
    type Dist = D;

    fn len(&self) -> usize {
        self.n
    }

    fn distance(&self, a: PointId, b: PointId) -> D {
        assert!(a < self.n && b < self.n, "point id out of range");
        if a == b {
            return D::zero();
        }
        let slot = if a > b { self.slot(a, b) } else { self.slot(b, a) };
        self.lower[slot].clone()
    }
}

/// Points in R^d under the Euclidean metric, evaluated in f64.
///
/// This is the inexact backend: rounding keeps distances only approximately
/// metric, which is fine for the randomized oracle-equivalence suites but
/// never used for the adversarial graph families.
#[derive(Clone, Debug)]
pub struct EuclideanSpace {
    points: Vec<Vec<f64>>,
}

impl EuclideanSpace {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        if let Some(first) = points.first() {
            let dim = first.len();
            assert!(points.iter().all(|p| p.len() == dim), "mixed dimensions");
        }
        EuclideanSpace { points }
    }

    pub fn coords(&self, id: PointId) -> &[f64] {
        &self.points[id]
    }
}

impl MetricSpace for EuclideanSpace {
    type Dist = FloatDist;

    fn len(&self) -> usize {
        self.points.len()
    }

    fn distance(&self, a: PointId, b: PointId) -> FloatDist {
        let (pa, pb) = (&self.points[a], &self.points[b]);
        let sq: f64 = pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum();
        FloatDist::new(sq.sqrt())
    }
}

/// Result of a k-nearest-neighbor query: neighbors sorted ascending by
/// distance, ties broken by ascending point index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborAnswer<D> {
    pub query: PointId,
    pub neighbors: Vec<(PointId, D)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    /// Fewer eligible candidates than the requested k.
    InsufficientPoints { requested: usize, available: usize },
    EmptySet,
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::InsufficientPoints { requested, available } => {
                write!(f, "insufficient points: requested {requested}, available {available}")
            }
            MetricError::EmptySet => write!(f, "empty point set"),
        }
    }
}

impl std::error::Error for MetricError {}

/// Exhaustive k-nearest-neighbor scan; the oracle the tree searches are
/// measured against.
///
/// With `exclude_self` the query point itself is removed from the candidate
/// list (by id). Deterministic under the (distance, index) tie rule.
pub fn brute_force_knn<S: MetricSpace>(
    space: &S,
    query: PointId,
    candidates: &[PointId],
    k: usize,
    exclude_self: bool,
) -> Result<NeighborAnswer<S::Dist>, MetricError> {
    assert!(k >= 1, "k must be at least 1");
    let mut scored: Vec<(PointId, S::Dist)> = candidates
        .iter()
        .copied()
        .filter(|&c| !(exclude_self && c == query))
        .map(|c| (c, space.distance(query, c)))
        .collect();
    if scored.len() < k {
        return Err(MetricError::InsufficientPoints { requested: k, available: scored.len() });
    }
    scored.sort_by(|(ia, da), (ib, db)| da.cmp(db).then(ia.cmp(ib)));
    scored.truncate(k);
    Ok(NeighborAnswer { query, neighbors: scored })
}

/// One metric-axiom violation found by [`audit_metric`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    NonZeroSelfDistance { point: PointId },
    Asymmetry { a: PointId, b: PointId },
    Triangle { a: PointId, b: PointId, c: PointId },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonZeroSelfDistance { point } => {
                write!(f, "d({point},{point}) != 0")
            }
            MetricViolation::Asymmetry { a, b } => write!(f, "d({a},{b}) != d({b},{a})"),
            MetricViolation::Triangle { a, b, c } => {
                write!(f, "d({a},{c}) > d({a},{b}) + d({b},{c})")
            }
        }
    }
}

pub const DEFAULT_AUDIT_LIMIT: usize = 2000;

/// Checks identity, symmetry and the triangle inequality on every pair and
/// triple. Violations are data, not errors; an empty report means the space
/// is a metric at this scale.
pub fn audit_metric<S: MetricSpace>(space: &S) -> Vec<MetricViolation> {
    audit_metric_with_limit(space, DEFAULT_AUDIT_LIMIT)
}

/// As [`audit_metric`] with an explicit size guard for the cubic scan.
pub fn audit_metric_with_limit<S: MetricSpace>(space: &S, limit: usize) -> Vec<MetricViolation> {
    let n = space.len();
    assert!(n <= limit, "audit limit exceeded: {n} > {limit}");
    let mut violations = Vec::new();
    if n == 0 {
        return violations;
    }

    // Materialize the full table once; the triple scan reuses it.
    let mut table: Vec<Vec<S::Dist>> = Vec::with_capacity(n);
    for a in 0..n {
        table.push((0..n).map(|b| space.distance(a, b)).collect());
    }

    for a in 0..n {
        if !table[a][a].is_zero() {
            violations.push(MetricViolation::NonZeroSelfDistance { point: a });
        }
        for b in (a + 1)..n {
            if table[a][b] != table[b][a] {
                violations.push(MetricViolation::Asymmetry { a, b });
            }
        }
    }

    for a in 0..n {
        for b in 0..n {
            if b == a {
                continue;
            }
            let ab = &table[a][b];
            for c in (a + 1)..n {
                if c == b {
                    continue;
                }
                if table[a][c] > ab.add(&table[b][c]) {
                    violations.push(MetricViolation::Triangle { a, b, c });
                }
            }
        }
    }
    violations
}
