//! Finite metric spaces with stable point identities, plus the basic
//! set operations everything else builds on: neighborhoods, threshold
//! components and diameters.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoarseError, Result};
use crate::graph::UnionFind;

/// Stable identifier of a point. Identity across truncations is always
/// by id, never by coordinates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointId(pub i64);

impl fmt::Debug for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Total symmetric distance function evaluated by point id.
pub trait Metric: Send + Sync {
    fn dist(&self, a: PointId, b: PointId) -> f64;
}

/// Distance matrix over an explicit id list, row-major.
pub struct MatrixMetric {
    ids: Vec<PointId>,
    rows: Vec<f64>,
}

impl MatrixMetric {
    pub fn new(ids: Vec<PointId>, rows: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if rows.len() != n * n {
            return Err(CoarseError::Schema(format!(
                "matrix has {} entries, expected {}",
                rows.len(),
                n * n
            )));
        }
        Ok(MatrixMetric { ids, rows })
    }

    fn pos(&self, p: PointId) -> usize {
        self.ids
            .iter()
            .position(|&q| q == p)
            .unwrap_or_else(|| panic!("{p:?} not in matrix metric"))
    }
}

impl Metric for MatrixMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        let (i, j) = (self.pos(a), self.pos(b));
        self.rows[i * self.ids.len() + j]
    }
}

/// Optional planar coordinates attached to a space. Used by cover
/// heuristics and sub-instance selection; analyses never require them.
pub type CoordFn = Arc<dyn Fn(PointId) -> Option<(i64, i64)> + Send + Sync>;

/// A finite metric space: an ordered set of point ids, a distance
/// function, and a basepoint. Immutable after construction.
#[derive(Clone)]
pub struct Space {
    points: Arc<Vec<PointId>>,
    metric: Arc<dyn Metric>,
    basepoint: PointId,
    coords: Option<CoordFn>,
}

impl Space {
    pub fn new(mut points: Vec<PointId>, metric: Arc<dyn Metric>, basepoint: PointId) -> Result<Self> {
        points.sort_unstable();
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(CoarseError::DuplicatePoint(w[0]));
            }
        }
        if points.binary_search(&basepoint).is_err() {
            return Err(CoarseError::BasepointMissing(basepoint));
        }
        Ok(Space {
            points: Arc::new(points),
            metric,
            basepoint,
            coords: None,
        })
    }

    pub fn with_coords(mut self, coords: CoordFn) -> Self {
        self.coords = Some(coords);
        self
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    pub fn basepoint(&self) -> PointId {
        self.basepoint
    }

    pub fn dist(&self, a: PointId, b: PointId) -> f64 {
        self.metric.dist(a, b)
    }

    pub fn dist_to_base(&self, p: PointId) -> f64 {
        self.metric.dist(self.basepoint, p)
    }

    pub fn metric(&self) -> Arc<dyn Metric> {
        self.metric.clone()
    }

    pub fn coord(&self, p: PointId) -> Option<(i64, i64)> {
        self.coords.as_ref().and_then(|f| f(p))
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    pub fn coord_fn(&self) -> Option<CoordFn> {
        self.coords.clone()
    }

    /// Subspace on the given ids with the induced metric. The basepoint
    /// must survive the restriction.
    pub fn subspace(&self, ids: Vec<PointId>) -> Result<Space> {
        for &p in &ids {
            if !self.contains(p) {
                return Err(CoarseError::MissingPoint(p));
            }
        }
        let mut sub = Space::new(ids, self.metric.clone(), self.basepoint)?;
        sub.coords = self.coords.clone();
        Ok(sub)
    }

    /// Subspace re-anchored at its least point, for solver
    /// sub-instances where the original basepoint need not survive.
    pub fn subspace_anchored(&self, ids: &[PointId]) -> Result<Space> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(CoarseError::EmptyInput("subspace"));
        }
        for &p in &ids {
            if !self.contains(p) {
                return Err(CoarseError::MissingPoint(p));
            }
        }
        let basepoint = ids[0];
        Ok(Space {
            points: Arc::new(ids),
            metric: self.metric.clone(),
            basepoint,
            coords: self.coords.clone(),
        })
    }

    /// Max distance from the basepoint over all points; 0 for the
    /// single-point space.
    pub fn radius(&self) -> f64 {
        self.points
            .iter()
            .map(|&p| self.dist_to_base(p))
            .fold(0.0, f64::max)
    }
}

/// One violated metric axiom together with its witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MetricViolation {
    NonZeroSelfDistance { p: PointId, d: f64 },
    Asymmetry { p: PointId, q: PointId, d_pq: f64, d_qp: f64 },
    NonPositive { p: PointId, q: PointId, d: f64 },
    NonFinite { p: PointId, q: PointId },
    Triangle { p: PointId, q: PointId, r: PointId, direct: f64, via: f64 },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonZeroSelfDistance { p, d } => {
                write!(f, "d({p},{p}) = {d}, expected 0")
            }
            MetricViolation::Asymmetry { p, q, d_pq, d_qp } => {
                write!(f, "d({p},{q}) = {d_pq} but d({q},{p}) = {d_qp}")
            }
            MetricViolation::NonPositive { p, q, d } => {
                write!(f, "d({p},{q}) = {d} for distinct points")
            }
            MetricViolation::NonFinite { p, q } => write!(f, "d({p},{q}) is not finite"),
            MetricViolation::Triangle { p, q, r, direct, via } => {
                write!(f, "d({p},{r}) = {direct} > {via} = d({p},{q}) + d({q},{r})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<MetricViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every metric axiom exhaustively (pairs for symmetry and
/// positivity, triples for the triangle inequality). Violations are
/// report entries, not failures.
pub fn validate_metric(space: &Space) -> ValidationReport {
    let pts = space.points();
    let n = pts.len();
    let mut report = ValidationReport::default();
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = space.dist(pts[i], pts[j]);
        }
    }
    for i in 0..n {
        let dii = d[i * n + i];
        if dii != 0.0 {
            report.violations.push(MetricViolation::NonZeroSelfDistance { p: pts[i], d: dii });
        }
        for j in (i + 1)..n {
            let dij = d[i * n + j];
            let dji = d[j * n + i];
            if !dij.is_finite() || !dji.is_finite() {
                report.violations.push(MetricViolation::NonFinite { p: pts[i], q: pts[j] });
                continue;
            }
            if dij != dji {
                report.violations.push(MetricViolation::Asymmetry {
                    p: pts[i],
                    q: pts[j],
                    d_pq: dij,
                    d_qp: dji,
                });
            }
            if dij <= 0.0 {
                report.violations.push(MetricViolation::NonPositive { p: pts[i], q: pts[j], d: dij });
            }
        }
    }
    // d(p,r) <= d(p,q) + d(q,r) over all triples
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let direct = d[i * n + k];
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = d[i * n + j] + d[j * n + k];
                if direct > via {
                    report.violations.push(MetricViolation::Triangle {
                        p: pts[i],
                        q: pts[j],
                        r: pts[k],
                        direct,
                        via,
                    });
                }
            }
        }
    }
    report
}

/// `{ y : d(y, A) <= R }` inside the space. Contains `A`, monotone in
/// both `R` and `A`.
pub fn neighborhood(space: &Space, a: &[PointId], radius: f64) -> Vec<PointId> {
    if a.is_empty() {
        return Vec::new();
    }
    space
        .points()
        .iter()
        .copied()
        .filter(|&y| a.iter().any(|&x| space.dist(y, x) <= radius))
        .collect()
}

/// Connected components of the graph on `a` with edges `{x,y : d(x,y) <= R}`.
/// Distinct components are pairwise more than `R` apart. Components are
/// returned sorted by least member, members ascending.
pub fn threshold_components(space: &Space, a: &[PointId], radius: f64) -> Vec<Vec<PointId>> {
    let mut ids: Vec<PointId> = a.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let n = ids.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if space.dist(ids[i], ids[j]) <= radius {
                uf.union(i, j);
            }
        }
    }
    let mut comps: Vec<Vec<PointId>> = uf
        .sets()
        .into_iter()
        .map(|set| set.into_iter().map(|i| ids[i]).collect())
        .collect();
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Max pairwise distance; 0 for singletons; `None` for the empty set.
pub fn diameter(space: &Space, a: &[PointId]) -> Option<f64> {
    if a.is_empty() {
        return None;
    }
    let mut best = 0.0f64;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            best = best.max(space.dist(a[i], a[j]));
        }
    }
    Some(best)
}

/// Min distance from `y` to the set `a`; `None` for the empty set.
pub fn dist_to_set(space: &Space, y: PointId, a: &[PointId]) -> Option<f64> {
    a.iter().map(|&x| space.dist(y, x)).min_by(f64::total_cmp)
}
