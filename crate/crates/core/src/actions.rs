//! Finite group actions by isometries and the orbit space under the
//! Hausdorff metric, together with the quotient map as a `MapSpec`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::maps::MapSpec;
use crate::space::{Metric, PointId, Space};
use crate::tower::Tower;

pub type PermFn = Arc<dyn Fn(PointId) -> PointId + Send + Sync>;

/// A finite group acting on a tower by point permutations. The same
/// global permutation serves every truncation, so restriction
/// compatibility is automatic; whether it actually preserves each
/// truncation is checked by [`verify_action`].
#[derive(Clone)]
pub struct GroupAction {
    tower: Arc<Tower>,
    elements: Vec<PermFn>,
    names: Vec<String>,
    identity: usize,
    /// table[i][j] = index of elements[i] ∘ elements[j]
    table: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(
        tower: Arc<Tower>,
        elements: Vec<PermFn>,
        names: Vec<String>,
        identity: usize,
        table: Vec<Vec<usize>>,
    ) -> GroupAction {
        GroupAction { tower, elements, names, identity, table }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn apply(&self, g: usize, p: PointId) -> PointId {
        (self.elements[g])(p)
    }

    pub fn orbit(&self, p: PointId) -> Vec<PointId> {
        let mut orbit: Vec<PointId> = (0..self.order()).map(|g| self.apply(g, p)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        orbit
    }
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupAction(order {})", self.order())
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum ActionViolation {
    NotPermutation { element: usize, radius: f64, p: PointId, image: PointId },
    NotInjective { element: usize, radius: f64, p: PointId, q: PointId },
    NotIsometry { element: usize, p: PointId, q: PointId, d: f64, d_image: f64 },
    IdentityMoves { p: PointId },
    TableMismatch { i: usize, j: usize, p: PointId },
    TableShape,
    NoInverse { element: usize },
}

impl fmt::Display for ActionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionViolation::NotPermutation { element, radius, p, image } => write!(
                f,
                "element {element} maps {p} to {image} outside truncation({radius})"
            ),
            ActionViolation::NotInjective { element, radius, p, q } => {
                write!(f, "element {element} identifies {p} and {q} in truncation({radius})")
            }
            ActionViolation::NotIsometry { element, p, q, d, d_image } => {
                write!(f, "element {element}: d({p},{q}) = {d} but image distance is {d_image}")
            }
            ActionViolation::IdentityMoves { p } => write!(f, "identity element moves {p}"),
            ActionViolation::TableMismatch { i, j, p } => {
                write!(f, "composition table wrong at ({i},{j}), witnessed by {p}")
            }
            ActionViolation::TableShape => write!(f, "composition table is not square of group order"),
            ActionViolation::NoInverse { element } => write!(f, "element {element} has no inverse in the table"),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ActionReport {
    pub violations: Vec<ActionViolation>,
}

impl ActionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every group-action invariant: each element permutes each
/// declared truncation, acts isometrically, the identity is trivial,
/// and the composition table closes with inverses.
pub fn verify_action(action: &GroupAction) -> ActionReport {
    let mut report = ActionReport::default();
    let k = action.order();
    if action.table.len() != k || action.table.iter().any(|row| row.len() != k) {
        report.violations.push(ActionViolation::TableShape);
        return report;
    }
    let ambient = action.tower.ambient().clone();
    for &p in ambient.points() {
        let q = action.apply(action.identity, p);
        if q != p {
            report.violations.push(ActionViolation::IdentityMoves { p });
        }
    }
    // isometry on the ambient (covers every truncation)
    let pts = ambient.points();
    for g in 0..k {
        let images: Vec<PointId> = pts.iter().map(|&p| action.apply(g, p)).collect();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = ambient.dist(pts[i], pts[j]);
                let di = ambient.dist(images[i], images[j]);
                if d != di {
                    report.violations.push(ActionViolation::NotIsometry {
                        element: g,
                        p: pts[i],
                        q: pts[j],
                        d,
                        d_image: di,
                    });
                }
            }
        }
    }
    // permutation of every declared truncation
    for &r in action.tower.declared_radii() {
        let trunc = match action.tower.truncation(r) {
            Ok(t) => t,
            Err(_) => continue,
        };
        for g in 0..k {
            let mut seen: BTreeMap<PointId, PointId> = BTreeMap::new();
            for &p in trunc.points() {
                let q = action.apply(g, p);
                if !trunc.contains(q) {
                    report.violations.push(ActionViolation::NotPermutation {
                        element: g,
                        radius: r,
                        p,
                        image: q,
                    });
                }
                if let Some(&other) = seen.get(&q) {
                    report.violations.push(ActionViolation::NotInjective {
                        element: g,
                        radius: r,
                        p,
                        q: other,
                    });
                }
                seen.insert(q, p);
            }
        }
    }
    // closure per the table, checked pointwise on the ambient
    for i in 0..k {
        for j in 0..k {
            let composed = action.table[i][j];
            if composed >= k {
                report.violations.push(ActionViolation::TableShape);
                continue;
            }
            for &p in pts {
                if action.apply(i, action.apply(j, p)) != action.apply(composed, p) {
                    report.violations.push(ActionViolation::TableMismatch { i, j, p });
                    break;
                }
            }
        }
        if !action.table[i].contains(&action.identity) {
            report.violations.push(ActionViolation::NoInverse { element: i });
        }
    }
    report
}

/// Hausdorff distance between orbits, evaluated through orbit
/// representatives.
pub struct OrbitMetric {
    inner: Arc<dyn Metric>,
    members: HashMap<PointId, Vec<PointId>>,
}

impl OrbitMetric {
    fn hausdorff(&self, a: &[PointId], b: &[PointId]) -> f64 {
        let directed = |from: &[PointId], to: &[PointId]| -> f64 {
            from.iter()
                .map(|&x| {
                    to.iter()
                        .map(|&y| self.inner.dist(x, y))
                        .min_by(f64::total_cmp)
                        .unwrap()
                })
                .fold(0.0, f64::max)
        };
        directed(a, b).max(directed(b, a))
    }
}

impl Metric for OrbitMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        let oa = &self.members[&a];
        let ob = &self.members[&b];
        self.hausdorff(oa, ob)
    }
}

pub struct OrbitSpace {
    pub tower: Arc<Tower>,
    pub quotient: MapSpec,
}

/// Builds the space of orbits with the Hausdorff metric and the
/// quotient map x -> G·x. Rejects invalid actions. For isometric
/// actions the min-over-group shortcut must agree with the two-sided
/// Hausdorff distance; this is asserted on every ambient pair.
pub fn orbit_space(action: &GroupAction) -> Result<OrbitSpace> {
    let report = verify_action(action);
    if !report.is_valid() {
        return Err(CoarseError::InvalidAction(format!(
            "{} violations, first: {}",
            report.violations.len(),
            report.violations[0]
        )));
    }
    let ambient = action.tower.ambient().clone();
    let mut rep_of: HashMap<PointId, PointId> = HashMap::new();
    let mut members: HashMap<PointId, Vec<PointId>> = HashMap::new();
    for &p in ambient.points() {
        let orbit = action.orbit(p);
        let rep = orbit[0];
        rep_of.insert(p, rep);
        members.entry(rep).or_insert(orbit);
    }
    let metric = Arc::new(OrbitMetric { inner: ambient.metric(), members: members.clone() });

    // isometric shortcut d(Gx, Gy) = min_g d(x, g·y) against full Hausdorff
    let reps: Vec<PointId> = {
        let mut v: Vec<PointId> = members.keys().copied().collect();
        v.sort_unstable();
        v
    };
    for (i, &a) in reps.iter().enumerate() {
        for &b in reps.iter().skip(i) {
            let x = members[&a][0];
            let shortcut = members[&b]
                .iter()
                .map(|&y| ambient.dist(x, y))
                .min_by(f64::total_cmp)
                .unwrap();
            let full = metric.dist(a, b);
            if shortcut != full {
                return Err(CoarseError::InvalidAction(format!(
                    "hausdorff/min-over-group mismatch on orbits {a}, {b}: {full} vs {shortcut}"
                )));
            }
        }
    }

    let base_rep = rep_of[&ambient.basepoint()];
    let mut orbit_ambient = Space::new(reps, metric, base_rep)?;
    if let Some(coords) = ambient.coord_fn() {
        orbit_ambient = orbit_ambient.with_coords(coords);
    }
    let tower = Arc::new(Tower::new(orbit_ambient, action.tower.declared_radii().to_vec())?);
    let rep_of = Arc::new(rep_of);
    let rep_closure = rep_of.clone();
    let quotient = MapSpec::new(
        "quotient",
        action.tower.clone(),
        tower.clone(),
        Arc::new(move |p| rep_closure[&p]),
    );
    Ok(OrbitSpace { tower, quotient })
}
