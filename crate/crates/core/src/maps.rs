//! Scale profiles of maps between truncation towers: coarseness,
//! properness, closeness, coarse surjectivity, coarsely n-to-1 and
//! coarsely finite-to-1.
//!
//! Every profile cell records the truncation radius it was computed at
//! and whether its witness touches the outer shell of the truncation;
//! boundary-limited cells are excluded from stabilization verdicts.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::graph::{self, Adjacency, Colorability};
use crate::space::{PointId, Space};
use crate::tower::Tower;

/// Outer shell fraction: witnesses with basepoint distance above this
/// fraction of the truncation radius are considered boundary-limited.
pub const INTERIOR_FRACTION: f64 = 0.9;

/// A truncation-compatible map between towers. Point assignment is one
/// global function of the stable id, so nested truncations agree by
/// construction.
#[derive(Clone)]
pub struct MapSpec {
    pub name: String,
    source: Arc<Tower>,
    target: Arc<Tower>,
    apply: Arc<dyn Fn(PointId) -> PointId + Send + Sync>,
}

impl MapSpec {
    pub fn new(
        name: impl Into<String>,
        source: Arc<Tower>,
        target: Arc<Tower>,
        apply: Arc<dyn Fn(PointId) -> PointId + Send + Sync>,
    ) -> MapSpec {
        MapSpec { name: name.into(), source, target, apply }
    }

    pub fn source(&self) -> &Arc<Tower> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Tower> {
        &self.target
    }

    pub fn apply(&self, p: PointId) -> PointId {
        (self.apply)(p)
    }

    /// Smallest target radius containing the image of `truncation(r)`.
    pub fn image_radius(&self, r: f64) -> Result<f64> {
        let src = self.source.truncation(r)?;
        let tgt = self.target.ambient();
        let mut max = 0.0f64;
        for &x in src.points() {
            let y = self.apply(x);
            if !tgt.contains(y) {
                return Err(CoarseError::MissingPoint(y));
            }
            max = max.max(tgt.dist_to_base(y));
        }
        Ok(max)
    }

    /// Containment check: image of every declared truncation lies in
    /// the target ambient within its own declared capacity.
    pub fn validate(&self) -> Result<()> {
        for &r in self.source.declared_radii() {
            let ir = self.image_radius(r)?;
            if ir > self.target.max_radius() {
                return Err(CoarseError::RadiusOutOfRange(ir, self.target.max_radius()));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MapSpec({})", self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    Coarse,
    Proper,
    NTo1,
    FiniteTo1,
}

/// One profile cell: input scale, truncation radius, output scale.
/// `value = None` marks an empty input at this cell.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSample {
    pub scale_in: f64,
    pub trunc_radius: f64,
    pub value: Option<f64>,
    pub saturated: bool,
}

/// Monotone step data R -> S with per-truncation stability marks.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleProfile {
    pub kind: ProfileKind,
    pub samples: Vec<ProfileSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProfileVerdict {
    /// Output scales stabilize across the last truncation radii.
    Evidence,
    /// Output scale grows beyond every tested bound at these inputs.
    Refuted { at: Vec<f64> },
    Inconclusive,
}

/// Last three radii present, non-saturated, with exactly equal values.
pub(crate) fn stable_last3(cells: &[ProfileSample]) -> bool {
    if cells.len() < 3 {
        return false;
    }
    let tail = &cells[cells.len() - 3..];
    let first = match tail[0].value {
        Some(v) => v,
        None => return false,
    };
    tail.iter().all(|c| !c.saturated && c.value == Some(first))
}

/// Strictly increasing across every tested radius (at least three).
pub(crate) fn strictly_growing(cells: &[ProfileSample]) -> bool {
    if cells.len() < 3 {
        return false;
    }
    cells.windows(2).all(|w| match (w[0].value, w[1].value) {
        (Some(a), Some(b)) => b > a,
        _ => false,
    })
}

fn verdict_from_cells(by_scale: &[(f64, Vec<ProfileSample>)]) -> ProfileVerdict {
    let grown: Vec<f64> = by_scale
        .iter()
        .filter(|(_, cells)| strictly_growing(cells))
        .map(|(s, _)| *s)
        .collect();
    if !grown.is_empty() {
        return ProfileVerdict::Refuted { at: grown };
    }
    if by_scale.iter().all(|(_, cells)| stable_last3(cells)) {
        ProfileVerdict::Evidence
    } else {
        ProfileVerdict::Inconclusive
    }
}

/// S(R) = max distance between image points over source pairs at
/// distance <= R, one cell per R in `r_list`.
pub fn coarseness_profile(f: &MapSpec, r_list: &[f64], r: f64) -> Result<ScaleProfile> {
    let src = f.source.truncation(r)?;
    if src.is_empty() {
        return Err(CoarseError::EmptyInput("empty truncation"));
    }
    let tgt = f.target.ambient();
    let pts = src.points();
    let shell = INTERIOR_FRACTION * r;
    let mut scales: Vec<f64> = r_list.to_vec();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let mut overall = vec![0.0f64; scales.len()];
    let mut interior = vec![0.0f64; scales.len()];
    let mut has_interior = vec![false; scales.len()];
    let base: Vec<f64> = pts.iter().map(|&p| src.dist_to_base(p)).collect();
    let imgs: Vec<PointId> = pts.iter().map(|&p| f.apply(p)).collect();
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let ds = src.dist(pts[i], pts[j]);
            let start = scales.partition_point(|&s| s < ds);
            if start == scales.len() {
                continue;
            }
            let dt = tgt.dist(imgs[i], imgs[j]);
            let inner = base[i] <= shell && base[j] <= shell;
            for k in start..scales.len() {
                overall[k] = overall[k].max(dt);
                if inner {
                    interior[k] = interior[k].max(dt);
                    has_interior[k] = true;
                }
            }
        }
    }
    let samples = scales
        .iter()
        .enumerate()
        .map(|(k, &s)| ProfileSample {
            scale_in: s,
            trunc_radius: r,
            value: Some(overall[k]),
            saturated: !has_interior[k] || interior[k] < overall[k],
        })
        .collect();
    Ok(ScaleProfile { kind: ProfileKind::Coarse, samples })
}

/// R(S) = max basepoint distance of source points whose image lands in
/// the target basepoint ball of radius S.
pub fn properness_profile(f: &MapSpec, s_list: &[f64], r: f64) -> Result<ScaleProfile> {
    let src = f.source.truncation(r)?;
    if src.is_empty() {
        return Err(CoarseError::EmptyInput("empty truncation"));
    }
    let tgt = f.target.ambient();
    let shell = INTERIOR_FRACTION * r;
    let mut scales: Vec<f64> = s_list.to_vec();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let mut overall: Vec<Option<f64>> = vec![None; scales.len()];
    let mut interior: Vec<Option<f64>> = vec![None; scales.len()];
    for &x in src.points() {
        let pullback = tgt.dist_to_base(f.apply(x));
        let reach = src.dist_to_base(x);
        let start = scales.partition_point(|&s| s < pullback);
        for k in start..scales.len() {
            overall[k] = Some(overall[k].map_or(reach, |v: f64| v.max(reach)));
            if reach <= shell {
                interior[k] = Some(interior[k].map_or(reach, |v: f64| v.max(reach)));
            }
        }
    }
    let samples = scales
        .iter()
        .enumerate()
        .map(|(k, &s)| ProfileSample {
            scale_in: s,
            trunc_radius: r,
            value: overall[k],
            saturated: overall[k].is_some() && interior[k] != overall[k],
        })
        .collect();
    Ok(ScaleProfile { kind: ProfileKind::Proper, samples })
}

/// Max over the truncation of the distance between the two images.
/// Zero iff the maps agree there.
pub fn closeness_gap(f: &MapSpec, g: &MapSpec, r: f64) -> Result<f64> {
    if !Arc::ptr_eq(&f.source, &g.source) || !Arc::ptr_eq(&f.target, &g.target) {
        return Err(CoarseError::TowerMismatch("closeness_gap needs equal source and target towers"));
    }
    let src = f.source.truncation(r)?;
    let tgt = f.target.ambient();
    Ok(src
        .points()
        .iter()
        .map(|&x| tgt.dist(f.apply(x), g.apply(x)))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectSample {
    pub trunc_radius: f64,
    pub image_radius: f64,
    /// Max distance from interior-trimmed target points to the image;
    /// `None` when the trimmed interior is empty.
    pub value: Option<f64>,
}

/// Coarse-surjectivity defect on an interior-trimmed target truncation.
/// Trimming excludes target points within 10% of the truncation
/// boundary, where the image legitimately runs out.
pub fn surjectivity_defect(f: &MapSpec, r: f64) -> Result<DefectSample> {
    let src = f.source.truncation(r)?;
    let ir = f.image_radius(r)?;
    let tgt = f.target.truncation(ir.min(f.target.max_radius()))?;
    let mut image: Vec<PointId> = src.points().iter().map(|&x| f.apply(x)).collect();
    image.sort_unstable();
    image.dedup();
    let cutoff = ir * INTERIOR_FRACTION;
    let mut value: Option<f64> = None;
    for &y in tgt.points() {
        if tgt.dist_to_base(y) > cutoff {
            continue;
        }
        let d = image
            .iter()
            .map(|&a| tgt.dist(y, a))
            .min_by(f64::total_cmp)
            .unwrap_or(f64::INFINITY);
        value = Some(value.map_or(d, |v: f64| v.max(d)));
    }
    Ok(DefectSample { trunc_radius: r, image_radius: ir, value })
}

/// Threshold adjacency (edges at distance <= scale) with a coordinate
/// bucket fast path for planar spaces.
pub(crate) fn threshold_adjacency(space: &Space, pts: &[PointId], scale: f64) -> Adjacency {
    let n = pts.len();
    let mut adj: Adjacency = vec![Vec::new(); n];
    let coords: Option<Vec<(i64, i64)>> = if space.has_coords() {
        let cs: Vec<Option<(i64, i64)>> = pts.iter().map(|&p| space.coord(p)).collect();
        if cs.iter().all(|c| c.is_some()) {
            Some(cs.into_iter().map(|c| c.unwrap()).collect())
        } else {
            None
        }
    } else {
        None
    };
    match coords {
        Some(cs) => {
            // metric distance <= scale implies coordinate box distance
            // <= scale for the planar corpus metrics (path >= euclid >= linf)
            let cell = scale.max(1.0).ceil() as i64;
            let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
            for (i, &(x, y)) in cs.iter().enumerate() {
                buckets.entry((x.div_euclid(cell), y.div_euclid(cell))).or_default().push(i);
            }
            for (i, &(x, y)) in cs.iter().enumerate() {
                let (bx, by) = (x.div_euclid(cell), y.div_euclid(cell));
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(cands) = buckets.get(&(bx + dx, by + dy)) {
                            for &j in cands {
                                if j > i && space.dist(pts[i], pts[j]) <= scale {
                                    adj[i].push(j);
                                    adj[j].push(i);
                                }
                            }
                        }
                    }
                }
            }
            for v in &mut adj {
                v.sort_unstable();
            }
        }
        None => {
            for i in 0..n {
                for j in (i + 1)..n {
                    if space.dist(pts[i], pts[j]) <= scale {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
    }
    adj
}

/// A maximal diameter-<=R subset of the target, its fiber, and the
/// minimal split threshold with a coloring certificate.
#[derive(Debug, Clone, Serialize)]
pub struct FiberCertificate {
    pub clique: Vec<PointId>,
    pub fiber: Vec<PointId>,
    pub s: f64,
    pub parts: Vec<Vec<PointId>>,
    pub saturated: bool,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NToOneCell {
    pub n: usize,
    pub scale_in: f64,
    pub trunc_radius: f64,
    /// Minimal S working for every fiber; `None` when every fiber is empty.
    pub s: Option<f64>,
    pub saturated: bool,
    pub exact: bool,
    pub certificates: Vec<FiberCertificate>,
}

/// Fibers of the maximal diameter-<=R subsets of the visible target
/// truncation, shared by the n-to-1 and finite-to-1 operations.
struct FiberFamily {
    cliques: Vec<Vec<PointId>>,
    fibers: Vec<Vec<PointId>>,
    saturated: Vec<bool>,
}

fn fiber_family(f: &MapSpec, big_r: f64, r: f64) -> Result<FiberFamily> {
    let src = f.source.truncation(r)?;
    let ir = f.image_radius(r)?;
    let tgt = f.target.truncation(ir.min(f.target.max_radius()))?;
    let tpts: Vec<PointId> = tgt.points().to_vec();
    let mut preimages: HashMap<PointId, Vec<PointId>> = HashMap::new();
    for &x in src.points() {
        preimages.entry(f.apply(x)).or_default().push(x);
    }
    let adj = threshold_adjacency(&tgt, &tpts, big_r);
    let cliques_idx = graph::maximal_cliques(&adj);
    let shell = INTERIOR_FRACTION * r;
    let mut cliques = Vec::new();
    let mut fibers = Vec::new();
    let mut saturated = Vec::new();
    for cl in cliques_idx {
        let clique: Vec<PointId> = cl.iter().map(|&i| tpts[i]).collect();
        let mut fiber: Vec<PointId> = clique
            .iter()
            .filter_map(|y| preimages.get(y))
            .flatten()
            .copied()
            .collect();
        if fiber.is_empty() {
            continue;
        }
        fiber.sort_unstable();
        let sat = fiber.iter().any(|&x| src.dist_to_base(x) > shell);
        cliques.push(clique);
        fibers.push(fiber);
        saturated.push(sat);
    }
    Ok(FiberFamily { cliques, fibers, saturated })
}

/// Minimal s such that the fiber splits into at most `n` parts of
/// diameter <= s, via binary search over the intra-fiber distance
/// multiset; n-colorability of the conflict graph is monotone in s.
fn minimal_split(space: &Space, fiber: &[PointId], n: usize) -> (f64, Vec<Vec<PointId>>, bool) {
    let m = fiber.len();
    if m <= 1 {
        return (0.0, vec![fiber.to_vec()], true);
    }
    let mut dists = vec![0.0f64; m * m];
    let mut cands: Vec<f64> = vec![0.0];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = space.dist(fiber[i], fiber[j]);
            dists[i * m + j] = d;
            dists[j * m + i] = d;
            cands.push(d);
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let conflict = |s: f64| -> Adjacency {
        let mut adj: Adjacency = vec![Vec::new(); m];
        for i in 0..m {
            for j in (i + 1)..m {
                if dists[i * m + j] > s {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        adj
    };
    let exact_ok = n <= graph::EXACT_COLOR_MAX_COLORS && m <= graph::EXACT_COLOR_MAX_VERTICES || n <= 2;
    let mut lo = 0usize;
    let mut hi = cands.len() - 1; // max distance: conflict graph empty, always feasible
    let mut best: Option<Vec<u8>> = None;
    let mut exact = true;
    if exact_ok {
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match graph::colorable(&conflict(cands[mid]), n) {
                Colorability::Yes(c) => {
                    best = Some(c);
                    hi = mid;
                }
                Colorability::No => lo = mid + 1,
                Colorability::Unknown { .. } => unreachable!("exact range"),
            }
        }
    } else {
        // bracket with greedy feasibility; never silently approximate
        exact = false;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let adj = conflict(cands[mid]);
            let (colors, used) = graph::greedy_coloring(&adj);
            if used <= n {
                best = Some(colors);
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
    }
    let s = cands[hi];
    let coloring = match best {
        Some(c) => c,
        None => match graph::colorable(&conflict(s), n) {
            Colorability::Yes(c) => c,
            _ => vec![0; m], // n >= 1 and empty conflict graph at max distance
        },
    };
    let mut parts: Vec<Vec<PointId>> = vec![Vec::new(); n];
    for (i, &c) in coloring.iter().enumerate() {
        parts[c as usize].push(fiber[i]);
    }
    parts.retain(|p| !p.is_empty());
    (s, parts, exact)
}

/// Independent certificate check: within each part all pairwise
/// distances are <= s and the parts cover the fiber with at most n pieces.
pub fn check_split_certificate(space: &Space, cert: &FiberCertificate, n: usize) -> bool {
    if cert.parts.len() > n {
        return false;
    }
    let mut covered: Vec<PointId> = cert.parts.iter().flatten().copied().collect();
    covered.sort_unstable();
    if covered != cert.fiber {
        return false;
    }
    cert.parts.iter().all(|part| {
        part.iter()
            .all(|&a| part.iter().all(|&b| space.dist(a, b) <= cert.s))
    })
}

/// Minimal S such that the preimage of every subset of the target with
/// diameter at most R splits into at most n parts of diameter at most
/// S, with a per-subset coloring certificate. Only maximal subsets
/// (cliques of the threshold graph) constrain the optimum.
pub fn n_to_1_threshold(f: &MapSpec, n: usize, big_r: f64, r: f64) -> Result<NToOneCell> {
    if n == 0 {
        return Err(CoarseError::InvalidParam("n must be at least 1".into()));
    }
    let src = f.source.truncation(r)?;
    let fam = fiber_family(f, big_r, r)?;
    let mut certificates = Vec::with_capacity(fam.cliques.len());
    let mut s_all: Option<f64> = None;
    let mut s_interior: Option<f64> = None;
    let mut exact = true;
    for i in 0..fam.cliques.len() {
        let (s, parts, ex) = minimal_split(&src, &fam.fibers[i], n);
        exact &= ex;
        s_all = Some(s_all.map_or(s, |v: f64| v.max(s)));
        if !fam.saturated[i] {
            s_interior = Some(s_interior.map_or(s, |v: f64| v.max(s)));
        }
        certificates.push(FiberCertificate {
            clique: fam.cliques[i].clone(),
            fiber: fam.fibers[i].clone(),
            s,
            parts,
            saturated: fam.saturated[i],
            exact: ex,
        });
    }
    let saturated = match (s_all, s_interior) {
        (Some(a), Some(i)) => i < a,
        (Some(_), None) => true,
        _ => false,
    };
    Ok(NToOneCell {
        n,
        scale_in: big_r,
        trunc_radius: r,
        s: s_all,
        saturated,
        exact,
        certificates,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NToOneProfile {
    pub n: usize,
    pub profile: ScaleProfile,
    pub verdict: ProfileVerdict,
}

/// Tabulates [`n_to_1_threshold`] across R and truncation radii.
/// Evidence means S stabilized (exact equality, non-saturated) on the
/// last three radii for every R; refuted means S grew through every
/// tested radius for some R.
pub fn n_to_1_profile(f: &MapSpec, n: usize, r_list: &[f64], radii: &[f64]) -> Result<NToOneProfile> {
    let mut by_scale: Vec<(f64, Vec<ProfileSample>)> = Vec::new();
    let mut samples = Vec::new();
    for &big_r in r_list {
        let mut cells = Vec::new();
        for &r in radii {
            let cell = n_to_1_threshold(f, n, big_r, r)?;
            let sample = ProfileSample {
                scale_in: big_r,
                trunc_radius: r,
                value: cell.s,
                saturated: cell.saturated,
            };
            cells.push(sample.clone());
            samples.push(sample);
        }
        by_scale.push((big_r, cells));
    }
    let verdict = verdict_from_cells(&by_scale);
    Ok(NToOneProfile {
        n,
        profile: ScaleProfile { kind: ProfileKind::NTo1, samples },
        verdict,
    })
}

/// Piece count bracket for one (S, truncation) cell of the
/// finite-to-1 table; `lo == hi` when the chromatic number was
/// computed exactly.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteCell {
    pub s: f64,
    pub trunc_radius: f64,
    pub m_lo: usize,
    pub m_hi: usize,
    pub saturated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteTable {
    pub big_r: f64,
    pub cells: Vec<FiniteCell>,
    pub verdict: ProfileVerdict,
}

/// m(S) = max over maximal diameter-<=R target subsets of the chromatic
/// number of the fiber conflict graph at threshold S.
pub fn finite_to_1_profile(f: &MapSpec, big_r: f64, r: f64, s_grid: &[f64]) -> Result<Vec<FiniteCell>> {
    if s_grid.is_empty() {
        return Err(CoarseError::InvalidParam("empty S grid".into()));
    }
    let src = f.source.truncation(r)?;
    let fam = fiber_family(f, big_r, r)?;
    let mut out = Vec::new();
    for &s in s_grid {
        let mut m_lo = 0usize;
        let mut m_hi = 0usize;
        let mut m_interior = 0usize;
        let mut any_interior = false;
        for i in 0..fam.fibers.len() {
            let fiber = &fam.fibers[i];
            let m = fiber.len();
            let mut adj: Adjacency = vec![Vec::new(); m];
            for a in 0..m {
                for b in (a + 1)..m {
                    if src.dist(fiber[a], fiber[b]) > s {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                }
            }
            let (lo, hi) = graph::chromatic_bounds(&adj);
            m_lo = m_lo.max(lo);
            m_hi = m_hi.max(hi);
            if !fam.saturated[i] {
                any_interior = true;
                m_interior = m_interior.max(hi);
            }
        }
        out.push(FiniteCell {
            s,
            trunc_radius: r,
            m_lo,
            m_hi,
            saturated: !any_interior || m_interior < m_hi,
        });
    }
    Ok(out)
}

/// The finite-to-1 table across truncations. Evidence iff some S cell
/// holds an exact m that stabilizes over the last three radii.
pub fn finite_to_1_table(f: &MapSpec, big_r: f64, s_grid: &[f64], radii: &[f64]) -> Result<FiniteTable> {
    let mut cells = Vec::new();
    for &r in radii {
        cells.extend(finite_to_1_profile(f, big_r, r, s_grid)?);
    }
    let mut evidence = false;
    for &s in s_grid {
        let col: Vec<&FiniteCell> = cells.iter().filter(|c| c.s == s).collect();
        if col.len() < 3 {
            continue;
        }
        let tail = &col[col.len() - 3..];
        let exact = tail.iter().all(|c| c.m_lo == c.m_hi && !c.saturated);
        let stable = tail.windows(2).all(|w| w[0].m_hi == w[1].m_hi);
        if exact && stable {
            evidence = true;
            break;
        }
    }
    let verdict = if evidence { ProfileVerdict::Evidence } else { ProfileVerdict::Inconclusive };
    Ok(FiniteTable { big_r, cells, verdict })
}

/// Coarseness table across radii with the stabilization verdict.
pub fn coarseness_table(f: &MapSpec, r_list: &[f64], radii: &[f64]) -> Result<(ScaleProfile, ProfileVerdict)> {
    table_over_radii(ProfileKind::Coarse, r_list, radii, |scales, r| {
        coarseness_profile(f, scales, r).map(|p| p.samples)
    })
}

/// Properness table across radii. Stable cells are properness
/// evidence; strict growth in the truncation radius at fixed S is the
/// accumulating-fiber refutation.
pub fn properness_table(f: &MapSpec, s_list: &[f64], radii: &[f64]) -> Result<(ScaleProfile, ProfileVerdict)> {
    table_over_radii(ProfileKind::Proper, s_list, radii, |scales, r| {
        properness_profile(f, scales, r).map(|p| p.samples)
    })
}

fn table_over_radii(
    kind: ProfileKind,
    scales: &[f64],
    radii: &[f64],
    mut cell: impl FnMut(&[f64], f64) -> Result<Vec<ProfileSample>>,
) -> Result<(ScaleProfile, ProfileVerdict)> {
    let mut per_radius: Vec<Vec<ProfileSample>> = Vec::new();
    for &r in radii {
        per_radius.push(cell(scales, r)?);
    }
    let mut sorted_scales: Vec<f64> = scales.to_vec();
    sorted_scales.sort_by(f64::total_cmp);
    sorted_scales.dedup();
    let mut samples = Vec::new();
    let mut by_scale = Vec::new();
    for (k, &s) in sorted_scales.iter().enumerate() {
        let cells: Vec<ProfileSample> = per_radius.iter().map(|row| row[k].clone()).collect();
        samples.extend(cells.clone());
        by_scale.push((s, cells));
    }
    let verdict = verdict_from_cells(&by_scale);
    Ok((ScaleProfile { kind, samples }, verdict))
}
