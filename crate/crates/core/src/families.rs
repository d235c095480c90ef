//! Gradual disjointness and divergence of finite families, the
//! countable prefix rule, and the witness search: k families that stay
//! gradually disjoint while their images share a non-divergent
//! intersection.

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::maps::{threshold_adjacency, MapSpec, INTERIOR_FRACTION};
use crate::space::{neighborhood, PointId, Space};
use crate::tower::Tower;

/// A subset specification evaluated per truncation; identity by stable
/// point ids.
#[derive(Clone)]
pub enum FamilySpec {
    Explicit { name: String, points: Vec<PointId> },
    Predicate { name: String, pred: Arc<dyn Fn(PointId) -> bool + Send + Sync> },
}

impl FamilySpec {
    pub fn explicit(name: impl Into<String>, mut points: Vec<PointId>) -> FamilySpec {
        points.sort_unstable();
        points.dedup();
        FamilySpec::Explicit { name: name.into(), points }
    }

    pub fn name(&self) -> &str {
        match self {
            FamilySpec::Explicit { name, .. } => name,
            FamilySpec::Predicate { name, .. } => name,
        }
    }

    pub fn members_in(&self, space: &Space) -> Vec<PointId> {
        match self {
            FamilySpec::Explicit { points, .. } => {
                points.iter().copied().filter(|&p| space.contains(p)).collect()
            }
            FamilySpec::Predicate { pred, .. } => {
                space.points().iter().copied().filter(|&p| pred(p)).collect()
            }
        }
    }
}

impl std::fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FamilySpec({})", self.name())
    }
}

/// k disjoint subsets of one tower, evaluated per truncation.
#[derive(Clone, Debug)]
pub struct FamilyCollection {
    pub host: Arc<Tower>,
    pub members: Vec<FamilySpec>,
}

impl FamilyCollection {
    pub fn new(host: Arc<Tower>, members: Vec<FamilySpec>) -> FamilyCollection {
        FamilyCollection { host, members }
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn members_at(&self, space: &Space) -> Vec<Vec<PointId>> {
        self.members.iter().map(|m| m.members_in(space)).collect()
    }

    /// Members must be pairwise disjoint as point sets (the gradual
    /// disjointness premise).
    pub fn check_disjoint(&self, space: &Space) -> Result<()> {
        let sets = self.members_at(space);
        let mut seen: HashMap<PointId, usize> = HashMap::new();
        for (i, set) in sets.iter().enumerate() {
            for &p in set {
                if let Some(_prev) = seen.insert(p, i) {
                    return Err(CoarseError::OverlappingMembers(p));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradualSample {
    pub scale: f64,
    pub trunc_radius: f64,
    /// Minimal b with the R-neighborhoods disjoint off ball(x0, b);
    /// `None` when only shell-sized b works (no informative bound).
    pub bound: Option<f64>,
    pub witness: Option<(usize, usize, PointId)>,
}

/// Minimal b such that the sets N(A_i, R) minus ball(x0, b) are
/// pairwise disjoint in the truncation. By the pairwise reduction the
/// bound is the max over pairs, which is exactly the largest basepoint
/// distance of a point shared by two neighborhoods.
pub fn gradual_disjointness_profile(fams: &FamilyCollection, scale: f64, r: f64) -> Result<GradualSample> {
    let trunc = fams.host.truncation(r)?;
    fams.check_disjoint(&trunc)?;
    let sets = fams.members_at(&trunc);
    let hoods: Vec<Vec<PointId>> = sets.iter().map(|a| neighborhood(&trunc, a, scale)).collect();
    let mut bound = 0.0f64;
    let mut witness = None;
    let mut membership: HashMap<PointId, usize> = HashMap::new();
    for (i, hood) in hoods.iter().enumerate() {
        for &z in hood {
            if let Some(&j) = membership.get(&z) {
                if j != i {
                    let d = trunc.dist_to_base(z);
                    if d >= bound {
                        bound = d;
                        witness = Some((j, i, z));
                    }
                }
            } else {
                membership.insert(z, i);
            }
        }
    }
    let informative = witness.is_none() || bound < INTERIOR_FRACTION * r;
    Ok(GradualSample {
        scale,
        trunc_radius: r,
        bound: if informative { Some(bound) } else { None },
        witness,
    })
}

/// Collection-wise recomputation used to cross-check the pairwise
/// reduction: scans candidate bounds ascending and re-tests
/// pairwise disjointness of the clipped neighborhoods from scratch.
pub fn gradual_disjointness_direct(fams: &FamilyCollection, scale: f64, r: f64) -> Result<Option<f64>> {
    let trunc = fams.host.truncation(r)?;
    fams.check_disjoint(&trunc)?;
    let sets = fams.members_at(&trunc);
    let hoods: Vec<Vec<PointId>> = sets.iter().map(|a| neighborhood(&trunc, a, scale)).collect();
    let mut candidates: Vec<f64> = trunc.points().iter().map(|&p| trunc.dist_to_base(p)).collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for &b in &candidates {
        let clipped: Vec<Vec<PointId>> = hoods
            .iter()
            .map(|h| h.iter().copied().filter(|&z| trunc.dist_to_base(z) > b).collect())
            .collect();
        let mut disjoint = true;
        'pairs: for i in 0..clipped.len() {
            for j in (i + 1)..clipped.len() {
                if clipped[i].iter().any(|p| clipped[j].contains(p)) {
                    disjoint = false;
                    break 'pairs;
                }
            }
        }
        if disjoint {
            return Ok(if b < INTERIOR_FRACTION * r { Some(b) } else { None });
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceSample {
    pub scale: f64,
    pub trunc_radius: f64,
    /// Sup basepoint distance of the common intersection of the
    /// R-neighborhoods; `None` when the intersection is empty.
    pub sup: Option<f64>,
    pub witness: Option<PointId>,
}

/// Members need not be disjoint here.
pub fn divergence_profile(fams: &FamilyCollection, scale: f64, r: f64) -> Result<DivergenceSample> {
    let trunc = fams.host.truncation(r)?;
    let sets = fams.members_at(&trunc);
    let k = sets.len();
    let mut count: HashMap<PointId, usize> = HashMap::new();
    for set in &sets {
        for &z in &neighborhood(&trunc, set, scale) {
            *count.entry(z).or_insert(0) += 1;
        }
    }
    let mut sup: Option<f64> = None;
    let mut witness = None;
    for (&z, &c) in &count {
        if c == k {
            let d = trunc.dist_to_base(z);
            if sup.is_none_or(|s| d > s || (d == s && witness.is_none_or(|w| z < w))) {
                sup = Some(d);
                witness = Some(z);
            }
        }
    }
    Ok(DivergenceSample { scale, trunc_radius: r, sup, witness })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FamilyVerdict {
    Evidence,
    Refuted { at: Vec<f64> },
    Inconclusive,
}

/// Gradual disjointness across radii: evidence iff b(R) is finite and
/// stable in r for every tested R; refuted iff some R admits no
/// informative bound at any truncation.
pub fn gradual_table(fams: &FamilyCollection, scales: &[f64], radii: &[f64]) -> Result<(Vec<GradualSample>, FamilyVerdict)> {
    let mut samples = Vec::new();
    let mut refuted = Vec::new();
    let mut all_stable = true;
    for &scale in scales {
        let cells: Vec<GradualSample> = radii
            .iter()
            .map(|&r| gradual_disjointness_profile(fams, scale, r))
            .collect::<Result<_>>()?;
        if cells.iter().all(|c| c.bound.is_none()) {
            refuted.push(scale);
        }
        let stable = cells.len() >= 3 && {
            let tail = &cells[cells.len() - 3..];
            tail[0].bound.is_some() && tail.windows(2).all(|w| w[0].bound == w[1].bound)
        };
        all_stable &= stable;
        samples.extend(cells);
    }
    let verdict = if !refuted.is_empty() {
        FamilyVerdict::Refuted { at: refuted }
    } else if all_stable {
        FamilyVerdict::Evidence
    } else {
        FamilyVerdict::Inconclusive
    };
    Ok((samples, verdict))
}

/// Divergence across radii: evidence iff the intersection sup is
/// stable (or empty) in r for every tested R; refuted iff it grows
/// strictly through every radius for some R.
pub fn divergence_table(fams: &FamilyCollection, scales: &[f64], radii: &[f64]) -> Result<(Vec<DivergenceSample>, FamilyVerdict)> {
    let mut samples = Vec::new();
    let mut grown = Vec::new();
    let mut all_stable = true;
    for &scale in scales {
        let cells: Vec<DivergenceSample> = radii
            .iter()
            .map(|&r| divergence_profile(fams, scale, r))
            .collect::<Result<_>>()?;
        let grows = cells.len() >= 3
            && cells.windows(2).all(|w| match (w[0].sup, w[1].sup) {
                (Some(a), Some(b)) => b > a,
                _ => false,
            });
        if grows {
            grown.push(scale);
        }
        let stable = cells.len() >= 3 && {
            let tail = &cells[cells.len() - 3..];
            tail.windows(2).all(|w| w[0].sup == w[1].sup)
        };
        all_stable &= stable;
        samples.extend(cells);
    }
    let verdict = if !grown.is_empty() {
        FamilyVerdict::Refuted { at: grown }
    } else if all_stable {
        FamilyVerdict::Evidence
    } else {
        FamilyVerdict::Inconclusive
    };
    Ok((samples, verdict))
}

/// Countable rule: a generated family diverges iff some finite prefix
/// does. Tests prefixes of increasing length and reports the first
/// divergent one.
pub fn prefix_divergence(
    host: &Arc<Tower>,
    generator: impl Fn(usize) -> FamilySpec,
    prefix_lengths: &[usize],
    scales: &[f64],
    radii: &[f64],
) -> Result<Vec<(usize, FamilyVerdict)>> {
    let mut out = Vec::new();
    for &k in prefix_lengths {
        let fams = FamilyCollection::new(host.clone(), (0..k).map(&generator).collect());
        let (_, verdict) = divergence_table(&fams, scales, radii)?;
        out.push((k, verdict));
    }
    Ok(out)
}

/// k families plus profile evidence that they are gradually disjoint
/// while their images fail to diverge. Re-checkable by the two profile
/// operations without the search machinery.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessCertificate {
    pub map_name: String,
    pub k: usize,
    pub families: Vec<Vec<PointId>>,
    /// gradual-disjointness bounds b(R) at the top truncation radius
    pub r_tested: Vec<(f64, Option<f64>)>,
    /// image-side scale at which the images fail to diverge
    pub image_r: f64,
    /// per-truncation sup distance of the image intersection
    pub growth: Vec<(f64, Option<f64>)>,
}

#[derive(Debug, Serialize)]
pub enum WitnessOutcome {
    Found(Box<WitnessCertificate>),
    /// Budget consumed with no certificate. Not a proof of absence.
    Exhausted { expansions: u64 },
}

/// Standard geometric scale grid capped at a quarter of the radius.
pub fn standard_scale_grid(max_radius: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut s = 1.0f64;
    while s <= max_radius / 4.0 {
        grid.push(s);
        s *= 2.0;
    }
    if grid.is_empty() {
        grid.push(1.0);
    }
    grid
}

/// Searches for k gradually disjoint families whose images share a
/// non-divergent intersection. Mirrors the witness construction: scan
/// target balls for fibers splitting into k far-apart clusters at
/// doubling scales, then chain the clusters with every cross distance
/// above the later scale. Deterministic under (budget, seed).
pub fn witness_search(f: &MapSpec, k: usize, budget: u64, seed: u64) -> Result<WitnessOutcome> {
    if k < 2 {
        return Err(CoarseError::InvalidParam("witness_search needs k >= 2".into()));
    }
    let radii = f.source().declared_radii().to_vec();
    let r_top = *radii.last().unwrap();
    let src = f.source().truncation(r_top)?;
    let ir = f.image_radius(r_top)?;
    let tgt = f.target().truncation(ir.min(f.target().max_radius()))?;
    let tpts: Vec<PointId> = tgt.points().to_vec();
    let mut preimages: HashMap<PointId, Vec<PointId>> = HashMap::new();
    for &x in src.points() {
        preimages.entry(f.apply(x)).or_default().push(x);
    }
    let mut centers: Vec<(f64, PointId, usize)> = tpts
        .iter()
        .enumerate()
        .map(|(i, &y)| (tgt.dist_to_base(y), y, i))
        .collect();
    centers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut expansions: u64 = 0;

    // keep the ball radius small against the compared truncations so
    // the re-check's R grid always covers the scale where spurious
    // in-cluster splits would stall
    let r_min = f.source().last_radii(3)[0];
    let ladder: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0]
        .into_iter()
        .filter(|&b| b <= (r_min / 16.0).max(1.0))
        .collect();
    // separation scales double up to a cap above twice the re-check's
    // largest R, then stay there: stalled families still keep their
    // neighborhoods disjoint off a bounded set, while in-fiber clusters
    // (bounded by the ball diameter) can never reach the cap
    let scale_cap = {
        let mut c = 2.0f64;
        while c < r_min / 2.0 {
            c *= 2.0;
        }
        c
    };
    for ball_r in ladder {
        let adj = threshold_adjacency(&tgt, &tpts, ball_r);
        let mut tuples: Vec<Vec<PointId>> = Vec::new();
        let mut scale = 2.0f64;
        let mut last_center_dist = -1.0f64;
        for &(cdist, y, yi) in &centers {
            if expansions >= budget {
                break;
            }
            expansions += 1;
            if cdist <= last_center_dist {
                continue;
            }
            let mut fiber: Vec<PointId> = preimages.get(&y).cloned().unwrap_or_default();
            for &nb in &adj[yi] {
                if let Some(pre) = preimages.get(&tpts[nb]) {
                    fiber.extend_from_slice(pre);
                }
            }
            if fiber.len() < k {
                continue;
            }
            fiber.sort_unstable();
            fiber.dedup();
            let chosen = match dispersed_subset(&src, &fiber, k, scale, &mut rng) {
                Some(c) => c,
                None => continue,
            };
            // the later scale dominates every cross distance
            let ok = tuples
                .iter()
                .flatten()
                .all(|&p| chosen.iter().all(|&q| src.dist(p, q) > scale));
            if !ok {
                continue;
            }
            tuples.push(chosen);
            last_center_dist = cdist;
            if scale < scale_cap {
                scale *= 2.0;
            }
            if tuples.len() >= 32 {
                break;
            }
        }
        // three tuples can already band across the compared radii; the
        // certificate re-check below rejects assemblies that do not
        if tuples.len() < 3 {
            continue;
        }
        // assemble A_i from cluster position i of every tuple
        let families: Vec<Vec<PointId>> = (0..k)
            .map(|i| {
                let mut pts: Vec<PointId> = tuples.iter().map(|t| t[i]).collect();
                pts.sort_unstable();
                pts
            })
            .collect();
        let cert = verify_certificate(f, &families, 2.0 * ball_r)?;
        if let Some(cert) = cert {
            return Ok(WitnessOutcome::Found(Box::new(cert)));
        }
    }
    Ok(WitnessOutcome::Exhausted { expansions })
}

/// Re-checks candidate families from scratch through the two profile
/// operations; returns the certificate only if gradual disjointness
/// holds with finite stable bounds and the image divergence is refuted.
fn verify_certificate(f: &MapSpec, families: &[Vec<PointId>], image_r: f64) -> Result<Option<WitnessCertificate>> {
    let src_tower = f.source().clone();
    let tgt_tower = f.target().clone();
    let src_radii = src_tower.last_radii(3);
    let tgt_radii = tgt_tower.last_radii(3);
    let fams = FamilyCollection::new(
        src_tower.clone(),
        families
            .iter()
            .enumerate()
            .map(|(i, pts)| FamilySpec::explicit(format!("A{i}"), pts.clone()))
            .collect(),
    );
    // cap at a quarter of the smallest compared radius so legitimate
    // bounds b(R) stay clear of that truncation's outer shell
    let grid = standard_scale_grid(src_radii[0]);
    let (gsamples, gverdict) = gradual_table(&fams, &grid, &src_radii)?;
    if gverdict != FamilyVerdict::Evidence {
        return Ok(None);
    }
    let image_fams = FamilyCollection::new(
        tgt_tower.clone(),
        families
            .iter()
            .enumerate()
            .map(|(i, pts)| {
                let imgs: Vec<PointId> = pts.iter().map(|&p| f.apply(p)).collect();
                FamilySpec::explicit(format!("fA{i}"), imgs)
            })
            .collect(),
    );
    let (dsamples, dverdict) = divergence_table(&image_fams, &[image_r], &tgt_radii)?;
    if !matches!(dverdict, FamilyVerdict::Refuted { .. }) {
        return Ok(None);
    }
    let r_top = *src_radii.last().unwrap();
    let r_tested = grid
        .iter()
        .map(|&s| {
            let b = gsamples
                .iter()
                .find(|c| c.scale == s && c.trunc_radius == r_top)
                .and_then(|c| c.bound);
            (s, b)
        })
        .collect();
    let growth = dsamples.iter().map(|c| (c.trunc_radius, c.sup)).collect();
    Ok(Some(WitnessCertificate {
        map_name: f.name.clone(),
        k: families.len(),
        families: families.to_vec(),
        r_tested,
        image_r,
        growth,
    }))
}

/// Best max-min-dispersed k-subset of the fiber: exact for small
/// fibers, greedy with seeded restarts beyond. Returns the subset only
/// when its min pairwise distance exceeds the scale.
fn dispersed_subset(
    space: &Space,
    fiber: &[PointId],
    k: usize,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<PointId>> {
    let m = fiber.len();
    let min_pairwise = |subset: &[PointId]| -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..subset.len() {
            for j in (i + 1)..subset.len() {
                best = best.min(space.dist(subset[i], subset[j]));
            }
        }
        best
    };
    if m <= 14 {
        fn next_combination(idx: &mut [usize], m: usize) -> bool {
            let k = idx.len();
            for i in (0..k).rev() {
                if idx[i] != i + m - k {
                    idx[i] += 1;
                    for j in (i + 1)..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    return true;
                }
            }
            false
        }
        let mut best: Option<(f64, Vec<PointId>)> = None;
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let subset: Vec<PointId> = idx.iter().map(|&i| fiber[i]).collect();
            let score = min_pairwise(&subset);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, subset));
            }
            if !next_combination(&mut idx, m) {
                let (score, subset) = best.unwrap();
                return if score > scale { Some(subset) } else { None };
            }
        }
    } else {
        use rand::Rng;
        let mut best: Option<(f64, Vec<PointId>)> = None;
        for restart in 0..4 {
            let start = if restart == 0 { 0 } else { rng.gen_range(0..m) };
            let mut subset = vec![fiber[start]];
            while subset.len() < k {
                let next = fiber
                    .iter()
                    .copied()
                    .filter(|p| !subset.contains(p))
                    .max_by(|&a, &b| {
                        let da = subset.iter().map(|&s| space.dist(a, s)).fold(f64::INFINITY, f64::min);
                        let db = subset.iter().map(|&s| space.dist(b, s)).fold(f64::INFINITY, f64::min);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })?;
                subset.push(next);
            }
            subset.sort_unstable();
            let score = min_pairwise(&subset);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, subset));
            }
        }
        let (score, subset) = best?;
        if score > scale {
            Some(subset)
        } else {
            None
        }
    }
}
