//! Asymptotic-dimension control functions: the least B such that some
//! (n+1)-coloring of a truncation keeps every monochromatic
//! R-component at diameter <= B. Exact branch-and-bound on small
//! instances, constructive heuristics above, refutation lower bounds
//! through exhaustively colored sub-instances, and the estimate
//! harness that turns tables of B into asdim evidence intervals.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::maps::threshold_adjacency;
use crate::space::{PointId, Space};
use crate::tower::Tower;

pub const DEFAULT_EXACT_CAP: usize = 40;
pub const DEFAULT_ENUM_CAP: u64 = 1 << 24;
pub const DEFAULT_BCAP_FRACTION: f64 = 0.25;

/// An (n+1)-coloring whose monochromatic R-components certify the
/// achieved bound B.
#[derive(Debug, Clone, Serialize)]
pub struct ColoredCover {
    pub n: usize,
    pub scale: f64,
    pub bound: f64,
    /// color per point, aligned with the space's sorted point list
    pub colors: Vec<u8>,
}

/// Max monochromatic R-component diameter of a coloring (union-find
/// solver path; the independent checker is [`verify_cover`]).
fn cover_bound(space: &Space, scale: f64, colors: &[u8]) -> f64 {
    let pts = space.points();
    let n = pts.len();
    let mut uf = crate::graph::UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if colors[i] == colors[j] && space.dist(pts[i], pts[j]) <= scale {
                uf.union(i, j);
            }
        }
    }
    let mut bound = 0.0f64;
    let mut roots: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        roots.entry(uf.find(i)).or_default().push(i);
    }
    for comp in roots.values() {
        for (a, &i) in comp.iter().enumerate() {
            for &j in comp.iter().skip(a + 1) {
                bound = bound.max(space.dist(pts[i], pts[j]));
            }
        }
    }
    bound
}

fn make_cover(space: &Space, n: usize, scale: f64, colors: Vec<u8>) -> ColoredCover {
    let bound = cover_bound(space, scale, &colors);
    ColoredCover { n, scale, bound, colors }
}

/// Independent checker: recomputes components (BFS, not the solvers'
/// union-find) and diameters from scratch and re-derives every
/// ColoredCover invariant.
pub fn verify_cover(space: &Space, cover: &ColoredCover) -> bool {
    let pts = space.points();
    let n = pts.len();
    if cover.colors.len() != n {
        return false;
    }
    if cover.colors.iter().any(|&c| c as usize > cover.n) {
        return false;
    }
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut queue = std::collections::VecDeque::new();
        comp[start] = ncomp;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if comp[w] == usize::MAX
                    && cover.colors[w] == cover.colors[v]
                    && space.dist(pts[v], pts[w]) <= cover.scale
                {
                    comp[w] = ncomp;
                    queue.push_back(w);
                }
            }
        }
        ncomp += 1;
    }
    let mut max_diam = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.dist(pts[i], pts[j]);
            if comp[i] == comp[j] {
                if d > cover.bound {
                    return false;
                }
                max_diam = max_diam.max(d);
            } else if cover.colors[i] == cover.colors[j] && d <= cover.scale {
                // BFS maximality violated
                return false;
            }
        }
    }
    max_diam == cover.bound
}

/// Globally minimal B over all (n+1)-colorings by branch-and-bound,
/// branching on the point whose cheapest placement still forces the
/// largest component-diameter increase.
pub fn control_exact(space: &Space, n: usize, scale: f64, exact_cap: usize) -> Result<(f64, ColoredCover)> {
    let pts = space.points();
    let m = pts.len();
    if m > exact_cap {
        return Err(CoarseError::CapExceeded(format!(
            "{m} points exceed the exact-solver cap {exact_cap}"
        )));
    }
    if m == 0 {
        return Ok((0.0, ColoredCover { n, scale, bound: 0.0, colors: Vec::new() }));
    }
    let mut dist = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            dist[i * m + j] = space.dist(pts[i], pts[j]);
        }
    }
    // seed the incumbent with the single-color bound
    let all_zero = vec![0u8; m];
    let mut best_bound = cover_bound(space, scale, &all_zero);
    let mut best_colors = all_zero;

    #[derive(Clone)]
    struct Comp {
        members: Vec<usize>,
        diam: f64,
    }
    #[derive(Clone)]
    struct State {
        colors: Vec<Option<u8>>,
        comps: Vec<Vec<Comp>>,
        current_max: f64,
        used: usize,
        assigned: usize,
    }

    // diameter increase of placing v into color c, and resulting diameter
    fn placed_diam(state: &State, v: usize, c: usize, dist: &[f64], m: usize, scale: f64) -> f64 {
        let mut members = vec![v];
        for comp in &state.comps[c] {
            if comp.members.iter().any(|&u| dist[v * m + u] <= scale) {
                members.extend_from_slice(&comp.members);
            }
        }
        let mut diam = 0.0f64;
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                diam = diam.max(dist[members[a] * m + members[b]]);
            }
        }
        diam
    }

    fn assign(state: &mut State, v: usize, c: usize, dist: &[f64], m: usize, scale: f64) {
        let mut merged = Comp { members: vec![v], diam: 0.0 };
        let mut keep = Vec::new();
        for comp in state.comps[c].drain(..) {
            if comp.members.iter().any(|&u| dist[v * m + u] <= scale) {
                merged.members.extend(comp.members);
            } else {
                keep.push(comp);
            }
        }
        for a in 0..merged.members.len() {
            for b in (a + 1)..merged.members.len() {
                merged.diam = merged.diam.max(dist[merged.members[a] * m + merged.members[b]]);
            }
        }
        state.current_max = state.current_max.max(merged.diam);
        keep.push(merged);
        state.comps[c] = keep;
        state.colors[v] = Some(c as u8);
        state.used = state.used.max(c + 1);
        state.assigned += 1;
    }

    fn search(
        state: &State,
        dist: &[f64],
        m: usize,
        n: usize,
        scale: f64,
        best_bound: &mut f64,
        best_colors: &mut Vec<u8>,
    ) {
        if state.current_max >= *best_bound {
            return;
        }
        if state.assigned == m {
            *best_bound = state.current_max;
            *best_colors = state.colors.iter().map(|c| c.unwrap()).collect();
            return;
        }
        // most constrained vertex: cheapest placement forces the
        // largest increase
        let mut pick = usize::MAX;
        let mut pick_score = -1.0f64;
        let limit = (state.used + 1).min(n + 1);
        for v in 0..m {
            if state.colors[v].is_some() {
                continue;
            }
            let mut cheapest = f64::INFINITY;
            for c in 0..limit {
                cheapest = cheapest.min(placed_diam(state, v, c, dist, m, scale));
            }
            if cheapest > pick_score {
                pick_score = cheapest;
                pick = v;
            }
        }
        let v = pick;
        let mut options: Vec<(f64, usize)> = (0..limit)
            .map(|c| (placed_diam(state, v, c, dist, m, scale), c))
            .collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (diam, c) in options {
            if diam.max(state.current_max) >= *best_bound {
                continue;
            }
            let mut next = state.clone();
            assign(&mut next, v, c, dist, m, scale);
            search(&next, dist, m, n, scale, best_bound, best_colors);
        }
    }

    let mut root = State {
        colors: vec![None; m],
        comps: vec![Vec::new(); n + 1],
        current_max: 0.0,
        used: 0,
        assigned: 0,
    };
    assign(&mut root, 0, 0, &dist, m, scale); // first point pinned to color 0
    search(&root, &dist, m, n, scale, &mut best_bound, &mut best_colors);
    let cover = make_cover(space, n, scale, best_colors);
    Ok((cover.bound, cover))
}

/// Decision by exhaustive coloring with the first point pinned:
/// `Some(colors)` iff some (n+1)-coloring achieves bound <= B.
pub fn exhaustive_feasible(
    space: &Space,
    n: usize,
    scale: f64,
    bound: f64,
    enum_cap: u64,
) -> Result<Option<Vec<u8>>> {
    let pts = space.points();
    let m = pts.len();
    if m == 0 {
        return Ok(Some(Vec::new()));
    }
    let total = (n as u64 + 1).checked_pow(m.saturating_sub(1) as u32);
    match total {
        Some(t) if t <= enum_cap => {}
        _ => {
            return Err(CoarseError::CapExceeded(format!(
                "{}^{} colorings exceed the exhaustion cap {enum_cap}",
                n + 1,
                m - 1
            )))
        }
    }
    let mut dist = vec![0.0f64; m * m];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let d = space.dist(pts[i], pts[j]);
            dist[i * m + j] = d;
            dist[j * m + i] = d;
            if d <= scale {
                edges.push((i, j));
            }
        }
    }
    let mut colors = vec![0u8; m];
    loop {
        // feasibility of this coloring
        let mut uf = crate::graph::UnionFind::new(m);
        for &(i, j) in &edges {
            if colors[i] == colors[j] {
                uf.union(i, j);
            }
        }
        let mut ok = true;
        'check: for i in 0..m {
            for j in (i + 1)..m {
                if dist[i * m + j] > bound && uf.find(i) == uf.find(j) {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            return Ok(Some(colors));
        }
        // odometer over positions 1..m (position 0 pinned to color 0)
        let mut pos = 1;
        loop {
            if pos >= m {
                return Ok(None);
            }
            if (colors[pos] as usize) < n {
                colors[pos] += 1;
                break;
            }
            colors[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UpperStrategy {
    Auto,
    SingleColor,
    Annuli,
    Bricks,
    Greedy,
}

/// Feasible cover by construction heuristics; B is an upper bound for
/// the optimum and the cover always passes [`verify_cover`].
pub fn control_upper(space: &Space, n: usize, scale: f64, strategy: UpperStrategy, seed: u64) -> (f64, ColoredCover) {
    let candidates: Vec<Vec<u8>> = match strategy {
        UpperStrategy::SingleColor => vec![single_color(space)],
        UpperStrategy::Annuli => annuli_colorings(space, n, scale),
        UpperStrategy::Bricks => brick_colorings(space, n, scale),
        UpperStrategy::Greedy => greedy_colorings(space, n, scale, seed),
        UpperStrategy::Auto => {
            let mut all = vec![single_color(space)];
            all.extend(annuli_colorings(space, n, scale));
            all.extend(brick_colorings(space, n, scale));
            all.extend(greedy_colorings(space, n, scale, seed));
            all
        }
    };
    let mut best: Option<ColoredCover> = None;
    for colors in candidates {
        let cover = make_cover(space, n, scale, colors);
        if best.as_ref().is_none_or(|b| cover.bound < b.bound) {
            best = Some(cover);
        }
    }
    let cover = best.unwrap_or_else(|| make_cover(space, n, scale, single_color(space)));
    (cover.bound, cover)
}

fn single_color(space: &Space) -> Vec<u8> {
    vec![0u8; space.len()]
}

/// Basepoint annuli of width L, colors cycling mod n+1. Good for
/// lines, trees and anything branch-like; useless on grids.
fn annuli_colorings(space: &Space, n: usize, scale: f64) -> Vec<Vec<u8>> {
    if n == 0 {
        return Vec::new();
    }
    let base_widths = [
        scale / n as f64 + 1.0,
        scale + 1.0,
        2.0 * scale + 1.0,
        4.0 * scale + 2.0,
    ];
    base_widths
        .iter()
        .map(|&w| {
            space
                .points()
                .iter()
                .map(|&p| ((space.dist_to_base(p) / w).floor() as u64 % (n as u64 + 1)) as u8)
                .collect()
        })
        .collect()
}

/// Offset brick pattern over planar coordinates: bricks L x H with a
/// half-brick shift per row, color (i + 2j) mod (n+1). Needs n >= 2
/// for separated same-color bricks.
fn brick_colorings(space: &Space, n: usize, scale: f64) -> Vec<Vec<u8>> {
    if n < 2 || !space.has_coords() {
        return Vec::new();
    }
    let coords: Option<Vec<(i64, i64)>> = space
        .points()
        .iter()
        .map(|&p| space.coord(p))
        .collect();
    let coords = match coords {
        Some(c) => c,
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    for mult in [1i64, 2] {
        let l = mult * (2.0 * scale + 2.0).ceil() as i64;
        let h = mult * (scale + 1.0).ceil() as i64;
        // brick (i, j) occupies x in [i*l + j*l/2, (i+1)*l + j*l/2):
        // same-color bricks end up l/2 apart horizontally or h+1
        // vertically
        let colors = coords
            .iter()
            .map(|&(x, y)| {
                let j = y.div_euclid(h);
                let i = (x - j * l / 2).div_euclid(l);
                (i + 2 * j).rem_euclid(n as i64 + 1) as u8
            })
            .collect();
        out.push(colors);
    }
    out
}

/// Greedy block growing: clusters capped at a candidate diameter in
/// basepoint order, then DSATUR on the cluster conflict graph; kept
/// when it fits in n+1 colors.
fn greedy_colorings(space: &Space, n: usize, scale: f64, seed: u64) -> Vec<Vec<u8>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let pts = space.points();
    let m = pts.len();
    if m == 0 || m > 6000 {
        return Vec::new();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        space
            .dist_to_base(pts[a])
            .total_cmp(&space.dist_to_base(pts[b]))
            .then(pts[a].cmp(&pts[b]))
    });
    let mut out = Vec::new();
    for (attempt, cand_mult) in [1.0f64, 2.0, 3.0].iter().enumerate() {
        let cap = cand_mult * (scale + 1.0);
        if attempt > 0 {
            order.shuffle(&mut rng);
        }
        let mut cluster_of = vec![usize::MAX; m];
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            let mut placed = false;
            for (ci, cluster) in clusters.iter_mut().enumerate() {
                if cluster.iter().all(|&u| space.dist(pts[v], pts[u]) <= cap) {
                    cluster.push(v);
                    cluster_of[v] = ci;
                    placed = true;
                    break;
                }
            }
            if !placed {
                cluster_of[v] = clusters.len();
                clusters.push(vec![v]);
            }
        }
        let nc = clusters.len();
        let mut adj: crate::graph::Adjacency = vec![Vec::new(); nc];
        for a in 0..nc {
            for b in (a + 1)..nc {
                let close = clusters[a]
                    .iter()
                    .any(|&u| clusters[b].iter().any(|&v| space.dist(pts[u], pts[v]) <= scale));
                if close {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let (cluster_colors, used) = crate::graph::greedy_coloring(&adj);
        if used <= n + 1 {
            let colors = (0..m).map(|v| cluster_colors[cluster_of[v]]).collect();
            out.push(colors);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RefutationCert {
    pub n: usize,
    pub scale: f64,
    pub bound: f64,
    pub kind: &'static str,
    pub sub_points: Vec<PointId>,
}

#[derive(Debug, Clone, Serialize)]
pub enum LowerOutcome {
    Refuted(RefutationCert),
    Unknown,
}

/// Proves no (n+1)-coloring achieves bound B by exhausting a selected
/// sub-instance; infeasibility on a subspace implies infeasibility on
/// the whole. Unknown is a valid outcome.
pub fn control_lower(space: &Space, n: usize, scale: f64, bound: f64, enum_cap: u64) -> Result<LowerOutcome> {
    let m = space.len();
    // whole space when exhaustible
    let whole_count = (n as u64 + 1).checked_pow(m.saturating_sub(1) as u32);
    if matches!(whole_count, Some(t) if t <= enum_cap) && m <= 64 {
        return Ok(match exhaustive_feasible(space, n, scale, bound, enum_cap)? {
            None => LowerOutcome::Refuted(RefutationCert {
                n,
                scale,
                bound,
                kind: "whole",
                sub_points: space.points().to_vec(),
            }),
            Some(_) => LowerOutcome::Unknown,
        });
    }
    if n == 0 {
        if let Some(chain) = far_chain(space, scale, bound) {
            let sub = space.subspace_anchored(&chain)?;
            if exhaustive_feasible(&sub, 0, scale, bound, enum_cap)?.is_none() {
                return Ok(LowerOutcome::Refuted(RefutationCert {
                    n,
                    scale,
                    bound,
                    kind: "chain",
                    sub_points: chain,
                }));
            }
        }
        return Ok(LowerOutcome::Unknown);
    }
    if space.has_coords() {
        let g: usize = if n == 1 { 4 } else { 3 };
        let combos = (n as u64 + 1).checked_pow((g * g - 1) as u32);
        if matches!(combos, Some(t) if t <= enum_cap) {
            if let Some(window) = grid_skeleton(space, g, scale) {
                let sub = space.subspace_anchored(&window)?;
                if exhaustive_feasible(&sub, n, scale, bound, enum_cap)?.is_none() {
                    return Ok(LowerOutcome::Refuted(RefutationCert {
                        n,
                        scale,
                        bound,
                        kind: "grid-skeleton",
                        sub_points: window,
                    }));
                }
            }
        }
    }
    Ok(LowerOutcome::Unknown)
}

/// R-chain from the basepoint to the first point beyond the bound:
/// consecutive hops <= R, endpoints more than `bound` apart, so one
/// color class cannot keep its component small.
fn far_chain(space: &Space, scale: f64, bound: f64) -> Option<Vec<PointId>> {
    let pts = space.points();
    let m = pts.len();
    let adj = threshold_adjacency(space, pts, scale);
    let start = pts.binary_search(&space.basepoint()).ok()?;
    let mut parent = vec![usize::MAX; m];
    let mut seen = vec![false; m];
    let mut queue = std::collections::VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        if space.dist(pts[start], pts[v]) > bound {
            let mut chain = Vec::new();
            let mut cur = v;
            while cur != usize::MAX {
                chain.push(pts[cur]);
                cur = parent[cur];
            }
            chain.sort_unstable();
            return Some(chain);
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// g x g sparse lattice window inside the coordinate set, spacing as
/// large as the scale allows so that horizontal, vertical and diagonal
/// lattice neighbors all sit within R of each other.
fn grid_skeleton(space: &Space, g: usize, scale: f64) -> Option<Vec<PointId>> {
    let mut by_coord: HashMap<(i64, i64), PointId> = HashMap::new();
    let mut coords: Vec<(i64, i64)> = Vec::new();
    for &p in space.points() {
        let c = space.coord(p)?;
        by_coord.insert(c, p);
        coords.push(c);
    }
    coords.sort_unstable();
    let mut s = scale.floor() as i64;
    while s >= 1 {
        'origins: for &(x0, y0) in &coords {
            let mut window = Vec::with_capacity(g * g);
            for i in 0..g as i64 {
                for j in 0..g as i64 {
                    match by_coord.get(&(x0 + i * s, y0 + j * s)) {
                        Some(&p) => window.push(p),
                        None => continue 'origins,
                    }
                }
            }
            // lattice neighbors (including diagonals) must be R-adjacent
            let gi = g as i64;
            let at = |i: i64, j: i64| window[(i * gi + j) as usize];
            for i in 0..gi {
                for j in 0..gi {
                    for (di, dj) in [(0i64, 1i64), (1, 0), (1, 1), (1, -1)] {
                        let (ni, nj) = (i + di, j + dj);
                        if ni < 0 || nj < 0 || ni >= gi || nj >= gi {
                            continue;
                        }
                        if space.dist(at(i, j), at(ni, nj)) > scale {
                            continue 'origins;
                        }
                    }
                }
            }
            window.sort_unstable();
            return Some(window);
        }
        s -= 1;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Exactness {
    Exact,
    Upper,
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlEntry {
    pub n: usize,
    pub scale: f64,
    pub trunc_radius: f64,
    pub bound: f64,
    pub exactness: Exactness,
}

#[derive(Debug, Clone, Serialize)]
pub struct NVerdict {
    pub n: usize,
    pub upper_stable: bool,
    pub lower_refuted: bool,
    pub refuted_scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsdimReport {
    pub name: String,
    pub entries: Vec<ControlEntry>,
    pub verdicts: Vec<NVerdict>,
    /// evidence interval [lo, hi]; hi is None when no tested n
    /// stabilized
    pub interval: (usize, Option<usize>),
    pub radii: Vec<f64>,
    pub scales: Vec<f64>,
    pub exact_cap: usize,
    pub enum_cap: u64,
    pub bcap_fraction: f64,
    pub certs: Vec<RefutationCert>,
    #[serde(skip)]
    pub covers: Vec<ColoredCover>,
}

#[derive(Debug, Clone)]
pub struct AsdimConfig {
    pub exact_cap: usize,
    pub enum_cap: u64,
    pub bcap_fraction: f64,
    pub seed: u64,
}

impl Default for AsdimConfig {
    fn default() -> Self {
        AsdimConfig {
            exact_cap: DEFAULT_EXACT_CAP,
            enum_cap: DEFAULT_ENUM_CAP,
            bcap_fraction: DEFAULT_BCAP_FRACTION,
            seed: 0,
        }
    }
}

/// Fills the control table across truncations and derives per-n
/// verdicts: "evidence asdim <= n" iff B stabilizes in r for every
/// tested R; "evidence asdim >= n+1" iff some R is refuted up to the
/// B-cap at all of the last three radii.
pub fn asdim_estimate(
    tower: &Tower,
    name: &str,
    n_max: usize,
    scales: &[f64],
    cfg: &AsdimConfig,
) -> Result<AsdimReport> {
    let radii = tower.declared_radii().to_vec();
    let truncs: Vec<std::sync::Arc<Space>> =
        radii.iter().map(|&r| tower.truncation(r)).collect::<Result<_>>()?;
    let diams: Vec<f64> = truncs
        .iter()
        .map(|t| {
            let pts = t.points();
            let mut d = 0.0f64;
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    d = d.max(t.dist(pts[i], pts[j]));
                }
            }
            d
        })
        .collect();

    // upper cells, one method per (n, R) column so stability compares
    // like with like
    let cells: Vec<(usize, f64)> = (0..=n_max)
        .flat_map(|n| scales.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<Result<(Vec<ControlEntry>, Vec<ColoredCover>)>> = cells
        .par_iter()
        .map(|&(n, s)| {
            let exact_everywhere = truncs.iter().all(|t| t.len() <= cfg.exact_cap);
            let mut entries = Vec::new();
            let mut covers = Vec::new();
            for (t, &r) in truncs.iter().zip(&radii) {
                let (bound, cover, exactness) = if exact_everywhere {
                    let (b, c) = control_exact(t, n, s, cfg.exact_cap)?;
                    (b, c, Exactness::Exact)
                } else {
                    let (b, c) = control_upper(t, n, s, UpperStrategy::Auto, cfg.seed);
                    (b, c, Exactness::Upper)
                };
                entries.push(ControlEntry { n, scale: s, trunc_radius: r, bound, exactness });
                covers.push(cover);
            }
            Ok((entries, covers))
        })
        .collect();
    let mut entries = Vec::new();
    let mut covers = Vec::new();
    for res in results {
        let (e, c) = res?;
        entries.extend(e);
        covers.extend(c);
    }

    // lower side on the last three radii; a refutation only counts
    // toward the asymptotic verdict when the B-cap at least reaches the
    // scale, otherwise even the true control value of the infinite
    // space would fail the cap on a too-small truncation
    type LowerHit = Option<(usize, f64, Vec<RefutationCert>)>;
    let tail = radii.len().saturating_sub(3);
    let lower: Vec<Result<LowerHit>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            for &s in scales {
                let mut certs = Vec::new();
                let mut all = true;
                for idx in tail..radii.len() {
                    let bcap = diams[idx] * cfg.bcap_fraction;
                    if bcap < s {
                        all = false;
                        break;
                    }
                    match control_lower(&truncs[idx], n, s, bcap, cfg.enum_cap)? {
                        LowerOutcome::Refuted(c) => certs.push(c),
                        LowerOutcome::Unknown => {
                            all = false;
                            break;
                        }
                    }
                }
                if all && radii.len() >= 3 {
                    return Ok(Some((n, s, certs)));
                }
            }
            Ok(None)
        })
        .collect();

    let mut verdicts = Vec::new();
    let mut certs = Vec::new();
    for (n, hit) in lower.iter().enumerate() {
        let upper_stable = scales.iter().all(|&s| {
            let col: Vec<&ControlEntry> = entries
                .iter()
                .filter(|e| e.n == n && e.scale == s)
                .collect();
            col.len() >= 3 && {
                let t = &col[col.len() - 3..];
                t.windows(2).all(|w| w[0].bound == w[1].bound)
            }
        });
        let (lower_refuted, refuted_scale) = match hit.as_ref().map_err(clone_err)? {
            Some((_, s, cs)) => {
                certs.extend(cs.clone());
                (true, Some(*s))
            }
            None => (false, None),
        };
        verdicts.push(NVerdict { n, upper_stable, lower_refuted, refuted_scale });
    }
    let lo = verdicts
        .iter()
        .filter(|v| v.lower_refuted)
        .map(|v| v.n + 1)
        .max()
        .unwrap_or(0);
    let hi = verdicts.iter().find(|v| v.upper_stable).map(|v| v.n);
    Ok(AsdimReport {
        name: name.to_string(),
        entries,
        verdicts,
        interval: (lo, hi),
        radii,
        scales: scales.to_vec(),
        exact_cap: cfg.exact_cap,
        enum_cap: cfg.enum_cap,
        bcap_fraction: cfg.bcap_fraction,
        certs,
        covers,
    })
}

fn clone_err(e: &CoarseError) -> CoarseError {
    CoarseError::InvalidParam(e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct RaisingVerdict {
    pub n: usize,
    pub x_interval: (usize, Option<usize>),
    pub y_interval: (usize, Option<usize>),
    /// lo(Y) <= hi(X) + n - 1
    pub consistent: bool,
    /// lo(Y) attains hi(X) + n - 1 exactly
    pub bound_attained: bool,
    /// for coarsely open maps: the two intervals admit equality
    pub equality_consistent: Option<bool>,
}

/// Consistency of two asdim evidence intervals with the
/// dimension-raising inequality, and with equality when the map is
/// additionally coarsely open.
pub fn check_raising(
    x: (usize, Option<usize>),
    y: (usize, Option<usize>),
    n: usize,
    coarsely_open: bool,
) -> RaisingVerdict {
    let consistent = match x.1 {
        Some(hi_x) => y.0 < hi_x + n,
        None => true,
    };
    let bound_attained = matches!(x.1, Some(hi_x) if y.0 == hi_x + n - 1);
    let equality_consistent = if coarsely_open {
        let lo = x.0.max(y.0);
        let hi = match (x.1, y.1) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        };
        Some(hi.is_none_or(|h| lo <= h))
    } else {
        None
    };
    RaisingVerdict {
        n,
        x_interval: x,
        y_interval: y,
        consistent,
        bound_attained,
        equality_consistent,
    }
}
