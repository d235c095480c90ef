//! Small-graph machinery shared by the profile and dimension modules:
//! union-find, exact and heuristic coloring, and maximal-clique
//! enumeration on threshold graphs.

#[derive(Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> UnionFind {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut x = x;
        while self.parent[x] != x {
            let p = self.parent[x];
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, x: usize, y: usize) {
        let (mut xr, mut yr) = (self.find(x), self.find(y));
        if xr == yr {
            return;
        }
        if self.size[xr] < self.size[yr] {
            std::mem::swap(&mut xr, &mut yr);
        }
        self.parent[yr] = xr;
        self.size[xr] += self.size[yr];
    }

    /// Index sets of the classes, ordered by least member.
    pub fn sets(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            buckets[r].push(x);
        }
        let mut sets: Vec<Vec<usize>> = buckets.into_iter().filter(|s| !s.is_empty()).collect();
        sets.sort_by_key(|s| s[0]);
        sets
    }
}

/// Adjacency lists, indices 0..n.
pub type Adjacency = Vec<Vec<usize>>;

/// Outcome of asking whether a graph is k-colorable.
#[derive(Debug, Clone, PartialEq)]
pub enum Colorability {
    /// A proper coloring with colors < k.
    Yes(Vec<u8>),
    No,
    /// Too large for the exact solver; bounds from greedy and clique.
    Unknown { greedy_colors: usize, clique_lower: usize },
}

impl Colorability {
    pub fn is_yes(&self) -> bool {
        matches!(self, Colorability::Yes(_))
    }
}

pub const EXACT_COLOR_MAX_COLORS: usize = 6;
pub const EXACT_COLOR_MAX_VERTICES: usize = 64;

/// k-colorability. Exact for k <= 2 at any size and for
/// k <= [`EXACT_COLOR_MAX_COLORS`] on graphs with at most
/// [`EXACT_COLOR_MAX_VERTICES`] vertices; beyond that the answer is
/// only bracketed, never silently approximated.
pub fn colorable(adj: &Adjacency, k: usize) -> Colorability {
    let n = adj.len();
    if n == 0 {
        return Colorability::Yes(Vec::new());
    }
    if k == 0 {
        return Colorability::No;
    }
    if k == 1 {
        return if adj.iter().all(|nb| nb.is_empty()) {
            Colorability::Yes(vec![0; n])
        } else {
            Colorability::No
        };
    }
    if k == 2 {
        return match two_color(adj) {
            Some(c) => Colorability::Yes(c),
            None => Colorability::No,
        };
    }
    if k <= EXACT_COLOR_MAX_COLORS && n <= EXACT_COLOR_MAX_VERTICES {
        return match backtrack_color(adj, k) {
            Some(c) => Colorability::Yes(c),
            None => Colorability::No,
        };
    }
    let (greedy, gc) = greedy_coloring(adj);
    if gc <= k {
        return Colorability::Yes(greedy);
    }
    let clique = greedy_clique(adj).len();
    if clique > k {
        return Colorability::No;
    }
    Colorability::Unknown { greedy_colors: gc, clique_lower: clique }
}

fn two_color(adj: &Adjacency) -> Option<Vec<u8>> {
    let n = adj.len();
    let mut color = vec![u8::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return None;
                }
            }
        }
    }
    Some(color)
}

/// Backtracking with degree-descending vertex order and first-use color
/// symmetry breaking.
fn backtrack_color(adj: &Adjacency, k: usize) -> Option<Vec<u8>> {
    let n = adj.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
    let mut color = vec![u8::MAX; n];

    fn rec(adj: &Adjacency, order: &[usize], pos: usize, k: usize, max_used: usize, color: &mut Vec<u8>) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        let limit = (max_used + 2).min(k);
        for c in 0..limit {
            if adj[v].iter().any(|&w| color[w] == c as u8) {
                continue;
            }
            color[v] = c as u8;
            if rec(adj, order, pos + 1, k, max_used.max(c + 1), color) {
                return true;
            }
            color[v] = u8::MAX;
        }
        false
    }

    if rec(adj, &order, 0, k, 0, &mut color) {
        Some(color)
    } else {
        None
    }
}

/// DSATUR greedy coloring; returns (colors, number of colors used).
pub fn greedy_coloring(adj: &Adjacency) -> (Vec<u8>, usize) {
    let n = adj.len();
    let mut color = vec![usize::MAX; n];
    let mut sat: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    let mut used = 0usize;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| color[v] == usize::MAX)
            .max_by_key(|&v| (sat[v].len(), adj[v].len(), std::cmp::Reverse(v)))
            .unwrap();
        let mut c = 0;
        while sat[v].contains(&c) {
            c += 1;
        }
        color[v] = c;
        used = used.max(c + 1);
        for &w in &adj[v] {
            sat[w].insert(c);
        }
    }
    (color.into_iter().map(|c| c as u8).collect(), used)
}

/// Greedy clique seeded from the max-degree vertex; a lower bound for
/// the chromatic number.
pub fn greedy_clique(adj: &Adjacency) -> Vec<usize> {
    let n = adj.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = Vec::new();
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
    for &seed in seeds.iter().take(8) {
        let mut clique = vec![seed];
        let mut cands: Vec<usize> = adj[seed].clone();
        cands.sort_by_key(|&v| std::cmp::Reverse(adj[v].len()));
        for v in cands {
            if clique.iter().all(|&u| adj[v].contains(&u)) {
                clique.push(v);
            }
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best.sort_unstable();
    best
}

/// Chromatic number bracket `[lo, hi]`, exact when `lo == hi`.
pub fn chromatic_bounds(adj: &Adjacency) -> (usize, usize) {
    let n = adj.len();
    if n == 0 {
        return (0, 0);
    }
    let clique = greedy_clique(adj).len();
    let (_, greedy) = greedy_coloring(adj);
    let mut lo = clique;
    let mut hi = greedy;
    if lo == hi {
        return (lo, hi);
    }
    // tighten exactly where the exact solver is allowed
    let mut k = lo;
    while k < hi {
        match colorable(adj, k) {
            Colorability::Yes(_) => {
                hi = k;
                break;
            }
            Colorability::No => {
                lo = k + 1;
                k += 1;
            }
            Colorability::Unknown { .. } => break,
        }
    }
    (lo, hi)
}

/// All maximal cliques, Bron–Kerbosch with pivoting. Cliques come out
/// sorted internally and ordered by their member lists, so the result
/// is deterministic.
pub fn maximal_cliques(adj: &Adjacency) -> Vec<Vec<usize>> {
    let n = adj.len();
    let nb: Vec<std::collections::BTreeSet<usize>> =
        adj.iter().map(|v| v.iter().copied().collect()).collect();
    let mut out = Vec::new();
    let mut r: Vec<usize> = Vec::new();
    let p: Vec<usize> = (0..n).collect();
    bron_kerbosch(&nb, &mut r, p, Vec::new(), &mut out);
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort();
    out
}

fn bron_kerbosch(
    nb: &[std::collections::BTreeSet<usize>],
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    // pivot maximizing |P ∩ N(u)|
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| nb[u].contains(&v)).count())
        .unwrap();
    let branch: Vec<usize> = p.iter().copied().filter(|&v| !nb[pivot].contains(&v)).collect();
    let mut p = p;
    let mut x = x;
    for v in branch {
        let p_next: Vec<usize> = p.iter().copied().filter(|&w| nb[v].contains(&w)).collect();
        let x_next: Vec<usize> = x.iter().copied().filter(|&w| nb[v].contains(&w)).collect();
        r.push(v);
        bron_kerbosch(nb, r, p_next, x_next, out);
        r.pop();
        p.retain(|&w| w != v);
        x.push(v);
    }
}
