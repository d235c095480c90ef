//! Shared test support: random metric spaces and the brute-force
//! coloring oracle kept independent of the solver code paths.

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use coarsekit::space::{MatrixMetric, PointId, Space};

/// Random metric space by shortest-path completion of a random
/// weighted complete graph: always a valid integer metric.
pub fn random_path_metric_space(rng: &mut ChaCha8Rng, n: usize) -> Space {
    let mut w = vec![0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.gen_range(1..=20) as f64;
            w[i * n + j] = d;
            w[j * n + i] = d;
        }
    }
    // Floyd-Warshall
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = w[i * n + k] + w[k * n + j];
                if i != j && via < w[i * n + j] {
                    w[i * n + j] = via;
                }
            }
        }
    }
    let ids: Vec<PointId> = (0..n as i64).map(PointId).collect();
    let metric = MatrixMetric::new(ids.clone(), w).unwrap();
    Space::new(ids, Arc::new(metric), PointId(0)).unwrap()
}

/// Random subset of the integer line, exact distances.
pub fn random_line_subset(rng: &mut ChaCha8Rng, n: usize, extent: i64) -> Space {
    let mut picks = std::collections::BTreeSet::new();
    picks.insert(0i64);
    while picks.len() < n {
        picks.insert(rng.gen_range(0..=extent));
    }
    struct Line;
    impl coarsekit::space::Metric for Line {
        fn dist(&self, a: PointId, b: PointId) -> f64 {
            (a.0 - b.0).abs() as f64
        }
    }
    let ids: Vec<PointId> = picks.into_iter().map(PointId).collect();
    Space::new(ids, Arc::new(Line), PointId(0)).unwrap()
}

/// Independent oracle: minimum over all (n+1)^m colorings of the max
/// monochromatic R-component diameter, components via plain BFS.
pub fn oracle_optimum(space: &Space, n: usize, scale: f64) -> f64 {
    let pts = space.points();
    let m = pts.len();
    assert!(m >= 1);
    let mut colors = vec![0usize; m];
    let mut best = f64::INFINITY;
    loop {
        best = best.min(oracle_bound(space, scale, &colors));
        let mut pos = 0;
        loop {
            if pos == m {
                return best;
            }
            if colors[pos] < n {
                colors[pos] += 1;
                break;
            }
            colors[pos] = 0;
            pos += 1;
        }
    }
}

/// Max monochromatic R-component diameter of one coloring, by BFS.
pub fn oracle_bound(space: &Space, scale: f64, colors: &[usize]) -> f64 {
    let pts = space.points();
    let m = pts.len();
    let mut comp = vec![usize::MAX; m];
    let mut next = 0;
    for start in 0..m {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in 0..m {
                if comp[w] == usize::MAX
                    && colors[w] == colors[v]
                    && space.dist(pts[v], pts[w]) <= scale
                {
                    comp[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    let mut bound = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            if comp[i] == comp[j] {
                bound = bound.max(space.dist(pts[i], pts[j]));
            }
        }
    }
    bound
}
