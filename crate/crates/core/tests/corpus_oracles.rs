//! Oracle tests for the corpus builders: every generated space is a
//! valid metric space, and the closed-form metrics agree with
//! independent recomputations (exhaustive xor identity, BFS on the
//! comb tree).

use std::collections::{HashMap, VecDeque};

use coarsekit::corpus::{self, decode_xy, encode_xy};
use coarsekit::space::{diameter, threshold_components, validate_metric, PointId};

#[test]
fn corpus_spaces_validate_at_desk_scale() {
    let towers = vec![
        ("half_line", corpus::half_line(60).unwrap()),
        ("line", corpus::int_line(40).unwrap()),
        ("even_half_line", corpus::even_half_line(60).unwrap()),
        ("grid", corpus::grid2(8).unwrap()),
        ("binary_tree", corpus::binary_tree(7).unwrap()),
        ("xor_space", corpus::xor_space(8).unwrap()),
    ];
    for (name, tower) in towers {
        for &r in tower.declared_radii() {
            let trunc = tower.truncation(r).unwrap();
            if trunc.len() > 600 {
                continue;
            }
            let report = validate_metric(&trunc);
            assert!(report.is_valid(), "{name} at radius {r}: {:?}", report.violations);
        }
    }
    let comb = corpus::comb_tree(30).unwrap();
    for tower in [&comb.path, &comb.euclid] {
        let trunc = tower.truncation(tower.declared_radii()[0]).unwrap();
        let report = validate_metric(&trunc);
        assert!(report.is_valid(), "comb: {:?}", report.violations);
    }
}

#[test]
fn cantor_metric_is_twice_xor() {
    // exhaustive digit-weight identity for k <= 10
    for k in [4u32, 7, 10] {
        let tower = corpus::xor_space(k).unwrap();
        let space = tower.ambient();
        for a in 0..(1i64 << k) {
            for b in 0..(1i64 << k) {
                assert_eq!(space.dist(PointId(a), PointId(b)), (2 * (a ^ b)) as f64);
            }
        }
    }
}

#[test]
fn cantor_examples() {
    // k=1: two points, digit 1 has weight 2
    let t1 = corpus::xor_space(1).unwrap();
    assert_eq!(t1.ambient().len(), 2);
    assert_eq!(t1.ambient().dist(PointId(0), PointId(1)), 2.0);
    // k=3: 0b001 vs 0b011 differ in digit 2, weight 4
    let t3 = corpus::xor_space(3).unwrap();
    assert_eq!(t3.ambient().dist(PointId(0b001), PointId(0b011)), 4.0);
    // the map sends a digit string to the integer it denotes
    let map = corpus::coarse_cantor(3).unwrap();
    assert_eq!(map.apply(PointId(0b101)), PointId(0b101));
    // truncation at radius 2^(j+1)-2 is exactly the j-digit subspace
    let t8 = corpus::xor_space(8).unwrap();
    let trunc = t8.truncation(2.0 * 32.0 - 2.0).unwrap();
    assert_eq!(trunc.len(), 32);
    assert!(trunc.points().iter().all(|p| p.0 < 32));
}

#[test]
fn xor_threshold_components_are_dyadic_blocks() {
    let tower = corpus::xor_space(4).unwrap();
    let space = tower.truncation(tower.max_radius()).unwrap();
    let all: Vec<PointId> = space.points().to_vec();
    // distances are even (2*xor): at R=3 only xor<=1 pairs join, giving
    // the eight 2-blocks
    let comps = threshold_components(&space, &all, 3.0);
    assert_eq!(comps.len(), 8);
    assert!(comps.iter().all(|c| c.len() == 2));
    // at R=7 (xor <= 3) the four dyadic 4-blocks appear
    let comps = threshold_components(&space, &all, 7.0);
    assert_eq!(comps.len(), 4);
    for (i, comp) in comps.iter().enumerate() {
        let want: Vec<PointId> = (4 * i as i64..4 * (i as i64 + 1)).map(PointId).collect();
        assert_eq!(comp, &want);
    }
    // dyadic block {8..15} has diameter 2*7
    let block: Vec<PointId> = (8..16).map(PointId).collect();
    assert_eq!(diameter(&space, &block), Some(14.0));
}

/// BFS path metric on the small comb tree, recomputed from the edge
/// structure: row steps plus unit bridges at x = k+1.
fn comb_bfs_oracle(m: i64) -> HashMap<(PointId, PointId), f64> {
    let mut pts = Vec::new();
    for y in 1..=m {
        for x in y..=m {
            pts.push((x, y));
        }
    }
    let idx: HashMap<(i64, i64), usize> = pts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
    for (&(x, y), &i) in &idx {
        if let Some(&j) = idx.get(&(x + 1, y)) {
            adj[i].push(j);
            adj[j].push(i);
        }
        // bridge between (k+1, k) and (k+1, k+1)
        if x == y + 1 {
            if let Some(&j) = idx.get(&(x, y + 1)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    let mut out = HashMap::new();
    for (start, &(sx, sy)) in pts.iter().enumerate() {
        let mut dist = vec![usize::MAX; pts.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (i, &(tx, ty)) in pts.iter().enumerate() {
            out.insert((encode_xy(sx, sy), encode_xy(tx, ty)), dist[i] as f64);
        }
    }
    out
}

#[test]
fn comb_path_metric_matches_bfs() {
    let m = 12;
    let bundle = corpus::comb_tree(m).unwrap();
    let space = bundle.path.ambient();
    let oracle = comb_bfs_oracle(m);
    for &p in space.points() {
        for &q in space.points() {
            assert_eq!(
                space.dist(p, q),
                oracle[&(p, q)],
                "path distance mismatch at {:?} {:?}",
                decode_xy(p),
                decode_xy(q)
            );
        }
    }
}

#[test]
fn comb_examples() {
    let bundle = corpus::comb_tree(30).unwrap();
    let path = bundle.path.ambient();
    let euclid = bundle.euclid.ambient();
    // (5,1) to (5,2) detours through the bridge at x=2: 3+1+3
    assert_eq!(path.dist(encode_xy(5, 1), encode_xy(5, 2)), 7.0);
    // euclidean distance between vertically adjacent row points is 1
    for x in [5i64, 12, 25] {
        assert_eq!(euclid.dist(encode_xy(x, 1), encode_xy(x, 2)), 1.0);
    }
    // the identity map contracts: path dominates euclid pointwise
    for &p in path.points().iter().step_by(7) {
        for &q in path.points().iter().step_by(11) {
            assert!(euclid.dist(p, q) <= path.dist(p, q));
        }
    }
}

#[test]
fn stock_actions_verify() {
    let (_, refl) = corpus::reflection_z(60).unwrap();
    assert!(coarsekit::actions::verify_action(&refl).is_valid());
    let (_, grid) = corpus::grid_reflections(6).unwrap();
    assert!(coarsekit::actions::verify_action(&grid).is_valid());
    let half = corpus::half_line(20).unwrap();
    let trivial = corpus::trivial_action(half);
    assert!(coarsekit::actions::verify_action(&trivial).is_valid());
}

#[test]
fn binary_tree_distances() {
    let tower = corpus::binary_tree(5).unwrap();
    let space = tower.ambient();
    // siblings are 2 apart through their parent
    assert_eq!(space.dist(PointId(2), PointId(3)), 2.0);
    // leaf to root = depth
    assert_eq!(space.dist(PointId(1), PointId(32)), 5.0);
    // cousins: 4 and 6 meet at the root
    assert_eq!(space.dist(PointId(4), PointId(6)), 4.0);
}

#[test]
fn unknown_corpus_entry_rejected() {
    let err = corpus::build("no_such_space", &serde_json::json!({}));
    assert!(matches!(err, Err(coarsekit::CoarseError::UnknownCorpusEntry(_))));
}
