//! Acceptance suite: one test per criterion, each printing its
//! pass/fail line. Everything here recomputes its expectations through
//! independent oracles (exhaustive enumeration, certificate re-checks)
//! rather than trusting solver internals.

use std::process::Command;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coarsekit::actions::orbit_space;
use coarsekit::corpus;
use coarsekit::dimension::{
    asdim_estimate, check_raising, control_exact, verify_cover, AsdimConfig,
};
use coarsekit::families::{
    divergence_table, gradual_table, standard_scale_grid, witness_search, FamilyCollection,
    FamilySpec, FamilyVerdict, WitnessOutcome,
};
use coarsekit::maps::{
    check_split_certificate, n_to_1_profile, n_to_1_threshold, surjectivity_defect, MapSpec,
    ProfileVerdict,
};
use coarsekit::openness::{openness_verdict_default, OpennessVerdict};
use coarsekit::space::{validate_metric, MatrixMetric, PointId, Space};

fn pass(line: &str) {
    println!("criterion PASS: {line}");
}

/// Random valid metric by shortest-path completion.
fn random_metric_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w = vec![0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.gen_range(1..=20) as f64;
            w[i * n + j] = d;
            w[j * n + i] = d;
        }
    }
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
    w
}

fn space_from_rows(rows: Vec<f64>, n: usize) -> Space {
    let ids: Vec<PointId> = (0..n as i64).map(PointId).collect();
    let metric = MatrixMetric::new(ids.clone(), rows).unwrap();
    Space::new(ids, Arc::new(metric), PointId(0)).unwrap()
}

#[test]
fn criterion_1_metric_validity_and_mutations() {
    // every corpus space validates at desk truncations
    let spaces: Vec<(&str, Arc<coarsekit::Tower>)> = vec![
        ("half_line", corpus::half_line(100).unwrap()),
        ("line", corpus::int_line(60).unwrap()),
        ("even_half_line", corpus::even_half_line(80).unwrap()),
        ("grid", corpus::grid2(10).unwrap()),
        ("binary_tree", corpus::binary_tree(8).unwrap()),
        ("xor_space", corpus::xor_space(9).unwrap()),
    ];
    for (name, tower) in &spaces {
        for &r in tower.declared_radii() {
            let trunc = tower.truncation(r).unwrap();
            if trunc.len() > 700 {
                continue;
            }
            assert!(
                validate_metric(&trunc).is_valid(),
                "{name} fails to validate at radius {r}"
            );
        }
    }
    let comb = corpus::comb_tree(32).unwrap();
    for tower in [&comb.path, &comb.euclid] {
        let trunc = tower.truncation(tower.declared_radii()[0]).unwrap();
        assert!(validate_metric(&trunc).is_valid(), "comb fails to validate");
    }
    let (_, refl) = corpus::reflection_z(100).unwrap();
    let orbit = orbit_space(&refl).unwrap();
    let t = orbit.tower.truncation(50.0).unwrap();
    assert!(validate_metric(&t).is_valid(), "orbit space fails to validate");

    // 100 mutation tests: planted symmetry and triangle violations are
    // all caught
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut caught = 0;
    for trial in 0..100 {
        let n = rng.gen_range(5..=12);
        let mut rows = random_metric_rows(&mut rng, n);
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        if trial % 2 == 0 {
            // symmetry violation
            rows[i * n + j] += 1.0;
        } else {
            // triangle violation: inflate one distance both ways
            let big = rows.iter().cloned().fold(0.0, f64::max) * 3.0;
            rows[i * n + j] = big;
            rows[j * n + i] = big;
        }
        let space = space_from_rows(rows, n);
        if !validate_metric(&space).is_valid() {
            caught += 1;
        }
    }
    assert_eq!(caught, 100, "all 100 planted violations must be caught");
    pass("1 metric validity: corpus spaces valid, 100/100 mutations caught");
}

#[test]
fn criterion_2_coarse_cantor() {
    let map = corpus::coarse_cantor(12).unwrap();
    // n=2 profile stable across k = 8, 10, 12 with exact S equality
    let radii = [510.0, 2046.0, 8190.0];
    let prof = n_to_1_profile(&map, 2, &[1.0, 2.0, 4.0, 8.0, 16.0], &radii).unwrap();
    assert_eq!(prof.verdict, ProfileVerdict::Evidence, "2-to-1 evidence");
    for &scale in &[1.0, 2.0, 4.0, 8.0, 16.0] {
        let col: Vec<Option<f64>> = prof
            .profile
            .samples
            .iter()
            .filter(|s| s.scale_in == scale)
            .map(|s| s.value)
            .collect();
        assert!(col.windows(2).all(|w| w[0] == w[1]), "exact S equality at R={scale}");
    }
    // n=1 threshold at R=1 strictly grows across k = 6..12
    let mut last = -1.0;
    for j in 6..=12u32 {
        let r = (1u64 << (j + 1)) as f64 - 2.0;
        let cell = n_to_1_threshold(&map, 1, 1.0, r).unwrap();
        let s = cell.s.unwrap();
        assert!(s > last, "S must strictly grow at k={j}");
        last = s;
        // certificates validate independently
        let src = map.source().truncation(r).unwrap();
        for cert in cell.certificates.iter().take(50) {
            assert!(check_split_certificate(&src, cert, 1));
        }
    }
    // asdim evidence: [0,0] for the digit space, [1,1] for the half-line
    let cfg = AsdimConfig::default();
    let src = asdim_estimate(&corpus::xor_space(10).unwrap(), "xor", 1, &[2.0, 4.0, 8.0], &cfg).unwrap();
    assert_eq!(src.interval, (0, Some(0)));
    let tgt = asdim_estimate(&corpus::cantor_target(10).unwrap(), "half", 1, &[1.0, 2.0, 4.0], &cfg).unwrap();
    assert_eq!(tgt.interval, (1, Some(1)));
    // raising inequality with n=2: consistent, bound attained
    let verdict = check_raising(src.interval, tgt.interval, 2, false);
    assert!(verdict.consistent && verdict.bound_attained);
    pass("2 coarse cantor: 2-to-1 stable, 1-to-1 refuted at R=1, asdim [0,0] -> [1,1], bound attained");
}

/// Re-checks a witness certificate from scratch through the two family
/// profile operations.
fn recheck_certificate(f: &MapSpec, cert: &coarsekit::families::WitnessCertificate) -> bool {
    let src_radii = f.source().last_radii(3);
    let fams = FamilyCollection::new(
        f.source().clone(),
        cert.families
            .iter()
            .enumerate()
            .map(|(i, pts)| FamilySpec::explicit(format!("A{i}"), pts.clone()))
            .collect(),
    );
    let grid = standard_scale_grid(src_radii[0]);
    let (_, gv) = gradual_table(&fams, &grid, &src_radii).unwrap();
    if gv != FamilyVerdict::Evidence {
        return false;
    }
    let images = FamilyCollection::new(
        f.target().clone(),
        cert.families
            .iter()
            .enumerate()
            .map(|(i, pts)| {
                FamilySpec::explicit(format!("fA{i}"), pts.iter().map(|&p| f.apply(p)).collect())
            })
            .collect(),
    );
    let (_, dv) = divergence_table(&images, &[cert.image_r], &f.target().last_radii(3)).unwrap();
    matches!(dv, FamilyVerdict::Refuted { .. })
}

#[test]
fn criterion_3_witness_cross_check() {
    const BUDGET: u64 = 100_000;
    // (map, n with coarsely-n-to-1 evidence or None, n refuted or None)
    let cantor = corpus::coarse_cantor(10).unwrap();
    let id = corpus::identity_map(corpus::half_line(200).unwrap(), "id");
    let (_, refl) = corpus::reflection_z(200).unwrap();
    let refl_q = orbit_space(&refl).unwrap().quotient;
    let grid48 = corpus::grid2(48).unwrap();
    let geo = Arc::new(grid48.restrict(vec![6.0, 12.0, 24.0, 48.0]).unwrap());
    let grid_q = orbit_space(&corpus::grid_reflections_on(geo)).unwrap().quotient;
    let comb = corpus::comb_tree(101).unwrap();

    struct Case {
        map: MapSpec,
        evidence_n: Option<usize>,
        refuted_n: Option<usize>,
        scales: Vec<f64>,
    }
    let cases = vec![
        Case { map: cantor, evidence_n: Some(2), refuted_n: Some(1), scales: vec![1.0, 2.0, 4.0] },
        Case { map: id, evidence_n: Some(1), refuted_n: None, scales: vec![1.0, 2.0, 4.0] },
        Case { map: refl_q, evidence_n: Some(2), refuted_n: Some(1), scales: vec![1.0, 2.0, 4.0] },
        Case { map: grid_q, evidence_n: Some(4), refuted_n: Some(3), scales: vec![1.0, 2.0] },
        Case { map: comb.identity, evidence_n: None, refuted_n: Some(4), scales: vec![5.0] },
    ];
    for case in &cases {
        let radii = case.map.source().last_radii(3);
        if let Some(n) = case.evidence_n {
            let prof = n_to_1_profile(&case.map, n, &case.scales, &radii).unwrap();
            assert_eq!(
                prof.verdict,
                ProfileVerdict::Evidence,
                "{}: expected {n}-to-1 evidence",
                case.map.name
            );
            // evidence at n: the search at k = n+1 must exhaust; any
            // certificate here is a hard failure
            match witness_search(&case.map, n + 1, BUDGET, 7).unwrap() {
                WitnessOutcome::Exhausted { .. } => {}
                WitnessOutcome::Found(c) => panic!(
                    "{}: certificate at k={} contradicts {n}-to-1 evidence: {:?}",
                    case.map.name,
                    n + 1,
                    c.families
                ),
            }
        }
        if let Some(n) = case.refuted_n {
            let prof = n_to_1_profile(&case.map, n, &case.scales, &radii).unwrap();
            assert!(
                matches!(prof.verdict, ProfileVerdict::Refuted { .. }),
                "{}: expected refutation at n={n}",
                case.map.name
            );
            // refuted at n: the search at k = n+1 must produce a
            // certificate that re-passes both profiles from scratch
            match witness_search(&case.map, n + 1, BUDGET, 7).unwrap() {
                WitnessOutcome::Found(cert) => {
                    assert!(
                        recheck_certificate(&case.map, &cert),
                        "{}: certificate fails independent re-check",
                        case.map.name
                    );
                }
                WitnessOutcome::Exhausted { expansions } => panic!(
                    "{}: no witness at k={} within budget ({expansions} expansions)",
                    case.map.name,
                    n + 1
                ),
            }
        }
    }
    pass("3 witness cross-check: evidence maps exhaust, refuted maps certify, certificates re-check");
}

#[test]
fn criterion_4_comb_tree() {
    let bundle = corpus::comb_tree(201).unwrap();
    // rows gradually disjoint under the path metric, bounds stable
    let radii = bundle.path.last_radii(3);
    let (samples, verdict) = gradual_table(&bundle.rows, &[1.0, 2.0, 4.0, 8.0], &radii).unwrap();
    assert_eq!(verdict, FamilyVerdict::Evidence);
    for &(scale, want) in &[(1.0, 8.0), (2.0, 9.0), (4.0, 11.0), (8.0, 15.0)] {
        for cell in samples.iter().filter(|c| c.scale == scale) {
            assert_eq!(cell.bound, Some(want));
        }
    }
    // euclidean images fail to diverge: sup grows across M = 50, 100, 200
    let images = corpus::comb_row_images(&bundle);
    let (cells, dverdict) = divergence_table(&images, &[5.0], &[50.0, 100.0, 200.0]).unwrap();
    assert!(matches!(dverdict, FamilyVerdict::Refuted { .. }));
    let sups: Vec<f64> = cells.iter().map(|c| c.sup.unwrap()).collect();
    assert!(sups.windows(2).all(|w| w[1] > w[0]), "sup must grow: {sups:?}");
    // coarsely finite-to-1 evidence
    let table =
        coarsekit::maps::finite_to_1_table(&bundle.identity, 5.0, &[8.0, 16.0, 32.0], &radii).unwrap();
    assert_eq!(table.verdict, ProfileVerdict::Evidence);
    // not coarsely open, with an explicit (A, rho) certificate
    let small = corpus::comb_tree(101).unwrap();
    let report = openness_verdict_default(&small.identity, 3).unwrap();
    assert_eq!(report.verdict, OpennessVerdict::Refuted);
    assert!(!report.refutations.is_empty());
    pass("4 comb tree: rows gradually disjoint, images non-divergent across M=50/100/200, finite-to-1 evidence, openness refuted");
}

#[test]
fn criterion_5_group_quotients() {
    // reflection on Z
    let (_, action) = corpus::reflection_z(200).unwrap();
    let orbit = orbit_space(&action).unwrap();
    let q = &orbit.quotient;
    for &r in q.source().declared_radii() {
        assert_eq!(surjectivity_defect(q, r).unwrap().value, Some(0.0));
    }
    // stable 2-to-1 profile with S(R) = R exactly on R in 1..=20
    for r_in in 1..=20 {
        let cell = n_to_1_threshold(q, 2, r_in as f64, 200.0).unwrap();
        assert_eq!(cell.s, Some(r_in as f64), "S({r_in}) = {r_in} exactly");
        let src = q.source().truncation(200.0).unwrap();
        for cert in cell.certificates.iter().take(20) {
            assert!(check_split_certificate(&src, cert, 2));
        }
    }
    let radii = q.source().last_radii(3);
    let prof = n_to_1_profile(q, 2, &[1.0, 4.0, 16.0], &radii).unwrap();
    assert_eq!(prof.verdict, ProfileVerdict::Evidence);
    // openness evidence on the default suite
    let report = openness_verdict_default(q, 0).unwrap();
    assert_eq!(report.verdict, OpennessVerdict::Evidence);
    // asdim intervals match: [1,1] for Z and for the orbit half-line
    let cfg = AsdimConfig::default();
    let z = asdim_estimate(&corpus::int_line(200).unwrap(), "Z", 1, &[1.0, 2.0, 4.0], &cfg).unwrap();
    assert_eq!(z.interval, (1, Some(1)));
    let n_line = asdim_estimate(&orbit.tower, "N", 1, &[1.0, 2.0, 4.0], &cfg).unwrap();
    assert_eq!(n_line.interval, (1, Some(1)));

    // coordinate reflections on Z^2 at truncation M = 30: matching
    // [2,2] intervals, heuristic uppers, refutations on <= 40 points
    let (grid, gaction) = corpus::grid_reflections(30).unwrap();
    let gorbit = orbit_space(&gaction).unwrap();
    let gx = asdim_estimate(&grid, "Z2", 2, &[2.0, 4.0, 8.0], &cfg).unwrap();
    let gy = asdim_estimate(&gorbit.tower, "quarter", 2, &[2.0, 4.0, 8.0], &cfg).unwrap();
    assert_eq!(gx.interval, (2, Some(2)));
    assert_eq!(gy.interval, (2, Some(2)));
    for cert in gx.certs.iter().chain(&gy.certs) {
        assert!(cert.sub_points.len() <= 40, "refutation sub-instance beyond 40 points");
    }
    let v = check_raising(gx.interval, gy.interval, 4, true);
    assert!(v.consistent && v.equality_consistent == Some(true));
    pass("5 quotients: defect 0, S(R)=R on 1..20, openness evidence, asdim [1,1]/[1,1] and [2,2]/[2,2]");
}

#[test]
fn criterion_6_solver_soundness() {
    // independent oracle: full enumeration with BFS components
    fn oracle_optimum(space: &Space, n: usize, scale: f64) -> f64 {
        let pts = space.points();
        let m = pts.len();
        let mut colors = vec![0usize; m];
        let mut best = f64::INFINITY;
        loop {
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
            best = best.min(bound);
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

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..200u64 {
        // spaces up to 20 points; color counts sized so the oracle
        // enumeration stays tractable
        let n = 1 + (trial % 3) as usize;
        let max_pts = match n {
            1 => 20,
            2 => 11,
            _ => 9,
        };
        let m = rng.gen_range(4..=max_pts);
        let space = space_from_rows(random_metric_rows(&mut rng, m), m);
        let scale = rng.gen_range(1..=10) as f64;
        let want = oracle_optimum(&space, n, scale);
        let (got, cover) = control_exact(&space, n, scale, 40).unwrap();
        assert_eq!(got, want, "trial {trial}: m={m} n={n} R={scale}");
        assert!(verify_cover(&space, &cover), "trial {trial}: cover fails the checker");
    }
    pass("6 solver soundness: 200/200 random spaces match the enumeration oracle, covers verify");
}

#[test]
fn criterion_7_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_coarsekit");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();

    let emit = Command::new(bin)
        .args(["corpus", "emit", "--name", "coarse_cantor", "--params", "{\"k\":8}"])
        .args(["--file", &path("cantor.json"), "--out", &path("emit")])
        .output()
        .unwrap();
    assert!(emit.status.success());
    let emit_space = Command::new(bin)
        .args(["corpus", "emit", "--name", "xor_space", "--params", "{\"k\":7}"])
        .args(["--file", &path("xor.json"), "--out", &path("emit2")])
        .output()
        .unwrap();
    assert!(emit_space.status.success());

    let run_all = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let s = |v: &[&str]| -> Vec<String> { v.iter().map(|x| x.to_string()).collect() };
        let runs: Vec<Vec<String>> = vec![
            s(&[
                "profile", "--kind", "ntone", "--n", "2", "--R", "1,2,4", "--radii",
                "126,254,510", "--map", &path("cantor.json"), "--out", &path(&format!("prof{tag}")),
            ]),
            s(&[
                "witness", "--map", &path("cantor.json"), "--k", "2", "--budget", "50000",
                "--seed", "11", "--out", &path(&format!("wit{tag}")),
            ]),
            s(&[
                "dim-control", "--space", &path("xor.json"), "--n", "0,1", "--R", "2,4",
                "--out", &path(&format!("dim{tag}")),
            ]),
            s(&[
                "openness", "--map", &path("cantor.json"), "--seed", "5", "--out",
                &path(&format!("open{tag}")),
            ]),
        ];
        let mut outputs = Vec::new();
        for args in runs {
            let out = Command::new(bin).args(&args).output().unwrap();
            assert!(
                out.status.code() == Some(0),
                "command {:?} failed: {}",
                args,
                String::from_utf8_lossy(&out.stderr)
            );
            let prefix = args.last().unwrap().to_string();
            for ext in ["tsv", "json"] {
                let file = format!("{prefix}.{ext}");
                outputs.push((file.clone(), std::fs::read(&file).unwrap()));
            }
        }
        outputs
    };

    let first = run_all("a");
    let second = run_all("b");
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(second.iter()) {
        assert_eq!(
            bytes_a, bytes_b,
            "{name_a} and {name_b} differ between identical runs"
        );
    }
    pass("7 determinism: repeated CLI runs with fixed seeds are byte-identical");
}
