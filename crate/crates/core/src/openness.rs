//! Variable-radius neighborhoods N(A, rho) for nondecreasing
//! reparameterizations rho, and coarse-openness feasibility: the
//! largest rho-tilde with N(f(A), rho-tilde) inside f(N(A, rho)),
//! estimated shell by shell across truncations.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoarseError, Result};
use crate::families::FamilySpec;
use crate::maps::{MapSpec, INTERIOR_FRACTION};
use crate::space::{PointId, Space};

/// Nondecreasing step function on [0, inf). Declared-unbounded tails
/// extend past the last breakpoint with a fixed positive slope, which
/// is what makes the function increase towards infinity.
#[derive(Debug, Clone, Serialize)]
pub struct TIStepFunction {
    pub name: String,
    breakpoints: Vec<(f64, f64)>,
    tail_slope: Option<f64>,
}

impl TIStepFunction {
    pub fn new(name: impl Into<String>, breakpoints: Vec<(f64, f64)>, tail_slope: Option<f64>) -> Result<TIStepFunction> {
        if breakpoints.is_empty() {
            return Err(CoarseError::InvalidParam("step function needs breakpoints".into()));
        }
        let ascending = breakpoints.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1);
        if !ascending || breakpoints.iter().any(|&(t, v)| t < 0.0 || v < 0.0) {
            return Err(CoarseError::InvalidParam("breakpoints must ascend with nondecreasing values".into()));
        }
        if let Some(s) = tail_slope {
            if s <= 0.0 {
                return Err(CoarseError::InvalidParam("tail slope must be positive".into()));
            }
        }
        Ok(TIStepFunction { name: name.into(), breakpoints, tail_slope })
    }

    pub fn constant(c: f64) -> TIStepFunction {
        TIStepFunction::new(format!("const{c}"), vec![(0.0, c)], None).unwrap()
    }

    pub fn ramp(slope: f64) -> TIStepFunction {
        TIStepFunction::new(format!("ramp{slope}"), vec![(0.0, 0.0)], Some(slope)).unwrap()
    }

    /// Value at the greatest breakpoint <= t (0 before the first),
    /// extended by the tail slope past the last.
    pub fn eval(&self, t: f64) -> f64 {
        let &(last_t, last_v) = self.breakpoints.last().unwrap();
        if t > last_t {
            return match self.tail_slope {
                Some(s) => last_v + s * (t - last_t),
                None => last_v,
            };
        }
        self.breakpoints
            .iter()
            .rev()
            .find(|&&(bt, _)| bt <= t)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    }

    pub fn is_unbounded(&self) -> bool {
        self.tail_slope.is_some()
    }
}

/// Union over x in A of the ball around x with radius rho(d(x0, x)).
/// Coincides with the plain neighborhood for constant rho.
pub fn generalized_neighborhood(space: &Space, a: &[PointId], rho: &TIStepFunction) -> Vec<PointId> {
    let mut out: HashSet<PointId> = HashSet::new();
    for &x in a {
        let radius = rho.eval(space.dist_to_base(x));
        for &y in space.points() {
            if space.dist(y, x) <= radius {
                out.insert(y);
            }
        }
    }
    let mut v: Vec<PointId> = out.into_iter().collect();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellRow {
    pub t_lo: f64,
    pub t_hi: f64,
    /// min over image points in this shell of the distance to the
    /// complement of f(N(A, rho)); None when the complement is empty
    pub s: Option<f64>,
    pub witness: Option<PointId>,
}

/// Per-shell maximal rho-tilde candidates at one truncation.
#[derive(Debug, Clone, Serialize)]
pub struct OpennessTable {
    pub trunc_radius: f64,
    pub image_radius: f64,
    pub shell_width: f64,
    pub rows: Vec<ShellRow>,
}

/// Per distance shell t, the largest radius s(t) such that the
/// s(t)-ball around every image point of A in shell t stays inside
/// T = f(N(A, rho)). Rejects A bounded in the tower (A must meet the
/// outer shell of every truncation).
pub fn openness_feasible(f: &MapSpec, a: &FamilySpec, rho: &TIStepFunction, r: f64) -> Result<OpennessTable> {
    let src_tower = f.source();
    for &rr in src_tower.declared_radii() {
        if rr > r {
            break;
        }
        let trunc = src_tower.truncation(rr)?;
        let members = a.members_in(&trunc);
        // unboundedness surrogate: A reaches the outer half of every
        // declared truncation
        let hits_shell = members.iter().any(|&p| trunc.dist_to_base(p) > 0.5 * rr);
        if !hits_shell {
            return Err(CoarseError::BoundedInput(format!(
                "family {} misses the outer shell of truncation({rr})",
                a.name()
            )));
        }
    }
    let src = src_tower.truncation(r)?;
    let members = a.members_in(&src);
    let hood = generalized_neighborhood(&src, &members, rho);
    let mut image_t: HashSet<PointId> = hood.iter().map(|&x| f.apply(x)).collect();
    let ir = f.image_radius(r)?;
    let tgt = f.target().truncation(ir.min(f.target().max_radius()))?;
    image_t.retain(|&y| tgt.contains(y));
    let complement: Vec<PointId> = tgt
        .points()
        .iter()
        .copied()
        .filter(|y| !image_t.contains(y))
        .collect();
    let f_a: Vec<PointId> = members.iter().map(|&x| f.apply(x)).collect();

    let pts = tgt.points();
    let mut diam = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            diam = diam.max(tgt.dist(pts[i], pts[j]));
        }
    }
    let width = (diam / 16.0).max(1.0);
    let shells = ((ir / width).ceil() as usize).max(1);
    let mut rows: Vec<ShellRow> = (0..shells)
        .map(|i| ShellRow {
            t_lo: i as f64 * width,
            t_hi: (i as f64 + 1.0) * width,
            s: None,
            witness: None,
        })
        .collect();
    let mut seen = vec![false; shells];
    for &y in &f_a {
        if !tgt.contains(y) {
            continue;
        }
        let t = tgt.dist_to_base(y);
        let idx = ((t / width).floor() as usize).min(shells - 1);
        let d = complement
            .iter()
            .map(|&c| tgt.dist(y, c))
            .min_by(f64::total_cmp);
        match d {
            Some(d) => {
                if !seen[idx] || rows[idx].s.is_none_or(|s| d < s) {
                    rows[idx].s = Some(d);
                    rows[idx].witness = Some(y);
                }
            }
            None => {
                // empty complement: unbounded at this shell
                if !seen[idx] {
                    rows[idx].s = None;
                    rows[idx].witness = Some(y);
                }
            }
        }
        seen[idx] = true;
    }
    let rows: Vec<ShellRow> = rows
        .into_iter()
        .zip(&seen)
        .filter(|(_, &s)| s)
        .map(|(row, _)| row)
        .collect();
    Ok(OpennessTable { trunc_radius: r, image_radius: ir, shell_width: width, rows })
}

/// Tail value of the monotone lower envelope: min s over the interior
/// far shells. None means the envelope is unbounded there.
fn envelope_tail(table: &OpennessTable) -> Option<f64> {
    let lo = 0.45 * table.image_radius;
    let hi = INTERIOR_FRACTION * table.image_radius;
    let mut tail: Option<f64> = None;
    let mut any = false;
    for row in &table.rows {
        if row.t_hi < lo || row.t_lo > hi {
            continue;
        }
        if row.witness.is_none() {
            continue;
        }
        any = true;
        if let Some(s) = row.s {
            tail = Some(tail.map_or(s, |t: f64| t.min(s)));
        }
    }
    if any {
        tail.or(Some(f64::INFINITY))
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PairVerdict {
    /// envelope tail grows without bound across truncations
    Unbounded,
    /// envelope tail stays bounded: refutation certificate for this (A, rho)
    Bounded,
    Inconclusive,
    /// bounded rho: reported for diagnostics, never drives the verdict
    Diagnostic,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub family: String,
    pub rho: String,
    pub rho_unbounded: bool,
    pub tails: Vec<(f64, Option<f64>)>,
    pub verdict: PairVerdict,
    pub tables: Vec<OpennessTable>,
}

/// Evidence of coarse openness for one (A, rho) requires the envelope
/// tail to grow strictly through the last three truncations (an
/// everywhere-empty complement counts as unbounded).
pub fn openness_pair(f: &MapSpec, a: &FamilySpec, rho: &TIStepFunction, radii: &[f64]) -> Result<PairReport> {
    let mut tables = Vec::new();
    let mut tails = Vec::new();
    for &r in radii {
        let table = openness_feasible(f, a, rho, r)?;
        tails.push((r, envelope_tail(&table)));
        tables.push(table);
    }
    // evidence surrogate: the envelope tail must not decrease through
    // the last truncations and at the top it must dominate a scaled
    // copy of rho, i.e. the candidate rho-tilde keeps pace with the
    // tested reparameterization; stagnation below that pace refutes
    // this (A, rho) pair
    let verdict = if !rho.is_unbounded() {
        PairVerdict::Diagnostic
    } else if tails.len() < 3 {
        PairVerdict::Inconclusive
    } else {
        let t = &tails[tails.len() - 3..];
        let values: Vec<Option<f64>> = t.iter().map(|&(_, v)| v).collect();
        let top_ir = tables.last().unwrap().image_radius;
        let pace = 0.4 * rho.eval(0.45 * top_ir);
        let nondecreasing = values.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b >= a,
            (_, None) => true,
            (None, Some(_)) => false,
        });
        let top = values.last().unwrap();
        let keeps_pace = top.is_none_or(|v| v >= pace);
        let first = tails[0].1;
        let stagnant = matches!((first, top), (Some(a), Some(b)) if b.is_finite() && *b <= a);
        if nondecreasing && keeps_pace {
            PairVerdict::Unbounded
        } else if stagnant && !keeps_pace {
            PairVerdict::Bounded
        } else {
            PairVerdict::Inconclusive
        }
    };
    Ok(PairReport {
        family: a.name().to_string(),
        rho: rho.name.clone(),
        rho_unbounded: rho.is_unbounded(),
        tails,
        verdict,
        tables,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OpennessVerdict {
    Evidence,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct OpennessReport {
    pub map_name: String,
    pub suite: Vec<String>,
    pub rho_grid: Vec<String>,
    pub basepoint: PointId,
    pub pairs: Vec<PairReport>,
    pub verdict: OpennessVerdict,
    /// (family, rho) pairs whose bounded envelope refutes openness
    pub refutations: Vec<(String, String)>,
}

/// Default rho grid: constants 1,2,4,8 (diagnostics; a bounded rho is
/// never TI-increasing) plus the linear ramps t/8, t/4, t/2.
pub fn default_rho_grid() -> Vec<TIStepFunction> {
    let mut grid: Vec<TIStepFunction> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&c| TIStepFunction::constant(c))
        .collect();
    for slope in [0.125, 0.25, 0.5] {
        grid.push(TIStepFunction::ramp(slope));
    }
    grid
}

/// Structured suite of unbounded test sets: greedy rays walking shell
/// by shell, pullbacks of target rays, and seeded random shell-hitting
/// sets. The suite composition is part of the report.
pub fn default_suite(f: &MapSpec, seed: u64) -> Result<Vec<FamilySpec>> {
    let tower = f.source();
    let top = tower.truncation(tower.max_radius())?;
    let mut suite = Vec::new();
    suite.push(greedy_ray(&top, tower.max_radius(), false, "ray-min"));
    suite.push(greedy_ray(&top, tower.max_radius(), true, "ray-max"));
    // pullback of a target ray through f
    let ttower = f.target();
    let ttop = ttower.truncation(ttower.max_radius())?;
    let tray = greedy_ray(&ttop, ttower.max_radius(), false, "target-ray");
    if let FamilySpec::Explicit { points, .. } = &tray {
        let ray_set: HashSet<PointId> = points.iter().copied().collect();
        let pullback: Vec<PointId> = top
            .points()
            .iter()
            .copied()
            .filter(|&x| ray_set.contains(&f.apply(x)))
            .collect();
        suite.push(FamilySpec::explicit("fiber-pullback", pullback));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for copy in 0..2 {
        let pts = random_shell_set(&top, tower.max_radius(), &mut rng);
        suite.push(FamilySpec::explicit(format!("random-shells-{copy}"), pts));
    }
    Ok(suite)
}

/// Walks outward one shell at a time, always to the point nearest the
/// previous pick (max variant: farthest), producing an unbounded
/// ray-like set with stable ids.
fn greedy_ray(space: &Space, max_radius: f64, farthest: bool, name: &str) -> FamilySpec {
    let shells = 16usize;
    let width = (max_radius / shells as f64).max(1.0);
    let mut current = space.basepoint();
    let mut picks = vec![current];
    for i in 0..shells {
        let lo = i as f64 * width;
        let hi = (i as f64 + 1.0) * width;
        let cand = space
            .points()
            .iter()
            .copied()
            .filter(|&p| {
                let d = space.dist_to_base(p);
                d > lo && d <= hi
            })
            .min_by(|&a, &b| {
                let da = space.dist(a, current);
                let db = space.dist(b, current);
                let ord = da.total_cmp(&db);
                (if farthest { ord.reverse() } else { ord }).then(a.cmp(&b))
            });
        if let Some(p) = cand {
            picks.push(p);
            current = p;
        }
    }
    FamilySpec::explicit(name, picks)
}

fn random_shell_set(space: &Space, max_radius: f64, rng: &mut ChaCha8Rng) -> Vec<PointId> {
    let shells = 16usize;
    let width = (max_radius / shells as f64).max(1.0);
    let mut picks = vec![space.basepoint()];
    for i in 0..shells {
        let lo = i as f64 * width;
        let hi = (i as f64 + 1.0) * width;
        let cands: Vec<PointId> = space
            .points()
            .iter()
            .copied()
            .filter(|&p| {
                let d = space.dist_to_base(p);
                d > lo && d <= hi
            })
            .collect();
        if !cands.is_empty() {
            picks.push(cands[rng.gen_range(0..cands.len())]);
        }
    }
    picks
}

/// Aggregates feasibility over the suite and the rho grid. The verdict
/// quantifies over the TI-increasing (declared-unbounded) rho only;
/// bounded rho rows are diagnostics.
pub fn openness_verdict(
    f: &MapSpec,
    suite: &[FamilySpec],
    rho_grid: &[TIStepFunction],
    radii: &[f64],
) -> Result<OpennessReport> {
    let mut pairs = Vec::new();
    let mut refutations = Vec::new();
    let mut all_unbounded = true;
    for a in suite {
        for rho in rho_grid {
            let report = match openness_pair(f, a, rho, radii) {
                Ok(rep) => rep,
                Err(CoarseError::BoundedInput(_)) => continue,
                Err(e) => return Err(e),
            };
            match report.verdict {
                PairVerdict::Bounded => {
                    refutations.push((report.family.clone(), report.rho.clone()));
                    all_unbounded = false;
                }
                PairVerdict::Inconclusive => all_unbounded = false,
                _ => {}
            }
            pairs.push(report);
        }
    }
    let verdict = if !refutations.is_empty() {
        OpennessVerdict::Refuted
    } else if all_unbounded && pairs.iter().any(|p| p.verdict == PairVerdict::Unbounded) {
        OpennessVerdict::Evidence
    } else {
        OpennessVerdict::Inconclusive
    };
    Ok(OpennessReport {
        map_name: f.name.clone(),
        suite: suite.iter().map(|a| a.name().to_string()).collect(),
        rho_grid: rho_grid.iter().map(|r| r.name.clone()).collect(),
        basepoint: f.source().basepoint(),
        pairs,
        verdict,
        refutations,
    })
}

/// Convenience: default suite and grid over the declared radii.
pub fn openness_verdict_default(f: &MapSpec, seed: u64) -> Result<OpennessReport> {
    let suite = default_suite(f, seed)?;
    let grid = default_rho_grid();
    let radii: Vec<f64> = f.source().declared_radii().to_vec();
    openness_verdict(f, &suite, &grid, &radii)
}
