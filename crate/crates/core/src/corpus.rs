//! Deterministic builders for every space, map, family and action the
//! test corpus uses, plus stock spaces for generic testing. Builders
//! are pure functions of their parameters and every produced space
//! passes metric validation.

use std::sync::Arc;

use serde_json::Value;

use crate::actions::GroupAction;
use crate::error::{CoarseError, Result};
use crate::families::{FamilyCollection, FamilySpec};
use crate::maps::MapSpec;
use crate::space::{CoordFn, Metric, PointId, Space};
use crate::tower::Tower;

const ENC_STRIDE: i64 = 1 << 20;
const ENC_OFF: i64 = 1 << 19;

/// Packs planar coordinates into a stable id.
pub fn encode_xy(x: i64, y: i64) -> PointId {
    PointId((x + ENC_OFF) * ENC_STRIDE + (y + ENC_OFF))
}

pub fn decode_xy(p: PointId) -> (i64, i64) {
    let x = p.0.div_euclid(ENC_STRIDE) - ENC_OFF;
    let y = p.0.rem_euclid(ENC_STRIDE) - ENC_OFF;
    (x, y)
}

fn xy_coord_fn() -> CoordFn {
    Arc::new(|p| Some(decode_xy(p)))
}

fn line_coord_fn() -> CoordFn {
    Arc::new(|p| Some((p.0, 0)))
}

struct LineMetric;
impl Metric for LineMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        (a.0 - b.0).abs() as f64
    }
}

/// Digit-weighted xor metric: d(a, b) = sum over differing binary
/// digits i (counted from 1) of 2^i, i.e. twice the xor of the labels.
/// All distances are even by construction.
struct XorMetric;
impl Metric for XorMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        (2 * (a.0 ^ b.0)) as f64
    }
}

struct GridLInfMetric;
impl Metric for GridLInfMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        let (ax, ay) = decode_xy(a);
        let (bx, by) = decode_xy(b);
        ((ax - bx).abs().max((ay - by).abs())) as f64
    }
}

/// Euclidean distance on integer points, rounded up to the dyadic grid
/// 1/256 through exact integer square roots. Ceiling is subadditive,
/// so the triangle inequality holds exactly on the stored values, and
/// perfect squares (in particular all axis-aligned distances) stay
/// exact integers.
struct EuclidXYMetric;

const EUCLID_SHIFT: u32 = 8;

impl Metric for EuclidXYMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        let (ax, ay) = decode_xy(a);
        let (bx, by) = decode_xy(b);
        let dx = (ax - bx).unsigned_abs();
        let dy = (ay - by).unsigned_abs();
        let n = (dx * dx + dy * dy) << (2 * EUCLID_SHIFT);
        let root = n.isqrt();
        let ceil = root + u64::from(root * root < n);
        ceil as f64 / (1u64 << EUCLID_SHIFT) as f64
    }
}

/// Path metric on the comb tree: rows y = k live at x >= k and
/// consecutive rows join through the unit bridge at x = k+1, so the
/// unique tree path between rows detours through the diagonal.
struct CombPathMetric;
impl Metric for CombPathMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        let (ax, ay) = decode_xy(a);
        let (bx, by) = decode_xy(b);
        let ((x1, k1), (x2, k2)) = if ay <= by {
            ((ax, ay), (bx, by))
        } else {
            ((bx, by), (ax, ay))
        };
        if k1 == k2 {
            return (x1 - x2).abs() as f64;
        }
        let walk_in = (x1 - (k1 + 1)).abs();
        let climbs = 1 + 2 * (k2 - k1 - 1);
        let walk_out = (x2 - k2).abs();
        (walk_in + climbs + walk_out) as f64
    }
}

/// Complete binary tree with unit edges, nodes heap-labeled from 1.
struct BinaryTreeMetric;
impl BinaryTreeMetric {
    fn depth(v: i64) -> i64 {
        63 - (v as u64).leading_zeros() as i64
    }
}
impl Metric for BinaryTreeMetric {
    fn dist(&self, a: PointId, b: PointId) -> f64 {
        let (mut u, mut v) = (a.0, b.0);
        let (du, dv) = (Self::depth(u), Self::depth(v));
        let (mut hu, mut hv) = (du, dv);
        while hu > hv {
            u >>= 1;
            hu -= 1;
        }
        while hv > hu {
            v >>= 1;
            hv -= 1;
        }
        while u != v {
            u >>= 1;
            v >>= 1;
            hu -= 1;
        }
        ((du - hu) + (dv - hu)) as f64
    }
}

fn quarter_radii(m: i64) -> Vec<f64> {
    let mut radii: Vec<f64> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| (m as f64 * f).ceil())
        .collect();
    radii.dedup();
    radii
}

/// Integers 0..=m with the euclidean metric, basepoint 0.
pub fn half_line(m: i64) -> Result<Arc<Tower>> {
    if m < 1 {
        return Err(CoarseError::InvalidParam("half_line needs m >= 1".into()));
    }
    let ids = (0..=m).map(PointId).collect();
    let space = Space::new(ids, Arc::new(LineMetric), PointId(0))?.with_coords(line_coord_fn());
    Ok(Arc::new(Tower::new(space, quarter_radii(m))?))
}

/// Integers -m..=m, basepoint 0.
pub fn int_line(m: i64) -> Result<Arc<Tower>> {
    if m < 1 {
        return Err(CoarseError::InvalidParam("line needs m >= 1".into()));
    }
    let ids = (-m..=m).map(PointId).collect();
    let space = Space::new(ids, Arc::new(LineMetric), PointId(0))?.with_coords(line_coord_fn());
    Ok(Arc::new(Tower::new(space, quarter_radii(m))?))
}

/// Even integers 0..=m, basepoint 0.
pub fn even_half_line(m: i64) -> Result<Arc<Tower>> {
    if m < 2 {
        return Err(CoarseError::InvalidParam("even_half_line needs m >= 2".into()));
    }
    let ids = (0..=m).filter(|x| x % 2 == 0).map(PointId).collect();
    let space = Space::new(ids, Arc::new(LineMetric), PointId(0))?.with_coords(line_coord_fn());
    Ok(Arc::new(Tower::new(space, quarter_radii(m))?))
}

/// The l-infinity grid [-m, m]^2, basepoint the origin. Truncation
/// radii start at half the extent so that cover patterns at desk
/// scales fit whole tiles into every compared truncation.
pub fn grid2(m: i64) -> Result<Arc<Tower>> {
    if !(2..ENC_OFF).contains(&m) {
        return Err(CoarseError::InvalidParam("grid needs 2 <= m < 2^19".into()));
    }
    let mut ids = Vec::with_capacity(((2 * m + 1) * (2 * m + 1)) as usize);
    for x in -m..=m {
        for y in -m..=m {
            ids.push(encode_xy(x, y));
        }
    }
    let space = Space::new(ids, Arc::new(GridLInfMetric), encode_xy(0, 0))?.with_coords(xy_coord_fn());
    let mut radii: Vec<f64> = [0.5, 2.0 / 3.0, 5.0 / 6.0, 1.0]
        .iter()
        .map(|f| (m as f64 * f).ceil())
        .collect();
    radii.dedup();
    Ok(Arc::new(Tower::new(space, radii)?))
}

/// Balls of the complete binary tree of the given depth, path metric,
/// basepoint the root.
pub fn binary_tree(depth: u32) -> Result<Arc<Tower>> {
    if depth == 0 || depth > 14 {
        return Err(CoarseError::InvalidParam("binary_tree needs 1 <= depth <= 14".into()));
    }
    let ids = (1..(1i64 << (depth + 1))).map(PointId).collect();
    let space = Space::new(ids, Arc::new(BinaryTreeMetric), PointId(1))?;
    let radii: Vec<f64> = {
        let mut r: Vec<f64> = [0.5, 0.75, 1.0]
            .iter()
            .map(|f| (depth as f64 * f).ceil())
            .collect();
        r.dedup();
        r
    };
    Ok(Arc::new(Tower::new(space, radii)?))
}

/// The weighted-xor space on k binary digits: labels 0..2^k-1,
/// d(a,b) = 2 * xor(a,b), truncation radius 2^(j+1)-2 holds exactly
/// the j-digit subspace.
pub fn xor_space(k: u32) -> Result<Arc<Tower>> {
    if k == 0 || k > 20 {
        return Err(CoarseError::InvalidParam("xor_space needs 1 <= k <= 20".into()));
    }
    let ids = (0..(1i64 << k)).map(PointId).collect();
    let space = Space::new(ids, Arc::new(XorMetric), PointId(0))?;
    let radii: Vec<f64> = (1..=k).map(|j| (1u64 << (j + 1)) as f64 - 2.0).collect();
    Ok(Arc::new(Tower::new(space, radii)?))
}

/// Target half-line for the coarse Cantor map: integers 0..2^k-1 with
/// truncation radii 2^j - 1.
pub fn cantor_target(k: u32) -> Result<Arc<Tower>> {
    if k == 0 || k > 20 {
        return Err(CoarseError::InvalidParam("cantor_target needs 1 <= k <= 20".into()));
    }
    let ids = (0..(1i64 << k)).map(PointId).collect();
    let space = Space::new(ids, Arc::new(LineMetric), PointId(0))?.with_coords(line_coord_fn());
    let radii: Vec<f64> = (1..=k).map(|j| (1u64 << j) as f64 - 1.0).collect();
    Ok(Arc::new(Tower::new(space, radii)?))
}

/// The coarse Cantor map: the digit sequence with weighted-xor metric
/// sent to the integer it denotes on the half-line. Bijective at every
/// truncation level, contracts distances by at least half.
pub fn coarse_cantor(k: u32) -> Result<MapSpec> {
    let source = xor_space(k)?;
    let target = cantor_target(k)?;
    Ok(MapSpec::new(
        format!("coarse_cantor_k{k}"),
        source,
        target,
        Arc::new(|p| p),
    ))
}

pub struct CombBundle {
    pub path: Arc<Tower>,
    pub euclid: Arc<Tower>,
    pub identity: MapSpec,
    pub rows: FamilyCollection,
}

/// Integer comb tree inside [1, m]^2: rows (x, k) for x >= k joined by
/// unit bridges at x = k+1, with the tree path metric on one tower and
/// the euclidean metric on the same points on the other. Row families
/// A_1..A_5 come along for the divergence experiments.
pub fn comb_tree(m: i64) -> Result<CombBundle> {
    if !(8..ENC_OFF).contains(&m) {
        return Err(CoarseError::InvalidParam("comb_tree needs 8 <= m < 2^19".into()));
    }
    let mut ids = Vec::new();
    for y in 1..=m {
        for x in y..=m {
            ids.push(encode_xy(x, y));
        }
    }
    let base = encode_xy(1, 1);
    let path_space = Space::new(ids.clone(), Arc::new(CombPathMetric), base)?.with_coords(xy_coord_fn());
    let euclid_space = Space::new(ids, Arc::new(EuclidXYMetric), base)?.with_coords(xy_coord_fn());
    // farthest usable radius: every comb point within distance r of the
    // base has x <= r + 1, so r = m - 1 keeps truncations exhaustive
    let top = (m - 1) as f64;
    let radii: Vec<f64> = [0.25, 0.5, 0.75, 1.0].iter().map(|f| (top * f).ceil()).collect();
    let path = Arc::new(Tower::new(path_space, radii.clone())?);
    let euclid = Arc::new(Tower::new(euclid_space, radii)?);
    let identity = MapSpec::new(
        format!("comb_identity_m{m}"),
        path.clone(),
        euclid.clone(),
        Arc::new(|p| p),
    );
    let rows = FamilyCollection::new(
        path.clone(),
        (1..=5)
            .map(|k| FamilySpec::Predicate {
                name: format!("A{k}"),
                pred: Arc::new(move |p| decode_xy(p).1 == k),
            })
            .collect(),
    );
    Ok(CombBundle { path, euclid, identity, rows })
}

/// Euclidean images of the comb rows, as families over the euclidean
/// tower.
pub fn comb_row_images(bundle: &CombBundle) -> FamilyCollection {
    FamilyCollection::new(
        bundle.euclid.clone(),
        (1..=5)
            .map(|k| FamilySpec::Predicate {
                name: format!("fA{k}"),
                pred: Arc::new(move |p| decode_xy(p).1 == k),
            })
            .collect(),
    )
}

/// Inclusion of the even integers into the integers on [0, m].
pub fn even_inclusion(m: i64) -> Result<MapSpec> {
    let source = even_half_line(m)?;
    let target = half_line(m)?;
    Ok(MapSpec::new(
        format!("even_inclusion_m{m}"),
        source,
        target,
        Arc::new(|p| p),
    ))
}

/// Identity self-map of a tower.
pub fn identity_map(tower: Arc<Tower>, name: impl Into<String>) -> MapSpec {
    MapSpec::new(name, tower.clone(), tower, Arc::new(|p| p))
}

/// The two-element reflection group {id, x -> -x} on [-m, m].
pub fn reflection_z(m: i64) -> Result<(Arc<Tower>, GroupAction)> {
    let tower = int_line(m)?;
    let elements: Vec<crate::actions::PermFn> =
        vec![Arc::new(|p| p), Arc::new(|p: PointId| PointId(-p.0))];
    let action = GroupAction::new(
        tower.clone(),
        elements,
        vec!["e".into(), "s".into()],
        0,
        vec![vec![0, 1], vec![1, 0]],
    );
    Ok((tower, action))
}

/// Coordinate reflections (Z2 x Z2) on any tower with planar ids.
pub fn grid_reflections_on(tower: Arc<Tower>) -> GroupAction {
    let flip = |sx: i64, sy: i64| -> crate::actions::PermFn {
        Arc::new(move |p| {
            let (x, y) = decode_xy(p);
            encode_xy(sx * x, sy * y)
        })
    };
    let elements = vec![flip(1, 1), flip(-1, 1), flip(1, -1), flip(-1, -1)];
    // indices compose like sign-bit xor
    let table = (0..4).map(|i| (0..4).map(|j| i ^ j).collect()).collect();
    GroupAction::new(
        tower,
        elements,
        vec!["e".into(), "sx".into(), "sy".into(), "sxy".into()],
        0,
        table,
    )
}

/// Coordinate reflections (Z2 x Z2) on the l-infinity grid [-m, m]^2.
pub fn grid_reflections(m: i64) -> Result<(Arc<Tower>, GroupAction)> {
    let tower = grid2(m)?;
    Ok((tower.clone(), grid_reflections_on(tower)))
}

/// The trivial one-element action on any tower.
pub fn trivial_action(tower: Arc<Tower>) -> GroupAction {
    GroupAction::new(tower.clone(), vec![Arc::new(|p| p)], vec!["e".into()], 0, vec![vec![0]])
}

pub enum CorpusItem {
    Space(Arc<Tower>),
    Map(MapSpec),
    Action { tower: Arc<Tower>, action: GroupAction },
}

pub struct CorpusEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub params_help: &'static str,
    pub note: &'static str,
}

pub fn list() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry { name: "half_line", kind: "space", params_help: "{\"m\":100}", note: "integers 0..m, euclidean metric" },
        CorpusEntry { name: "line", kind: "space", params_help: "{\"m\":100}", note: "integers -m..m, euclidean metric" },
        CorpusEntry { name: "even_half_line", kind: "space", params_help: "{\"m\":100}", note: "even integers 0..m" },
        CorpusEntry { name: "grid", kind: "space", params_help: "{\"m\":30}", note: "l-infinity grid [-m,m]^2" },
        CorpusEntry { name: "binary_tree", kind: "space", params_help: "{\"depth\":10}", note: "complete binary tree balls, path metric" },
        CorpusEntry { name: "xor_space", kind: "space", params_help: "{\"k\":10}", note: "k binary digits, d = 2*xor; dyadic blocks are far apart" },
        CorpusEntry { name: "comb_path", kind: "space", params_help: "{\"m\":100}", note: "comb tree rows with bridges, tree path metric" },
        CorpusEntry { name: "comb_euclid", kind: "space", params_help: "{\"m\":100}", note: "comb tree points, euclidean metric" },
        CorpusEntry { name: "coarse_cantor", kind: "map", params_help: "{\"k\":10}", note: "digit space onto the integer half-line; coarsely 2-to-1" },
        CorpusEntry { name: "comb_identity", kind: "map", params_help: "{\"m\":100}", note: "identity from path metric to euclidean metric; finite-to-1, not coarsely open" },
        CorpusEntry { name: "even_inclusion", kind: "map", params_help: "{\"m\":100}", note: "even integers included into the integers" },
        CorpusEntry { name: "identity", kind: "map", params_help: "{\"space\":\"half_line\",\"m\":100}", note: "identity self-map of a stock space" },
        CorpusEntry { name: "quotient_reflection_z", kind: "map", params_help: "{\"m\":200}", note: "orbit quotient of the reflection action on the line" },
        CorpusEntry { name: "quotient_grid_reflections", kind: "map", params_help: "{\"m\":30}", note: "orbit quotient of coordinate reflections on the grid" },
        CorpusEntry { name: "reflection_z", kind: "action", params_help: "{\"m\":200}", note: "Z2 reflection action on the line" },
        CorpusEntry { name: "grid_reflections", kind: "action", params_help: "{\"m\":30}", note: "Z2 x Z2 coordinate reflections on the grid" },
    ]
}

fn param_i64(params: &Value, key: &str) -> Result<i64> {
    params
        .get(key)
        .and_then(Value::as_i64)
        .ok_or_else(|| CoarseError::InvalidParam(format!("missing integer parameter '{key}'")))
}

pub fn build(name: &str, params: &Value) -> Result<CorpusItem> {
    match name {
        "half_line" => Ok(CorpusItem::Space(half_line(param_i64(params, "m")?)?)),
        "line" => Ok(CorpusItem::Space(int_line(param_i64(params, "m")?)?)),
        "even_half_line" => Ok(CorpusItem::Space(even_half_line(param_i64(params, "m")?)?)),
        "grid" => {
            let m = param_i64(params, "m")?;
            match params.get("d").and_then(Value::as_i64).unwrap_or(2) {
                1 => Ok(CorpusItem::Space(int_line(m)?)),
                2 => Ok(CorpusItem::Space(grid2(m)?)),
                d => Err(CoarseError::InvalidParam(format!("grid supports d in {{1,2}}, got {d}"))),
            }
        }
        "binary_tree" => Ok(CorpusItem::Space(binary_tree(param_i64(params, "depth")? as u32)?)),
        "xor_space" => Ok(CorpusItem::Space(xor_space(param_i64(params, "k")? as u32)?)),
        "comb_path" => Ok(CorpusItem::Space(comb_tree(param_i64(params, "m")?)?.path)),
        "comb_euclid" => Ok(CorpusItem::Space(comb_tree(param_i64(params, "m")?)?.euclid)),
        "coarse_cantor" => Ok(CorpusItem::Map(coarse_cantor(param_i64(params, "k")? as u32)?)),
        "comb_identity" => Ok(CorpusItem::Map(comb_tree(param_i64(params, "m")?)?.identity)),
        "even_inclusion" => Ok(CorpusItem::Map(even_inclusion(param_i64(params, "m")?)?)),
        "identity" => {
            let inner = params
                .get("space")
                .and_then(Value::as_str)
                .ok_or_else(|| CoarseError::InvalidParam("identity needs a 'space' name".into()))?;
            match build(inner, params)? {
                CorpusItem::Space(t) => Ok(CorpusItem::Map(identity_map(t, format!("identity_{inner}")))),
                _ => Err(CoarseError::InvalidParam("identity wraps spaces only".into())),
            }
        }
        "quotient_reflection_z" => {
            let (_, action) = reflection_z(param_i64(params, "m")?)?;
            let orbit = crate::actions::orbit_space(&action)?;
            Ok(CorpusItem::Map(orbit.quotient))
        }
        "quotient_grid_reflections" => {
            let (_, action) = grid_reflections(param_i64(params, "m")?)?;
            let orbit = crate::actions::orbit_space(&action)?;
            Ok(CorpusItem::Map(orbit.quotient))
        }
        "reflection_z" => {
            let (tower, action) = reflection_z(param_i64(params, "m")?)?;
            Ok(CorpusItem::Action { tower, action })
        }
        "grid_reflections" => {
            let (tower, action) = grid_reflections(param_i64(params, "m")?)?;
            Ok(CorpusItem::Action { tower, action })
        }
        _ => Err(CoarseError::UnknownCorpusEntry(name.to_string())),
    }
}
