//! JSON wire formats: spaces, maps and actions. Generator-kind files
//! round-trip through the corpus builders; matrix-kind files carry the
//! metric inline.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::actions::{GroupAction, PermFn};
use crate::corpus::{self, CorpusItem};
use crate::error::{CoarseError, Result};
use crate::maps::MapSpec;
use crate::space::{MatrixMetric, PointId, Space};
use crate::tower::Tower;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricJson {
    Matrix { rows: Vec<Vec<f64>> },
    Generator { name: String, params: Value },
}

/// `{ "points": [ids], "basepoint": id, "metric": {...}, "radii": [..] }`.
/// Generator-kind files may omit the point list; matrix-kind files
/// must carry it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceJson {
    #[serde(default)]
    pub points: Vec<i64>,
    #[serde(default)]
    pub basepoint: i64,
    pub metric: MetricJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

impl SpaceJson {
    pub fn to_tower(&self) -> Result<Arc<Tower>> {
        match &self.metric {
            MetricJson::Generator { name, params } => match corpus::build(name, params)? {
                CorpusItem::Space(t) => {
                    if !self.points.is_empty() && self.points.len() != t.ambient().len() {
                        return Err(CoarseError::Schema(format!(
                            "generator '{name}' yields {} points, file lists {}",
                            t.ambient().len(),
                            self.points.len()
                        )));
                    }
                    Ok(t)
                }
                _ => Err(CoarseError::Schema(format!("corpus entry '{name}' is not a space"))),
            },
            MetricJson::Matrix { rows } => {
                if self.points.is_empty() {
                    return Err(CoarseError::Schema("matrix spaces need a point list".into()));
                }
                let ids: Vec<PointId> = self.points.iter().map(|&i| PointId(i)).collect();
                let n = ids.len();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CoarseError::Schema(format!(
                        "matrix must be {n}x{n} for {n} points"
                    )));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                let metric = MatrixMetric::new(ids.clone(), flat)?;
                let space = Space::new(ids, Arc::new(metric), PointId(self.basepoint))?;
                let radii = match &self.radii {
                    Some(r) => r.clone(),
                    None => vec![space.radius().max(1.0)],
                };
                Ok(Arc::new(Tower::new(space, radii)?))
            }
        }
    }

    pub fn from_generator(name: &str, params: Value) -> Result<SpaceJson> {
        match corpus::build(name, &params)? {
            CorpusItem::Space(t) => Ok(SpaceJson {
                points: t.ambient().points().iter().map(|p| p.0).collect(),
                basepoint: t.basepoint().0,
                metric: MetricJson::Generator { name: name.to_string(), params },
                radii: Some(t.declared_radii().to_vec()),
            }),
            _ => Err(CoarseError::Schema(format!("corpus entry '{name}' is not a space"))),
        }
    }

    /// Inline matrix dump of a tower's ambient space.
    pub fn from_tower_matrix(tower: &Tower) -> SpaceJson {
        let space = tower.ambient();
        let pts = space.points();
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|&p| pts.iter().map(|&q| space.dist(p, q)).collect())
            .collect();
        SpaceJson {
            points: pts.iter().map(|p| p.0).collect(),
            basepoint: space.basepoint().0,
            metric: MetricJson::Matrix { rows },
            radii: Some(tower.declared_radii().to_vec()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapJson {
    Generator {
        generator: GeneratorRef,
    },
    Explicit {
        source: SpaceJson,
        target: SpaceJson,
        /// source id (as decimal string) -> target id
        assign: BTreeMap<String, i64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorRef {
    pub name: String,
    pub params: Value,
}

impl MapJson {
    pub fn to_map(&self) -> Result<MapSpec> {
        match self {
            MapJson::Generator { generator } => match corpus::build(&generator.name, &generator.params)? {
                CorpusItem::Map(m) => Ok(m),
                _ => Err(CoarseError::Schema(format!(
                    "corpus entry '{}' is not a map",
                    generator.name
                ))),
            },
            MapJson::Explicit { source, target, assign } => {
                let src = source.to_tower()?;
                let tgt = target.to_tower()?;
                let mut table: BTreeMap<PointId, PointId> = BTreeMap::new();
                for (k, &v) in assign {
                    let key: i64 = k
                        .parse()
                        .map_err(|_| CoarseError::Schema(format!("bad source id '{k}'")))?;
                    table.insert(PointId(key), PointId(v));
                }
                for &p in src.ambient().points() {
                    if !table.contains_key(&p) {
                        return Err(CoarseError::Schema(format!("map misses source point {p}")));
                    }
                }
                let table = Arc::new(table);
                let map = MapSpec::new(
                    "explicit",
                    src,
                    tgt,
                    Arc::new(move |p| table[&p]),
                );
                map.validate()?;
                Ok(map)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionElementJson {
    /// source id (decimal string) -> image id, over the ambient space
    pub perm: BTreeMap<String, i64>,
}

/// `{ "elements": [{"perm": {...}}], "table": [[...]], "identity": 0 }`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ActionJson {
    #[serde(rename = "generator")]
    Generator(GeneratorRef),
    #[serde(rename = "explicit")]
    Explicit {
        elements: Vec<ActionElementJson>,
        table: Vec<Vec<usize>>,
        #[serde(default)]
        identity: usize,
    },
}

impl ActionJson {
    pub fn to_action(&self, tower: Arc<Tower>) -> Result<GroupAction> {
        match self {
            ActionJson::Generator(genref) => match corpus::build(&genref.name, &genref.params)? {
                CorpusItem::Action { action, .. } => Ok(action),
                _ => Err(CoarseError::Schema(format!(
                    "corpus entry '{}' is not an action",
                    genref.name
                ))),
            },
            ActionJson::Explicit { elements, table, identity } => {
                let mut perms: Vec<PermFn> = Vec::new();
                for el in elements {
                    let mut map: BTreeMap<PointId, PointId> = BTreeMap::new();
                    for (k, &v) in &el.perm {
                        let key: i64 = k
                            .parse()
                            .map_err(|_| CoarseError::Schema(format!("bad point id '{k}'")))?;
                        map.insert(PointId(key), PointId(v));
                    }
                    let map = Arc::new(map);
                    perms.push(Arc::new(move |p| *map.get(&p).unwrap_or(&p)));
                }
                let names = (0..perms.len()).map(|i| format!("g{i}")).collect();
                Ok(GroupAction::new(tower, perms, names, *identity, table.clone()))
            }
        }
    }

    pub fn from_action(action: &GroupAction) -> ActionJson {
        let ambient = action.tower().ambient();
        let elements = (0..action.order())
            .map(|g| ActionElementJson {
                perm: ambient
                    .points()
                    .iter()
                    .map(|&p| (p.0.to_string(), action.apply(g, p).0))
                    .collect(),
            })
            .collect();
        ActionJson::Explicit {
            elements,
            table: action.table().to_vec(),
            identity: action.identity(),
        }
    }
}
