//! Truncation towers: a proper metric space presented to finite
//! algorithms as nested basepoint balls. Truncations are generated
//! lazily and memoized; the ambient space bounds what any analysis may
//! touch, so results are reproducible.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::error::{CoarseError, Result};
use crate::space::{PointId, Space};

pub struct Tower {
    ambient: Arc<Space>,
    declared_radii: Vec<f64>,
    cache: Mutex<BTreeMap<u64, Arc<Space>>>,
}

impl Tower {
    /// `ambient` must contain every point of the presented space within
    /// the largest declared radius of the basepoint; generators are
    /// responsible for that exhaustion.
    pub fn new(ambient: Space, declared_radii: Vec<f64>) -> Result<Tower> {
        if declared_radii.is_empty()
            || declared_radii.iter().any(|r| !r.is_finite() || *r < 0.0)
            || declared_radii.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(CoarseError::BadRadii);
        }
        Ok(Tower {
            ambient: Arc::new(ambient),
            declared_radii,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn declared_radii(&self) -> &[f64] {
        &self.declared_radii
    }

    pub fn max_radius(&self) -> f64 {
        *self.declared_radii.last().unwrap()
    }

    pub fn ambient(&self) -> &Arc<Space> {
        &self.ambient
    }

    pub fn basepoint(&self) -> PointId {
        self.ambient.basepoint()
    }

    /// The ball of radius `r` around the basepoint, `r` at most the
    /// largest declared radius. Memoized; concurrent first access is
    /// safe (idempotent fill behind a lock).
    pub fn truncation(&self, r: f64) -> Result<Arc<Space>> {
        if r > self.max_radius() {
            return Err(CoarseError::RadiusOutOfRange(r, self.max_radius()));
        }
        let key = r.to_bits();
        {
            let cache = self.cache.lock().unwrap();
            if let Some(s) = cache.get(&key) {
                return Ok(s.clone());
            }
        }
        let ids: Vec<PointId> = self
            .ambient
            .points()
            .iter()
            .copied()
            .filter(|&p| self.ambient.dist_to_base(p) <= r)
            .collect();
        let sub = Arc::new(self.ambient.subspace(ids)?);
        let mut cache = self.cache.lock().unwrap();
        Ok(cache.entry(key).or_insert(sub).clone())
    }

    /// The last `k` declared radii (all of them when fewer).
    pub fn last_radii(&self, k: usize) -> Vec<f64> {
        let n = self.declared_radii.len();
        self.declared_radii[n.saturating_sub(k)..].to_vec()
    }

    /// Same ambient space under a different declared radius list, each
    /// radius at most the current capacity.
    pub fn restrict(&self, declared_radii: Vec<f64>) -> Result<Tower> {
        if let Some(&r) = declared_radii.iter().find(|&&r| r > self.max_radius()) {
            return Err(CoarseError::RadiusOutOfRange(r, self.max_radius()));
        }
        if declared_radii.is_empty()
            || declared_radii.iter().any(|r| !r.is_finite() || *r < 0.0)
            || declared_radii.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(CoarseError::BadRadii);
        }
        Ok(Tower {
            ambient: self.ambient.clone(),
            declared_radii,
            cache: Mutex::new(BTreeMap::new()),
        })
    }
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tower")
            .field("ambient_points", &self.ambient.len())
            .field("declared_radii", &self.declared_radii)
            .finish()
    }
}
