use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TypeId;
use crate::types::TypeHierarchyPath;

/// Weight of level `k` (1-based, 1 = most general) in a path of `depth` levels:
/// `exp(k-1) / sum_{j=0}^{depth-1} exp(j)`.
///
/// Deeper, more specific levels weigh more, and one path's weights sum to 1.
///
/// # Panics
///
/// If `k` is not in `1..=depth`.
pub fn hierarchy_level_weight(k: usize, depth: usize) -> f64 {
    assert!(k >= 1 && k <= depth, "level {k} outside 1..={depth}");
    // shifted by the largest exponent so long paths cannot overflow
    let top = (depth - 1) as f64;
    let denom: f64 = (0..depth).map(|j| (j as f64 - top).exp()).sum();
    ((k - 1) as f64 - top).exp() / denom
}

/// How a type on an entity's path is weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// Exponential weighting by depth, minimum across paths.
    #[default]
    Hierarchy,
    /// Every type of the entity weighs 1.
    Uniform,
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Hierarchy => "hierarchy",
            WeightScheme::Uniform => "uniform",
        })
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hierarchy" => Ok(WeightScheme::Hierarchy),
            "uniform" => Ok(WeightScheme::Uniform),
            other => Err(Error::Config(format!("unknown weight scheme '{other}'"))),
        }
    }
}

/// Sparse non-negative weights over types, kept sorted by `TypeId`.
///
/// Zero weights are never stored. `total` is summed in key order so two sets
/// with equal entries always carry bitwise-equal totals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedTypeSet {
    entries: Vec<(TypeId, f64)>,
    total: f64,
}

impl WeightedTypeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_map(map: BTreeMap<TypeId, f64>) -> Self {
        Self::from_sorted(map.into_iter().collect())
    }

    fn from_sorted(mut entries: Vec<(TypeId, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        entries.retain(|(_, w)| *w > 0.0);
        let total = entries.iter().map(|(_, w)| w).sum();
        Self { entries, total }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn get(&self, t: TypeId) -> Option<f64> {
        self.entries
            .binary_search_by_key(&t, |(k, _)| *k)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn contains(&self, t: TypeId) -> bool {
        self.get(t).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TypeId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = TypeId> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.entries.iter().map(|(_, w)| *w).reduce(f64::max)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.entries.iter().map(|(_, w)| *w).reduce(f64::min)
    }

    /// Keeps entries whose weight passes `keep`.
    pub fn retain(&self, mut keep: impl FnMut(TypeId, f64) -> bool) -> Self {
        Self::from_sorted(self.entries.iter().copied().filter(|(t, w)| keep(*t, *w)).collect())
    }
}

impl FromIterator<(TypeId, f64)> for WeightedTypeSet {
    fn from_iter<I: IntoIterator<Item = (TypeId, f64)>>(iter: I) -> Self {
        let mut map = BTreeMap::new();
        for (t, w) in iter {
            *map.entry(t).or_insert(0.0) += w;
        }
        Self::from_map(map)
    }
}

/// Per-entity type weights `w_e(t)`: each path is weighted level by level and
/// a type found on several paths keeps its smallest weight.
pub fn entity_type_weights(paths: &[TypeHierarchyPath], scheme: WeightScheme) -> WeightedTypeSet {
    let mut map: BTreeMap<TypeId, f64> = BTreeMap::new();
    for path in paths {
        let depth = path.depth();
        for (i, &t) in path.levels().iter().enumerate() {
            let w = match scheme {
                WeightScheme::Hierarchy => hierarchy_level_weight(i + 1, depth),
                WeightScheme::Uniform => 1.0,
            };
            map.entry(t).and_modify(|cur| *cur = cur.min(w)).or_insert(w);
        }
    }
    WeightedTypeSet::from_map(map)
}
