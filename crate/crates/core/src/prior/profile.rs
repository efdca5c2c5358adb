use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graph::{KnowledgeGraph, RelationId, Split};
use crate::prior::weights::{entity_type_weights, WeightScheme, WeightedTypeSet};
use crate::types::TypeCatalog;

/// Head and tail type weights of one relation after threshold pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationTypeProfile {
    pub relation: RelationId,
    pub head_types: WeightedTypeSet,
    pub tail_types: WeightedTypeSet,
    pub eta: f64,
    /// Train triples carrying the relation when the profile was built.
    pub train_support: usize,
}

impl RelationTypeProfile {
    /// True when the relation has train data but no typed entity on one side;
    /// that side then falls back to uniform similarity.
    pub fn has_untyped_side(&self) -> bool {
        self.train_support > 0 && (self.head_types.is_empty() || self.tail_types.is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub eta: f64,
    pub scheme: WeightScheme,
    /// Sum entity weights once per train triple instead of once per distinct entity.
    pub count_multiplicity: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            eta: 0.0,
            scheme: WeightScheme::Hierarchy,
            count_multiplicity: false,
        }
    }
}

/// Drops every type whose weight is below `min + eta * (max - min)`.
///
/// The heaviest type always survives, including at `eta = 1` where rounding
/// could otherwise push the threshold a hair above the maximum.
pub fn prune(set: &WeightedTypeSet, eta: f64) -> WeightedTypeSet {
    assert!((0.0..=1.0).contains(&eta), "eta must lie in [0, 1]");
    let (Some(min), Some(max)) = (set.min_weight(), set.max_weight()) else {
        return WeightedTypeSet::new();
    };
    let threshold = min + eta * (max - min);
    set.retain(|_, w| w >= threshold || w == max)
}

/// Per-entity weight maps for every entity of `graph`.
pub fn entity_weight_table(
    graph: &KnowledgeGraph,
    catalog: &TypeCatalog,
    scheme: WeightScheme,
) -> Vec<WeightedTypeSet> {
    graph
        .entity_ids()
        .map(|e| entity_type_weights(catalog.paths(e), scheme))
        .collect()
}

/// Builds `T_{r,head}` / `T_{r,tail}` with summed weights for every relation
/// of `graph`, from the train split only, then prunes both sides.
pub fn build_relation_profiles(
    graph: &KnowledgeGraph,
    catalog: &TypeCatalog,
    options: &ProfileOptions,
) -> Vec<RelationTypeProfile> {
    let weights = entity_weight_table(graph, catalog, options.scheme);
    let relations: Vec<RelationId> = graph.relation_ids().collect();

    let raw: Vec<(WeightedTypeSet, WeightedTypeSet)> = if options.count_multiplicity {
        let mut head: Vec<BTreeMap<_, f64>> = vec![BTreeMap::new(); relations.len()];
        let mut tail: Vec<BTreeMap<_, f64>> = vec![BTreeMap::new(); relations.len()];
        for t in graph.triples(Split::Train) {
            accumulate(&mut head[t.relation.index()], &weights[t.head.index()]);
            accumulate(&mut tail[t.relation.index()], &weights[t.tail.index()]);
        }
        head.into_iter()
            .zip(tail)
            .map(|(h, t)| (WeightedTypeSet::from_map(h), WeightedTypeSet::from_map(t)))
            .collect()
    } else {
        relations
            .par_iter()
            .map(|&r| {
                let mut head = BTreeMap::new();
                for e in graph.head_set(r) {
                    accumulate(&mut head, &weights[e.index()]);
                }
                let mut tail = BTreeMap::new();
                for e in graph.tail_set(r) {
                    accumulate(&mut tail, &weights[e.index()]);
                }
                (WeightedTypeSet::from_map(head), WeightedTypeSet::from_map(tail))
            })
            .collect()
    };

    relations
        .into_iter()
        .zip(raw)
        .map(|(r, (head, tail))| {
            let profile = RelationTypeProfile {
                relation: r,
                head_types: prune(&head, options.eta),
                tail_types: prune(&tail, options.eta),
                eta: options.eta,
                train_support: graph.train_count(r),
            };
            if profile.has_untyped_side() {
                log::debug!(
                    "relation '{}' has an untyped side; similarity falls back to uniform there",
                    graph.relation_label(r)
                );
            }
            profile
        })
        .collect()
}

fn accumulate(into: &mut BTreeMap<crate::graph::TypeId, f64>, from: &WeightedTypeSet) {
    for (t, w) in from.iter() {
        *into.entry(t).or_insert(0.0) += w;
    }
}
