use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Split, TypeId};
use crate::types::TypeCatalog;

pub const TYPE_RELATION: &str = "type";
pub const IS_A_RELATION: &str = "is_a";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnrichStats {
    pub type_relation: String,
    pub is_a_relation: String,
    pub type_triples: usize,
    pub is_a_triples: usize,
    pub type_entities: usize,
    /// Type labels that collided with an existing entity label and were renamed.
    pub renamed_types: usize,
}

/// First of `base`, `base_1`, `base_2`, ... not already taken.
fn fresh_label(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_owned();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|l| !taken(l))
        .expect("unbounded suffix search")
}

/// Adds `(e, type, t_K)` and `(t_k, is_a, t_{k-1})` train triples for every
/// type path, with types turned into entities.
///
/// Existing ids are kept; the two relations and every type entity are
/// appended to the vocabulary.
pub fn enrich_with_type_triples(
    graph: &KnowledgeGraph,
    catalog: &TypeCatalog,
) -> Result<(KnowledgeGraph, EnrichStats)> {
    if catalog.typed_entities().next().is_none() {
        return Err(Error::Config("cannot enrich with an empty type catalog".into()));
    }
    let mut g = graph.clone();
    let mut stats = EnrichStats::default();

    let new_relation = |g: &mut KnowledgeGraph, base: &str| -> (RelationId, String) {
        let label = fresh_label(base, |l| graph.relation_id(l).is_some());
        if label != base {
            log::warn!("relation '{base}' already exists, type triples use '{label}'");
        }
        (g.intern_relation(&label), label)
    };
    let (type_rel, type_label) = new_relation(&mut g, TYPE_RELATION);
    let (isa_rel, isa_label) = new_relation(&mut g, IS_A_RELATION);
    stats.type_relation = type_label;
    stats.is_a_relation = isa_label;

    let mut type_entities: HashMap<TypeId, EntityId> = HashMap::new();
    let mut entity_for = |g: &mut KnowledgeGraph, t: TypeId, stats: &mut EnrichStats| -> EntityId {
        *type_entities.entry(t).or_insert_with(|| {
            let base = catalog.type_label(t);
            let label = if graph.entity_id(base).is_some() {
                stats.renamed_types += 1;
                let l = fresh_label(&format!("type:{base}"), |l| g.entity_id(l).is_some());
                log::warn!("type '{base}' shares a label with an entity, added as '{l}'");
                l
            } else {
                base.to_owned()
            };
            stats.type_entities += 1;
            g.intern_entity(&label)
        })
    };

    let typed: Vec<EntityId> = catalog
        .typed_entities()
        .filter(|e| e.index() < graph.num_entities())
        .collect();
    for e in typed {
        for path in catalog.paths(e) {
            let levels = path.levels();
            let leaf = entity_for(&mut g, path.most_specific(), &mut stats);
            if g.add_triple(e, type_rel, leaf, Split::Train) {
                stats.type_triples += 1;
            }
            for k in 1..levels.len() {
                let child = entity_for(&mut g, levels[k], &mut stats);
                let parent = entity_for(&mut g, levels[k - 1], &mut stats);
                if g.add_triple(child, isa_rel, parent, Split::Train) {
                    stats.is_a_triples += 1;
                }
            }
        }
    }
    Ok((g, stats))
}
