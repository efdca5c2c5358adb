use std::collections::HashSet;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{KnowledgeGraph, RelationId, Split, Triple};
use crate::types::{CatalogExport, TypeCatalog};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    /// Target entities whose label appeared in at least one source.
    pub matched_entities: usize,
    /// Relations with typed entities on both sides of their train triples.
    pub qualified_relations: Vec<RelationId>,
    /// Test triples whose relation is qualified.
    pub qualified_test_triples: usize,
}

/// Relations whose train heads and train tails each include at least one
/// typed entity, i.e. both sides of the relation profile are non-empty.
pub fn qualified_relations(graph: &KnowledgeGraph, catalog: &TypeCatalog) -> Vec<RelationId> {
    graph
        .relation_ids()
        .filter(|&r| {
            graph.head_set(r).iter().any(|&e| catalog.has_types(e))
                && graph.tail_set(r).iter().any(|&e| catalog.has_types(e))
        })
        .collect()
}

/// Accepts triples whose head and tail both carry types.
pub fn both_sides_typed(catalog: &TypeCatalog) -> impl Fn(&Triple) -> bool + Sync + '_ {
    move |t| catalog.has_types(t.head) && catalog.has_types(t.tail)
}

/// Imports type paths from label-keyed `sources` onto `target` entities with
/// the same label.
///
/// With `native` the result is the union: native paths first, then every
/// transferred path the entity does not already carry.
pub fn transfer_types(
    target: &KnowledgeGraph,
    sources: &[CatalogExport],
    native: Option<&TypeCatalog>,
) -> Result<(TypeCatalog, TransferReport)> {
    let mut catalog = native.cloned().unwrap_or_default();
    let mut matched = HashSet::new();
    for source in sources {
        for row in &source.entities {
            let Some(e) = target.entity_id(&row.entity) else {
                continue;
            };
            matched.insert(e);
            for labels in &row.paths {
                let present = catalog.paths(e).iter().any(|p| catalog.path_labels(p) == *labels);
                if !present {
                    catalog.add_labeled_path(e, labels)?;
                }
            }
        }
    }
    let qualified = qualified_relations(target, &catalog);
    let set: HashSet<RelationId> = qualified.iter().copied().collect();
    let qualified_test_triples = target
        .triples(Split::Test)
        .iter()
        .filter(|t| set.contains(&t.relation))
        .count();
    Ok((
        catalog,
        TransferReport {
            matched_entities: matched.len(),
            qualified_relations: qualified,
            qualified_test_triples,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::EntityTypes;

    fn target() -> (KnowledgeGraph, TypeCatalog) {
        let mut g = KnowledgeGraph::new();
        g.add_labeled("Helen_Mirren", "acted_in", "The_Queen", Split::Train);
        g.add_labeled("Paris", "capital_of", "France", Split::Train);
        g.add_labeled("Judi_Dench", "acted_in", "The_Queen", Split::Test);
        let mut c = TypeCatalog::new();
        c.add_labeled_path(g.entity_id("Helen_Mirren").unwrap(), &["person", "actor"])
            .unwrap();
        c.add_labeled_path(g.entity_id("The_Queen").unwrap(), &["film"])
            .unwrap();
        (g, c)
    }

    #[test]
    fn disjoint_labels_match_nothing() {
        let (g, _) = target();
        let src = CatalogExport {
            entities: vec![EntityTypes {
                entity: "Somebody_Else".into(),
                paths: vec![vec!["person".into()]],
            }],
        };
        let (cat, rep) = transfer_types(&g, &[src], None).unwrap();
        assert_eq!(rep.matched_entities, 0);
        assert!(rep.qualified_relations.is_empty());
        assert_eq!(rep.qualified_test_triples, 0);
        assert_eq!(cat.typed_entities().count(), 0);
    }

    #[test]
    fn union_with_itself_is_identity() {
        let (g, c) = target();
        let (u, rep) = transfer_types(&g, &[c.export(&g)], Some(&c)).unwrap();
        assert_eq!(u.export(&g), c.export(&g));
        assert_eq!(rep.matched_entities, 2);
        assert_eq!(rep.qualified_relations, vec![g.relation_id("acted_in").unwrap()]);
        assert_eq!(rep.qualified_test_triples, 1);
    }

    #[test]
    fn exact_label_match_imports_paths() {
        let (g, _) = target();
        let src = CatalogExport {
            entities: vec![
                EntityTypes {
                    entity: "Paris".into(),
                    paths: vec![vec!["location".into(), "city".into()]],
                },
                EntityTypes {
                    entity: "france".into(),
                    paths: vec![vec!["location".into(), "country".into()]],
                },
            ],
        };
        let (cat, rep) = transfer_types(&g, &[src], None).unwrap();
        assert_eq!(rep.matched_entities, 1);
        assert!(cat.has_types(g.entity_id("Paris").unwrap()));
        assert!(!cat.has_types(g.entity_id("France").unwrap()));
        assert!(rep.qualified_relations.is_empty());
    }
}
