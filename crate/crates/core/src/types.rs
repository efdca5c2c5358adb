//! Entity type hierarchies: parsing and the per-entity path catalog.
//!
//! Two sources are supported. Freebase-style files carry one slash-separated
//! hierarchy per line (`entity<TAB>/t1/.../tK`). Ontology-style datasets give
//! only the most specific type per entity plus an `is_a` graph over types, in
//! which case the hierarchy is recovered by walking parents up to the root.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{parse_triple_lines, EntityId, KnowledgeGraph, TypeId};
use crate::intern::Interner;

/// A root-to-leaf chain of types, most general first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeHierarchyPath {
    levels: Vec<TypeId>,
}

impl TypeHierarchyPath {
    pub fn new(levels: Vec<TypeId>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Config("type path must have at least one level".into()));
        }
        let mut seen = HashSet::with_capacity(levels.len());
        if let Some(dup) = levels.iter().find(|t| !seen.insert(**t)) {
            return Err(Error::Config(format!("type {dup} repeats within one path")));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[TypeId] {
        &self.levels
    }

    /// Number of levels `K`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn most_specific(&self) -> TypeId {
        *self.levels.last().expect("paths are non-empty")
    }
}

/// Warnings and counters from a type-file load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TypeLoadStats {
    pub paths_added: usize,
    /// `/common/topic` lines, which every Freebase entity carries.
    pub discarded_common_topic: usize,
    /// Lines naming an entity that is not part of the triple corpus.
    pub skipped_unknown_entity: usize,
    /// Paths in which a label occurred twice and was collapsed to its first position.
    pub collapsed_repeats: usize,
    /// Ontology walks cut short because a type came around again.
    pub cycle_warnings: usize,
    /// Types with more than one `is_a` parent; the first one in file order is used.
    pub extra_parents: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeCatalog {
    types: Interner,
    entity_paths: Vec<Vec<TypeHierarchyPath>>,
}

static NO_PATHS: [TypeHierarchyPath; 0] = [];

impl TypeCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn types(&self) -> &Interner {
        &self.types
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn intern_type(&mut self, label: &str) -> TypeId {
        TypeId(self.types.intern(label))
    }

    pub fn type_id(&self, label: &str) -> Option<TypeId> {
        self.types.get(label).map(TypeId)
    }

    pub fn type_label(&self, id: TypeId) -> &str {
        self.types.label(id.0).expect("type id out of range")
    }

    pub fn add_path(&mut self, entity: EntityId, path: TypeHierarchyPath) {
        assert!(
            path.levels().iter().all(|t| t.index() < self.types.len()),
            "path uses a type outside this catalog"
        );
        if self.entity_paths.len() <= entity.index() {
            self.entity_paths.resize_with(entity.index() + 1, Vec::new);
        }
        self.entity_paths[entity.index()].push(path);
    }

    /// Interns `labels` and stores them as one path of `entity`, collapsing
    /// repeated labels to their first position. Returns whether a repeat was
    /// collapsed.
    pub fn add_labeled_path<S: AsRef<str>>(&mut self, entity: EntityId, labels: &[S]) -> Result<bool> {
        let mut ids = Vec::with_capacity(labels.len());
        let mut collapsed = false;
        for l in labels {
            let id = self.intern_type(l.as_ref());
            if ids.contains(&id) {
                collapsed = true;
            } else {
                ids.push(id);
            }
        }
        self.add_path(entity, TypeHierarchyPath::new(ids)?);
        Ok(collapsed)
    }

    pub fn paths(&self, entity: EntityId) -> &[TypeHierarchyPath] {
        self.entity_paths
            .get(entity.index())
            .map(Vec::as_slice)
            .unwrap_or(&NO_PATHS)
    }

    pub fn has_types(&self, entity: EntityId) -> bool {
        !self.paths(entity).is_empty()
    }

    /// `T_e`: every type on any path of `entity`, ascending, without repeats.
    pub fn type_set(&self, entity: EntityId) -> Vec<TypeId> {
        let mut out: Vec<TypeId> = self
            .paths(entity)
            .iter()
            .flat_map(|p| p.levels().iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Entities (by id) that carry at least one path.
    pub fn typed_entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.entity_paths
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_empty())
            .map(|(i, _)| EntityId(i as u32))
    }

    pub fn path_labels(&self, path: &TypeHierarchyPath) -> Vec<String> {
        path.levels().iter().map(|t| self.type_label(*t).to_owned()).collect()
    }

    pub fn load_fb15k_types(&mut self, path: impl AsRef<Path>, graph: &KnowledgeGraph) -> Result<TypeLoadStats> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.load_fb15k_types_from_str(&text, graph, &path.display().to_string())
    }

    /// Parses `entity<TAB>/t1/t2/.../tK` lines. Extra tab-separated fields on
    /// a line are read as further paths of the same entity.
    pub fn load_fb15k_types_from_str(
        &mut self,
        text: &str,
        graph: &KnowledgeGraph,
        source_name: &str,
    ) -> Result<TypeLoadStats> {
        let mut parsed: Vec<(&str, Vec<Vec<&str>>)> = Vec::new();
        let mut stats = TypeLoadStats::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let entity = fields.next().unwrap_or_default();
            if entity.is_empty() || !line.contains('\t') {
                return Err(Error::parse(source_name, i + 1, "expected entity<TAB>/type/path"));
            }
            let mut paths = Vec::new();
            for field in fields {
                let segments: Vec<&str> = field.split('/').filter(|s| !s.is_empty()).collect();
                if segments.is_empty() {
                    return Err(Error::parse(
                        source_name,
                        i + 1,
                        format!("type path '{field}' has no segments"),
                    ));
                }
                if segments == ["common", "topic"] {
                    stats.discarded_common_topic += 1;
                    continue;
                }
                paths.push(segments);
            }
            parsed.push((entity, paths));
        }

        for (entity, paths) in parsed {
            let Some(e) = graph.entity_id(entity) else {
                stats.skipped_unknown_entity += 1;
                continue;
            };
            for segments in paths {
                if self.add_labeled_path(e, &segments)? {
                    stats.collapsed_repeats += 1;
                }
                stats.paths_added += 1;
            }
        }
        if stats.skipped_unknown_entity > 0 {
            log::warn!(
                "{source_name}: skipped {} lines for entities outside the triple corpus",
                stats.skipped_unknown_entity
            );
        }
        Ok(stats)
    }

    pub fn load_ontology_types(
        &mut self,
        type_links: impl AsRef<Path>,
        onto_triples: impl AsRef<Path>,
        isa_relation: &str,
        graph: &KnowledgeGraph,
    ) -> Result<TypeLoadStats> {
        let (lp, op) = (type_links.as_ref(), onto_triples.as_ref());
        let links = std::fs::read_to_string(lp).map_err(|e| Error::io(lp, e))?;
        let onto = std::fs::read_to_string(op).map_err(|e| Error::io(op, e))?;
        self.load_ontology_types_from_str(
            &links,
            &lp.display().to_string(),
            &onto,
            &op.display().to_string(),
            isa_relation,
            graph,
        )
    }

    /// Builds one path per `entity<TAB>type` link by following `is_a` edges
    /// from the linked type up to a parentless root.
    pub fn load_ontology_types_from_str(
        &mut self,
        links: &str,
        links_name: &str,
        onto: &str,
        onto_name: &str,
        isa_relation: &str,
        graph: &KnowledgeGraph,
    ) -> Result<TypeLoadStats> {
        let mut stats = TypeLoadStats::default();
        let onto_rows = parse_triple_lines(onto, onto_name)?;
        if !onto_rows.iter().any(|(_, r, _)| *r == isa_relation) {
            return Err(Error::Config(format!(
                "relation '{isa_relation}' does not occur in {onto_name}"
            )));
        }
        let mut parent: HashMap<&str, &str> = HashMap::new();
        for (child, rel, par) in onto_rows {
            if rel != isa_relation {
                continue;
            }
            match parent.get(child) {
                None => {
                    parent.insert(child, par);
                }
                Some(existing) if *existing != par => stats.extra_parents += 1,
                Some(_) => {}
            }
        }

        let mut link_rows = Vec::new();
        for (i, raw) in links.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::parse(links_name, i + 1, "expected entity<TAB>type"));
            }
            link_rows.push((fields[0], fields[1]));
        }

        for (entity, leaf) in link_rows {
            let Some(e) = graph.entity_id(entity) else {
                stats.skipped_unknown_entity += 1;
                continue;
            };
            let mut chain = vec![leaf];
            let mut current = leaf;
            while let Some(&up) = parent.get(current) {
                if chain.contains(&up) {
                    stats.cycle_warnings += 1;
                    log::warn!("{onto_name}: is_a cycle through '{up}' while typing '{entity}'");
                    break;
                }
                chain.push(up);
                current = up;
            }
            chain.reverse();
            self.add_labeled_path(e, &chain)?;
            stats.paths_added += 1;
        }
        if stats.skipped_unknown_entity > 0 {
            log::warn!(
                "{links_name}: skipped {} links for entities outside the triple corpus",
                stats.skipped_unknown_entity
            );
        }
        Ok(stats)
    }

    /// Label-keyed snapshot, independent of this run's intern tables.
    pub fn export(&self, graph: &KnowledgeGraph) -> CatalogExport {
        let entities = self
            .typed_entities()
            .filter(|e| e.index() < graph.num_entities())
            .map(|e| EntityTypes {
                entity: graph.entity_label(e).to_owned(),
                paths: self.paths(e).iter().map(|p| self.path_labels(p)).collect(),
            })
            .collect();
        CatalogExport { entities }
    }

    /// Rebuilds a catalog for `graph` from an export, matching entities by
    /// exact label. Returns the catalog and the number of matched entities.
    pub fn from_export(export: &CatalogExport, graph: &KnowledgeGraph) -> Result<(Self, usize)> {
        let mut cat = TypeCatalog::new();
        let mut matched = 0;
        for row in &export.entities {
            let Some(e) = graph.entity_id(&row.entity) else {
                continue;
            };
            matched += 1;
            for p in &row.paths {
                cat.add_labeled_path(e, p)?;
            }
        }
        Ok((cat, matched))
    }
}

/// Entity type paths keyed by labels, for moving type information between
/// corpora that were interned separately.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CatalogExport {
    pub entities: Vec<EntityTypes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTypes {
    pub entity: String,
    pub paths: Vec<Vec<String>>,
}

impl CatalogExport {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
