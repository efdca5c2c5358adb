//! Triple storage, dataset ingestion and the filtered-candidate index.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intern::Interner;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

dense_id!(
    /// Index into the entity intern table.
    EntityId
);
dense_id!(
    /// Index into the relation intern table.
    RelationId
);
dense_id!(
    /// Index into a type catalog's intern table.
    TypeId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    fn slot(self) -> usize {
        match self {
            Split::Train => 0,
            Split::Valid => 1,
            Split::Test => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
    pub split: Split,
}

/// Counts reported by a triple-file load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub parsed: usize,
    pub duplicates: usize,
}

/// Interned entities and relations plus per-split triple stores.
///
/// `pair_index` covers every split so that evaluation can filter; the
/// per-relation head/tail sets only ever see the train split.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Interner,
    relations: Interner,
    triples: [Vec<Triple>; 3],
    seen: [HashSet<(EntityId, RelationId, EntityId)>; 3],
    pair_index: HashMap<(EntityId, EntityId), Vec<RelationId>>,
    head_sets: Vec<BTreeSet<EntityId>>,
    tail_sets: Vec<BTreeSet<EntityId>>,
    train_counts: Vec<usize>,
}

static EMPTY_SET: BTreeSet<EntityId> = BTreeSet::new();

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entities(&self) -> &Interner {
        &self.entities
    }

    pub fn relations(&self) -> &Interner {
        &self.relations
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn intern_entity(&mut self, label: &str) -> EntityId {
        EntityId(self.entities.intern(label))
    }

    pub fn intern_relation(&mut self, label: &str) -> RelationId {
        let id = RelationId(self.relations.intern(label));
        let n = self.relations.len();
        if self.head_sets.len() < n {
            self.head_sets.resize_with(n, BTreeSet::new);
            self.tail_sets.resize_with(n, BTreeSet::new);
            self.train_counts.resize(n, 0);
        }
        id
    }

    pub fn entity_id(&self, label: &str) -> Option<EntityId> {
        self.entities.get(label).map(EntityId)
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.relations.get(label).map(RelationId)
    }

    pub fn entity_label(&self, id: EntityId) -> &str {
        self.entities.label(id.0).expect("entity id out of range")
    }

    pub fn relation_label(&self, id: RelationId) -> &str {
        self.relations.label(id.0).expect("relation id out of range")
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> {
        (0..self.relations.len() as u32).map(RelationId)
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entities.len() as u32).map(EntityId)
    }

    /// Stores a triple in `split`; returns false if it was already present there.
    pub fn add_triple(&mut self, head: EntityId, relation: RelationId, tail: EntityId, split: Split) -> bool {
        assert!(head.index() < self.num_entities(), "head id out of range");
        assert!(tail.index() < self.num_entities(), "tail id out of range");
        assert!(relation.index() < self.num_relations(), "relation id out of range");
        if !self.seen[split.slot()].insert((head, relation, tail)) {
            return false;
        }
        self.triples[split.slot()].push(Triple {
            head,
            relation,
            tail,
            split,
        });
        let rels = self.pair_index.entry((head, tail)).or_default();
        if let Err(pos) = rels.binary_search(&relation) {
            rels.insert(pos, relation);
        }
        if split == Split::Train {
            self.head_sets[relation.index()].insert(head);
            self.tail_sets[relation.index()].insert(tail);
            self.train_counts[relation.index()] += 1;
        }
        true
    }

    pub fn add_labeled(&mut self, head: &str, relation: &str, tail: &str, split: Split) -> bool {
        let h = self.intern_entity(head);
        let r = self.intern_relation(relation);
        let t = self.intern_entity(tail);
        self.add_triple(h, r, t, split)
    }

    pub fn triples(&self, split: Split) -> &[Triple] {
        &self.triples[split.slot()]
    }

    pub fn all_triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter().flatten()
    }

    pub fn contains(&self, head: EntityId, relation: RelationId, tail: EntityId, split: Split) -> bool {
        self.seen[split.slot()].contains(&(head, relation, tail))
    }

    /// Relations linking `head` to `tail` in any split, ascending.
    pub fn pair_relations(&self, head: EntityId, tail: EntityId) -> &[RelationId] {
        self.pair_index.get(&(head, tail)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Distinct train-split heads of `relation`.
    pub fn head_set(&self, relation: RelationId) -> &BTreeSet<EntityId> {
        self.head_sets.get(relation.index()).unwrap_or(&EMPTY_SET)
    }

    /// Distinct train-split tails of `relation`.
    pub fn tail_set(&self, relation: RelationId) -> &BTreeSet<EntityId> {
        self.tail_sets.get(relation.index()).unwrap_or(&EMPTY_SET)
    }

    /// Number of train triples carrying `relation`.
    pub fn train_count(&self, relation: RelationId) -> usize {
        self.train_counts.get(relation.index()).copied().unwrap_or(0)
    }

    /// Every relation except those forming another stored triple with the
    /// same `(head, tail)` pair. The gold relation is never removed.
    pub fn filtered_candidates(&self, head: EntityId, tail: EntityId, gold: RelationId) -> Vec<RelationId> {
        let known = self.pair_relations(head, tail);
        self.relation_ids()
            .filter(|r| *r == gold || known.binary_search(r).is_err())
            .collect()
    }

    pub fn load_triples(&mut self, path: impl AsRef<Path>, split: Split) -> Result<LoadStats> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.load_triples_from_str(&text, split, &path.display().to_string())
    }

    /// Parses `head<TAB>relation<TAB>tail` lines into `split`.
    ///
    /// Blank lines are ignored. The whole input is validated before anything
    /// is interned, so a parse error leaves the graph untouched.
    pub fn load_triples_from_str(&mut self, text: &str, split: Split, source_name: &str) -> Result<LoadStats> {
        let rows = parse_triple_lines(text, source_name)?;
        let mut stats = LoadStats::default();
        for (h, r, t) in rows {
            stats.parsed += 1;
            if !self.add_labeled(h, r, t, split) {
                stats.duplicates += 1;
            }
        }
        Ok(stats)
    }

    /// Same vocabulary and valid/test splits, with the train split replaced.
    ///
    /// Ids are preserved; every index is rebuilt from the new contents.
    pub fn with_train_triples(&self, train: impl IntoIterator<Item = Triple>) -> KnowledgeGraph {
        let mut g = KnowledgeGraph {
            entities: self.entities.clone(),
            relations: self.relations.clone(),
            ..Default::default()
        };
        let n = g.relations.len();
        g.head_sets.resize_with(n, BTreeSet::new);
        g.tail_sets.resize_with(n, BTreeSet::new);
        g.train_counts.resize(n, 0);
        for t in train {
            g.add_triple(t.head, t.relation, t.tail, Split::Train);
        }
        for split in [Split::Valid, Split::Test] {
            for t in self.triples(split) {
                g.add_triple(t.head, t.relation, t.tail, split);
            }
        }
        g
    }

    /// Same vocabulary and train split, with `moved` taken out of train and
    /// appended to the validation split.
    pub fn with_moved_to_valid(&self, moved: &HashSet<(EntityId, RelationId, EntityId)>) -> KnowledgeGraph {
        let train = self
            .triples(Split::Train)
            .iter()
            .filter(|t| !moved.contains(&(t.head, t.relation, t.tail)))
            .copied()
            .collect::<Vec<_>>();
        let mut g = self.with_train_triples(train);
        for t in self.triples(Split::Train) {
            if moved.contains(&(t.head, t.relation, t.tail)) {
                g.add_triple(t.head, t.relation, t.tail, Split::Valid);
            }
        }
        g
    }
}

pub(crate) fn parse_triple_lines<'a>(text: &'a str, source_name: &str) -> Result<Vec<(&'a str, &'a str, &'a str)>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        if let Some(pos) = fields.iter().position(|f| f.is_empty()) {
            return Err(Error::parse(source_name, i + 1, format!("field {} is empty", pos + 1)));
        }
        rows.push((fields[0], fields[1], fields[2]));
    }
    Ok(rows)
}
