use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, TypeId};
use crate::prior::profile::{build_relation_profiles, ProfileOptions, RelationTypeProfile};
use crate::prior::weights::{WeightScheme, WeightedTypeSet};
use crate::types::TypeCatalog;

/// Which entity of the pair contributes a similarity factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    #[default]
    Both,
    HeadOnly,
    TailOnly,
}

impl PriorMode {
    pub fn uses_head(self) -> bool {
        matches!(self, PriorMode::Both | PriorMode::HeadOnly)
    }

    pub fn uses_tail(self) -> bool {
        matches!(self, PriorMode::Both | PriorMode::TailOnly)
    }
}

impl fmt::Display for PriorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorMode::Both => "both",
            PriorMode::HeadOnly => "h",
            PriorMode::TailOnly => "t",
        })
    }
}

impl FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" | "ht" | "h+t" => Ok(PriorMode::Both),
            "h" | "head" => Ok(PriorMode::HeadOnly),
            "t" | "tail" => Ok(PriorMode::TailOnly),
            other => Err(Error::Config(format!("unknown prior mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub eta: f64,
    pub mode: PriorMode,
    pub scheme: WeightScheme,
    pub count_multiplicity: bool,
    /// Added to every unnormalised score before normalising. Zero reproduces
    /// the exact closed form.
    pub smoothing: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            mode: PriorMode::Both,
            scheme: WeightScheme::Hierarchy,
            count_multiplicity: false,
            smoothing: 0.0,
        }
    }
}

impl PriorConfig {
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta,
            ..Default::default()
        }
    }

    fn profile_options(&self) -> ProfileOptions {
        ProfileOptions {
            eta: self.eta,
            scheme: self.scheme,
            count_multiplicity: self.count_multiplicity,
        }
    }
}

/// Share of a relation side's weight that falls on the entity's types.
///
/// An untyped entity or an empty side gives 1, so that side stops
/// discriminating between relations.
pub fn similarity(entity_types: &[TypeId], side: &WeightedTypeSet) -> f64 {
    if entity_types.is_empty() || side.is_empty() {
        return 1.0;
    }
    let mut hit = 0.0;
    let mut types = entity_types.iter().peekable();
    for (t, w) in side.iter() {
        while types.next_if(|e| **e < t).is_some() {}
        if types.peek() == Some(&&t) {
            hit += w;
        }
    }
    hit / side.total()
}

/// Closed-form type prior over candidate relations for an entity pair.
///
/// Immutable once built; queries are pure and can run from any number of
/// threads.
#[derive(Debug, Clone)]
pub struct PriorModel {
    config: PriorConfig,
    profiles: Vec<RelationTypeProfile>,
    entity_types: Vec<Vec<TypeId>>,
    type_labels: Vec<String>,
}

impl PriorModel {
    pub fn build(graph: &KnowledgeGraph, catalog: &TypeCatalog, config: PriorConfig) -> Self {
        assert!((0.0..=1.0).contains(&config.eta), "eta must lie in [0, 1]");
        let profiles = build_relation_profiles(graph, catalog, &config.profile_options());
        Self {
            config,
            profiles,
            entity_types: graph.entity_ids().map(|e| catalog.type_set(e)).collect(),
            type_labels: catalog.types().labels(),
        }
    }

    pub fn config(&self) -> &PriorConfig {
        &self.config
    }

    pub fn mode(&self) -> PriorMode {
        self.config.mode
    }

    pub fn eta(&self) -> f64 {
        self.config.eta
    }

    /// Same profiles, different ablation mode.
    pub fn with_mode(&self, mode: PriorMode) -> Self {
        let mut m = self.clone();
        m.config.mode = mode;
        m
    }

    pub fn profiles(&self) -> &[RelationTypeProfile] {
        &self.profiles
    }

    pub fn profile(&self, relation: RelationId) -> &RelationTypeProfile {
        &self.profiles[relation.index()]
    }

    pub fn entity_types(&self, entity: EntityId) -> &[TypeId] {
        self.entity_types.get(entity.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn head_similarity(&self, head: EntityId, relation: RelationId) -> f64 {
        similarity(self.entity_types(head), &self.profile(relation).head_types)
    }

    pub fn tail_similarity(&self, tail: EntityId, relation: RelationId) -> f64 {
        similarity(self.entity_types(tail), &self.profile(relation).tail_types)
    }

    /// `s(h, r) * s(t, r)` with the factors the mode allows, plus smoothing.
    pub fn unnormalized(&self, head: EntityId, tail: EntityId, relation: RelationId) -> f64 {
        let mut u = 1.0;
        if self.config.mode.uses_head() {
            u *= self.head_similarity(head, relation);
        }
        if self.config.mode.uses_tail() {
            u *= self.tail_similarity(tail, relation);
        }
        u + self.config.smoothing
    }

    /// Probabilities aligned with `candidates`, summing to one. An all-zero
    /// row becomes uniform.
    pub fn prior(&self, head: EntityId, tail: EntityId, candidates: &[RelationId]) -> Vec<f64> {
        assert!(!candidates.is_empty(), "prior needs at least one candidate");
        let scores: Vec<f64> = candidates.iter().map(|&r| self.unnormalized(head, tail, r)).collect();
        let sum: f64 = scores.iter().sum();
        if sum > 0.0 {
            scores.into_iter().map(|u| u / sum).collect()
        } else {
            vec![1.0 / candidates.len() as f64; candidates.len()]
        }
    }

    /// Mean `(|T_{r,head}|, |T_{r,tail}|)` over relations with train data.
    pub fn average_set_sizes(&self) -> (f64, f64) {
        let active: Vec<&RelationTypeProfile> = self.profiles.iter().filter(|p| p.train_support > 0).collect();
        if active.is_empty() {
            return (0.0, 0.0);
        }
        let n = active.len() as f64;
        let h = active.iter().map(|p| p.head_types.len()).sum::<usize>() as f64 / n;
        let t = active.iter().map(|p| p.tail_types.len()).sum::<usize>() as f64 / n;
        (h, t)
    }

    pub fn export(&self, graph: &KnowledgeGraph) -> PriorExport {
        let side = |s: &WeightedTypeSet| {
            s.iter()
                .map(|(t, w)| (self.type_labels[t.index()].clone(), w))
                .collect()
        };
        PriorExport {
            format: PRIOR_FORMAT.to_owned(),
            config: self.config,
            relations: self
                .profiles
                .iter()
                .map(|p| RelationExport {
                    relation: graph.relation_label(p.relation).to_owned(),
                    train_support: p.train_support,
                    head: side(&p.head_types),
                    tail: side(&p.tail_types),
                })
                .collect(),
        }
    }

    /// Rebinds an exported model to `graph` and `catalog` by label.
    ///
    /// Relations missing from the export get empty profiles (uniform
    /// similarity). Type labels unknown to `catalog` keep their weight in the
    /// denominators but can never match an entity.
    pub fn from_export(export: &PriorExport, graph: &KnowledgeGraph, catalog: &TypeCatalog) -> Result<Self> {
        if export.format != PRIOR_FORMAT {
            return Err(Error::Incompatible(format!(
                "prior artifact format '{}' (expected '{PRIOR_FORMAT}')",
                export.format
            )));
        }
        let mut type_labels = catalog.types().labels();
        let mut private = std::collections::HashMap::new();
        let mut resolve = |label: &str| -> TypeId {
            if let Some(t) = catalog.type_id(label) {
                return t;
            }
            *private.entry(label.to_owned()).or_insert_with(|| {
                type_labels.push(label.to_owned());
                TypeId((type_labels.len() - 1) as u32)
            })
        };

        let mut profiles: Vec<RelationTypeProfile> = graph
            .relation_ids()
            .map(|r| RelationTypeProfile {
                relation: r,
                head_types: WeightedTypeSet::new(),
                tail_types: WeightedTypeSet::new(),
                eta: export.config.eta,
                train_support: 0,
            })
            .collect();
        for row in &export.relations {
            let Some(r) = graph.relation_id(&row.relation) else {
                continue;
            };
            let p = &mut profiles[r.index()];
            p.head_types = row.head.iter().map(|(l, w)| (resolve(l), *w)).collect();
            p.tail_types = row.tail.iter().map(|(l, w)| (resolve(l), *w)).collect();
            p.train_support = row.train_support;
        }
        Ok(Self {
            config: export.config,
            profiles,
            entity_types: graph.entity_ids().map(|e| catalog.type_set(e)).collect(),
            type_labels,
        })
    }
}

const PRIOR_FORMAT: &str = "relpred-prior/1";

/// Label-keyed prior artifact: configuration plus sparse per-relation weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorExport {
    pub format: String,
    pub config: PriorConfig,
    pub relations: Vec<RelationExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationExport {
    pub relation: String,
    pub train_support: usize,
    pub head: Vec<(String, f64)>,
    pub tail: Vec<(String, f64)>,
}

impl PriorExport {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Split;

    fn wset(pairs: &[(u32, f64)]) -> WeightedTypeSet {
        pairs.iter().map(|&(t, w)| (TypeId(t), w)).collect()
    }

    #[test]
    fn similarity_cases() {
        let side = wset(&[(0, 3.0), (1, 1.0)]);
        assert_eq!(similarity(&[TypeId(0), TypeId(1), TypeId(5)], &side), 1.0);
        assert_eq!(similarity(&[TypeId(4)], &side), 0.0);
        // profile {a:3, b:1}, T_e = {a, z}
        assert_eq!(similarity(&[TypeId(0), TypeId(9)], &side), 0.75);
        assert_eq!(similarity(&[], &side), 1.0);
        assert_eq!(similarity(&[TypeId(0)], &WeightedTypeSet::new()), 1.0);
    }

    fn small_world() -> (KnowledgeGraph, TypeCatalog) {
        let mut g = KnowledgeGraph::new();
        g.add_labeled("alice", "born_in", "paris", Split::Train);
        g.add_labeled("bob", "born_in", "rome", Split::Train);
        g.add_labeled("bob", "likes", "alice", Split::Train);
        g.add_labeled("carol", "born_in", "paris", Split::Test);
        g.add_labeled("nobody", "likes", "nowhere", Split::Train);
        let mut cat = TypeCatalog::new();
        cat.load_fb15k_types_from_str(
            "alice\t/person/actor\nbob\t/person\ncarol\t/person\nparis\t/location/city\nrome\t/location/city\n",
            &g,
            "t",
        )
        .unwrap();
        (g, cat)
    }

    #[test]
    fn untyped_pair_is_uniform() {
        let (g, cat) = small_world();
        let m = PriorModel::build(&g, &cat, PriorConfig::default());
        let e = g.entity_id("nobody").unwrap();
        let t = g.entity_id("nowhere").unwrap();
        let cands: Vec<_> = g.relation_ids().collect();
        let p = m.prior(e, t, &cands);
        assert!(p.iter().all(|x| (*x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn prior_normalises_products() {
        let (g, cat) = small_world();
        let m = PriorModel::build(&g, &cat, PriorConfig::default());
        let h = g.entity_id("carol").unwrap();
        let t = g.entity_id("paris").unwrap();
        let cands: Vec<_> = g.relation_ids().collect();
        let p = m.prior(h, t, &cands);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > p[1]);
    }

    #[test]
    fn two_candidate_normalisation() {
        // u = (0.5, 0.25) -> (2/3, 1/3)
        let u = [0.5f64, 0.25];
        let sum: f64 = u.iter().sum();
        let p: Vec<f64> = u.iter().map(|x| x / sum).collect();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_zero_row_is_uniform() {
        let mut g = KnowledgeGraph::new();
        g.add_labeled("a", "r", "b", Split::Train);
        g.add_labeled("c", "r", "d", Split::Test);
        g.intern_relation("s");
        g.add_labeled("a", "s", "b", Split::Train);
        let mut cat = TypeCatalog::new();
        cat.load_fb15k_types_from_str("a\t/x\nb\t/y\nc\t/z\nd\t/w\n", &g, "t")
            .unwrap();
        let m = PriorModel::build(&g, &cat, PriorConfig::default());
        let c = g.entity_id("c").unwrap();
        let d = g.entity_id("d").unwrap();
        assert_eq!(m.prior(c, d, &[RelationId(0), RelationId(1)]), vec![0.5, 0.5]);
    }

    #[test]
    fn head_only_matches_both_for_untyped_tail() {
        let (g, cat) = small_world();
        let both = PriorModel::build(&g, &cat, PriorConfig::default());
        let head_only = both.with_mode(PriorMode::HeadOnly);
        let h = g.entity_id("alice").unwrap();
        let t = g.entity_id("nowhere").unwrap();
        let cands: Vec<_> = g.relation_ids().collect();
        assert_eq!(both.prior(h, t, &cands), head_only.prior(h, t, &cands));
    }

    #[test]
    fn smoothing_lifts_zero_entries() {
        let (g, cat) = small_world();
        let cfg = PriorConfig {
            smoothing: 1e-3,
            ..Default::default()
        };
        let m = PriorModel::build(&g, &cat, cfg);
        let h = g.entity_id("paris").unwrap();
        let t = g.entity_id("rome").unwrap();
        let cands: Vec<_> = g.relation_ids().collect();
        assert!(m.prior(h, t, &cands).iter().all(|p| *p > 0.0));
    }

    #[test]
    fn export_reload_reproduces_priors() {
        let (g, cat) = small_world();
        let m = PriorModel::build(&g, &cat, PriorConfig::with_eta(0.1));
        let json = serde_json::to_string(&m.export(&g)).unwrap();
        let back: PriorExport = serde_json::from_str(&json).unwrap();
        let m2 = PriorModel::from_export(&back, &g, &cat).unwrap();
        let cands: Vec<_> = g.relation_ids().collect();
        for h in g.entity_ids() {
            for t in g.entity_ids() {
                assert_eq!(m.prior(h, t, &cands), m2.prior(h, t, &cands));
            }
        }
    }

    #[test]
    fn export_against_foreign_catalog_keeps_denominators() {
        let (g, cat) = small_world();
        let m = PriorModel::build(&g, &cat, PriorConfig::default());
        let exp = m.export(&g);
        // catalog that only knows "person"
        let mut other = TypeCatalog::new();
        other.load_fb15k_types_from_str("carol\t/person\n", &g, "t").unwrap();
        let m2 = PriorModel::from_export(&exp, &g, &other).unwrap();
        let carol = g.entity_id("carol").unwrap();
        let born_in = g.relation_id("born_in").unwrap();
        // born_in heads: alice (person .27, actor .73), bob (person 1) -> person 1.27 of 2.0
        let s = m2.head_similarity(carol, born_in);
        assert!((s - (0.2689414213699951 + 1.0) / 2.0).abs() < 1e-12);

        let mut bad = exp.clone();
        bad.format = "other".into();
        assert!(matches!(
            PriorModel::from_export(&bad, &g, &cat),
            Err(Error::Incompatible(_))
        ));
    }
}
