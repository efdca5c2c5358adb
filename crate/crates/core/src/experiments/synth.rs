use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, Split};
use crate::types::TypeCatalog;

/// Shape of a generated typed graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_entities: usize,
    pub n_relations: usize,
    pub n_types: usize,
    /// Probability that a triple follows its relation's type signature; the
    /// rest pick head and tail uniformly.
    pub type_determinism: f64,
    pub seed: u64,
    /// Distinct `(head, tail)` pairs to draw per relation. `None` means
    /// `max(5, 3 * n_entities / n_relations)`.
    pub triples_per_relation: Option<usize>,
}

impl SynthConfig {
    pub fn new(n_entities: usize, n_relations: usize, n_types: usize, type_determinism: f64, seed: u64) -> Self {
        Self {
            n_entities,
            n_relations,
            n_types,
            type_determinism,
            seed,
            triples_per_relation: None,
        }
    }

    fn per_relation(&self) -> usize {
        self.triples_per_relation
            .unwrap_or_else(|| (3 * self.n_entities / self.n_relations).max(5))
    }
}

/// Generates a typed graph whose relations have `(head leaf, tail leaf)`
/// signatures over a random type forest of depth at most 3.
///
/// A third of the types are inner nodes, the rest are leaves. Entity `E{i}`
/// gets the path ending at leaf `i mod n_leaves`. Relations draw distinct
/// signatures while enough leaf pairs exist. Each relation's triples are
/// split 80/10/10 with at least one train triple.
pub fn generate_typed_synthetic_kg(config: &SynthConfig) -> Result<(KnowledgeGraph, TypeCatalog)> {
    let SynthConfig {
        n_entities,
        n_relations,
        n_types,
        type_determinism: det,
        seed,
        ..
    } = *config;
    if n_entities < 2 || n_relations == 0 || n_types == 0 {
        return Err(Error::Config("need at least 2 entities, 1 relation and 1 type".into()));
    }
    if !(0.0..=1.0).contains(&det) {
        return Err(Error::Config(format!("type determinism {det} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_inner = n_types / 3;
    let mut parent: Vec<Option<usize>> = vec![None; n_types];
    for i in 1..n_inner {
        if rng.gen_bool(0.5) {
            let roots: Vec<usize> = (0..i).filter(|j| parent[*j].is_none()).collect();
            parent[i] = Some(*roots.choose(&mut rng).expect("type 0 is always a root"));
        }
    }
    for p in parent.iter_mut().skip(n_inner) {
        if n_inner > 0 {
            *p = Some(rng.gen_range(0..n_inner));
        }
    }
    let path_of = |leaf: usize| {
        let mut chain = vec![leaf];
        while let Some(p) = parent[*chain.last().unwrap()] {
            chain.push(p);
        }
        chain.reverse();
        chain
    };

    let n_leaves = (n_types - n_inner).min(n_entities);
    let leaf_of = |e: usize| n_inner + e % n_leaves;
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); n_leaves];
    for e in 0..n_entities {
        pools[e % n_leaves].push(e);
    }

    let mut signatures: Vec<(usize, usize)> = (0..n_leaves)
        .flat_map(|a| (0..n_leaves).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b || pools[a].len() > 1)
        .collect();
    if signatures.is_empty() {
        return Err(Error::Config("type layout leaves no usable signature".into()));
    }
    if det == 1.0 && signatures.len() < n_relations {
        return Err(Error::Config(format!(
            "{} distinct signatures available for {n_relations} relations",
            signatures.len()
        )));
    }
    signatures.shuffle(&mut rng);
    let signatures: Vec<(usize, usize)> = signatures.iter().copied().cycle().take(n_relations).collect();

    let want = config.per_relation();
    let mut per_relation: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n_relations);
    for &(a, b) in &signatures {
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for _ in 0..want * 50 {
            if pairs.len() == want {
                break;
            }
            let (h, t) = if rng.gen_bool(det) {
                (*pools[a].choose(&mut rng).unwrap(), *pools[b].choose(&mut rng).unwrap())
            } else {
                (rng.gen_range(0..n_entities), rng.gen_range(0..n_entities))
            };
            if h != t && seen.insert((h, t)) {
                pairs.push((h, t));
            }
        }
        if pairs.is_empty() {
            return Err(Error::Config("could not draw any triple for a relation".into()));
        }
        per_relation.push(pairs);
    }

    let mut graph = KnowledgeGraph::new();
    for e in 0..n_entities {
        graph.intern_entity(&format!("E{e}"));
    }
    for r in 0..n_relations {
        graph.intern_relation(&format!("R{r}"));
    }
    let mut splits: [Vec<(usize, usize, usize)>; 3] = Default::default();
    for (r, pairs) in per_relation.iter().enumerate() {
        let n = pairs.len();
        let mut n_test = (n + 5) / 10;
        let mut n_valid = (n + 5) / 10;
        while n_test + n_valid >= n && n_test + n_valid > 0 {
            if n_valid >= n_test {
                n_valid -= 1;
            } else {
                n_test -= 1;
            }
        }
        let n_train = n - n_test - n_valid;
        for (i, &(h, t)) in pairs.iter().enumerate() {
            let slot = if i < n_train {
                0
            } else if i < n_train + n_valid {
                1
            } else {
                2
            };
            splits[slot].push((h, r, t));
        }
    }
    for (slot, split) in Split::ALL.into_iter().enumerate() {
        for &(h, r, t) in &splits[slot] {
            graph.add_labeled(&format!("E{h}"), &format!("R{r}"), &format!("E{t}"), split);
        }
    }

    let mut catalog = TypeCatalog::new();
    for t in 0..n_types {
        catalog.intern_type(&format!("T{t}"));
    }
    for e in 0..n_entities {
        let labels: Vec<String> = path_of(leaf_of(e)).into_iter().map(|t| format!("T{t}")).collect();
        catalog.add_labeled_path(EntityId(e as u32), &labels)?;
    }
    Ok((graph, catalog))
}

/// Writes `train.txt`, `valid.txt`, `test.txt` and `types.txt` into `dir`.
pub fn write_dataset(graph: &KnowledgeGraph, catalog: &TypeCatalog, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    write_triples(graph, dir)?;
    write_types(graph, catalog, dir.join("types.txt"))
}

/// Writes one `head<TAB>relation<TAB>tail` file per split into `dir`.
pub fn write_triples(graph: &KnowledgeGraph, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for split in Split::ALL {
        let mut text = String::new();
        for t in graph.triples(split) {
            let _ = writeln!(
                text,
                "{}\t{}\t{}",
                graph.entity_label(t.head),
                graph.relation_label(t.relation),
                graph.entity_label(t.tail)
            );
        }
        let path = dir.join(format!("{split}.txt"));
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Writes one `entity<TAB>/t1/.../tK` line per type path.
pub fn write_types(graph: &KnowledgeGraph, catalog: &TypeCatalog, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::new();
    for e in catalog.typed_entities().filter(|e| e.index() < graph.num_entities()) {
        for p in catalog.paths(e) {
            let _ = writeln!(text, "{}\t/{}", graph.entity_label(e), catalog.path_labels(p).join("/"));
        }
    }
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
