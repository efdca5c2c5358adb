use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, RelationId, Split, Triple};

pub(crate) fn train_by_relation(graph: &KnowledgeGraph) -> BTreeMap<RelationId, Vec<Triple>> {
    let mut out: BTreeMap<RelationId, Vec<Triple>> = BTreeMap::new();
    for t in graph.triples(Split::Train) {
        out.entry(t.relation).or_default().push(*t);
    }
    out
}

/// Keeps `ceil(fraction * n_r)` train triples of every relation.
///
/// Each relation's triples are shuffled by `seed` and a prefix is kept, so
/// for one seed a smaller fraction always yields a subset of a larger one.
/// Retained triples stay in their original order.
pub fn subsample_train(graph: &KnowledgeGraph, fraction: f64, seed: u64) -> Result<KnowledgeGraph> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("fraction {fraction} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = HashSet::new();
    for (_, mut triples) in train_by_relation(graph) {
        // The small slack stops products like 0.7 * 10 = 7.000000000000001
        // from rounding up to an extra triple.
        let n = triples.len();
        let take = ((fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
        triples.shuffle(&mut rng);
        keep.extend(triples[..take].iter().map(|t| (t.head, t.relation, t.tail)));
    }
    let retained = graph
        .triples(Split::Train)
        .iter()
        .filter(|t| keep.contains(&(t.head, t.relation, t.tail)))
        .copied()
        .collect::<Vec<_>>();
    Ok(graph.with_train_triples(retained))
}
