//! Brute-force reference implementations and random fixtures shared by the
//! integration tests. Everything here works on plain strings and hash maps so
//! it shares no code path with the library.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::Rng;
use relpred::{KnowledgeGraph, Split, TypeCatalog};

/// Label-level knowledge graph with type paths.
#[derive(Debug, Clone, Default)]
pub struct StrKg {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
    pub triples: Vec<(String, String, String, Split)>,
    pub paths: HashMap<String, Vec<Vec<String>>>,
}

impl StrKg {
    pub fn to_lib(&self) -> (KnowledgeGraph, TypeCatalog) {
        let mut g = KnowledgeGraph::new();
        for e in &self.entities {
            g.intern_entity(e);
        }
        for r in &self.relations {
            g.intern_relation(r);
        }
        for (h, r, t, s) in &self.triples {
            g.add_labeled(h, r, t, *s);
        }
        let mut c = TypeCatalog::new();
        for e in &self.entities {
            for p in self.paths.get(e).into_iter().flatten() {
                c.add_labeled_path(g.entity_id(e).unwrap(), p).unwrap();
            }
        }
        (g, c)
    }

    pub fn split_triples(&self, split: Split) -> Vec<(String, String, String)> {
        let mut seen = HashSet::new();
        self.triples
            .iter()
            .filter(|x| x.3 == split)
            .map(|(h, r, t, _)| (h.clone(), r.clone(), t.clone()))
            .filter(|x| seen.insert(x.clone()))
            .collect()
    }

    pub fn type_set(&self, e: &str) -> HashSet<String> {
        self.paths.get(e).into_iter().flatten().flatten().cloned().collect()
    }
}

/// Random graph with up to `max_ent` entities, `max_rel` relations and
/// `max_types` types in a forest of depth at most 3.
pub fn random_kg<R: Rng>(rng: &mut R, max_ent: usize, max_rel: usize, max_types: usize) -> StrKg {
    let n_ent = rng.gen_range(2..=max_ent);
    let n_rel = rng.gen_range(1..=max_rel);
    let n_types = rng.gen_range(1..=max_types);

    let mut chain: Vec<Vec<String>> = Vec::new();
    for i in 0..n_types {
        let parents: Vec<usize> = (0..i).filter(|&j| chain[j].len() < 3).collect();
        let mut c = if !parents.is_empty() && rng.gen_bool(0.6) {
            chain[parents[rng.gen_range(0..parents.len())]].clone()
        } else {
            Vec::new()
        };
        c.push(format!("t{i}"));
        chain.push(c);
    }

    let entities: Vec<String> = (0..n_ent).map(|i| format!("e{i}")).collect();
    let relations: Vec<String> = (0..n_rel).map(|i| format!("r{i}")).collect();
    let mut paths = HashMap::new();
    for e in &entities {
        if rng.gen_bool(0.2) {
            continue;
        }
        let k = rng.gen_range(1..=3);
        let p: Vec<Vec<String>> = (0..k).map(|_| chain[rng.gen_range(0..n_types)].clone()).collect();
        paths.insert(e.clone(), p);
    }

    let n_triples = rng.gen_range(3..=40);
    let mut triples = Vec::new();
    for i in 0..n_triples {
        let split = if i == 0 {
            Split::Test
        } else {
            match rng.gen_range(0..10) {
                0..=5 => Split::Train,
                6..=7 => Split::Valid,
                _ => Split::Test,
            }
        };
        triples.push((
            entities[rng.gen_range(0..n_ent)].clone(),
            relations[rng.gen_range(0..n_rel)].clone(),
            entities[rng.gen_range(0..n_ent)].clone(),
            split,
        ));
    }
    StrKg {
        entities,
        relations,
        triples,
        paths,
    }
}

/// Per-path level weight `exp(k-1) / Σ_j exp(j-1)`, minimum across paths.
pub fn entity_weights(paths: &[Vec<String>], uniform: bool) -> HashMap<String, f64> {
    let mut out: HashMap<String, f64> = HashMap::new();
    for p in paths {
        let denom: f64 = (1..=p.len()).map(|j| ((j - 1) as f64).exp()).sum();
        for (k0, t) in p.iter().enumerate() {
            let w = if uniform { 1.0 } else { (k0 as f64).exp() / denom };
            let slot = out.entry(t.clone()).or_insert(f64::INFINITY);
            *slot = slot.min(w);
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct Profile {
    pub head: HashMap<String, f64>,
    pub tail: HashMap<String, f64>,
}

fn prune(side: HashMap<String, f64>, eta: f64) -> HashMap<String, f64> {
    if side.is_empty() {
        return side;
    }
    let max = side.values().cloned().fold(f64::MIN, f64::max);
    let min = side.values().cloned().fold(f64::MAX, f64::min);
    let thr = min + eta * (max - min);
    side.into_iter().filter(|(_, w)| *w >= thr || *w == max).collect()
}

pub fn profiles(kg: &StrKg, eta: f64, uniform: bool) -> HashMap<String, Profile> {
    let train = kg.split_triples(Split::Train);
    let mut out = HashMap::new();
    for r in &kg.relations {
        let heads: HashSet<&String> = train.iter().filter(|x| &x.1 == r).map(|x| &x.0).collect();
        let tails: HashSet<&String> = train.iter().filter(|x| &x.1 == r).map(|x| &x.2).collect();
        let side = |members: &HashSet<&String>| {
            let mut acc: HashMap<String, f64> = HashMap::new();
            for e in members {
                let ps = kg.paths.get(*e).cloned().unwrap_or_default();
                for (t, w) in entity_weights(&ps, uniform) {
                    *acc.entry(t).or_insert(0.0) += w;
                }
            }
            prune(acc, eta)
        };
        out.insert(
            r.clone(),
            Profile {
                head: side(&heads),
                tail: side(&tails),
            },
        );
    }
    out
}

pub fn similarity(types: &HashSet<String>, side: &HashMap<String, f64>) -> f64 {
    if types.is_empty() || side.is_empty() {
        return 1.0;
    }
    let total: f64 = side.values().sum();
    let hit: f64 = side.iter().filter(|(t, _)| types.contains(*t)).map(|(_, w)| w).sum();
    hit / total
}

/// Candidate relations for `(h, t)`: all relations minus those with another
/// stored triple on the pair in any split; gold always kept. Relation order.
pub fn filtered_candidates(kg: &StrKg, h: &str, t: &str, gold: &str) -> Vec<String> {
    let known: HashSet<&String> = kg
        .triples
        .iter()
        .filter(|x| x.0 == h && x.2 == t)
        .map(|x| &x.1)
        .collect();
    kg.relations
        .iter()
        .filter(|r| *r == gold || !known.contains(r))
        .cloned()
        .collect()
}

/// `mode`: "both", "h" or "t".
pub fn prior(
    kg: &StrKg,
    profiles: &HashMap<String, Profile>,
    h: &str,
    t: &str,
    candidates: &[String],
    mode: &str,
) -> Vec<f64> {
    let th = kg.type_set(h);
    let tt = kg.type_set(t);
    let u: Vec<f64> = candidates
        .iter()
        .map(|r| {
            let p = &profiles[r];
            let sh = similarity(&th, &p.head);
            let st = similarity(&tt, &p.tail);
            match mode {
                "h" => sh,
                "t" => st,
                _ => sh * st,
            }
        })
        .collect();
    let sum: f64 = u.iter().sum();
    if sum > 0.0 {
        u.iter().map(|x| x / sum).collect()
    } else {
        vec![1.0 / u.len() as f64; u.len()]
    }
}

/// Rank of `gold` (an index into `values`) under descending value, with
/// values within `tol` treated as equal and equal values ordered by
/// `order_key` ascending.
pub fn rank_by_value(values: &[f64], order_key: &[usize], gold: usize, tol: f64) -> usize {
    let g = values[gold];
    1 + (0..values.len())
        .filter(|&i| i != gold)
        .filter(|&i| values[i] > g + tol || ((values[i] - g).abs() <= tol && order_key[i] < order_key[gold]))
        .count()
}

/// `(MR, Hits@1, Hits@10)` from raw ranks.
pub fn aggregate(ranks: &[usize]) -> (f64, f64, f64) {
    let n = ranks.len() as f64;
    let mr = ranks.iter().map(|&r| r as f64).sum::<f64>() / n;
    let h1 = ranks.iter().filter(|&&r| r <= 1).count() as f64 / n;
    let h10 = ranks.iter().filter(|&&r| r <= 10).count() as f64 / n;
    (mr, h1, h10)
}

/// Sixteen-term Hamilton product written out from the basis rules.
pub fn naive_hamilton(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
    // basis products e_i * e_j = sign * e_k
    const TABLE: [[(f64, usize); 4]; 4] = [
        [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
        [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
        [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
        [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
    ];
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            let (s, k) = TABLE[i][j];
            out[k] += s * p[i] * q[j];
        }
    }
    out
}

/// Like [`rank_by_value`], but ties are first broken by `tiebreak`
/// descending, then by `order_key` ascending.
pub fn rank_with_tiebreak(values: &[f64], tiebreak: &[f64], order_key: &[usize], gold: usize, tol: f64) -> usize {
    let g = values[gold];
    1 + (0..values.len())
        .filter(|&i| i != gold)
        .filter(|&i| {
            values[i] > g + tol
                || ((values[i] - g).abs() <= tol
                    && (tiebreak[i] > tiebreak[gold]
                        || (tiebreak[i] == tiebreak[gold] && order_key[i] < order_key[gold])))
        })
        .count()
}
