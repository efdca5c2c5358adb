use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{evaluate, Scorer};
use crate::graph::{KnowledgeGraph, Split};
use crate::prior::{PriorConfig, PriorModel};
use crate::types::TypeCatalog;

pub const DEFAULT_ETA_GRID: [f64; 7] = [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaRow {
    pub eta: f64,
    pub mr: f64,
    pub hits1: f64,
    pub hits10: f64,
    pub avg_head_types: f64,
    pub avg_tail_types: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaSweep {
    pub rows: Vec<EtaRow>,
    /// Threshold with the best Hits@1; the smaller one wins a tie.
    pub best_eta: f64,
}

impl EtaSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta,MR,Hits@1,Hits@10,avg_head_types,avg_tail_types\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.4},{:.2},{:.2},{:.4},{:.4}",
                r.eta,
                r.mr,
                100.0 * r.hits1,
                100.0 * r.hits10,
                r.avg_head_types,
                r.avg_tail_types
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>6} {:>10} {:>8} {:>8} {:>10} {:>10}\n",
            "eta", "MR", "H@1", "H@10", "|T_head|", "|T_tail|"
        );
        for r in &self.rows {
            let mark = if r.eta == self.best_eta { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:>6} {:>10.4} {:>8.2} {:>8.2} {:>10.2} {:>10.2}{mark}",
                r.eta,
                r.mr,
                100.0 * r.hits1,
                100.0 * r.hits10,
                r.avg_head_types,
                r.avg_tail_types
            );
        }
        out
    }
}

/// Rebuilds the prior at every threshold and ranks `split` with it alone.
///
/// All other prior settings come from `base`.
pub fn sweep_eta(
    graph: &KnowledgeGraph,
    catalog: &TypeCatalog,
    etas: &[f64],
    split: Split,
    base: PriorConfig,
) -> Result<EtaSweep> {
    if etas.is_empty() {
        return Err(Error::Config("empty eta grid".into()));
    }
    if let Some(bad) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Config(format!("eta {bad} outside [0, 1]")));
    }
    let mut rows = Vec::with_capacity(etas.len());
    for &eta in etas {
        let prior = PriorModel::build(graph, catalog, PriorConfig { eta, ..base });
        let report = evaluate(graph, &Scorer::prior_only(&prior), split)?;
        let (h, t) = prior.average_set_sizes();
        log::info!("eta {eta}: Hits@1 {:.4}", report.hits(1));
        rows.push(EtaRow {
            eta,
            mr: report.mr(),
            hits1: report.hits(1),
            hits10: report.hits(10),
            avg_head_types: h,
            avg_tail_types: t,
        });
    }
    let best_eta = rows
        .iter()
        .fold(None::<&EtaRow>, |best, r| match best {
            Some(b) if b.hits1 > r.hits1 || (b.hits1 == r.hits1 && b.eta <= r.eta) => Some(b),
            _ => Some(r),
        })
        .map(|r| r.eta)
        .expect("grid is non-empty");
    Ok(EtaSweep { rows, best_eta })
}

/// Moves `floor(fraction * n_r)` train triples of each relation into the
/// validation split, chosen by `seed`. Relations too small to spare a triple
/// keep all of theirs.
pub fn carve_validation(graph: &KnowledgeGraph, fraction: f64, seed: u64) -> Result<KnowledgeGraph> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("validation fraction {fraction} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moved = HashSet::new();
    for (_, mut triples) in super::subsample::train_by_relation(graph) {
        let take = (fraction * triples.len() as f64).floor() as usize;
        triples.shuffle(&mut rng);
        moved.extend(triples[..take].iter().map(|t| (t.head, t.relation, t.tail)));
    }
    Ok(graph.with_moved_to_valid(&moved))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (KnowledgeGraph, TypeCatalog) {
        let mut g = KnowledgeGraph::new();
        let mut c = TypeCatalog::new();
        for i in 0..30 {
            let (h, t) = (format!("p{i}"), format!("c{}", i % 7));
            let r = if i % 3 == 0 { "visits" } else { "born_in" };
            g.add_labeled(&h, r, &t, Split::Train);
            let he = g.entity_id(&h).unwrap();
            c.add_labeled_path(he, &["person", if i % 2 == 0 { "actor" } else { "writer" }])
                .unwrap();
            let te = g.entity_id(&t).unwrap();
            if !c.has_types(te) {
                c.add_labeled_path(te, &["location", "city"]).unwrap();
            }
        }
        (g, c)
    }

    #[test]
    fn set_sizes_shrink_with_eta() {
        let (g, c) = toy();
        let g = carve_validation(&g, 0.2, 3).unwrap();
        assert!(!g.triples(Split::Valid).is_empty());
        let sweep = sweep_eta(&g, &c, &DEFAULT_ETA_GRID, Split::Valid, PriorConfig::default()).unwrap();
        for w in sweep.rows.windows(2) {
            assert!(w[1].avg_head_types <= w[0].avg_head_types);
            assert!(w[1].avg_tail_types <= w[0].avg_tail_types);
        }
        assert_eq!(sweep.rows[0].avg_head_types, 3.0);
    }

    #[test]
    fn tie_picks_smaller_eta() {
        let (g, c) = toy();
        let g = carve_validation(&g, 0.2, 3).unwrap();
        let sweep = sweep_eta(&g, &c, &[0.9, 0.0], Split::Valid, PriorConfig::default()).unwrap();
        if sweep.rows[0].hits1 == sweep.rows[1].hits1 {
            assert_eq!(sweep.best_eta, 0.0);
        }
    }

    #[test]
    fn carving_is_seeded() {
        let (g, _) = toy();
        let a = carve_validation(&g, 0.1, 5).unwrap();
        let b = carve_validation(&g, 0.1, 5).unwrap();
        assert_eq!(a.triples(Split::Valid), b.triples(Split::Valid));
        assert_eq!(a.triples(Split::Train).len() + a.triples(Split::Valid).len(), 30);
        assert!(carve_validation(&g, 1.5, 0).is_err());
    }
}
