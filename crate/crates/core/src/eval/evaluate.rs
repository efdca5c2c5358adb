use std::fmt::Write as _;

use rayon::prelude::*;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::eval::fusion::{rank_gold, Scorer};
use crate::eval::report::{RankRecord, RankingReport};
use crate::graph::{KnowledgeGraph, Split, Triple};
use crate::prior::PriorModel;

/// Filtered rank of the gold relation for one triple.
pub fn rank_triple(graph: &KnowledgeGraph, scorer: &Scorer<'_>, triple: &Triple) -> RankRecord {
    let candidates = graph.filtered_candidates(triple.head, triple.tail, triple.relation);
    let scores = scorer.posterior_scores(triple.head, triple.tail, &candidates);
    let gold = scores
        .iter()
        .find(|c| c.relation == triple.relation)
        .expect("gold is always a filtered candidate");
    RankRecord {
        triple: *triple,
        rank: rank_gold(&scores, triple.relation),
        candidate_count: candidates.len(),
        gold_prior: gold.prior,
        gold_log_likelihood: gold.log_likelihood,
    }
}

/// Ranks every triple of `split`.
pub fn evaluate(graph: &KnowledgeGraph, scorer: &Scorer<'_>, split: Split) -> Result<RankingReport> {
    evaluate_filtered(graph, scorer, split, |_| true)
}

/// Ranks the triples of `split` accepted by `keep`. Records come back in
/// split order regardless of thread count.
pub fn evaluate_filtered(
    graph: &KnowledgeGraph,
    scorer: &Scorer<'_>,
    split: Split,
    keep: impl Fn(&Triple) -> bool + Sync,
) -> Result<RankingReport> {
    scorer.check_compatible(graph)?;
    let triples: Vec<&Triple> = graph.triples(split).iter().filter(|t| keep(t)).collect();
    if triples.is_empty() {
        return Err(Error::Eval(format!("no {split} triples to evaluate")));
    }
    let records: Vec<RankRecord> = triples.par_iter().map(|t| rank_triple(graph, scorer, t)).collect();
    Ok(RankingReport::new(records, graph))
}

/// Ranks of one triple under each of the three scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseRanks {
    pub triple: Triple,
    pub prior_rank: usize,
    pub likelihood_rank: usize,
    pub fused_rank: usize,
}

/// Per-triple ranks under prior-only, likelihood-only and fused scoring.
pub fn case_study(
    graph: &KnowledgeGraph,
    prior: &PriorModel,
    embedding: &EmbeddingModel,
    split: Split,
) -> Result<Vec<CaseRanks>> {
    let scorers = [
        Scorer::prior_only(prior),
        Scorer::likelihood_only(embedding),
        Scorer::fused(prior, embedding),
    ];
    for s in &scorers {
        s.check_compatible(graph)?;
    }
    let triples = graph.triples(split);
    if triples.is_empty() {
        return Err(Error::Eval(format!("no {split} triples to evaluate")));
    }
    Ok(triples
        .par_iter()
        .map(|t| {
            let [p, l, f] = scorers.each_ref().map(|s| rank_triple(graph, s, t).rank);
            CaseRanks {
                triple: *t,
                prior_rank: p,
                likelihood_rank: l,
                fused_rank: f,
            }
        })
        .collect())
}

/// TSV with columns `head relation tail prior_rank likelihood_rank fused_rank`.
pub fn case_study_tsv(graph: &KnowledgeGraph, rows: &[CaseRanks]) -> String {
    let mut out = String::from("head\trelation\ttail\tprior_rank\tlikelihood_rank\tfused_rank\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            graph.entity_label(r.triple.head),
            graph.relation_label(r.triple.relation),
            graph.entity_label(r.triple.tail),
            r.prior_rank,
            r.likelihood_rank,
            r.fused_rank
        );
    }
    out
}
