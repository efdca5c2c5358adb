use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId};
use crate::prior::PriorModel;

/// One candidate relation with its ranking key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub relation: RelationId,
    /// Log-posterior up to a shared additive constant; `-inf` when the prior is 0.
    pub score: f64,
    /// Embedding score `f_r(h, t)` (the log-likelihood), when a model is present.
    pub log_likelihood: Option<f64>,
    /// Type prior, when a prior model is present.
    pub prior: Option<f64>,
}

impl CandidateScore {
    fn tiebreak_likelihood(&self) -> f64 {
        self.log_likelihood.unwrap_or(0.0)
    }
}

/// Which evidence to rank with: prior only, likelihood only, or both fused.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    prior: Option<&'a PriorModel>,
    embedding: Option<&'a EmbeddingModel>,
}

impl<'a> Scorer<'a> {
    pub fn new(prior: Option<&'a PriorModel>, embedding: Option<&'a EmbeddingModel>) -> Result<Self> {
        if prior.is_none() && embedding.is_none() {
            return Err(Error::Config("need a prior model, an embedding model, or both".into()));
        }
        Ok(Self { prior, embedding })
    }

    pub fn prior_only(prior: &'a PriorModel) -> Self {
        Self {
            prior: Some(prior),
            embedding: None,
        }
    }

    pub fn likelihood_only(embedding: &'a EmbeddingModel) -> Self {
        Self {
            prior: None,
            embedding: Some(embedding),
        }
    }

    pub fn fused(prior: &'a PriorModel, embedding: &'a EmbeddingModel) -> Self {
        Self {
            prior: Some(prior),
            embedding: Some(embedding),
        }
    }

    pub fn prior(&self) -> Option<&'a PriorModel> {
        self.prior
    }

    pub fn embedding(&self) -> Option<&'a EmbeddingModel> {
        self.embedding
    }

    pub fn label(&self) -> &'static str {
        match (self.prior.is_some(), self.embedding.is_some()) {
            (true, true) => "fused",
            (true, false) => "prior",
            _ => "likelihood",
        }
    }

    /// Fails unless the embedding tables were trained on exactly this
    /// graph's vocabulary.
    pub fn check_compatible(&self, graph: &KnowledgeGraph) -> Result<()> {
        if let Some(m) = self.embedding {
            if m.num_entities() != graph.num_entities() || m.num_relations() != graph.num_relations() {
                return Err(Error::Incompatible(format!(
                    "checkpoint has {} entities / {} relations, corpus has {} / {}",
                    m.num_entities(),
                    m.num_relations(),
                    graph.num_entities(),
                    graph.num_relations()
                )));
            }
            let same_labels = graph.entities().iter().all(|(i, l)| m.entity_labels()[i as usize] == l)
                && graph
                    .relations()
                    .iter()
                    .all(|(i, l)| m.relation_labels()[i as usize] == l);
            if !same_labels {
                return Err(Error::Incompatible(
                    "checkpoint vocabulary differs from the corpus".into(),
                ));
            }
        }
        if let Some(p) = self.prior {
            if p.profiles().len() != graph.num_relations() {
                return Err(Error::Incompatible(format!(
                    "prior covers {} relations, corpus has {}",
                    p.profiles().len(),
                    graph.num_relations()
                )));
            }
        }
        Ok(())
    }

    /// `f_r(h, t) + log p(r | types)` for every candidate, with the missing
    /// term dropped when only one source is configured.
    pub fn posterior_scores(&self, head: EntityId, tail: EntityId, candidates: &[RelationId]) -> Vec<CandidateScore> {
        let priors = self.prior.map(|p| p.prior(head, tail, candidates));
        candidates
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let log_likelihood = self.embedding.map(|m| m.score(head, r, tail));
                let prior = priors.as_ref().map(|p| p[i]);
                let log_prior = prior.map(|p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY });
                let score = log_likelihood.unwrap_or(0.0) + log_prior.unwrap_or(0.0);
                CandidateScore {
                    relation: r,
                    score,
                    log_likelihood,
                    prior,
                }
            })
            .collect()
    }
}

/// 1 + number of candidates ranked ahead of `gold`.
///
/// Ahead means a strictly higher score, or an equal score with a higher
/// log-likelihood, or equal both with a smaller relation id.
///
/// # Panics
///
/// If `gold` is not among `scores`.
pub fn rank_gold(scores: &[CandidateScore], gold: RelationId) -> usize {
    let g = scores
        .iter()
        .find(|c| c.relation == gold)
        .expect("gold relation must be a candidate");
    debug_assert!(scores.iter().all(|c| !c.score.is_nan()));
    let ahead = scores
        .iter()
        .filter(|c| c.relation != gold)
        .filter(|c| {
            c.score > g.score
                || (c.score == g.score
                    && (c.tiebreak_likelihood() > g.tiebreak_likelihood()
                        || (c.tiebreak_likelihood() == g.tiebreak_likelihood() && c.relation < gold)))
        })
        .count();
    1 + ahead
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(r: u32, score: f64, ll: Option<f64>) -> CandidateScore {
        CandidateScore {
            relation: RelationId(r),
            score,
            log_likelihood: ll,
            prior: None,
        }
    }

    #[test]
    fn best_is_rank_one() {
        let s = [cs(0, 1.0, None), cs(1, 3.0, None), cs(2, 2.0, None)];
        assert_eq!(rank_gold(&s, RelationId(1)), 1);
        assert_eq!(rank_gold(&s, RelationId(0)), 3);
    }

    #[test]
    fn tie_goes_to_smaller_id() {
        let s = [cs(0, 5.0, Some(-1.0)), cs(1, 5.0, Some(-1.0)), cs(2, 3.0, Some(-1.0))];
        assert_eq!(rank_gold(&s, RelationId(1)), 2);
        assert_eq!(rank_gold(&s, RelationId(0)), 1);
    }

    #[test]
    fn tie_prefers_higher_likelihood() {
        let s = [cs(0, 5.0, Some(-2.0)), cs(1, 5.0, Some(-1.0))];
        assert_eq!(rank_gold(&s, RelationId(1)), 1);
    }

    #[test]
    fn negative_infinity_ranks_last() {
        let s = [
            cs(0, f64::NEG_INFINITY, Some(0.0)),
            cs(1, -50.0, Some(-50.0)),
            cs(2, f64::NEG_INFINITY, Some(-1.0)),
        ];
        assert_eq!(rank_gold(&s, RelationId(1)), 1);
        assert_eq!(rank_gold(&s, RelationId(0)), 2);
        assert_eq!(rank_gold(&s, RelationId(2)), 3);
    }

    #[test]
    #[should_panic]
    fn missing_gold_panics() {
        rank_gold(&[cs(0, 1.0, None)], RelationId(3));
    }

    #[test]
    fn scorer_needs_a_source() {
        assert!(Scorer::new(None, None).is_err());
    }
}
