//! Fusing the type prior with embedding likelihoods and ranking gold relations.

mod evaluate;
mod fusion;
mod report;

pub use evaluate::{case_study, case_study_tsv, evaluate, evaluate_filtered, rank_triple, CaseRanks};
pub use fusion::{rank_gold, CandidateScore, Scorer};
pub use report::{FrequencyBucket, RankRecord, RankingReport, Summary, HITS_AT};
