use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::graph::{KnowledgeGraph, RelationId, Triple};

/// Cutoffs reported as Hits@N.
pub const HITS_AT: [usize; 2] = [1, 10];

/// Outcome of ranking the gold relation of one test triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankRecord {
    pub triple: Triple,
    pub rank: usize,
    pub candidate_count: usize,
    pub gold_prior: Option<f64>,
    pub gold_log_likelihood: Option<f64>,
}

impl RankRecord {
    pub fn zero_prior(&self) -> bool {
        self.gold_prior == Some(0.0)
    }
}

/// Aggregate metrics over a set of records. Hits are fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub rank_sum: u64,
    pub mr: f64,
    pub hits1: f64,
    pub hits10: f64,
    pub zero_prior_count: usize,
}

impl Summary {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a RankRecord>) -> Self {
        let mut count = 0usize;
        let mut rank_sum = 0u64;
        let mut within = [0usize; 2];
        let mut zero_prior_count = 0;
        for rec in records {
            count += 1;
            rank_sum += rec.rank as u64;
            for (slot, n) in within.iter_mut().zip(HITS_AT) {
                if rec.rank <= n {
                    *slot += 1;
                }
            }
            if rec.zero_prior() {
                zero_prior_count += 1;
            }
        }
        let frac = |k: usize| if count == 0 { f64::NAN } else { k as f64 / count as f64 };
        Self {
            count,
            rank_sum,
            mr: if count == 0 {
                f64::NAN
            } else {
                rank_sum as f64 / count as f64
            },
            hits1: frac(within[0]),
            hits10: frac(within[1]),
            zero_prior_count,
        }
    }

    pub fn hits(&self, n: usize) -> f64 {
        match n {
            1 => self.hits1,
            10 => self.hits10,
            _ => panic!("Hits@{n} is not tracked"),
        }
    }
}

/// Relation frequency bands, by share of training triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FrequencyBucket {
    /// `[0%, 0.5%)`
    Rare,
    /// `[0.5%, 1%)`
    Low,
    /// `[1%, 5%)`
    Mid,
    /// `[5%, 10%)`
    High,
    /// `[10%, 100%]`
    Top,
}

impl FrequencyBucket {
    pub const ALL: [FrequencyBucket; 5] = [Self::Rare, Self::Low, Self::Mid, Self::High, Self::Top];

    pub fn from_percent(pct: f64) -> Self {
        if pct < 0.5 {
            Self::Rare
        } else if pct < 1.0 {
            Self::Low
        } else if pct < 5.0 {
            Self::Mid
        } else if pct < 10.0 {
            Self::High
        } else {
            Self::Top
        }
    }

    pub fn of(graph: &KnowledgeGraph, relation: RelationId) -> Self {
        let total = graph.triples(crate::graph::Split::Train).len();
        if total == 0 {
            return Self::Rare;
        }
        Self::from_percent(100.0 * graph.train_count(relation) as f64 / total as f64)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Rare => "0-0.5%",
            Self::Low => "0.5-1%",
            Self::Mid => "1-5%",
            Self::High => "5-10%",
            Self::Top => "10-100%",
        }
    }
}

/// Per-triple ranks plus the aggregate, per-relation and per-bucket slices.
#[derive(Debug, Clone, Serialize)]
pub struct RankingReport {
    pub records: Vec<RankRecord>,
    pub overall: Summary,
    pub by_relation: BTreeMap<RelationId, Summary>,
    /// Micro averages: every test triple of the bucket counts once.
    pub by_bucket: BTreeMap<FrequencyBucket, Summary>,
    /// Macro averages: mean over the relations of the bucket of their own metric.
    pub bucket_macro: BTreeMap<FrequencyBucket, Summary>,
}

impl RankingReport {
    pub fn new(records: Vec<RankRecord>, graph: &KnowledgeGraph) -> Self {
        let overall = Summary::from_records(&records);
        let mut grouped: BTreeMap<RelationId, Vec<RankRecord>> = BTreeMap::new();
        for rec in &records {
            grouped.entry(rec.triple.relation).or_default().push(*rec);
        }
        let by_relation: BTreeMap<_, _> = grouped
            .iter()
            .map(|(r, recs)| (*r, Summary::from_records(recs)))
            .collect();

        let mut bucket_records: BTreeMap<FrequencyBucket, Vec<RankRecord>> = BTreeMap::new();
        let mut bucket_relations: BTreeMap<FrequencyBucket, Vec<&Summary>> = BTreeMap::new();
        for (r, recs) in &grouped {
            let b = FrequencyBucket::of(graph, *r);
            bucket_records.entry(b).or_default().extend_from_slice(recs);
            bucket_relations.entry(b).or_default().push(&by_relation[r]);
        }
        let by_bucket = bucket_records
            .iter()
            .map(|(b, recs)| (*b, Summary::from_records(recs)))
            .collect();
        let bucket_macro = bucket_relations
            .into_iter()
            .map(|(b, sums)| {
                let n = sums.len() as f64;
                let mean = |f: fn(&Summary) -> f64| sums.iter().map(|s| f(s)).sum::<f64>() / n;
                let summary = Summary {
                    count: sums.iter().map(|s| s.count).sum(),
                    rank_sum: sums.iter().map(|s| s.rank_sum).sum(),
                    mr: mean(|s| s.mr),
                    hits1: mean(|s| s.hits1),
                    hits10: mean(|s| s.hits10),
                    zero_prior_count: sums.iter().map(|s| s.zero_prior_count).sum(),
                };
                (b, summary)
            })
            .collect();

        Self {
            records,
            overall,
            by_relation,
            by_bucket,
            bucket_macro,
        }
    }

    pub fn mr(&self) -> f64 {
        self.overall.mr
    }

    pub fn hits(&self, n: usize) -> f64 {
        self.overall.hits(n)
    }

    pub fn zero_prior_count(&self) -> usize {
        self.overall.zero_prior_count
    }

    /// CSV with header `scope,slice,MR,Hits@1,Hits@10,count,zero_prior_count`.
    /// Hits are percentages.
    pub fn to_csv(&self, graph: &KnowledgeGraph) -> String {
        let mut out = String::from("scope,slice,MR,Hits@1,Hits@10,count,zero_prior_count\n");
        let mut row = |scope: &str, slice: &str, s: &Summary| {
            let _ = writeln!(
                out,
                "{scope},{},{:.4},{:.2},{:.2},{},{}",
                csv_field(slice),
                s.mr,
                100.0 * s.hits1,
                100.0 * s.hits10,
                s.count,
                s.zero_prior_count
            );
        };
        row("overall", "all", &self.overall);
        for (b, s) in &self.by_bucket {
            row("bucket", b.label(), s);
        }
        for (b, s) in &self.bucket_macro {
            row("bucket_macro", b.label(), s);
        }
        for (r, s) in &self.by_relation {
            row("relation", graph.relation_label(*r), s);
        }
        out
    }

    /// Fixed-width summary for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>8} {:>8} {:>8} {:>10}",
            "slice", "MR", "H@1", "H@10", "count", "zero-prior"
        );
        let mut line = |name: &str, s: &Summary| {
            let _ = writeln!(
                out,
                "{:<16} {:>10.4} {:>8.2} {:>8.2} {:>8} {:>10}",
                name,
                s.mr,
                100.0 * s.hits1,
                100.0 * s.hits10,
                s.count,
                s.zero_prior_count
            );
        };
        line("overall", &self.overall);
        for (b, s) in &self.by_bucket {
            line(&format!("freq {}", b.label()), s);
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
