use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use relpred::embedding::{ModelKind, TransEOperator};
use relpred::prior::{PriorMode, WeightScheme};
use relpred::Split;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "relpred",
    version,
    about = "Relation prediction with a type prior and KG embeddings"
)]
pub struct Cli {
    /// Worker threads; defaults to every available core
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Re-run the configuration saved in this output directory
    #[arg(long, value_name = "DIR")]
    pub resume_from: Option<PathBuf>,

    /// With --resume-from, write into DIR instead of the original directory
    #[arg(long, value_name = "DIR", requires = "resume_from")]
    pub into: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Parse a corpus and print its statistics
    Import {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        types: TypeArgs,
        /// Also write stats.csv and, with types, a label-keyed catalog.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the type prior and write it with per-relation set sizes
    BuildPrior {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        types: TypeArgs,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an embedding model on the train split
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: TrainArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank gold relations and report MR / Hits@N
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        types: TypeArgs,
        #[command(flatten)]
        prior: PriorArgs,
        /// Embedding checkpoint written by `train`
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Prior artifact written by `build-prior`, instead of building one from types
        #[arg(long)]
        prior_model: Option<PathBuf>,
        #[arg(long, conflicts_with = "likelihood_only")]
        prior_only: bool,
        #[arg(long)]
        likelihood_only: bool,
        #[arg(long, default_value = "test")]
        split: Split,
        /// Only triples whose relation has typed heads and typed tails in train
        #[arg(long)]
        qualified_only: bool,
        /// Only triples whose head and tail both carry types
        #[arg(long)]
        both_typed: bool,
        /// Write ranks.tsv with prior, likelihood and fused ranks per triple
        #[arg(long, requires = "out")]
        dump_ranks: bool,
        /// Print CSV instead of a table on standard output
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the pruning threshold on the validation split
    SweepEta {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        types: TypeArgs,
        #[command(flatten)]
        prior: PriorArgs,
        /// Thresholds to try
        #[arg(long, value_delimiter = ',', default_values_t = relpred::experiments::DEFAULT_ETA_GRID.to_vec())]
        etas: Vec<f64>,
        /// Share of train held out when the corpus has no validation split
        #[arg(long, default_value_t = 0.05)]
        valid_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keep a fraction of each relation's train triples
    Subsample {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add entity-type and type-hierarchy triples to the train split
    Enrich {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        types: TypeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Import types from other corpora by exact entity label
    Transfer {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        types: TypeArgs,
        /// catalog.json exported by `import --out` on a source corpus
        #[arg(long = "source-catalog", required = true)]
        source_catalogs: Vec<PathBuf>,
        /// Merge with the native types given by the type flags
        #[arg(long)]
        union: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a typed synthetic corpus
    Synth {
        #[arg(long, default_value_t = 50)]
        entities: usize,
        #[arg(long, default_value_t = 4)]
        relations: usize,
        #[arg(long = "types", default_value_t = 8)]
        n_types: usize,
        /// Probability that a triple follows its relation's type signature
        #[arg(long, default_value_t = 1.0)]
        determinism: f64,
        #[arg(long)]
        triples_per_relation: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Import { .. } => "import",
            Command::BuildPrior { .. } => "build-prior",
            Command::Train { .. } => "train",
            Command::Eval { .. } => "eval",
            Command::SweepEta { .. } => "sweep-eta",
            Command::Subsample { .. } => "subsample",
            Command::Enrich { .. } => "enrich",
            Command::Transfer { .. } => "transfer",
            Command::Synth { .. } => "synth",
        }
    }

    pub fn out_dir(&self) -> Option<&PathBuf> {
        match self {
            Command::Import { out, .. } | Command::Eval { out, .. } | Command::SweepEta { out, .. } => out.as_ref(),
            Command::BuildPrior { out, .. }
            | Command::Train { out, .. }
            | Command::Subsample { out, .. }
            | Command::Enrich { out, .. }
            | Command::Transfer { out, .. }
            | Command::Synth { out, .. } => Some(out),
        }
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        match self {
            Command::Import { out, .. } | Command::Eval { out, .. } | Command::SweepEta { out, .. } => *out = Some(dir),
            Command::BuildPrior { out, .. }
            | Command::Train { out, .. }
            | Command::Subsample { out, .. }
            | Command::Enrich { out, .. }
            | Command::Transfer { out, .. }
            | Command::Synth { out, .. } => *out = dir,
        }
    }

    /// Rewrites every path to an absolute one so a saved configuration can
    /// be replayed from any working directory.
    pub fn absolutize(&mut self) -> std::io::Result<()> {
        fn abs(p: &mut PathBuf) -> std::io::Result<()> {
            *p = std::path::absolute(&*p)?;
            Ok(())
        }
        fn abs_opt(p: &mut Option<PathBuf>) -> std::io::Result<()> {
            p.as_mut().map(abs).transpose().map(|_| ())
        }
        let (data, types) = match self {
            Command::Import { data, types, .. }
            | Command::BuildPrior { data, types, .. }
            | Command::Eval { data, types, .. }
            | Command::SweepEta { data, types, .. }
            | Command::Enrich { data, types, .. }
            | Command::Transfer { data, types, .. } => (Some(data), Some(types)),
            Command::Train { data, .. } | Command::Subsample { data, .. } => (Some(data), None),
            Command::Synth { .. } => (None, None),
        };
        if let Some(d) = data {
            abs(&mut d.train)?;
            abs_opt(&mut d.valid)?;
            abs_opt(&mut d.test)?;
        }
        if let Some(t) = types {
            abs_opt(&mut t.types)?;
            abs_opt(&mut t.type_links)?;
            abs_opt(&mut t.ontology)?;
            abs_opt(&mut t.catalog)?;
        }
        match self {
            Command::Eval {
                checkpoint,
                prior_model,
                ..
            } => {
                abs_opt(checkpoint)?;
                abs_opt(prior_model)?;
            }
            Command::Transfer { source_catalogs, .. } => {
                for p in source_catalogs {
                    abs(p)?;
                }
            }
            _ => {}
        }
        let mut out = self.out_dir().cloned();
        if let Some(o) = out.as_mut() {
            abs(o)?;
            self.set_out_dir(o.clone());
        }
        Ok(())
    }
}

/// Triple files, one `head<TAB>relation<TAB>tail` per line.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DataArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
}

/// Where entity types come from. At most one source.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TypeArgs {
    /// `entity<TAB>/t1/.../tK` lines
    #[arg(long, conflicts_with_all = ["type_links", "catalog"])]
    pub types: Option<PathBuf>,
    /// `entity<TAB>type` lines resolved through --ontology
    #[arg(long, requires = "ontology", conflicts_with = "catalog")]
    pub type_links: Option<PathBuf>,
    /// Ontology triples holding the type hierarchy
    #[arg(long, requires = "type_links")]
    pub ontology: Option<PathBuf>,
    /// Relation label of parent links in the ontology triples
    #[arg(long, default_value = "rdfs:subClassOf")]
    pub isa: String,
    /// Label-keyed catalog.json
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

impl TypeArgs {
    pub fn is_given(&self) -> bool {
        self.types.is_some() || self.type_links.is_some() || self.catalog.is_some()
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PriorArgs {
    /// Pruning threshold in [0, 1]
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Which similarity factors enter the prior: h, t or both
    #[arg(long, alias = "mode", default_value = "both")]
    pub prior_mode: PriorMode,
    /// Per-type weights: hierarchy or uniform
    #[arg(long, default_value = "hierarchy")]
    pub weights: WeightScheme,
    /// Count a relation's repeated heads/tails once per triple
    #[arg(long)]
    pub count_multiplicity: bool,
    /// Added to every unnormalised prior score
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, default_value = "rotate")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    /// Negative samples per positive
    #[arg(long, default_value_t = 16)]
    pub neg: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 6.0)]
    pub gamma: f64,
    /// Self-adversarial sampling temperature
    #[arg(long, default_value_t = 1.0)]
    pub adv_temp: f64,
    /// Initialisation half-width as a fraction of gamma; default 1/dim
    #[arg(long)]
    pub init_eps: Option<f64>,
    /// Learning-rate factor applied every --decay-every steps
    #[arg(long, default_value_t = 1.0)]
    pub lr_decay: f64,
    #[arg(long, default_value_t = 0)]
    pub decay_every: usize,
    /// TransE combination: translate or elementwise
    #[arg(long, default_value = "translate")]
    pub transe_op: TransEOperator,
}
