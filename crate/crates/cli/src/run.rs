use std::fmt::Write as _;
use std::path::Path;

use relpred::embedding::{load_checkpoint, save_checkpoint, train, TrainConfig};
use relpred::eval::{case_study, case_study_tsv, evaluate_filtered, Scorer};
use relpred::experiments::{
    both_sides_typed, carve_validation, enrich_with_type_triples, generate_typed_synthetic_kg, qualified_relations,
    subsample_train, sweep_eta, transfer_types, write_dataset, write_triples, write_types, SynthConfig,
};
use relpred::prior::{PriorConfig, PriorExport, PriorModel};
use relpred::{CatalogExport, Error, KnowledgeGraph, Result, Split, TypeCatalog};
use serde::{Deserialize, Serialize};

use crate::args::{Command, DataArgs, PriorArgs, TrainArgs, TypeArgs};

pub const RUN_CONFIG: &str = "run_config.json";
const RUN_CONFIG_VERSION: u32 = 1;

/// Everything needed to replay a run, saved next to its outputs.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    pub command: Command,
}

impl RunConfig {
    pub fn load(dir: &Path) -> Result<Command> {
        let path = dir.join(RUN_CONFIG);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        if cfg.version != RUN_CONFIG_VERSION {
            return Err(Error::Incompatible(format!(
                "{}: run configuration version {} (expected {RUN_CONFIG_VERSION})",
                path.display(),
                cfg.version
            )));
        }
        Ok(cfg.command)
    }
}

pub fn execute(command: &Command) -> Result<()> {
    if let Some(dir) = command.out_dir() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cfg = RunConfig {
            version: RUN_CONFIG_VERSION,
            command: command.clone(),
        };
        write(dir, RUN_CONFIG, &(serde_json::to_string_pretty(&cfg)? + "\n"))?;
    }
    match command {
        Command::Import { data, types, out } => import(data, types, out.as_deref()),
        Command::BuildPrior {
            data,
            types,
            prior,
            out,
        } => build_prior(data, types, prior, out),
        Command::Train { data, model, seed, out } => train_model(data, model, *seed, out),
        Command::Eval { .. } => eval(command),
        Command::SweepEta {
            data,
            types,
            prior,
            etas,
            valid_fraction,
            seed,
            out,
        } => sweep(data, types, prior, etas, *valid_fraction, *seed, out.as_deref()),
        Command::Subsample {
            data,
            fraction,
            seed,
            out,
        } => {
            let graph = load_graph(data)?;
            let sub = subsample_train(&graph, *fraction, *seed)?;
            write_triples(&sub, out)?;
            println!(
                "kept {} of {} train triples",
                sub.triples(Split::Train).len(),
                graph.triples(Split::Train).len()
            );
            Ok(())
        }
        Command::Enrich { data, types, out } => {
            let graph = load_graph(data)?;
            let catalog = load_types(types, &graph)?;
            let (enriched, stats) = enrich_with_type_triples(&graph, &catalog)?;
            write_dataset(&enriched, &catalog, out)?;
            println!(
                "added {} '{}' and {} '{}' triples over {} type entities",
                stats.type_triples, stats.type_relation, stats.is_a_triples, stats.is_a_relation, stats.type_entities
            );
            Ok(())
        }
        Command::Transfer {
            data,
            types,
            source_catalogs,
            union,
            out,
        } => transfer(data, types, source_catalogs, *union, out),
        Command::Synth {
            entities,
            relations,
            n_types,
            determinism,
            triples_per_relation,
            seed,
            out,
        } => {
            let config = SynthConfig {
                n_entities: *entities,
                n_relations: *relations,
                n_types: *n_types,
                type_determinism: *determinism,
                seed: *seed,
                triples_per_relation: *triples_per_relation,
            };
            let (graph, catalog) = generate_typed_synthetic_kg(&config)?;
            write_dataset(&graph, &catalog, out)?;
            println!("{}", stats_line(&graph));
            Ok(())
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn load_graph(data: &DataArgs) -> Result<KnowledgeGraph> {
    let mut graph = KnowledgeGraph::new();
    let files = [
        (Some(&data.train), Split::Train),
        (data.valid.as_ref(), Split::Valid),
        (data.test.as_ref(), Split::Test),
    ];
    for (path, split) in files {
        if let Some(p) = path {
            let stats = graph.load_triples(p, split)?;
            if stats.duplicates > 0 {
                log::warn!("{}: {} duplicate triples ignored", p.display(), stats.duplicates);
            }
            log::info!("{split}: {} triples from {}", graph.triples(split).len(), p.display());
        }
    }
    Ok(graph)
}

fn load_types(args: &TypeArgs, graph: &KnowledgeGraph) -> Result<TypeCatalog> {
    let mut catalog = TypeCatalog::new();
    if let Some(p) = &args.types {
        let stats = catalog.load_fb15k_types(p, graph)?;
        log::info!("{} type paths from {}", stats.paths_added, p.display());
    } else if let (Some(links), Some(onto)) = (&args.type_links, &args.ontology) {
        let stats = catalog.load_ontology_types(links, onto, &args.isa, graph)?;
        log::info!("{} type paths from {}", stats.paths_added, links.display());
    } else if let Some(p) = &args.catalog {
        let (c, matched) = TypeCatalog::from_export(&CatalogExport::load(p)?, graph)?;
        log::info!("{matched} typed entities from {}", p.display());
        catalog = c;
    } else {
        return Err(Error::Config(
            "type information required: pass --types, --type-links with --ontology, or --catalog".into(),
        ));
    }
    Ok(catalog)
}

fn prior_config(args: &PriorArgs) -> PriorConfig {
    PriorConfig {
        eta: args.eta,
        mode: args.prior_mode,
        scheme: args.weights,
        count_multiplicity: args.count_multiplicity,
        smoothing: args.smoothing,
    }
}

fn check_prior_args(args: &PriorArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.eta) {
        return Err(Error::Config(format!("--eta {} outside [0, 1]", args.eta)));
    }
    if !(args.smoothing >= 0.0 && args.smoothing.is_finite()) {
        return Err(Error::Config("--smoothing must be a finite non-negative number".into()));
    }
    Ok(())
}

fn stats_line(graph: &KnowledgeGraph) -> String {
    format!("{} relations, {} entities", graph.num_relations(), graph.num_entities())
}

fn import(data: &DataArgs, types: &TypeArgs, out: Option<&Path>) -> Result<()> {
    let graph = load_graph(data)?;
    let catalog = if types.is_given() {
        Some(load_types(types, &graph)?)
    } else {
        None
    };
    let typed = catalog.as_ref().map(|c| c.typed_entities().count());
    let n_types = catalog.as_ref().map(|c| c.num_types());
    let mut csv = String::from("entities,relations,train,valid,test,typed_entities,types\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        graph.num_entities(),
        graph.num_relations(),
        graph.triples(Split::Train).len(),
        graph.triples(Split::Valid).len(),
        graph.triples(Split::Test).len(),
        typed.map_or(String::new(), |n| n.to_string()),
        n_types.map_or(String::new(), |n| n.to_string()),
    );
    println!("{}", stats_line(&graph));
    println!(
        "{:>10} {:>10} {:>10} {:>10} {:>10}",
        "#ent", "#rel", "#train", "#valid", "#test"
    );
    println!(
        "{:>10} {:>10} {:>10} {:>10} {:>10}",
        graph.num_entities(),
        graph.num_relations(),
        graph.triples(Split::Train).len(),
        graph.triples(Split::Valid).len(),
        graph.triples(Split::Test).len()
    );
    if let (Some(typed), Some(n_types)) = (typed, n_types) {
        println!("{typed} typed entities, {n_types} types");
    }
    if let Some(dir) = out {
        write(dir, "stats.csv", &csv)?;
        if let Some(c) = &catalog {
            c.export(&graph).save(dir.join("catalog.json"))?;
        }
    }
    Ok(())
}

fn build_prior(data: &DataArgs, types: &TypeArgs, args: &PriorArgs, out: &Path) -> Result<()> {
    check_prior_args(args)?;
    let graph = load_graph(data)?;
    let catalog = load_types(types, &graph)?;
    let prior = PriorModel::build(&graph, &catalog, prior_config(args));
    prior.export(&graph).save(out.join("prior.json"))?;

    let mut csv = String::from("relation,train_support,head_types,tail_types\n");
    for p in prior.profiles() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            graph.relation_label(p.relation),
            p.train_support,
            p.head_types.len(),
            p.tail_types.len()
        );
    }
    write(out, "set_sizes.csv", &csv)?;
    let (h, t) = prior.average_set_sizes();
    println!("eta {}: average |T_head| {h:.2}, average |T_tail| {t:.2}", args.eta);
    Ok(())
}

fn train_config(args: &TrainArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        model: args.model,
        dim: args.dim,
        batch_size: args.batch,
        negatives: args.neg,
        learning_rate: args.lr,
        steps: args.steps,
        gamma: args.gamma,
        adversarial_temperature: args.adv_temp,
        seed,
        init_epsilon: args.init_eps,
        lr_decay: args.lr_decay,
        decay_every: args.decay_every,
        transe_op: args.transe_op,
    }
}

fn train_model(data: &DataArgs, args: &TrainArgs, seed: u64, out: &Path) -> Result<()> {
    let config = train_config(args, seed);
    config.validate()?;
    let graph = load_graph(data)?;
    let outcome = train(&graph, &config)?;
    save_checkpoint(&outcome.model, out.join("model.ckpt"))?;
    let mut csv = String::from("step,loss\n");
    for (i, l) in outcome.losses.iter().enumerate() {
        let _ = writeln!(csv, "{},{l}", i + 1);
    }
    write(out, "losses.csv", &csv)?;
    match outcome.losses.last() {
        Some(l) => println!("trained {} for {} steps, final loss {l:.5}", config.model, config.steps),
        None => println!("wrote untrained {} model", config.model),
    }
    Ok(())
}

fn eval(command: &Command) -> Result<()> {
    let Command::Eval {
        data,
        types,
        prior: prior_args,
        checkpoint,
        prior_model,
        prior_only,
        likelihood_only,
        split,
        qualified_only,
        both_typed,
        dump_ranks,
        csv,
        out,
    } = command
    else {
        unreachable!("eval called with another command");
    };
    check_prior_args(prior_args)?;
    let want_prior = !likelihood_only;
    let want_embedding = !prior_only;
    if want_embedding && checkpoint.is_none() {
        return Err(Error::Config(
            "likelihood scoring needs --checkpoint (or pass --prior-only)".into(),
        ));
    }
    let need_types = want_prior || *qualified_only || *both_typed;
    if need_types && !types.is_given() && prior_model.is_none() {
        return Err(Error::Config(
            "prior scoring needs type information or --prior-model (or pass --likelihood-only)".into(),
        ));
    }

    let graph = load_graph(data)?;
    let catalog = if types.is_given() {
        load_types(types, &graph)?
    } else {
        TypeCatalog::new()
    };
    let model = checkpoint.as_ref().map(load_checkpoint).transpose()?;
    let prior = if want_prior || *dump_ranks {
        Some(match prior_model {
            Some(p) => {
                PriorModel::from_export(&PriorExport::load(p)?, &graph, &catalog)?.with_mode(prior_args.prior_mode)
            }
            None => PriorModel::build(&graph, &catalog, prior_config(prior_args)),
        })
    } else {
        None
    };
    let scorer = Scorer::new(
        if want_prior { prior.as_ref() } else { None },
        if want_embedding { model.as_ref() } else { None },
    )?;

    let qualified: std::collections::HashSet<_> = qualified_relations(&graph, &catalog).into_iter().collect();
    let typed_pair = both_sides_typed(&catalog);
    let keep =
        |t: &relpred::Triple| (!qualified_only || qualified.contains(&t.relation)) && (!both_typed || typed_pair(t));
    let report = evaluate_filtered(&graph, &scorer, *split, keep)?;
    let csv_text = report.to_csv(&graph);
    if *csv {
        print!("{csv_text}");
    } else {
        println!("{} ranking on {split}", scorer.label());
        print!("{}", report.to_table());
    }
    if let Some(dir) = out {
        write(dir, "report.csv", &csv_text)?;
        if *dump_ranks {
            let (Some(p), Some(m)) = (prior.as_ref(), model.as_ref()) else {
                return Err(Error::Config("--dump-ranks needs both a prior and a checkpoint".into()));
            };
            let rows = case_study(&graph, p, m, *split)?;
            write(dir, "ranks.tsv", &case_study_tsv(&graph, &rows))?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    data: &DataArgs,
    types: &TypeArgs,
    args: &PriorArgs,
    etas: &[f64],
    valid_fraction: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    check_prior_args(args)?;
    let mut graph = load_graph(data)?;
    if graph.triples(Split::Valid).is_empty() {
        log::info!("no validation split, holding out {valid_fraction} of train with seed {seed}");
        graph = carve_validation(&graph, valid_fraction, seed)?;
    }
    let catalog = load_types(types, &graph)?;
    let result = sweep_eta(&graph, &catalog, etas, Split::Valid, prior_config(args))?;
    print!("{}", result.to_table());
    println!("best eta {}", result.best_eta);
    if let Some(dir) = out {
        write(dir, "sweep.csv", &result.to_csv())?;
    }
    Ok(())
}

fn transfer(data: &DataArgs, types: &TypeArgs, sources: &[std::path::PathBuf], union: bool, out: &Path) -> Result<()> {
    let graph = load_graph(data)?;
    let native = if union {
        Some(load_types(types, &graph)?)
    } else {
        if types.is_given() {
            log::warn!("native types are ignored without --union");
        }
        None
    };
    let exports = sources.iter().map(CatalogExport::load).collect::<Result<Vec<_>>>()?;
    let (catalog, report) = transfer_types(&graph, &exports, native.as_ref())?;
    catalog.export(&graph).save(out.join("catalog.json"))?;
    write_types(&graph, &catalog, out.join("types.txt"))?;

    #[derive(Serialize)]
    struct Coverage<'a> {
        matched_entities: usize,
        qualified_relations: Vec<&'a str>,
        qualified_test_triples: usize,
    }
    let coverage = Coverage {
        matched_entities: report.matched_entities,
        qualified_relations: report
            .qualified_relations
            .iter()
            .map(|r| graph.relation_label(*r))
            .collect(),
        qualified_test_triples: report.qualified_test_triples,
    };
    write(out, "coverage.json", &(serde_json::to_string_pretty(&coverage)? + "\n"))?;
    println!(
        "{} matched entities, {} qualified relations, {} qualified test triples",
        report.matched_entities,
        report.qualified_relations.len(),
        report.qualified_test_triples
    );
    Ok(())
}
