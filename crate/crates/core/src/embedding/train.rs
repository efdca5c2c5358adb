//! Self-adversarial negative-sampling SGD shared by all three score functions.
//!
//! A step samples a batch of train triples, corrupts each one `negatives`
//! times by swapping in a uniformly drawn head or tail, and minimises
//!
//! ```text
//! -log σ(γ + f(pos)) - Σ_i w_i log σ(-f(neg_i) - γ),   w = softmax(α f(neg))
//! ```
//!
//! with the weights `w` treated as constants. All sampling happens on one
//! seeded stream before the batch is scattered to workers, and gradients are
//! applied in batch order by a single writer, so results do not depend on the
//! thread count.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::model::{score_grad_rows, EmbeddingModel, ModelKind, ModelSpec, TransEOperator};
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Split, Triple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub dim: usize,
    pub batch_size: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub steps: usize,
    /// Margin γ.
    pub gamma: f64,
    /// Self-adversarial temperature α.
    pub adversarial_temperature: f64,
    pub seed: u64,
    /// Initialisation half-width as a fraction of γ; `None` means `1 / dim`.
    pub init_epsilon: Option<f64>,
    /// Multiply the learning rate by this factor every `decay_every` steps.
    pub lr_decay: f64,
    /// 0 disables decay.
    pub decay_every: usize,
    pub transe_op: TransEOperator,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::RotatE,
            dim: 64,
            batch_size: 64,
            negatives: 16,
            learning_rate: 0.1,
            steps: 1000,
            gamma: 6.0,
            adversarial_temperature: 1.0,
            seed: 0,
            init_epsilon: None,
            lr_decay: 1.0,
            decay_every: 0,
            transe_op: TransEOperator::Translate,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.dim > 0
            && self.batch_size > 0
            && self.negatives > 0
            && self.learning_rate > 0.0
            && self.gamma > 0.0
            && self.adversarial_temperature > 0.0
            && self.lr_decay > 0.0
            && self.init_epsilon.is_none_or(|e| e > 0.0);
        if positive {
            Ok(())
        } else {
            Err(Error::Config(
                "dim, batch size, negatives, learning rate, gamma, temperature and decay must be positive".into(),
            ))
        }
    }

    pub fn spec(&self) -> ModelSpec {
        let eps = self.init_epsilon.unwrap_or(1.0 / self.dim as f64);
        ModelSpec {
            kind: self.model,
            dim: self.dim,
            gamma: self.gamma,
            init_scale: self.gamma * eps,
            transe_op: self.transe_op,
        }
    }

    pub fn learning_rate_at(&self, step: usize) -> f64 {
        match step.checked_div(self.decay_every) {
            Some(k) => self.learning_rate * self.lr_decay.powi(k as i32),
            None => self.learning_rate,
        }
    }
}

/// Trained model plus the mean batch loss of every step.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    pub losses: Vec<f64>,
}

fn rng_for(config: &TrainConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed)
}

/// The model `train` starts from; exposed so a zero-step run can be checked
/// against it.
pub fn initial_model(graph: &KnowledgeGraph, config: &TrainConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    EmbeddingModel::initialize(
        config.spec(),
        graph.entities().labels(),
        graph.relations().labels(),
        &mut rng_for(config),
    )
}

pub fn train(graph: &KnowledgeGraph, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let positives = graph.triples(Split::Train);
    if positives.is_empty() {
        return Err(Error::Config("train split is empty".into()));
    }
    let mut rng = rng_for(config);
    let mut model = EmbeddingModel::initialize(
        config.spec(),
        graph.entities().labels(),
        graph.relations().labels(),
        &mut rng,
    )?;
    let n_entities = graph.num_entities() as u32;
    let mut losses = Vec::with_capacity(config.steps);

    for step in 0..config.steps {
        let lr = config.learning_rate_at(step);
        let batch: Vec<Example> = (0..config.batch_size)
            .map(|_| {
                let pos = positives[rng.gen_range(0..positives.len())];
                let negatives = (0..config.negatives)
                    .map(|_| {
                        let e = EntityId(rng.gen_range(0..n_entities));
                        if rng.gen_bool(0.5) {
                            (e, pos.tail)
                        } else {
                            (pos.head, e)
                        }
                    })
                    .collect();
                Example { pos, negatives }
            })
            .collect();

        let grads: Vec<ExampleGrad> = batch.par_iter().map(|ex| example_grad(&model, ex, config)).collect();

        let scale = lr / config.batch_size as f64;
        let mut loss = 0.0;
        for g in &grads {
            loss += g.loss;
            for (target, delta) in &g.updates {
                let row = match *target {
                    Target::Entity(e) => model.entity_row_mut(e),
                    Target::Relation(r) => model.relation_row_mut(r),
                };
                for (x, d) in row.iter_mut().zip(delta) {
                    *x -= scale * d;
                }
            }
        }
        if model.kind() == ModelKind::RotatE {
            for g in &grads {
                for (target, _) in &g.updates {
                    if let Target::Relation(r) = *target {
                        for phase in model.relation_row_mut(r) {
                            *phase = wrap_phase(*phase);
                        }
                    }
                }
            }
        }
        if let Some(detail) = grads
            .iter()
            .flat_map(|g| &g.updates)
            .find_map(|(t, _)| bad_row(&model, *t))
        {
            return Err(Error::Diverged {
                step,
                learning_rate: lr,
                detail,
            });
        }
        losses.push(loss / config.batch_size as f64);
        if (step + 1) % (config.steps / 10).max(1) == 0 {
            log::info!("step {}/{}: loss {:.5}", step + 1, config.steps, losses[step]);
        }
    }
    Ok(TrainOutcome { model, losses })
}

fn bad_row(model: &EmbeddingModel, target: Target) -> Option<String> {
    let (row, is_relation) = match target {
        Target::Entity(e) => (model.entity_row(e), false),
        Target::Relation(r) => (model.relation_row(r), true),
    };
    let what = || match target {
        Target::Entity(e) => format!("entity {e}"),
        Target::Relation(r) => format!("relation {r}"),
    };
    if row.iter().any(|x| !x.is_finite()) {
        return Some(format!("non-finite value in {}", what()));
    }
    if is_relation && model.kind() == ModelKind::QuatE && row.chunks_exact(4).any(|q| q.iter().all(|x| *x == 0.0)) {
        return Some(format!("zero quaternion in {}", what()));
    }
    None
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

struct Example {
    pos: Triple,
    negatives: Vec<(EntityId, EntityId)>,
}

#[derive(Clone, Copy)]
enum Target {
    Entity(EntityId),
    Relation(RelationId),
}

struct ExampleGrad {
    loss: f64,
    updates: Vec<(Target, Vec<f64>)>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(x)`, computed without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    (-x).max(0.0) + (-x.abs()).exp().ln_1p()
}

fn example_grad(model: &EmbeddingModel, ex: &Example, config: &TrainConfig) -> ExampleGrad {
    let spec = *model.spec();
    let gamma = spec.gamma;
    let r = ex.pos.relation;
    let rrow = model.relation_row(r);
    let ew = spec.entity_width();

    let neg_scores: Vec<f64> = ex.negatives.iter().map(|&(h, t)| model.score(h, r, t)).collect();
    let alpha = config.adversarial_temperature;
    let top = neg_scores.iter().fold(f64::NEG_INFINITY, |m, s| m.max(alpha * s));
    let exps: Vec<f64> = neg_scores.iter().map(|s| (alpha * s - top).exp()).collect();
    let z: f64 = exps.iter().sum();

    let mut updates = Vec::with_capacity(2 * ex.negatives.len() + 3);
    let mut grel = vec![0.0; spec.relation_width()];

    let pos_score = model.score(ex.pos.head, r, ex.pos.tail);
    let mut loss = neg_log_sigmoid(gamma + pos_score);
    let (mut gh, mut gt) = (vec![0.0; ew], vec![0.0; ew]);
    score_grad_rows(
        &spec,
        model.entity_row(ex.pos.head),
        rrow,
        model.entity_row(ex.pos.tail),
        -sigmoid(-(gamma + pos_score)),
        &mut gh,
        &mut grel,
        &mut gt,
    );
    updates.push((Target::Entity(ex.pos.head), gh));
    updates.push((Target::Entity(ex.pos.tail), gt));

    for (i, &(h, t)) in ex.negatives.iter().enumerate() {
        let w = exps[i] / z;
        let s = neg_scores[i];
        loss += w * neg_log_sigmoid(-s - gamma);
        let (mut gh, mut gt) = (vec![0.0; ew], vec![0.0; ew]);
        score_grad_rows(
            &spec,
            model.entity_row(h),
            rrow,
            model.entity_row(t),
            w * sigmoid(s + gamma),
            &mut gh,
            &mut grel,
            &mut gt,
        );
        updates.push((Target::Entity(h), gh));
        updates.push((Target::Entity(t), gt));
    }
    updates.push((Target::Relation(r), grel));
    ExampleGrad { loss, updates }
}
