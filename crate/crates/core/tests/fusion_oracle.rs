mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relpred::embedding::{EmbeddingModel, ModelKind, ModelSpec, TransEOperator};
use relpred::eval::{evaluate, Scorer};
use relpred::prior::{PriorConfig, PriorModel};
use relpred::{RelationId, Split};

#[test]
fn fused_probability_space_oracle() {
    // exp(f) * prior ranked directly must agree with the log-space ranking
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let kg = common::random_kg(&mut rng, 12, 5, 6);
        let (g, c) = kg.to_lib();
        let spec = ModelSpec {
            kind: ModelKind::TransE,
            dim: 3,
            gamma: 6.0,
            init_scale: 0.5,
            transe_op: TransEOperator::Translate,
        };
        let model = EmbeddingModel::initialize(spec, g.entities().labels(), g.relations().labels(), &mut rng).unwrap();
        let prior = PriorModel::build(&g, &c, PriorConfig::default());
        let report = evaluate(&g, &Scorer::fused(&prior, &model), Split::Test).unwrap();
        let profiles = common::profiles(&kg, 0.0, false);
        for ((h, r, t), rec) in kg.split_triples(Split::Test).iter().zip(&report.records) {
            let cands = common::filtered_candidates(&kg, h, t, r);
            let p = common::prior(&kg, &profiles, h, t, &cands, "both");
            let (he, te) = (g.entity_id(h).unwrap(), g.entity_id(t).unwrap());
            let ids: Vec<RelationId> = cands.iter().map(|x| g.relation_id(x).unwrap()).collect();
            let lls: Vec<f64> = ids.iter().map(|id| model.score(he, *id, te)).collect();
            let joint: Vec<f64> = ids
                .iter()
                .zip(&p)
                .map(|(id, pr)| model.score(he, *id, te).exp() * pr)
                .collect();
            let gold = cands.iter().position(|x| x == r).unwrap();
            let order: Vec<usize> = ids.iter().map(|id| id.index()).collect();
            assert_eq!(
                rec.rank,
                common::rank_with_tiebreak(&joint, &lls, &order, gold, 1e-15),
                "{h} {r} {t}"
            );
        }
    }
}
