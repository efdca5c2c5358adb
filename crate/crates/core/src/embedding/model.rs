use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::quaternion::Quaternion;
use crate::error::{Error, Result};
use crate::graph::{EntityId, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    TransE,
    RotatE,
    QuatE,
}

impl ModelKind {
    pub fn space(self) -> SpaceKind {
        match self {
            ModelKind::TransE => SpaceKind::Real,
            ModelKind::RotatE => SpaceKind::Complex,
            ModelKind::QuatE => SpaceKind::Quaternion,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ModelKind::TransE => 1,
            ModelKind::RotatE => 2,
            ModelKind::QuatE => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ModelKind::TransE),
            2 => Some(ModelKind::RotatE),
            3 => Some(ModelKind::QuatE),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::TransE => "transe",
            ModelKind::RotatE => "rotate",
            ModelKind::QuatE => "quate",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "rotate" => Ok(ModelKind::RotatE),
            "quate" => Ok(ModelKind::QuatE),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Real,
    Complex,
    Quaternion,
}

impl SpaceKind {
    /// Real components per coordinate.
    pub fn components(self) -> usize {
        match self {
            SpaceKind::Real => 1,
            SpaceKind::Complex => 2,
            SpaceKind::Quaternion => 4,
        }
    }

    pub(crate) fn code(self) -> u8 {
        self.components() as u8
    }
}

/// How TransE combines head and relation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransEOperator {
    /// `h + r - t`
    #[default]
    Translate,
    /// `h ⊙ r - t`, kept for auditing the product reading of the score.
    Elementwise,
}

impl fmt::Display for TransEOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransEOperator::Translate => "translate",
            TransEOperator::Elementwise => "elementwise",
        })
    }
}

impl FromStr for TransEOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translate" => Ok(TransEOperator::Translate),
            "elementwise" => Ok(TransEOperator::Elementwise),
            other => Err(Error::Config(format!("unknown TransE operator '{other}'"))),
        }
    }
}

impl TransEOperator {
    pub(crate) fn code(self) -> u8 {
        match self {
            TransEOperator::Translate => 0,
            TransEOperator::Elementwise => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TransEOperator::Translate),
            1 => Some(TransEOperator::Elementwise),
            _ => None,
        }
    }
}

/// Static description of a model: everything except the tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dim: usize,
    pub gamma: f64,
    /// Half-width of the uniform initialisation range.
    pub init_scale: f64,
    pub transe_op: TransEOperator,
}

impl ModelSpec {
    pub fn entity_width(&self) -> usize {
        self.dim * self.kind.space().components()
    }

    pub fn relation_width(&self) -> usize {
        match self.kind {
            ModelKind::TransE | ModelKind::RotatE => self.dim,
            ModelKind::QuatE => 4 * self.dim,
        }
    }
}

/// Entity and relation tables plus the score function they feed.
///
/// RotatE relation rows hold phases in `[0, 2π)`. QuatE relation rows hold
/// raw quaternions, normalised per coordinate when scoring, and no coordinate
/// may be the zero quaternion. Every stored value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    spec: ModelSpec,
    entities: Vec<f64>,
    relations: Vec<f64>,
    entity_labels: Vec<String>,
    relation_labels: Vec<String>,
}

impl EmbeddingModel {
    /// Random initialisation: components uniform in `[-init_scale, init_scale]`,
    /// RotatE phases uniform in `[0, 2π)`.
    pub fn initialize<R: Rng + ?Sized>(
        spec: ModelSpec,
        entity_labels: Vec<String>,
        relation_labels: Vec<String>,
        rng: &mut R,
    ) -> Result<Self> {
        validate_spec(&spec)?;
        let s = spec.init_scale;
        let entities = (0..entity_labels.len() * spec.entity_width())
            .map(|_| rng.gen_range(-s..=s))
            .collect();
        let relations = (0..relation_labels.len() * spec.relation_width())
            .map(|_| match spec.kind {
                ModelKind::RotatE => rng.gen_range(0.0..TAU),
                _ => rng.gen_range(-s..=s),
            })
            .collect();
        let model = Self {
            spec,
            entities,
            relations,
            entity_labels,
            relation_labels,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn from_parts(
        spec: ModelSpec,
        entities: Vec<f64>,
        relations: Vec<f64>,
        entity_labels: Vec<String>,
        relation_labels: Vec<String>,
    ) -> Result<Self> {
        validate_spec(&spec)?;
        if entities.len() != entity_labels.len() * spec.entity_width() {
            return Err(Error::Config("entity table size does not match labels and dim".into()));
        }
        if relations.len() != relation_labels.len() * spec.relation_width() {
            return Err(Error::Config(
                "relation table size does not match labels and dim".into(),
            ));
        }
        let model = Self {
            spec,
            entities,
            relations,
            entity_labels,
            relation_labels,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the table invariants.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.entities.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!("non-finite entity component at flat index {i}")));
        }
        if let Some(i) = self.relations.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite relation component at flat index {i}"
            )));
        }
        match self.spec.kind {
            ModelKind::RotatE => {
                if let Some(i) = self.relations.iter().position(|x| !(0.0..TAU).contains(x)) {
                    return Err(Error::Numeric(format!("phase outside [0, 2π) at flat index {i}")));
                }
            }
            ModelKind::QuatE => {
                if let Some(i) = self.relations.chunks_exact(4).position(|q| q.iter().all(|x| *x == 0.0)) {
                    return Err(Error::Numeric(format!(
                        "zero relation quaternion at coordinate {} of relation {}",
                        i % self.spec.dim,
                        i / self.spec.dim
                    )));
                }
            }
            ModelKind::TransE => {}
        }
        Ok(())
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn num_entities(&self) -> usize {
        self.entity_labels.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relation_labels.len()
    }

    pub fn entity_labels(&self) -> &[String] {
        &self.entity_labels
    }

    pub fn relation_labels(&self) -> &[String] {
        &self.relation_labels
    }

    pub fn entity_table(&self) -> &[f64] {
        &self.entities
    }

    pub fn relation_table(&self) -> &[f64] {
        &self.relations
    }

    pub fn entity_row(&self, e: EntityId) -> &[f64] {
        let w = self.spec.entity_width();
        &self.entities[e.index() * w..(e.index() + 1) * w]
    }

    pub fn relation_row(&self, r: RelationId) -> &[f64] {
        let w = self.spec.relation_width();
        &self.relations[r.index() * w..(r.index() + 1) * w]
    }

    pub(crate) fn entity_row_mut(&mut self, e: EntityId) -> &mut [f64] {
        let w = self.spec.entity_width();
        &mut self.entities[e.index() * w..(e.index() + 1) * w]
    }

    pub(crate) fn relation_row_mut(&mut self, r: RelationId) -> &mut [f64] {
        let w = self.spec.relation_width();
        &mut self.relations[r.index() * w..(r.index() + 1) * w]
    }

    /// `f_r(h, t) = -‖residual‖₂`; always `<= 0`.
    pub fn score(&self, head: EntityId, relation: RelationId, tail: EntityId) -> f64 {
        score_rows(
            &self.spec,
            self.entity_row(head),
            self.relation_row(relation),
            self.entity_row(tail),
        )
    }

    /// `exp(score)`, in `(0, 1]` up to underflow.
    pub fn likelihood(&self, head: EntityId, relation: RelationId, tail: EntityId) -> f64 {
        self.score(head, relation, tail).exp()
    }
}

fn validate_spec(spec: &ModelSpec) -> Result<()> {
    if spec.dim == 0 {
        return Err(Error::Config("embedding dim must be at least 1".into()));
    }
    if !(spec.gamma.is_finite() && spec.init_scale.is_finite() && spec.init_scale > 0.0) {
        return Err(Error::Config(
            "gamma and init scale must be finite, init scale positive".into(),
        ));
    }
    Ok(())
}

/// Writes the residual vector whose norm is the negated score.
pub fn residual(spec: &ModelSpec, h: &[f64], r: &[f64], t: &[f64], out: &mut [f64]) {
    match spec.kind {
        ModelKind::TransE => match spec.transe_op {
            TransEOperator::Translate => {
                for i in 0..out.len() {
                    out[i] = h[i] + r[i] - t[i];
                }
            }
            TransEOperator::Elementwise => {
                for i in 0..out.len() {
                    out[i] = h[i] * r[i] - t[i];
                }
            }
        },
        ModelKind::RotatE => {
            for j in 0..spec.dim {
                let (c, s) = (r[j].cos(), r[j].sin());
                let (a, b) = (h[2 * j], h[2 * j + 1]);
                out[2 * j] = a * c - b * s - t[2 * j];
                out[2 * j + 1] = a * s + b * c - t[2 * j + 1];
            }
        }
        ModelKind::QuatE => {
            for j in 0..spec.dim {
                let q = Quaternion::from_slice(&r[4 * j..4 * j + 4]);
                let u = q.scale(1.0 / q.norm());
                let v = Quaternion::from_slice(&h[4 * j..4 * j + 4]) * u - Quaternion::from_slice(&t[4 * j..4 * j + 4]);
                out[4 * j..4 * j + 4].copy_from_slice(&v.0);
            }
        }
    }
}

pub fn score_rows(spec: &ModelSpec, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    let mut v = vec![0.0; spec.entity_width()];
    residual(spec, h, r, t, &mut v);
    -norm(&v)
}

/// Score plus its gradient with respect to the three rows. Gradients are
/// accumulated (`+=`) into `gh`, `gr`, `gt`, scaled by `upstream`.
///
/// At a zero residual the subgradient 0 is used.
#[allow(clippy::too_many_arguments)]
pub fn score_grad_rows(
    spec: &ModelSpec,
    h: &[f64],
    r: &[f64],
    t: &[f64],
    upstream: f64,
    gh: &mut [f64],
    gr: &mut [f64],
    gt: &mut [f64],
) -> f64 {
    let mut v = vec![0.0; spec.entity_width()];
    residual(spec, h, r, t, &mut v);
    let n = norm(&v);
    if n == 0.0 {
        return 0.0;
    }
    // d(-‖v‖)/dv
    let k = -upstream / n;
    let g: Vec<f64> = v.iter().map(|x| k * x).collect();

    match spec.kind {
        ModelKind::TransE => match spec.transe_op {
            TransEOperator::Translate => {
                for i in 0..g.len() {
                    gh[i] += g[i];
                    gr[i] += g[i];
                    gt[i] -= g[i];
                }
            }
            TransEOperator::Elementwise => {
                for i in 0..g.len() {
                    gh[i] += g[i] * r[i];
                    gr[i] += g[i] * h[i];
                    gt[i] -= g[i];
                }
            }
        },
        ModelKind::RotatE => {
            for j in 0..spec.dim {
                let (c, s) = (r[j].cos(), r[j].sin());
                let (a, b) = (h[2 * j], h[2 * j + 1]);
                let (g0, g1) = (g[2 * j], g[2 * j + 1]);
                gh[2 * j] += g0 * c + g1 * s;
                gh[2 * j + 1] += -g0 * s + g1 * c;
                gr[j] += g0 * (-a * s - b * c) + g1 * (a * c - b * s);
                gt[2 * j] -= g0;
                gt[2 * j + 1] -= g1;
            }
        }
        ModelKind::QuatE => {
            for j in 0..spec.dim {
                let span = 4 * j..4 * j + 4;
                let q = Quaternion::from_slice(&r[span.clone()]);
                let qn = q.norm();
                let u = q.scale(1.0 / qn);
                let hq = Quaternion::from_slice(&h[span.clone()]);
                let gq = Quaternion::from_slice(&g[span.clone()]);
                // p = h ⊗ u: dp/dh is right-multiplication by u, dp/du is left-multiplication by h
                let d_h = gq * u.conj();
                let d_u = hq.conj() * gq;
                // through u = q / |q|
                let d_q = (d_u - u.scale(u.dot(d_u))).scale(1.0 / qn);
                for c in 0..4 {
                    gh[4 * j + c] += d_h.0[c];
                    gr[4 * j + c] += d_q.0[c];
                    gt[4 * j + c] -= gq.0[c];
                }
            }
        }
    }
    -n
}

#[inline]
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(kind: ModelKind, dim: usize) -> ModelSpec {
        ModelSpec {
            kind,
            dim,
            gamma: 6.0,
            init_scale: 0.5,
            transe_op: TransEOperator::Translate,
        }
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn transe_zero_vectors_score_zero() {
        let m = EmbeddingModel::from_parts(
            spec(ModelKind::TransE, 3),
            vec![0.0; 3],
            vec![0.0; 3],
            labels(1),
            labels(1),
        )
        .unwrap();
        assert_eq!(m.score(EntityId(0), RelationId(0), EntityId(0)), 0.0);
        assert_eq!(m.likelihood(EntityId(0), RelationId(0), EntityId(0)), 1.0);
    }

    #[test]
    fn rotate_identity_rotation() {
        let e = vec![0.3, -1.2, 0.7, 0.1];
        let m = EmbeddingModel::from_parts(spec(ModelKind::RotatE, 2), e, vec![0.0; 2], labels(1), labels(1)).unwrap();
        assert_eq!(m.score(EntityId(0), RelationId(0), EntityId(0)), 0.0);
    }

    #[test]
    fn quate_hand_computed_product() {
        // h = 1, r = 2i -> i after normalising, h ⊗ i = i = t
        let ents = vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let m = EmbeddingModel::from_parts(
            spec(ModelKind::QuatE, 1),
            ents,
            vec![0.0, 2.0, 0.0, 0.0],
            labels(2),
            labels(1),
        )
        .unwrap();
        assert_eq!(m.score(EntityId(0), RelationId(0), EntityId(1)), 0.0);
    }

    #[test]
    fn quate_zero_relation_is_rejected() {
        let err = EmbeddingModel::from_parts(
            spec(ModelKind::QuatE, 1),
            vec![0.0; 4],
            vec![0.0; 4],
            labels(1),
            labels(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn bad_shapes_and_values_are_rejected() {
        assert!(EmbeddingModel::from_parts(
            spec(ModelKind::TransE, 2),
            vec![0.0; 3],
            vec![0.0; 2],
            labels(1),
            labels(1)
        )
        .is_err());
        assert!(EmbeddingModel::from_parts(
            spec(ModelKind::TransE, 1),
            vec![f64::NAN],
            vec![0.0],
            labels(1),
            labels(1)
        )
        .is_err());
        assert!(EmbeddingModel::from_parts(
            spec(ModelKind::RotatE, 1),
            vec![0.0; 2],
            vec![7.0],
            labels(1),
            labels(1)
        )
        .is_err());
        assert!(EmbeddingModel::from_parts(spec(ModelKind::TransE, 0), vec![], vec![], labels(1), labels(1)).is_err());
    }

    #[test]
    fn likelihood_is_monotone_in_score() {
        assert!((-1.0f64).exp() > (-2.0f64).exp());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = EmbeddingModel::initialize(spec(ModelKind::RotatE, 4), labels(5), labels(2), &mut rng).unwrap();
        let mut pairs = Vec::new();
        for h in 0..5 {
            for t in 0..5 {
                let (s, l) = (
                    m.score(EntityId(h), RelationId(1), EntityId(t)),
                    m.likelihood(EntityId(h), RelationId(1), EntityId(t)),
                );
                assert!(s <= 0.0 && l > 0.0 && l <= 1.0);
                pairs.push((s, l));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn elementwise_transe_differs_from_translation() {
        let mut s = spec(ModelKind::TransE, 2);
        let m1 = EmbeddingModel::from_parts(s, vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 2.0], labels(2), labels(1)).unwrap();
        s.transe_op = TransEOperator::Elementwise;
        let m2 = EmbeddingModel::from_parts(s, vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 2.0], labels(2), labels(1)).unwrap();
        // (1,2)+(2,2)-(3,4) = 0 vs (1,2)*(2,2)-(3,4) = (-1,0)
        assert_eq!(m1.score(EntityId(0), RelationId(0), EntityId(1)), 0.0);
        assert_eq!(m2.score(EntityId(0), RelationId(0), EntityId(1)), -1.0);
    }

    fn check_gradients(s: ModelSpec, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ew = s.entity_width();
        let rw = s.relation_width();
        let h: Vec<f64> = (0..ew).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t: Vec<f64> = (0..ew).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r: Vec<f64> = (0..rw).map(|_| rng.gen_range(0.1..1.5)).collect();
        let (mut gh, mut gr, mut gt) = (vec![0.0; ew], vec![0.0; rw], vec![0.0; ew]);
        score_grad_rows(&s, &h, &r, &t, 1.0, &mut gh, &mut gr, &mut gt);

        let step = 1e-5;
        let fd = |which: usize, i: usize| {
            let mut rows = [h.clone(), r.clone(), t.clone()];
            rows[which][i] += step;
            let up = score_rows(&s, &rows[0], &rows[1], &rows[2]);
            rows[which][i] -= 2.0 * step;
            let down = score_rows(&s, &rows[0], &rows[1], &rows[2]);
            (up - down) / (2.0 * step)
        };
        for (which, grad) in [(0, &gh), (1, &gr), (2, &gt)] {
            for (i, g) in grad.iter().enumerate() {
                let num = fd(which, i);
                assert!((g - num).abs() < 1e-6, "{:?} row {which} idx {i}: {g} vs {num}", s.kind);
            }
        }
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for kind in [ModelKind::TransE, ModelKind::RotatE, ModelKind::QuatE] {
            for seed in 0..5 {
                check_gradients(spec(kind, 3), seed);
            }
        }
        let mut s = spec(ModelKind::TransE, 3);
        s.transe_op = TransEOperator::Elementwise;
        check_gradients(s, 9);
    }
}
