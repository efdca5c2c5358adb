//! Binary checkpoint container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes  "RPKGEMB\0"
//! version      u32
//! model_kind   u8       1 TransE, 2 RotatE, 3 QuatE
//! space_kind   u8       real components per coordinate (1, 2 or 4)
//! transe_op    u8       0 translate, 1 elementwise
//! reserved     u8       0
//! dim          u64
//! n_entities   u64
//! n_relations  u64
//! gamma        f64
//! init_scale   f64
//! entity table     n_entities  * entity_width  f64, row-major
//! relation table   n_relations * relation_width f64, row-major
//! entity labels    n_entities  * (u64 byte length, UTF-8 bytes)
//! relation labels  n_relations * (u64 byte length, UTF-8 bytes)
//! ```
//!
//! Nothing may follow the relation labels.

use std::path::Path;

use crate::embedding::model::{EmbeddingModel, ModelKind, ModelSpec, TransEOperator};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RPKGEMB\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode(model: &EmbeddingModel) -> Vec<u8> {
    let spec = model.spec();
    let mut out = Vec::with_capacity(64 + 8 * (model.entity_table().len() + model.relation_table().len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(spec.kind.code());
    out.push(spec.kind.space().code());
    out.push(spec.transe_op.code());
    out.push(0);
    for n in [spec.dim, model.num_entities(), model.num_relations()] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    out.extend_from_slice(&spec.gamma.to_le_bytes());
    out.extend_from_slice(&spec.init_scale.to_le_bytes());
    for x in model.entity_table().iter().chain(model.relation_table()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for label in model.entity_labels().iter().chain(model.relation_labels()) {
        out.extend_from_slice(&(label.len() as u64).to_le_bytes());
        out.extend_from_slice(label.as_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<EmbeddingModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version == 0 || version > FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let kind = ModelKind::from_code(r.u8()?).ok_or_else(|| Error::Checkpoint("unknown model kind".into()))?;
    let space = r.u8()?;
    if space != kind.space().code() {
        return Err(Error::Checkpoint(format!(
            "space code {space} does not match model {kind}"
        )));
    }
    let transe_op =
        TransEOperator::from_code(r.u8()?).ok_or_else(|| Error::Checkpoint("unknown TransE operator".into()))?;
    if r.u8()? != 0 {
        return Err(Error::Checkpoint("reserved header byte is not zero".into()));
    }
    let dim = r.len()?;
    let n_entities = r.len()?;
    let n_relations = r.len()?;
    let gamma = r.f64()?;
    let init_scale = r.f64()?;
    let spec = ModelSpec {
        kind,
        dim,
        gamma,
        init_scale,
        transe_op,
    };

    let floats = |n: usize, w: usize| {
        n.checked_mul(w)
            .ok_or_else(|| Error::Checkpoint("table size overflows".into()))
    };
    let n_ent_floats = floats(n_entities, spec.entity_width())?;
    let n_rel_floats = floats(n_relations, spec.relation_width())?;
    let entities = r.f64s(n_ent_floats)?;
    let relations = r.f64s(n_rel_floats)?;
    let entity_labels = r.strings(n_entities)?;
    let relation_labels = r.strings(n_relations)?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    EmbeddingModel::from_parts(spec, entities, relations, entity_labels, relation_labels)
        .map_err(|e| Error::Checkpoint(format!("invalid model: {e}")))
}

pub fn save_checkpoint(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|end| *end <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length does not fit in memory".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("table size overflows".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn strings(&mut self, n: usize) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for _ in 0..n {
            let len = self.len()?;
            let raw = self.take(len)?;
            out.push(
                String::from_utf8(raw.to_vec()).map_err(|_| Error::Checkpoint("label is not valid UTF-8".into()))?,
            );
        }
        Ok(out)
    }
}
