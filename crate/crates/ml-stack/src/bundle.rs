//! On-disk model bundle: one directory holding everything inference
//! needs, hashed and versioned so a stale or corrupted bundle refuses to
//! load instead of silently mispredicting.
//!
//! Layout:
//!
//! ```text
//! bundle/
//!   manifest.json     format, version, per-file sha256, model kinds,
//!                     transformer config
//!   vocab.json        token vocabulary
//!   normalizer.json   feature means/stds and encoded layout flags
//!   transformer.bin   flat f64 weight vector
//!   candidate.bin     winning tabular model
//!   meta.bin          fusion model
//! ```
//!
//! Every number in the `.bin` files is little-endian. Trees are stored as
//! their node arrays: `i64 feature` (-1 marks a leaf), `f64 threshold`,
//! `u64 left`, `u64 right`, `f64 leaf_value`. Nothing in a bundle depends
//! on wall-clock time, so retraining with the same seed reproduces the
//! directory byte for byte.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::candidates::{Boost, CandidateKind, CandidateModel, Forest};
use crate::linear::LinearModel;
use crate::meta::{MetaKind, MetaModel};
use crate::transformer::{TransformerConfig, TransformerModel};
use crate::tree::{Node, Tree};
use crate::vocab::TokenVocabulary;
use crate::MlError;
use contract_features::NormalizerStats;

pub const BUNDLE_FORMAT: &str = "deploywatch-model-bundle";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub vocab: TokenVocabulary,
    pub normalizer: NormalizerStats,
    pub transformer: TransformerModel,
    pub candidate: CandidateModel,
    pub meta: MetaModel,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct FileEntry {
    file: String,
    sha256: String,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct TransformerEntry {
    #[serde(flatten)]
    file: FileEntry,
    config: TransformerConfig,
    vocab_size: usize,
    vocab_hash: String,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct ModelEntry {
    #[serde(flatten)]
    file: FileEntry,
    kind: String,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    vocab: FileEntry,
    normalizer: FileEntry,
    transformer: TransformerEntry,
    candidate: ModelEntry,
    meta: ModelEntry,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

// ---- little-endian codec -------------------------------------------------

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_i64(buf: &mut Vec<u8>, v: i64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct ByteReader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> ByteReader<'a> {
    fn new(buf: &'a [u8]) -> ByteReader<'a> {
        ByteReader { buf, at: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], MlError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(MlError::Integrity("weight file is truncated".into()));
        };
        let slice = &self.buf[self.at..end];
        self.at = end;
        Ok(slice)
    }

    fn u64(&mut self) -> Result<u64, MlError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64, MlError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, MlError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize, MlError> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| MlError::Integrity(format!("count {v} overflows usize")))
    }

    fn finish(self) -> Result<(), MlError> {
        if self.at == self.buf.len() {
            Ok(())
        } else {
            Err(MlError::Integrity(format!(
                "{} trailing bytes after the last field",
                self.buf.len() - self.at
            )))
        }
    }
}

fn write_tree(buf: &mut Vec<u8>, tree: &Tree) {
    put_u64(buf, tree.n_features() as u64);
    put_u64(buf, tree.nodes().len() as u64);
    for node in tree.nodes() {
        match *node {
            Node::Leaf { value } => {
                put_i64(buf, -1);
                put_f64(buf, 0.0);
                put_u64(buf, 0);
                put_u64(buf, 0);
                put_f64(buf, value);
            }
            Node::Split { feature, threshold, left, right } => {
                put_i64(buf, feature as i64);
                put_f64(buf, threshold);
                put_u64(buf, left as u64);
                put_u64(buf, right as u64);
                put_f64(buf, 0.0);
            }
        }
    }
}

fn read_tree(r: &mut ByteReader<'_>) -> Result<Tree, MlError> {
    let n_features = r.usize()?;
    let n_nodes = r.usize()?;
    let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
    for _ in 0..n_nodes {
        let feature = r.i64()?;
        let threshold = r.f64()?;
        let left = r.usize()?;
        let right = r.usize()?;
        let value = r.f64()?;
        nodes.push(if feature < 0 {
            Node::Leaf { value }
        } else {
            Node::Split { feature: feature as usize, threshold, left, right }
        });
    }
    Tree::from_nodes(nodes, n_features)
}

fn write_linear(buf: &mut Vec<u8>, m: &LinearModel) {
    put_u64(buf, m.weights.len() as u64);
    for w in &m.weights {
        put_f64(buf, *w);
    }
    put_f64(buf, m.bias);
}

fn read_linear(r: &mut ByteReader<'_>) -> Result<LinearModel, MlError> {
    let n = r.usize()?;
    let mut weights = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        weights.push(r.f64()?);
    }
    Ok(LinearModel { weights, bias: r.f64()? })
}

fn candidate_bytes(model: &CandidateModel) -> Vec<u8> {
    let mut buf = Vec::new();
    match model {
        CandidateModel::LogisticRegression(m) => write_linear(&mut buf, m),
        CandidateModel::DecisionTree(t) => write_tree(&mut buf, t),
        CandidateModel::RandomForest(f) => {
            put_u64(&mut buf, f.trees.len() as u64);
            for t in &f.trees {
                write_tree(&mut buf, t);
            }
        }
        CandidateModel::GradientBoosting(b) => {
            put_f64(&mut buf, b.init_logit);
            put_f64(&mut buf, b.shrinkage);
            put_u64(&mut buf, b.trees.len() as u64);
            for t in &b.trees {
                write_tree(&mut buf, t);
            }
        }
    }
    buf
}

fn candidate_from_bytes(kind: CandidateKind, bytes: &[u8]) -> Result<CandidateModel, MlError> {
    let mut r = ByteReader::new(bytes);
    let model = match kind {
        CandidateKind::LogisticRegression => {
            CandidateModel::LogisticRegression(read_linear(&mut r)?)
        }
        CandidateKind::DecisionTree => CandidateModel::DecisionTree(read_tree(&mut r)?),
        CandidateKind::RandomForest => {
            let n = r.usize()?;
            if n == 0 {
                return Err(MlError::Integrity("forest with zero trees".into()));
            }
            let mut trees = Vec::with_capacity(n.min(1 << 16));
            for _ in 0..n {
                trees.push(read_tree(&mut r)?);
            }
            CandidateModel::RandomForest(Forest { trees })
        }
        CandidateKind::GradientBoosting => {
            let init_logit = r.f64()?;
            let shrinkage = r.f64()?;
            let n = r.usize()?;
            if n == 0 {
                return Err(MlError::Integrity("boosting ensemble with zero trees".into()));
            }
            let mut trees = Vec::with_capacity(n.min(1 << 16));
            for _ in 0..n {
                trees.push(read_tree(&mut r)?);
            }
            CandidateModel::GradientBoosting(Boost { init_logit, shrinkage, trees })
        }
    };
    r.finish()?;
    Ok(model)
}

fn meta_bytes(model: &MetaModel) -> Vec<u8> {
    let mut buf = Vec::new();
    match model {
        MetaModel::NearestNeighbors { k, points } => {
            put_u64(&mut buf, *k as u64);
            put_u64(&mut buf, points.len() as u64);
            for (a, b, label) in points {
                put_f64(&mut buf, *a);
                put_f64(&mut buf, *b);
                put_u64(&mut buf, u64::from(*label));
            }
        }
        MetaModel::LogisticRegression(m) | MetaModel::LinearSvm(m) => write_linear(&mut buf, m),
        MetaModel::DecisionTree(t) => write_tree(&mut buf, t),
    }
    buf
}

fn meta_from_bytes(kind: MetaKind, bytes: &[u8]) -> Result<MetaModel, MlError> {
    let mut r = ByteReader::new(bytes);
    let model = match kind {
        MetaKind::NearestNeighbors => {
            let k = r.usize()?;
            let n = r.usize()?;
            if k == 0 || k > n {
                return Err(MlError::Integrity(format!("k = {k} with {n} stored points")));
            }
            let mut points = Vec::with_capacity(n.min(1 << 20));
            for _ in 0..n {
                let a = r.f64()?;
                let b = r.f64()?;
                let label = r.u64()?;
                if label > 1 {
                    return Err(MlError::Integrity(format!("stored label {label}")));
                }
                points.push((a, b, label as u8));
            }
            MetaModel::NearestNeighbors { k, points }
        }
        MetaKind::LogisticRegression => MetaModel::LogisticRegression(read_linear(&mut r)?),
        MetaKind::LinearSvm => MetaModel::LinearSvm(read_linear(&mut r)?),
        MetaKind::DecisionTree => MetaModel::DecisionTree(read_tree(&mut r)?),
    };
    r.finish()?;
    Ok(model)
}

fn transformer_bytes(model: &TransformerModel) -> Vec<u8> {
    let flat = model.param_vector();
    let mut buf = Vec::with_capacity(8 + flat.len() * 8);
    put_u64(&mut buf, flat.len() as u64);
    for v in &flat {
        put_f64(&mut buf, *v);
    }
    buf
}

fn transformer_weights(bytes: &[u8]) -> Result<Vec<f64>, MlError> {
    let mut r = ByteReader::new(bytes);
    let n = r.usize()?;
    let mut flat = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        flat.push(r.f64()?);
    }
    r.finish()?;
    Ok(flat)
}

// ---- save / load ----------------------------------------------------------

fn json_err(e: serde_json::Error) -> MlError {
    MlError::Serde(e.to_string())
}

pub fn save_bundle(dir: impl AsRef<Path>, bundle: &ModelBundle) -> Result<(), MlError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let vocab_json = serde_json::to_vec_pretty(&bundle.vocab).map_err(json_err)?;
    let normalizer_json = serde_json::to_vec_pretty(&bundle.normalizer).map_err(json_err)?;
    let transformer_bin = transformer_bytes(&bundle.transformer);
    let candidate_bin = candidate_bytes(&bundle.candidate);
    let meta_bin = meta_bytes(&bundle.meta);

    let manifest = Manifest {
        format: BUNDLE_FORMAT.into(),
        version: BUNDLE_VERSION,
        vocab: FileEntry { file: "vocab.json".into(), sha256: digest(&vocab_json) },
        normalizer: FileEntry {
            file: "normalizer.json".into(),
            sha256: digest(&normalizer_json),
        },
        transformer: TransformerEntry {
            file: FileEntry { file: "transformer.bin".into(), sha256: digest(&transformer_bin) },
            config: bundle.transformer.config().clone(),
            vocab_size: bundle.transformer.vocab_size(),
            vocab_hash: bundle.transformer.vocab_hash().to_string(),
        },
        candidate: ModelEntry {
            file: FileEntry { file: "candidate.bin".into(), sha256: digest(&candidate_bin) },
            kind: bundle.candidate.kind().as_str().into(),
        },
        meta: ModelEntry {
            file: FileEntry { file: "meta.bin".into(), sha256: digest(&meta_bin) },
            kind: bundle.meta.kind().as_str().into(),
        },
    };

    std::fs::write(dir.join("vocab.json"), vocab_json)?;
    std::fs::write(dir.join("normalizer.json"), normalizer_json)?;
    std::fs::write(dir.join("transformer.bin"), transformer_bin)?;
    std::fs::write(dir.join("candidate.bin"), candidate_bin)?;
    std::fs::write(dir.join("meta.bin"), meta_bin)?;
    let mut manifest_json = serde_json::to_vec_pretty(&manifest).map_err(json_err)?;
    manifest_json.push(b'\n');
    std::fs::write(dir.join("manifest.json"), manifest_json)?;
    Ok(())
}

fn read_verified(dir: &Path, entry: &FileEntry) -> Result<Vec<u8>, MlError> {
    let bytes = std::fs::read(dir.join(&entry.file))?;
    let found = digest(&bytes);
    if found != entry.sha256 {
        return Err(MlError::Integrity(format!(
            "{}: checksum {} does not match the manifest",
            entry.file, found
        )));
    }
    Ok(bytes)
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<ModelBundle, MlError> {
    let dir = dir.as_ref();
    let manifest: Manifest =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?).map_err(json_err)?;
    if manifest.format != BUNDLE_FORMAT || manifest.version != BUNDLE_VERSION {
        return Err(MlError::VersionMismatch {
            found: format!("{} v{}", manifest.format, manifest.version),
            expected: format!("{BUNDLE_FORMAT} v{BUNDLE_VERSION}"),
        });
    }

    let vocab: TokenVocabulary =
        serde_json::from_slice(&read_verified(dir, &manifest.vocab)?).map_err(json_err)?;
    let normalizer: NormalizerStats =
        serde_json::from_slice(&read_verified(dir, &manifest.normalizer)?).map_err(json_err)?;

    let weights = transformer_weights(&read_verified(dir, &manifest.transformer.file)?)?;
    let transformer = TransformerModel::from_parts(
        manifest.transformer.config,
        manifest.transformer.vocab_size,
        manifest.transformer.vocab_hash,
        &weights,
    )?;

    let candidate_kind = CandidateKind::parse(&manifest.candidate.kind).ok_or_else(|| {
        MlError::Integrity(format!("unknown candidate kind {:?}", manifest.candidate.kind))
    })?;
    let candidate =
        candidate_from_bytes(candidate_kind, &read_verified(dir, &manifest.candidate.file)?)?;

    let meta_kind = MetaKind::parse(&manifest.meta.kind)
        .ok_or_else(|| MlError::Integrity(format!("unknown meta kind {:?}", manifest.meta.kind)))?;
    let meta = meta_from_bytes(meta_kind, &read_verified(dir, &manifest.meta.file)?)?;

    Ok(ModelBundle { vocab, normalizer, transformer, candidate, meta })
}

/// One hash over the manifest and every file it names, in manifest order.
/// Two bundles with the same content hash make identical predictions.
pub fn bundle_hash(dir: impl AsRef<Path>) -> Result<String, MlError> {
    let dir = dir.as_ref();
    let manifest_bytes = std::fs::read(dir.join("manifest.json"))?;
    let manifest: Manifest = serde_json::from_slice(&manifest_bytes).map_err(json_err)?;
    let mut hasher = Sha256::new();
    hasher.update(&manifest_bytes);
    for entry in [
        &manifest.vocab,
        &manifest.normalizer,
        &manifest.transformer.file,
        &manifest.candidate.file,
        &manifest.meta.file,
    ] {
        hasher.update(std::fs::read(dir.join(&entry.file))?);
    }
    Ok(hex::encode(hasher.finalize()))
}
