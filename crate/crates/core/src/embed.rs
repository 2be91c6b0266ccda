//! Embedding bundles: per-layer subtoken hidden states with byte offsets.
//!
//! On disk a bundle is a directory holding `manifest.json` and one file per
//! layer, `layer_00.bin` to `layer_LL.bin`. Each layer file concatenates, in
//! manifest record order, row-major little-endian `f32` matrices of shape
//! `m x hidden_size`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::snippet_seed;
use crate::error::{Error, Result};
use crate::taskgen::{FeatureMode, Label, ProbingExample, Task, Variant};

pub const MAX_SUBTOKENS: usize = 512;
pub const DTYPE: &str = "f32le";
pub const MANIFEST: &str = "manifest.json";

/// Byte range of one subtoken; `[-1, -1]` marks special tokens.
pub type Offset = [i64; 2];
pub const SPECIAL: Offset = [-1, -1];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub snippet_id: String,
    pub variant_id: String,
    pub m: usize,
    pub offsets: Vec<Offset>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub model_name: String,
    /// Number of transformer blocks; layer 0 is the embedding output.
    pub num_layers: usize,
    pub hidden_size: usize,
    pub dtype: String,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone)]
enum Storage {
    Files(PathBuf),
    /// Standard normal values derived from the seed on demand.
    Mock {
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct EmbeddingBundle {
    manifest: Manifest,
    /// First row of each record; one extra entry holds the total.
    row_start: Vec<usize>,
    index: HashMap<(String, String), usize>,
    storage: Storage,
    digest: String,
}

pub fn layer_file(layer: usize) -> String {
    format!("layer_{layer:02}.bin")
}

fn is_special(o: &Offset) -> bool {
    *o == SPECIAL
}

fn validate_manifest(m: &Manifest) -> Result<()> {
    let bad = |msg: String| Err(Error::Bundle(msg));
    if m.dtype != DTYPE {
        return bad(format!("unsupported dtype {:?}", m.dtype));
    }
    if m.hidden_size == 0 {
        return bad("hidden_size is 0".into());
    }
    let mut seen = HashMap::new();
    for (i, r) in m.records.iter().enumerate() {
        let name = format!("record {i} ({}, {})", r.snippet_id, r.variant_id);
        if seen.insert((&r.snippet_id, &r.variant_id), i).is_some() {
            return bad(format!("{name} is duplicated"));
        }
        if r.m != r.offsets.len() {
            return bad(format!(
                "{name}: m = {} but {} offsets",
                r.m,
                r.offsets.len()
            ));
        }
        if r.m > MAX_SUBTOKENS {
            return bad(format!("{name}: m = {} exceeds {MAX_SUBTOKENS}", r.m));
        }
        let mut prev_end = 0;
        for (j, o) in r.offsets.iter().enumerate() {
            if is_special(o) {
                continue;
            }
            let [s, e] = *o;
            if s < 0 || e < 0 {
                return bad(format!(
                    "{name}: offset {j} {o:?} is negative but not special"
                ));
            }
            if s > e {
                return bad(format!("{name}: offset {j} has start {s} > end {e}"));
            }
            if s < prev_end {
                return bad(format!(
                    "{name}: offset {j} {o:?} overlaps or precedes the previous subtoken"
                ));
            }
            prev_end = e;
        }
    }
    Ok(())
}

impl EmbeddingBundle {
    fn new(manifest: Manifest, storage: Storage, digest: String) -> Result<Self> {
        validate_manifest(&manifest)?;
        let mut row_start = Vec::with_capacity(manifest.records.len() + 1);
        let mut total = 0;
        for r in &manifest.records {
            row_start.push(total);
            total += r.m;
        }
        row_start.push(total);
        let index = manifest
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| ((r.snippet_id.clone(), r.variant_id.clone()), i))
            .collect();
        Ok(EmbeddingBundle {
            manifest,
            row_start,
            index,
            storage,
            digest,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn model_name(&self) -> &str {
        &self.manifest.model_name
    }

    pub fn hidden_size(&self) -> usize {
        self.manifest.hidden_size
    }

    /// Number of stored layers, `num_layers + 1`.
    pub fn layer_count(&self) -> usize {
        self.manifest.num_layers + 1
    }

    pub fn records(&self) -> &[Record] {
        &self.manifest.records
    }

    pub fn record_index(&self, snippet_id: &str, variant_id: &str) -> Option<usize> {
        self.index
            .get(&(snippet_id.to_owned(), variant_id.to_owned()))
            .copied()
    }

    /// SHA-256 of the manifest (and seed, for mock bundles).
    pub fn digest(&self) -> &str {
        &self.digest
    }

    fn total_rows(&self) -> usize {
        *self.row_start.last().expect("row_start is never empty")
    }

    /// Loads one layer into memory.
    pub fn layer(&self, layer: usize) -> Result<Layer<'_>> {
        if layer >= self.layer_count() {
            return Err(Error::Bundle(format!(
                "layer {layer} out of range (bundle has {})",
                self.layer_count()
            )));
        }
        let d = self.hidden_size();
        let data = match &self.storage {
            Storage::Files(dir) => {
                let path = dir.join(layer_file(layer));
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                if bytes.len() != self.total_rows() * d * 4 {
                    return Err(Error::Bundle(format!(
                        "{} changed size since validation",
                        path.display()
                    )));
                }
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
                    .collect()
            }
            Storage::Mock { seed } => {
                let parts: Vec<Vec<f32>> = (0..self.manifest.records.len())
                    .into_par_iter()
                    .map(|r| self.mock_rows(*seed, r, layer))
                    .collect();
                parts.concat()
            }
        };
        Ok(Layer {
            bundle: self,
            index: layer,
            data,
        })
    }

    fn mock_rows(&self, seed: u64, record: usize, layer: usize) -> Vec<f32> {
        let r = &self.manifest.records[record];
        let key = format!("{}\u{0}{}", r.snippet_id, r.variant_id);
        let mut rng =
            ChaCha8Rng::seed_from_u64(snippet_seed(seed, &key, &format!("mock-layer-{layer}")));
        (0..r.m * self.hidden_size())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    }

    /// Writes the bundle in the on-disk layout, one layer at a time.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest_path = dir.join(MANIFEST);
        let json = serde_json::to_vec(&self.manifest).expect("manifest serializes");
        std::fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
        for l in 0..self.layer_count() {
            let layer = self.layer(l)?;
            let path = dir.join(layer_file(l));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            for v in &layer.data {
                w.write_all(&v.to_le_bytes())
                    .map_err(|e| Error::io(&path, e))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// One layer's hidden states held in memory.
pub struct Layer<'b> {
    bundle: &'b EmbeddingBundle,
    pub index: usize,
    data: Vec<f32>,
}

impl Layer<'_> {
    pub fn row(&self, record: usize, i: usize) -> &[f32] {
        let d = self.bundle.hidden_size();
        let start = (self.bundle.row_start[record] + i) * d;
        &self.data[start..start + d]
    }
}

/// Reads and fully validates a bundle directory. Layer data is checked here
/// but loaded again per layer by [`EmbeddingBundle::layer`].
pub fn read_bundle(dir: &Path) -> Result<EmbeddingBundle> {
    let manifest_path = dir.join(MANIFEST);
    let bytes = std::fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_slice(&bytes)
        .map_err(|e| Error::Bundle(format!("{}: {e}", manifest_path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let bundle = EmbeddingBundle::new(manifest, Storage::Files(dir.to_owned()), digest)?;

    let d = bundle.hidden_size();
    let record_name = |r: usize| {
        let rec = &bundle.manifest.records[r];
        format!("record {r} ({}, {})", rec.snippet_id, rec.variant_id)
    };
    for l in 0..bundle.layer_count() {
        let path = dir.join(layer_file(l));
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let size = file.metadata().map_err(|e| Error::io(&path, e))?.len() as usize;
        let expected = bundle.total_rows() * d * 4;
        if size < expected {
            let r = (0..bundle.manifest.records.len())
                .find(|&r| bundle.row_start[r + 1] * d * 4 > size)
                .expect("some record ends past the file end");
            return Err(Error::Bundle(format!(
                "{} is truncated: {} needs bytes up to {}, file has {size}",
                path.display(),
                record_name(r),
                bundle.row_start[r + 1] * d * 4
            )));
        }
        if size > expected {
            return Err(Error::Bundle(format!(
                "{} has {} trailing bytes",
                path.display(),
                size - expected
            )));
        }
        let mut reader = BufReader::new(file);
        let mut buf = Vec::new();
        for r in 0..bundle.manifest.records.len() {
            buf.resize(bundle.manifest.records[r].m * d * 4, 0);
            reader
                .read_exact(&mut buf)
                .map_err(|e| Error::io(&path, e))?;
            let finite = buf
                .chunks_exact(4)
                .all(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")).is_finite());
            if !finite {
                return Err(Error::Bundle(format!(
                    "{}: {} contains non-finite values",
                    path.display(),
                    record_name(r)
                )));
            }
        }
    }
    Ok(bundle)
}

/// Random-noise bundle over the given variants. Subtokens are the
/// whitespace-separated chunks of each text, framed by two special tokens
/// and cropped to [`MAX_SUBTOKENS`].
pub fn make_mock_bundle(
    variants: &[Variant],
    d: usize,
    layers: usize,
    seed: u64,
) -> Result<EmbeddingBundle> {
    if d == 0 || layers == 0 {
        return Err(Error::Invalid("mock bundle needs d >= 1 and L >= 1".into()));
    }
    let records = variants
        .iter()
        .map(|v| {
            let mut offsets = vec![SPECIAL];
            let mut start = None;
            for (i, b) in v.text.bytes().chain(*b" ").enumerate() {
                match (b.is_ascii_whitespace(), start) {
                    (false, None) => start = Some(i),
                    (true, Some(s)) => {
                        offsets.push([s as i64, i as i64]);
                        start = None;
                    }
                    _ => {}
                }
            }
            offsets.truncate(MAX_SUBTOKENS - 1);
            offsets.push(SPECIAL);
            Record {
                snippet_id: v.snippet_id.clone(),
                variant_id: v.variant_id.clone(),
                m: offsets.len(),
                offsets,
            }
        })
        .collect();
    let manifest = Manifest {
        model_name: format!("mock-d{d}-l{layers}-s{seed}"),
        num_layers: layers,
        hidden_size: d,
        dtype: DTYPE.into(),
        records,
    };
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&manifest).expect("manifest serializes"));
    h.update(seed.to_le_bytes());
    let digest = hex::encode(h.finalize());
    EmbeddingBundle::new(manifest, Storage::Mock { seed }, digest)
}

/// Indices of non-special subtokens overlapping `span` by at least one
/// byte, ascending.
pub fn align(span: [usize; 2], offsets: &[Offset]) -> Vec<usize> {
    let (s, e) = (span[0] as i64, span[1] as i64);
    offsets
        .iter()
        .enumerate()
        .filter(|(_, o)| !is_special(o) && o[0].max(s) < o[1].min(e))
        .map(|(i, _)| i)
        .collect()
}

fn crop_end(offsets: &[Offset]) -> i64 {
    offsets
        .iter()
        .filter(|o| !is_special(o))
        .map(|o| o[1])
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
enum Pick {
    Row(usize),
    Concat(usize, usize),
    Mean(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRow {
    record: usize,
    pick: Pick,
    pub label: Label,
    /// Subtoken text for per-key baselines; empty when the mode has none.
    pub key: String,
    /// Index into [`FeaturePlan::groups`].
    pub group: u32,
}

impl PlannedRow {
    /// Index of the bundle record the row's features come from.
    pub fn record(&self) -> usize {
        self.record
    }
}

/// Alignment of a task's examples to bundle rows. Independent of the layer,
/// so it is computed once and materialized per layer.
#[derive(Debug, Clone)]
pub struct FeaturePlan {
    pub task: Task,
    pub rows: Vec<PlannedRow>,
    /// Snippet ids, in first-appearance order.
    pub groups: Vec<String>,
    pub input: usize,
    pub dropped: usize,
    pub dim: usize,
}

/// Variant texts keyed by `(snippet_id, variant_id)`.
pub type VariantTexts = HashMap<(String, String), String>;

pub fn variant_texts(variants: &[Variant]) -> VariantTexts {
    variants
        .iter()
        .map(|v| ((v.snippet_id.clone(), v.variant_id.clone()), v.text.clone()))
        .collect()
}

fn subtoken_text<'t>(text: Option<&'t str>, o: &Offset) -> &'t str {
    text.and_then(|t| t.get(o[0] as usize..o[1] as usize))
        .unwrap_or("")
}

/// Rows for one example, or `None` when it must be dropped.
fn plan_example(
    ex: &ProbingExample,
    record: &Record,
    text: Option<&str>,
) -> Option<Vec<(Pick, String)>> {
    let offsets = &record.offsets;
    let end = crop_end(offsets);
    if ex.target_spans.iter().any(|s| s[1] as i64 > end) {
        return None;
    }
    let aligned: Vec<Vec<usize>> = ex.target_spans.iter().map(|&s| align(s, offsets)).collect();
    if aligned.iter().any(Vec::is_empty) {
        return None;
    }
    let key = |i: usize| subtoken_text(text, &offsets[i]).to_owned();
    match ex.feature_mode {
        FeatureMode::PerSubtoken => Some(
            aligned
                .into_iter()
                .flatten()
                .map(|i| (Pick::Row(i), key(i)))
                .collect(),
        ),
        FeatureMode::PairConcat => {
            let [a, b] = aligned.as_slice() else {
                return None;
            };
            Some(vec![(
                Pick::Concat(a[0], b[0]),
                format!("{}\u{1f}{}", key(a[0]), key(b[0])),
            )])
        }
        FeatureMode::OccurrenceMean => {
            let mut rows: Vec<usize> = aligned.into_iter().flatten().collect();
            rows.sort_unstable();
            rows.dedup();
            Some(vec![(Pick::Mean(rows), String::new())])
        }
        FeatureMode::SnippetMean => {
            let rows: Vec<usize> = (0..offsets.len())
                .filter(|&i| !is_special(&offsets[i]))
                .collect();
            (!rows.is_empty()).then(|| vec![(Pick::Mean(rows), String::new())])
        }
    }
}

impl FeaturePlan {
    pub fn build(
        task: Task,
        examples: &[ProbingExample],
        bundle: &EmbeddingBundle,
        texts: &VariantTexts,
    ) -> Self {
        let mut plan = FeaturePlan {
            task,
            rows: Vec::new(),
            groups: Vec::new(),
            input: examples.len(),
            dropped: 0,
            dim: match task.feature_mode() {
                FeatureMode::PairConcat => 2 * bundle.hidden_size(),
                _ => bundle.hidden_size(),
            },
        };
        let mut group_of: HashMap<&str, u32> = HashMap::new();
        for ex in examples {
            let key = (ex.snippet_id.clone(), ex.variant_id.clone());
            let planned = bundle.index.get(&key).and_then(|&r| {
                let text = texts.get(&key).map(String::as_str);
                plan_example(ex, &bundle.manifest.records[r], text).map(|rows| (r, rows))
            });
            let Some((record, rows)) = planned else {
                plan.dropped += 1;
                continue;
            };
            let next = group_of.len() as u32;
            let group = *group_of.entry(&ex.snippet_id).or_insert_with(|| {
                plan.groups.push(ex.snippet_id.clone());
                next
            });
            for (pick, key) in rows {
                plan.rows.push(PlannedRow {
                    record,
                    pick,
                    label: ex.label.clone(),
                    key,
                    group,
                });
            }
        }
        plan
    }

    pub fn drop_rate(&self) -> f64 {
        if self.input == 0 {
            0.0
        } else {
            self.dropped as f64 / self.input as f64
        }
    }

    /// Row-major `rows.len() x dim` feature matrix for one layer.
    pub fn features(&self, layer: &Layer) -> Vec<f32> {
        let mut out = Vec::with_capacity(self.rows.len() * self.dim);
        for r in &self.rows {
            push_features(&mut out, layer, r.record, &r.pick);
        }
        out
    }
}

fn push_features(out: &mut Vec<f32>, layer: &Layer, record: usize, pick: &Pick) {
    match pick {
        Pick::Row(i) => out.extend_from_slice(layer.row(record, *i)),
        Pick::Concat(a, b) => {
            out.extend_from_slice(layer.row(record, *a));
            out.extend_from_slice(layer.row(record, *b));
        }
        Pick::Mean(rows) => {
            let d = layer.bundle.hidden_size();
            let mut acc = vec![0f64; d];
            for &i in rows {
                for (a, v) in acc.iter_mut().zip(layer.row(record, i)) {
                    *a += *v as f64;
                }
            }
            out.extend(acc.into_iter().map(|a| (a / rows.len() as f64) as f32));
        }
    }
}

/// Feature vectors for a single example at one layer, paired with their
/// baseline keys. `None` means the example is dropped.
pub fn assemble_features(
    example: &ProbingExample,
    bundle: &EmbeddingBundle,
    layer: &Layer,
    text: Option<&str>,
) -> Option<Vec<(Vec<f32>, String)>> {
    let r = bundle.record_index(&example.snippet_id, &example.variant_id)?;
    let rows = plan_example(example, &bundle.manifest.records[r], text)?;
    Some(
        rows.into_iter()
            .map(|(pick, key)| {
                let mut v = Vec::new();
                push_features(&mut v, layer, r, &pick);
                (v, key)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variant(text: &str) -> Variant {
        Variant {
            snippet_id: "s".into(),
            variant_id: "orig".into(),
            text: text.into(),
        }
    }

    fn example(mode: FeatureMode, task: Task, spans: &[[usize; 2]]) -> ProbingExample {
        ProbingExample {
            task,
            snippet_id: "s".into(),
            variant_id: "orig".into(),
            target_spans: spans.to_vec(),
            feature_mode: mode,
            label: Label::Int(1),
        }
    }

    #[test]
    fn align_overlap_rule() {
        let offsets = [[0, 2], [2, 3], [3, 5]];
        assert_eq!(align([0, 3], &offsets), vec![0, 1]);
        assert_eq!(align([9, 12], &offsets), Vec::<usize>::new());
        assert_eq!(align([0, 5], &[SPECIAL, [0, 5], SPECIAL]), vec![1]);
    }

    #[test]
    fn mock_offsets_tile_tokens() {
        let b = make_mock_bundle(&[variant("int  x = 1;")], 4, 2, 0).unwrap();
        let r = &b.records()[0];
        assert_eq!(
            r.offsets,
            vec![SPECIAL, [0, 3], [5, 6], [7, 8], [9, 11], SPECIAL]
        );
        assert_eq!(b.layer_count(), 3);
    }

    #[test]
    fn mock_crops() {
        let text = vec!["a"; 2000].join(" ");
        let b = make_mock_bundle(&[variant(&text)], 2, 1, 0).unwrap();
        assert_eq!(b.records()[0].m, MAX_SUBTOKENS);
        let ex = example(
            FeatureMode::PerSubtoken,
            Task::TokenIsIdentifier,
            &[[3000, 3001]],
        );
        let layer = b.layer(0).unwrap();
        assert!(assemble_features(&ex, &b, &layer, Some(&text)).is_none());
        let ex = example(FeatureMode::PerSubtoken, Task::TokenIsIdentifier, &[[2, 3]]);
        assert_eq!(
            assemble_features(&ex, &b, &layer, Some(&text))
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn feature_modes() {
        let text = "foo bar baz";
        let b = make_mock_bundle(&[variant(text)], 3, 1, 5).unwrap();
        let layer = b.layer(1).unwrap();
        let t = Some(text);

        let ex = example(FeatureMode::PerSubtoken, Task::TokenIsIdentifier, &[[0, 7]]);
        let rows = assemble_features(&ex, &b, &layer, t).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].1, "bar");

        let ex = example(
            FeatureMode::PairConcat,
            Task::EdgePrediction,
            &[[0, 3], [8, 11]],
        );
        let rows = assemble_features(&ex, &b, &layer, t).unwrap();
        assert_eq!(rows[0].0.len(), 6);
        assert_eq!(&rows[0].0[..3], layer.row(0, 1));
        assert_eq!(&rows[0].0[3..], layer.row(0, 3));

        let ex = example(FeatureMode::SnippetMean, Task::AstDepth, &[]);
        let rows = assemble_features(&ex, &b, &layer, t).unwrap();
        for k in 0..3 {
            let mean = (1..4).map(|i| layer.row(0, i)[k] as f64).sum::<f64>() / 3.0;
            assert!((rows[0].0[k] as f64 - mean).abs() < 1e-6);
        }
    }

    #[test]
    fn mock_is_deterministic() {
        let v = [variant("a b c")];
        let a = make_mock_bundle(&v, 4, 2, 9).unwrap();
        let b = make_mock_bundle(&v, 4, 2, 9).unwrap();
        assert_eq!(a.layer(2).unwrap().data, b.layer(2).unwrap().data);
        assert_eq!(a.digest(), b.digest());
        let c = make_mock_bundle(&v, 4, 2, 10).unwrap();
        assert_ne!(a.layer(2).unwrap().data, c.layer(2).unwrap().data);
    }

    #[test]
    fn manifest_validation() {
        let mut m = make_mock_bundle(&[variant("a b")], 2, 1, 0)
            .unwrap()
            .manifest
            .clone();
        m.records[0].offsets[1] = [2, 1];
        let err = validate_manifest(&m).unwrap_err().to_string();
        assert!(err.contains("start 2 > end 1"), "{err}");
        m.records[0].offsets[1] = [0, 1];
        m.records[0].offsets[2] = [0, 3];
        assert!(validate_manifest(&m).is_err());
        m.records[0].offsets[2] = [2, 3];
        assert!(validate_manifest(&m).is_ok());
        m.records[0].m = 9;
        assert!(validate_manifest(&m).is_err());
    }
}
