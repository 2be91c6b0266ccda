//! Command implementations: dataset generation, probing, mock bundles.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_corpus, Corpus, SkipCounts};
use crate::embed::{make_mock_bundle, read_bundle, variant_texts, EmbeddingBundle, FeaturePlan};
use crate::error::{Error, Result};
use crate::jsonl;
use crate::probe::{
    has_keys, mean, row_splits, run_probe, simple_bounds, targets, Metric, ProbeConfig,
    ProbeResult, ResultMode,
};
use crate::taskgen::{generate_all, ClassVocabulary, ProbingExample, Task, Variant};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const VARIANTS_FILE: &str = "variants.jsonl";
pub const VOCAB_FILE: &str = "vocab.json";
pub const DATA_MANIFEST: &str = "manifest.json";

/// Alignment drop rate above which a task's rows carry a warning.
pub const MAX_DROP_RATE: f64 = 0.5;

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("in-memory serialization");
    v.push(b'\n');
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub records: usize,
    pub sha256: String,
}

/// Written next to the datasets. Holds no timestamps so that regeneration
/// is byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    pub seed: u64,
    pub corpus_digest: String,
    pub snippets: usize,
    pub skipped: SkipCounts,
    pub tasks: BTreeMap<Task, FileEntry>,
    pub variants: FileEntry,
}

/// Generates all datasets for `corpus` into `out_dir`.
pub fn generate_to_dir(corpus: &Corpus, out_dir: &Path, seed: u64) -> Result<DatasetManifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let generated = generate_all(corpus, seed)?;

    let entry = |file: String, records: usize, bytes: &[u8]| FileEntry {
        file,
        records,
        sha256: sha256_hex(bytes),
    };
    corpus.write_jsonl(&out_dir.join(CORPUS_FILE))?;
    let mut tasks = BTreeMap::new();
    for (task, examples) in &generated.datasets {
        let bytes = jsonl::to_bytes(examples);
        write_file(&out_dir.join(task.file_name()), &bytes)?;
        tasks.insert(*task, entry(task.file_name(), examples.len(), &bytes));
    }
    let bytes = jsonl::to_bytes(&generated.variants);
    write_file(&out_dir.join(VARIANTS_FILE), &bytes)?;
    let variants = entry(VARIANTS_FILE.into(), generated.variants.len(), &bytes);
    write_file(&out_dir.join(VOCAB_FILE), &pretty(&generated.vocabularies))?;

    let manifest = DatasetManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed,
        corpus_digest: corpus.digest(),
        snippets: corpus.len(),
        skipped: corpus.skipped,
        tasks,
        variants,
    };
    write_file(&out_dir.join(DATA_MANIFEST), &pretty(&manifest))?;
    Ok(manifest)
}

pub fn cmd_generate(
    corpus_path: &Path,
    out_dir: &Path,
    seed: u64,
    limit: Option<usize>,
) -> Result<DatasetManifest> {
    let corpus = load_corpus(corpus_path, limit)?.with_seed(seed);
    log::info!(
        "loaded {} snippets from {}",
        corpus.len(),
        corpus_path.display()
    );
    generate_to_dir(&corpus, out_dir, seed)
}

/// A generated dataset directory read back into memory.
#[derive(Debug, Clone)]
pub struct Datasets {
    pub manifest: DatasetManifest,
    pub manifest_digest: String,
    pub variants: Vec<Variant>,
    pub datasets: BTreeMap<Task, Vec<ProbingExample>>,
}

pub fn read_datasets(dir: &Path) -> Result<Datasets> {
    let path = dir.join(DATA_MANIFEST);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_slice(&bytes).map_err(|source| Error::Json {
            path: path.clone(),
            line: 0,
            source,
        })?;
    let variants = jsonl::read(&dir.join(VARIANTS_FILE))?;
    let mut datasets = BTreeMap::new();
    for task in Task::ALL {
        let examples: Vec<ProbingExample> = jsonl::read(&dir.join(task.file_name()))?;
        if let Some(bad) = examples.iter().find(|e| e.task != task) {
            return Err(Error::Invalid(format!(
                "{} holds a {} example",
                task.file_name(),
                bad.task
            )));
        }
        datasets.insert(task, examples);
    }
    Ok(Datasets {
        manifest,
        manifest_digest: sha256_hex(&bytes),
        variants,
        datasets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTask {
    pub task: Task,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleInfo {
    pub model_name: String,
    pub digest: String,
    pub num_layers: usize,
    pub hidden_size: usize,
}

/// Provenance of one probe run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ProbeConfig,
    pub config_digest: String,
    pub corpus_digest: String,
    pub dataset_manifest_digest: String,
    pub bundles: Vec<BundleInfo>,
    pub tasks: Vec<Task>,
    pub seed: u64,
    pub skipped_tasks: Vec<SkippedTask>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

/// Results of probing one bundle before the run manifest is attached.
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub results: Vec<ProbeResult>,
    pub skipped: Vec<SkippedTask>,
}

/// Probes every task at every layer of `bundle`, plus Simple Bound rows.
/// Tasks that cannot be split or fitted are skipped and reported.
pub fn probe_bundle(
    data: &Datasets,
    bundle: &EmbeddingBundle,
    cfg: &ProbeConfig,
) -> Result<ProbeOutcome> {
    cfg.validate()?;
    let texts = variant_texts(&data.variants);
    let mut skipped = Vec::new();
    let mut prepared = Vec::new();
    let mut results = Vec::new();

    let row = |task: Task,
               plan: &FeaturePlan,
               layer,
               mode,
               values: Vec<f64>,
               alphas,
               bounds: (f64, f64)| {
        let warning = (plan.drop_rate() > MAX_DROP_RATE).then(|| {
            format!(
                "{:.1}% of examples dropped during alignment",
                100.0 * plan.drop_rate()
            )
        });
        ProbeResult {
            task,
            bundle: bundle.model_name().to_owned(),
            bundle_digest: bundle.digest().to_owned(),
            layer,
            mode,
            metric_name: Metric::of(task),
            metric_value: mean(&values),
            per_split_values: values,
            chosen_alpha: alphas,
            simple_bound_value: bounds.0,
            simple_bound_global: bounds.1,
            examples: plan.input,
            rows: plan.rows.len(),
            dropped: plan.dropped,
            warning,
            manifest_digest: String::new(),
        }
    };

    for (&task, examples) in &data.datasets {
        let plan = FeaturePlan::build(task, examples, bundle, &texts);
        let ready = targets(&plan).and_then(|t| Ok((t, row_splits(&plan, cfg)?)));
        let (t, splits) = match ready {
            Ok(r) => r,
            Err(e) => {
                log::warn!("skipping {task}: {e}");
                skipped.push(SkippedTask {
                    task,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if plan.drop_rate() > MAX_DROP_RATE {
            log::warn!(
                "{task}: {:.1}% of examples dropped",
                100.0 * plan.drop_rate()
            );
        }
        let (global, per_key) = simple_bounds(&plan, &t, &splits);
        let reference = if has_keys(task) {
            mean(&per_key)
        } else {
            mean(&global)
        };
        let bounds = (reference, mean(&global));
        results.push(row(
            task,
            &plan,
            None,
            ResultMode::SimpleBoundGlobal,
            global,
            vec![],
            bounds,
        ));
        if has_keys(task) {
            results.push(row(
                task,
                &plan,
                None,
                ResultMode::SimpleBoundPerKey,
                per_key,
                vec![],
                bounds,
            ));
        }
        prepared.push((task, plan, t, splits, bounds));
    }

    for l in 0..bundle.layer_count() {
        let layer = bundle.layer(l)?;
        let mut failed = Vec::new();
        for (i, (task, plan, t, splits, bounds)) in prepared.iter().enumerate() {
            log::info!("{}: layer {l}, {task}", bundle.model_name());
            match run_probe(plan, t, splits, &layer, cfg) {
                Ok(run) => results.push(row(
                    *task,
                    plan,
                    Some(l),
                    ResultMode::Probe,
                    run.per_split,
                    run.alphas,
                    *bounds,
                )),
                Err(e) => {
                    log::warn!("skipping {task}: {e}");
                    skipped.push(SkippedTask {
                        task: *task,
                        reason: e.to_string(),
                    });
                    failed.push(i);
                }
            }
        }
        for i in failed.into_iter().rev() {
            let task = prepared.remove(i).0;
            results.retain(|r| r.task != task);
        }
    }
    Ok(ProbeOutcome { results, skipped })
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Path of the run manifest written beside a results file.
pub fn run_manifest_path(results: &Path) -> PathBuf {
    let mut name = results.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn cmd_probe(data_dir: &Path, bundle_dir: &Path, out: &Path) -> Result<Vec<ProbeResult>> {
    let started_unix = unix_now();
    let data = read_datasets(data_dir)?;
    let bundle = read_bundle(bundle_dir)?;
    let cfg = ProbeConfig {
        seed: data.manifest.seed,
        ..ProbeConfig::default()
    };
    let outcome = probe_bundle(&data, &bundle, &cfg)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_digest: sha256_hex(&serde_json::to_vec(&cfg).expect("config serializes")),
        config: cfg.clone(),
        corpus_digest: data.manifest.corpus_digest.clone(),
        dataset_manifest_digest: data.manifest_digest.clone(),
        bundles: vec![BundleInfo {
            model_name: bundle.model_name().into(),
            digest: bundle.digest().into(),
            num_layers: bundle.manifest().num_layers,
            hidden_size: bundle.hidden_size(),
        }],
        tasks: data.datasets.keys().copied().collect(),
        seed: cfg.seed,
        skipped_tasks: outcome.skipped,
        started_unix,
        finished_unix: unix_now(),
    };
    let manifest_bytes = pretty(&manifest);
    let digest = sha256_hex(&manifest_bytes);
    let mut results = outcome.results;
    for r in &mut results {
        r.manifest_digest = digest.clone();
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_file(&run_manifest_path(out), &manifest_bytes)?;
    jsonl::write(out, &results)?;
    Ok(results)
}

pub fn cmd_mock_bundle(
    data_dir: &Path,
    dim: usize,
    layers: usize,
    seed: u64,
    out: &Path,
) -> Result<EmbeddingBundle> {
    let variants: Vec<Variant> = jsonl::read(&data_dir.join(VARIANTS_FILE))?;
    let bundle = make_mock_bundle(&variants, dim, layers, seed)?;
    bundle.write(out)?;
    Ok(bundle)
}

pub fn read_results(path: &Path) -> Result<Vec<ProbeResult>> {
    jsonl::read(path)
}

pub fn read_vocabularies(dir: &Path) -> Result<Vec<ClassVocabulary>> {
    let path = dir.join(VOCAB_FILE);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path,
        line: 0,
        source,
    })
}
