//! Markdown and CSV rendering of probe results.
//!
//! Every number printed comes from one results row; nothing is recomputed
//! here beyond picking minima.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::read_results;
use crate::probe::{Metric, ProbeResult, ResultMode};
use crate::taskgen::Task;

pub const REPORT_FILE: &str = "report.md";
pub const BEST_LAYER_FILE: &str = "best_layer.csv";
pub const PER_LAYER_FILE: &str = "per_layer.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub markdown: String,
    pub best_layer_csv: String,
    pub per_layer_csv: String,
    pub warnings: Vec<String>,
    /// Best probe row per (task, bundle label).
    pub best: BTreeMap<(Task, String), ProbeResult>,
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::Mae => "MAE",
        Metric::ErrorRate => "error rate",
    }
}

/// Display label per bundle; a digest suffix disambiguates equal names.
fn bundle_labels(results: &[ProbeResult]) -> BTreeMap<(String, String), String> {
    let mut digests: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in results {
        digests
            .entry(&r.bundle)
            .or_default()
            .insert(&r.bundle_digest);
    }
    let mut labels = BTreeMap::new();
    for (name, ds) in digests {
        for d in &ds {
            let label = if ds.len() > 1 {
                format!("{name}@{}", &d[..d.len().min(8)])
            } else {
                name.to_owned()
            };
            labels.insert((name.to_owned(), d.to_string()), label);
        }
    }
    labels
}

/// Minimum over layers; the lowest layer wins ties.
fn best_row<'r>(rows: impl Iterator<Item = &'r ProbeResult>) -> Option<&'r ProbeResult> {
    rows.filter(|r| r.mode == ResultMode::Probe).min_by(|a, b| {
        a.metric_value
            .total_cmp(&b.metric_value)
            .then(a.layer.cmp(&b.layer))
    })
}

pub fn render_report(results: &[ProbeResult]) -> Report {
    let labels = bundle_labels(results);
    let label_of = |r: &ProbeResult| labels[&(r.bundle.clone(), r.bundle_digest.clone())].clone();
    let bundles: Vec<String> = {
        let mut seen = Vec::new();
        for r in results {
            let l = label_of(r);
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
        seen
    };

    let mut tasks_of: BTreeMap<&str, BTreeSet<Task>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.mode == ResultMode::Probe) {
        tasks_of
            .entry(labels[&(r.bundle.clone(), r.bundle_digest.clone())].as_str())
            .or_default()
            .insert(r.task);
    }
    let union: BTreeSet<Task> = tasks_of.values().flatten().copied().collect();
    let tasks: Vec<Task> = union
        .iter()
        .copied()
        .filter(|t| {
            bundles
                .iter()
                .all(|b| tasks_of.get(b.as_str()).is_some_and(|s| s.contains(t)))
        })
        .collect();
    let mut warnings = Vec::new();
    for t in union.iter().filter(|t| !tasks.contains(t)) {
        warnings.push(format!(
            "task {t} is missing from some bundles and is left out"
        ));
    }
    for r in results
        .iter()
        .filter(|r| r.mode == ResultMode::Probe && r.layer == Some(0))
    {
        if let Some(w) = &r.warning {
            warnings.push(format!("{} / {}: {w}", label_of(r), r.task));
        }
    }

    let rows_for = |t: Task, b: &str| -> Vec<&ProbeResult> {
        results
            .iter()
            .filter(|r| r.task == t && label_of(r) == b)
            .collect()
    };
    let mut best = BTreeMap::new();
    for &t in &tasks {
        for b in &bundles {
            if let Some(r) = best_row(rows_for(t, b).into_iter()) {
                best.insert((t, b.clone()), r.clone());
            }
        }
    }

    let mut md = String::new();
    md.push_str("# Probing report\n\n");
    md.push_str("Lower is better for every metric: MAE for regression tasks, error rate for classification.\n");
    md.push_str("Bold marks the best bundle per task.\n\n");
    if !warnings.is_empty() {
        md.push_str("## Warnings\n\n");
        for w in &warnings {
            let _ = writeln!(md, "- {w}");
        }
        md.push('\n');
    }

    md.push_str("## Best layer\n\n| Task | Metric |");
    for b in &bundles {
        let _ = write!(md, " {b} |");
    }
    md.push_str("\n|---|---|");
    md.push_str(&"---:|".repeat(bundles.len()));
    md.push('\n');
    for &t in &tasks {
        let cells: Vec<Option<&ProbeResult>> =
            bundles.iter().map(|b| best.get(&(t, b.clone()))).collect();
        let min = cells
            .iter()
            .flatten()
            .map(|r| fmt3(r.metric_value))
            .min_by(|a, b| {
                a.parse::<f64>()
                    .unwrap()
                    .total_cmp(&b.parse::<f64>().unwrap())
            });
        let _ = write!(md, "| {} | {} |", t.title(), metric_name(Metric::of(t)));
        for c in cells {
            match c {
                Some(r) => {
                    let v = fmt3(r.metric_value);
                    let layer = r.layer.map_or(String::new(), |l| format!(" (layer {l})"));
                    if Some(&v) == min.as_ref() {
                        let _ = write!(md, " **{v}**{layer} |");
                    } else {
                        let _ = write!(md, " {v}{layer} |");
                    }
                }
                None => md.push_str(" - |"),
            }
        }
        md.push('\n');
    }

    md.push_str("\n## Simple Bound\n\n| Task | Bound |");
    for b in &bundles {
        let _ = write!(md, " {b} |");
    }
    md.push_str("\n|---|---|");
    md.push_str(&"---:|".repeat(bundles.len()));
    md.push('\n');
    for &t in &tasks {
        for (mode, name) in [
            (ResultMode::SimpleBoundGlobal, "global"),
            (ResultMode::SimpleBoundPerKey, "per subtoken"),
        ] {
            let cells: Vec<Option<&ProbeResult>> = bundles
                .iter()
                .map(|b| rows_for(t, b).into_iter().find(|r| r.mode == mode))
                .collect();
            if cells.iter().all(Option::is_none) {
                continue;
            }
            let _ = write!(md, "| {} | {name} |", t.title());
            for c in cells {
                match c {
                    Some(r) => {
                        let _ = write!(md, " {} |", fmt3(r.metric_value));
                    }
                    None => md.push_str(" - |"),
                }
            }
            md.push('\n');
        }
    }

    md.push_str("\n## Per layer\n\n");
    for &t in &tasks {
        let _ = writeln!(md, "### {}\n", t.title());
        let layers: BTreeSet<usize> = results
            .iter()
            .filter(|r| r.task == t && r.mode == ResultMode::Probe)
            .filter_map(|r| r.layer)
            .collect();
        md.push_str("| Bundle |");
        for l in &layers {
            let _ = write!(md, " {l} |");
        }
        md.push_str("\n|---|");
        md.push_str(&"---:|".repeat(layers.len()));
        md.push('\n');
        for b in &bundles {
            let _ = write!(md, "| {b} |");
            for &l in &layers {
                match rows_for(t, b)
                    .into_iter()
                    .find(|r| r.mode == ResultMode::Probe && r.layer == Some(l))
                {
                    Some(r) => {
                        let _ = write!(md, " {} |", fmt3(r.metric_value));
                    }
                    None => md.push_str(" - |"),
                }
            }
            md.push('\n');
        }
        md.push('\n');
    }

    let mut best_csv =
        String::from("task,bundle,metric,layer,value,simple_bound,simple_bound_global\n");
    for ((t, b), r) in &best {
        let _ = writeln!(
            best_csv,
            "{},{},{},{},{},{},{}",
            t.name(),
            csv_field(b),
            metric_name(r.metric_name),
            r.layer.map_or(String::new(), |l| l.to_string()),
            r.metric_value,
            r.simple_bound_value,
            r.simple_bound_global
        );
    }
    let mut per_layer_csv = String::from("task,bundle,layer,metric,value\n");
    for &t in &tasks {
        for b in &bundles {
            let mut rows: Vec<&ProbeResult> = rows_for(t, b)
                .into_iter()
                .filter(|r| r.mode == ResultMode::Probe)
                .collect();
            rows.sort_by_key(|r| r.layer);
            for r in rows {
                let _ = writeln!(
                    per_layer_csv,
                    "{},{},{},{},{}",
                    t.name(),
                    csv_field(b),
                    r.layer.map_or(String::new(), |l| l.to_string()),
                    metric_name(r.metric_name),
                    r.metric_value
                );
            }
        }
    }

    Report {
        markdown: md,
        best_layer_csv: best_csv,
        per_layer_csv,
        warnings,
        best,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn cmd_report(paths: &[PathBuf], out_dir: &Path) -> Result<Report> {
    if paths.is_empty() {
        return Err(Error::Invalid("no results files given".into()));
    }
    let mut results = Vec::new();
    for p in paths {
        results.extend(read_results(p)?);
    }
    let report = render_report(&results);
    for w in &report.warnings {
        log::warn!("{w}");
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, body) in [
        (REPORT_FILE, &report.markdown),
        (BEST_LAYER_FILE, &report.best_layer_csv),
        (PER_LAYER_FILE, &report.per_layer_csv),
    ] {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(report)
}
