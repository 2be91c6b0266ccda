use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probe-forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_corpus(dir: &Path, n: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, (_, code)) in probe_forge::synth::java_methods(n, 4)
        .into_iter()
        .enumerate()
    {
        std::fs::write(dir.join(format!("M{i:03}.java")), code).unwrap();
    }
}

#[test]
fn end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("src");
    write_corpus(&corpus, 40);
    let data = tmp.path().join("data");
    let bundle = tmp.path().join("bundle");
    let results = tmp.path().join("results.jsonl");
    let report = tmp.path().join("report");

    let out = bin(&[
        "generate",
        "--corpus",
        s(&corpus),
        "--out",
        s(&data),
        "--seed",
        "7",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("40 snippets"));

    let out = bin(&[
        "mock-bundle",
        "--data",
        s(&data),
        "--dim",
        "8",
        "--layers",
        "2",
        "--seed",
        "1",
        "--out",
        s(&bundle),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(bundle.join("manifest.json").exists());

    let out = bin(&[
        "probe",
        "--data",
        s(&data),
        "--bundle",
        s(&bundle),
        "--out",
        s(&results),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows: Vec<serde_json::Value> = std::fs::read_to_string(&results)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!rows.is_empty());
    assert!(rows
        .iter()
        .all(|r| r["per_split_values"].as_array().unwrap().len() == 3));
    assert!(tmp.path().join("results.jsonl.manifest.json").exists());

    let out = bin(&["report", s(&results), "--out", s(&report)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let md = std::fs::read_to_string(report.join("report.md")).unwrap();
    assert!(md.contains("## Best layer"));
    assert!(report.join("best_layer.csv").exists());
    assert!(report.join("per_layer.csv").exists());
}

#[test]
fn missing_corpus_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin(&[
        "generate",
        "--corpus",
        s(&tmp.path().join("nope")),
        "--out",
        s(&tmp.path().join("d")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_are_validation_errors() {
    assert_eq!(bin(&["generate"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_inputs_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("src");
    write_corpus(&corpus, 12);
    let data = tmp.path().join("data");
    assert!(
        bin(&["generate", "--corpus", s(&corpus), "--out", s(&data)])
            .status
            .success()
    );

    let out = bin(&[
        "mock-bundle",
        "--data",
        s(&data),
        "--dim",
        "0",
        "--layers",
        "1",
        "--out",
        s(&tmp.path().join("b")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let bundle = tmp.path().join("b2");
    assert!(bin(&[
        "mock-bundle",
        "--data",
        s(&data),
        "--dim",
        "4",
        "--layers",
        "1",
        "--out",
        s(&bundle)
    ])
    .status
    .success());
    let layer = bundle.join("layer_01.bin");
    let bytes = std::fs::read(&layer).unwrap();
    std::fs::write(&layer, &bytes[..bytes.len() - 4]).unwrap();
    let out = bin(&[
        "probe",
        "--data",
        s(&data),
        "--bundle",
        s(&bundle),
        "--out",
        s(&tmp.path().join("r.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("record"));

    let empty = tmp.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = bin(&[
        "generate",
        "--corpus",
        s(&empty),
        "--out",
        s(&tmp.path().join("d2")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
