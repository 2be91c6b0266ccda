use std::path::Path;

use probe_forge::embed::{layer_file, make_mock_bundle, read_bundle, Manifest, MANIFEST};
use probe_forge::taskgen::Variant;

fn variants() -> Vec<Variant> {
    ["int a = 1 ;", "return b ;", "x"]
        .iter()
        .enumerate()
        .map(|(i, t)| Variant {
            snippet_id: format!("s{i}"),
            variant_id: "orig".into(),
            text: t.to_string(),
        })
        .collect()
}

fn written(dir: &Path) {
    make_mock_bundle(&variants(), 3, 2, 5)
        .unwrap()
        .write(dir)
        .unwrap();
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&std::fs::read(dir.join(MANIFEST)).unwrap()).unwrap()
}

fn save(dir: &Path, m: &Manifest) {
    std::fs::write(dir.join(MANIFEST), serde_json::to_vec(m).unwrap()).unwrap();
}

#[test]
fn round_trip_preserves_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = make_mock_bundle(&variants(), 3, 2, 5).unwrap();
    mock.write(tmp.path()).unwrap();
    let read = read_bundle(tmp.path()).unwrap();
    assert_eq!(read.layer_count(), 3);
    assert_eq!(read.manifest(), mock.manifest());
    for l in 0..3 {
        let (a, b) = (mock.layer(l).unwrap(), read.layer(l).unwrap());
        for (r, rec) in mock.records().iter().enumerate() {
            for i in 0..rec.m {
                assert_eq!(a.row(r, i), b.row(r, i));
            }
        }
    }
    assert_eq!(read_bundle(tmp.path()).unwrap().digest(), read.digest());
}

#[test]
fn truncated_layer_names_the_record() {
    let tmp = tempfile::tempdir().unwrap();
    written(tmp.path());
    let path = tmp.path().join(layer_file(1));
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
    let err = read_bundle(tmp.path()).unwrap_err();
    assert!(!err.is_io());
    let msg = err.to_string();
    assert!(
        msg.contains("record 2 (s2, orig)") && msg.contains("truncated"),
        "{msg}"
    );
}

#[test]
fn trailing_bytes_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    written(tmp.path());
    let path = tmp.path().join(layer_file(0));
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.extend_from_slice(&[0; 4]);
    std::fs::write(&path, bytes).unwrap();
    assert!(read_bundle(tmp.path())
        .unwrap_err()
        .to_string()
        .contains("trailing"));
}

#[test]
fn non_finite_values_name_the_record() {
    let tmp = tempfile::tempdir().unwrap();
    written(tmp.path());
    let path = tmp.path().join(layer_file(2));
    let mut bytes = std::fs::read(&path).unwrap();
    // first row of record 1 starts after record 0's m rows of d = 3 floats
    let m0 = manifest(tmp.path()).records[0].m;
    let at = m0 * 3 * 4;
    bytes[at..at + 4].copy_from_slice(&f32::NAN.to_le_bytes());
    std::fs::write(&path, bytes).unwrap();
    let msg = read_bundle(tmp.path()).unwrap_err().to_string();
    assert!(
        msg.contains("record 1 (s1, orig)") && msg.contains("non-finite"),
        "{msg}"
    );
}

#[test]
fn start_after_end_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    written(tmp.path());
    let mut m = manifest(tmp.path());
    m.records[0].offsets[1] = [4, 2];
    save(tmp.path(), &m);
    assert!(read_bundle(tmp.path())
        .unwrap_err()
        .to_string()
        .contains("start 4 > end 2"));
}

#[test]
fn manifest_errors() {
    let tmp = tempfile::tempdir().unwrap();
    written(tmp.path());
    let original = manifest(tmp.path());

    let mut m = original.clone();
    m.dtype = "f16".into();
    save(tmp.path(), &m);
    assert!(read_bundle(tmp.path()).is_err());

    let mut m = original.clone();
    m.records.push(m.records[0].clone());
    save(tmp.path(), &m);
    assert!(read_bundle(tmp.path()).is_err());

    let mut m = original.clone();
    m.records[1].m += 1;
    save(tmp.path(), &m);
    assert!(read_bundle(tmp.path()).is_err());

    save(tmp.path(), &original);
    std::fs::remove_file(tmp.path().join(layer_file(2))).unwrap();
    assert!(read_bundle(tmp.path()).unwrap_err().is_io());
}
