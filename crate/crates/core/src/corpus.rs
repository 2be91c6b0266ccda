//! Corpus ingestion: comment stripping, whitespace normalization, stable
//! snippet identifiers and per-snippet seeding.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::syntax;

/// Snippets above this size are rejected before parsing.
pub const MAX_SNIPPET_BYTES: usize = 100_000;

/// One preprocessed Java function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub id: String,
    pub text: String,
    pub origin: String,
}

/// Counts of inputs dropped while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub preprocess: usize,
    pub parse: usize,
    pub too_long: usize,
    pub duplicate: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.preprocess + self.parse + self.too_long + self.duplicate
    }
}

/// An id-sorted set of snippets plus the seed all random choices derive from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub snippets: Vec<Snippet>,
    pub global_seed: u64,
    pub skipped: SkipCounts,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    code: String,
}

impl Corpus {
    /// Builds a corpus from `(origin, raw source)` pairs.
    ///
    /// Snippets that fail preprocessing or parsing are skipped and counted.
    /// Identical raw texts collapse onto one snippet.
    pub fn from_sources(sources: Vec<(String, String)>, limit: Option<usize>) -> Corpus {
        let processed: Vec<std::result::Result<Snippet, Skip>> = sources
            .into_par_iter()
            .map(|(origin, raw)| prepare(origin, &raw))
            .collect();

        let mut skipped = SkipCounts::default();
        let mut snippets = Vec::with_capacity(processed.len());
        for item in processed {
            match item {
                Ok(s) => snippets.push(s),
                Err(Skip::Preprocess) => skipped.preprocess += 1,
                Err(Skip::Parse) => skipped.parse += 1,
                Err(Skip::TooLong) => skipped.too_long += 1,
            }
        }
        // Same raw text may arrive under different origins; keep the
        // lexicographically first origin so the result is order-independent.
        snippets.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.origin.cmp(&b.origin)));
        let before = snippets.len();
        snippets.dedup_by(|b, a| a.id == b.id);
        skipped.duplicate = before - snippets.len();

        if let Some(limit) = limit {
            snippets.truncate(limit);
        }
        Corpus {
            snippets,
            global_seed: 0,
            skipped,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Corpus {
        self.global_seed = seed;
        self
    }

    pub fn len(&self) -> usize {
        self.snippets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snippets.is_empty()
    }

    /// Canonical JSONL form: one `{"id","text","origin"}` object per line.
    pub fn to_jsonl(&self) -> Vec<u8> {
        jsonl::to_bytes(&self.snippets)
    }

    /// SHA-256 of the canonical JSONL form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl()))
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        jsonl::write(path, &self.snippets)
    }
}

enum Skip {
    Preprocess,
    Parse,
    TooLong,
}

fn prepare(origin: String, raw: &str) -> std::result::Result<Snippet, Skip> {
    if raw.len() > MAX_SNIPPET_BYTES {
        return Err(Skip::TooLong);
    }
    let text = preprocess(raw).map_err(|_| Skip::Preprocess)?;
    if text.is_empty() {
        return Err(Skip::Preprocess);
    }
    if syntax::parse(&text).is_err() {
        return Err(Skip::Parse);
    }
    Ok(Snippet {
        id: snippet_id(raw),
        text,
        origin,
    })
}

/// Loads a corpus from a directory of `.java` files (searched recursively)
/// or from a JSONL file of `{"id","code"}` records.
pub fn load_corpus(path: &Path, limit: Option<usize>) -> Result<Corpus> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let sources = if meta.is_dir() {
        let mut files = Vec::new();
        collect_java_files(path, &mut files)?;
        files.sort();
        let mut sources = Vec::with_capacity(files.len());
        for file in files {
            let raw = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let rel = file.strip_prefix(path).unwrap_or(&file);
            sources.push((rel.to_string_lossy().replace('\\', "/"), raw));
        }
        sources
    } else {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        jsonl::read::<RawRecord>(path)?
            .into_iter()
            .map(|r| (format!("{name}#{}", r.id), r.code))
            .collect()
    };

    let corpus = Corpus::from_sources(sources, limit);
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    if corpus.skipped.total() > 0 {
        log::info!("{}: skipped {:?}", path.display(), corpus.skipped);
    }
    Ok(corpus)
}

/// Reads a corpus previously written with [`Corpus::write_jsonl`].
pub fn read_canonical(path: &Path) -> Result<Corpus> {
    let mut snippets: Vec<Snippet> = jsonl::read(path)?;
    snippets.sort_by(|a, b| a.id.cmp(&b.id));
    if snippets.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    Ok(Corpus {
        snippets,
        global_seed: 0,
        skipped: SkipCounts::default(),
    })
}

fn collect_java_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let ty = entry.file_type().map_err(|e| Error::io(&path, e))?;
        if ty.is_dir() {
            collect_java_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "java") {
            out.push(path);
        }
    }
    Ok(())
}

/// Hex of the first 128 bits of SHA-256 over the raw text.
pub fn snippet_id(raw: &str) -> String {
    let digest = Sha256::digest(raw.as_bytes());
    hex::encode(&digest[..16])
}

/// Derives an independent 64-bit seed for one random decision of one snippet.
pub fn snippet_seed(global_seed: u64, snippet_id: &str, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update((snippet_id.len() as u64).to_le_bytes());
    h.update(snippet_id.as_bytes());
    h.update(purpose.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Removes comments, collapses whitespace runs (newlines included) into one
/// space and trims both ends. String and character literals are copied
/// verbatim.
pub fn preprocess(raw: &str) -> Result<String> {
    let bytes = raw.as_bytes();
    let mut out: Vec<u8> = Vec::with_capacity(bytes.len());
    let mut pending_space = false;
    let mut i = 0;

    let emit = |out: &mut Vec<u8>, pending: &mut bool, chunk: &[u8]| {
        if *pending && !out.is_empty() {
            out.push(b' ');
        }
        *pending = false;
        out.extend_from_slice(chunk);
    };

    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' && bytes[i] != b'\r' {
                    i += 1;
                }
                pending_space = true;
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let close = raw[i + 2..]
                    .find("*/")
                    .ok_or_else(|| Error::Preprocess("unterminated block comment".into()))?;
                i = i + 2 + close + 2;
                pending_space = true;
            }
            b'"' if bytes[i..].starts_with(b"\"\"\"") => {
                return Err(Error::Preprocess("text blocks are not supported".into()));
            }
            b'"' | b'\'' => {
                let end = literal_end(bytes, i)?;
                emit(&mut out, &mut pending_space, &bytes[i..end]);
                i = end;
            }
            b' ' | b'\t' | b'\n' | b'\r' | 0x0c => {
                pending_space = true;
                i += 1;
            }
            _ => {
                emit(&mut out, &mut pending_space, &bytes[i..i + 1]);
                i += 1;
            }
        }
    }
    // Only ASCII bytes were inserted or removed, so UTF-8 validity is kept.
    Ok(String::from_utf8(out).expect("valid UTF-8"))
}

fn literal_end(bytes: &[u8], start: usize) -> Result<usize> {
    let quote = bytes[start];
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' | b'\r' => break,
            c if c == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    Err(Error::Preprocess("unterminated literal".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_line_comment_and_newline() {
        assert_eq!(
            preprocess("int x = 0; // c\nint y;").unwrap(),
            "int x = 0; int y;"
        );
    }

    #[test]
    fn strips_block_comment() {
        assert_eq!(preprocess("a /* b */ c").unwrap(), "a c");
        assert_eq!(preprocess("a/*x*/b").unwrap(), "a b");
    }

    #[test]
    fn collapses_whitespace_only() {
        assert_eq!(preprocess("  int\tx =\n\n 1 ;  ").unwrap(), "int x = 1 ;");
        assert_eq!(preprocess("return a;").unwrap(), "return a;");
    }

    #[test]
    fn keeps_literal_content() {
        let src = r#"String s = "a//b /* c */"; char q = '"'; // tail"#;
        assert_eq!(
            preprocess(src).unwrap(),
            r#"String s = "a//b /* c */"; char q = '"';"#
        );
        assert_eq!(preprocess(r#"x = "a\"//b";"#).unwrap(), r#"x = "a\"//b";"#);
    }

    #[test]
    fn rejects_unterminated_block_comment() {
        assert!(matches!(preprocess("a /* b"), Err(Error::Preprocess(_))));
    }

    #[test]
    fn seeds_are_stable_and_purpose_specific() {
        let a = snippet_seed(7, "abc", "bracket");
        assert_eq!(a, snippet_seed(7, "abc", "bracket"));
        assert_ne!(a, snippet_seed(7, "abc", "insertion"));
        assert_ne!(a, snippet_seed(8, "abc", "bracket"));
    }

    #[test]
    fn ids_are_128_bit_hex() {
        let id = snippet_id("void f() {}");
        assert_eq!(id.len(), 32);
        assert_eq!(id, snippet_id("void f() {}"));
    }

    #[test]
    fn jsonl_corpus_is_sorted_and_filters_unparseable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let lines = [
            r#"{"id":"a","code":"void a() { int x = 1; }"}"#,
            r#"{"id":"b","code":"void b() {\n  return; // done\n}"}"#,
            r#"{"id":"c","code":"int c() { return 2; }"}"#,
            r#"{"id":"d","code":"void d( {"}"#,
        ];
        fs::write(&path, lines.join("\n")).unwrap();
        let corpus = load_corpus(&path, None).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.skipped.parse, 1);
        let ids: Vec<_> = corpus.snippets.iter().map(|s| s.id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(load_corpus(&path, None).unwrap(), corpus);
        assert_eq!(load_corpus(&path, Some(2)).unwrap().len(), 2);
    }

    #[test]
    fn directory_load_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("A.java"), "class A { void f() {} }").unwrap();
        fs::write(
            dir.path().join("sub/B.java"),
            "class B {\n int g() { return 1; }\n}",
        )
        .unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let first = load_corpus(dir.path(), None).unwrap();
        let second = load_corpus(dir.path(), None).unwrap();
        assert_eq!(first.len(), 2);
        assert_eq!(first.to_jsonl(), second.to_jsonl());
        assert!(first.snippets.iter().any(|s| s.origin == "sub/B.java"));
    }

    #[test]
    fn empty_and_missing_inputs_fail() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_corpus(dir.path(), None),
            Err(Error::EmptyCorpus(_))
        ));
        assert!(load_corpus(&dir.path().join("nope"), None)
            .unwrap_err()
            .is_io());
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(src in r#"[a-z ;=\n\t/*"'(){}]{0,60}"#) {
            if let Ok(once) = preprocess(&src) {
                prop_assert_eq!(preprocess(&once).unwrap(), once.clone());
                prop_assert!(!once.contains('\n'));
            }
        }
    }
}
