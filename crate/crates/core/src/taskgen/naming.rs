use std::collections::BTreeSet;
use std::ops::Range;

use super::{per_snippet, Analysis, ClassVocabulary, Label, ProbingExample, Task, Variant};
use crate::corpus::Corpus;
use crate::syntax::{parse, SyntaxTree};

pub const PLACEHOLDER: &str = "var";

/// Distinct local variable names declared in one snippet.
pub(crate) fn local_names(a: &Analysis) -> BTreeSet<String> {
    a.scopes.locals().map(|(_, d)| d.name.clone()).collect()
}

/// Replaces every identifier token spelled `name` with `placeholder`.
/// Returns the new text and the placeholder spans in it.
pub fn mask_name(tree: &SyntaxTree, name: &str, placeholder: &str) -> (String, Vec<Range<usize>>) {
    let text = tree.text();
    let mut out = String::with_capacity(text.len());
    let mut spans = Vec::new();
    let mut last = 0;
    for leaf in tree.leaves() {
        let node = tree.node(leaf);
        if node.kind != "identifier" || tree.node_text(leaf) != name {
            continue;
        }
        out.push_str(&text[last..node.span.start]);
        let start = out.len();
        out.push_str(placeholder);
        spans.push(start..out.len());
        last = node.span.end;
    }
    out.push_str(&text[last..]);
    (out, spans)
}

/// One variant per (snippet, local name in `vocab`) with every occurrence of
/// the name masked. Snippets already using the placeholder as an identifier
/// are skipped since masking would be ambiguous there.
pub fn gen_variable_name(
    corpus: &Corpus,
    analyses: &[Analysis],
    vocab: &ClassVocabulary,
    placeholder: &str,
) -> (Vec<Variant>, Vec<ProbingExample>) {
    let per: Vec<(Variant, ProbingExample)> = per_snippet(corpus, analyses, |_, s, a| {
        let tree = &a.tree;
        let uses_placeholder = tree
            .leaves()
            .into_iter()
            .any(|l| tree.node_text(l) == placeholder);
        if uses_placeholder {
            return vec![];
        }
        let mut out = Vec::new();
        for name in local_names(a).into_iter().filter(|n| vocab.contains(n)) {
            let (text, spans) = mask_name(tree, &name, placeholder);
            let ok = parse(&text).ok().is_some_and(|t| {
                let leaves: Vec<_> = t
                    .leaves()
                    .into_iter()
                    .map(|l| t.node(l).span.clone())
                    .collect();
                spans.iter().all(|s| leaves.contains(s))
            });
            if !ok {
                log::warn!("snippet {}: masking {name:?} did not reparse", s.id);
                continue;
            }
            let variant_id = format!("name:{name}");
            out.push((
                Variant {
                    snippet_id: s.id.clone(),
                    variant_id: variant_id.clone(),
                    text,
                },
                ProbingExample::new(
                    Task::VariableName,
                    &s.id,
                    &variant_id,
                    spans,
                    Label::Class(name),
                ),
            ));
        }
        out
    });
    per.into_iter().unzip()
}
