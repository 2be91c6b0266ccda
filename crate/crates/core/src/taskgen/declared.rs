use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{per_snippet, Analysis, ProbingExample, Task, Variant};
use crate::corpus::{snippet_seed, Corpus};
use crate::semantics::scope::Declaration;
use crate::syntax::{parse, NodeId, SyntaxTree};

pub const VARIANT: &str = "declared";

/// Inserted text runs from the statement end to the name, then `NAME);`.
pub const PRINT_PREFIX: &str = " System.out.println(";

const STATEMENT_PARENTS: [&str; 3] = ["block", "constructor_body", "switch_block_statement_group"];

// Code after these is unreachable, so a print there would not compile.
const TERMINAL: [&str; 5] = [
    "return_statement",
    "throw_statement",
    "break_statement",
    "continue_statement",
    "yield_statement",
];

fn is_statement(kind: &str) -> bool {
    kind.ends_with("_statement") || kind == "local_variable_declaration" || kind == "block"
}

/// True if `id` lies in a method or constructor whose scopes are analyzed,
/// i.e. one that is not itself nested in another scope.
fn in_analyzed_method(tree: &SyntaxTree, id: NodeId) -> bool {
    let Some(method) = [
        "method_declaration",
        "constructor_declaration",
        "compact_constructor_declaration",
    ]
    .iter()
    .filter_map(|k| tree.ancestor_of_kind(id, k))
    .max() else {
        return false;
    };
    let mut cur = tree.node(method).parent;
    while let Some(p) = cur {
        let kind = tree.node(p).kind;
        if matches!(
            kind,
            "block"
                | "constructor_body"
                | "lambda_expression"
                | "method_declaration"
                | "constructor_declaration"
        ) {
            return false;
        }
        cur = tree.node(p).parent;
    }
    true
}

/// Byte offsets right after each block-level statement inside a method body
/// where a print statement can be inserted, ascending.
pub fn insertion_points(tree: &SyntaxTree) -> Vec<usize> {
    let mut out: Vec<usize> = tree
        .nodes()
        .iter()
        .enumerate()
        .filter(|(id, n)| {
            is_statement(n.kind)
                && !TERMINAL.contains(&n.kind)
                && n.parent
                    .is_some_and(|p| STATEMENT_PARENTS.contains(&tree.node(p).kind))
                && in_analyzed_method(tree, *id)
        })
        .map(|(_, n)| n.span.end)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Inserts the print statement after offset `at`.
pub fn insert_print(text: &str, at: usize, name: &str) -> (String, std::ops::Range<usize>) {
    let mut out = String::with_capacity(text.len() + PRINT_PREFIX.len() + name.len() + 2);
    out.push_str(&text[..at]);
    out.push_str(PRINT_PREFIX);
    let start = out.len();
    out.push_str(name);
    let end = out.len();
    out.push_str(");");
    out.push_str(&text[at..]);
    (out, start..end)
}

/// One variant and one example per snippet with a local declaration that
/// has an insertion point after it. Both the declaration and the point are
/// drawn with the snippet's seed; the label is whatever scoping gives.
pub fn gen_is_variable_declared(
    corpus: &Corpus,
    analyses: &[Analysis],
    seed: u64,
) -> (Vec<Variant>, Vec<ProbingExample>) {
    let per: Vec<(Variant, ProbingExample)> = per_snippet(corpus, analyses, |_, s, a| {
        let points = insertion_points(&a.tree);
        let candidates: Vec<&Declaration> = a
            .scopes
            .locals()
            .map(|(_, d)| d)
            .filter(|d| points.iter().any(|&p| p > d.end))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(snippet_seed(seed, &s.id, "insertion"));
        let Some(decl) = candidates.choose(&mut rng) else {
            return vec![];
        };
        let after: Vec<usize> = points.iter().copied().filter(|&p| p > decl.end).collect();
        let at = *after.choose(&mut rng).expect("candidate has a point");
        let name = decl.name.as_str();
        let label = a.scopes.visible_at(name, at);
        let (text, span) = insert_print(&s.text, at, name);
        let reparsed = parse(&text).ok().is_some_and(|t| {
            t.leaves()
                .into_iter()
                .any(|l| t.node(l).span == span && t.node(l).kind == "identifier")
        });
        if !reparsed {
            log::warn!("snippet {}: print insertion did not reparse", s.id);
            return vec![];
        }
        vec![(
            Variant {
                snippet_id: s.id.clone(),
                variant_id: VARIANT.into(),
                text,
            },
            ProbingExample::new(
                Task::IsVariableDeclared,
                &s.id,
                VARIANT,
                [span],
                label.into(),
            ),
        )]
    });
    let positives = per.iter().filter(|(_, e)| e.label == true.into()).count();
    log::info!(
        "is_variable_declared: {positives} declared of {}",
        per.len()
    );
    per.into_iter().unzip()
}
