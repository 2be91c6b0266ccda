use super::{per_snippet, Analysis, Label, ProbingExample, Task, ORIGINAL};
use crate::corpus::{snippet_seed, Corpus};
use crate::semantics::{extract_dfg, positive_pairs, sample_negative_pairs, CandidatePair};

/// Positive pairs from the data-flow graph plus as many unconnected pairs as
/// the pool allows, up to the number of positives.
pub fn gen_dfg_edges(corpus: &Corpus, analyses: &[Analysis], seed: u64) -> Vec<ProbingExample> {
    per_snippet(corpus, analyses, |_, s, a| {
        let edges = extract_dfg(&a.tree, &a.scopes);
        let positives = positive_pairs(&a.tree, &edges);
        let negatives = sample_negative_pairs(
            &a.tree,
            &edges,
            positives.len(),
            snippet_seed(seed, &s.id, "dfg"),
        );
        positives
            .iter()
            .chain(&negatives)
            .map(|p: &CandidatePair| {
                ProbingExample::new(
                    Task::EdgePrediction,
                    &s.id,
                    ORIGINAL,
                    [a.tree.node(p.a).span.clone(), a.tree.node(p.b).span.clone()],
                    Label::Class(p.label.as_str().into()),
                )
            })
            .collect()
    })
}
