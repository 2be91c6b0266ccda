use super::{per_snippet, Analysis, ClassVocabulary, Label, ProbingExample, Task, ORIGINAL};
use crate::corpus::Corpus;
use crate::syntax::{token_info, tree_depth};

pub fn gen_token_path_length(corpus: &Corpus, analyses: &[Analysis]) -> Vec<ProbingExample> {
    per_snippet(corpus, analyses, |_, s, a| {
        token_info(&a.tree)
            .into_iter()
            .map(|t| {
                ProbingExample::new(
                    Task::TokenPathLength,
                    &s.id,
                    ORIGINAL,
                    [t.span],
                    Label::Int(t.path.len() as i64),
                )
            })
            .collect()
    })
}

/// Tokens whose path type is outside `vocab` are dropped.
pub fn gen_token_path_type(
    corpus: &Corpus,
    analyses: &[Analysis],
    vocab: &ClassVocabulary,
) -> Vec<ProbingExample> {
    per_snippet(corpus, analyses, |_, s, a| {
        token_info(&a.tree)
            .into_iter()
            .filter_map(|t| {
                let class = t.path_type();
                vocab.contains(&class).then(|| {
                    ProbingExample::new(
                        Task::TokenPathType,
                        &s.id,
                        ORIGINAL,
                        [t.span],
                        Label::Class(class),
                    )
                })
            })
            .collect()
    })
}

pub fn gen_ast_depth(corpus: &Corpus, analyses: &[Analysis]) -> Vec<ProbingExample> {
    per_snippet(corpus, analyses, |_, s, a| {
        vec![ProbingExample::new(
            Task::AstDepth,
            &s.id,
            ORIGINAL,
            [],
            Label::Int(tree_depth(&a.tree) as i64),
        )]
    })
}

pub fn gen_token_is_identifier(corpus: &Corpus, analyses: &[Analysis]) -> Vec<ProbingExample> {
    per_snippet(corpus, analyses, |_, s, a| {
        token_info(&a.tree)
            .into_iter()
            .map(|t| {
                ProbingExample::new(
                    Task::TokenIsIdentifier,
                    &s.id,
                    ORIGINAL,
                    [t.span],
                    t.is_identifier.into(),
                )
            })
            .collect()
    })
}
