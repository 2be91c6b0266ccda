//! Probing dataset generators.
//!
//! Every task turns the corpus into [`ProbingExample`]s that point at byte
//! spans of a snippet variant. Variants are the original snippet text or a
//! transformed copy (corrupted brackets, an inserted print statement, a
//! masked variable name).

mod bracket;
mod declared;
mod edges;
mod naming;
mod syntactic;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::semantics::{build_scope_tree, ScopeTree};
use crate::syntax::{parse, SyntaxTree};

pub use bracket::{corrupted_count, gen_bracket_misused, BRACKET_RATE};
pub use declared::{gen_is_variable_declared, insertion_points, PRINT_PREFIX};
pub use edges::gen_dfg_edges;
pub use naming::{gen_variable_name, mask_name, PLACEHOLDER};
pub use syntactic::{
    gen_ast_depth, gen_token_is_identifier, gen_token_path_length, gen_token_path_type,
};

/// Vocabulary cap for the path-type and variable-name tasks.
pub const VOCAB_SIZE: usize = 15;

pub const ORIGINAL: &str = "orig";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    TokenPathLength,
    TokenPathType,
    AstDepth,
    BracketMisused,
    TokenIsIdentifier,
    EdgePrediction,
    IsVariableDeclared,
    VariableName,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::TokenPathLength,
        Task::TokenPathType,
        Task::AstDepth,
        Task::BracketMisused,
        Task::TokenIsIdentifier,
        Task::EdgePrediction,
        Task::IsVariableDeclared,
        Task::VariableName,
    ];

    /// Machine name, also the dataset file stem.
    pub fn name(self) -> &'static str {
        match self {
            Task::TokenPathLength => "token_path_length",
            Task::TokenPathType => "token_path_type",
            Task::AstDepth => "ast_depth",
            Task::BracketMisused => "bracket_misused",
            Task::TokenIsIdentifier => "token_is_identifier",
            Task::EdgePrediction => "edge_prediction",
            Task::IsVariableDeclared => "is_variable_declared",
            Task::VariableName => "variable_name",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Task::TokenPathLength => "Token Path Length",
            Task::TokenPathType => "Token Path Type",
            Task::AstDepth => "AST Depth",
            Task::BracketMisused => "Bracket Misused",
            Task::TokenIsIdentifier => "Token Is Identifier",
            Task::EdgePrediction => "Edge Prediction",
            Task::IsVariableDeclared => "Is Variable Declared",
            Task::VariableName => "Variable Name",
        }
    }

    pub fn is_regression(self) -> bool {
        matches!(self, Task::TokenPathLength | Task::AstDepth)
    }

    pub fn feature_mode(self) -> FeatureMode {
        match self {
            Task::EdgePrediction => FeatureMode::PairConcat,
            Task::VariableName => FeatureMode::OccurrenceMean,
            Task::AstDepth => FeatureMode::SnippetMean,
            _ => FeatureMode::PerSubtoken,
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.name())
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Task> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    PerSubtoken,
    PairConcat,
    OccurrenceMean,
    SnippetMean,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Class(String),
}

impl Label {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Label::Int(v) => Some(*v as f64),
            Label::Class(_) => None,
        }
    }

    /// Class key; integers are rendered in decimal.
    pub fn class_key(&self) -> String {
        match self {
            Label::Int(v) => v.to_string(),
            Label::Class(s) => s.clone(),
        }
    }
}

impl From<bool> for Label {
    fn from(b: bool) -> Self {
        Label::Int(b as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbingExample {
    pub task: Task,
    pub snippet_id: String,
    pub variant_id: String,
    pub target_spans: Vec<[usize; 2]>,
    pub feature_mode: FeatureMode,
    pub label: Label,
}

impl ProbingExample {
    pub(crate) fn new(
        task: Task,
        snippet_id: &str,
        variant_id: &str,
        spans: impl IntoIterator<Item = Range<usize>>,
        label: Label,
    ) -> Self {
        ProbingExample {
            task,
            snippet_id: snippet_id.to_owned(),
            variant_id: variant_id.to_owned(),
            target_spans: spans.into_iter().map(|r| [r.start, r.end]).collect(),
            feature_mode: task.feature_mode(),
            label,
        }
    }
}

/// A snippet text the model is run on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variant {
    pub snippet_id: String,
    pub variant_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVocabulary {
    pub task: Task,
    pub classes: Vec<String>,
    pub counts: Vec<usize>,
}

impl ClassVocabulary {
    pub fn contains(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }
}

/// Syntax tree and scopes of one snippet, index-aligned with the corpus.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub tree: SyntaxTree,
    pub scopes: ScopeTree,
}

pub fn analyze(corpus: &Corpus) -> Result<Vec<Analysis>> {
    corpus
        .snippets
        .par_iter()
        .map(|s| {
            let tree =
                parse(&s.text).map_err(|e| Error::Parse(format!("snippet {}: {e}", s.id)))?;
            let scopes = build_scope_tree(&tree);
            Ok(Analysis { tree, scopes })
        })
        .collect()
}

/// The `k` most frequent classes, ties broken lexicographically.
pub fn top_k(counts: &HashMap<String, usize>, k: usize) -> Vec<(String, usize)> {
    let mut ranked: Vec<_> = counts.iter().map(|(c, &n)| (c.clone(), n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

/// Class vocabulary for [`Task::TokenPathType`] (path types counted per
/// token) or [`Task::VariableName`] (local names counted per declaring
/// snippet).
pub fn build_class_vocab(analyses: &[Analysis], task: Task) -> Result<ClassVocabulary> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    match task {
        Task::TokenPathType => {
            for a in analyses {
                for t in crate::syntax::token_info(&a.tree) {
                    *counts.entry(t.path_type()).or_default() += 1;
                }
            }
        }
        Task::VariableName => {
            for a in analyses {
                for name in naming::local_names(a) {
                    *counts.entry(name).or_default() += 1;
                }
            }
        }
        other => {
            return Err(Error::Invalid(format!(
                "task {other} has no class vocabulary"
            )))
        }
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateTask {
            task: task.name().into(),
            reason: format!("{} distinct classes in corpus", counts.len()),
        });
    }
    let (classes, counts) = top_k(&counts, VOCAB_SIZE).into_iter().unzip();
    Ok(ClassVocabulary {
        task,
        classes,
        counts,
    })
}

/// Everything the generate command writes.
#[derive(Debug, Clone)]
pub struct Generated {
    pub variants: Vec<Variant>,
    pub datasets: BTreeMap<Task, Vec<ProbingExample>>,
    pub vocabularies: Vec<ClassVocabulary>,
}

/// Runs all eight generators. Output depends only on the corpus and `seed`.
pub fn generate_all(corpus: &Corpus, seed: u64) -> Result<Generated> {
    let analyses = analyze(corpus)?;
    let path_vocab = build_class_vocab(&analyses, Task::TokenPathType)?;
    let name_vocab = build_class_vocab(&analyses, Task::VariableName)?;

    let mut variants: Vec<Variant> = corpus
        .snippets
        .iter()
        .map(|s| Variant {
            snippet_id: s.id.clone(),
            variant_id: ORIGINAL.into(),
            text: s.text.clone(),
        })
        .collect();
    let mut datasets = BTreeMap::new();
    datasets.insert(
        Task::TokenPathLength,
        gen_token_path_length(corpus, &analyses),
    );
    datasets.insert(
        Task::TokenPathType,
        gen_token_path_type(corpus, &analyses, &path_vocab),
    );
    datasets.insert(Task::AstDepth, gen_ast_depth(corpus, &analyses));
    let (v, e) = gen_bracket_misused(corpus, &analyses, BRACKET_RATE, seed);
    variants.extend(v);
    datasets.insert(Task::BracketMisused, e);
    datasets.insert(
        Task::TokenIsIdentifier,
        gen_token_is_identifier(corpus, &analyses),
    );
    datasets.insert(Task::EdgePrediction, gen_dfg_edges(corpus, &analyses, seed));
    let (v, e) = gen_is_variable_declared(corpus, &analyses, seed);
    variants.extend(v);
    datasets.insert(Task::IsVariableDeclared, e);
    let (v, e) = gen_variable_name(corpus, &analyses, &name_vocab, PLACEHOLDER);
    variants.extend(v);
    datasets.insert(Task::VariableName, e);
    variants.sort();

    for (task, examples) in &datasets {
        log::info!("{task}: {} examples", examples.len());
    }
    Ok(Generated {
        variants,
        datasets,
        vocabularies: vec![path_vocab, name_vocab],
    })
}

/// Applies `f` to every snippet in parallel and flattens the results in
/// corpus order.
pub(crate) fn per_snippet<T, F>(corpus: &Corpus, analyses: &[Analysis], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &crate::corpus::Snippet, &Analysis) -> Vec<T> + Sync,
{
    let nested: Vec<Vec<T>> = corpus
        .snippets
        .par_iter()
        .zip(analyses.par_iter())
        .enumerate()
        .map(|(i, (s, a))| f(i, s, a))
        .collect();
    nested.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::java_methods;

    #[test]
    fn top_k_tie_break() {
        let counts = HashMap::from([
            ("a".to_string(), 5),
            ("b".to_string(), 5),
            ("c".to_string(), 1),
        ]);
        let top: Vec<_> = top_k(&counts, 2).into_iter().map(|(c, _)| c).collect();
        assert_eq!(top, ["a", "b"]);
        let counts = HashMap::from([
            ("b".to_string(), 5),
            ("a".to_string(), 5),
            ("c".to_string(), 9),
        ]);
        let top: Vec<_> = top_k(&counts, 2).into_iter().map(|(c, _)| c).collect();
        assert_eq!(top, ["c", "a"]);
    }

    #[test]
    fn vocab_capped_at_fifteen() {
        let corpus = Corpus::from_sources(java_methods(80, 2), None);
        let analyses = analyze(&corpus).unwrap();
        for task in [Task::TokenPathType, Task::VariableName] {
            let v = build_class_vocab(&analyses, task).unwrap();
            assert_eq!(v.classes.len(), VOCAB_SIZE, "{task}");
            assert!(v.counts.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn degenerate_vocab_is_an_error() {
        let corpus =
            Corpus::from_sources(vec![("a".into(), "void f() { int x = 1; }".into())], None);
        let analyses = analyze(&corpus).unwrap();
        assert!(matches!(
            build_class_vocab(&analyses, Task::VariableName),
            Err(Error::DegenerateTask { .. })
        ));
        assert!(build_class_vocab(&analyses, Task::AstDepth).is_err());
    }

    #[test]
    fn task_names_round_trip() {
        for t in Task::ALL {
            assert_eq!(t.name().parse::<Task>().unwrap(), t);
            assert_eq!(serde_json::to_value(t).unwrap(), t.name());
        }
    }

    #[test]
    fn labels_serialize_untagged() {
        assert_eq!(serde_json::to_string(&Label::Int(3)).unwrap(), "3");
        assert_eq!(
            serde_json::to_string(&Label::Class("1.2".into())).unwrap(),
            "\"1.2\""
        );
        assert_eq!(
            serde_json::from_str::<Label>("\"i\"").unwrap(),
            Label::Class("i".into())
        );
    }
}
