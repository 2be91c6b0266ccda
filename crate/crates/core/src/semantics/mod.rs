//! Data-flow and scope analysis over syntax trees.

pub mod dfg;
pub mod scope;

use std::collections::BTreeSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dfg::{extract_dfg, DfgEdge, EdgeKind};
pub use scope::{build_scope_tree, ScopeTree};

use crate::syntax::{is_literal_kind, NodeId, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "comesFrom")]
    ComesFrom,
    #[serde(rename = "computedFrom")]
    ComputedFrom,
}

impl PairLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PairLabel::None => "none",
            PairLabel::ComesFrom => "comesFrom",
            PairLabel::ComputedFrom => "computedFrom",
        }
    }
}

impl From<EdgeKind> for PairLabel {
    fn from(k: EdgeKind) -> Self {
        match k {
            EdgeKind::ComesFrom => PairLabel::ComesFrom,
            EdgeKind::ComputedFrom => PairLabel::ComputedFrom,
        }
    }
}

/// Two leaves in source order (`a` before `b`) with their edge label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CandidatePair {
    pub a: NodeId,
    pub b: NodeId,
    pub label: PairLabel,
}

fn ordered(tree: &SyntaxTree, x: NodeId, y: NodeId) -> (NodeId, NodeId) {
    if tree.node(x).span.start <= tree.node(y).span.start {
        (x, y)
    } else {
        (y, x)
    }
}

/// Positive pairs, one per connected unordered pair of leaves. When both
/// directions of a pair carry edges the first edge in sorted order wins.
pub fn positive_pairs(tree: &SyntaxTree, edges: &[DfgEdge]) -> Vec<CandidatePair> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for e in edges {
        let (a, b) = ordered(tree, e.src, e.dst);
        if seen.insert((a, b)) {
            out.push(CandidatePair {
                a,
                b,
                label: e.kind.into(),
            });
        } else {
            log::debug!("dropping parallel edge {e:?}");
        }
    }
    out.sort_by_key(|p| (tree.node(p.a).span.start, tree.node(p.b).span.start));
    out
}

/// Leaves eligible for negative pairs: identifiers and constants inside
/// method or constructor bodies.
pub fn pair_pool(tree: &SyntaxTree) -> Vec<NodeId> {
    let bodies: Vec<_> = tree
        .nodes()
        .iter()
        .filter(|n| {
            matches!(n.kind, "block" | "constructor_body")
                && n.parent.is_some_and(|p| {
                    matches!(
                        tree.node(p).kind,
                        "method_declaration"
                            | "constructor_declaration"
                            | "compact_constructor_declaration"
                    )
                })
        })
        .map(|n| n.span.clone())
        .collect();
    tree.leaves()
        .into_iter()
        .filter(|&l| {
            let node = tree.node(l);
            (node.kind == "identifier" || is_literal_kind(node.kind))
                && bodies
                    .iter()
                    .any(|b| b.start <= node.span.start && node.span.end <= b.end)
        })
        .collect()
}

/// Uniformly samples up to `count` unconnected leaf pairs without
/// replacement.
pub fn sample_negative_pairs(
    tree: &SyntaxTree,
    edges: &[DfgEdge],
    count: usize,
    seed: u64,
) -> Vec<CandidatePair> {
    if count == 0 {
        return Vec::new();
    }
    let connected: BTreeSet<(NodeId, NodeId)> = edges
        .iter()
        .flat_map(|e| [(e.src, e.dst), (e.dst, e.src)])
        .collect();
    let pool = pair_pool(tree);
    let mut candidates = Vec::new();
    for (i, &a) in pool.iter().enumerate() {
        for &b in &pool[i + 1..] {
            if !connected.contains(&(a, b)) {
                candidates.push((a, b));
            }
        }
    }
    let take = count.min(candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, candidates.len(), take).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|i| CandidatePair {
            a: candidates[i].0,
            b: candidates[i].1,
            label: PairLabel::None,
        })
        .collect()
}
