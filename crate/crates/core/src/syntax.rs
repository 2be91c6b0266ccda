//! Concrete syntax trees for Java snippets and the token-level structural
//! labels derived from them (path length, path type, depth, brackets).
//!
//! Trees come from the tree-sitter Java grammar and are copied into an
//! owned arena. String literals are collapsed into single leaves so that
//! every leaf corresponds to one lexical token.
//!
//! A snippet that is a bare method (not a full compilation unit) is parsed
//! inside a synthetic `class __W { ... }` wrapper. The wrapper is removed
//! again: the resulting root is a synthetic `program` node whose children
//! are the snippet's members, with spans relative to the original text.

use std::cell::RefCell;
use std::collections::HashSet;
use std::ops::Range;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Kind of the synthetic / grammar root node.
pub const ROOT_KIND: &str = "program";

/// Leaf kinds that count as identifiers for the identifier task.
pub const IDENTIFIER_KINDS: [&str; 2] = ["identifier", "type_identifier"];

/// Leaf kinds treated as constants.
pub const LITERAL_KINDS: [&str; 11] = [
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "hex_floating_point_literal",
    "string_literal",
    "character_literal",
    "true",
    "false",
    "null_literal",
];

pub const BRACKETS: [u8; 6] = *b"(){}[]";

const WRAPPER_PREFIX: &str = "class __W { ";
const WRAPPER_SUFFIX: &str = " }";

const TOP_LEVEL_DECLS: [&str; 8] = [
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
    "package_declaration",
    "import_declaration",
    "module_declaration",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: &'static str,
    /// Field name of this node within its parent, if the grammar assigns one.
    pub field: Option<&'static str>,
    pub span: Range<usize>,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxTree {
    text: String,
    nodes: Vec<Node>,
    root: NodeId,
}

/// Structural facts about one leaf token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenInfo {
    pub leaf_id: NodeId,
    pub span: Range<usize>,
    pub kind: &'static str,
    /// 1-based child indices from the root down to the leaf.
    pub path: Vec<usize>,
    pub is_identifier: bool,
}

impl TokenInfo {
    /// Dotted path type, e.g. `"1.2.1"`.
    pub fn path_type(&self) -> String {
        path_type(&self.path)
    }
}

pub fn path_type(path: &[usize]) -> String {
    path.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

pub fn is_identifier_kind(kind: &str) -> bool {
    IDENTIFIER_KINDS.contains(&kind)
}

pub fn is_literal_kind(kind: &str) -> bool {
    LITERAL_KINDS.contains(&kind)
}

thread_local! {
    static PARSER: RefCell<tree_sitter::Parser> = RefCell::new({
        let mut p = tree_sitter::Parser::new();
        p.set_language(language())
            .expect("tree-sitter-java grammar version is compatible");
        p
    });
}

fn ts_parse(text: &str) -> Result<tree_sitter::Tree> {
    PARSER
        .with(|p| p.borrow_mut().parse(text, None))
        .ok_or_else(|| Error::Parse("parser returned no tree".into()))
}

/// Parses a Java function, method or compilation unit.
pub fn parse(text: &str) -> Result<SyntaxTree> {
    if text.trim().is_empty() {
        return Err(Error::Parse("empty snippet".into()));
    }
    let direct = ts_parse(text)?;
    let root = direct.root_node();
    let mut cursor = root.walk();
    let is_unit = !root.has_error()
        && root.child_count() > 0
        && root
            .children(&mut cursor)
            .all(|c| TOP_LEVEL_DECLS.contains(&c.kind()));
    if is_unit {
        let mut b = Builder::new(text, 0);
        let root = b.copy(root, None, None);
        return Ok(b.finish(root));
    }

    let wrapped = format!("{WRAPPER_PREFIX}{text}{WRAPPER_SUFFIX}");
    let tree = ts_parse(&wrapped)?;
    let root = tree.root_node();
    if root.has_error() {
        return Err(Error::Parse(first_error(root)));
    }
    let body = root
        .child(0)
        .filter(|c| c.kind() == "class_declaration")
        .and_then(|c| c.child_by_field_name("body"))
        .ok_or_else(|| Error::Parse("wrapper did not produce a class body".into()))?;

    let mut b = Builder::new(text, WRAPPER_PREFIX.len());
    let root_id = b.push(Node {
        kind: ROOT_KIND,
        field: None,
        span: 0..text.len(),
        children: Vec::new(),
        parent: None,
    });
    let count = body.child_count() as usize;
    let mut members = Vec::new();
    for i in 0..count {
        let child = body.child(i as u32).expect("index in range");
        // Drop the wrapper's own braces.
        if (i == 0 && child.kind() == "{") || (i + 1 == count && child.kind() == "}") {
            continue;
        }
        if child.is_extra() {
            continue;
        }
        members.push(b.copy(child, Some(root_id), None));
    }
    if members.is_empty() {
        return Err(Error::Parse("snippet has no members".into()));
    }
    b.nodes[root_id].children = members;
    Ok(b.finish(root_id))
}

fn first_error(node: tree_sitter::Node) -> String {
    if node.is_error() || node.is_missing() {
        return format!("{} at byte {}", node.kind(), node.start_byte());
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if child.has_error() {
            return first_error(child);
        }
    }
    "syntax error".into()
}

fn language() -> &'static tree_sitter::Language {
    static LANGUAGE: OnceLock<tree_sitter::Language> = OnceLock::new();
    LANGUAGE.get_or_init(|| tree_sitter_java::LANGUAGE.into())
}

fn static_kind(ts: tree_sitter::Node) -> &'static str {
    language()
        .node_kind_for_id(ts.kind_id())
        .expect("node kinds come from the grammar")
}

/// Field names are drawn from the grammar's finite field table, so leaking
/// each distinct name once is bounded.
fn intern_field(name: &str) -> &'static str {
    static FIELDS: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
    let mut set = FIELDS
        .get_or_init(Default::default)
        .lock()
        .expect("field table lock");
    if let Some(&f) = set.get(name) {
        return f;
    }
    let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
    set.insert(leaked);
    leaked
}

struct Builder<'a> {
    text: &'a str,
    offset: usize,
    nodes: Vec<Node>,
}

impl<'a> Builder<'a> {
    fn new(text: &'a str, offset: usize) -> Self {
        Builder {
            text,
            offset,
            nodes: Vec::new(),
        }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn copy(
        &mut self,
        ts: tree_sitter::Node,
        parent: Option<NodeId>,
        field: Option<&'static str>,
    ) -> NodeId {
        let span = ts.start_byte() - self.offset..ts.end_byte() - self.offset;
        let id = self.push(Node {
            kind: static_kind(ts),
            field,
            span,
            children: Vec::new(),
            parent,
        });
        // String literals are single lexical tokens.
        if ts.kind() == "string_literal" {
            return id;
        }
        let mut children = Vec::with_capacity(ts.child_count() as usize);
        for i in 0..ts.child_count() {
            let child = ts.child(i).expect("index in range");
            if child.is_extra() {
                continue;
            }
            let field = ts.field_name_for_child(i).map(intern_field);
            children.push(self.copy(child, Some(id), field));
        }
        self.nodes[id].children = children;
        id
    }

    fn finish(self, root: NodeId) -> SyntaxTree {
        SyntaxTree {
            text: self.text.to_owned(),
            nodes: self.nodes,
            root,
        }
    }
}

impl SyntaxTree {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_text(&self, id: NodeId) -> &str {
        &self.text[self.nodes[id].span.clone()]
    }

    /// First child carrying the given field name.
    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].field == Some(field))
    }

    pub fn children_by_field<'s>(
        &'s self,
        id: NodeId,
        field: &'s str,
    ) -> impl Iterator<Item = NodeId> + 's {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .filter(move |&c| self.nodes[c].field == Some(field))
    }

    /// Leaf ids in source order.
    pub fn leaves(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                out.push(id);
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    /// Walks `path` (1-based child indices) from the root.
    pub fn follow(&self, path: &[usize]) -> Option<NodeId> {
        let mut cur = self.root;
        for &i in path {
            cur = *self.nodes[cur].children.get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// Nearest ancestor (inclusive) with the given kind.
    pub fn ancestor_of_kind(&self, id: NodeId, kind: &str) -> Option<NodeId> {
        let mut cur = Some(id);
        while let Some(c) = cur {
            if self.nodes[c].kind == kind {
                return Some(c);
            }
            cur = self.nodes[c].parent;
        }
        None
    }

    /// Golden-file form: nested `{"kind","span","children"}` objects.
    pub fn to_json(&self) -> Value {
        self.node_json(self.root)
    }

    fn node_json(&self, id: NodeId) -> Value {
        let n = &self.nodes[id];
        json!({
            "kind": n.kind,
            "span": [n.span.start, n.span.end],
            "children": n.children.iter().map(|&c| self.node_json(c)).collect::<Vec<_>>(),
        })
    }

    /// Kind-labelled shape, ignoring spans.
    pub fn shape(&self) -> Value {
        fn go(t: &SyntaxTree, id: NodeId) -> Value {
            let n = &t.nodes[id];
            if n.is_leaf() {
                json!(n.kind)
            } else {
                json!([
                    n.kind,
                    n.children.iter().map(|&c| go(t, c)).collect::<Vec<_>>()
                ])
            }
        }
        go(self, self.root)
    }
}

/// One entry per leaf, in source order.
pub fn token_info(tree: &SyntaxTree) -> Vec<TokenInfo> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_tokens(tree, tree.root, &mut path, &mut out);
    out
}

fn collect_tokens(tree: &SyntaxTree, id: NodeId, path: &mut Vec<usize>, out: &mut Vec<TokenInfo>) {
    let node = tree.node(id);
    if node.is_leaf() {
        out.push(TokenInfo {
            leaf_id: id,
            span: node.span.clone(),
            kind: node.kind,
            path: path.clone(),
            is_identifier: is_identifier_kind(node.kind),
        });
        return;
    }
    for (i, &child) in node.children.iter().enumerate() {
        path.push(i + 1);
        collect_tokens(tree, child, path, out);
        path.pop();
    }
}

/// Maximum root-to-leaf path length; the root itself has depth 0.
pub fn tree_depth(tree: &SyntaxTree) -> usize {
    fn go(t: &SyntaxTree, id: NodeId) -> usize {
        t.node(id)
            .children
            .iter()
            .map(|&c| 1 + go(t, c))
            .max()
            .unwrap_or(0)
    }
    go(tree, tree.root)
}

/// Leaves whose text is a single bracket character, in source order.
pub fn bracket_leaves(tree: &SyntaxTree) -> Vec<NodeId> {
    tree.leaves()
        .into_iter()
        .filter(|&id| {
            let t = tree.node_text(id).as_bytes();
            t.len() == 1 && BRACKETS.contains(&t[0])
        })
        .collect()
}
