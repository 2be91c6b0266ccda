//! Block scopes and local declarations.

use std::ops::Range;

use serde::Serialize;

use crate::syntax::{NodeId, SyntaxTree};

pub type ScopeId = usize;
pub type DeclId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeKind {
    Method,
    Block,
    For,
    Catch,
    Lambda,
    Resources,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scope {
    pub kind: ScopeKind,
    /// Half-open byte range.
    pub range: Range<usize>,
    pub parent: Option<ScopeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKind {
    Local,
    Parameter,
    CatchParameter,
    ForEach,
    Resource,
    LambdaParameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Declaration {
    pub name: String,
    pub scope: ScopeId,
    /// The declaration is visible from this offset on.
    pub end: usize,
    pub name_leaf: NodeId,
    /// The declarator node (`variable_declarator`, `formal_parameter`, ...).
    pub node: NodeId,
    pub kind: DeclKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScopeTree {
    pub scopes: Vec<Scope>,
    pub declarations: Vec<Declaration>,
}

impl ScopeTree {
    /// True iff a declaration of `name` has ended at or before `offset` and
    /// its scope contains `offset`.
    pub fn visible_at(&self, name: &str, offset: usize) -> bool {
        self.declarations.iter().any(|d| {
            d.name == name && d.end <= offset && self.scopes[d.scope].range.contains(&offset)
        })
    }

    /// The declaration a use of `name` at `offset` refers to: the visible one
    /// in the innermost scope, latest declaration first.
    pub fn resolve(&self, name: &str, offset: usize) -> Option<DeclId> {
        self.declarations
            .iter()
            .enumerate()
            .filter(|(_, d)| {
                d.name == name && d.end <= offset && self.scopes[d.scope].range.contains(&offset)
            })
            .max_by_key(|(_, d)| (self.depth(d.scope), d.end))
            .map(|(i, _)| i)
    }

    /// Declaration introduced by this name leaf, if any.
    pub fn declared_by(&self, leaf: NodeId) -> Option<DeclId> {
        self.declarations.iter().position(|d| d.name_leaf == leaf)
    }

    pub fn depth(&self, mut scope: ScopeId) -> usize {
        let mut depth = 0;
        while let Some(p) = self.scopes[scope].parent {
            depth += 1;
            scope = p;
        }
        depth
    }

    pub fn locals(&self) -> impl Iterator<Item = (DeclId, &Declaration)> {
        self.declarations
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == DeclKind::Local)
    }
}

/// Builds scopes for every method, constructor, block, `for` header, catch
/// clause, lambda and resource list in the tree. Bodies of nested classes are
/// not entered.
pub fn build_scope_tree(tree: &SyntaxTree) -> ScopeTree {
    let mut b = ScopeBuilder {
        tree,
        out: ScopeTree::default(),
    };
    b.visit(tree.root(), None);
    b.out
}

struct ScopeBuilder<'t> {
    tree: &'t SyntaxTree,
    out: ScopeTree,
}

impl ScopeBuilder<'_> {
    fn open(&mut self, kind: ScopeKind, range: Range<usize>, parent: Option<ScopeId>) -> ScopeId {
        self.out.scopes.push(Scope {
            kind,
            range,
            parent,
        });
        self.out.scopes.len() - 1
    }

    fn declare(
        &mut self,
        name_leaf: NodeId,
        node: NodeId,
        end: usize,
        scope: ScopeId,
        kind: DeclKind,
    ) {
        self.out.declarations.push(Declaration {
            name: self.tree.node_text(name_leaf).to_owned(),
            scope,
            end,
            name_leaf,
            node,
            kind,
        });
    }

    fn visit_children(&mut self, id: NodeId, scope: Option<ScopeId>) {
        for &c in &self.tree.node(id).children {
            self.visit(c, scope);
        }
    }

    fn visit(&mut self, id: NodeId, scope: Option<ScopeId>) {
        let t = self.tree;
        let node = t.node(id);
        match node.kind {
            "method_declaration"
            | "constructor_declaration"
            | "compact_constructor_declaration" => {
                let Some(body) = t.child_by_field(id, "body") else {
                    return;
                };
                let start = t
                    .child_by_field(id, "parameters")
                    .map_or(t.node(body).span.start, |p| t.node(p).span.start);
                let s = self.open(ScopeKind::Method, start..t.node(body).span.end, scope);
                if let Some(params) = t.child_by_field(id, "parameters") {
                    self.declare_parameters(params, s, DeclKind::Parameter);
                }
                // The body block shares the method scope.
                self.visit_children(body, Some(s));
            }
            "block" | "switch_block" | "constructor_body" => {
                let s = self.open(ScopeKind::Block, node.span.clone(), scope);
                self.visit_children(id, Some(s));
            }
            "for_statement" => {
                let s = self.open(ScopeKind::For, node.span.clone(), scope);
                self.visit_children(id, Some(s));
            }
            "enhanced_for_statement" => {
                let s = self.open(ScopeKind::For, node.span.clone(), scope);
                if let Some(name) = t.child_by_field(id, "name") {
                    self.declare(name, id, t.node(name).span.end, s, DeclKind::ForEach);
                }
                self.visit_children(id, Some(s));
            }
            "catch_clause" => {
                let s = self.open(ScopeKind::Catch, node.span.clone(), scope);
                for &c in &node.children {
                    if t.node(c).kind == "catch_formal_parameter" {
                        if let Some(name) = t.child_by_field(c, "name") {
                            self.declare(name, c, t.node(c).span.end, s, DeclKind::CatchParameter);
                        }
                    }
                }
                self.visit_children(id, Some(s));
            }
            "try_with_resources_statement" => {
                let range = match (
                    t.child_by_field(id, "resources"),
                    t.child_by_field(id, "body"),
                ) {
                    (Some(r), Some(b)) => t.node(r).span.start..t.node(b).span.end,
                    _ => node.span.clone(),
                };
                let s = self.open(ScopeKind::Resources, range, scope);
                if let Some(res) = t.child_by_field(id, "resources") {
                    for &r in &t.node(res).children {
                        if t.node(r).kind == "resource" {
                            if let Some(name) = t.child_by_field(r, "name") {
                                self.declare(name, r, t.node(r).span.end, s, DeclKind::Resource);
                            }
                        }
                    }
                }
                for &c in &node.children {
                    // Catch and finally clauses cannot see the resources.
                    let outer = matches!(t.node(c).kind, "catch_clause" | "finally_clause");
                    self.visit(c, if outer { scope } else { Some(s) });
                }
            }
            "lambda_expression" => {
                let s = self.open(ScopeKind::Lambda, node.span.clone(), scope);
                if let Some(params) = t.child_by_field(id, "parameters") {
                    match t.node(params).kind {
                        "identifier" => self.declare(
                            params,
                            params,
                            t.node(params).span.end,
                            s,
                            DeclKind::LambdaParameter,
                        ),
                        _ => self.declare_parameters(params, s, DeclKind::LambdaParameter),
                    }
                }
                if let Some(body) = t.child_by_field(id, "body") {
                    if t.node(body).kind == "block" {
                        self.visit_children(body, Some(s));
                    } else {
                        self.visit(body, Some(s));
                    }
                }
            }
            "local_variable_declaration" => {
                if let Some(s) = scope {
                    for d in t.children_by_field(id, "declarator") {
                        if let Some(name) = t.child_by_field(d, "name") {
                            self.declare(name, d, t.node(d).span.end, s, DeclKind::Local);
                        }
                    }
                }
                self.visit_children(id, scope);
            }
            // Nested type bodies are out of reach of the enclosing method.
            "class_body" | "interface_body" | "enum_body" | "annotation_type_body"
                if scope.is_some() => {}
            _ => self.visit_children(id, scope),
        }
    }

    fn declare_parameters(&mut self, params: NodeId, scope: ScopeId, kind: DeclKind) {
        let t = self.tree;
        for &p in &t.node(params).children {
            match t.node(p).kind {
                "formal_parameter" | "spread_parameter" => {
                    let name = t.child_by_field(p, "name").or_else(|| {
                        // spread_parameter nests its name in a declarator
                        t.node(p)
                            .children
                            .iter()
                            .copied()
                            .find(|&c| t.node(c).kind == "variable_declarator")
                            .and_then(|d| t.child_by_field(d, "name"))
                    });
                    if let Some(name) = name {
                        self.declare(name, p, t.node(p).span.end, scope, kind);
                    }
                }
                "identifier" => self.declare(p, p, t.node(p).span.end, scope, kind),
                _ => {}
            }
        }
    }
}
