//! Data-flow edges between variable tokens.
//!
//! Method bodies are lowered to a small structured IR ([`Stmt`]) whose
//! atomic statements carry ordered [`Action`]s: plain variable reads and
//! definitions. Reaching definitions are computed on a statement-level CFG
//! built from that IR with a worklist fixpoint, and edges are emitted from
//! the result:
//!
//! * `comesFrom`: reaching definition -> variable read, and literal
//!   initializer -> defined variable.
//! * `computedFrom`: reaching definition of every variable read on the
//!   right-hand side -> defined variable.
//!
//! Only simple-name variables take part; fields, array elements and calls
//! are opaque. `switch` and `try` bodies are treated as straight-line code,
//! and `break`/`continue`/`return` do not alter control flow.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::scope::{DeclId, DeclKind, ScopeTree};
use crate::syntax::{is_literal_kind, NodeId, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "comesFrom")]
    ComesFrom,
    #[serde(rename = "computedFrom")]
    ComputedFrom,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::ComesFrom => "comesFrom",
            EdgeKind::ComputedFrom => "computedFrom",
        }
    }
}

/// Value flows from `src` to `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DfgEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
}

/// Fixture form of an edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src_span: [usize; 2],
    pub dst_span: [usize; 2],
    pub kind: EdgeKind,
}

impl DfgEdge {
    pub fn record(&self, tree: &SyntaxTree) -> EdgeRecord {
        let s = &tree.node(self.src).span;
        let d = &tree.node(self.dst).span;
        EdgeRecord {
            src_span: [s.start, s.end],
            dst_span: [d.start, d.end],
            kind: self.kind,
        }
    }
}

/// Identity of a variable: its resolved declaration, or its bare name when
/// no local declaration is visible (fields, undeclared names).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    Decl(DeclId),
    Free(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub leaf: NodeId,
    pub var: VarKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// A read of `var` at `leaf`.
    Use { leaf: NodeId, var: VarKey },
    /// `var` receives a new value at `target`, computed from `operands`
    /// (read before the write) or from a single literal.
    Def {
        target: NodeId,
        var: VarKey,
        operands: Vec<Operand>,
        literal: Option<NodeId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Atom(Vec<Action>),
    Seq(Vec<Stmt>),
    If {
        cond: Vec<Action>,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    /// `test_first` loops evaluate `cond` before every iteration (`while`,
    /// `for`); otherwise the body runs once before the first test (`do`).
    Loop {
        cond: Vec<Action>,
        body: Box<Stmt>,
        test_first: bool,
    },
}

impl Stmt {
    /// All actions in source order.
    pub fn actions(&self) -> Vec<&Action> {
        let mut out = Vec::new();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions<'a>(&'a self, out: &mut Vec<&'a Action>) {
        match self {
            Stmt::Atom(a) => out.extend(a.iter()),
            Stmt::Seq(items) => items.iter().for_each(|s| s.collect_actions(out)),
            Stmt::If { cond, then, els } => {
                out.extend(cond.iter());
                then.collect_actions(out);
                if let Some(e) = els {
                    e.collect_actions(out);
                }
            }
            Stmt::Loop {
                cond,
                body,
                test_first,
            } => {
                if *test_first {
                    out.extend(cond.iter());
                    body.collect_actions(out);
                } else {
                    body.collect_actions(out);
                    out.extend(cond.iter());
                }
            }
        }
    }

    /// Number of statements, counting compound statements once each.
    pub fn statement_count(&self) -> usize {
        match self {
            Stmt::Atom(_) => 1,
            Stmt::Seq(items) => items.iter().map(Stmt::statement_count).sum(),
            Stmt::If { then, els, .. } => {
                1 + then.statement_count() + els.as_ref().map_or(0, |e| e.statement_count())
            }
            Stmt::Loop { body, .. } => 1 + body.statement_count(),
        }
    }
}

/// Lowered form of every method and constructor body in a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub bodies: Vec<Stmt>,
}

/// Per-read reaching definitions, keyed by the read's leaf; operand reads
/// are keyed by `(defined target, operand leaf)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Reaching {
    pub at_use: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pub at_operand: BTreeMap<(NodeId, NodeId), BTreeSet<NodeId>>,
}

pub type DefState = BTreeMap<VarKey, BTreeSet<NodeId>>;

impl Reaching {
    /// Applies `actions` to `state`, recording what each read sees.
    pub fn transfer(&mut self, actions: &[Action], state: &mut DefState) {
        for action in actions {
            match action {
                Action::Use { leaf, var } => {
                    let defs = state.get(var).cloned().unwrap_or_default();
                    self.at_use.entry(*leaf).or_default().extend(defs);
                }
                Action::Def {
                    target,
                    var,
                    operands,
                    ..
                } => {
                    for op in operands {
                        let defs = state.get(&op.var).cloned().unwrap_or_default();
                        self.at_operand
                            .entry((*target, op.leaf))
                            .or_default()
                            .extend(defs);
                    }
                    state.insert(var.clone(), BTreeSet::from([*target]));
                }
            }
        }
    }
}

/// Lowers all method bodies of `tree`.
pub fn lower(tree: &SyntaxTree, scopes: &ScopeTree) -> Program {
    let l = Lowerer { tree, scopes };
    let mut bodies = Vec::new();
    l.collect_methods(tree.root(), &mut bodies);
    Program { bodies }
}

/// Data-flow edges of `tree`, sorted and free of duplicates.
pub fn extract_dfg(tree: &SyntaxTree, scopes: &ScopeTree) -> Vec<DfgEdge> {
    let program = lower(tree, scopes);
    let reaching = reaching_definitions(&program);
    edges_from(&program, &reaching)
}

/// Worklist reaching-definitions analysis over the CFG of each body.
pub fn reaching_definitions(program: &Program) -> Reaching {
    let mut result = Reaching::default();
    for body in &program.bodies {
        let mut cfg = Cfg::default();
        let entry = cfg.add(&[]);
        cfg.build(body, vec![entry]);
        cfg.solve(&mut result);
    }
    result
}

/// Turns reaching definitions into edges. Self-edges are dropped.
pub fn edges_from(program: &Program, reaching: &Reaching) -> Vec<DfgEdge> {
    let mut edges = BTreeSet::new();
    for body in &program.bodies {
        for action in body.actions() {
            if let Action::Def {
                target,
                literal: Some(lit),
                ..
            } = action
            {
                edges.insert(DfgEdge {
                    src: *lit,
                    dst: *target,
                    kind: EdgeKind::ComesFrom,
                });
            }
        }
    }
    for (&leaf, defs) in &reaching.at_use {
        for &d in defs {
            if d != leaf {
                edges.insert(DfgEdge {
                    src: d,
                    dst: leaf,
                    kind: EdgeKind::ComesFrom,
                });
            }
        }
    }
    for (&(target, _), defs) in &reaching.at_operand {
        for &d in defs {
            if d != target {
                edges.insert(DfgEdge {
                    src: d,
                    dst: target,
                    kind: EdgeKind::ComputedFrom,
                });
            }
        }
    }
    edges.into_iter().collect()
}

#[derive(Default)]
struct Cfg<'a> {
    nodes: Vec<&'a [Action]>,
    preds: Vec<Vec<usize>>,
}

impl<'a> Cfg<'a> {
    fn add(&mut self, actions: &'a [Action]) -> usize {
        self.nodes.push(actions);
        self.preds.push(Vec::new());
        self.nodes.len() - 1
    }

    fn link(&mut self, from: &[usize], to: usize) {
        self.preds[to].extend_from_slice(from);
    }

    /// Adds `stmt` after `preds`; returns its exit nodes.
    fn build(&mut self, stmt: &'a Stmt, preds: Vec<usize>) -> Vec<usize> {
        match stmt {
            Stmt::Atom(actions) => {
                let n = self.add(actions);
                self.link(&preds, n);
                vec![n]
            }
            Stmt::Seq(items) => items.iter().fold(preds, |p, s| self.build(s, p)),
            Stmt::If { cond, then, els } => {
                let c = self.add(cond);
                self.link(&preds, c);
                let mut exits = self.build(then, vec![c]);
                match els {
                    Some(e) => exits.extend(self.build(e, vec![c])),
                    None => exits.push(c),
                }
                exits
            }
            Stmt::Loop {
                cond,
                body,
                test_first: true,
            } => {
                let c = self.add(cond);
                self.link(&preds, c);
                let body_exits = self.build(body, vec![c]);
                self.link(&body_exits, c);
                vec![c]
            }
            Stmt::Loop {
                cond,
                body,
                test_first: false,
            } => {
                let head = self.add(&[]);
                self.link(&preds, head);
                let body_exits = self.build(body, vec![head]);
                let c = self.add(cond);
                self.link(&body_exits, c);
                self.link(&[c], head);
                vec![c]
            }
        }
    }

    fn solve(&self, result: &mut Reaching) {
        let n = self.nodes.len();
        let mut succs = vec![Vec::new(); n];
        for (to, preds) in self.preds.iter().enumerate() {
            for &p in preds {
                succs[p].push(to);
            }
        }
        let mut out: Vec<DefState> = vec![DefState::new(); n];
        let mut queued = vec![true; n];
        let mut work: std::collections::VecDeque<usize> = (0..n).collect();
        let mut scratch = Reaching::default();
        while let Some(node) = work.pop_front() {
            queued[node] = false;
            let mut state = self.input(node, &out);
            scratch.transfer(self.nodes[node], &mut state);
            if state != out[node] {
                out[node] = state;
                for &s in &succs[node] {
                    if !queued[s] {
                        queued[s] = true;
                        work.push_back(s);
                    }
                }
            }
        }
        for node in 0..n {
            let mut state = self.input(node, &out);
            result.transfer(self.nodes[node], &mut state);
        }
    }

    fn input(&self, node: usize, out: &[DefState]) -> DefState {
        let mut state = DefState::new();
        for &p in &self.preds[node] {
            for (var, defs) in &out[p] {
                state
                    .entry(var.clone())
                    .or_default()
                    .extend(defs.iter().copied());
            }
        }
        state
    }
}

struct Lowerer<'t> {
    tree: &'t SyntaxTree,
    scopes: &'t ScopeTree,
}

/// Accumulates actions; while a definition's right-hand side is being
/// walked, variable reads go to the innermost operand frame instead.
#[derive(Default)]
struct Sink {
    actions: Vec<Action>,
    frames: Vec<Vec<Operand>>,
}

impl Sink {
    fn read(&mut self, leaf: NodeId, var: VarKey) {
        match self.frames.last_mut() {
            Some(frame) => frame.push(Operand { leaf, var }),
            None => self.actions.push(Action::Use { leaf, var }),
        }
    }
}

impl Lowerer<'_> {
    fn collect_methods(&self, id: NodeId, out: &mut Vec<Stmt>) {
        let node = self.tree.node(id);
        match node.kind {
            "method_declaration"
            | "constructor_declaration"
            | "compact_constructor_declaration" => {
                if let Some(body) = self.tree.child_by_field(id, "body") {
                    let mut items = vec![Stmt::Atom(self.parameter_defs(id))];
                    items.push(self.block(body));
                    out.push(Stmt::Seq(items));
                }
            }
            _ => {
                for &c in &node.children {
                    self.collect_methods(c, out);
                }
            }
        }
    }

    fn parameter_defs(&self, method: NodeId) -> Vec<Action> {
        self.scopes
            .declarations
            .iter()
            .enumerate()
            .filter(|(_, d)| {
                d.kind == DeclKind::Parameter
                    && self
                        .tree
                        .node(d.node)
                        .parent
                        .is_some_and(|p| self.tree.node(p).parent == Some(method))
            })
            .map(|(i, d)| Action::Def {
                target: d.name_leaf,
                var: VarKey::Decl(i),
                operands: Vec::new(),
                literal: None,
            })
            .collect()
    }

    fn var_of(&self, leaf: NodeId) -> Option<VarKey> {
        let decl = match self.scopes.declared_by(leaf) {
            Some(d) => Some(d),
            None => self
                .scopes
                .resolve(self.tree.node_text(leaf), self.tree.node(leaf).span.start),
        };
        match decl {
            Some(d) if self.scopes.declarations[d].kind == DeclKind::LambdaParameter => None,
            Some(d) => Some(VarKey::Decl(d)),
            None => Some(VarKey::Free(self.tree.node_text(leaf).to_owned())),
        }
    }

    fn block(&self, id: NodeId) -> Stmt {
        Stmt::Seq(
            self.tree
                .node(id)
                .children
                .iter()
                .filter(|&&c| !self.tree.node(c).is_leaf())
                .map(|&c| self.stmt(c))
                .collect(),
        )
    }

    fn atom_expr(&self, id: NodeId) -> Vec<Action> {
        let mut sink = Sink::default();
        self.expr(id, &mut sink);
        sink.actions
    }

    fn stmt(&self, id: NodeId) -> Stmt {
        let t = self.tree;
        match t.node(id).kind {
            "block" | "constructor_body" => self.block(id),
            "local_variable_declaration" => {
                let mut sink = Sink::default();
                self.local_declaration(id, &mut sink);
                Stmt::Atom(sink.actions)
            }
            "if_statement" => Stmt::If {
                cond: t
                    .child_by_field(id, "condition")
                    .map(|c| self.atom_expr(c))
                    .unwrap_or_default(),
                then: Box::new(
                    t.child_by_field(id, "consequence")
                        .map_or(Stmt::Seq(Vec::new()), |c| self.stmt(c)),
                ),
                els: t
                    .child_by_field(id, "alternative")
                    .map(|c| Box::new(self.stmt(c))),
            },
            "while_statement" | "do_statement" => Stmt::Loop {
                cond: t
                    .child_by_field(id, "condition")
                    .map(|c| self.atom_expr(c))
                    .unwrap_or_default(),
                body: Box::new(
                    t.child_by_field(id, "body")
                        .map_or(Stmt::Seq(Vec::new()), |b| self.stmt(b)),
                ),
                test_first: t.node(id).kind == "while_statement",
            },
            "for_statement" => {
                let mut init = Sink::default();
                for i in t.children_by_field(id, "init") {
                    if t.node(i).kind == "local_variable_declaration" {
                        self.local_declaration(i, &mut init);
                    } else {
                        self.expr(i, &mut init);
                    }
                }
                let cond = t
                    .child_by_field(id, "condition")
                    .map(|c| self.atom_expr(c))
                    .unwrap_or_default();
                let mut update = Sink::default();
                for u in t.children_by_field(id, "update") {
                    self.expr(u, &mut update);
                }
                let body = t
                    .child_by_field(id, "body")
                    .map_or(Stmt::Seq(Vec::new()), |b| self.stmt(b));
                Stmt::Seq(vec![
                    Stmt::Atom(init.actions),
                    Stmt::Loop {
                        cond,
                        body: Box::new(Stmt::Seq(vec![body, Stmt::Atom(update.actions)])),
                        test_first: true,
                    },
                ])
            }
            "enhanced_for_statement" => {
                let mut cond = Sink::default();
                if let (Some(name), Some(value)) =
                    (t.child_by_field(id, "name"), t.child_by_field(id, "value"))
                {
                    cond.frames.push(Vec::new());
                    self.expr(value, &mut cond);
                    let operands = cond.frames.pop().unwrap_or_default();
                    if let Some(var) = self.var_of(name) {
                        cond.actions.push(Action::Def {
                            target: name,
                            var,
                            operands,
                            literal: None,
                        });
                    }
                }
                Stmt::Loop {
                    cond: cond.actions,
                    body: Box::new(
                        t.child_by_field(id, "body")
                            .map_or(Stmt::Seq(Vec::new()), |b| self.stmt(b)),
                    ),
                    test_first: true,
                }
            }
            "try_statement" | "try_with_resources_statement" => {
                let mut items = Vec::new();
                if let Some(res) = t.child_by_field(id, "resources") {
                    let mut sink = Sink::default();
                    for &r in &t.node(res).children {
                        if t.node(r).kind == "resource" {
                            self.resource(r, &mut sink);
                        }
                    }
                    items.push(Stmt::Atom(sink.actions));
                }
                for &c in &t.node(id).children {
                    match t.node(c).kind {
                        "block" => items.push(self.block(c)),
                        "catch_clause" => items.push(self.catch_clause(c)),
                        "finally_clause" => {
                            for &b in &t.node(c).children {
                                if t.node(b).kind == "block" {
                                    items.push(self.block(b));
                                }
                            }
                        }
                        _ => {}
                    }
                }
                Stmt::Seq(items)
            }
            "switch_expression" | "switch_statement" => {
                let mut items = Vec::new();
                if let Some(c) = t.child_by_field(id, "condition") {
                    items.push(Stmt::Atom(self.atom_expr(c)));
                }
                if let Some(body) = t.child_by_field(id, "body") {
                    for &group in &t.node(body).children {
                        for &s in &t.node(group).children {
                            let kind = t.node(s).kind;
                            if kind == "switch_label" || t.node(s).is_leaf() {
                                continue;
                            }
                            if is_statement(kind) {
                                items.push(self.stmt(s));
                            } else {
                                items.push(Stmt::Atom(self.atom_expr(s)));
                            }
                        }
                    }
                }
                Stmt::Seq(items)
            }
            "labeled_statement" => Stmt::Seq(
                t.node(id)
                    .children
                    .iter()
                    .filter(|&&c| is_statement(t.node(c).kind))
                    .map(|&c| self.stmt(c))
                    .collect(),
            ),
            "synchronized_statement" => {
                let mut items = Vec::new();
                for &c in &t.node(id).children {
                    match t.node(c).kind {
                        "block" => items.push(self.block(c)),
                        "parenthesized_expression" => items.push(Stmt::Atom(self.atom_expr(c))),
                        _ => {}
                    }
                }
                Stmt::Seq(items)
            }
            "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "local_class_declaration"
            | "break_statement"
            | "continue_statement"
            | ";" => Stmt::Atom(Vec::new()),
            _ => Stmt::Atom(self.atom_expr(id)),
        }
    }

    fn catch_clause(&self, id: NodeId) -> Stmt {
        let t = self.tree;
        let mut items = Vec::new();
        for &c in &t.node(id).children {
            match t.node(c).kind {
                "catch_formal_parameter" => {
                    if let Some(name) = t.child_by_field(c, "name") {
                        if let Some(var) = self.var_of(name) {
                            items.push(Stmt::Atom(vec![Action::Def {
                                target: name,
                                var,
                                operands: Vec::new(),
                                literal: None,
                            }]));
                        }
                    }
                }
                "block" => items.push(self.block(c)),
                _ => {}
            }
        }
        Stmt::Seq(items)
    }

    fn resource(&self, id: NodeId, sink: &mut Sink) {
        let t = self.tree;
        match (t.child_by_field(id, "name"), t.child_by_field(id, "value")) {
            (Some(name), Some(value)) => self.define(name, Some(value), sink),
            _ => {
                for &c in &t.node(id).children {
                    self.expr(c, sink);
                }
            }
        }
    }

    fn local_declaration(&self, id: NodeId, sink: &mut Sink) {
        let t = self.tree;
        for d in t.children_by_field(id, "declarator") {
            if let Some(name) = t.child_by_field(d, "name") {
                let value = t.child_by_field(d, "value");
                if value.is_some() {
                    self.define(name, value, sink);
                }
            }
        }
    }

    /// Definition of the variable at `target` from the expression `value`.
    fn define(&self, target: NodeId, value: Option<NodeId>, sink: &mut Sink) {
        sink.frames.push(Vec::new());
        if let Some(v) = value {
            self.expr(v, sink);
        }
        let operands = sink.frames.pop().unwrap_or_default();
        let literal = match value {
            Some(v) if operands.is_empty() => self.literal_of(v),
            _ => None,
        };
        if let Some(var) = self.var_of(target) {
            sink.actions.push(Action::Def {
                target,
                var: var.clone(),
                operands,
                literal,
            });
            // An enclosing definition reads the assigned value.
            if let Some(outer) = sink.frames.last_mut() {
                outer.push(Operand { leaf: target, var });
            }
        }
    }

    fn literal_of(&self, mut id: NodeId) -> Option<NodeId> {
        let t = self.tree;
        loop {
            let node = t.node(id);
            match node.kind {
                "parenthesized_expression" => {
                    id = *node
                        .children
                        .iter()
                        .find(|&&c| !matches!(t.node(c).kind, "(" | ")"))?;
                }
                "unary_expression" if matches!(t.node_text(node.children[0]), "-" | "+") => {
                    id = t.child_by_field(id, "operand")?;
                }
                k if node.is_leaf() && is_literal_kind(k) => return Some(id),
                _ => return None,
            }
        }
    }

    fn expr(&self, id: NodeId, sink: &mut Sink) {
        let t = self.tree;
        let node = t.node(id);
        match node.kind {
            "identifier" => {
                if let Some(var) = self.var_of(id) {
                    sink.read(id, var);
                }
            }
            "assignment_expression" => {
                let (Some(left), Some(right)) =
                    (t.child_by_field(id, "left"), t.child_by_field(id, "right"))
                else {
                    return;
                };
                let op = t
                    .child_by_field(id, "operator")
                    .map_or("=", |o| t.node_text(o));
                if t.node(left).kind == "identifier" {
                    if let Some(var) = self.var_of(left) {
                        sink.frames.push(Vec::new());
                        if op != "=" {
                            sink.read(left, var.clone());
                        }
                        self.expr(right, sink);
                        let operands = sink.frames.pop().unwrap_or_default();
                        let literal = if op == "=" && operands.is_empty() {
                            self.literal_of(right)
                        } else {
                            None
                        };
                        sink.actions.push(Action::Def {
                            target: left,
                            var: var.clone(),
                            operands,
                            literal,
                        });
                        if let Some(outer) = sink.frames.last_mut() {
                            outer.push(Operand { leaf: left, var });
                        }
                        return;
                    }
                }
                self.expr(left, sink);
                self.expr(right, sink);
            }
            "update_expression" => {
                let target = node
                    .children
                    .iter()
                    .copied()
                    .find(|&c| !t.node(c).is_leaf() || t.node(c).kind == "identifier");
                match target {
                    Some(c) if t.node(c).kind == "identifier" => {
                        if let Some(var) = self.var_of(c) {
                            sink.actions.push(Action::Use {
                                leaf: c,
                                var: var.clone(),
                            });
                            sink.actions.push(Action::Def {
                                target: c,
                                var: var.clone(),
                                operands: Vec::new(),
                                literal: None,
                            });
                            if let Some(frame) = sink.frames.last_mut() {
                                frame.push(Operand { leaf: c, var });
                            }
                        }
                    }
                    Some(c) => self.expr(c, sink),
                    None => {}
                }
            }
            "method_invocation" => {
                for &c in &node.children {
                    match t.node(c).field {
                        Some("name") | Some("type_arguments") => {}
                        _ => self.expr(c, sink),
                    }
                }
            }
            "field_access" => {
                if let Some(obj) = t.child_by_field(id, "object") {
                    self.expr(obj, sink);
                }
            }
            "lambda_expression" => {
                if let Some(body) = t.child_by_field(id, "body") {
                    if t.node(body).kind != "block" {
                        self.expr(body, sink);
                    }
                }
            }
            "object_creation_expression" => {
                if let Some(args) = t.child_by_field(id, "arguments") {
                    self.expr(args, sink);
                }
                for &c in &node.children {
                    if t.node(c).kind != "class_body"
                        && t.node(c).field.is_none()
                        && !t.node(c).is_leaf()
                    {
                        self.expr(c, sink);
                    }
                }
            }
            "cast_expression" => {
                if let Some(v) = t.child_by_field(id, "value") {
                    self.expr(v, sink);
                }
            }
            "instanceof_expression" => {
                if let Some(l) = t.child_by_field(id, "left") {
                    self.expr(l, sink);
                }
            }
            "method_reference" | "class_literal" | "class_body" | "switch_label"
            | "scoped_identifier" | "annotation" | "marker_annotation" | "type_arguments"
            | "generic_type" => {}
            _ => {
                for &c in &node.children {
                    self.expr(c, sink);
                }
            }
        }
    }
}

fn is_statement(kind: &str) -> bool {
    kind.ends_with("_statement")
        || matches!(
            kind,
            "block" | "local_variable_declaration" | "local_class_declaration"
        )
}
