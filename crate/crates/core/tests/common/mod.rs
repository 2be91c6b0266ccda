#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use probe_forge::semantics::dfg::{lower, Action, DfgEdge, EdgeKind, Program, Stmt, VarKey};
use probe_forge::semantics::scope::build_scope_tree;
use probe_forge::syntax::{parse, NodeId, SyntaxTree};

/// Times a loop body is unrolled by the path oracle. Three passes cover
/// every def-use chain of the small suite programs, nested loops included.
pub const UNROLL: usize = 3;

type Trace<'a> = Vec<&'a [Action]>;

fn paths(stmt: &Stmt) -> Vec<Trace<'_>> {
    match stmt {
        Stmt::Atom(a) => vec![vec![a.as_slice()]],
        Stmt::Seq(items) => items.iter().fold(vec![vec![]], |acc, s| {
            let tails = paths(s);
            let mut out = Vec::with_capacity(acc.len() * tails.len());
            for head in &acc {
                for tail in &tails {
                    let mut p = head.clone();
                    p.extend(tail.iter().copied());
                    out.push(p);
                }
            }
            out
        }),
        Stmt::If { cond, then, els } => {
            let mut out = Vec::new();
            let mut branches = paths(then);
            match els {
                Some(e) => branches.extend(paths(e)),
                None => branches.push(vec![]),
            }
            for b in branches {
                let mut p = vec![cond.as_slice()];
                p.extend(b);
                out.push(p);
            }
            out
        }
        Stmt::Loop {
            cond,
            body,
            test_first,
        } => {
            let body_paths = paths(body);
            // one iteration = body then test
            let iter: Vec<Trace> = body_paths
                .iter()
                .map(|b| {
                    let mut p = b.clone();
                    p.push(cond.as_slice());
                    p
                })
                .collect();
            let mut out = Vec::new();
            let mut prefix: Vec<Trace> = if *test_first {
                vec![vec![cond.as_slice()]]
            } else {
                iter.clone()
            };
            for _ in 0..=UNROLL {
                out.extend(prefix.iter().cloned());
                prefix = prefix
                    .iter()
                    .flat_map(|p| {
                        iter.iter().map(move |i| {
                            let mut q = p.clone();
                            q.extend(i.iter().copied());
                            q
                        })
                    })
                    .collect();
            }
            out
        }
    }
}

/// Data-flow edges found by walking every control-flow path of every body
/// (loops unrolled up to [`UNROLL`] times) and tracking the last write of
/// each variable.
pub fn oracle_edges(program: &Program) -> BTreeSet<DfgEdge> {
    let mut edges = BTreeSet::new();
    let mut add = |src: NodeId, dst: NodeId, kind| {
        if src != dst {
            edges.insert(DfgEdge { src, dst, kind });
        }
    };
    for body in &program.bodies {
        for path in paths(body) {
            let mut last: BTreeMap<&VarKey, NodeId> = BTreeMap::new();
            for action in path.into_iter().flatten() {
                match action {
                    Action::Use { leaf, var } => {
                        if let Some(&d) = last.get(var) {
                            add(d, *leaf, EdgeKind::ComesFrom);
                        }
                    }
                    Action::Def {
                        target,
                        var,
                        operands,
                        literal,
                    } => {
                        for op in operands {
                            if let Some(&d) = last.get(&op.var) {
                                add(d, *target, EdgeKind::ComputedFrom);
                            }
                        }
                        if let Some(lit) = literal {
                            add(*lit, *target, EdgeKind::ComesFrom);
                        }
                        last.insert(var, *target);
                    }
                }
            }
        }
    }
    edges
}

pub fn analyze(text: &str) -> (SyntaxTree, Program) {
    let tree = parse(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    let scopes = build_scope_tree(&tree);
    let program = lower(&tree, &scopes);
    (tree, program)
}

/// `kind src@offset -> dst@offset`, for readable diffs.
pub fn render(tree: &SyntaxTree, e: &DfgEdge) -> String {
    let s = tree.node(e.src).span.start;
    let d = tree.node(e.dst).span.start;
    format!(
        "{} {}@{s} -> {}@{d}",
        e.kind.as_str(),
        tree.node_text(e.src),
        tree.node_text(e.dst)
    )
}

pub const FOO: &str = "public static void foo () { int x1 = 1 ; int y1 = 0 ; if (x1 == 0) { y2 = x1 + y1; } else { x3 = y1 ; } }";

/// The edges annotated on the listing, as (kind, src offset, dst offset).
pub fn foo_expected() -> BTreeSet<(EdgeKind, usize, usize)> {
    let at =
        |needle: &str, skip: usize| FOO.find(needle).unwrap_or_else(|| panic!("{needle}")) + skip;
    let x1 = at("x1 = 1", 0);
    let y1 = at("y1 = 0", 0);
    BTreeSet::from([
        (EdgeKind::ComesFrom, at("1 ;", 0), x1),
        (EdgeKind::ComesFrom, at("0 ;", 0), y1),
        (EdgeKind::ComesFrom, x1, at("(x1 ==", 1)),
        (EdgeKind::ComputedFrom, x1, at("y2 =", 0)),
        (EdgeKind::ComputedFrom, y1, at("y2 =", 0)),
        (EdgeKind::ComputedFrom, y1, at("x3 =", 0)),
    ])
}

pub fn edge_offsets(tree: &SyntaxTree, edges: &[DfgEdge]) -> BTreeSet<(EdgeKind, usize, usize)> {
    edges
        .iter()
        .map(|e| {
            (
                e.kind,
                tree.node(e.src).span.start,
                tree.node(e.dst).span.start,
            )
        })
        .collect()
}

/// Handcrafted data-flow suite: straight-line code, branches, nested blocks
/// and loops.
pub const DFG_SUITE: [&str; 25] = [
    // straight-line
    "void f() { int a = 1; int b = a; int c = a + b; }",
    "void f() { int a = 1; a = 2; int b = a; }",
    "void f() { int a = 1; int b = 2; a = b; b = a; int c = a * b; }",
    "void f(int p) { int q = p + 1; p = q; g(p, q); }",
    "void f() { int a = 0; a += 3; a++; int b = a; }",
    "void f() { String s = \"x\"; String t = s + s; print(t); }",
    // if / else
    "void f(int p) { int a = 1; if (p > 0) { a = 2; } int b = a; }",
    "void f(int p) { int a; if (p > 0) { a = 1; } else { a = 2; } g(a); }",
    "void f(int p) { int a = p; if (a > 0) { return; } int b = a; }",
    "void f(int p) { int a = 0; int b = 0; if (p == 1) { a = b; } else if (p == 2) { b = a; } else { a = a + b; } g(a, b); }",
    "void f(boolean c) { int x = 1; int y = 2; if (c) { y = x; } x = y; }",
    "void f(int p) { int m = p; if (p < 0) m = -p; g(m); }",
    // nested blocks
    "void f() { int a = 1; { int b = a; { a = b + 1; } } g(a); }",
    "void f(int p) { int a = 0; if (p > 0) { if (p > 5) { a = p; } else { a = 1; } } g(a); }",
    "void f() { int a = 1; { int b = 2; a = b; } int c = a; }",
    "void f(int p) { int r = 0; { int t = p; if (t > 1) { r = t; } } g(r); }",
    "void f(int p) { int a = p; { { { a = a + 1; } } } g(a); }",
    // while
    "void f(int n) { int i = 0; while (i < n) { i = i + 1; } g(i); }",
    "void f(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i++; } g(s); }",
    "void f(int n) { int a = 1; int b = 1; while (n > 0) { int t = a; a = b; b = t + b; n--; } g(a); }",
    "void f(int n) { int x = 0; while (n > 0) { if (x > 3) { x = 0; } else { x = x + 1; } n = n - 1; } g(x); }",
    "void f(int n) { int i = 0; while (i < n) { int j = 0; while (j < i) { j = j + 1; } i = i + j; } g(i); }",
    "void f(int n) { int k = n; do { k = k - 2; } while (k > 0); g(k); }",
    "void f(int[] xs) { int s = 0; for (int i = 0; i < xs.length; i++) { s += xs[i]; } g(s); }",
    "void f(boolean b) { int a = 0; while (b) { a = 1; b = a > 0; } int c = a; }",
];

/// One scope case: the snippet holds exactly one `System.out.println(NAME)`
/// and `declared` says whether NAME is in scope there.
pub struct ScopeCase {
    pub text: &'static str,
    pub name: &'static str,
    pub declared: bool,
}

const fn case(text: &'static str, name: &'static str, declared: bool) -> ScopeCase {
    ScopeCase {
        text,
        name,
        declared,
    }
}

/// The two listings of the variable-declared task, wrapped in a method.
pub const LISTINGS: [ScopeCase; 2] = [
    case(
        "void f() { int x = 0; if (x == 0) { int y = x; System.out.println(y); } }",
        "y",
        true,
    ),
    case(
        "void f() { int x = 0; if (x == 0) { int y = x; } System.out.println(y); }",
        "y",
        false,
    ),
];

pub const SCOPE_SUITE: [ScopeCase; 20] = [
    // shadowing
    case("void f() { int x = 1; { int x = 2; } System.out.println(x); }", "x", true),
    case("class A { int v; void f() { { int v = 2; } System.out.println(v); } }", "v", false),
    case("void f(int p) { { int p = 3; System.out.println(p); } }", "p", true),
    case("void f() { Runnable r = () -> { int q = 1; }; System.out.println(q); }", "q", false),
    // sibling blocks
    case("void f() { { int a = 1; } { System.out.println(a); } }", "a", false),
    case("void f() { { int a = 1; { System.out.println(a); } } }", "a", true),
    case("void f(int p) { if (p > 0) { int a = 1; } else { System.out.println(a); } }", "a", false),
    case("void f() { try { int t = 1; } catch (Exception e) { System.out.println(t); } }", "t", false),
    case("void f() { try { g(); } catch (Exception e) { System.out.println(e); } }", "e", true),
    case("void f() { try { g(); } catch (Exception e) { } System.out.println(e); }", "e", false),
    case("void a() { int m = 1; } void b() { System.out.println(m); }", "m", false),
    case("void f(int k) { switch (k) { case 1: int s = 1; System.out.println(s); break; } }", "s", true),
    case("void f() { do { int d = 1; } while (g()); System.out.println(d); }", "d", false),
    case("void f() { System.out.println(z); int z = 1; }", "z", false),
    // for headers
    case("void f() { for (int i = 0; i < 3; i++) { System.out.println(i); } }", "i", true),
    case("void f() { for (int i = 0; i < 3; i++) { } System.out.println(i); }", "i", false),
    case("void f(String[] xs) { for (String s : xs) { System.out.println(s); } }", "s", true),
    case("void f(String[] xs) { for (String s : xs) { } System.out.println(s); }", "s", false),
    case("void f() { for (int i = 0; i < 3; i++) { for (int j = 0; j < i; j++) { } System.out.println(j); } }", "j", false),
    case("void f() { for (int i = 0, j = i; i < 3; i++) System.out.println(j); }", "j", true),
];

/// Byte offset of NAME inside the case's print statement.
pub fn print_offset(c: &ScopeCase) -> usize {
    let call = format!("System.out.println({})", c.name);
    let start = c.text.find(&call).unwrap_or_else(|| panic!("{}", c.text));
    assert_eq!(c.text.matches(&call).count(), 1);
    start + "System.out.println(".len()
}

/// Scope label of a case as computed by the analyzer.
pub fn declared_label(c: &ScopeCase) -> bool {
    let tree = parse(c.text).unwrap_or_else(|e| panic!("{}: {e}", c.text));
    build_scope_tree(&tree).visible_at(c.name, print_offset(c))
}

/// Writes `n` synthetic snippets as a `{"id","code"}` JSONL corpus.
pub fn write_synth_corpus(path: &Path, n: usize, seed: u64) {
    let mut out = String::new();
    for (id, code) in probe_forge::synth::java_methods(n, seed) {
        out.push_str(&serde_json::json!({ "id": id, "code": code }).to_string());
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}
