//! Seeded generator of syntactically valid Java methods.
//!
//! Used to build corpora for tests and benchmarks when no real corpus is at
//! hand. Output mimics formatted source: indentation, newlines, line and
//! block comments, string literals containing brackets and comment markers.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Str,
    Double,
    Bool,
    IntArray,
    StrList,
}

impl Ty {
    fn java(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Str => "String",
            Ty::Double => "double",
            Ty::Bool => "boolean",
            Ty::IntArray => "int[]",
            Ty::StrList => "List<String>",
        }
    }
}

const NAMES: &[&str] = &[
    "i", "j", "k", "n", "x", "y", "count", "result", "value", "sum", "index", "name", "list",
    "data", "key", "tmp", "total", "s", "item", "buffer", "flag", "line", "size", "max", "min",
    "len", "node", "offset", "pos", "idx", "res", "str", "val", "msg", "id", "text", "limit",
    "step", "score", "acc",
];

const VERBS: &[&str] = &[
    "get", "compute", "find", "build", "parse", "update", "check", "load", "process", "merge",
    "count", "resolve", "format", "apply", "collect",
];
const NOUNS: &[&str] = &[
    "Value", "Status", "Index", "Name", "Total", "Items", "Buffer", "Score", "Path", "Entry",
    "Range", "Config", "Node", "Result", "Text",
];

const STRINGS: &[&str] = &[
    "\"\"",
    "\"a\"",
    "\"done\"",
    "\"(x)\"",
    "\"{}\"",
    "\"[ok]\"",
    "\"http://host\"",
    "\"a//b\"",
    "\"/* not a comment */\"",
    "\"var\"",
    "\", \"",
    "\"key=\"",
    "\"\\n\"",
    "\"\\\"q\\\"\"",
];

const COMMENTS: &[&str] = &[
    "// TODO check bounds",
    "// fast path",
    "/* keep order */",
    "// see above",
    "/* reset state */",
    "// (edge case) {handled}",
];

const TRAILING: &[&str] = &["// why?", "// (sic)", "// {x}", "// off by one?"];

struct Gen {
    rng: ChaCha8Rng,
    scopes: Vec<Vec<(String, Ty)>>,
    out: String,
    indent: usize,
}

impl Gen {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(s);
        if self.rng.random_bool(0.06) {
            self.out.push(' ');
            self.out.push_str(TRAILING.choose(&mut self.rng).unwrap());
        }
        self.out.push('\n');
    }

    fn visible(&self, ty: Ty) -> Vec<String> {
        self.scopes
            .iter()
            .flatten()
            .filter(|(_, t)| *t == ty)
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn is_visible(&self, name: &str) -> bool {
        self.scopes.iter().flatten().any(|(n, _)| n == name)
    }

    fn fresh(&mut self) -> String {
        for _ in 0..8 {
            let n = *NAMES.choose(&mut self.rng).unwrap();
            if !self.is_visible(n) {
                return n.to_owned();
            }
        }
        let base = *NAMES.choose(&mut self.rng).unwrap();
        let mut i = 2;
        while self.is_visible(&format!("{base}{i}")) {
            i += 1;
        }
        format!("{base}{i}")
    }

    fn declare(&mut self, name: &str, ty: Ty) {
        self.scopes.last_mut().unwrap().push((name.to_owned(), ty));
    }

    fn var(&mut self, ty: Ty) -> Option<String> {
        self.visible(ty).choose(&mut self.rng).cloned()
    }

    fn int_atom(&mut self) -> String {
        match self.rng.random_range(0..10) {
            0..=3 => self
                .var(Ty::Int)
                .unwrap_or_else(|| self.rng.random_range(0..100).to_string()),
            4..=5 => self.rng.random_range(0..20).to_string(),
            6 => self
                .var(Ty::Str)
                .map_or("0".into(), |s| format!("{s}.length()")),
            7 => self
                .var(Ty::IntArray)
                .map_or("1".into(), |a| format!("{a}.length")),
            8 => self
                .var(Ty::StrList)
                .map_or("2".into(), |l| format!("{l}.size()")),
            _ => match (self.var(Ty::IntArray), self.var(Ty::Int)) {
                (Some(a), Some(i)) => format!("{a}[{i}]"),
                _ => "-1".into(),
            },
        }
    }

    fn expr(&mut self, ty: Ty, depth: usize) -> String {
        let simple = depth > 1 || self.rng.random_bool(0.45);
        match ty {
            Ty::Int => {
                if simple {
                    return self.int_atom();
                }
                let a = self.expr(Ty::Int, depth + 1);
                let b = self.expr(Ty::Int, depth + 1);
                match self.rng.random_range(0..5) {
                    0 => format!("{a} + {b}"),
                    1 => format!("{a} - {b}"),
                    2 => format!("{a} * {b}"),
                    3 => format!("Math.max({a}, {b})"),
                    _ => format!("({a} + {b}) / 2"),
                }
            }
            Ty::Str => {
                if simple {
                    return match self.rng.random_range(0..3) {
                        0 => STRINGS.choose(&mut self.rng).unwrap().to_string(),
                        _ => self
                            .var(Ty::Str)
                            .unwrap_or_else(|| STRINGS.choose(&mut self.rng).unwrap().to_string()),
                    };
                }
                match self.rng.random_range(0..4) {
                    0 => format!(
                        "{} + {}",
                        self.expr(Ty::Str, depth + 1),
                        self.expr(Ty::Int, depth + 1)
                    ),
                    1 => format!("String.valueOf({})", self.expr(Ty::Int, depth + 1)),
                    2 => format!("{}.trim()", self.expr(Ty::Str, 2)),
                    _ => match self.var(Ty::StrList) {
                        Some(l) => format!("{l}.get(0)"),
                        None => format!("{}.toUpperCase()", self.expr(Ty::Str, 2)),
                    },
                }
            }
            Ty::Double => {
                if simple {
                    return self.var(Ty::Double).unwrap_or_else(|| "0.5".into());
                }
                match self.rng.random_range(0..3) {
                    0 => format!("{} * 1.5", self.expr(Ty::Double, depth + 1)),
                    1 => format!("(double) {} / 2", self.expr(Ty::Int, depth + 1)),
                    _ => format!("Math.sqrt({})", self.expr(Ty::Double, depth + 1)),
                }
            }
            Ty::Bool => match self.rng.random_range(0..6) {
                0 => self.var(Ty::Bool).unwrap_or_else(|| "true".into()),
                1 => format!("{}.isEmpty()", self.expr(Ty::Str, 2)),
                2 => format!("{} == null", self.expr(Ty::Str, 2)),
                3 if depth == 0 => {
                    format!("{} && {}", self.expr(Ty::Bool, 1), self.expr(Ty::Bool, 1))
                }
                _ => {
                    let op = ["<", ">", "<=", ">=", "==", "!="]
                        .choose(&mut self.rng)
                        .unwrap();
                    format!("{} {op} {}", self.int_atom(), self.int_atom())
                }
            },
            Ty::IntArray => match self.rng.random_range(0..3) {
                0 => format!("new int[{}]", self.int_atom()),
                1 => format!(
                    "new int[] {{ {}, {} }}",
                    self.rng.random_range(0..9),
                    self.rng.random_range(0..9)
                ),
                _ => self
                    .var(Ty::IntArray)
                    .unwrap_or_else(|| "new int[8]".into()),
            },
            Ty::StrList => "new ArrayList<>()".into(),
        }
    }

    fn pick_type(&mut self) -> Ty {
        *[
            Ty::Int,
            Ty::Int,
            Ty::Int,
            Ty::Str,
            Ty::Str,
            Ty::Double,
            Ty::Bool,
            Ty::IntArray,
            Ty::StrList,
        ]
        .choose(&mut self.rng)
        .unwrap()
    }

    fn block(&mut self, stmts: usize, depth: usize) {
        self.scopes.push(Vec::new());
        self.indent += 1;
        for _ in 0..stmts {
            self.statement(depth);
        }
        self.indent -= 1;
        self.scopes.pop();
    }

    fn open(&mut self, head: &str) {
        self.line(&format!("{head} {{"));
    }

    fn close(&mut self, tail: &str) {
        self.line(&format!("}}{tail}"));
    }

    fn statement(&mut self, depth: usize) {
        let nested = depth < 3;
        let roll = self.rng.random_range(0..100);
        match roll {
            0..=29 => {
                let ty = self.pick_type();
                let name = self.fresh();
                let init = self.expr(ty, 0);
                self.line(&format!("{} {name} = {init};", ty.java()));
                self.declare(&name, ty);
            }
            30..=41 => {
                let ty = *[Ty::Int, Ty::Str, Ty::Double]
                    .choose(&mut self.rng)
                    .unwrap();
                match self.var(ty) {
                    Some(v) => {
                        let e = self.expr(ty, 0);
                        let op = if ty != Ty::Bool && self.rng.random_bool(0.3) {
                            "+="
                        } else {
                            "="
                        };
                        self.line(&format!("{v} {op} {e};"));
                    }
                    None => {
                        let e = self.expr(Ty::Str, 0);
                        self.line(&format!("System.out.println({e});"));
                    }
                }
            }
            42..=47 => match self.var(Ty::Int) {
                Some(v) => {
                    let op = if self.rng.random_bool(0.7) {
                        "++"
                    } else {
                        "--"
                    };
                    self.line(&format!("{v}{op};"));
                }
                None => self.line("System.out.println(\"-\");"),
            },
            48..=55 => {
                let e = match self.var(Ty::StrList) {
                    Some(l) => format!("{l}.add({})", self.expr(Ty::Str, 1)),
                    None => format!("System.out.println({})", self.expr(Ty::Str, 0)),
                };
                self.line(&format!("{e};"));
            }
            56..=69 if nested => {
                let c = self.expr(Ty::Bool, 0);
                self.open(&format!("if ({c})"));
                let n = self.rng.random_range(1..4);
                self.block(n, depth + 1);
                if self.rng.random_bool(0.4) {
                    self.close(" else {");
                    let n = self.rng.random_range(1..3);
                    self.block(n, depth + 1);
                }
                self.close("");
            }
            70..=79 if nested => {
                let i = self.fresh();
                let bound = self.int_atom();
                self.scopes.push(vec![(i.clone(), Ty::Int)]);
                self.open(&format!("for (int {i} = 0; {i} < {bound}; {i}++)"));
                let n = self.rng.random_range(1..4);
                self.block(n, depth + 1);
                self.close("");
                self.scopes.pop();
            }
            80..=85 if nested => {
                let (iter, ty) = match (self.var(Ty::StrList), self.var(Ty::IntArray)) {
                    (Some(l), _) => (l, Ty::Str),
                    (None, Some(a)) => (a, Ty::Int),
                    _ => {
                        self.line("System.out.println(\"skip\");");
                        return;
                    }
                };
                let v = self.fresh();
                self.scopes.push(vec![(v.clone(), ty)]);
                self.open(&format!("for ({} {v} : {iter})", ty.java()));
                let n = self.rng.random_range(1..3);
                self.block(n, depth + 1);
                self.close("");
                self.scopes.pop();
            }
            86..=91 if nested => match self.var(Ty::Int) {
                Some(v) => {
                    self.open(&format!("while ({v} > 0)"));
                    let n = self.rng.random_range(1..3);
                    self.block(n, depth + 1);
                    self.indent += 1;
                    self.line(&format!("{v}--;"));
                    self.indent -= 1;
                    self.close("");
                }
                None => self.line("System.out.println(\"(none)\");"),
            },
            92..=95 if nested => {
                self.open("try");
                let n = self.rng.random_range(1..3);
                self.block(n, depth + 1);
                let e = self.fresh();
                self.scopes.push(vec![(e.clone(), Ty::Str)]);
                self.close(&format!(" catch (Exception {e}) {{"));
                self.indent += 1;
                self.line(&format!("System.err.println({e}.getMessage());"));
                self.indent -= 1;
                self.scopes.pop();
                self.close("");
            }
            _ => {
                if self.rng.random_bool(0.3) {
                    let c = COMMENTS.choose(&mut self.rng).unwrap().to_string();
                    self.line(&c);
                }
                let args = (0..self.rng.random_range(0..3))
                    .map(|_| self.int_atom())
                    .collect::<Vec<_>>()
                    .join(", ");
                let name = format!(
                    "{}{}",
                    VERBS.choose(&mut self.rng).unwrap(),
                    NOUNS.choose(&mut self.rng).unwrap()
                );
                self.line(&format!("{name}({args});"));
            }
        }
    }

    fn method(&mut self) -> String {
        self.out.clear();
        self.scopes = vec![Vec::new()];
        self.indent = 0;
        if self.rng.random_bool(0.3) {
            self.out
                .push_str("/**\n * Generated helper.\n * @return something\n */\n");
        }
        let ret = *[
            None,
            Some(Ty::Int),
            Some(Ty::Str),
            Some(Ty::Bool),
            Some(Ty::Double),
        ]
        .choose(&mut self.rng)
        .unwrap();
        let modifiers = *["public ", "private ", "public static ", "protected ", ""]
            .choose(&mut self.rng)
            .unwrap();
        let name = format!(
            "{}{}",
            VERBS.choose(&mut self.rng).unwrap(),
            NOUNS.choose(&mut self.rng).unwrap()
        );
        let mut params = Vec::new();
        for _ in 0..self.rng.random_range(0..4) {
            let ty = *[Ty::Int, Ty::Str, Ty::IntArray, Ty::StrList, Ty::Double]
                .choose(&mut self.rng)
                .unwrap();
            let n = self.fresh();
            self.declare(&n, ty);
            params.push(format!("{} {n}", ty.java()));
        }
        let head = format!(
            "{modifiers}{} {name}({})",
            ret.map_or("void", Ty::java),
            params.join(", ")
        );
        self.open(&head);
        let n = self.rng.random_range(3..9);
        self.scopes.push(Vec::new());
        self.indent += 1;
        for _ in 0..n {
            self.statement(0);
        }
        if let Some(ty) = ret {
            let e = self.expr(ty, 0);
            self.line(&format!("return {e};"));
        }
        self.indent -= 1;
        self.scopes.pop();
        self.close("");
        std::mem::take(&mut self.out)
    }
}

/// `n` generated methods as `(origin, raw source)` pairs.
pub fn java_methods(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        scopes: Vec::new(),
        out: String::new(),
        indent: 0,
    };
    (0..n)
        .map(|i| (format!("synth-{seed}-{i}"), g.method()))
        .collect()
}
