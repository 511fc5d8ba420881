//! Random straight-line programs over a fixed set of declarations.

use proptest::prelude::*;

pub const TARGETS: [&str; 7] = ["a", "b", "c", "d", "k", "p.x", "p.y"];
pub const PROBES: [&str; 6] = ["a", "b", "c", "d", "k", "p"];
pub const OPS: [&str; 3] = ["&-", ":=", "<-"];

const HEADER: &str = "let a: @mut Int {
let b: @mut Int {
let c: @mut Int {
let d: @mut Int {
let k: @cst Int {
let p: @mut {x: @mut Int, y: @mut Int} {
p <- new @mut {x: @mut Int, y: @mut Int}
";
const FOOTER: &str = "}}}}}}\n";

#[derive(Debug, Clone)]
pub enum Rhs {
    Target(usize),
    Literal(i64),
    Plus(usize, i64),
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Assign(usize, usize, Rhs),
    Probe(usize),
}

impl Stmt {
    pub fn render(&self) -> String {
        match self {
            Stmt::Assign(lhs, op, rhs) => {
                let rhs = match rhs {
                    Rhs::Target(t) => TARGETS[*t].to_string(),
                    Rhs::Literal(n) => n.to_string(),
                    Rhs::Plus(t, n) => format!("{} + {n}", TARGETS[*t]),
                };
                format!("{} {} {rhs}", TARGETS[*lhs], OPS[*op])
            }
            Stmt::Probe(v) => format!("probe {}", PROBES[*v]),
        }
    }
}

pub fn rhs() -> impl Strategy<Value = Rhs> {
    prop_oneof![
        3 => (0..TARGETS.len()).prop_map(Rhs::Target),
        2 => (-9i64..100).prop_map(Rhs::Literal),
        1 => (0..TARGETS.len(), 0i64..10).prop_map(|(t, n)| Rhs::Plus(t, n)),
    ]
}

pub fn stmt() -> impl Strategy<Value = Stmt> {
    prop_oneof![
        4 => (0..TARGETS.len(), 0..OPS.len(), rhs()).prop_map(|(l, o, r)| Stmt::Assign(l, o, r)),
        1 => (0..PROBES.len()).prop_map(Stmt::Probe),
    ]
}

/// `t := i` for every target, in order.
pub fn init() -> Vec<Stmt> {
    (0..TARGETS.len())
        .map(|t| Stmt::Assign(t, 1, Rhs::Literal(t as i64 + 1)))
        .collect()
}

pub fn body(max: usize) -> impl Strategy<Value = Vec<Stmt>> {
    prop::collection::vec(stmt(), 0..max)
}

pub fn program(stmts: &[Stmt], last: Option<&str>) -> String {
    let mut src = HEADER.to_string();
    for s in stmts {
        src.push_str(&s.render());
        src.push('\n');
    }
    src.push_str(last.unwrap_or("0"));
    src.push('\n');
    src.push_str(FOOTER);
    src
}
