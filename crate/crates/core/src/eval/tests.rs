use super::*;
use crate::syntax::parse;
use crate::typesys::build_type_env;

fn run_with(src: &str, options: EvalOptions) -> Evaluation {
    let program = parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
    let env = build_type_env(&program).unwrap_or_else(|e| panic!("{src}: {e}"));
    evaluate(&env, &program, options)
}

fn run(src: &str) -> Evaluation {
    run_with(src, EvalOptions::default())
}

fn value(src: &str) -> String {
    let eval = run(src);
    let r = eval.result.unwrap_or_else(|e| panic!("{src}: {e}"));
    eval.context.render_value(r)
}

fn error(src: &str) -> RuntimeError {
    match run(src).result {
        Ok(_) => panic!("{src}: expected an error"),
        Err(e) => e,
    }
}

fn probes(eval: &Evaluation) -> Vec<String> {
    eval.probes
        .iter()
        .map(|p| format!("{}: {}", p.name, p.state))
        .collect()
}

const STATE_TRANSITIONS: &str = "
let a: @mut Int {
let b: @mut Int {
let c: @cst Int {
    probe a; probe b; probe c
    a := 10
    b <- 20
    probe a; probe b
    c &- a
    probe a; probe c
    c &- b
    probe b; probe a
    b <- a
    probe a
}}}";

#[test]
fn state_transition_listing() {
    let eval = run(STATE_TRANSITIONS);
    assert!(eval.result.is_ok());
    assert_eq!(
        probes(&eval),
        [
            "a: unallocated",
            "b: unallocated",
            "c: unallocated",
            "a: unique",
            "b: unique",
            "a: shared",
            "c: borrowed",
            "b: shared",
            "a: unique",
            "a: moved",
        ]
    );
}

#[test]
fn copy_into_constant_is_not_mutating() {
    let err = error("let a: @cst Int { a <- 42; a := 10 }");
    assert_eq!(err.kind, RuntimeErrorKind::ImmutableMutation);
    assert_eq!(err.subject, "a");
    assert_eq!(err.span.line, 1);
    assert_eq!(err.span.column, 28);
}

#[test]
fn deep_immutability_through_constant_record() {
    let err =
        error("let p: @cst {x: @mut Int} { p <- new @cst {x: @mut Int}; p.x := 5; p.x := 6 }");
    assert_eq!(err.kind, RuntimeErrorKind::ImmutableMutation);
    assert_eq!(err.subject, "p.x");
    assert_eq!(
        value("let p: @mut {x: @mut Int} { p <- new @mut {x: @mut Int}; p.x := 5; p.x := 6; p }"),
        "{x: 6}"
    );
}

#[test]
fn conditionals() {
    assert_eq!(value("if true { 1 } else { 2 }"), "1");
    assert_eq!(value("if false { 1 } else { 2 }"), "2");
    assert_eq!(
        error("if 7 { 1 } else { 2 }").kind,
        RuntimeErrorKind::ConditionNotBoolean
    );
    assert_eq!(
        error("let c: Bool { if c { 1 } else { 2 } }").kind,
        RuntimeErrorKind::NotReadable
    );
}

#[test]
fn last_return_wins() {
    assert_eq!(
        value("(fun() -> @mut Int { return <- 1; return <- 2 })()"),
        "2"
    );
}

#[test]
fn return_outside_a_function() {
    assert_eq!(error("return <- 1").kind, RuntimeErrorKind::MissingReturn);
}

#[test]
fn missing_return_leaves_result_unbound() {
    assert_eq!(value("(fun() -> Int { 1 })()"), "<unbound>");
    let err = error("let x: Int { x := (fun() -> Int { 1 })() }");
    assert_eq!(err.kind, RuntimeErrorKind::NotReadable);
}

#[test]
fn sequences() {
    assert_eq!(value("1; 2"), "2");
    assert_eq!(value("let a: @mut Int { a := 1; a := a + 1; a }"), "2");
}

#[test]
fn variables_and_lets() {
    assert_eq!(value("let x: @mut Int { x }"), "<unbound>");
    assert_eq!(
        error("let x: @mut Int { let y: Int { y := x } }").kind,
        RuntimeErrorKind::NotReadable
    );
}

#[test]
fn move_requires_unique_owner() {
    let err =
        error("let a: @mut Int { let h: @cst Int { let d: @mut Int { a := 1; h &- a; d <- a } } }");
    assert_eq!(err.kind, RuntimeErrorKind::NotUnique);
    assert_eq!(err.state, Some(ReferenceState::Shared));
    let err =
        error("let o: @mut Int { let s: @mut Int { let d: @mut Int { o := 1; s &- o; d <- s } } }");
    assert_eq!(err.kind, RuntimeErrorKind::NotUnique);
    assert_eq!(err.state, Some(ReferenceState::Borrowed));
    assert_eq!(value("let a: @cst Int { a <- 42; a }"), "42");
}

#[test]
fn move_leaves_source_moved() {
    let eval = run("let a: @mut Int { let b: @mut Int { a := 1; b <- a; probe a; b } }");
    assert_eq!(probes(&eval), ["a: moved"]);
    assert_eq!(eval.context.render_value(eval.result.unwrap()), "1");
}

#[test]
fn alias_mutability_rules() {
    // A mutating alias cannot join a non-mutating one.
    let err =
        error("let a: @mut Int { let c: @cst Int { let m: @mut Int { a := 1; c &- a; m &- a } } }");
    assert_eq!(err.kind, RuntimeErrorKind::AliasMutabilityMismatch);
    // Nor the other way around.
    let err =
        error("let a: @mut Int { let c: @cst Int { let m: @mut Int { a := 1; m &- a; c &- a } } }");
    assert_eq!(err.kind, RuntimeErrorKind::AliasMutabilityMismatch);
    // A unique mutating reference can be shared non-mutating.
    let eval = run("let a: @mut Int { let c: @cst Int { a := 1; c &- a; probe a; probe c; c } }");
    assert_eq!(probes(&eval), ["a: shared", "c: borrowed"]);
    // A mutating alias needs a writeable source.
    let err = error("let a: Int { let m: @mut Int { a := 1; m &- a } }");
    assert_eq!(err.kind, RuntimeErrorKind::NotWriteable);
    // Shared references cannot be reassigned by alias.
    let err = error(
        "let a: @mut Int { let b: @mut Int { let c: @cst Int { a := 1; b := 2; c &- a; a &- b } } }",
    );
    assert_eq!(err.kind, RuntimeErrorKind::AliasTargetShared);
}

#[test]
fn alias_shares_location() {
    let eval = run("let a: @mut Int { let b: @mut Int { a := 1; b &- a; b := 5; a } }");
    assert_eq!(eval.context.render_value(eval.result.unwrap()), "5");
}

#[test]
fn copy_is_independent() {
    assert_eq!(
        value("let a: @mut Int { let b: @mut Int { a := 1; b := a; a := 5; b } }"),
        "1"
    );
}

#[test]
fn records() {
    let eval = run("let p: @mut {x: @mut Int, y: Int} { p <- new @mut {x: @mut Int, y: Int}; probe p; p.x := 3; p }");
    assert_eq!(probes(&eval), ["p: unique"]);
    assert_eq!(
        eval.context.render_value(eval.result.unwrap()),
        "{x: 3, y: <unbound>}"
    );
    let err = error("let p: @mut {x: @mut Int} { p.x }");
    assert_eq!(err.kind, RuntimeErrorKind::NotReadable);
    assert_eq!(
        error("let p: @mut {x: @mut Int} { let q: @mut {x: @mut Int} { p <- new @mut {x: @mut Int}; q := p } }")
            .kind,
        RuntimeErrorKind::CopyOfUndefined
    );
}

#[test]
fn record_copy_is_deep() {
    let src = "let p: @mut {x: @mut Int} { let q: @mut {x: @mut Int} {
        p <- new @mut {x: @mut Int}
        p.x := 8
        q := p
        q.x := 9
        p
    } }";
    assert_eq!(value(src), "{x: 8}");
}

#[test]
fn callee_must_be_a_function() {
    assert_eq!(
        error("let f: (x: Int) -> Int { f := 1; f(x := 1) }").kind,
        RuntimeErrorKind::CalleeNotFunction
    );
    assert_eq!(
        error("let f: (x: Int) -> Int { f(x := 1) }").kind,
        RuntimeErrorKind::NotReadable
    );
}

#[test]
fn builtins() {
    assert_eq!(value("1 + 2 * 3"), "7");
    assert_eq!(value("10 - 4 - 3"), "3");
    assert_eq!(value("3 > 2"), "true");
    assert_eq!(value("true == false"), "false");
    assert_eq!(value("not(value := 1 == 1)"), "false");
    assert_eq!(value("9223372036854775807 + 1"), "-9223372036854775808");
    assert_eq!(
        error("true + 1").kind,
        RuntimeErrorKind::BuiltinOperandMismatch
    );
}

#[test]
fn pass_by_value_hides_callee_mutation() {
    let src = "let a: @mut Int { let f: (x: @mut Int) -> Int {
        a := 1
        f <- fun(x: @mut Int) -> Int { x := 99; return := x }
        f(x := a)
        a
    } }";
    assert_eq!(value(src), "1");
    let alias = src.replace("f(x := a)", "f(x &- a)");
    assert_eq!(value(&alias), "99");
}

#[test]
fn parameters_are_renamed_when_they_clash() {
    let src = "let x: @mut Int { let f: (x: Int) -> Int {
        x := 5
        f <- fun(x: Int) -> Int { return := x + 1 }
        probe x
        x := f(x := x)
        x
    } }";
    let eval = run_with(
        src,
        EvalOptions {
            trace: true,
            ..Default::default()
        },
    );
    assert_eq!(eval.context.render_value(eval.result.clone().unwrap()), "6");
    assert!(eval
        .trace
        .iter()
        .any(|e| e.rule == "E-Let" && e.detail.iter().any(|(_, v)| v.starts_with("x#"))));
}

#[test]
fn nested_calls_restore_the_outer_return() {
    let src = "let g: () -> Int { let f: (g: () -> Int) -> @mut Int {
        g <- fun() -> Int { return <- 7 }
        f <- fun(g: () -> Int) -> @mut Int { return <- 1; return := g() + 10 }
        f(g &- g)
    } }";
    assert_eq!(value(src), "17");
    let src = "let g: () -> Int { let f: (g: () -> Int) -> Int {
        g <- fun() -> Int { return <- 7 }
        f <- fun(g: () -> Int) -> Int { return <- 1; g() }
        f(g &- g)
    } }";
    assert_eq!(value(src), "1");
}

const FACTORIAL: &str = "
let fact: rec F . (self: F, n: Int) -> Int {
    fact <- fun(self: rec F . (self: F, n: Int) -> Int, n: Int) -> Int {
        if n > 1 {
            return := n * self(self &- self, n := n - 1)
        } else {
            return := 1
        }
    }
    fact(self &- fact, n := 5)
}";

const FIBONACCI: &str = "
let fib: rec F . (self: F, n: Int) -> Int {
    fib <- fun(self: rec F . (self: F, n: Int) -> Int, n: Int) -> Int {
        if 2 > n {
            return := n
        } else {
            return := self(self &- self, n := n - 1) + self(self &- self, n := n - 2)
        }
    }
    fib(self &- fib, n := 10)
}";

#[test]
fn recursion_by_self_application() {
    assert_eq!(value(FACTORIAL), "120");
    assert_eq!(value(FIBONACCI), "55");
    let strict = EvalOptions {
        strict_rules: true,
        trace: false,
    };
    let eval = run_with(FACTORIAL, strict);
    assert_eq!(eval.context.render_value(eval.result.unwrap()), "120");
}

#[test]
fn recursive_lets_are_renamed() {
    let src = "
let count: rec F . (self: F, n: Int) -> Int {
    count <- fun(self: rec F . (self: F, n: Int) -> Int, n: Int) -> Int {
        let k: @mut Int {
            k := n
            if n > 0 { k := self(self &- self, n := n - 1) + 1 } else { k }
            return := k
        }
    }
    count(self &- count, n := 4)
}";
    assert_eq!(value(src), "4");
}

#[test]
fn strict_rules_keep_bindings() {
    let src = "let a: @mut Int { let c: @cst Int { a := 1; c &- a; 0 }; probe a }";
    assert_eq!(probes(&run(src)), ["a: unique"]);
    let strict = run_with(
        src,
        EvalOptions {
            strict_rules: true,
            trace: false,
        },
    );
    assert_eq!(probes(&strict), ["a: shared"]);
    assert!(strict.context.lookup("c").is_some());
}

#[test]
fn default_mode_releases_arguments() {
    let src = "let a: @mut Int { let f: (x: @cst Int) -> Int {
        a := 1
        f <- fun(x: @cst Int) -> Int { return := x }
        f(x &- a)
        probe a
    } }";
    assert_eq!(probes(&run(src)), ["a: unique"]);
}

#[test]
fn trace_is_post_order_and_right_first() {
    let eval = run_with(
        "let a: @mut Int { a := 10 }",
        EvalOptions {
            trace: true,
            ..Default::default()
        },
    );
    let rules: Vec<_> = eval.trace.iter().map(|e| e.rule).collect();
    assert_eq!(rules, ["E-Atom", "E-Var", "E-Copy-Unalloc", "E-Let"]);
    assert_eq!(
        eval.trace[2].to_string(),
        "rule=E-Copy-Unalloc span=1:19 left=r7 right=r8 left_state=unique right_state=unique"
    );
}

#[test]
fn call_trace_lists_every_step() {
    let eval = run_with(
        "(fun(x: Int) -> Int { return <- x })(x <- 1)",
        EvalOptions {
            trace: true,
            ..Default::default()
        },
    );
    let rules: Vec<_> = eval.trace.iter().map(|e| e.rule).collect();
    assert_eq!(
        rules,
        [
            "E-Fun",
            "E-Callee",
            "E-Atom",
            "E-Move-Unalloc",
            "E-Let",
            "E-Args-0",
            "E-Args-N",
            "E-Var",
            "E-Move-Unalloc",
            "E-Ret",
            "E-Let",
            "E-Call"
        ]
    );
}

#[test]
fn tracing_is_off_by_default() {
    assert!(run("1 + 1").trace.is_empty());
}
