//! Whole-program pipeline: parse, type, check, evaluate, and format the
//! observable output.

use std::fmt::Write as _;

use crate::diagnostics::{Diagnostic, Severity};
use crate::eval::{evaluate, EvalOptions, Evaluation, TraceEvent};
use crate::syntax::parse;
use crate::typesys::{build_type_env, check_arity_and_names};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_STATIC: i32 = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub strict_rules: bool,
    pub trace: bool,
    pub dump_context: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Probe observations, then the final value when evaluation succeeds.
    pub stdout: String,
    pub diagnostic: Option<Diagnostic>,
    pub trace: Vec<TraceEvent>,
    /// Table dump, present when requested and evaluation ran at all.
    pub dump: Option<String>,
    /// Present when evaluation ran.
    pub evaluation: Option<Evaluation>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        match &self.diagnostic {
            None => EXIT_OK,
            Some(d) if d.severity == Severity::Runtime => EXIT_RUNTIME,
            Some(_) => EXIT_STATIC,
        }
    }

    /// Stdout plus an `error: CODE` line on failure; what a corpus
    /// `.expected` file records.
    pub fn transcript(&self) -> String {
        let mut out = self.stdout.clone();
        if let Some(d) = &self.diagnostic {
            let _ = writeln!(out, "error: {}", d.code);
        }
        out
    }

    fn rejected(diagnostic: Diagnostic) -> Self {
        RunOutput {
            stdout: String::new(),
            diagnostic: Some(diagnostic),
            trace: Vec::new(),
            dump: None,
            evaluation: None,
        }
    }
}

pub fn run_source(source: &str, options: RunOptions) -> RunOutput {
    let program = match parse(source) {
        Ok(p) => p,
        Err(e) => return RunOutput::rejected(Diagnostic::from(&e)),
    };
    let env = match build_type_env(&program) {
        Ok(env) => env,
        Err(e) => return RunOutput::rejected(Diagnostic::from(&e)),
    };
    if let Some(e) = check_arity_and_names(&program, &env).first() {
        return RunOutput::rejected(Diagnostic::from(e));
    }
    let eval = evaluate(
        &env,
        &program,
        EvalOptions {
            strict_rules: options.strict_rules,
            trace: options.trace,
        },
    );
    let mut stdout = String::new();
    for probe in &eval.probes {
        let _ = writeln!(stdout, "{}: {}", probe.name, probe.state);
    }
    let diagnostic = match &eval.result {
        Ok(r) => {
            let _ = writeln!(stdout, "{}", eval.context.render_value(*r));
            None
        }
        Err(e) => Some(Diagnostic::from(e)),
    };
    RunOutput {
        stdout,
        diagnostic,
        trace: eval.trace.clone(),
        dump: options.dump_context.then(|| eval.context.dump()),
        evaluation: Some(eval),
    }
}
