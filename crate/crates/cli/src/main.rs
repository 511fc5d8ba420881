use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acalc::corpus::{diff, run_corpus};
use acalc::diagnostics::{render, Diagnostic};
use acalc::driver::{run_source, RunOptions, RunOutput, EXIT_OK, EXIT_STATIC};
use acalc::eval::render_trace;
use acalc::matrix::{build_matrix, render_matrix};
use clap::{Args, Parser, Subcommand};

/// Deeply nested programs recurse deeply in the evaluator.
const STACK_SIZE: usize = 256 * 1024 * 1024;

#[derive(Parser)]
#[command(
    name = "azc",
    version,
    about = "Run programs of the alias/copy/move calculus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a program and print its probes and final value.
    Run {
        file: PathBuf,
        /// Keep bindings and capabilities at scope exit.
        #[arg(long)]
        strict_rules: bool,
        /// Print the context tables after evaluation.
        #[arg(long)]
        dump_context: bool,
        #[command(flatten)]
        report: Report,
    },
    /// Print every rule application, one per line, then the output.
    Trace {
        file: PathBuf,
        #[arg(long)]
        strict_rules: bool,
        #[command(flatten)]
        report: Report,
    },
    /// Reproduce the reference state transition matrix.
    Matrix,
    /// Run every `.azc` file of a directory against its `.expected` file.
    Test { dir: PathBuf },
}

#[derive(Args, Clone, Copy)]
struct Report {
    /// Print diagnostics as `key=value` records.
    #[arg(long)]
    machine: bool,
}

fn report(d: &Diagnostic, source: &str, report: Report, err: &mut impl Write) {
    let text = if report.machine {
        format!("{}\n", d.machine())
    } else {
        render(d, source)
    };
    let _ = err.write_all(text.as_bytes());
}

fn read(path: &Path, r: Report) -> Result<String, i32> {
    fs::read_to_string(path).map_err(|e| {
        report(
            &Diagnostic::io(&path.display().to_string(), &e),
            "",
            r,
            &mut io::stderr(),
        );
        EXIT_STATIC
    })
}

fn finish(out: &RunOutput, source: &str, r: Report) -> i32 {
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    if let Some(dump) = &out.dump {
        let _ = stdout.write_all(dump.as_bytes());
    }
    let _ = stdout.flush();
    if let Some(d) = &out.diagnostic {
        report(d, source, r, &mut io::stderr());
    }
    out.exit_code()
}

fn test(dir: &Path) -> i32 {
    let results = match run_corpus(dir) {
        Ok(results) => results,
        Err(e) => {
            let d = Diagnostic::io(&dir.display().to_string(), &e);
            report(&d, "", Report { machine: false }, &mut io::stderr());
            return EXIT_STATIC;
        }
    };
    if results.is_empty() {
        eprintln!("warning: no tests found in {}", dir.display());
        return EXIT_OK;
    }
    let mut failed = 0;
    for case in &results {
        let name = case.path.file_name().unwrap_or_default().to_string_lossy();
        if case.passed() {
            println!("pass {name}");
            continue;
        }
        failed += 1;
        match &case.expected {
            Some(expected) => print!("FAIL {name}\n{}", diff(expected, &case.actual)),
            None => println!("FAIL {name}: missing .expected file"),
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    i32::from(failed > 0)
}

fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Run {
            file,
            strict_rules,
            dump_context,
            report,
        } => match read(&file, report) {
            Ok(source) => {
                let options = RunOptions {
                    strict_rules,
                    dump_context,
                    trace: false,
                };
                finish(&run_source(&source, options), &source, report)
            }
            Err(code) => code,
        },
        Command::Trace {
            file,
            strict_rules,
            report,
        } => match read(&file, report) {
            Ok(source) => {
                let options = RunOptions {
                    strict_rules,
                    trace: true,
                    dump_context: false,
                };
                let out = run_source(&source, options);
                print!("{}", render_trace(&out.trace));
                finish(&out, &source, report)
            }
            Err(code) => code,
        },
        Command::Matrix => {
            print!("{}", render_matrix(&build_matrix()));
            EXIT_OK
        }
        Command::Test { dir } => test(&dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = std::thread::Builder::new()
        .stack_size(STACK_SIZE)
        .spawn(move || dispatch(cli))
        .expect("spawn interpreter thread")
        .join()
        .unwrap_or(101);
    ExitCode::from(code as u8)
}
