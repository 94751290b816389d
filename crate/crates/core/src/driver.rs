//! The pipeline behind the command line: check, run, eval and dual.
//!
//! Each command writes its normal output to `out`, diagnostics to `err`,
//! and returns the process exit status.

use std::io::Write;

use crate::check::{check_source, synth_closed, CheckedProgram};
use crate::diag::{Code, Diagnostic};
use crate::eval::{eval_pure, PureOutcome, DEFAULT_FUEL};
use crate::runtime::{Configuration, Outcome, DEFAULT_MAX_STEPS};
use crate::span::{LineIndex, Span};
use crate::syntax::resolve::resolve_term;
use crate::syntax::{parse_term, parse_type, resolve_type, Aliases, Printer};
use crate::term::Term;
use crate::types::{dualize, Type};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Clone, Debug)]
pub struct Options {
    pub json: bool,
    pub color: bool,
    pub trace: bool,
    pub trace_json: bool,
    pub max_steps: usize,
    pub fuel: u64,
    /// Seed for a randomised schedule.
    pub seed: Option<u64>,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            json: false,
            color: false,
            trace: false,
            trace_json: false,
            max_steps: DEFAULT_MAX_STEPS,
            fuel: DEFAULT_FUEL,
            seed: None,
        }
    }
}

/// A source text with a display name, for rendering diagnostics.
#[derive(Clone, Debug)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    pub fn read(path: &str) -> std::io::Result<Source> {
        Ok(Source {
            name: path.to_string(),
            text: std::fs::read_to_string(path)?,
        })
    }

    pub fn inline(text: &str) -> Source {
        Source {
            name: "<input>".into(),
            text: text.to_string(),
        }
    }

    pub fn render(&self, diags: &[Diagnostic], opts: &Options) -> String {
        let index = LineIndex::new(&self.text);
        let mut s = String::new();
        for d in diags {
            if opts.json {
                s.push_str(&d.to_json(&self.name, &index));
            } else {
                s.push_str(&d.render(&self.name, &index, opts.color));
            }
            s.push('\n');
        }
        s
    }
}

fn load(path: &str, opts: &Options, err: &mut dyn Write) -> Result<(Source, CheckedProgram), i32> {
    let src = match Source::read(path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{path}: {e}");
            return Err(EXIT_ERROR);
        }
    };
    match check_source(&src.text) {
        Ok(p) => Ok((src, p)),
        Err(ds) => {
            let _ = write!(err, "{}", src.render(&ds, opts));
            Err(EXIT_ERROR)
        }
    }
}

/// `semp check FILE`: prints `name : Type` for every declaration.
pub fn cmd_check(path: &str, opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match load(path, opts, err) {
        Ok((_, p)) => {
            for s in p.signatures() {
                let _ = writeln!(out, "{s}");
            }
            EXIT_OK
        }
        Err(code) => code,
    }
}

/// Boots `main` of a checked program.
pub fn boot_main(p: &CheckedProgram) -> Result<Configuration, Diagnostic> {
    let m = p.entry_term("main").map_err(|_| {
        Diagnostic::new(Code::NoMain, "the program has no `main` declaration", Span::default())
    })?;
    let ty = p.decl("main").map(|d| d.ty.clone());
    Ok(Configuration::boot(m, ty))
}

/// `semp run FILE`.
pub fn cmd_run(path: &str, opts: &Options, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (src, p) = match load(path, opts, err) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let mut config = match boot_main(&p) {
        Ok(c) => c,
        Err(d) => {
            let _ = write!(err, "{}", src.render(&[d], opts));
            return EXIT_ERROR;
        }
    };
    if let Some(seed) = opts.seed {
        config.randomize(seed);
    }
    let result = config.run(opts.max_steps);
    for e in &config.events {
        if opts.trace_json {
            let _ = writeln!(out, "{}", e.to_json());
        } else if opts.trace {
            let _ = writeln!(out, "{e}");
        }
    }
    match result {
        Ok(Outcome::Done(_)) => {
            let v = config.threads[0].term.erase();
            let _ = writeln!(out, "Done {}", Printer::plain().term(&v));
            EXIT_OK
        }
        Ok(Outcome::Deadlock(report)) => {
            let _ = writeln!(out, "Deadlock");
            let _ = writeln!(err, "{report}");
            EXIT_DEADLOCK
        }
        Ok(Outcome::StepLimit) => {
            let _ = writeln!(out, "StepLimit");
            let _ = writeln!(err, "stopped after {} steps", opts.max_steps);
            EXIT_LIMIT
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            EXIT_ERROR
        }
    }
}

/// Checks and closes an inline term, in the context of a program's
/// declarations when one is given.
pub fn prepare_term(text: &str, program: Option<&CheckedProgram>) -> Result<(Term, Type), (Source, Vec<Diagnostic>)> {
    let src = Source::inline(text);
    let fail = |d: Diagnostic| (Source::inline(text), vec![d]);
    let aliases = program.map(|p| p.aliases.clone()).unwrap_or_default();
    let m = parse_term(&src.text).map_err(fail)?;
    let m = resolve_term(&m, &aliases).map_err(fail)?;
    let ctx = program.map(CheckedProgram::context).unwrap_or_default();
    let s = synth_closed(ctx, &m).map_err(fail)?;
    let closed = match program {
        Some(p) => p.close_over(s.term, p.decls.len()),
        None => s.term,
    };
    Ok((closed, s.ty))
}

/// `semp eval`: evaluates a term of the pure fragment. `input` is a program
/// file (its `main` is evaluated) or an inline term, checked against the
/// declarations of `with` when given.
pub fn cmd_eval(
    input: &str,
    with: Option<&str>,
    opts: &Options,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let program = match with {
        Some(path) => match load(path, opts, err) {
            Ok((_, p)) => Some(p),
            Err(code) => return code,
        },
        None => None,
    };
    let term = if std::path::Path::new(input).is_file() {
        let (src, p) = match load(input, opts, err) {
            Ok(x) => x,
            Err(code) => return code,
        };
        match p.entry_term("main") {
            Ok(m) => m,
            Err(d) => {
                let _ = write!(err, "{}", src.render(&[d], opts));
                return EXIT_ERROR;
            }
        }
    } else {
        match prepare_term(input, program.as_ref()) {
            Ok((m, _)) => m,
            Err((src, ds)) => {
                let _ = write!(err, "{}", src.render(&ds, opts));
                return EXIT_ERROR;
            }
        }
    };
    match eval_pure(&term, opts.fuel) {
        Ok(PureOutcome::Value(v)) => {
            let _ = writeln!(out, "{}", Printer::plain().term(&v.erase()));
            EXIT_OK
        }
        Ok(PureOutcome::Blocked(..)) => {
            let _ = writeln!(err, "term requires a channel context");
            EXIT_ERROR
        }
        Ok(PureOutcome::FuelExhausted(_)) => {
            let _ = writeln!(err, "fuel exhausted after {} steps", opts.fuel);
            EXIT_LIMIT
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            EXIT_ERROR
        }
    }
}

/// The dual of a session type written in the surface syntax.
pub fn dual_text(text: &str, aliases: &Aliases) -> Result<String, Diagnostic> {
    let t = parse_type(text)?;
    let code = |e: crate::types::TypeError| {
        Diagnostic::new(crate::syntax::resolve::type_error_code(&e), e.to_string(), Span::new(0, text.len()))
    };
    let t = resolve_type(&t, aliases).map_err(code)?;
    let Type::Session(s) = &t else {
        return Err(Diagnostic::new(
            Code::IllFormedType,
            format!("`{}` is not a session type", Printer::plain().ty(&t)),
            Span::new(0, text.len()),
        ));
    };
    let d = dualize(s).map_err(code)?;
    Ok(Printer::with_aliases(aliases).session(&d))
}

/// `semp dual TYPE`, with type aliases from `with` when given.
pub fn cmd_dual(
    text: &str,
    with: Option<&str>,
    opts: &Options,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let aliases = match with {
        Some(path) => match load(path, opts, err) {
            Ok((_, p)) => p.aliases,
            Err(code) => return code,
        },
        None => Aliases::default(),
    };
    match dual_text(text, &aliases) {
        Ok(s) => {
            let _ = writeln!(out, "{s}");
            EXIT_OK
        }
        Err(d) => {
            let _ = write!(err, "{}", Source::inline(text).render(&[d], opts));
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duals() {
        let a = Aliases::default();
        assert_eq!(dual_text("Close", &a).unwrap(), "Wait");
        assert_eq!(dual_text("?Int.Wait", &a).unwrap(), "!Int.Close");
        assert_eq!(dual_text("Unit", &a).unwrap_err().code, Code::IllFormedType);
    }

    #[test]
    fn inline_eval() {
        let (m, t) = prepare_term("(lambda1(x:Unit). x) unit", None).unwrap();
        assert_eq!(t, Type::Unit);
        assert!(matches!(eval_pure(&m, 100).unwrap(), PureOutcome::Value(v) if v == Term::unit()));
    }
}
