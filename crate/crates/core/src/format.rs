//! Line-based text formats for systems, trees and terms.
//!
//! ```text
//! # comment
//! sig mul 2
//! var x = mul(y,y)
//! var y = param a
//! root x              # tree files only
//! ```
//!
//! Term files use the same `sig` lines and `var x = TERM`, where a term is
//! a variable name, `param NAME`, or `op(TERM,...)` (`c()` for constants).

use std::fmt;

use thiserror::Error;

use crate::rational::RationalTree;
use crate::system::{validate, Diagnostic, FlatRhs, FlatSystem, Signature, SystemError, Term, VarId};

/// A problem in an input file; `line` is 1-based, 0 when it concerns the
/// file as a whole.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.file, self.message)
        } else {
            write!(f, "{}:{}: {}", self.file, self.line, self.message)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tok<'a> {
    Word(&'a str),
    Sym(char),
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => f.write_str(w),
            Tok::Sym(c) => write!(f, "{c}"),
        }
    }
}

const SYMBOLS: &[char] = &['=', '(', ')', ','];

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() || SYMBOLS.contains(&c) {
            if let Some(s) = start.take() {
                out.push(Tok::Word(&line[s..i]));
            }
            if !c.is_whitespace() {
                out.push(Tok::Sym(c));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok::Word(&line[s..]));
    }
    out
}

/// Non-empty lines as `(line number, tokens, raw text)`.
pub(crate) fn lines(src: &str) -> impl Iterator<Item = (usize, Vec<Tok<'_>>, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, tokenize(l), l))
        .filter(|(_, toks, _)| !toks.is_empty())
}

pub(crate) struct Errors<'a> {
    pub file: &'a str,
}

impl Errors<'_> {
    pub fn at(&self, line: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            file: self.file.to_owned(),
            line,
            message: message.into(),
        }
    }
}

fn is_name(w: &str) -> bool {
    !w.is_empty() && w.chars().all(|c| c.is_alphanumeric() || "_.$':-".contains(c))
}

pub(crate) fn name<'a>(err: &Errors, line: usize, tok: Option<&Tok<'a>>, what: &str) -> Result<&'a str, ParseError> {
    match tok {
        Some(Tok::Word(w)) if is_name(w) => Ok(w),
        Some(t) => Err(err.at(line, format!("expected {what}, found `{t}`"))),
        None => Err(err.at(line, format!("expected {what}"))),
    }
}

pub(crate) fn expect_sym(err: &Errors, line: usize, tok: Option<&Tok>, sym: char) -> Result<(), ParseError> {
    match tok {
        Some(Tok::Sym(c)) if *c == sym => Ok(()),
        Some(t) => Err(err.at(line, format!("expected `{sym}`, found `{t}`"))),
        None => Err(err.at(line, format!("expected `{sym}`"))),
    }
}

pub(crate) fn expect_end(err: &Errors, line: usize, rest: &[Tok]) -> Result<(), ParseError> {
    match rest.first() {
        None => Ok(()),
        Some(t) => Err(err.at(line, format!("unexpected `{t}`"))),
    }
}

pub(crate) fn parse_arity(err: &Errors, line: usize, tok: Option<&Tok>) -> Result<usize, ParseError> {
    match tok {
        Some(Tok::Word(w)) => w
            .parse()
            .map_err(|_| err.at(line, format!("arity must be a natural number, found `{w}`"))),
        _ => Err(err.at(line, "expected an arity")),
    }
}

/// `NAME ( NAME, ... )` starting at `toks[0]`; returns the op, the
/// arguments, and the number of tokens consumed.
pub(crate) fn application<'a>(
    err: &Errors,
    line: usize,
    toks: &[Tok<'a>],
) -> Result<(&'a str, Vec<&'a str>, usize), ParseError> {
    let op = name(err, line, toks.first(), "an operation name")?;
    expect_sym(err, line, toks.get(1), '(')?;
    let mut args = Vec::new();
    let mut i = 2;
    if toks.get(i) == Some(&Tok::Sym(')')) {
        return Ok((op, args, i + 1));
    }
    loop {
        args.push(name(err, line, toks.get(i), "an argument")?);
        i += 1;
        match toks.get(i) {
            Some(Tok::Sym(',')) => i += 1,
            Some(Tok::Sym(')')) => return Ok((op, args, i + 1)),
            Some(t) => return Err(err.at(line, format!("expected `,` or `)`, found `{t}`"))),
            None => return Err(err.at(line, "missing `)`")),
        }
    }
}

struct Declarations<'a> {
    sig: Signature,
    /// `(line, var, tokens after '=')`
    vars: Vec<(usize, &'a str, Vec<Tok<'a>>)>,
    roots: Vec<(usize, &'a str)>,
}

fn declarations<'a>(err: &Errors, src: &'a str, allow_root: bool) -> Result<Declarations<'a>, ParseError> {
    let mut d = Declarations {
        sig: Signature::new(),
        vars: Vec::new(),
        roots: Vec::new(),
    };
    for (line, toks, _) in lines(src) {
        match toks[0] {
            Tok::Word("sig") => {
                let op = name(err, line, toks.get(1), "an operation name")?;
                let arity = parse_arity(err, line, toks.get(2))?;
                expect_end(err, line, &toks[3.min(toks.len())..])?;
                d.sig.declare(op, arity).map_err(|e| err.at(line, e.to_string()))?;
            }
            Tok::Word("var") => {
                let x = name(err, line, toks.get(1), "a variable name")?;
                expect_sym(err, line, toks.get(2), '=')?;
                d.vars.push((line, x, toks[3.min(toks.len())..].to_vec()));
            }
            Tok::Word("root") if allow_root => {
                let x = name(err, line, toks.get(1), "a variable name")?;
                expect_end(err, line, &toks[2.min(toks.len())..])?;
                d.roots.push((line, x));
            }
            t => {
                let expected = if allow_root {
                    "`sig`, `var` or `root`"
                } else {
                    "`sig` or `var`"
                };
                return Err(err.at(line, format!("expected {expected}, found `{t}`")));
            }
        }
    }
    Ok(d)
}

fn flat_rhs(err: &Errors, line: usize, toks: &[Tok]) -> Result<FlatRhs<String>, ParseError> {
    if toks.first() == Some(&Tok::Word("param")) {
        let p = name(err, line, toks.get(1), "a parameter")?;
        expect_end(err, line, &toks[2.min(toks.len())..])?;
        return Ok(FlatRhs::Param(p.to_owned()));
    }
    let (op, args, used) = application(err, line, toks)?;
    expect_end(err, line, &toks[used..])?;
    Ok(FlatRhs::op(op, args.into_iter().map(VarId::from)))
}

fn diagnostic_line(d: &Diagnostic, lines: &[(VarId, usize)]) -> usize {
    let find = |v: &VarId| lines.iter().find(|(x, _)| x == v).map_or(0, |(_, l)| *l);
    match d {
        Diagnostic::DuplicateVar { var } => lines.iter().filter(|(x, _)| x == var).nth(1).map_or(0, |(_, l)| *l),
        Diagnostic::EmptyVar => 0,
        Diagnostic::UnknownVar { at, .. } | Diagnostic::UnknownOp { at, .. } | Diagnostic::ArityMismatch { at, .. } => {
            find(at)
        }
    }
}

fn build_system(
    err: &Errors,
    sig: Signature,
    eqs: Vec<(VarId, FlatRhs<String>)>,
    lines: &[(VarId, usize)],
) -> Result<FlatSystem<String>, ParseError> {
    if let Err(diags) = validate(&sig, &eqs) {
        let d = &diags[0];
        return Err(err.at(diagnostic_line(d, lines), d.to_string()));
    }
    FlatSystem::new(sig, eqs).map_err(|e| err.at(0, e.to_string()))
}

/// Parses a system file. `file` names the source in error messages.
pub fn parse_system(file: &str, src: &str) -> Result<FlatSystem<String>, ParseError> {
    let err = Errors { file };
    let d = declarations(&err, src, false)?;
    parse_flat(&err, d).map(|(sys, _)| sys)
}

type VarLines = Vec<(VarId, usize)>;

fn parse_flat(err: &Errors, d: Declarations) -> Result<(FlatSystem<String>, VarLines), ParseError> {
    let mut eqs = Vec::with_capacity(d.vars.len());
    let mut var_lines = Vec::with_capacity(d.vars.len());
    for (line, x, toks) in &d.vars {
        eqs.push((VarId::from(*x), flat_rhs(err, *line, toks)?));
        var_lines.push((VarId::from(*x), *line));
    }
    if eqs.is_empty() {
        return Err(err.at(0, "no `var` lines"));
    }
    let sys = build_system(err, d.sig, eqs, &var_lines)?;
    Ok((sys, var_lines))
}

/// Parses a tree file: a system plus exactly one `root` line.
pub fn parse_tree(file: &str, src: &str) -> Result<RationalTree<String>, ParseError> {
    let err = Errors { file };
    let d = declarations(&err, src, true)?;
    let roots = d.roots.clone();
    let (sys, _) = parse_flat(&err, d)?;
    match roots.as_slice() {
        [] => Err(err.at(0, "missing `root` line")),
        [(line, x)] => RationalTree::new(&sys, &VarId::from(*x)).map_err(|e| err.at(*line, e.to_string())),
        [_, (line, _), ..] => Err(err.at(*line, "more than one `root` line")),
    }
}

fn term<'a>(err: &Errors, line: usize, toks: &[Tok<'a>], pos: &mut usize) -> Result<Term<String>, ParseError> {
    let head = name(err, line, toks.get(*pos), "a term")?;
    *pos += 1;
    if head == "param" {
        let p = name(err, line, toks.get(*pos), "a parameter")?;
        *pos += 1;
        return Ok(Term::Param(p.to_owned()));
    }
    if toks.get(*pos) != Some(&Tok::Sym('(')) {
        return Ok(Term::var(head));
    }
    *pos += 1;
    let mut args = Vec::new();
    if toks.get(*pos) == Some(&Tok::Sym(')')) {
        *pos += 1;
        return Ok(Term::op(head, args));
    }
    loop {
        args.push(term(err, line, toks, pos)?);
        match toks.get(*pos) {
            Some(Tok::Sym(',')) => *pos += 1,
            Some(Tok::Sym(')')) => {
                *pos += 1;
                return Ok(Term::op(head, args));
            }
            Some(t) => return Err(err.at(line, format!("expected `,` or `)`, found `{t}`"))),
            None => return Err(err.at(line, "missing `)`")),
        }
    }
}

pub type TermEquations = Vec<(VarId, Term<String>)>;

/// Parses a term file into a signature and the list of equations.
pub fn parse_terms(file: &str, src: &str) -> Result<(Signature, TermEquations), ParseError> {
    let err = Errors { file };
    let d = declarations(&err, src, false)?;
    let mut eqs = Vec::with_capacity(d.vars.len());
    for (line, x, toks) in &d.vars {
        let mut pos = 0;
        let t = term(&err, *line, toks, &mut pos)?;
        expect_end(&err, *line, &toks[pos..])?;
        check_term(&err, *line, &d.sig, &t)?;
        eqs.push((VarId::from(*x), t));
    }
    if eqs.is_empty() {
        return Err(err.at(0, "no `var` lines"));
    }
    Ok((d.sig, eqs))
}

fn check_term(err: &Errors, line: usize, sig: &Signature, t: &Term<String>) -> Result<(), ParseError> {
    if let Term::Op(op, args) = t {
        match sig.arity(op) {
            None => return Err(err.at(line, format!("unknown operation `{op}`"))),
            Some(n) if n != args.len() => {
                return Err(err.at(line, format!("`{op}` expects {n} argument(s), found {}", args.len())))
            }
            _ => {}
        }
        for a in args {
            check_term(err, line, sig, a)?;
        }
    }
    Ok(())
}

/// Maps a flattening error back to the line of the offending equation.
pub fn locate_flatten_error(file: &str, src: &str, e: &SystemError) -> ParseError {
    let line = match e {
        SystemError::UnguardedVariable(x) => lines(src)
            .find(|(_, toks, _)| toks.get(1) == Some(&Tok::Word(x.as_str())) && toks[0] == Tok::Word("var"))
            .map_or(0, |(l, _, _)| l),
        _ => 0,
    };
    ParseError {
        file: file.to_owned(),
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_display() {
        let src = "# idempotent\nsig mul 2\nvar x = mul ( y , y )\nvar y = param a\n";
        let sys = parse_system("t.eq", src).unwrap();
        assert_eq!(sys.to_string(), "sig mul 2\nvar x = mul(y,y)\nvar y = param a\n");
        assert_eq!(parse_system("t.eq", &sys.to_string()).unwrap(), sys);
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_system("bad.eq", "sig mul 2\nvar x = mul(x)\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.to_string().starts_with("bad.eq:2: "), "{err}");
        let err = parse_system("bad.eq", "sig mul 2\n\nvar x = add(x,x)\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("add"));
        let err = parse_system("bad.eq", "sig mul 2\nvar x = mul(x,x\n").unwrap_err();
        assert_eq!((err.line, err.message.as_str()), (2, "missing `)`"));
        let err = parse_system("bad.eq", "sig mul two\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_system("bad.eq", "sig mul 2\nvar x = param a\nvar x = param b\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(parse_system("e.eq", "# nothing\n").unwrap_err().line, 0);
    }

    #[test]
    fn trees_need_one_root() {
        let src = "sig mul 2\nvar x = mul(a,x)\nvar a = param a\nroot x\n";
        assert_eq!(parse_tree("t.rt", src).unwrap().state_count(), 2);
        assert_eq!(
            parse_tree("t.rt", "sig mul 2\nvar a = param a\n").unwrap_err().message,
            "missing `root` line"
        );
        assert_eq!(parse_tree("t.rt", "var a = param a\nroot b\n").unwrap_err().line, 2);
    }

    #[test]
    fn terms() {
        let (sig, eqs) = parse_terms("t.tm", "sig mul 2\nsig c 0\nvar x1 = mul(mul(x2, param a), c())\n").unwrap();
        assert_eq!(sig.arity("c"), Some(0));
        assert_eq!(eqs[0].1.to_string(), "mul(mul(x2,param a),c())");
        assert_eq!(parse_terms("t.tm", "sig mul 2\nvar x = mul(x)\n").unwrap_err().line, 2);
    }
}
