//! Terms over the ternary signature `m`, with optional constants and a unary box.
//!
//! The join `p | q` is not a separate node: it is always stored as `m(p,p,q)`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Symbols available to the parser besides variables and `m`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    constants: Vec<String>,
    has_box: bool,
}

impl Signature {
    pub fn new<S: AsRef<str>>(constants: &[S], has_box: bool) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in constants {
            let c = c.as_ref();
            if !is_constant_name(c) {
                return Err(Error::InvalidAlgebra(format!("`{c}` cannot name a constant")));
            }
            if !seen.insert(c.to_string()) {
                return Err(Error::InvalidAlgebra(format!("constant `{c}` declared twice")));
            }
            out.push(c.to_string());
        }
        Ok(Signature { constants: out, has_box })
    }

    /// Only `m` and variables.
    pub fn plain() -> Self {
        Signature::default()
    }

    /// `top`, `bot1`, `bot2` and box.
    pub fn full() -> Self {
        Signature::new(&["top", "bot1", "bot2"], true).expect("static signature")
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn has_box(&self) -> bool {
        self.has_box
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }
}

/// True for identifiers usable as constant names: not a variable, not an operator.
pub fn is_constant_name(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else { return false };
    (first.is_ascii_alphabetic() || first == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && parse_var(s).is_none()
        && s != "m"
        && s != "box"
}

fn parse_var(s: &str) -> Option<u32> {
    let digits = s.strip_prefix('x')?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    Const(Arc<str>),
    M(Arc<[Term; 3]>),
    Box(Arc<Term>),
}

impl Term {
    pub fn var(i: u32) -> Term {
        Term::Var(i)
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    pub fn m(a: Term, b: Term, c: Term) -> Term {
        Term::M(Arc::new([a, b, c]))
    }

    /// `a | b`, that is `m(a,a,b)`.
    pub fn join(a: Term, b: Term) -> Term {
        Term::m(a.clone(), a, b)
    }

    pub fn boxed(a: Term) -> Term {
        Term::Box(Arc::new(a))
    }

    /// The operands of `m(a,a,b)`.
    pub fn as_join(&self) -> Option<(&Term, &Term)> {
        match self {
            Term::M(args) if args[0] == args[1] => Some((&args[0], &args[2])),
            _ => None,
        }
    }

    pub fn as_m(&self) -> Option<(&Term, &Term, &Term)> {
        match self {
            Term::M(args) => Some((&args[0], &args[1], &args[2])),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, Term::M(_))
    }

    /// Nesting depth of operator nodes; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::M(args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Box(a) => 1 + a.depth(),
        }
    }

    /// Node count where a join counts its repeated operand once.
    pub fn join_size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::M(args) if args[0] == args[1] => 1 + args[0].join_size() + args[2].join_size(),
            Term::M(args) => 1 + args.iter().map(Term::join_size).sum::<usize>(),
            Term::Box(a) => 1 + a.join_size(),
        }
    }

    /// Disjuncts of a nested join, left to right.
    pub fn join_atoms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        fn walk(t: &Term, out: &mut Vec<Term>) {
            match t.as_join() {
                Some((a, b)) => {
                    walk(a, out);
                    walk(b, out);
                }
                None => out.push(t.clone()),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn constants(&self) -> Vec<Arc<str>> {
        let mut out: Vec<Arc<str>> = Vec::new();
        self.visit(&mut |t| {
            if let Term::Const(c) = t {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        });
        out
    }

    pub fn uses_box(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, Term::Box(_)));
        found
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::M(args) => args.iter().for_each(|a| a.visit(f)),
            Term::Box(a) => a.visit(f),
            _ => {}
        }
    }
}

/// `m^n(args[0],...,args[n], last)` with `n = args.len() - 1`.
pub fn build_mn(args: &[Term], last: &Term) -> Result<Term> {
    let (first, rest) = args.split_first().ok_or(Error::EmptyArgs)?;
    let mut acc = Term::join(first.clone(), last.clone());
    for a in rest {
        acc = Term::m(acc, a.clone(), last.clone());
    }
    Ok(acc)
}

/// All argument lists `a` with `build_mn(a, last) == t`, shortest first, up to `max_n + 1` arguments.
pub fn mn_decompositions(t: &Term, last: &Term, max_n: usize) -> Vec<Vec<Term>> {
    let mut out = Vec::new();
    let Some((a, b, c)) = t.as_m() else { return out };
    if c != last {
        return out;
    }
    if a == b {
        out.push(vec![a.clone()]);
    }
    if max_n >= 1 {
        for mut prefix in mn_decompositions(a, last, max_n - 1) {
            prefix.push(b.clone());
            out.push(prefix);
        }
    }
    out
}

/// Simultaneous substitution; variables outside the map stay put.
pub fn substitute(t: &Term, map: &BTreeMap<u32, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::M(args) => Term::m(substitute(&args[0], map), substitute(&args[1], map), substitute(&args[2], map)),
        Term::Box(a) => Term::boxed(substitute(a, map)),
    }
}

/// Variables in order of first occurrence.
pub fn variables_of(t: &Term) -> Vec<u32> {
    let mut out = Vec::new();
    t.visit(&mut |s| {
        if let Term::Var(v) = s {
            if !out.contains(v) {
                out.push(*v);
            }
        }
    });
    out
}

/// Variables of several terms, first occurrence across the list.
pub fn variables_of_all<'a>(ts: impl IntoIterator<Item = &'a Term>) -> Vec<u32> {
    let mut out = Vec::new();
    for t in ts {
        for v in variables_of(t) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "x{v}"),
            Term::Const(c) => f.write_str(c),
            Term::Box(a) => write!(f, "box({a})"),
            Term::M(args) if args[0] == args[1] => {
                write!(f, "{} | ", args[0])?;
                if args[2].as_join().is_some() {
                    write!(f, "({})", args[2])
                } else {
                    write!(f, "{}", args[2])
                }
            }
            Term::M(args) => write!(f, "m({},{},{})", args[0], args[1], args[2]),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Bar,
    Turnstile,
    Semicolon,
    End,
}

pub(crate) struct Parser<'a> {
    text: &'a str,
    pos: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &'a str, sig: &'a Signature) -> Self {
        Parser { text, pos: 0, sig }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token and its start offset, without consuming.
    pub(crate) fn peek(&mut self) -> Result<(Tok, usize, usize)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let Some(c) = rest.chars().next() else { return Ok((Tok::End, start, start)) };
        let single = |t| Ok((t, start, start + 1));
        match c {
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            ',' => single(Tok::Comma),
            ';' => single(Tok::Semicolon),
            '|' if rest.starts_with("|-") => Ok((Tok::Turnstile, start, start + 2)),
            '|' => single(Tok::Bar),
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let len = rest.find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(rest.len());
                Ok((Tok::Ident(rest[..len].to_string()), start, start + len))
            }
            other => Err(Error::Parse { pos: start, msg: format!("unexpected character `{other}`") }),
        }
    }

    pub(crate) fn next(&mut self) -> Result<(Tok, usize)> {
        let (tok, start, end) = self.peek()?;
        self.pos = end;
        Ok((tok, start))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let (tok, pos) = self.next()?;
        if tok == want {
            Ok(())
        } else {
            Err(Error::Parse { pos, msg: format!("expected {what}") })
        }
    }

    pub(crate) fn at_end(&mut self) -> Result<bool> {
        Ok(self.peek()?.0 == Tok::End)
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        let (tok, start, _) = self.peek()?;
        if tok == Tok::End {
            Ok(())
        } else {
            Err(Error::Parse { pos: start, msg: "trailing input".into() })
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Term> {
        let mut acc = self.primary()?;
        while self.peek()?.0 == Tok::Bar {
            self.next()?;
            let rhs = self.primary()?;
            acc = Term::join(acc, rhs);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Term> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::LParen => {
                let t = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                if let Some(v) = parse_var(&name) {
                    return Ok(Term::Var(v));
                }
                match name.as_str() {
                    "m" => {
                        self.expect(Tok::LParen, "`(` after m")?;
                        let a = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.expr()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let c = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Term::m(a, b, c))
                    }
                    "box" => {
                        if !self.sig.has_box() {
                            return Err(Error::BoxNotAllowed);
                        }
                        self.expect(Tok::LParen, "`(` after box")?;
                        let a = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Term::boxed(a))
                    }
                    _ if self.sig.has_constant(&name) => Ok(Term::constant(&name)),
                    _ if is_constant_name(&name) => Err(Error::UnknownConstant(name)),
                    _ => Err(Error::Parse { pos, msg: format!("bad identifier `{name}`") }),
                }
            }
            Tok::End => Err(Error::Parse { pos, msg: "unexpected end of input".into() }),
            _ => Err(Error::Parse { pos, msg: "expected a term".into() }),
        }
    }
}

pub fn parse_formula(text: &str, sig: &Signature) -> Result<Term> {
    let mut p = Parser::new(text, sig);
    let t = p.expr()?;
    p.finish()?;
    Ok(t)
}

/// Semicolon-separated list of formulas; blank input is the empty list.
pub fn parse_formula_list(text: &str, sig: &Signature) -> Result<Vec<Term>> {
    let mut p = Parser::new(text, sig);
    let mut out = Vec::new();
    if p.at_end()? {
        return Ok(out);
    }
    loop {
        out.push(p.expr()?);
        let (tok, pos) = p.next()?;
        match tok {
            Tok::End => return Ok(out),
            Tok::Semicolon => {}
            _ => return Err(Error::Parse { pos, msg: "expected `;`".into() }),
        }
    }
}
