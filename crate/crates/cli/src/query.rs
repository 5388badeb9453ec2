//! Query language: `;`-separated statements over one event grammar.
//!
//! ```text
//! program   := stmt (';' stmt)*
//! stmt      := spacedecl | letbind | command
//! spacedecl := 'space' kind family ['weight' wspec]
//! kind      := 'nat' | 'q' | 'r' | 'coin'
//! family    := 'all' | 'even' | 'odd' | 'factorial' | 'grid' | 'ct'
//! letbind   := 'let' NAME '=' expr
//! wspec     := '[' rat (',' rat)* ']' ['except' '{' INT ':' rat (',' ...)* '}']
//! command   := ('numerosity' | 'prob' | 'st' | 'density' | 'verify') expr
//!            | ('cond' | 'condfin') expr expr
//!            | 'sum' 'weight' wspec expr
//!            | 'axioms' expr (',' expr)* ['partition' expr (',' expr)*]
//! ```
//!
//! Names are expanded at parse time, so a parsed [`Program`] holds closed
//! expressions and renders back to its normal form.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use nap_core::eventual::DirectedFamily;
use nap_core::events::expr::EventExpr;
use nap_core::events::weight::WeightFn;
use nap_core::events::{EventError, SpaceKind};

use crate::{CliError, ErrorKind};

const RESERVED: [&str; 26] = [
    "prog", "fin", "interval", "nat", "int", "rat", "pos", "all", "empty", "cyl", "seq", "sqrt", "tail", "space",
    "let", "numerosity", "prob", "cond", "condfin", "sum", "st", "density", "axioms", "verify", "weight",
    "partition",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceDecl {
    pub kind: SpaceKind,
    pub family: DirectedFamily,
    pub weight: Option<WeightFn>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Numerosity(EventExpr),
    Prob(EventExpr),
    Cond(EventExpr, EventExpr),
    /// Conditioning on an event with finitely many points.
    CondFin(EventExpr, EventExpr),
    Sum(WeightFn, EventExpr),
    St(EventExpr),
    Density(EventExpr),
    Axioms(Vec<EventExpr>, Option<Vec<EventExpr>>),
    Verify(EventExpr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Space(SpaceDecl),
    Let(String, EventExpr),
    Command(Command),
}

/// A parsed program; statement positions are kept for error reports.
#[derive(Clone, Debug)]
pub struct Program {
    pub stmts: Vec<Stmt>,
    positions: Vec<(usize, usize)>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Program) -> bool {
        self.stmts == other.stmts
    }
}

impl Eq for Program {}

impl Program {
    /// 1-based line and column of statement `i`.
    pub fn position(&self, i: usize) -> (usize, usize) {
        self.positions[i]
    }
}

/// 1-based line and column (in characters) of byte `offset`.
pub fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let start = before.rfind('\n').map_or(0, |i| i + 1);
    (line, before[start..].chars().count() + 1)
}

fn kind_word(kind: SpaceKind) -> &'static str {
    match kind {
        SpaceKind::Nat => "nat",
        SpaceKind::Rational => "q",
        SpaceKind::Real => "r",
        SpaceKind::Coin => "coin",
    }
}

fn family_word(family: DirectedFamily) -> &'static str {
    match family {
        DirectedFamily::AllN => "all",
        DirectedFamily::EvenN => "even",
        DirectedFamily::OddN => "odd",
        DirectedFamily::FactorialN => "factorial",
        DirectedFamily::QGrid | DirectedFamily::RGrid => "grid",
        DirectedFamily::CoinCt => "ct",
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, kind: ErrorKind, at: usize, msg: impl Into<String>) -> CliError {
        let (line, column) = line_column(self.src, at);
        CliError {
            kind,
            message: msg.into(),
            line: Some(line),
            column: Some(column),
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> CliError {
        self.error(ErrorKind::Syntax, self.pos, msg)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..self.end]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.end
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{c}`")))
        }
    }

    fn peek_word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let r = self.rest();
        let first = r.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let len = r.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(r.len());
        Some(&r[..len])
    }

    fn word(&mut self) -> Option<&'a str> {
        let w = self.peek_word()?;
        self.pos += w.len();
        Some(w)
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.peek_word() == Some(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn finish(&mut self) -> Result<(), CliError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.syntax("unexpected input"))
        }
    }

    fn expr(&mut self, env: &BTreeMap<String, EventExpr>) -> Result<EventExpr, CliError> {
        self.skip_ws();
        let start = self.pos;
        if start >= self.end {
            return Err(self.syntax("expected an event expression"));
        }
        match EventExpr::parse_prefix(&self.src[..self.end], start, env) {
            Ok((e, end)) => {
                self.pos = end;
                Ok(e)
            }
            Err(EventError::Parse { pos, msg }) => Err(self.error(ErrorKind::Syntax, pos, msg)),
            Err(EventError::UnknownName(name)) => {
                Err(self.error(ErrorKind::UnknownIdentifier, start, format!("unknown identifier `{name}`")))
            }
            Err(e) => Err(self.error(ErrorKind::Event, start, e.to_string())),
        }
    }

    fn rational(&mut self) -> Result<BigRational, CliError> {
        self.skip_ws();
        let r = self.rest();
        let len = r
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_digit() || c == '/' || (i == 0 && c == '-')))
            .map_or(r.len(), |(i, _)| i);
        let v = r[..len]
            .parse::<BigRational>()
            .map_err(|_| self.syntax("expected a rational number"))?;
        self.pos += len;
        Ok(v)
    }

    fn weight(&mut self) -> Result<WeightFn, CliError> {
        let start = self.pos;
        self.expect('[')?;
        let mut residues = vec![self.rational()?];
        while self.eat(',') {
            residues.push(self.rational()?);
        }
        self.expect(']')?;
        let mut exceptions = BTreeMap::new();
        if self.keyword("except") {
            self.expect('{')?;
            loop {
                self.skip_ws();
                let at = self.pos;
                let x = self.rational()?;
                if !x.is_integer() || x <= BigRational::from_integer(0.into()) {
                    return Err(self.error(ErrorKind::Syntax, at, "exceptions are indexed by positive integers"));
                }
                self.expect(':')?;
                let w = self.rational()?;
                exceptions.insert(x.to_integer().to_string().parse().unwrap(), w);
                if !self.eat(',') {
                    break;
                }
            }
            self.expect('}')?;
        }
        WeightFn::new(residues, exceptions)
            .ok_or_else(|| self.error(ErrorKind::Syntax, start, "weights must be positive"))
    }

    fn expr_list(&mut self, env: &BTreeMap<String, EventExpr>) -> Result<Vec<EventExpr>, CliError> {
        let mut out = vec![self.expr(env)?];
        while self.eat(',') {
            out.push(self.expr(env)?);
        }
        Ok(out)
    }
}

fn space_decl(c: &mut Cursor) -> Result<SpaceDecl, CliError> {
    let at = {
        c.skip_ws();
        c.pos
    };
    let kind = match c.word() {
        Some("nat") => SpaceKind::Nat,
        Some("q") => SpaceKind::Rational,
        Some("r") => SpaceKind::Real,
        Some("coin") => SpaceKind::Coin,
        _ => return Err(c.error(ErrorKind::Syntax, at, "expected a space: nat, q, r or coin")),
    };
    let fam_at = {
        c.skip_ws();
        c.pos
    };
    let family = match (c.word(), kind) {
        (Some("all"), _) => DirectedFamily::AllN,
        (Some("even"), _) => DirectedFamily::EvenN,
        (Some("odd"), _) => DirectedFamily::OddN,
        (Some("factorial"), _) => DirectedFamily::FactorialN,
        (Some("grid"), SpaceKind::Real) => DirectedFamily::RGrid,
        (Some("grid"), _) => DirectedFamily::QGrid,
        (Some("ct"), _) => DirectedFamily::CoinCt,
        _ => {
            return Err(c.error(
                ErrorKind::Syntax,
                fam_at,
                "expected a family: all, even, odd, factorial, grid or ct",
            ))
        }
    };
    if !kind.supports(family) {
        return Err(c.error(
            ErrorKind::FamilyMismatch,
            fam_at,
            format!("family {family} is not defined on space {kind}"),
        ));
    }
    let weight = if c.keyword("weight") {
        if kind != SpaceKind::Nat {
            return Err(c.syntax("weights are only supported on nat"));
        }
        Some(c.weight()?)
    } else {
        None
    };
    c.finish()?;
    Ok(SpaceDecl { kind, family, weight })
}

fn command(
    c: &mut Cursor,
    kw: &str,
    kw_at: usize,
    env: &BTreeMap<String, EventExpr>,
) -> Result<Command, CliError> {
    let cmd = match kw {
        "numerosity" => Command::Numerosity(c.expr(env)?),
        "prob" => Command::Prob(c.expr(env)?),
        "st" => Command::St(c.expr(env)?),
        "density" => Command::Density(c.expr(env)?),
        "verify" => Command::Verify(c.expr(env)?),
        "cond" => Command::Cond(c.expr(env)?, c.expr(env)?),
        "condfin" => Command::CondFin(c.expr(env)?, c.expr(env)?),
        "sum" => {
            if !c.keyword("weight") {
                return Err(c.syntax("expected `weight`"));
            }
            Command::Sum(c.weight()?, c.expr(env)?)
        }
        "axioms" => {
            let events = c.expr_list(env)?;
            let partition = if c.keyword("partition") { Some(c.expr_list(env)?) } else { None };
            Command::Axioms(events, partition)
        }
        _ => return Err(c.error(ErrorKind::Syntax, kw_at, format!("unknown statement `{kw}`"))),
    };
    c.finish()?;
    Ok(cmd)
}

pub fn parse(src: &str) -> Result<Program, CliError> {
    let mut env = BTreeMap::new();
    let mut have_space = false;
    let mut program = Program {
        stmts: Vec::new(),
        positions: Vec::new(),
    };
    let mut start = 0;
    for piece in src.split(';') {
        let end = start + piece.len();
        let mut c = Cursor { src, pos: start, end };
        start = end + 1;
        if c.at_end() {
            continue;
        }
        let kw_at = c.pos;
        let kw = c.word().ok_or_else(|| c.syntax("expected a statement"))?;
        let stmt = match kw {
            "space" => {
                have_space = true;
                Stmt::Space(space_decl(&mut c)?)
            }
            "let" => {
                c.skip_ws();
                let name_at = c.pos;
                let name = c.word().ok_or_else(|| c.syntax("expected a name"))?;
                if RESERVED.contains(&name) {
                    return Err(c.error(ErrorKind::Syntax, name_at, format!("`{name}` is reserved")));
                }
                c.expect('=')?;
                let e = c.expr(&env)?;
                c.finish()?;
                env.insert(name.to_string(), e.clone());
                Stmt::Let(name.to_string(), e)
            }
            _ if !have_space && RESERVED.contains(&kw) => {
                return Err(c.error(ErrorKind::Usage, kw_at, "no space declared"));
            }
            _ => Stmt::Command(command(&mut c, kw, kw_at, &env)?),
        };
        program.stmts.push(stmt);
        program.positions.push(line_column(src, kw_at));
    }
    Ok(program)
}

fn write_list(f: &mut fmt::Formatter<'_>, xs: &[EventExpr]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for SpaceDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "space {} {}", kind_word(self.kind), family_word(self.family))?;
        if let Some(w) = &self.weight {
            write!(f, " {w}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Numerosity(a) => write!(f, "numerosity {a}"),
            Command::Prob(a) => write!(f, "prob {a}"),
            Command::Cond(a, b) => write!(f, "cond {a} {b}"),
            Command::CondFin(a, b) => write!(f, "condfin {a} {b}"),
            Command::Sum(w, a) => write!(f, "sum {w} {a}"),
            Command::St(a) => write!(f, "st {a}"),
            Command::Density(a) => write!(f, "density {a}"),
            Command::Verify(a) => write!(f, "verify {a}"),
            Command::Axioms(xs, partition) => {
                write!(f, "axioms ")?;
                write_list(f, xs)?;
                if let Some(p) = partition {
                    write!(f, " partition ")?;
                    write_list(f, p)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Space(d) => write!(f, "{d}"),
            Stmt::Let(name, e) => write!(f, "let {name} = {e}"),
            Stmt::Command(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.stmts.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statements_and_names() {
        let p = parse("space nat factorial; let E = prog(2,0); prob E").unwrap();
        assert_eq!(p.stmts.len(), 3);
        assert_eq!(p.stmts[2], Stmt::Command(Command::Prob(EventExpr::Prog(2, 0))));
        assert_eq!(p.to_string(), "space nat factorial; let E = prog(2,0); prob prog(2,0)");
    }

    #[test]
    fn juxtaposed_conditionals() {
        let p = parse("space q grid; cond prog(2,0)&nat nat").unwrap();
        let Stmt::Command(Command::Cond(a, b)) = &p.stmts[1] else {
            panic!("{p:?}")
        };
        assert_eq!(*a, EventExpr::inter(EventExpr::Prog(2, 0), EventExpr::Nat));
        assert_eq!(*b, EventExpr::Nat);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("space nat factorial;\nprob prog(2,0) & ").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Syntax);
        assert_eq!(e.line, Some(2));
        let e = parse("space nat factorial; prob X").unwrap_err();
        assert_eq!((e.kind, e.line, e.column), (ErrorKind::UnknownIdentifier, Some(1), Some(27)));
        let e = parse("space coin factorial").unwrap_err();
        assert_eq!((e.kind, e.column), (ErrorKind::FamilyMismatch, Some(12)));
        assert_eq!(parse("prob nat").unwrap_err().kind, ErrorKind::Usage);
    }

    #[test]
    fn weights_round_trip() {
        let src = "space nat all weight [2,1,1/3] except{5:7/2}; sum weight [1] prog(2,0)";
        let p = parse(src).unwrap();
        assert_eq!(parse(&p.to_string()).unwrap(), p);
    }
}
