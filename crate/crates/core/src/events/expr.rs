//! Event expressions: syntax tree, parser, direct evaluation and compilation.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term ('|' term)*
//! term    := factor ('&' factor)*
//! factor  := '~' factor | '(' expr ')' | atom | NAME
//! atom    := 'prog(' INT ',' INT ')' | 'fin{' num (',' num)* '}'
//!          | 'interval(' num ',' num ')' | 'nat' | 'int' | 'rat' | 'pos'
//!          | 'all' | 'empty' | 'cyl(' 'i'INT '=' COIN (',' ...)* ')'
//!          | 'seq(' [COINS ','] 'tail=' COIN ')'
//! num     := nterm (('+'|'-') nterm)*
//! nterm   := nfactor (('*'|'/') nfactor)*
//! nfactor := '-' nfactor | INT | 'sqrt(' INT ')' | '(' num ')'
//! ```
//!
//! [`EventExpr::contains`] evaluates the tree directly on a point and is
//! independent of the normal forms produced by [`EventExpr::compile`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::coin::{Coin, CoinSet, Sequence};
use super::intset::IntSet;
use super::line::LineSet;
use super::{Event, EventError, Point, SpaceKind};
use crate::surd::Quadratic;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EventExpr {
    /// `{k - l, 2k - l, ...}` with `0 <= l < k`.
    Prog(u64, u64),
    Fin(Vec<Quadratic>),
    /// `[a, b)`.
    Interval(Quadratic, Quadratic),
    Nat,
    Int,
    Rat,
    /// The open ray `(0, +inf)`.
    Pos,
    All,
    Empty,
    /// Tosses `i` (1-based) fixed to the given outcomes.
    Cyl(Vec<(usize, Coin)>),
    Seq(Sequence),
    Union(Box<EventExpr>, Box<EventExpr>),
    Inter(Box<EventExpr>, Box<EventExpr>),
    Not(Box<EventExpr>),
}

impl EventExpr {
    pub fn union(a: EventExpr, b: EventExpr) -> EventExpr {
        EventExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: EventExpr, b: EventExpr) -> EventExpr {
        EventExpr::Inter(Box::new(a), Box::new(b))
    }

    pub fn not(a: EventExpr) -> EventExpr {
        EventExpr::Not(Box::new(a))
    }

    pub fn parse(src: &str) -> Result<EventExpr, EventError> {
        EventExpr::parse_with(src, &BTreeMap::new())
    }

    /// Parses a complete expression; names resolve through `env`.
    pub fn parse_with(src: &str, env: &BTreeMap<String, EventExpr>) -> Result<EventExpr, EventError> {
        let mut p = Parser::new(src, env);
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Parses the longest expression starting at byte `start`; returns it and the end offset.
    pub fn parse_prefix(
        src: &str,
        start: usize,
        env: &BTreeMap<String, EventExpr>,
    ) -> Result<(EventExpr, usize), EventError> {
        let mut p = Parser::new(src, env);
        p.pos = start;
        let e = p.expr()?;
        Ok((e, p.pos))
    }

    /// Membership by direct evaluation; `x` is assumed to lie in `space`.
    pub fn contains(&self, space: SpaceKind, x: &Point) -> bool {
        match (self, x) {
            (EventExpr::Union(a, b), _) => a.contains(space, x) || b.contains(space, x),
            (EventExpr::Inter(a, b), _) => a.contains(space, x) && b.contains(space, x),
            (EventExpr::Not(a), _) => !a.contains(space, x),
            (EventExpr::All, _) => true,
            (EventExpr::Empty, _) => false,
            (EventExpr::Cyl(spec), Point::Seq(s)) => spec.iter().all(|&(i, c)| s.at(i - 1) == c),
            (EventExpr::Seq(t), Point::Seq(s)) => s == t,
            (_, Point::Seq(_)) => false,
            (EventExpr::Cyl(_) | EventExpr::Seq(_), Point::Number(_)) => false,
            (EventExpr::Prog(k, l), Point::Number(v)) => {
                v.is_integer() && {
                    let n = v.floor();
                    n > BigInt::zero() && ((n + BigInt::from(*l)) % BigInt::from(*k)).is_zero()
                }
            }
            (EventExpr::Fin(xs), Point::Number(v)) => xs.contains(v),
            (EventExpr::Interval(a, b), Point::Number(v)) => a <= v && v < b,
            (EventExpr::Nat, Point::Number(v)) => v.is_integer() && v.signum().is_gt(),
            (EventExpr::Int, Point::Number(v)) => v.is_integer(),
            (EventExpr::Rat, Point::Number(v)) => v.is_rational(),
            (EventExpr::Pos, Point::Number(v)) => v.signum().is_gt(),
        }
    }

    /// Normal form of the event inside `space`.
    pub fn compile(&self, space: SpaceKind) -> Result<Event, EventError> {
        if space == SpaceKind::Coin {
            return self.compile_coin().map(Event::coin);
        }
        match self {
            EventExpr::Union(a, b) => a.compile(space)?.union(&b.compile(space)?),
            EventExpr::Inter(a, b) => a.compile(space)?.intersect(&b.compile(space)?),
            EventExpr::Not(a) => Ok(a.compile(space)?.complement()),
            other => Ok(Event::from_line(space, &other.line_primitive()?)),
        }
    }

    fn line_primitive(&self) -> Result<LineSet, EventError> {
        Ok(match self {
            EventExpr::Prog(k, l) => LineSet::from_ints(IntSet::progression(*k, *l as i64)),
            EventExpr::Fin(xs) => LineSet::points(xs),
            EventExpr::Interval(a, b) => LineSet::interval(Some(a), Some(b)),
            EventExpr::Nat => LineSet::from_ints(IntSet::naturals()),
            EventExpr::Int => LineSet::from_ints(IntSet::full()),
            EventExpr::Rat => LineSet::rationals(),
            EventExpr::Pos => LineSet::above(&Quadratic::from_int(0)),
            EventExpr::All => LineSet::full(),
            EventExpr::Empty => LineSet::empty(),
            EventExpr::Cyl(_) | EventExpr::Seq(_) => {
                return Err(EventError::Unsupported(format!(
                    "`{self}` is a coin-toss event"
                )))
            }
            _ => unreachable!("compound expressions are handled by compile"),
        })
    }

    fn compile_coin(&self) -> Result<CoinSet, EventError> {
        let window = || EventError::Unsupported(format!("cylinder window exceeds {} tosses", super::coin::MAX_WINDOW));
        Ok(match self {
            EventExpr::Union(a, b) => a.compile_coin()?.union(&b.compile_coin()?).ok_or_else(window)?,
            EventExpr::Inter(a, b) => a
                .compile_coin()?
                .intersect(&b.compile_coin()?)
                .ok_or_else(window)?,
            EventExpr::Not(a) => a.compile_coin()?.complement(),
            EventExpr::All => CoinSet::full(),
            EventExpr::Empty => CoinSet::empty(),
            EventExpr::Cyl(spec) => CoinSet::cylinder(spec).ok_or_else(window)?,
            EventExpr::Seq(s) => CoinSet::singleton(s.clone()),
            other => {
                return Err(EventError::Unsupported(format!(
                    "`{other}` is not a coin-toss event"
                )))
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            EventExpr::Union(..) => 1,
            EventExpr::Inter(..) => 2,
            EventExpr::Not(_) => 3,
            _ => 4,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &EventExpr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventExpr::Prog(k, l) => write!(f, "prog({k},{l})"),
            EventExpr::Fin(xs) => {
                write!(f, "fin{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            EventExpr::Interval(a, b) => write!(f, "interval({a}, {b})"),
            EventExpr::Nat => write!(f, "nat"),
            EventExpr::Int => write!(f, "int"),
            EventExpr::Rat => write!(f, "rat"),
            EventExpr::Pos => write!(f, "pos"),
            EventExpr::All => write!(f, "all"),
            EventExpr::Empty => write!(f, "empty"),
            EventExpr::Cyl(spec) => {
                write!(f, "cyl(")?;
                for (i, (k, c)) in spec.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "i{k}={}", c.symbol())?;
                }
                write!(f, ")")
            }
            EventExpr::Seq(s) => write!(f, "{s}"),
            EventExpr::Union(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " | ")?;
                write_child(f, b, 2)
            }
            EventExpr::Inter(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " & ")?;
                write_child(f, b, 3)
            }
            EventExpr::Not(a) => {
                write!(f, "~")?;
                write_child(f, a, 3)
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    env: &'a BTreeMap<String, EventExpr>,
}

const KEYWORDS: [&str; 11] = [
    "prog", "fin", "interval", "nat", "int", "rat", "pos", "all", "empty", "cyl", "seq",
];

impl<'a> Parser<'a> {
    fn new(src: &'a str, env: &'a BTreeMap<String, EventExpr>) -> Self {
        Parser { src, pos: 0, env }
    }

    fn err(&self, msg: impl Into<String>) -> EventError {
        EventError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), EventError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|(i, c)| !(c.is_ascii_alphanumeric() || *c == '_') || (*i == 0 && c.is_ascii_digit()))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn integer(&mut self) -> Result<BigInt, EventError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected an integer"));
        }
        self.pos += len;
        Ok(rest[..len].parse().expect("digits form an integer"))
    }

    fn small_integer(&mut self) -> Result<u64, EventError> {
        let start = self.pos;
        let v = self.integer()?;
        v.to_u64().ok_or(EventError::Parse {
            pos: start,
            msg: "integer too large".into(),
        })
    }

    fn expr(&mut self) -> Result<EventExpr, EventError> {
        let mut e = self.term()?;
        while self.eat('|') {
            e = EventExpr::union(e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<EventExpr, EventError> {
        let mut e = self.factor()?;
        while self.eat('&') {
            e = EventExpr::inter(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<EventExpr, EventError> {
        if self.eat('~') {
            return Ok(EventExpr::not(self.factor()?));
        }
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        let start = {
            self.skip_ws();
            self.pos
        };
        let Some(word) = self.ident() else {
            return Err(self.err("expected an event"));
        };
        if !KEYWORDS.contains(&word) {
            return match self.env.get(word) {
                Some(e) => Ok(e.clone()),
                None => {
                    self.pos = start;
                    Err(EventError::UnknownName(word.to_string()))
                }
            };
        }
        match word {
            "nat" => Ok(EventExpr::Nat),
            "int" => Ok(EventExpr::Int),
            "rat" => Ok(EventExpr::Rat),
            "pos" => Ok(EventExpr::Pos),
            "all" => Ok(EventExpr::All),
            "empty" => Ok(EventExpr::Empty),
            "prog" => {
                self.expect('(')?;
                let k = self.small_integer()?;
                self.expect(',')?;
                let l = self.small_integer()?;
                if k == 0 || l >= k {
                    return Err(self.err("prog(k,l) needs 0 <= l < k"));
                }
                self.expect(')')?;
                Ok(EventExpr::Prog(k, l))
            }
            "fin" => {
                self.expect('{')?;
                let mut xs = Vec::new();
                if !self.eat('}') {
                    loop {
                        xs.push(self.num()?);
                        if self.eat('}') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Ok(EventExpr::Fin(xs))
            }
            "interval" => {
                self.expect('(')?;
                let a = self.num()?;
                self.expect(',')?;
                let b = self.num()?;
                self.expect(')')?;
                Ok(EventExpr::Interval(a, b))
            }
            "cyl" => {
                self.expect('(')?;
                let mut spec = Vec::new();
                loop {
                    self.skip_ws();
                    if !self.rest().starts_with('i') {
                        return Err(self.err("expected `i<index>=H|T`"));
                    }
                    self.pos += 1;
                    let i = self.small_integer()? as usize;
                    if i == 0 {
                        return Err(self.err("toss indices start at 1"));
                    }
                    self.expect('=')?;
                    spec.push((i, self.coin()?));
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
                Ok(EventExpr::Cyl(spec))
            }
            "seq" => {
                self.expect('(')?;
                self.skip_ws();
                let mut prefix = Vec::new();
                if !self.rest().starts_with("tail") {
                    while let Some(c) = self.rest().chars().next().and_then(Coin::from_symbol) {
                        prefix.push(c);
                        self.pos += 1;
                    }
                    self.expect(',')?;
                    self.skip_ws();
                }
                if !self.rest().starts_with("tail") {
                    return Err(self.err("expected `tail=H|T`"));
                }
                self.pos += 4;
                self.expect('=')?;
                let tail = self.coin()?;
                self.expect(')')?;
                Ok(EventExpr::Seq(Sequence::new(prefix, tail)))
            }
            _ => unreachable!("all keywords handled"),
        }
    }

    fn coin(&mut self) -> Result<Coin, EventError> {
        match self.peek().and_then(Coin::from_symbol) {
            Some(c) => {
                self.pos += 1;
                Ok(c)
            }
            None => Err(self.err("expected `H` or `T`")),
        }
    }

    fn num(&mut self) -> Result<Quadratic, EventError> {
        let mut x = self.nterm()?;
        loop {
            let start = self.pos;
            let sign = if self.eat('+') {
                1
            } else if self.eat('-') {
                -1
            } else {
                return Ok(x);
            };
            let mut y = self.nterm()?;
            if sign < 0 {
                y = y.neg();
            }
            x = x.checked_add(&y).ok_or(EventError::Parse {
                pos: start,
                msg: "sums of different square roots are not supported".into(),
            })?;
        }
    }

    fn nterm(&mut self) -> Result<Quadratic, EventError> {
        let mut x = self.nfactor()?;
        loop {
            let start = self.pos;
            if self.eat('*') {
                let y = self.nfactor()?;
                x = x.checked_mul(&y).ok_or(EventError::Parse {
                    pos: start,
                    msg: "products of different square roots are not supported".into(),
                })?;
            } else if self.eat('/') {
                let y = self.nfactor()?;
                let d = y
                    .as_rational()
                    .filter(|d| !d.is_zero())
                    .ok_or(EventError::Parse {
                        pos: start,
                        msg: "divisor must be a nonzero rational".into(),
                    })?
                    .clone();
                x = x.scale(&d.recip());
            } else {
                return Ok(x);
            }
        }
    }

    fn nfactor(&mut self) -> Result<Quadratic, EventError> {
        if self.eat('-') {
            return Ok(self.nfactor()?.neg());
        }
        if self.eat('(') {
            let x = self.num()?;
            self.expect(')')?;
            return Ok(x);
        }
        self.skip_ws();
        if self.rest().starts_with("sqrt") {
            self.pos += 4;
            self.expect('(')?;
            let d = self.small_integer()?;
            self.expect(')')?;
            return Ok(Quadratic::sqrt(d));
        }
        Ok(Quadratic::from_rational(BigRational::from_integer(self.integer()?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders() {
        let cases = [
            ("prog(2,0)", "prog(2,0)"),
            ("prog(2,0)&nat", "prog(2,0) & nat"),
            ("~(prog(3,1)|fin{1,2})", "~(prog(3,1) | fin{1, 2})"),
            ("interval(-1/2, 1+sqrt(2))", "interval(-1/2, 1 + sqrt(2))"),
            ("cyl(i1=H,i5=T)", "cyl(i1=H, i5=T)"),
            ("seq(HTH, tail=H)", "seq(HT, tail=H)"),
            ("seq(tail=T)", "seq(tail=T)"),
            ("a_b", ""),
        ];
        let mut env = BTreeMap::new();
        env.insert("a_b".to_string(), EventExpr::Nat);
        for (src, want) in cases {
            let e = EventExpr::parse_with(src, &env).unwrap();
            let shown = e.to_string();
            if !want.is_empty() {
                assert_eq!(shown, want);
            }
            assert_eq!(EventExpr::parse(&shown).unwrap(), e);
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = EventExpr::parse("nat | int & ~pos | rat").unwrap();
        assert_eq!(e.to_string(), "nat | int & ~pos | rat");
        let f = EventExpr::parse("nat | (int | rat)").unwrap();
        assert_eq!(f.to_string(), "nat | (int | rat)");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match EventExpr::parse("prog(2,0) & ") {
            Err(EventError::Parse { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            EventExpr::parse("prog(2,3)"),
            Err(EventError::Parse { .. })
        ));
        assert!(matches!(EventExpr::parse("foo"), Err(EventError::UnknownName(_))));
    }

    #[test]
    fn prefix_parsing_stops_at_juxtaposition() {
        let env = BTreeMap::new();
        let src = "prog(2,0)&nat nat";
        let (e, end) = EventExpr::parse_prefix(src, 0, &env).unwrap();
        assert_eq!(e.to_string(), "prog(2,0) & nat");
        let (g, end2) = EventExpr::parse_prefix(src, end, &env).unwrap();
        assert_eq!(g, EventExpr::Nat);
        assert_eq!(end2, src.len());
    }

    #[test]
    fn direct_and_compiled_membership_agree() {
        let e = EventExpr::parse("(prog(3,1) | interval(-5/2, sqrt(7))) & ~fin{2, 1/2}").unwrap();
        for space in [SpaceKind::Nat, SpaceKind::Rational, SpaceKind::Real] {
            let ev = e.compile(space).unwrap();
            for p in -40..40 {
                for d in [1, 2, 3, 7] {
                    let x = Point::Number(Quadratic::from_rational(BigRational::new(p.into(), d.into())));
                    if x.in_space(space) {
                        assert_eq!(ev.member(&x).unwrap(), e.contains(space, &x), "{x} in {space}");
                    }
                }
            }
        }
        let r = e.compile(SpaceKind::Real).unwrap();
        let x = Point::Number(Quadratic::sqrt(7));
        assert!(!r.member(&x).unwrap() && !e.contains(SpaceKind::Real, &x));
        let y = Point::Number(Quadratic::sqrt(6));
        assert!(r.member(&y).unwrap() && e.contains(SpaceKind::Real, &y));
    }

    #[test]
    fn coin_compilation() {
        let e = EventExpr::parse("cyl(i1=H) & ~seq(tail=H) | seq(T, tail=H)").unwrap();
        let ev = e.compile(SpaceKind::Coin).unwrap();
        for s in [
            Sequence::constant(Coin::H),
            Sequence::constant(Coin::T),
            Sequence::new(vec![Coin::T], Coin::H),
            Sequence::new(vec![Coin::H, Coin::T], Coin::H),
        ] {
            let x = Point::Seq(s);
            assert_eq!(ev.member(&x).unwrap(), e.contains(SpaceKind::Coin, &x));
        }
        assert!(EventExpr::Nat.compile(SpaceKind::Coin).is_err());
        assert!(EventExpr::parse("cyl(i1=H)").unwrap().compile(SpaceKind::Nat).is_err());
    }
}
