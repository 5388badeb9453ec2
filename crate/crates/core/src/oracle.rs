//! Brute-force ground truth on finite grids.
//!
//! Grids are enumerated point by point and membership is decided on the
//! expression tree by a [`Probe`], never on the normal forms the symbolic
//! counts are derived from. Every check is exact; there is no sampling.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{EngineError, NapSpace};
use crate::eventual::{DirectedFamily, QuasiPolynomial};
use crate::events::coin::{Coin, Sequence};
use crate::events::expr::EventExpr;
use crate::events::{EventError, EventualCount, GridIndex, Point, SpaceKind};
use crate::surd::Quadratic;

pub const CAPS_ENV: &str = "NAP_ORACLE_CAPS";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("desk-scale cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid caps `{0}`")]
    InvalidCaps(String),
    #[error("index {index} is not in family {family}")]
    NotInFamily { index: String, family: DirectedFamily },
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Largest grids the oracle will enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    /// Largest `m` with `{1..m!}` enumerated on the naturals.
    pub max_m: u64,
    /// Largest `n` for rational and real grids.
    pub max_n: u64,
    /// Largest toss count `N`.
    pub max_tosses: u32,
    pub max_sigma: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_m: 8,
            max_n: 720,
            max_tosses: 12,
            max_sigma: 8,
        }
    }
}

impl FromStr for Caps {
    type Err = OracleError;

    /// `m=8,n=720,N=12,sigma=8`; omitted keys keep their defaults.
    fn from_str(s: &str) -> Result<Caps, OracleError> {
        let bad = || OracleError::InvalidCaps(s.to_string());
        let mut caps = Caps::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "m" if v <= 20 => caps.max_m = v,
                "n" => caps.max_n = v,
                "N" if v <= 30 => caps.max_tosses = v as u32,
                "sigma" => caps.max_sigma = v as usize,
                _ => return Err(bad()),
            }
        }
        Ok(caps)
    }
}

impl Caps {
    /// Defaults overridden by `NAP_ORACLE_CAPS` when set.
    pub fn from_env() -> Result<Caps, OracleError> {
        match std::env::var(CAPS_ENV) {
            Ok(s) => s.parse(),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub fn max_nat(&self) -> u64 {
        (1..=self.max_m).product()
    }

    pub fn check(&self, index: &GridIndex) -> Result<(), OracleError> {
        let over = match index {
            GridIndex::Nat(n) => *n > self.max_nat(),
            GridIndex::Rational(n) | GridIndex::Real { n, .. } => *n > self.max_n,
            GridIndex::Coin { tosses, sigma } => *tosses > self.max_tosses || sigma.len() > self.max_sigma,
        };
        if over {
            return Err(OracleError::CapExceeded(index.to_string()));
        }
        Ok(())
    }
}

/// A finite grid, generated lazily in a fixed order.
///
/// Points are indexed by `0..len()`: naturals ascending; rationals
/// `p/n` for `p = -n^2..=n^2`; then for each `a` in `theta`,
/// `(p + a)/n` for `p = -n^2..n^2`; coin points `b ⊛ c` with `c` major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteGrid {
    family: DirectedFamily,
    index: GridIndex,
    len: u64,
}

pub fn enumerate_grid(family: DirectedFamily, index: &GridIndex, caps: &Caps) -> Result<ConcreteGrid, OracleError> {
    let space = index.space();
    if !space.supports(family) {
        return Err(EventError::FamilyMismatch { space, family }.into());
    }
    index.validate()?;
    caps.check(index)?;
    if space != SpaceKind::Coin && !family.admits(index.threshold_coordinate()) {
        return Err(OracleError::NotInFamily {
            index: index.to_string(),
            family,
        });
    }
    Ok(ConcreteGrid {
        family,
        index: index.clone(),
        len: index.size() as u64,
    })
}

impl ConcreteGrid {
    pub fn family(&self) -> DirectedFamily {
        self.family
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Generating data of the `i`-th point.
    pub fn coord(&self, i: u64) -> Coord {
        debug_assert!(i < self.len);
        match &self.index {
            GridIndex::Nat(_) => Coord::Number {
                p: i as i64 + 1,
                n: 1,
                theta: None,
            },
            GridIndex::Rational(n) | GridIndex::Real { n, .. } => {
                let nn = (*n as i64) * (*n as i64);
                let rationals = 2 * nn as u64 + 1;
                if i < rationals {
                    return Coord::Number {
                        p: i as i64 - nn,
                        n: *n,
                        theta: None,
                    };
                }
                let k = i - rationals;
                let block = 2 * nn as u64;
                Coord::Number {
                    p: (k % block) as i64 - nn,
                    n: *n,
                    theta: Some((k / block) as usize),
                }
            }
            GridIndex::Coin { tosses, sigma } => {
                let width = 1u64 << tosses;
                let c = &sigma[(i / width) as usize];
                let bits = i % width;
                let b: Vec<Coin> = (0..*tosses)
                    .map(|j| if bits >> j & 1 == 0 { Coin::H } else { Coin::T })
                    .collect();
                Coord::Seq(c.prepend(&b))
            }
        }
    }

    pub fn point_of(&self, c: &Coord) -> Point {
        match c {
            Coord::Number { p, n, theta } => {
                let inv = BigRational::new(BigInt::one(), BigInt::from(*n));
                let p = BigRational::from_integer((*p).into());
                match (theta, &self.index) {
                    (Some(j), GridIndex::Real { theta, .. }) => Point::Number(theta[*j].add_rational(&p).scale(&inv)),
                    _ => Point::Number(Quadratic::from_rational(p * inv)),
                }
            }
            Coord::Seq(s) => Point::Seq(s.clone()),
        }
    }

    pub fn point(&self, i: u64) -> Point {
        self.point_of(&self.coord(i))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len).map(|i| self.point(i))
    }

    /// Whether `x` belongs to the grid, decided without enumeration.
    pub fn contains(&self, x: &Point) -> bool {
        match (&self.index, x) {
            (GridIndex::Nat(n), _) => x.as_nat().is_some_and(|k| k <= *n),
            (GridIndex::Rational(n) | GridIndex::Real { n, .. }, Point::Number(q)) => {
                let nq = BigRational::from_integer((*n).into());
                let nn = BigInt::from(*n) * BigInt::from(*n);
                let scaled = q.scale(&nq);
                if let Some(r) = scaled.as_rational() {
                    return r.is_integer() && r.to_integer() <= nn && r.to_integer() >= -nn.clone();
                }
                let GridIndex::Real { theta, .. } = &self.index else {
                    return false;
                };
                theta.iter().any(|a| {
                    scaled.checked_add(&a.neg()).is_some_and(|p| {
                        p.is_integer() && {
                            let p = p.floor();
                            p >= -nn.clone() && p < nn
                        }
                    })
                })
            }
            (GridIndex::Coin { tosses, sigma }, Point::Seq(s)) => sigma.contains(&s.shift(*tosses as usize)),
            _ => false,
        }
    }

    /// Number of distinct generated points.
    pub fn cardinality(&self) -> u64 {
        let set: HashSet<Point> = (0..self.len).into_par_iter().map(|i| self.point(i)).collect();
        set.len() as u64
    }

    pub fn par_count<F>(&self, pred: F) -> u128
    where
        F: Fn(&Point) -> bool + Sync,
    {
        (0..self.len)
            .into_par_iter()
            .filter(|&i| pred(&self.point(i)))
            .count() as u128
    }

    /// `sum f(x)` over the grid; the reduction order is fixed by the chunking, the result exact.
    pub fn par_sum<F>(&self, f: F) -> BigRational
    where
        F: Fn(&Point) -> BigRational + Sync,
    {
        (0..self.len)
            .into_par_iter()
            .map(|i| f(&self.point(i)))
            .reduce(BigRational::zero, |a, b| a + b)
    }
}

/// A grid point by its generating data: `(p + theta[j])/n`, or `p/n`
/// when `theta` is `None`; naturals have `n = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coord {
    Number { p: i64, n: u64, theta: Option<usize> },
    Seq(Sequence),
}

/// A number with an `f64` shadow; `|value - exact| <= 1e-12 * scale`.
#[derive(Clone, Debug)]
struct Shadowed {
    exact: Quadratic,
    value: f64,
    scale: f64,
}

impl Shadowed {
    fn new(q: &Quadratic) -> Self {
        let r = q.rational_part().to_f64().unwrap_or(f64::NAN);
        let c = q.coeff().to_f64().unwrap_or(f64::NAN) * (q.radicand() as f64).sqrt();
        Shadowed {
            exact: q.clone(),
            value: r + c,
            scale: r.abs() + c.abs(),
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Union(Box<Node>, Box<Node>),
    Inter(Box<Node>, Box<Node>),
    Not(Box<Node>),
    All,
    Empty,
    Prog(i64, i64),
    Fin(Vec<Shadowed>),
    Interval(Shadowed, Shadowed),
    Nat,
    Int,
    Rat,
    Pos,
    Cyl(Vec<(usize, Coin)>),
    Seq(Sequence),
}

impl Node {
    fn new(e: &EventExpr) -> Node {
        match e {
            EventExpr::Union(a, b) => Node::Union(Box::new(Node::new(a)), Box::new(Node::new(b))),
            EventExpr::Inter(a, b) => Node::Inter(Box::new(Node::new(a)), Box::new(Node::new(b))),
            EventExpr::Not(a) => Node::Not(Box::new(Node::new(a))),
            EventExpr::All => Node::All,
            EventExpr::Empty => Node::Empty,
            EventExpr::Prog(k, l) => Node::Prog(*k as i64, *l as i64),
            EventExpr::Fin(xs) => Node::Fin(xs.iter().map(Shadowed::new).collect()),
            EventExpr::Interval(a, b) => Node::Interval(Shadowed::new(a), Shadowed::new(b)),
            EventExpr::Nat => Node::Nat,
            EventExpr::Int => Node::Int,
            EventExpr::Rat => Node::Rat,
            EventExpr::Pos => Node::Pos,
            EventExpr::Cyl(spec) => Node::Cyl(spec.clone()),
            EventExpr::Seq(s) => Node::Seq(s.clone()),
        }
    }
}

/// Membership on grid coordinates, exact, written independently of both the
/// normal forms and [`EventExpr::contains`].
///
/// Order comparisons are first tried on `f64` shadows and accepted only when
/// the gap exceeds `1e-9` times the magnitudes involved, far above the
/// rounding error; anything closer is decided in exact arithmetic.
pub struct Probe<'g> {
    node: Node,
    grid: &'g ConcreteGrid,
    theta: Vec<Shadowed>,
}

impl<'g> Probe<'g> {
    pub fn new(expr: &EventExpr, grid: &'g ConcreteGrid) -> Self {
        let theta = match grid.index() {
            GridIndex::Real { theta, .. } => theta.iter().map(Shadowed::new).collect(),
            _ => Vec::new(),
        };
        Probe {
            node: Node::new(expr),
            grid,
            theta,
        }
    }

    pub fn contains(&self, c: &Coord) -> bool {
        self.eval(&self.node, c)
    }

    fn cmp(&self, c: &Coord, b: &Shadowed) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        let Coord::Number { p, n, theta } = c else {
            unreachable!("only numbers are compared")
        };
        let (a, a_scale) = theta.map_or((0.0, 0.0), |j| (self.theta[j].value, self.theta[j].scale));
        let x = (*p as f64 + a) / *n as f64;
        let x_scale = ((*p as f64).abs() + a_scale) / *n as f64;
        let tol = 1e-9 * (1.0 + x_scale + b.scale);
        let gap = x - b.value;
        if gap.is_finite() && tol.is_finite() {
            if gap > tol {
                return Ordering::Greater;
            }
            if gap < -tol {
                return Ordering::Less;
            }
        }
        match self.grid.point_of(c) {
            Point::Number(v) => v.cmp_exact(&b.exact),
            Point::Seq(_) => unreachable!("numeric coordinate"),
        }
    }

    /// The integer value of a rational coordinate, if it is one.
    fn integer(c: &Coord) -> Option<i64> {
        match c {
            Coord::Number { p, n, theta: None } if p % (*n as i64) == 0 => Some(p / *n as i64),
            _ => None,
        }
    }

    fn eval(&self, node: &Node, c: &Coord) -> bool {
        use std::cmp::Ordering::{Equal, Greater, Less};
        match (node, c) {
            (Node::Union(a, b), _) => self.eval(a, c) || self.eval(b, c),
            (Node::Inter(a, b), _) => self.eval(a, c) && self.eval(b, c),
            (Node::Not(a), _) => !self.eval(a, c),
            (Node::All, _) => true,
            (Node::Empty, _) => false,
            (Node::Cyl(spec), Coord::Seq(s)) => spec.iter().all(|&(i, coin)| s.at(i - 1) == coin),
            (Node::Seq(t), Coord::Seq(s)) => s == t,
            (_, Coord::Seq(_)) | (Node::Cyl(_) | Node::Seq(_), _) => false,
            (Node::Prog(k, l), _) => Self::integer(c).is_some_and(|m| m >= 1 && (m + l) % k == 0),
            (Node::Nat, _) => Self::integer(c).is_some_and(|m| m >= 1),
            (Node::Int, _) => Self::integer(c).is_some(),
            (Node::Rat, Coord::Number { theta, .. }) => theta.is_none(),
            (Node::Pos, _) => {
                let zero = Shadowed::new(&Quadratic::from_int(0));
                self.cmp(c, &zero) == Greater
            }
            (Node::Fin(xs), _) => xs.iter().any(|x| self.cmp(c, x) == Equal),
            (Node::Interval(a, b), _) => self.cmp(c, a) != Less && self.cmp(c, b) == Less,
        }
    }
}

/// One verified grid index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexRecord {
    pub index: String,
    pub brute: String,
    pub predicted: String,
    pub matched: bool,
    pub above_threshold: bool,
}

impl fmt::Display for IndexRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} brute={} predicted={}{}",
            if self.matched { "PASS" } else { "FAIL" },
            self.index,
            self.brute,
            self.predicted,
            if self.above_threshold { "" } else { " (below threshold)" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub family: DirectedFamily,
    pub records: Vec<IndexRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationSummary {
    pub subject: String,
    pub family: &'static str,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub threshold_honored: bool,
    pub ok: bool,
}

impl VerificationReport {
    fn new(subject: String, family: DirectedFamily) -> Self {
        VerificationReport {
            subject,
            family,
            records: Vec::new(),
        }
    }

    pub fn threshold_honored(&self) -> bool {
        self.records.iter().all(|r| r.above_threshold)
    }

    /// Every record matched, at least one index was checked, and all were past the threshold.
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.threshold_honored() && self.records.iter().all(|r| r.matched)
    }

    pub fn summary(&self) -> VerificationSummary {
        let passed = self.records.iter().filter(|r| r.matched).count();
        VerificationSummary {
            subject: self.subject.clone(),
            family: self.family.name(),
            checked: self.records.len(),
            passed,
            failed: self.records.len() - passed,
            threshold_honored: self.threshold_honored(),
            ok: self.passed(),
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        let s = self.summary();
        write!(
            f,
            "{} {} on {}: {}/{} indices",
            if s.ok { "PASS" } else { "FAIL" },
            s.subject,
            s.family,
            s.passed,
            s.checked
        )
    }
}

fn factorials_upto(cap: u64) -> impl Iterator<Item = (u64, u64)> {
    let mut f = 1u64;
    (1u64..=20).map_while(move |m| {
        f = f.checked_mul(m)?;
        (f <= cap).then_some((m, f))
    })
}

/// Irrational offsets used for real grids: `sqrt(2) - 1` and `(sqrt(5) - 1)/2`.
pub fn default_theta() -> Vec<Quadratic> {
    vec![Quadratic::from_triple(-1, 1, 2, 1), Quadratic::from_triple(-1, 1, 5, 2)]
}

/// Tail sets used for coin grids; both constant sequences come first.
pub fn default_sigma() -> Vec<Sequence> {
    use Coin::{H, T};
    vec![
        Sequence::constant(H),
        Sequence::constant(T),
        Sequence::new(vec![T], H),
        Sequence::new(vec![H], T),
        Sequence::new(vec![T, T], H),
        Sequence::new(vec![H, H], T),
        Sequence::new(vec![H, T, H], T),
        Sequence::new(vec![T, H, T], H),
    ]
}

/// Every valid index within the caps from `threshold` on.
///
/// Naturals along factorials use `m = 2..=max_m`; the other natural families
/// use 64 consecutive members; rational and real grids use factorial `n` with
/// `n >= 2`; coin grids use every `N` with `|sigma| in {2, max_sigma}`.
pub fn default_indices(family: DirectedFamily, threshold: u64, caps: &Caps) -> Vec<GridIndex> {
    match family {
        DirectedFamily::FactorialN => factorials_upto(caps.max_nat())
            .filter(|&(m, f)| m >= 2 && f >= threshold)
            .map(|(_, f)| GridIndex::Nat(f))
            .collect(),
        DirectedFamily::AllN | DirectedFamily::EvenN | DirectedFamily::OddN => (threshold.max(1)..=caps.max_nat())
            .filter(|&n| family.admits(n))
            .take(64)
            .map(GridIndex::Nat)
            .collect(),
        DirectedFamily::QGrid => factorials_upto(caps.max_n)
            .filter(|&(m, f)| m >= 2 && f >= threshold)
            .map(|(_, f)| GridIndex::Rational(f))
            .collect(),
        DirectedFamily::RGrid => {
            let theta = default_theta();
            factorials_upto(caps.max_n)
                .filter(|&(m, f)| m >= 2 && f >= threshold)
                .flat_map(|(_, f)| {
                    [1, theta.len()].into_iter().map({
                        let theta = theta.clone();
                        move |k| GridIndex::Real {
                            n: f,
                            theta: theta[..k].to_vec(),
                        }
                    })
                })
                .collect()
        }
        DirectedFamily::CoinCt => {
            let sigma = default_sigma();
            let sizes: Vec<usize> = [2, caps.max_sigma.min(sigma.len())]
                .into_iter()
                .filter(|&k| k >= 2)
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            (threshold.min(u32::MAX as u64) as u32..=caps.max_tosses)
                .flat_map(|tosses| {
                    let sigma = sigma.clone();
                    sizes.clone().into_iter().map(move |k| GridIndex::Coin {
                        tosses,
                        sigma: sigma[..k].to_vec(),
                    })
                })
                .collect()
        }
    }
}

fn count_prediction(count: &EventualCount, index: &GridIndex) -> (String, Box<dyn Fn(&BigRational) -> bool>) {
    let at = index.grid_point();
    match count {
        EventualCount::Exact(f) => {
            let v = f.eval(&at);
            (v.to_string(), Box::new(move |x| *x == v))
        }
        EventualCount::Bounds { lower, upper } => {
            let (lo, hi) = (lower.eval(&at), upper.eval(&at));
            (format!("[{lo}, {hi}]"), Box::new(move |x| lo <= *x && *x <= hi))
        }
    }
}

/// Checks `|A ∩ λ|` by enumeration against the eventual count and the normal-form count.
pub fn verify_counts(
    expr: &EventExpr,
    space: SpaceKind,
    family: DirectedFamily,
    indices: &[GridIndex],
    caps: &Caps,
) -> Result<VerificationReport, OracleError> {
    let event = expr.compile(space)?;
    let count = event.eventual_count(family)?;
    let mut report = VerificationReport::new(expr.to_string(), family);
    for index in indices {
        let grid = enumerate_grid(family, index, caps)?;
        let probe = Probe::new(expr, &grid);
        let brute = (0..grid.len())
            .into_par_iter()
            .filter(|&i| probe.contains(&grid.coord(i)))
            .count() as u128;
        let normal_form = event.count_at(index)?;
        let (predicted, accepts) = count_prediction(&count, index);
        let b = BigRational::from_integer(BigInt::from(brute));
        report.records.push(IndexRecord {
            index: index.to_string(),
            brute: brute.to_string(),
            predicted,
            matched: accepts(&b) && normal_form == brute,
            above_threshold: index.threshold_coordinate() >= count.threshold(),
        });
    }
    Ok(report)
}

/// [`verify_counts`] for many events of one space over their default
/// indices, enumerating each grid once.
pub fn verify_counts_many(
    exprs: &[EventExpr],
    space: SpaceKind,
    family: DirectedFamily,
    caps: &Caps,
) -> Result<Vec<VerificationReport>, OracleError> {
    let mut counts = Vec::with_capacity(exprs.len());
    let mut wanted: Vec<GridIndex> = Vec::new();
    let mut per_expr: Vec<Vec<usize>> = Vec::with_capacity(exprs.len());
    for e in exprs {
        let event = e.compile(space)?;
        let count = event.eventual_count(family)?;
        let mut slots = Vec::new();
        for index in default_indices(family, count.threshold(), caps) {
            let k = match wanted.iter().position(|w| *w == index) {
                Some(k) => k,
                None => {
                    wanted.push(index);
                    wanted.len() - 1
                }
            };
            slots.push(k);
        }
        per_expr.push(slots);
        counts.push((event, count));
    }
    let mut reports: Vec<VerificationReport> = exprs
        .iter()
        .map(|e| VerificationReport::new(e.to_string(), family))
        .collect();
    for (k, index) in wanted.iter().enumerate() {
        let users: Vec<usize> = (0..exprs.len()).filter(|&i| per_expr[i].contains(&k)).collect();
        let grid = enumerate_grid(family, index, caps)?;
        let probes: Vec<Probe> = users.iter().map(|&u| Probe::new(&exprs[u], &grid)).collect();
        let brute = (0..grid.len())
            .into_par_iter()
            .fold(
                || vec![0u128; users.len()],
                |mut acc, i| {
                    let x = grid.coord(i);
                    for (slot, probe) in acc.iter_mut().zip(&probes) {
                        if probe.contains(&x) {
                            *slot += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u128; users.len()],
                |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            );
        for (&u, &b) in users.iter().zip(&brute) {
            let (event, count) = &counts[u];
            let normal_form = event.count_at(index)?;
            let (predicted, accepts) = count_prediction(count, index);
            reports[u].records.push(IndexRecord {
                index: index.to_string(),
                brute: b.to_string(),
                predicted,
                matched: accepts(&BigRational::from_integer(BigInt::from(b))) && normal_form == b,
                above_threshold: index.threshold_coordinate() >= count.threshold(),
            });
        }
    }
    Ok(reports)
}

/// Checks that grids have the closed-form number of distinct points.
pub fn verify_grid_sizes(
    family: DirectedFamily,
    indices: &[GridIndex],
    caps: &Caps,
) -> Result<VerificationReport, OracleError> {
    let mut report = VerificationReport::new("grid size".into(), family);
    for index in indices {
        let grid = enumerate_grid(family, index, caps)?;
        let distinct = grid.cardinality();
        report.records.push(IndexRecord {
            index: index.to_string(),
            brute: distinct.to_string(),
            predicted: index.size().to_string(),
            matched: distinct as u128 == index.size() && grid.len() as u128 == index.size(),
            above_threshold: true,
        });
    }
    Ok(report)
}

fn ratio_at(num: &QuasiPolynomial, den: &QuasiPolynomial, index: &GridIndex) -> Option<BigRational> {
    let at = index.grid_point();
    let d = den.eval(&at);
    (!d.is_zero()).then(|| num.eval(&at) / d)
}

/// Checks `P(A | B ∩ λ)` computed from weighted enumeration against the
/// ratio of the symbolic counts evaluated at each index. `B` defaults to the
/// whole space.
pub fn verify_conditional(
    space: &NapSpace,
    a: &EventExpr,
    given: Option<&EventExpr>,
    indices: &[GridIndex],
    caps: &Caps,
) -> Result<VerificationReport, OracleError> {
    let kind = space.kind();
    let family = space.family();
    let full = EventExpr::All;
    let b = given.unwrap_or(&full);
    let ab_event = EventExpr::inter(a.clone(), b.clone()).compile(kind)?;
    let b_event = b.compile(kind)?;
    let num = space.count(&ab_event)?;
    let den = space.count(&b_event)?;
    let subject = match given {
        Some(g) => format!("P({a} | {g})"),
        None => format!("P({a})"),
    };
    let mut report = VerificationReport::new(subject, family);
    for index in indices {
        let grid = enumerate_grid(family, index, caps)?;
        let (pa, pb) = (Probe::new(a, &grid), Probe::new(b, &grid));
        let (bn, bd) = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.coord(i);
                if !pb.contains(&x) {
                    return (BigRational::zero(), BigRational::zero());
                }
                let w = match x {
                    Coord::Number { p, .. } if kind == SpaceKind::Nat => space.weight().at(p as u64),
                    _ => BigRational::one(),
                };
                let n = if pa.contains(&x) { w.clone() } else { BigRational::zero() };
                (n, w)
            })
            .reduce(
                || (BigRational::zero(), BigRational::zero()),
                |(a1, b1), (a2, b2)| (a1 + a2, b1 + b2),
            );
        let brute = (!bd.is_zero()).then(|| bn / bd);
        let (predicted, matched) = match (&num, &den) {
            (EventualCount::Exact(f), EventualCount::Exact(g)) => {
                let p = ratio_at(f, g, index);
                let s = p.as_ref().map_or("undefined".to_string(), |v| v.to_string());
                (s, p.is_some() && p == brute)
            }
            _ => {
                let lo = ratio_at(num.lower(), den.upper(), index);
                let hi = ratio_at(num.upper(), den.lower(), index);
                match (lo, hi, &brute) {
                    (Some(lo), Some(hi), Some(x)) => (format!("[{lo}, {hi}]"), lo <= *x && *x <= hi),
                    _ => ("undefined".to_string(), false),
                }
            }
        };
        report.records.push(IndexRecord {
            index: index.to_string(),
            brute: brute.map_or("undefined".to_string(), |v| v.to_string()),
            predicted,
            matched,
            above_threshold: index.threshold_coordinate() >= num.threshold().max(den.threshold()),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes_and_order() {
        let caps = Caps::default();
        let g = enumerate_grid(DirectedFamily::FactorialN, &GridIndex::Nat(24), &caps).unwrap();
        assert_eq!(g.len(), 24);
        assert_eq!(g.point(0), Point::nat(1));
        let q = enumerate_grid(DirectedFamily::QGrid, &GridIndex::Rational(24), &caps).unwrap();
        assert_eq!(q.cardinality(), 1153);
        let c = enumerate_grid(
            DirectedFamily::CoinCt,
            &GridIndex::Coin {
                tosses: 3,
                sigma: default_sigma()[..2].to_vec(),
            },
            &caps,
        )
        .unwrap();
        assert_eq!(c.cardinality(), 16);
        assert!(c.points().all(|x| c.contains(&x)));
        let r = enumerate_grid(
            DirectedFamily::RGrid,
            &GridIndex::Real {
                n: 6,
                theta: default_theta(),
            },
            &caps,
        )
        .unwrap();
        assert_eq!(r.cardinality(), 2 * 36 + 1 + 2 * 36 * 2);
        assert!(r.points().all(|x| r.contains(&x)));
    }

    #[test]
    fn probe_agrees_with_tree_membership() {
        use num_traits::Signed;
        let caps = Caps::default();
        let q = |a: i64, b: i64| Quadratic::from_rational(BigRational::new(a.into(), b.into()));
        let theta = default_theta();
        let boundary = theta[0].add_rational(&BigRational::from_integer(3.into())).scale(&BigRational::new(1.into(), 6.into()));
        let numeric = vec![
            EventExpr::Prog(3, 1),
            EventExpr::union(EventExpr::Nat, EventExpr::Fin(vec![q(-1, 2), q(5, 3), boundary.clone()])),
            EventExpr::inter(EventExpr::Pos, EventExpr::not(EventExpr::Rat)),
            EventExpr::Interval(boundary.clone(), q(7, 2)),
            EventExpr::Interval(q(-2, 3), theta[1].clone()),
            EventExpr::union(EventExpr::Int, EventExpr::Interval(theta[1].neg(), q(0, 1))),
        ];
        assert!(boundary.rational_part().is_positive());
        let grids = [
            (DirectedFamily::QGrid, GridIndex::Rational(6)),
            (DirectedFamily::RGrid, GridIndex::Real { n: 6, theta: theta.clone() }),
        ];
        for (family, index) in grids {
            let g = enumerate_grid(family, &index, &caps).unwrap();
            let kind = index.space();
            for e in &numeric {
                let probe = Probe::new(e, &g);
                for i in 0..g.len() {
                    assert_eq!(probe.contains(&g.coord(i)), e.contains(kind, &g.point(i)), "{e:?} at {}", g.point(i));
                }
            }
        }
        let sigma = default_sigma();
        let index = GridIndex::Coin { tosses: 4, sigma: sigma.clone() };
        let g = enumerate_grid(DirectedFamily::CoinCt, &index, &caps).unwrap();
        let coin = vec![
            EventExpr::Cyl(vec![(1, Coin::H), (3, Coin::T)]),
            EventExpr::union(EventExpr::Seq(sigma[0].clone()), EventExpr::not(EventExpr::Cyl(vec![(6, Coin::T)]))),
        ];
        for e in &coin {
            let probe = Probe::new(e, &g);
            for i in 0..g.len() {
                assert_eq!(probe.contains(&g.coord(i)), e.contains(SpaceKind::Coin, &g.point(i)));
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let caps: Caps = "m=4,n=24".parse().unwrap();
        assert_eq!(caps.max_tosses, 12);
        assert!(matches!(
            enumerate_grid(DirectedFamily::FactorialN, &GridIndex::Nat(120), &caps),
            Err(OracleError::CapExceeded(_))
        ));
        assert!(matches!(
            enumerate_grid(DirectedFamily::FactorialN, &GridIndex::Nat(23), &caps),
            Err(OracleError::NotInFamily { .. })
        ));
        assert!("m=x".parse::<Caps>().is_err());
    }

    #[test]
    fn evens_along_factorials() {
        let caps = Caps::default();
        let e = EventExpr::parse("prog(2,0)").unwrap();
        let idx = default_indices(DirectedFamily::FactorialN, 2, &caps);
        assert_eq!(idx.len(), 7);
        let r = verify_counts(&e, SpaceKind::Nat, DirectedFamily::FactorialN, &idx, &caps).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn conditional_on_rational_grid() {
        let caps = Caps::default();
        let s = NapSpace::new(SpaceKind::Rational, DirectedFamily::QGrid).unwrap();
        let a = EventExpr::parse("interval(0,1)").unwrap();
        let r = verify_conditional(&s, &a, None, &[GridIndex::Rational(120)], &caps).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.records[0].brute, "120/28801");
    }

    #[test]
    fn failures_are_reported() {
        let caps = Caps::default();
        let e = EventExpr::parse("prog(2,0)").unwrap();
        let mut r = verify_counts(&e, SpaceKind::Nat, DirectedFamily::FactorialN, &[GridIndex::Nat(6)], &caps).unwrap();
        r.records[0].matched = false;
        assert!(!r.passed());
        assert_eq!(r.summary().failed, 1);
    }
}
