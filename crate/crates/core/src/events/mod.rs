//! Finitely describable events over the four sample spaces.
//!
//! Every [`Event`] is tagged with its [`SpaceKind`] and kept in a normal form
//! closed under the Boolean operations. Each event exposes exact membership,
//! exact counts on concrete grids, and an eventual count along the space's
//! directed families.

pub mod coin;
pub mod expr;
pub mod intset;
pub mod line;
pub mod weight;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventual::{DirectedFamily, GridPoint, QuasiPolynomial};
use crate::surd::Quadratic;
use coin::{CoinSet, Sequence};
use intset::IntSet;
use line::{LineCount, LineSet};
use weight::WeightFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpaceKind {
    Nat,
    Rational,
    Real,
    Coin,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Nat => "nat",
            SpaceKind::Rational => "q",
            SpaceKind::Real => "r",
            SpaceKind::Coin => "coin",
        }
    }

    pub fn supports(self, family: DirectedFamily) -> bool {
        match self {
            SpaceKind::Nat => family.is_natural(),
            SpaceKind::Rational => family == DirectedFamily::QGrid,
            SpaceKind::Real => family == DirectedFamily::RGrid,
            SpaceKind::Coin => family == DirectedFamily::CoinCt,
        }
    }

    pub fn is_numeric(self) -> bool {
        self != SpaceKind::Coin
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("events live in different spaces: {0} and {1}")]
    SpaceMismatch(SpaceKind, SpaceKind),
    #[error("family {family} is not defined on space {space}")]
    FamilyMismatch { space: SpaceKind, family: DirectedFamily },
    #[error("point {0} is not in the sample space")]
    PointOutsideSpace(String),
    #[error("invalid grid index: {0}")]
    InvalidGrid(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownName(String),
    #[error("unsupported event: {0}")]
    Unsupported(String),
}

/// A point of one of the sample spaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Number(Quadratic),
    Seq(Sequence),
}

impl Point {
    pub fn nat(n: u64) -> Self {
        Point::Number(Quadratic::from_int(n as i64))
    }

    pub fn in_space(&self, space: SpaceKind) -> bool {
        match (self, space) {
            (Point::Number(x), SpaceKind::Nat) => x.is_integer() && x.signum().is_gt(),
            (Point::Number(x), SpaceKind::Rational) => x.is_rational(),
            (Point::Number(_), SpaceKind::Real) => true,
            (Point::Seq(_), SpaceKind::Coin) => true,
            _ => false,
        }
    }

    /// The natural number, if this point is one.
    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Point::Number(x) if x.is_integer() && x.signum().is_gt() => x.floor().to_u64(),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Number(x) => write!(f, "{x}"),
            Point::Seq(s) => write!(f, "{s}"),
        }
    }
}

/// A concrete member of a directed family.
///
/// `Nat(n)` is `{1..n}`; `Rational(n)` is the grid `{p/n : |p| <= n^2}`;
/// `Real` adds `(p + a)/n` for `a` in `theta` (irrationals in `(0, 1)`);
/// `Coin` is `{b ⊛ c : b in {H,T}^N, c in sigma}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GridIndex {
    Nat(u64),
    Rational(u64),
    Real { n: u64, theta: Vec<Quadratic> },
    Coin { tosses: u32, sigma: Vec<Sequence> },
}

impl GridIndex {
    pub fn space(&self) -> SpaceKind {
        match self {
            GridIndex::Nat(_) => SpaceKind::Nat,
            GridIndex::Rational(_) => SpaceKind::Rational,
            GridIndex::Real { .. } => SpaceKind::Real,
            GridIndex::Coin { .. } => SpaceKind::Coin,
        }
    }

    pub fn validate(&self) -> Result<(), EventError> {
        match self {
            GridIndex::Nat(_) => Ok(()),
            GridIndex::Rational(n) | GridIndex::Real { n, .. } if *n == 0 => {
                Err(EventError::InvalidGrid("n must be positive".into()))
            }
            GridIndex::Rational(_) => Ok(()),
            GridIndex::Real { theta, .. } => {
                let zero = Quadratic::from_int(0);
                let one = Quadratic::from_int(1);
                for a in theta {
                    if a.is_rational() || *a <= zero || *a >= one {
                        return Err(EventError::InvalidGrid(format!(
                            "theta element {a} must be an irrational in (0, 1)"
                        )));
                    }
                }
                let distinct: BTreeSet<&Quadratic> = theta.iter().collect();
                if distinct.len() != theta.len() {
                    return Err(EventError::InvalidGrid("theta elements must be distinct".into()));
                }
                Ok(())
            }
            GridIndex::Coin { sigma, .. } => {
                let distinct: BTreeSet<&Sequence> = sigma.iter().collect();
                if sigma.is_empty() || distinct.len() != sigma.len() {
                    return Err(EventError::InvalidGrid(
                        "sigma must be a nonempty set of distinct sequences".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// The index values seen by a quasi-polynomial.
    pub fn grid_point(&self) -> GridPoint {
        match self {
            GridIndex::Nat(n) | GridIndex::Rational(n) => GridPoint::nat(*n),
            GridIndex::Real { n, theta } => GridPoint::real(*n, theta.len() as u64),
            GridIndex::Coin { tosses, sigma } => GridPoint::coin(*tosses, sigma.len() as u64),
        }
    }

    /// The coordinate compared against a quasi-polynomial threshold.
    pub fn threshold_coordinate(&self) -> u64 {
        match self {
            GridIndex::Nat(n) | GridIndex::Rational(n) | GridIndex::Real { n, .. } => *n,
            GridIndex::Coin { tosses, .. } => *tosses as u64,
        }
    }

    /// Closed-form grid size.
    pub fn size(&self) -> u128 {
        match self {
            GridIndex::Nat(n) => *n as u128,
            GridIndex::Rational(n) => 2 * (*n as u128).pow(2) + 1,
            GridIndex::Real { n, theta } => {
                let nn = (*n as u128).pow(2);
                2 * nn + 1 + 2 * nn * theta.len() as u128
            }
            GridIndex::Coin { tosses, sigma } => (1u128 << tosses) * sigma.len() as u128,
        }
    }
}

impl fmt::Display for GridIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridIndex::Nat(n) => write!(f, "n={n}"),
            GridIndex::Rational(n) => write!(f, "n={n}"),
            GridIndex::Real { n, theta } => {
                write!(f, "n={n} theta={{")?;
                for (i, a) in theta.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "}}")
            }
            GridIndex::Coin { tosses, sigma } => {
                write!(f, "N={tosses} sigma={{")?;
                for (i, c) in sigma.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Eventual count along a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventualCount {
    Exact(QuasiPolynomial),
    /// `lower <= count <= upper` at every family index past both thresholds.
    Bounds {
        lower: QuasiPolynomial,
        upper: QuasiPolynomial,
    },
}

impl EventualCount {
    pub fn exact(&self) -> Option<&QuasiPolynomial> {
        match self {
            EventualCount::Exact(f) => Some(f),
            EventualCount::Bounds { .. } => None,
        }
    }

    pub fn lower(&self) -> &QuasiPolynomial {
        match self {
            EventualCount::Exact(f) => f,
            EventualCount::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> &QuasiPolynomial {
        match self {
            EventualCount::Exact(f) => f,
            EventualCount::Bounds { upper, .. } => upper,
        }
    }

    pub fn threshold(&self) -> u64 {
        self.lower().threshold().max(self.upper().threshold())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Nat(IntSet),
    Line(LineSet),
    Coin(CoinSet),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    space: SpaceKind,
    repr: Repr,
}

impl Event {
    /// `set ∩ {1, 2, 3, ...}`.
    pub fn nat(set: &IntSet) -> Event {
        Event {
            space: SpaceKind::Nat,
            repr: Repr::Nat(set.intersect(&IntSet::naturals())),
        }
    }

    /// A subset of the line, restricted to the space (`Nat`, `Rational` or `Real`).
    pub fn from_line(space: SpaceKind, set: &LineSet) -> Event {
        match space {
            SpaceKind::Nat => Event::nat(set.ints()),
            SpaceKind::Rational => Event {
                space,
                repr: Repr::Line(set.rational_part()),
            },
            SpaceKind::Real => Event {
                space,
                repr: Repr::Line(set.clone()),
            },
            SpaceKind::Coin => panic!("line sets do not live in the coin space"),
        }
    }

    pub fn coin(set: CoinSet) -> Event {
        Event {
            space: SpaceKind::Coin,
            repr: Repr::Coin(set),
        }
    }

    pub fn full(space: SpaceKind) -> Event {
        match space {
            SpaceKind::Coin => Event::coin(CoinSet::full()),
            _ => Event::from_line(space, &LineSet::full()),
        }
    }

    pub fn empty(space: SpaceKind) -> Event {
        match space {
            SpaceKind::Coin => Event::coin(CoinSet::empty()),
            _ => Event::from_line(space, &LineSet::empty()),
        }
    }

    /// A finite event from explicit points of the space.
    pub fn finite(space: SpaceKind, points: &[Point]) -> Result<Event, EventError> {
        let mut nums = Vec::new();
        let mut seqs = CoinSet::empty();
        for p in points {
            if !p.in_space(space) {
                return Err(EventError::PointOutsideSpace(p.to_string()));
            }
            match p {
                Point::Number(x) => nums.push(x.clone()),
                Point::Seq(s) => {
                    seqs = seqs
                        .union(&CoinSet::singleton(s.clone()))
                        .expect("singletons have window 0");
                }
            }
        }
        Ok(match space {
            SpaceKind::Coin => Event::coin(seqs),
            _ => Event::from_line(space, &LineSet::points(&nums)),
        })
    }

    pub fn space(&self) -> SpaceKind {
        self.space
    }

    pub fn as_int_set(&self) -> Option<&IntSet> {
        match &self.repr {
            Repr::Nat(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_line_set(&self) -> Option<&LineSet> {
        match &self.repr {
            Repr::Line(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_coin_set(&self) -> Option<&CoinSet> {
        match &self.repr {
            Repr::Coin(s) => Some(s),
            _ => None,
        }
    }

    fn same_space(&self, other: &Event) -> Result<(), EventError> {
        if self.space != other.space {
            return Err(EventError::SpaceMismatch(self.space, other.space));
        }
        Ok(())
    }

    fn window_error() -> EventError {
        EventError::Unsupported(format!(
            "cylinder window exceeds {} tosses",
            coin::MAX_WINDOW
        ))
    }

    pub fn union(&self, other: &Event) -> Result<Event, EventError> {
        self.same_space(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Nat(a), Repr::Nat(b)) => Repr::Nat(a.union(b)),
            (Repr::Line(a), Repr::Line(b)) => Repr::Line(a.union(b)),
            (Repr::Coin(a), Repr::Coin(b)) => Repr::Coin(a.union(b).ok_or_else(Event::window_error)?),
            _ => unreachable!("space tag determines the representation"),
        };
        Ok(Event {
            space: self.space,
            repr,
        })
    }

    pub fn intersect(&self, other: &Event) -> Result<Event, EventError> {
        self.same_space(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Nat(a), Repr::Nat(b)) => Repr::Nat(a.intersect(b)),
            (Repr::Line(a), Repr::Line(b)) => Repr::Line(a.intersect(b)),
            (Repr::Coin(a), Repr::Coin(b)) => {
                Repr::Coin(a.intersect(b).ok_or_else(Event::window_error)?)
            }
            _ => unreachable!("space tag determines the representation"),
        };
        Ok(Event {
            space: self.space,
            repr,
        })
    }

    /// Complement relative to the sample space.
    pub fn complement(&self) -> Event {
        match &self.repr {
            Repr::Nat(s) => Event::nat(&s.complement()),
            Repr::Line(s) => Event::from_line(self.space, &s.complement()),
            Repr::Coin(s) => Event::coin(s.complement()),
        }
    }

    pub fn difference(&self, other: &Event) -> Result<Event, EventError> {
        self.intersect(&other.complement())
    }

    pub fn member(&self, x: &Point) -> Result<bool, EventError> {
        if !x.in_space(self.space) {
            return Err(EventError::PointOutsideSpace(x.to_string()));
        }
        Ok(match (&self.repr, x) {
            (Repr::Nat(s), Point::Number(v)) => s.contains(v.floor().to_i64().unwrap_or(i64::MAX)),
            (Repr::Line(s), Point::Number(v)) => s.contains(v),
            (Repr::Coin(s), Point::Seq(q)) => s.contains(q),
            _ => unreachable!("in_space checked the point kind"),
        })
    }

    pub fn is_empty(&self) -> bool {
        match &self.repr {
            Repr::Nat(s) => s.is_empty(),
            Repr::Line(s) => s.is_empty(),
            Repr::Coin(s) => s.is_empty(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    /// Extensional equality; the normal forms are reduced but not unique.
    pub fn equivalent(&self, other: &Event) -> bool {
        self.space == other.space
            && self.difference(other).is_ok_and(|d| d.is_empty())
            && other.difference(self).is_ok_and(|d| d.is_empty())
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.space == other.space && self.difference(other).is_ok_and(|d| d.is_empty())
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.intersect(other).is_ok_and(|d| d.is_empty())
    }

    /// Explicit members, when the event is finite.
    pub fn finite_members(&self) -> Option<Vec<Point>> {
        match &self.repr {
            Repr::Nat(s) => Some(
                s.finite_members()?
                    .into_iter()
                    .map(|x| Point::nat(x as u64))
                    .collect(),
            ),
            Repr::Line(s) => Some(s.finite_members()?.into_iter().map(Point::Number).collect()),
            Repr::Coin(s) => Some(s.finite_members()?.into_iter().map(Point::Seq).collect()),
        }
    }

    pub fn count_at(&self, grid: &GridIndex) -> Result<u128, EventError> {
        if grid.space() != self.space {
            return Err(EventError::SpaceMismatch(self.space, grid.space()));
        }
        grid.validate()?;
        Ok(match (&self.repr, grid) {
            (Repr::Nat(s), GridIndex::Nat(n)) => s.count_range(1, *n as i128),
            (Repr::Line(s), GridIndex::Rational(n)) => s.count_at(*n, &[]),
            (Repr::Line(s), GridIndex::Real { n, theta }) => s.count_at(*n, theta),
            (Repr::Coin(s), GridIndex::Coin { tosses, sigma }) => s.count_at(*tosses as usize, sigma),
            _ => unreachable!("grid space matches event space"),
        })
    }

    /// Weighted count `sum_{x in A ∩ {1..n}} w(x)` on the naturals.
    pub fn weighted_count_at(&self, w: &WeightFn, n: u64) -> Result<num_rational::BigRational, EventError> {
        match &self.repr {
            Repr::Nat(s) => Ok(w.partial_sum(s, n)),
            _ => Err(EventError::Unsupported("weights are defined on the naturals only".into())),
        }
    }

    pub fn eventual_count(&self, family: DirectedFamily) -> Result<EventualCount, EventError> {
        if !self.space.supports(family) {
            return Err(EventError::FamilyMismatch {
                space: self.space,
                family,
            });
        }
        Ok(match &self.repr {
            Repr::Nat(s) => EventualCount::Exact(WeightFn::uniform().partial_sum_qp(s)),
            Repr::Line(s) => match s.eventual_count(self.space == SpaceKind::Real) {
                LineCount::Exact(f) => EventualCount::Exact(f),
                LineCount::Bounds(lower, upper) => EventualCount::Bounds { lower, upper },
            },
            Repr::Coin(s) => EventualCount::Exact(s.eventual_count()),
        })
    }

    pub fn weighted_eventual_count(&self, w: &WeightFn) -> Result<QuasiPolynomial, EventError> {
        match &self.repr {
            Repr::Nat(s) => Ok(w.partial_sum_qp(s)),
            _ => Err(EventError::Unsupported("weights are defined on the naturals only".into())),
        }
    }
}

pub fn union(a: &Event, b: &Event) -> Result<Event, EventError> {
    a.union(b)
}

pub fn intersect(a: &Event, b: &Event) -> Result<Event, EventError> {
    a.intersect(b)
}

pub fn complement(a: &Event) -> Event {
    a.complement()
}

pub fn member(a: &Event, x: &Point) -> Result<bool, EventError> {
    a.member(x)
}

pub fn count_at(a: &Event, grid: &GridIndex) -> Result<u128, EventError> {
    a.count_at(grid)
}

pub fn eventual_count(a: &Event, family: DirectedFamily) -> Result<EventualCount, EventError> {
    a.eventual_count(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventual::GridPoint;
    use num_rational::BigRational;

    #[test]
    fn evens_count_with_alternating_correction() {
        let e = Event::nat(&IntSet::progression(2, 0));
        assert_eq!(e.count_at(&GridIndex::Nat(720)).unwrap(), 360);
        let f = e.eventual_count(DirectedFamily::AllN).unwrap();
        assert_eq!(
            f.exact().unwrap().to_string(),
            "1/2*n; period=2; corr=[0, -1/2]; n0=2"
        );
        assert!(e.complement().equivalent(&Event::nat(&IntSet::progression(2, 1))));
    }

    #[test]
    fn rational_space_masks_irrationals() {
        let all = Event::full(SpaceKind::Rational);
        let x = Point::Number(Quadratic::sqrt(2));
        assert!(all.member(&x).is_err());
        assert_eq!(all.count_at(&GridIndex::Rational(24)).unwrap(), 1153);
        let f = all.eventual_count(DirectedFamily::QGrid).unwrap();
        assert_eq!(
            f.exact().unwrap().eval(&GridPoint::nat(24)),
            BigRational::from_integer(1153.into())
        );
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(GridIndex::Rational(24).size(), 1153);
        let g = GridIndex::Coin {
            tosses: 3,
            sigma: vec![
                Sequence::constant(coin::Coin::H),
                Sequence::constant(coin::Coin::T),
            ],
        };
        assert_eq!(g.size(), 16);
        assert_eq!(Event::full(SpaceKind::Coin).count_at(&g).unwrap(), 16);
    }

    #[test]
    fn family_checks() {
        let e = Event::full(SpaceKind::Nat);
        assert!(matches!(
            e.eventual_count(DirectedFamily::QGrid),
            Err(EventError::FamilyMismatch { .. })
        ));
    }
}
