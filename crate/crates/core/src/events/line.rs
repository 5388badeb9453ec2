//! Subsets of the rational and real lines.
//!
//! Integers are governed by an [`IntSet`]. The remaining points are split
//! by sorted breakpoints `b_1 < ... < b_k` into open cells, each flagged for
//! its non-integer rationals and its irrationals; non-integer breakpoints
//! carry their own membership flag.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::intset::IntSet;
use crate::eventual::{QuasiPolynomial, VAR_N, VAR_T};
use crate::poly::Poly;
use crate::surd::{ceil_sub, floor_sub, Quadratic, SurdSum};

/// Decimal digits used to bracket irrational cell lengths.
const BRACKET_DIGITS: u32 = 40;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Cell {
    /// Non-integer rationals in the open cell.
    pub rat: bool,
    pub irr: bool,
}

impl Cell {
    const EMPTY: Cell = Cell { rat: false, irr: false };
    const FULL: Cell = Cell { rat: true, irr: true };

    fn flag_for(&self, x: &Quadratic) -> bool {
        if x.is_rational() {
            self.rat
        } else {
            self.irr
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LineSet {
    ints: IntSet,
    breaks: Vec<Quadratic>,
    at: Vec<bool>,
    cells: Vec<Cell>,
}

/// Eventual count on the line grids: exact, or sandwiched when an endpoint is irrational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LineCount {
    Exact(QuasiPolynomial),
    Bounds(QuasiPolynomial, QuasiPolynomial),
}

fn to_i128(x: &BigInt) -> i128 {
    x.to_i128().expect("grid coordinate fits in i128")
}

impl LineSet {
    fn build(ints: IntSet, breaks: Vec<Quadratic>, at: Vec<bool>, cells: Vec<Cell>) -> Self {
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(cells.len(), breaks.len() + 1);
        LineSet {
            ints,
            breaks,
            at,
            cells,
        }
        .normalized()
    }

    pub fn empty() -> Self {
        LineSet::build(IntSet::empty(), vec![], vec![], vec![Cell::EMPTY])
    }

    pub fn full() -> Self {
        LineSet::build(IntSet::full(), vec![], vec![], vec![Cell::FULL])
    }

    /// The rationals.
    pub fn rationals() -> Self {
        LineSet::build(
            IntSet::full(),
            vec![],
            vec![],
            vec![Cell { rat: true, irr: false }],
        )
    }

    pub fn from_ints(ints: IntSet) -> Self {
        LineSet::build(ints, vec![], vec![], vec![Cell::EMPTY])
    }

    /// `[a, b)`; `None` leaves a side unbounded.
    pub fn interval(a: Option<&Quadratic>, b: Option<&Quadratic>) -> Self {
        if let (Some(a), Some(b)) = (a, b) {
            if a >= b {
                return LineSet::empty();
            }
        }
        let lo = a.map(|a| clamp_i64(a.ceil()));
        let hi = b.map(|b| clamp_i64(b.ceil()));
        let ints = IntSet::range(lo, hi);
        let mut breaks = Vec::new();
        let mut at = Vec::new();
        let mut cells = vec![Cell { rat: a.is_none(), irr: a.is_none() }];
        if let Some(a) = a {
            breaks.push(a.clone());
            at.push(true);
            cells.push(Cell::FULL);
        }
        if let Some(b) = b {
            breaks.push(b.clone());
            at.push(false);
            cells.push(Cell::EMPTY);
        }
        LineSet::build(ints, breaks, at, cells)
    }

    /// The open ray `(a, +inf)`.
    pub fn above(a: &Quadratic) -> Self {
        LineSet::interval(Some(a), None).difference(&LineSet::point(a))
    }

    pub fn point(x: &Quadratic) -> Self {
        if x.is_integer() {
            let v = clamp_i64(x.floor());
            return LineSet::from_ints(IntSet::points(&[v]));
        }
        LineSet::build(
            IntSet::empty(),
            vec![x.clone()],
            vec![true],
            vec![Cell::EMPTY, Cell::EMPTY],
        )
    }

    pub fn points(xs: &[Quadratic]) -> Self {
        xs.iter()
            .fold(LineSet::empty(), |acc, x| acc.union(&LineSet::point(x)))
    }

    pub fn ints(&self) -> &IntSet {
        &self.ints
    }

    pub fn breaks(&self) -> &[Quadratic] {
        &self.breaks
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn breakpoint_flags(&self) -> &[bool] {
        &self.at
    }

    pub fn contains(&self, x: &Quadratic) -> bool {
        if x.is_integer() {
            return self.ints.contains(clamp_i64(x.floor()));
        }
        let i = self.breaks.partition_point(|b| b < x);
        if i < self.breaks.len() && &self.breaks[i] == x {
            return self.at[i];
        }
        self.cells[i].flag_for(x)
    }

    /// Flags re-expressed over a sorted superset of the breakpoints.
    fn refine(&self, breaks: &[Quadratic]) -> (Vec<bool>, Vec<Cell>) {
        let mut at = Vec::with_capacity(breaks.len());
        let mut cells = Vec::with_capacity(breaks.len() + 1);
        let mut j = 0;
        cells.push(self.cells[0]);
        for b in breaks {
            while j < self.breaks.len() && &self.breaks[j] < b {
                j += 1;
            }
            if j < self.breaks.len() && &self.breaks[j] == b {
                at.push(self.at[j]);
                cells.push(self.cells[j + 1]);
            } else {
                at.push(self.cells[j].flag_for(b));
                cells.push(self.cells[j]);
            }
        }
        (at, cells)
    }

    fn combine(&self, other: &LineSet, op: impl Fn(bool, bool) -> bool) -> LineSet {
        let mut breaks: Vec<Quadratic> = Vec::with_capacity(self.breaks.len() + other.breaks.len());
        let (mut i, mut j) = (0, 0);
        while i < self.breaks.len() || j < other.breaks.len() {
            let next = match (self.breaks.get(i), other.breaks.get(j)) {
                (Some(x), Some(y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(x), Some(y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(x), None) => {
                    i += 1;
                    x
                }
                (_, Some(y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            breaks.push(next.clone());
        }
        let (at_a, cells_a) = self.refine(&breaks);
        let (at_b, cells_b) = other.refine(&breaks);
        let at = at_a.iter().zip(&at_b).map(|(&x, &y)| op(x, y)).collect();
        let cells = cells_a
            .iter()
            .zip(&cells_b)
            .map(|(x, y)| Cell {
                rat: op(x.rat, y.rat),
                irr: op(x.irr, y.irr),
            })
            .collect();
        let ints = match (op(false, false), op(true, false), op(false, true), op(true, true)) {
            (false, true, true, true) => self.ints.union(&other.ints),
            (false, false, false, true) => self.ints.intersect(&other.ints),
            (false, true, false, false) => self.ints.difference(&other.ints),
            _ => unreachable!("only union, intersection and difference are used"),
        };
        LineSet::build(ints, breaks, at, cells)
    }

    pub fn union(&self, other: &LineSet) -> LineSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &LineSet) -> LineSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &LineSet) -> LineSet {
        self.combine(other, |a, b| a && !b)
    }

    /// Complement within the reals.
    pub fn complement(&self) -> LineSet {
        LineSet::build(
            self.ints.complement(),
            self.breaks.clone(),
            self.at.iter().map(|&b| !b).collect(),
            self.cells
                .iter()
                .map(|c| Cell {
                    rat: !c.rat,
                    irr: !c.irr,
                })
                .collect(),
        )
    }

    /// Drops every irrational point.
    pub fn rational_part(&self) -> LineSet {
        LineSet::build(
            self.ints.clone(),
            self.breaks.clone(),
            self.at
                .iter()
                .zip(&self.breaks)
                .map(|(&f, b)| f && b.is_rational())
                .collect(),
            self.cells
                .iter()
                .map(|c| Cell { rat: c.rat, irr: false })
                .collect(),
        )
    }

    fn normalized(mut self) -> Self {
        let mut breaks = Vec::with_capacity(self.breaks.len());
        let mut at = Vec::with_capacity(self.at.len());
        let mut cells = vec![self.cells[0]];
        for (i, b) in self.breaks.iter().enumerate() {
            let left = *cells.last().unwrap();
            let right = self.cells[i + 1];
            let flag = if b.is_integer() { false } else { self.at[i] };
            let redundant = left == right && (b.is_integer() || flag == left.flag_for(b));
            if !redundant {
                breaks.push(b.clone());
                at.push(flag);
                cells.push(right);
            }
        }
        self.breaks = breaks;
        self.at = at;
        self.cells = cells;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty()
            && self.cells.iter().all(|c| *c == Cell::EMPTY)
            && self
                .at
                .iter()
                .zip(&self.breaks)
                .all(|(&f, b)| !f || b.is_integer())
    }

    /// Extensional equality.
    pub fn equivalent(&self, other: &LineSet) -> bool {
        self.difference(other).is_empty() && other.difference(self).is_empty()
    }

    /// Explicit members when the set is finite.
    pub fn finite_members(&self) -> Option<Vec<Quadratic>> {
        if self.cells.iter().any(|c| c.rat || c.irr) {
            return None;
        }
        let mut out: Vec<Quadratic> = self
            .ints
            .finite_members()?
            .into_iter()
            .map(Quadratic::from_int)
            .collect();
        for (b, &f) in self.breaks.iter().zip(&self.at) {
            if f && !b.is_integer() {
                out.push(b.clone());
            }
        }
        out.sort();
        Some(out)
    }

    /// Exact `|A ∩ grid|` where the grid is `{p/n : |p| <= n^2}` together with
    /// `{(p + a)/n : -n^2 <= p < n^2, a in theta}`.
    pub fn count_at(&self, n: u64, theta: &[Quadratic]) -> u128 {
        let n_i = n as i128;
        let nn = n_i * n_i;
        let nq = BigRational::from_integer(n.into());
        let mut total: i128 = self.ints.count_range(-n_i, n_i) as i128;
        let scaled: Vec<Quadratic> = self.breaks.iter().map(|b| b.scale(&nq)).collect();
        for (i, cell) in self.cells.iter().enumerate() {
            let lo = if i == 0 { None } else { Some(&scaled[i - 1]) };
            let hi = scaled.get(i);
            if cell.rat {
                let plo = lo.map_or(-nn, |x| to_i128(&x.floor()) + 1).max(-nn);
                let phi = hi.map_or(nn, |x| to_i128(&x.ceil()) - 1).min(nn);
                if phi >= plo {
                    let multiples = Integer::div_floor(&phi, &n_i) - Integer::div_floor(&(plo - 1), &n_i);
                    total += phi - plo + 1 - multiples;
                }
            }
            if cell.irr {
                for a in theta {
                    let plo = lo.map_or(-nn, |x| to_i128(&floor_sub(x, a)) + 1).max(-nn);
                    let phi = hi.map_or(nn - 1, |x| to_i128(&ceil_sub(x, a)) - 1).min(nn - 1);
                    total += (phi - plo + 1).max(0);
                }
            }
        }
        for ((b, nb), &flag) in self.breaks.iter().zip(&scaled).zip(&self.at) {
            if !flag || b.is_integer() {
                continue;
            }
            if let Some(r) = nb.as_rational() {
                if r.is_integer() && r.abs() <= BigRational::from_integer(nn.into()) {
                    total += 1;
                }
            } else {
                for a in theta {
                    if let Some(p) = nb.checked_add(&a.neg()) {
                        if p.is_integer() {
                            let p = to_i128(&p.floor());
                            if -nn <= p && p < nn {
                                total += 1;
                            }
                        }
                    }
                }
            }
        }
        total as u128
    }

    /// Common multiple of the integer modulus and every rational breakpoint denominator.
    pub fn grid_period(&self) -> u64 {
        self.breaks
            .iter()
            .filter_map(|b| b.as_rational())
            .fold(self.ints.modulus(), |acc, r| {
                acc.lcm(&r.denom().to_u64().expect("denominator fits in u64"))
            })
    }

    /// Smallest integer bound strictly exceeding every breakpoint and cut in absolute value.
    pub fn spatial_bound(&self) -> u64 {
        let b = self
            .breaks
            .iter()
            .map(|b| {
                let m = b.ceil().abs().max(b.floor().abs());
                m.to_u64().expect("breakpoint magnitude fits in u64")
            })
            .max()
            .unwrap_or(0);
        b.max(self.ints.cut_bound()) + 1
    }

    /// Smallest factorial index `m!` divisible by the grid period and beyond the spatial bound.
    pub fn factorial_threshold(&self) -> u64 {
        let p = self.grid_period();
        let b = self.spatial_bound();
        let mut f = 1u64;
        let mut m = 1u64;
        while f % p != 0 || f < b {
            m += 1;
            f = f.checked_mul(m).expect("factorial threshold overflow");
        }
        f
    }

    /// Eventual count along the factorial grids; `with_theta` adds the irrational offsets.
    pub fn eventual_count(&self, with_theta: bool) -> LineCount {
        let n0 = self.factorial_threshold();
        let n = Poly::var(VAR_N);
        let nn = &n * &n;
        let t = Poly::var(VAR_T);
        let q = |v: i64| BigRational::from_integer(v.into());

        // Integers in [-n, n] are affine in n once P | n and n > B.
        let k = self.ints.modulus();
        let slope = BigRational::new(
            ((self.ints.lower_density_count() + self.ints.upper_density_count()) as i64).into(),
            (k as i64).into(),
        );
        let at_n0 = BigRational::from_integer(self.ints.count_range(-(n0 as i128), n0 as i128).into());
        let offset = &at_n0 - &slope * q(n0 as i64);
        let base = &n.scale(&slope) + &Poly::constant(offset);

        let mut exact = base.clone();
        let mut lower = base.clone();
        let mut upper = base;
        let mut bounded = false;
        let one = Poly::one();

        for (i, cell) in self.cells.iter().enumerate() {
            let lo = if i == 0 { None } else { Some(&self.breaks[i - 1]) };
            let hi = self.breaks.get(i);
            let irrational_end = lo.is_some_and(|x| !x.is_rational()) || hi.is_some_and(|x| !x.is_rational());
            // Points p/n in the cell: c2*n^2 + c1*n + c0, with c1 possibly a surd sum.
            let mut c1 = SurdSum::zero();
            let (c2, c0) = match (lo, hi) {
                (None, None) => (2, 1),
                (Some(u), None) => {
                    c1.add_quadratic(u, &q(-1));
                    (1, 0)
                }
                (None, Some(v)) => {
                    c1.add_quadratic(v, &q(1));
                    (1, 0)
                }
                (Some(u), Some(v)) => {
                    c1.add_quadratic(v, &q(1));
                    c1.add_quadratic(u, &q(-1));
                    (0, -1)
                }
            };
            let (c1_lo, c1_hi) = c1.bracket(BRACKET_DIGITS);
            let exact_c1 = c1.as_rational();
            let form = |c1: &BigRational, c0: i64| -> Poly {
                &(&nn.scale(&q(c2)) + &n.scale(c1)) + &Poly::constant(q(c0))
            };
            if cell.rat {
                // Integers strictly inside the cell.
                let ints_inside = match (lo, hi) {
                    (None, None) => &n.scale(&q(2)) + &one,
                    (Some(u), None) => &n - &Poly::constant(BigRational::from_integer(u.floor())),
                    (None, Some(v)) => &n + &Poly::constant(BigRational::from_integer(v.ceil())),
                    (Some(u), Some(v)) => {
                        Poly::constant(BigRational::from_integer(v.ceil() - u.floor() - 1))
                    }
                };
                match (&exact_c1, irrational_end) {
                    (Some(c), false) => {
                        let p = &form(c, c0) - &ints_inside;
                        exact = &exact + &p;
                        lower = &lower + &p;
                        upper = &upper + &p;
                    }
                    _ => {
                        bounded = true;
                        lower = &lower + &(&form(&c1_lo, c0 - 1) - &ints_inside);
                        upper = &upper + &(&form(&c1_hi, c0 + 1) - &ints_inside);
                    }
                }
            }
            if cell.irr && with_theta {
                // Irrational points (p + a)/n: no endpoint correction.
                let c0_irr = 0;
                match (&exact_c1, irrational_end) {
                    (Some(c), false) => {
                        let p = &form(c, c0_irr) * &t;
                        exact = &exact + &p;
                        lower = &lower + &p;
                        upper = &upper + &p;
                    }
                    _ => {
                        bounded = true;
                        lower = &lower + &(&form(&c1_lo, c0_irr - 1) * &t);
                        upper = &upper + &(&form(&c1_hi, c0_irr + 1) * &t);
                    }
                }
            }
        }
        for (b, &flag) in self.breaks.iter().zip(&self.at) {
            if !flag || b.is_integer() {
                continue;
            }
            if b.is_rational() {
                exact = &exact + &one;
                lower = &lower + &one;
                upper = &upper + &one;
            } else if with_theta {
                bounded = true;
                upper = &upper + &t;
            }
        }
        let qp = |p: Poly| QuasiPolynomial::polynomial(p).with_threshold(n0);
        if bounded {
            LineCount::Bounds(qp(lower), qp(upper))
        } else {
            debug_assert_eq!(exact, lower);
            LineCount::Exact(qp(exact))
        }
    }
}

fn clamp_i64(x: BigInt) -> i64 {
    x.to_i64().unwrap_or(if x.is_negative() { i64::MIN / 4 } else { i64::MAX / 4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventual::GridPoint;

    fn q(n: i64, d: i64) -> Quadratic {
        Quadratic::from_rational(BigRational::new(n.into(), d.into()))
    }

    fn exact(c: LineCount) -> QuasiPolynomial {
        match c {
            LineCount::Exact(f) => f,
            LineCount::Bounds(..) => panic!("expected exact count"),
        }
    }

    #[test]
    fn membership() {
        let a = LineSet::interval(Some(&q(0, 1)), Some(&q(1, 1)));
        assert!(a.contains(&q(0, 1)));
        assert!(a.contains(&q(1, 2)));
        assert!(!a.contains(&q(1, 1)));
        assert!(a.contains(&Quadratic::from_triple(0, 1, 2, 2)));
        let r = a.rational_part();
        assert!(!r.contains(&Quadratic::from_triple(0, 1, 2, 2)));
        let s = LineSet::interval(Some(&Quadratic::sqrt(2)), None);
        assert!(s.contains(&Quadratic::sqrt(2)));
        assert!(!s.contains(&q(141, 100)));
        assert!(s.contains(&q(2, 1)));
    }

    #[test]
    fn boolean_laws() {
        let a = LineSet::interval(Some(&q(-1, 2)), Some(&q(3, 1)));
        let b = LineSet::interval(Some(&q(1, 3)), Some(&Quadratic::sqrt(5)));
        let all = a.union(&a.complement());
        assert!(all.equivalent(&LineSet::full()));
        let ab = a.intersect(&b);
        assert!(ab.equivalent(&LineSet::interval(Some(&q(1, 3)), Some(&Quadratic::sqrt(5)))));
        assert!(a.difference(&a).is_empty());
    }

    #[test]
    fn rational_grid_counts() {
        let unit = LineSet::interval(Some(&q(0, 1)), Some(&q(1, 1))).rational_part();
        assert_eq!(unit.count_at(24, &[]), 24);
        assert_eq!(LineSet::rationals().count_at(24, &[]), 2 * 24 * 24 + 1);
        let pos = LineSet::above(&q(0, 1)).rational_part();
        assert_eq!(pos.count_at(120, &[]), 120 * 120);
        let f = exact(pos.eventual_count(false));
        assert_eq!(f.to_string(), "n^2; period=1; corr=[0]; n0=2");
    }

    #[test]
    fn real_grid_counts() {
        let theta = [Quadratic::from_triple(-1, 1, 2, 1), Quadratic::from_triple(-1, 1, 5, 2)];
        let a = LineSet::interval(Some(&q(1, 2)), Some(&q(7, 3)));
        let f = exact(a.eventual_count(true));
        for n in [24u64, 120, 720] {
            let predicted = f.eval(&GridPoint::real(n, 2));
            assert_eq!(predicted, BigRational::from_integer(a.count_at(n, &theta).into()));
        }
        assert_eq!(LineSet::full().count_at(24, &theta), 2 * 576 + 1 + 2 * 2 * 576);
    }

    #[test]
    fn surd_endpoint_bounds() {
        let theta = [Quadratic::from_triple(-1, 1, 3, 1)];
        let a = LineSet::interval(Some(&q(0, 1)), Some(&Quadratic::sqrt(2)));
        let LineCount::Bounds(lo, hi) = a.eventual_count(true) else {
            panic!("expected bounds")
        };
        for n in [24u64, 120, 720] {
            let c = BigRational::from_integer(a.count_at(n, &theta).into());
            assert!(lo.eval(&GridPoint::real(n, 1)) <= c);
            assert!(c <= hi.eval(&GridPoint::real(n, 1)));
        }
    }
}
