//! Exact quadratic irrationals `r + c*sqrt(d)`.
//!
//! These serve as irrational interval endpoints and as the offsets `theta`
//! of the real grids. Comparison is exact: the sign of an expression with at
//! most two distinct square roots is decided by repeated squaring.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    rational: BigRational,
    coeff: BigRational,
    /// Squarefree and at least 2 when `coeff != 0`; 1 otherwise.
    radicand: u64,
}

fn sign_of(x: &BigRational) -> Ordering {
    x.cmp(&BigRational::zero())
}

/// Sign of `A + B` given the signs of `A` and `B` and their squares.
fn sign_of_sum(sa: Ordering, a2: &BigRational, sb: Ordering, b2: &BigRational) -> Ordering {
    if sa == Ordering::Equal {
        return sb;
    }
    if sb == Ordering::Equal || sa == sb {
        return sa;
    }
    match a2.cmp(b2) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Sign of `r + c*sqrt(d)`.
fn sign1(r: &BigRational, c: &BigRational, d: u64) -> Ordering {
    let d = BigRational::from_integer(d.into());
    sign_of_sum(sign_of(r), &(r * r), sign_of(c), &(c * c * d))
}

/// Sign of `r + c1*sqrt(d1) + c2*sqrt(d2)` for squarefree radicands.
fn sign2(r: &BigRational, c1: &BigRational, d1: u64, c2: &BigRational, d2: u64) -> Ordering {
    if d1 == d2 {
        return sign1(r, &(c1 + c2), d1);
    }
    if c1.is_zero() {
        return sign1(r, c2, d2);
    }
    if c2.is_zero() {
        return sign1(r, c1, d1);
    }
    let q1 = c1 * c1 * BigRational::from_integer(d1.into());
    let q2 = c2 * c2 * BigRational::from_integer(d2.into());
    let su = sign_of_sum(sign_of(c1), &q1, sign_of(c2), &q2);
    let sr = sign_of(r);
    if sr == Ordering::Equal || sr == su {
        return if sr == Ordering::Equal { su } else { sr };
    }
    // Opposite signs: compare r^2 with (c1 sqrt d1 + c2 sqrt d2)^2.
    let g = d1.gcd(&d2);
    let d12 = (d1 / g) * (d2 / g);
    let cross = -(c1 * c2 * BigRational::from_integer((2 * g).into()));
    match sign1(&(r * r - q1 - q2), &cross, d12) {
        Ordering::Greater => sr,
        Ordering::Less => su,
        Ordering::Equal => Ordering::Equal,
    }
}

fn squarefree_split(mut d: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut k = 2u64;
    while k.saturating_mul(k) <= d {
        while d % (k * k) == 0 {
            d /= k * k;
            outside *= k;
        }
        k += 1;
    }
    (outside, d)
}

impl Quadratic {
    pub fn from_rational(r: BigRational) -> Self {
        Quadratic {
            rational: r,
            coeff: BigRational::zero(),
            radicand: 1,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Quadratic::from_rational(BigRational::from_integer(n.into()))
    }

    /// `rational + coeff * sqrt(radicand)` for any radicand.
    pub fn new(rational: BigRational, coeff: BigRational, radicand: u64) -> Self {
        if radicand == 0 || coeff.is_zero() {
            return Quadratic::from_rational(rational);
        }
        let (outside, inner) = squarefree_split(radicand);
        let coeff = coeff * BigRational::from_integer(outside.into());
        if inner == 1 {
            return Quadratic::from_rational(rational + coeff);
        }
        Quadratic {
            rational,
            coeff,
            radicand: inner,
        }
    }

    /// `(p + q*sqrt(d)) / r` in integer triple form.
    pub fn from_triple(p: i64, q: i64, d: u64, r: i64) -> Self {
        let r = BigRational::from_integer(r.into());
        Quadratic::new(
            BigRational::from_integer(p.into()) / &r,
            BigRational::from_integer(q.into()) / &r,
            d,
        )
    }

    pub fn sqrt(d: u64) -> Self {
        Quadratic::new(BigRational::zero(), BigRational::one(), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rational)
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.rational.is_integer()
    }

    /// Sum, when both operands share a radicand or one is rational.
    pub fn checked_add(&self, other: &Quadratic) -> Option<Quadratic> {
        if self.is_rational() || other.is_rational() || self.radicand == other.radicand {
            let d = self.radicand.max(other.radicand);
            return Some(Quadratic::new(
                &self.rational + &other.rational,
                &self.coeff + &other.coeff,
                d,
            ));
        }
        None
    }

    pub fn add_rational(&self, r: &BigRational) -> Quadratic {
        Quadratic {
            rational: &self.rational + r,
            coeff: self.coeff.clone(),
            radicand: self.radicand,
        }
    }

    pub fn neg(&self) -> Quadratic {
        Quadratic {
            rational: -&self.rational,
            coeff: -&self.coeff,
            radicand: self.radicand,
        }
    }

    pub fn scale(&self, r: &BigRational) -> Quadratic {
        Quadratic::new(&self.rational * r, &self.coeff * r, self.radicand)
    }

    /// Product, when at least one operand is rational or the radicands agree.
    pub fn checked_mul(&self, other: &Quadratic) -> Option<Quadratic> {
        if let Some(r) = other.as_rational() {
            return Some(self.scale(r));
        }
        if let Some(r) = self.as_rational() {
            return Some(other.scale(r));
        }
        if self.radicand != other.radicand {
            return None;
        }
        let d = BigRational::from_integer(self.radicand.into());
        Some(Quadratic::new(
            &self.rational * &other.rational + &self.coeff * &other.coeff * d,
            &self.rational * &other.coeff + &self.coeff * &other.rational,
            self.radicand,
        ))
    }

    /// Sign of `self - other`.
    pub fn cmp_exact(&self, other: &Quadratic) -> Ordering {
        sign2(
            &(&self.rational - &other.rational),
            &self.coeff,
            self.radicand,
            &-&other.coeff,
            other.radicand,
        )
    }

    /// Sign of `self - other - shift`, used to place `(p + a)/n` relative to endpoints.
    pub fn cmp_shifted(&self, other: &Quadratic, shift: &BigRational) -> Ordering {
        sign2(
            &(&self.rational - &other.rational - shift),
            &self.coeff,
            self.radicand,
            &-&other.coeff,
            other.radicand,
        )
    }

    pub fn signum(&self) -> Ordering {
        sign1(&self.rational, &self.coeff, self.radicand)
    }

    /// Rational bracket `lo <= self <= hi` with `hi - lo <= 10^-digits`.
    pub fn bracket(&self, digits: u32) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.rational.clone(), self.rational.clone());
        }
        let (lo, hi) = sqrt_bracket(self.radicand, digits, &self.coeff);
        (&self.rational + lo, &self.rational + hi)
    }

    pub fn floor(&self) -> BigInt {
        if let Some(r) = self.as_rational() {
            return r.floor().to_integer();
        }
        let (lo, _) = self.bracket(6);
        let mut k = lo.floor().to_integer();
        let as_q = |k: &BigInt| Quadratic::from_rational(BigRational::from_integer(k.clone()));
        while self.cmp_exact(&as_q(&(&k + 1))) != Ordering::Less {
            k += 1;
        }
        while self.cmp_exact(&as_q(&k)) == Ordering::Less {
            k -= 1;
        }
        k
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }
}

/// `floor(x - y)`, exact even when `x` and `y` carry different radicands.
pub fn floor_sub(x: &Quadratic, y: &Quadratic) -> BigInt {
    if let Some(d) = x.checked_add(&y.neg()) {
        return d.floor();
    }
    let (xl, _) = x.bracket(6);
    let (_, yh) = y.bracket(6);
    let mut k = (xl - yh).floor().to_integer();
    let int = |k: &BigInt| BigRational::from_integer(k.clone());
    while x.cmp_shifted(y, &int(&(&k + 1))) != Ordering::Less {
        k += 1;
    }
    while x.cmp_shifted(y, &int(&k)) == Ordering::Less {
        k -= 1;
    }
    k
}

/// `ceil(x - y)`.
pub fn ceil_sub(x: &Quadratic, y: &Quadratic) -> BigInt {
    -floor_sub(y, x)
}

/// Bracket of `c * sqrt(d)` with width at most `|c| * 10^-digits`.
fn sqrt_bracket(d: u64, digits: u32, c: &BigRational) -> (BigRational, BigRational) {
    let scale = BigInt::from(10u32).pow(digits);
    let s = (BigInt::from(d) * &scale * &scale).sqrt();
    let lo = BigRational::new(s.clone(), scale.clone());
    let hi = BigRational::new(s + 1, scale);
    if c.is_negative() {
        (c * hi, c * lo)
    } else {
        (c * lo, c * hi)
    }
}

impl Ord for Quadratic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl PartialOrd for Quadratic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<BigRational> for Quadratic {
    fn from(r: BigRational) -> Self {
        Quadratic::from_rational(r)
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.rational);
        }
        let radical = |f: &mut fmt::Formatter<'_>, c: &BigRational| {
            if c.is_one() {
                write!(f, "sqrt({})", self.radicand)
            } else {
                write!(f, "{}*sqrt({})", c, self.radicand)
            }
        };
        if self.rational.is_zero() {
            if self.coeff.is_negative() {
                write!(f, "-")?;
            }
            return radical(f, &self.coeff.abs());
        }
        write!(f, "{}", self.rational)?;
        if self.coeff.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        radical(f, &self.coeff.abs())
    }
}

/// A rational linear combination of square roots of distinct squarefree integers.
///
/// Key 1 holds the rational part. Since such roots are linearly independent
/// over Q, the sum is rational exactly when every other coefficient vanishes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SurdSum {
    terms: BTreeMap<u64, BigRational>,
}

impl SurdSum {
    pub fn zero() -> Self {
        SurdSum::default()
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = SurdSum::zero();
        s.add_term(1, r);
        s
    }

    fn add_term(&mut self, d: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(d).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&d);
        }
    }

    pub fn add_quadratic(&mut self, q: &Quadratic, weight: &BigRational) {
        self.add_term(1, q.rational_part() * weight);
        if !q.is_rational() {
            self.add_term(q.radicand(), q.coeff() * weight);
        }
    }

    pub fn add_rational(&mut self, r: &BigRational) {
        self.add_term(1, r.clone());
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    /// Rational bracket; exact when the sum is rational.
    pub fn bracket(&self, digits: u32) -> (BigRational, BigRational) {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (d, c) in &self.terms {
            if *d == 1 {
                lo += c;
                hi += c;
            } else {
                let (l, h) = sqrt_bracket(*d, digits, c);
                lo += l;
                hi += h;
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn normalizes_radicands() {
        let x = Quadratic::sqrt(8);
        assert_eq!(x.radicand(), 2);
        assert_eq!(x.coeff(), &q(2, 1));
        assert!(Quadratic::sqrt(9).is_rational());
        assert_eq!(Quadratic::sqrt(9).as_rational(), Some(&q(3, 1)));
    }

    #[test]
    fn single_radical_ordering() {
        let r2 = Quadratic::sqrt(2);
        assert!(r2 > Quadratic::from_rational(q(141, 100)));
        assert!(r2 < Quadratic::from_rational(q(142, 100)));
        let golden = Quadratic::from_triple(1, 1, 5, 2);
        assert!(golden > Quadratic::from_rational(q(1618, 1000)));
        assert!(golden < Quadratic::from_rational(q(1619, 1000)));
    }

    #[test]
    fn two_radical_ordering() {
        // sqrt(2) + sqrt(3) = 3.146..., pi-adjacent; compare against 3.146 and 3.147
        let s = sign2(&q(-3146, 1000), &q(1, 1), 2, &q(1, 1), 3);
        assert_eq!(s, Ordering::Greater);
        let s = sign2(&q(-3147, 1000), &q(1, 1), 2, &q(1, 1), 3);
        assert_eq!(s, Ordering::Less);
        // sqrt(3) - sqrt(2) = 0.3178...
        assert_eq!(sign2(&q(-317, 1000), &q(1, 1), 3, &q(-1, 1), 2), Ordering::Greater);
        assert_eq!(sign2(&q(-318, 1000), &q(1, 1), 3, &q(-1, 1), 2), Ordering::Less);
        assert!(Quadratic::sqrt(3) > Quadratic::sqrt(2));
        assert_eq!(Quadratic::sqrt(2).cmp(&Quadratic::sqrt(2)), Ordering::Equal);
    }

    #[test]
    fn floors() {
        assert_eq!(Quadratic::sqrt(2).floor(), BigInt::from(1));
        assert_eq!(Quadratic::sqrt(2).neg().floor(), BigInt::from(-2));
        assert_eq!(Quadratic::sqrt(2).scale(&q(720, 1)).floor(), BigInt::from(1018));
        assert_eq!(Quadratic::sqrt(2).ceil(), BigInt::from(2));
        assert_eq!(Quadratic::from_rational(q(-3, 2)).floor(), BigInt::from(-2));
    }

    #[test]
    fn floors_of_mixed_differences() {
        // 720*sqrt(2) - (sqrt(3) - 1) = 1018.233... - 0.732... = 1017.50...
        let x = Quadratic::sqrt(2).scale(&q(720, 1));
        let y = Quadratic::from_triple(-1, 1, 3, 1);
        assert_eq!(floor_sub(&x, &y), BigInt::from(1017));
        assert_eq!(ceil_sub(&x, &y), BigInt::from(1018));
        assert_eq!(floor_sub(&y, &x), BigInt::from(-1018));
        let z = Quadratic::sqrt(2).add_rational(&q(3, 1));
        assert_eq!(floor_sub(&z, &Quadratic::sqrt(2)), BigInt::from(3));
    }

    #[test]
    fn brackets_contain_value() {
        let x = Quadratic::from_triple(1, -3, 7, 4);
        let (lo, hi) = x.bracket(9);
        assert!(Quadratic::from_rational(lo.clone()) <= x);
        assert!(Quadratic::from_rational(hi.clone()) >= x);
        assert!(&hi - &lo <= q(1, 1_000_000_000) * q(3, 4) + q(1, 1_000_000_000_000));
    }

    #[test]
    fn surd_sums_cancel() {
        let mut s = SurdSum::zero();
        s.add_quadratic(&Quadratic::sqrt(2).add_rational(&q(1, 1)), &q(1, 1));
        s.add_quadratic(&Quadratic::sqrt(2), &q(-1, 1));
        assert_eq!(s.as_rational(), Some(q(1, 1)));
        s.add_quadratic(&Quadratic::sqrt(3), &q(1, 1));
        assert_eq!(s.as_rational(), None);
    }

    #[test]
    fn display() {
        assert_eq!(Quadratic::sqrt(2).to_string(), "sqrt(2)");
        assert_eq!(Quadratic::from_triple(1, -1, 2, 2).to_string(), "1/2 - 1/2*sqrt(2)");
        assert_eq!(Quadratic::sqrt(2).neg().to_string(), "-sqrt(2)");
    }
}
