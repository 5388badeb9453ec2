//! Sparse multivariate polynomials over the rationals.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded-lexicographic with variable slot 0 ranked highest. The leading term
//! is therefore the last entry of the map. A polynomial never stores a zero
//! coefficient, so structural equality is polynomial equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Number of variable slots shared by every polynomial in the crate.
pub const NVARS: usize = 4;

/// Exponent vector of a monomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(pub [u32; NVARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; NVARS]);

    pub fn var(slot: usize) -> Self {
        let mut e = [0; NVARS];
        e[slot] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; NVARS]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        Monomial(e)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut e = [0; NVARS];
        for i in 0..NVARS {
            e[i] = self.0[i].checked_sub(other.0[i])?;
        }
        Some(Monomial(e))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Bit `i` is set when slot `i` has a nonzero exponent.
    pub fn vars_mask(&self) -> u8 {
        let mut m = 0;
        for (i, e) in self.0.iter().enumerate() {
            if *e > 0 {
                m |= 1 << i;
            }
        }
        m
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::term(Monomial::ONE, c)
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(slot: usize) -> Self {
        Poly::term(Monomial::var(slot), BigRational::one())
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(it: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                v.is_zero()
            }
            None => {
                self.terms.insert(m, c);
                false
            }
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value of a constant polynomial (zero included).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Leading term under graded-lex order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn vars_mask(&self) -> u8 {
        self.terms.keys().fold(0, |m, k| m | k.vars_mask())
    }

    pub fn degree_in(&self, slot: usize) -> u32 {
        self.terms.keys().map(|m| m.0[slot]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, point: &[BigRational; NVARS]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (slot, e) in m.0.iter().enumerate() {
                for _ in 0..*e {
                    t *= &point[slot];
                }
            }
            acc += t;
        }
        acc
    }

    /// Replaces every monomial by `f(monomial)`; coefficients are summed on collision.
    pub fn map_monomials<F>(&self, mut f: F) -> Poly
    where
        F: FnMut(&Monomial) -> Monomial,
    {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }

    /// Substitutes `slot := slot + shift` for every slot in `mask`.
    pub fn shift_vars(&self, mask: u8, shift: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for slot in 0..NVARS {
                let e = m.0[slot];
                if e == 0 {
                    continue;
                }
                let base = if mask & (1 << slot) != 0 {
                    &Poly::var(slot) + &Poly::constant(shift.clone())
                } else {
                    Poly::var(slot)
                };
                t = &t * &base.pow(e);
            }
            out = &out + &t;
        }
        out
    }

    /// Coefficients with respect to `slot`: entry `k` multiplies `slot^k`.
    pub fn coeffs_in(&self, slot: usize) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(slot) as usize + 1];
        for (m, c) in &self.terms {
            let k = m.0[slot] as usize;
            let mut rest = *m;
            rest.0[slot] = 0;
            out[k].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(slot: usize, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let mut m = Monomial::ONE;
            m.0[slot] = k as u32;
            for (cm, cv) in &c.terms {
                out.add_term(cm.mul(&m), cv.clone());
            }
        }
        out
    }

    pub fn leading_coeff_in(&self, slot: usize) -> Poly {
        self.coeffs_in(slot).pop().unwrap_or_default()
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (dm, dc) = divisor.leading()?;
        let (dm, dc) = (*dm, dc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let m = rm.checked_div(&dm)?;
            let c = rc / &dc;
            let t = Poly::term(m, c.clone());
            rem = &rem - &(&t * divisor);
            quot.add_term(m, c);
        }
        Some(quot)
    }

    /// Pseudo-remainder of `self` by `divisor` viewed as univariate in `slot`.
    fn prem(&self, divisor: &Poly, slot: usize) -> Poly {
        let dd = divisor.degree_in(slot);
        let lc = divisor.leading_coeff_in(slot);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(slot) >= dd {
            let k = r.degree_in(slot) - dd;
            let lr = r.leading_coeff_in(slot);
            let mut shift = Monomial::ONE;
            shift.0[slot] = k;
            r = &(&r * &lc) - &(&(&lr * divisor).mul_monomial(&shift));
        }
        r
    }

    /// Gcd of the coefficients of `self` viewed as univariate in `slot`.
    pub fn content_in(&self, slot: usize) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(slot) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.as_constant().is_some() {
                return Poly::one();
            }
        }
        g
    }

    /// `self` divided by its content in `slot`, scaled to coprime integer coefficients.
    pub fn primitive_part_in(&self, slot: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let c = self.content_in(slot);
        self.div_exact(&c).expect("content divides polynomial").integral()
    }

    /// Positive rational multiple with coprime integer coefficients.
    fn integral(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let l = BigRational::from_integer(self.denominator_lcm());
        let scaled = self.scale(&l);
        scaled.scale(&BigRational::from_integer(scaled.numerator_gcd()).recip())
    }

    /// Scales so the leading coefficient is one. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => Poly::zero(),
        }
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of the coefficient numerators; zero for the zero polynomial.
    pub fn numerator_gcd(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Signs of all coefficients: `Some(Greater)` when all positive,
    /// `Some(Less)` when all negative, `None` when mixed. Zero gives `Equal`.
    pub fn uniform_sign(&self) -> Option<Ordering> {
        if self.is_zero() {
            return Some(Ordering::Equal);
        }
        if self.terms.values().all(|c| c.is_positive()) {
            Some(Ordering::Greater)
        } else if self.terms.values().all(|c| c.is_negative()) {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Sign at points where every variable is positive and infinitely larger
    /// than any polynomial in the others' lower powers: the terms maximal under
    /// divisibility must share a sign, since every other term strictly divides
    /// one of them and is negligible against it. `None` when they disagree.
    pub fn dominant_sign(&self) -> Option<Ordering> {
        if self.is_zero() {
            return Some(Ordering::Equal);
        }
        let mut sign = None;
        for (m, c) in self.terms() {
            if self.terms().any(|(mb, _)| mb != m && m.divides(mb)) {
                continue;
            }
            let s = if c.is_positive() { Ordering::Greater } else { Ordering::Less };
            match sign {
                None => sign = Some(s),
                Some(t) if t != s => return None,
                _ => {}
            }
        }
        sign
    }

    pub fn display_with<'a>(&'a self, names: &'a [&'a str; NVARS]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

/// Greatest common divisor over Q[x_0..x_3], normalized to be monic.
///
/// Univariate images bound the degree of the gcd in each variable. A
/// variable of degree zero is eliminated by passing to contents; otherwise a
/// primitive pseudo-remainder sequence runs in the variable of least degree,
/// with contents computed recursively over the remaining variables.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let mask = a.vars_mask() | b.vars_mask();
    if mask == 0 {
        return Poly::one();
    }
    let vars: Vec<usize> = (0..NVARS).filter(|s| mask & (1 << s) != 0).collect();
    let bounds: Vec<Option<u32>> = vars.iter().map(|&v| image_degree_bound(a, b, v)).collect();
    if bounds.iter().all(|d| *d == Some(0)) {
        return Poly::one();
    }
    if let Some(i) = bounds.iter().position(|d| *d == Some(0)) {
        let v = vars[i];
        return gcd(&a.content_in(v), &b.content_in(v));
    }
    let slot = *vars
        .iter()
        .min_by_key(|&&v| (a.degree_in(v).max(b.degree_in(v)), v))
        .expect("nonempty");
    let ca = a.content_in(slot);
    let cb = b.content_in(slot);
    let content = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let (mut f, mut g) = if pa.degree_in(slot) >= pb.degree_in(slot) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    let prim = loop {
        if g.degree_in(slot) == 0 {
            break Poly::one();
        }
        let r = f.prem(&g, slot);
        if r.is_zero() {
            break g;
        }
        f = g;
        g = r.primitive_part_in(slot);
    };
    (&content * &prim.primitive_part_in(slot)).monic()
}

fn var_power(slot: usize, k: u32) -> Monomial {
    let mut e = [0; NVARS];
    e[slot] = k;
    Monomial(e)
}

/// `p` with every variable except `slot` set to `point`.
fn specialize(p: &Poly, slot: usize, point: &[BigRational; NVARS]) -> Poly {
    Poly::from_terms(p.terms().map(|(m, c)| {
        let mut c = c.clone();
        for (i, &e) in m.0.iter().enumerate() {
            if i != slot && e > 0 {
                c *= num_traits::pow(point[i].clone(), e as usize);
            }
        }
        (var_power(slot, m.0[slot]), c)
    }))
}

/// Univariate remainder in `slot`; `g` is nonzero.
fn rem_univariate(f: &Poly, g: &Poly, slot: usize) -> Poly {
    let dg = g.degree_in(slot);
    let lg = g.leading_coeff_in(slot).as_constant().expect("univariate");
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(slot) >= dg {
        let k = r.degree_in(slot) - dg;
        let c = r.leading_coeff_in(slot).as_constant().expect("univariate") / &lg;
        r = &r - &g.mul_monomial(&var_power(slot, k)).scale(&c);
    }
    r
}

/// Upper bound on the degree in `slot` of `gcd(a, b)`, from univariate images.
///
/// With the other variables fixed so that both leading coefficients in
/// `slot` stay nonzero, the true gcd maps to a divisor of the image gcd of
/// the same degree in `slot`. `None` when every trial point was unlucky.
fn image_degree_bound(a: &Poly, b: &Poly, slot: usize) -> Option<u32> {
    const POINTS: [[i64; NVARS]; 3] = [[3, 5, 7, 11], [-2, 13, 4, -9], [17, -6, 19, 23]];
    let (da, db) = (a.degree_in(slot), b.degree_in(slot));
    if da == 0 || db == 0 {
        return Some(0);
    }
    POINTS
        .iter()
        .filter_map(|pt| {
            let point = pt.map(|v| BigRational::from_integer(v.into()));
            let (mut f, mut g) = (specialize(a, slot, &point), specialize(b, slot, &point));
            if f.degree_in(slot) != da || g.degree_in(slot) != db {
                return None;
            }
            while !g.is_zero() {
                let r = rem_univariate(&f, &g, slot);
                f = g;
                g = r;
            }
            Some(f.degree_in(slot))
        })
        .min()
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [&'a str; NVARS],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = c.abs();
            if m.is_one() {
                write!(f, "{}", mag)?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{}*", mag)?;
            }
            let mut first = true;
            for (slot, e) in m.0.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.names[slot])?;
                if *e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn x() -> Poly {
        Poly::var(0)
    }
    fn y() -> Poly {
        Poly::var(1)
    }
    fn z() -> Poly {
        Poly::var(2)
    }

    const NAMES: [&str; NVARS] = ["a", "t", "g", "h"];

    #[test]
    fn graded_lex_order() {
        // a^2 > a*t > t^2 > a > t > g > 1
        let a2 = Monomial([2, 0, 0, 0]);
        let at = Monomial([1, 1, 0, 0]);
        let t2 = Monomial([0, 2, 0, 0]);
        let a = Monomial::var(0);
        let t = Monomial::var(1);
        let g = Monomial::var(2);
        let mut v = vec![Monomial::ONE, g, t, a, t2, at, a2];
        v.sort();
        assert_eq!(v, vec![Monomial::ONE, g, t, a, t2, at, a2]);
    }

    #[test]
    fn render() {
        let p = &(&x().pow(2).scale(&q(2, 1)) + &Poly::one()) - &y();
        assert_eq!(p.display_with(&NAMES).to_string(), "2*a^2 - t + 1");
        let p = &x().scale(&q(-1, 2)) + &Poly::from_int(3);
        assert_eq!(p.display_with(&NAMES).to_string(), "-1/2*a + 3");
        assert_eq!(Poly::zero().display_with(&NAMES).to_string(), "0");
    }

    #[test]
    fn exact_division() {
        let a = &x() + &y();
        let b = &x() - &y();
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a));
        assert_eq!((&x() + &Poly::one()).div_exact(&x()), None);
    }

    #[test]
    fn gcd_univariate() {
        // (x-1)(x+2) and (x-1)(x-3)
        let a = &(&x() - &Poly::one()) * &(&x() + &Poly::from_int(2));
        let b = &(&x() - &Poly::one()) * &(&x() - &Poly::from_int(3));
        assert_eq!(gcd(&a, &b), &x() - &Poly::one());
    }

    #[test]
    fn gcd_multivariate() {
        let common = &(&(&x() * &y()) + &z()) + &Poly::from_int(1);
        let a = &common * &(&x() - &z());
        let b = &common * &(&(&y() * &y()) + &x());
        assert_eq!(gcd(&a, &b), common.monic());
        let coprime = gcd(&(&x() + &y()), &(&x() - &y()));
        assert_eq!(coprime, Poly::one());
    }

    #[test]
    fn gcd_with_rational_content() {
        let a = (&x() + &y()).scale(&q(3, 4));
        let b = &(&x() + &y()) * &z();
        assert_eq!(gcd(&a, &b), &x() + &y());
    }

    #[test]
    fn shift_vars_matches_eval() {
        let p = &(&x() * &y()) - &(&x() + &y());
        let s = p.shift_vars(0b11, &q(2, 1));
        let pt = [q(5, 1), q(7, 1), q(0, 1), q(0, 1)];
        let shifted = [q(7, 1), q(9, 1), q(0, 1), q(0, 1)];
        assert_eq!(s.eval(&pt), p.eval(&shifted));
    }

    #[test]
    fn gcd_of_dense_trivariate_products() {
        let c = |n: i64| Poly::from_int(n);
        let shared = &(&(&x() * &z()) - &(&c(3) * &z())) + &c(3);
        let a = &(&(&c(3) * &x()) * &z()) - &(&(&c(4) * &x()) - &c(3));
        let b = &(&(&c(3) * &x()) * &x()) + &(&x() - &c(3));
        let u = &(&(&c(2) * &y()) * &z()) + &(&(&c(4) * &y()) - &c(4));
        let v = &(&(&c(-3) * &y()) * &z()) - &(&z() - &c(3));
        let f = &shared * &(&(&a * &u) + &(&b * &v));
        let g = &(&shared * &a) * &b;
        assert_eq!(gcd(&f, &g), shared.monic());
        assert_eq!(gcd(&(&a * &u), &b), Poly::one());
    }
}
