//! Exact arithmetic in the ordered field Q(a, t, g) of rational functions in
//! three positive infinite generators.
//!
//! Every value is kept in canonical form: numerator and denominator are
//! coprime polynomials with integer coefficients whose joint content is one,
//! and the denominator's leading coefficient (graded-lex, `a > t > g`) is
//! positive. Two values are equal exactly when their canonical forms are.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::poly::{gcd, Poly, NVARS};

/// Rendering names for the polynomial slots used by [`HyperReal`].
pub const GENERATOR_NAMES: [&str; NVARS] = ["a", "t", "g", "_"];

/// An infinite generator of the field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    /// Numerosity of the natural numbers.
    Alpha,
    /// Limit of the number of irrational offsets in the real grids.
    Tau,
    /// Numerosity of the coin-toss space.
    Gamma,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Alpha, Generator::Tau, Generator::Gamma];

    pub fn slot(self) -> usize {
        match self {
            Generator::Alpha => 0,
            Generator::Tau => 1,
            Generator::Gamma => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        GENERATOR_NAMES[self.slot()]
    }

    pub fn role(self) -> &'static str {
        match self {
            Generator::Alpha => "numerosity of N",
            Generator::Tau => "limit of |theta| over the real grids",
            Generator::Gamma => "limit of 2^N * |sigma| over the coin grids",
        }
    }
}

/// Outcome of comparing two hyperreals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompareResult {
    Less,
    Equal,
    Greater,
    /// No sound sign rule applies (independent generators with mixed signs).
    Undetermined,
}

impl CompareResult {
    fn from_sign(s: i8) -> Self {
        match s {
            s if s < 0 => CompareResult::Less,
            0 => CompareResult::Equal,
            _ => CompareResult::Greater,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            CompareResult::Less => CompareResult::Greater,
            CompareResult::Greater => CompareResult::Less,
            other => other,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperRealError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("magnitude of {0} is not determined by the available order rules")]
    UndeterminedMagnitude(String),
    #[error("{0} is not finite")]
    NotFinite(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

/// Order of magnitude of a hyperreal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Magnitude {
    Infinitesimal,
    /// Finite and not infinitesimal, with its (nonzero) standard part.
    Appreciable(BigRational),
    Infinite,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HyperReal {
    num: Poly,
    den: Poly,
}

impl HyperReal {
    pub fn zero() -> Self {
        HyperReal {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        HyperReal::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        HyperReal::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        HyperReal::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn from_rational(r: BigRational) -> Self {
        HyperReal::canonical(Poly::constant(r), Poly::one())
    }

    pub fn generator(g: Generator) -> Self {
        HyperReal::from_poly(Poly::var(g.slot()))
    }

    pub fn alpha() -> Self {
        HyperReal::generator(Generator::Alpha)
    }

    pub fn tau() -> Self {
        HyperReal::generator(Generator::Tau)
    }

    pub fn gamma() -> Self {
        HyperReal::generator(Generator::Gamma)
    }

    /// A polynomial in the generators. Slot 3 must be unused.
    pub fn from_poly(p: Poly) -> Self {
        HyperReal::canonical(p, Poly::one())
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, HyperRealError> {
        if den.is_zero() {
            return Err(HyperRealError::DivisionByZero);
        }
        Ok(HyperReal::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero());
        debug_assert_eq!((num.vars_mask() | den.vars_mask()) & 0b1000, 0);
        if num.is_zero() {
            return HyperReal::zero();
        }
        let (mut num, mut den) = if num.as_constant().is_some() || den.as_constant().is_some() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.as_constant().is_some() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        let l = num.denominator_lcm().lcm(&den.denominator_lcm());
        let mut scale = BigRational::from_integer(l);
        let content = {
            let n = num.scale(&scale);
            let d = den.scale(&scale);
            n.numerator_gcd().gcd(&d.numerator_gcd())
        };
        scale /= BigRational::from_integer(content);
        if den.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            scale = -scale;
        }
        num = num.scale(&scale);
        den = den.scale(&scale);
        HyperReal { num, den }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The rational value when no generator occurs.
    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// Bitmask of generator slots occurring in numerator or denominator.
    pub fn generators_mask(&self) -> u8 {
        self.num.vars_mask() | self.den.vars_mask()
    }

    pub fn generators(&self) -> Vec<Generator> {
        let m = self.generators_mask();
        Generator::ALL
            .into_iter()
            .filter(|g| m & (1 << g.slot()) != 0)
            .collect()
    }

    /// Integer-coefficient numerator and denominator (always true of the canonical form).
    pub fn is_hyperrational(&self) -> bool {
        self.num.has_integer_coeffs() && self.den.has_integer_coeffs()
    }

    pub fn checked_div(&self, rhs: &HyperReal) -> Result<HyperReal, HyperRealError> {
        if rhs.is_zero() {
            return Err(HyperRealError::DivisionByZero);
        }
        Ok(HyperReal::canonical(
            &self.num * &rhs.den,
            &self.den * &rhs.num,
        ))
    }

    pub fn recip(&self) -> Result<HyperReal, HyperRealError> {
        HyperReal::one().checked_div(self)
    }

    pub fn scale(&self, r: &BigRational) -> HyperReal {
        HyperReal::canonical(self.num.scale(r), self.den.clone())
    }

    /// Value after substituting rationals for `(a, t, g)`; `None` if the
    /// denominator vanishes there.
    pub fn eval(&self, a: &BigRational, t: &BigRational, g: &BigRational) -> Option<BigRational> {
        let pt = [a.clone(), t.clone(), g.clone(), BigRational::zero()];
        let d = self.den.eval(&pt);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(&pt) / d)
    }

    /// Sign relative to zero.
    ///
    /// Univariate and constant values are signed by their behaviour at
    /// `+inf`. Multivariate values are signed only when the numerator and the
    /// denominator each have a dominant sign.
    pub fn sign(&self) -> CompareResult {
        if self.is_zero() {
            return CompareResult::Equal;
        }
        let p = &self.num * &self.den;
        if p.vars_mask().count_ones() <= 1 {
            let (_, lc) = p.leading().expect("nonzero");
            return CompareResult::from_sign(if lc.is_positive() { 1 } else { -1 });
        }
        match (self.num.dominant_sign(), self.den.dominant_sign()) {
            (Some(a), Some(b)) if a == b => CompareResult::Greater,
            (Some(_), Some(_)) => CompareResult::Less,
            _ => CompareResult::Undetermined,
        }
    }

    pub fn compare(&self, other: &HyperReal) -> CompareResult {
        (self - other).sign()
    }

    pub fn abs(&self) -> Option<HyperReal> {
        match self.sign() {
            CompareResult::Less => Some(-self),
            CompareResult::Undetermined => None,
            _ => Some(self.clone()),
        }
    }

    pub fn magnitude(&self) -> Result<Magnitude, HyperRealError> {
        if self.is_zero() {
            return Ok(Magnitude::Infinitesimal);
        }
        let mask = self.generators_mask();
        if mask == 0 {
            return Ok(Magnitude::Appreciable(self.as_rational().expect("constant")));
        }
        if mask.count_ones() == 1 {
            let slot = mask.trailing_zeros() as usize;
            let dn = self.num.degree_in(slot);
            let dd = self.den.degree_in(slot);
            return Ok(match dn.cmp(&dd) {
                std::cmp::Ordering::Less => Magnitude::Infinitesimal,
                std::cmp::Ordering::Greater => Magnitude::Infinite,
                std::cmp::Ordering::Equal => {
                    let ln = self.num.leading_coeff_in(slot).as_constant().expect("univariate");
                    let ld = self.den.leading_coeff_in(slot).as_constant().expect("univariate");
                    Magnitude::Appreciable(ln / ld)
                }
            });
        }
        self.multivariate_magnitude()
    }

    // Dominance rules. With a sign-definite denominator D, |N/D| is bounded by
    // sum |c_m| m / (c' m') for any choice of D-monomials m' that m divides; a
    // strict divisibility leaves a factor 1/u with u a nonconstant monomial in
    // positive infinite generators, hence infinitesimal.
    fn multivariate_magnitude(&self) -> Result<Magnitude, HyperRealError> {
        let undetermined = || HyperRealError::UndeterminedMagnitude(self.to_string());
        let dominated = |small: &Poly, big: &Poly, strict: bool| {
            small.terms().all(|(m, _)| {
                big.terms()
                    .any(|(mb, _)| m.divides(mb) && (!strict || m != mb))
            })
        };
        let den_definite = matches!(
            self.den.dominant_sign(),
            Some(std::cmp::Ordering::Greater | std::cmp::Ordering::Less)
        );
        if den_definite && dominated(&self.num, &self.den, true) {
            return Ok(Magnitude::Infinitesimal);
        }
        if den_definite && dominated(&self.num, &self.den, false) {
            let (nm, nc) = self.num.leading().expect("nonzero");
            let (dm, dc) = self.den.leading().expect("nonzero");
            if nm == dm {
                let c = nc / dc;
                let rest = self - &HyperReal::from_rational(c.clone());
                if rest.magnitude()? == Magnitude::Infinitesimal {
                    return Ok(Magnitude::Appreciable(c));
                }
            }
            return Err(undetermined());
        }
        let num_definite = matches!(
            self.num.dominant_sign(),
            Some(std::cmp::Ordering::Greater | std::cmp::Ordering::Less)
        );
        if num_definite && dominated(&self.den, &self.num, true) {
            return Ok(Magnitude::Infinite);
        }
        Err(undetermined())
    }

    pub fn is_infinitesimal(&self) -> Result<bool, HyperRealError> {
        Ok(self.magnitude()? == Magnitude::Infinitesimal)
    }

    pub fn is_finite(&self) -> Result<bool, HyperRealError> {
        Ok(self.magnitude()? != Magnitude::Infinite)
    }

    /// The unique rational infinitely close to a finite value.
    pub fn standard_part(&self) -> Result<BigRational, HyperRealError> {
        match self.magnitude()? {
            Magnitude::Infinitesimal => Ok(BigRational::zero()),
            Magnitude::Appreciable(c) => Ok(c),
            Magnitude::Infinite => Err(HyperRealError::NotFinite(self.to_string())),
        }
    }

    pub fn infinitely_close(&self, other: &HyperReal) -> Result<bool, HyperRealError> {
        (self - other).is_infinitesimal()
    }

    /// Substitutes generator slots by polynomials (slot 3 is ignored).
    pub fn substitute(&self, images: &[HyperReal; 3]) -> Result<HyperReal, HyperRealError> {
        let eval = |p: &Poly| -> HyperReal {
            let mut acc = HyperReal::zero();
            for (m, c) in p.terms() {
                let mut t = HyperReal::from_rational(c.clone());
                for (slot, img) in images.iter().enumerate() {
                    for _ in 0..m.0[slot] {
                        t = &t * img;
                    }
                }
                acc = &acc + &t;
            }
            acc
        };
        eval(&self.num).checked_div(&eval(&self.den))
    }
}

impl fmt::Display for HyperReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})/({})",
            self.num.display_with(&GENERATOR_NAMES),
            self.den.display_with(&GENERATOR_NAMES)
        )
    }
}

impl FromStr for HyperReal {
    type Err = HyperRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ExprParser { src: s.as_bytes(), pos: 0 };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(v)
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, msg: &str) -> HyperRealError {
        HyperRealError::Parse {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<HyperReal, HyperRealError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<HyperReal, HyperRealError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs).map_err(|_| HyperRealError::Parse {
                        col: at + 1,
                        msg: "division by zero".into(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<HyperReal, HyperRealError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.uint()?;
            let e = u32::try_from(e).map_err(|_| self.error("exponent too large"))?;
            let mut acc = HyperReal::one();
            for _ in 0..e {
                acc = &acc * &base;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<BigInt, HyperRealError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok(s.parse().expect("digits"))
    }

    fn atom(&mut self) -> Result<HyperReal, HyperRealError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                Ok(HyperReal::from_rational(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let g = match c {
                    b'a' => Generator::Alpha,
                    b't' => Generator::Tau,
                    b'g' => Generator::Gamma,
                    _ => return Err(self.error("unknown generator")),
                };
                self.pos += 1;
                if self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric())
                {
                    return Err(self.error("unknown generator"));
                }
                Ok(HyperReal::generator(g))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

impl Add for &HyperReal {
    type Output = HyperReal;
    fn add(self, rhs: &HyperReal) -> HyperReal {
        if self.den == rhs.den {
            return HyperReal::canonical(&self.num + &rhs.num, self.den.clone());
        }
        HyperReal::canonical(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &HyperReal {
    type Output = HyperReal;
    fn sub(self, rhs: &HyperReal) -> HyperReal {
        self + &(-rhs)
    }
}

impl Mul for &HyperReal {
    type Output = HyperReal;
    fn mul(self, rhs: &HyperReal) -> HyperReal {
        HyperReal::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &HyperReal {
    type Output = HyperReal;
    fn neg(self) -> HyperReal {
        HyperReal {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Add for HyperReal {
    type Output = HyperReal;
    fn add(self, rhs: HyperReal) -> HyperReal {
        &self + &rhs
    }
}

impl Sub for HyperReal {
    type Output = HyperReal;
    fn sub(self, rhs: HyperReal) -> HyperReal {
        &self - &rhs
    }
}

impl Mul for HyperReal {
    type Output = HyperReal;
    fn mul(self, rhs: HyperReal) -> HyperReal {
        &self * &rhs
    }
}

impl Neg for HyperReal {
    type Output = HyperReal;
    fn neg(self) -> HyperReal {
        -&self
    }
}

impl From<BigRational> for HyperReal {
    fn from(r: BigRational) -> Self {
        HyperReal::from_rational(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> HyperReal {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_rendering() {
        assert_eq!(h("a/(2*a^2+1)").to_string(), "(a)/(2*a^2 + 1)");
        assert_eq!(h("1/7").to_string(), "(1)/(7)");
        assert_eq!(h("(a-1)/2/a").to_string(), "(a - 1)/(2*a)");
        assert_eq!(h("(2*a)/(4)").to_string(), "(a)/(2)");
        assert_eq!(h("a/(-3)").to_string(), "(-a)/(3)");
        assert_eq!(HyperReal::zero().to_string(), "(0)/(1)");
        assert_eq!(h("1/2*a + 1/3").to_string(), "(3*a + 2)/(6)");
    }

    #[test]
    fn reduces_common_factors() {
        let x = h("(a^2 - 1)/(a + 1)");
        assert_eq!(x, h("a - 1"));
        let y = h("(a*t + a)/(t + 1)");
        assert_eq!(y, h("a"));
    }

    #[test]
    fn additive_cancellation() {
        assert_eq!(&h("1/a") + &h("1 - 1/a"), HyperReal::one());
        assert_eq!(&h("a/2") + &h("a/2"), HyperReal::alpha());
    }

    #[test]
    fn field_operations() {
        assert_eq!(&HyperReal::alpha() * &h("1/a"), HyperReal::one());
        assert_eq!(
            HyperReal::alpha().checked_div(&h("2*a^2+1")).unwrap().to_string(),
            "(a)/(2*a^2 + 1)"
        );
        assert_eq!(
            HyperReal::one().checked_div(&HyperReal::zero()),
            Err(HyperRealError::DivisionByZero)
        );
    }

    #[test]
    fn comparisons() {
        assert_eq!(
            HyperReal::alpha().compare(&HyperReal::from_int(1_000_000_000)),
            CompareResult::Greater
        );
        assert_eq!(h("a/2").compare(&h("(a-1)/2")), CompareResult::Greater);
        assert_eq!(HyperReal::alpha().compare(&HyperReal::tau()), CompareResult::Undetermined);
        assert_eq!(h("a*t + 1").compare(&h("a*t")), CompareResult::Greater);
        assert_eq!(h("1/a").compare(&HyperReal::zero()), CompareResult::Greater);
        assert_eq!(h("-1/a").compare(&HyperReal::zero()), CompareResult::Less);
    }

    #[test]
    fn infinitesimals() {
        assert!(h("1/a").is_infinitesimal().unwrap());
        assert!(h("a/(2*a^2+1)").is_infinitesimal().unwrap());
        assert!(h("(2*a+1)/(a+3)").is_finite().unwrap());
        assert!(!h("(2*a+1)/(a+3)").is_infinitesimal().unwrap());
        assert!(!HyperReal::alpha().is_finite().unwrap());
        assert!(matches!(
            h("a/t").is_infinitesimal(),
            Err(HyperRealError::UndeterminedMagnitude(_))
        ));
        // multivariate dominance
        assert!(h("(2*t + 2)/(2*a^2*t + 2*a^2 + 1)").is_infinitesimal().unwrap());
        assert!(!h("a*t").is_finite().unwrap());
    }

    #[test]
    fn standard_parts() {
        assert_eq!(h("(2*a+1)/(a+3)").standard_part().unwrap(), q(2, 1));
        assert_eq!(h("a/(2*a^2+1)").standard_part().unwrap(), q(0, 1));
        assert_eq!(h("1/2 - 1/(2*a)").standard_part().unwrap(), q(1, 2));
        assert_eq!(
            h("(2*a^2*t + 2*a^2)/(2*a^2*t + 2*a^2 + 1)").standard_part().unwrap(),
            q(1, 1)
        );
        assert!(matches!(
            HyperReal::alpha().standard_part(),
            Err(HyperRealError::NotFinite(_))
        ));
    }

    #[test]
    fn closeness() {
        assert!(h("1/2").infinitely_close(&h("1/2 - 1/(2*a)")).unwrap());
        assert!(!HyperReal::alpha().infinitely_close(&h("a + 1")).unwrap());
    }

    #[test]
    fn parse_errors_carry_columns() {
        match "a + * 2".parse::<HyperReal>() {
            Err(HyperRealError::Parse { col, .. }) => assert_eq!(col, 5),
            other => panic!("unexpected {:?}", other),
        }
        assert!("x + 1".parse::<HyperReal>().is_err());
        assert!("1/(a-a)".parse::<HyperReal>().is_err());
    }

    #[test]
    fn substitution_of_generators() {
        let x = h("(a + t)/(g + 1)");
        let y = x
            .substitute(&[h("2*a"), HyperReal::one(), HyperReal::alpha()])
            .unwrap();
        assert_eq!(y, h("(2*a + 1)/(a + 1)"));
    }
}
