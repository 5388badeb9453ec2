//! Eventual counting functions and their Lambda-limits.
//!
//! A [`QuasiPolynomial`] is a polynomial in the grid indices plus a
//! correction selected by `n mod period`. The limit along a
//! [`DirectedFamily`] substitutes generators for indices; when the family
//! visits several residues with different corrections the result is a
//! candidate set, one entry per residue branch.

use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hyperreal::HyperReal;
use crate::poly::{Monomial, Poly};

/// Slots of the index variables inside a [`Poly`].
pub const VAR_N: usize = 0;
pub const VAR_T: usize = 1;
pub const VAR_S: usize = 2;
pub const VAR_H: usize = 3;
pub const INDEX_NAMES: [&str; 4] = ["n", "t", "s", "h"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DirectedFamily {
    AllN,
    EvenN,
    OddN,
    FactorialN,
    QGrid,
    RGrid,
    CoinCt,
}

impl DirectedFamily {
    pub const ALL: [DirectedFamily; 7] = [
        DirectedFamily::AllN,
        DirectedFamily::EvenN,
        DirectedFamily::OddN,
        DirectedFamily::FactorialN,
        DirectedFamily::QGrid,
        DirectedFamily::RGrid,
        DirectedFamily::CoinCt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DirectedFamily::AllN => "ALL_N",
            DirectedFamily::EvenN => "EVEN_N",
            DirectedFamily::OddN => "ODD_N",
            DirectedFamily::FactorialN => "FACTORIAL_N",
            DirectedFamily::QGrid => "Q_GRID",
            DirectedFamily::RGrid => "R_GRID",
            DirectedFamily::CoinCt => "COIN_CT",
        }
    }

    pub fn is_natural(self) -> bool {
        matches!(
            self,
            DirectedFamily::AllN
                | DirectedFamily::EvenN
                | DirectedFamily::OddN
                | DirectedFamily::FactorialN
        )
    }

    /// Bitmask of index variables a counting function on this family may use.
    pub fn index_mask(self) -> u8 {
        match self {
            DirectedFamily::RGrid => (1 << VAR_N) | (1 << VAR_T),
            DirectedFamily::CoinCt => (1 << VAR_S) | (1 << VAR_H),
            _ => 1 << VAR_N,
        }
    }

    /// Residues mod `modulus` taken by arbitrarily large indices of the family.
    pub fn hit_residues(self, modulus: usize) -> Vec<usize> {
        let g = modulus.gcd(&2);
        match self {
            DirectedFamily::AllN => (0..modulus).collect(),
            DirectedFamily::EvenN => (0..modulus).filter(|r| r % g == 0).collect(),
            DirectedFamily::OddN => (0..modulus).filter(|r| r % g == 1 % g).collect(),
            _ => vec![0],
        }
    }

    /// Whether the grid index `n` belongs to the family, ignoring thresholds.
    pub fn admits(self, n: u64) -> bool {
        match self {
            DirectedFamily::EvenN => n % 2 == 0,
            DirectedFamily::OddN => n % 2 == 1,
            DirectedFamily::FactorialN | DirectedFamily::QGrid | DirectedFamily::RGrid => {
                factorial_root(n).is_some()
            }
            _ => true,
        }
    }
}

/// `m` with `m! = n`, if any.
pub fn factorial_root(n: u64) -> Option<u64> {
    let mut f = 1u64;
    let mut m = 1u64;
    while f < n {
        m += 1;
        f = f.checked_mul(m)?;
    }
    (f == n).then_some(m)
}

impl fmt::Display for DirectedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventualError {
    #[error("index variables {vars} are not valid for family {family}")]
    IndexMismatch { family: DirectedFamily, vars: String },
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
}

/// A concrete grid index: `n` for the line families, `t = |theta|`,
/// `s = |sigma|` and `h = 2^N` for coin tosses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub n: u64,
    pub t: u64,
    pub s: u64,
    pub h: u64,
}

impl GridPoint {
    pub fn nat(n: u64) -> Self {
        GridPoint { n, ..Default::default() }
    }

    pub fn real(n: u64, t: u64) -> Self {
        GridPoint { n, t, ..Default::default() }
    }

    pub fn coin(tosses: u32, s: u64) -> Self {
        GridPoint {
            s,
            h: 1u64 << tosses,
            ..Default::default()
        }
    }

    fn as_point(&self) -> [BigRational; 4] {
        [self.n, self.t, self.s, self.h].map(|v| BigRational::from_integer(v.into()))
    }
}

/// `poly + corrections[n mod period]`, valid for indices at or beyond `threshold`.
///
/// Corrections are polynomials so that products stay in the class.
/// Normal form: `corrections[0] == 0` and the period is minimal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuasiPolynomial {
    poly: Poly,
    corrections: Vec<Poly>,
    threshold: u64,
}

impl QuasiPolynomial {
    pub fn new(poly: Poly, corrections: Vec<Poly>, threshold: u64) -> Self {
        assert!(!corrections.is_empty(), "period must be positive");
        let base = corrections[0].clone();
        let poly = &poly + &base;
        let mut corrections: Vec<Poly> = corrections.iter().map(|c| c - &base).collect();
        let p = corrections.len();
        for d in 1..=p {
            if p % d == 0 && (0..p).all(|r| corrections[r] == corrections[r % d]) {
                corrections.truncate(d);
                break;
            }
        }
        QuasiPolynomial {
            poly,
            corrections,
            threshold,
        }
    }

    pub fn with_rational_corrections(poly: Poly, corrections: &[BigRational], threshold: u64) -> Self {
        QuasiPolynomial::new(
            poly,
            corrections.iter().cloned().map(Poly::constant).collect(),
            threshold,
        )
    }

    pub fn polynomial(poly: Poly) -> Self {
        QuasiPolynomial::new(poly, vec![Poly::zero()], 0)
    }

    pub fn constant(c: BigRational) -> Self {
        QuasiPolynomial::polynomial(Poly::constant(c))
    }

    pub fn zero() -> Self {
        QuasiPolynomial::polynomial(Poly::zero())
    }

    /// The purely periodic function `n -> values[n mod len]`.
    pub fn periodic(values: &[BigRational]) -> Self {
        QuasiPolynomial::with_rational_corrections(Poly::zero(), values, 0)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn corrections(&self) -> &[Poly] {
        &self.corrections
    }

    pub fn period(&self) -> usize {
        self.corrections.len()
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn with_threshold(mut self, threshold: u64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn vars_mask(&self) -> u8 {
        self.corrections
            .iter()
            .fold(self.poly.vars_mask(), |m, c| m | c.vars_mask())
    }

    /// The polynomial that applies on residue `r` of `n`.
    pub fn branch(&self, r: usize) -> Poly {
        &self.poly + &self.corrections[r % self.period()]
    }

    pub fn eval(&self, at: &GridPoint) -> BigRational {
        let r = (at.n % self.period() as u64) as usize;
        self.branch(r).eval(&at.as_point())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Poly, &Poly) -> Poly) -> Self {
        let period = self.period().lcm(&other.period());
        let poly = Poly::zero();
        let corrections = (0..period)
            .map(|r| f(&self.branch(r), &other.branch(r)))
            .collect();
        QuasiPolynomial::new(poly, corrections, self.threshold.max(other.threshold))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        QuasiPolynomial::new(
            self.poly.scale(r),
            self.corrections.iter().map(|c| c.scale(r)).collect(),
            self.threshold,
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero() && self.period() == 1
    }
}

impl fmt::Display for QuasiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}; period={}; corr=[",
            self.poly.display_with(&INDEX_NAMES),
            self.period()
        )?;
        for (i, c) in self.corrections.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c.display_with(&INDEX_NAMES))?;
        }
        write!(f, "]; n0={}", self.threshold)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitResult {
    Determined(HyperReal),
    /// Distinct values in residue order; at least two entries.
    Candidates(Vec<HyperReal>),
}

impl LimitResult {
    /// Collapses a list of branch values, keeping first occurrences.
    pub fn from_branches<I: IntoIterator<Item = HyperReal>>(values: I) -> Self {
        let mut out: Vec<HyperReal> = Vec::new();
        for v in values {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        assert!(!out.is_empty(), "a limit has at least one branch");
        if out.len() == 1 {
            LimitResult::Determined(out.pop().unwrap())
        } else {
            LimitResult::Candidates(out)
        }
    }

    pub fn values(&self) -> &[HyperReal] {
        match self {
            LimitResult::Determined(x) => std::slice::from_ref(x),
            LimitResult::Candidates(v) => v,
        }
    }

    pub fn determined(&self) -> Option<&HyperReal> {
        match self {
            LimitResult::Determined(x) => Some(x),
            LimitResult::Candidates(_) => None,
        }
    }
}

impl fmt::Display for LimitResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitResult::Determined(x) => write!(f, "exact: {x}"),
            LimitResult::Candidates(v) => {
                write!(f, "candidates: ")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

fn vars_string(mask: u8) -> String {
    (0..4)
        .filter(|s| mask & (1 << s) != 0)
        .map(|s| INDEX_NAMES[s])
        .collect::<Vec<_>>()
        .join(",")
}

/// Maps a polynomial in the index variables to one in the generators.
pub fn substitute_generators(p: &Poly, family: DirectedFamily) -> Result<HyperReal, EventualError> {
    let mask = p.vars_mask();
    if mask & !family.index_mask() != 0 {
        return Err(EventualError::IndexMismatch {
            family,
            vars: vars_string(mask),
        });
    }
    if family != DirectedFamily::CoinCt {
        // n and t already sit in the slots of alpha and tau.
        return Ok(HyperReal::from_poly(p.clone()));
    }
    for (m, _) in p.terms() {
        if m.0[VAR_S] != m.0[VAR_H] {
            return Err(EventualError::UnsupportedShape(format!(
                "coin counting functions must be polynomials in h*s, found {}",
                Poly::term(*m, BigRational::one()).display_with(&INDEX_NAMES)
            )));
        }
    }
    Ok(HyperReal::from_poly(p.map_monomials(|m| {
        let mut g = Monomial::ONE;
        g.0[2] = m.0[VAR_S];
        g
    })))
}

/// Limits of the residue branches mod `modulus` hit by the family, in residue order.
///
/// `modulus` must be a multiple of the period.
pub fn branch_limits_mod(
    f: &QuasiPolynomial,
    family: DirectedFamily,
    modulus: usize,
) -> Result<Vec<(usize, HyperReal)>, EventualError> {
    debug_assert_eq!(modulus % f.period(), 0);
    family
        .hit_residues(modulus)
        .into_iter()
        .map(|r| Ok((r, substitute_generators(&f.branch(r), family)?)))
        .collect()
}

pub fn branch_limits(
    f: &QuasiPolynomial,
    family: DirectedFamily,
) -> Result<Vec<(usize, HyperReal)>, EventualError> {
    branch_limits_mod(f, family, f.period())
}

pub fn limit(f: &QuasiPolynomial, family: DirectedFamily) -> Result<LimitResult, EventualError> {
    let branches = branch_limits(f, family)?;
    Ok(LimitResult::from_branches(branches.into_iter().map(|(_, v)| v)))
}

pub fn qp_add(f: &QuasiPolynomial, g: &QuasiPolynomial) -> QuasiPolynomial {
    f.add(g)
}

pub fn qp_mul(f: &QuasiPolynomial, g: &QuasiPolynomial) -> QuasiPolynomial {
    f.mul(g)
}

pub fn qp_scale(r: &BigRational, f: &QuasiPolynomial) -> QuasiPolynomial {
    f.scale(r)
}

fn hit_branches(d: &QuasiPolynomial, family: DirectedFamily) -> Vec<Poly> {
    family
        .hit_residues(d.period())
        .into_iter()
        .map(|r| d.branch(r))
        .collect()
}

/// `f - g` vanishes on every family index beyond some threshold.
pub fn eventually_equal(f: &QuasiPolynomial, g: &QuasiPolynomial, family: DirectedFamily) -> bool {
    hit_branches(&f.sub(g), family).iter().all(Poly::is_zero)
}

/// `f - g` is nonzero on every family index beyond some threshold.
///
/// Decided exactly for constant and univariate branches. A multivariate
/// branch counts as eventually nonzero only when some shift `v -> v + c` of
/// all its variables makes every coefficient share one strict sign with a
/// nonzero constant term; otherwise the answer is `false`.
pub fn eventually_different(f: &QuasiPolynomial, g: &QuasiPolynomial, family: DirectedFamily) -> bool {
    hit_branches(&f.sub(g), family)
        .iter()
        .all(branch_eventually_nonzero)
}

fn branch_eventually_nonzero(p: &Poly) -> bool {
    if p.is_zero() {
        return false;
    }
    let mask = p.vars_mask();
    if mask.count_ones() <= 1 {
        // Nonzero constants never vanish; a nonconstant univariate polynomial
        // has finitely many roots.
        return true;
    }
    (0..12).any(|k| {
        let shifted = p.shift_vars(mask, &BigRational::from_integer((1u64 << k).into()));
        !shifted.coeff(&Monomial::ONE).is_zero() && shifted.uniform_sign().is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn evens() -> QuasiPolynomial {
        QuasiPolynomial::with_rational_corrections(
            Poly::var(VAR_N).scale(&q(1, 2)),
            &[q(0, 1), q(-1, 2)],
            2,
        )
    }

    #[test]
    fn renders_counting_function() {
        assert_eq!(evens().to_string(), "1/2*n; period=2; corr=[0, -1/2]; n0=2");
    }

    #[test]
    fn limits_of_even_counts() {
        let f = evens();
        let a = HyperReal::alpha();
        let half = HyperReal::from_ratio(1, 2);
        assert_eq!(
            limit(&f, DirectedFamily::FactorialN).unwrap(),
            LimitResult::Determined(&a * &half)
        );
        assert_eq!(
            limit(&f, DirectedFamily::EvenN).unwrap(),
            LimitResult::Determined(&a * &half)
        );
        let odd = limit(&f, DirectedFamily::OddN).unwrap();
        assert_eq!(odd.determined().unwrap().to_string(), "(a - 1)/(2)");
        match limit(&f, DirectedFamily::AllN).unwrap() {
            LimitResult::Candidates(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                assert_eq!(s, ["(a)/(2)", "(a - 1)/(2)"]);
            }
            other => panic!("expected candidates, got {other}"),
        }
    }

    #[test]
    fn corrections_cancel_under_addition() {
        let up = QuasiPolynomial::with_rational_corrections(
            Poly::var(VAR_N).scale(&q(1, 2)),
            &[q(0, 1), q(1, 2)],
            0,
        );
        let sum = qp_add(&evens(), &up);
        assert_eq!(sum.period(), 1);
        assert_eq!(sum.poly(), &Poly::var(VAR_N));
    }

    #[test]
    fn normalization_absorbs_first_correction() {
        let f = QuasiPolynomial::periodic(&[q(1, 1), q(1, 1), q(1, 1)]);
        assert_eq!(f.period(), 1);
        assert_eq!(f.poly().as_constant(), Some(q(1, 1)));
        let g = QuasiPolynomial::periodic(&[q(1, 1), q(2, 1), q(1, 1), q(2, 1)]);
        assert_eq!(g.period(), 2);
    }

    #[test]
    fn eventual_relations() {
        let f = evens();
        let g = QuasiPolynomial::polynomial(Poly::var(VAR_N).scale(&q(1, 2)));
        assert!(eventually_equal(&f, &g, DirectedFamily::EvenN));
        assert!(!eventually_equal(&f, &g, DirectedFamily::AllN));
        assert!(eventually_different(&f, &g, DirectedFamily::OddN));
        assert!(!eventually_different(&f, &g, DirectedFamily::AllN));
        let h = f.add(&QuasiPolynomial::constant(q(2, 1)));
        assert!(eventually_different(&f, &h, DirectedFamily::AllN));
    }

    #[test]
    fn multivariate_difference_by_shift() {
        // n*t - n - t + 2 = (n-1)(t-1) + 1 stays positive
        let n = Poly::var(VAR_N);
        let t = Poly::var(VAR_T);
        let p = &(&(&n * &t) - &n) - &(&t - &Poly::from_int(2));
        let f = QuasiPolynomial::polynomial(p);
        assert!(eventually_different(&f, &QuasiPolynomial::zero(), DirectedFamily::RGrid));
        let g = QuasiPolynomial::polynomial(&n - &t);
        assert!(!eventually_different(&g, &QuasiPolynomial::zero(), DirectedFamily::RGrid));
    }

    #[test]
    fn coin_substitution() {
        let hs = Poly::term(Monomial([0, 0, 1, 1]), q(1, 8));
        let f = QuasiPolynomial::polynomial(hs);
        assert_eq!(
            limit(&f, DirectedFamily::CoinCt).unwrap(),
            LimitResult::Determined(HyperReal::gamma().scale(&q(1, 8)))
        );
        let bad = QuasiPolynomial::polynomial(Poly::var(VAR_H));
        assert!(matches!(
            limit(&bad, DirectedFamily::CoinCt),
            Err(EventualError::UnsupportedShape(_))
        ));
        assert!(matches!(
            limit(&f, DirectedFamily::QGrid),
            Err(EventualError::IndexMismatch { .. })
        ));
    }

    #[test]
    fn residues_hit() {
        assert_eq!(DirectedFamily::EvenN.hit_residues(6), [0, 2, 4]);
        assert_eq!(DirectedFamily::OddN.hit_residues(6), [1, 3, 5]);
        assert_eq!(DirectedFamily::OddN.hit_residues(3), [0, 1, 2]);
        assert_eq!(DirectedFamily::FactorialN.hit_residues(12), [0]);
        assert_eq!(factorial_root(720), Some(6));
        assert_eq!(factorial_root(721), None);
    }

    #[test]
    fn evaluation_follows_residue() {
        let f = evens();
        assert_eq!(f.eval(&GridPoint::nat(7)), q(3, 1));
        assert_eq!(f.eval(&GridPoint::nat(720)), q(360, 1));
    }
}
