//! Events over infinite sequences of coin tosses.
//!
//! A set is a union of cylinders over a window of the first `M` tosses,
//! adjusted by finitely many eventually constant sequences: `added` lie
//! outside the cylinder part, `removed` inside it.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::eventual::{QuasiPolynomial, VAR_H, VAR_S};
use crate::poly::{Monomial, Poly};

/// Largest cylinder window; patterns are stored as a dense table of size `2^M`.
pub const MAX_WINDOW: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coin {
    H,
    T,
}

impl Coin {
    pub fn symbol(self) -> char {
        match self {
            Coin::H => 'H',
            Coin::T => 'T',
        }
    }

    pub fn from_symbol(c: char) -> Option<Coin> {
        match c {
            'H' => Some(Coin::H),
            'T' => Some(Coin::T),
            _ => None,
        }
    }
}

/// `prefix` followed by `tail` forever; the prefix never ends in `tail`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    prefix: Vec<Coin>,
    tail: Coin,
}

impl Sequence {
    pub fn new(mut prefix: Vec<Coin>, tail: Coin) -> Self {
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        Sequence { prefix, tail }
    }

    pub fn constant(c: Coin) -> Self {
        Sequence::new(vec![], c)
    }

    pub fn prefix(&self) -> &[Coin] {
        &self.prefix
    }

    pub fn tail(&self) -> Coin {
        self.tail
    }

    /// Toss `i`, counted from 0.
    pub fn at(&self, i: usize) -> Coin {
        self.prefix.get(i).copied().unwrap_or(self.tail)
    }

    /// `b` followed by `self`.
    pub fn prepend(&self, b: &[Coin]) -> Sequence {
        let mut prefix = b.to_vec();
        prefix.extend_from_slice(&self.prefix);
        Sequence::new(prefix, self.tail)
    }

    /// The sequence with its first `k` tosses removed.
    pub fn shift(&self, k: usize) -> Sequence {
        let prefix = self.prefix.iter().skip(k).copied().collect();
        Sequence::new(prefix, self.tail)
    }

    /// Pattern index of the first `m` tosses: bit `i` set iff toss `i` is T.
    fn pattern(&self, m: usize) -> usize {
        (0..m).filter(|&i| self.at(i) == Coin::T).map(|i| 1 << i).sum()
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq(")?;
        for c in &self.prefix {
            write!(f, "{}", c.symbol())?;
        }
        if !self.prefix.is_empty() {
            write!(f, ", ")?;
        }
        write!(f, "tail={})", self.tail.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoinSet {
    window: usize,
    pattern: Vec<bool>,
    added: BTreeSet<Sequence>,
    removed: BTreeSet<Sequence>,
}

impl CoinSet {
    fn build(
        window: usize,
        pattern: Vec<bool>,
        added: BTreeSet<Sequence>,
        removed: BTreeSet<Sequence>,
    ) -> Self {
        debug_assert_eq!(pattern.len(), 1 << window);
        let mut s = CoinSet {
            window,
            pattern,
            added,
            removed,
        };
        // Shrink the window while the last toss is irrelevant.
        while s.window > 0 {
            let half = 1 << (s.window - 1);
            if (0..half).any(|p| s.pattern[p] != s.pattern[p | half]) {
                break;
            }
            s.pattern.truncate(half);
            s.window -= 1;
        }
        s
    }

    pub fn empty() -> Self {
        CoinSet::build(0, vec![false], BTreeSet::new(), BTreeSet::new())
    }

    pub fn full() -> Self {
        CoinSet::build(0, vec![true], BTreeSet::new(), BTreeSet::new())
    }

    /// Sequences with toss `i` (1-based) equal to `c` for each `(i, c)`.
    pub fn cylinder(spec: &[(usize, Coin)]) -> Option<Self> {
        let window = spec.iter().map(|&(i, _)| i).max().unwrap_or(0);
        if window > MAX_WINDOW || spec.iter().any(|&(i, _)| i == 0) {
            return None;
        }
        let pattern = (0..1usize << window)
            .map(|p| {
                spec.iter()
                    .all(|&(i, c)| ((p >> (i - 1)) & 1 == 1) == (c == Coin::T))
            })
            .collect();
        Some(CoinSet::build(window, pattern, BTreeSet::new(), BTreeSet::new()))
    }

    pub fn singleton(x: Sequence) -> Self {
        let mut added = BTreeSet::new();
        added.insert(x);
        CoinSet::build(0, vec![false], added, BTreeSet::new())
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of window patterns in the cylinder part.
    pub fn pattern_count(&self) -> usize {
        self.pattern.iter().filter(|&&b| b).count()
    }

    pub fn added(&self) -> &BTreeSet<Sequence> {
        &self.added
    }

    pub fn removed(&self) -> &BTreeSet<Sequence> {
        &self.removed
    }

    fn in_cylinders(&self, x: &Sequence) -> bool {
        self.pattern[x.pattern(self.window)]
    }

    pub fn contains(&self, x: &Sequence) -> bool {
        if self.added.contains(x) {
            return true;
        }
        if self.removed.contains(x) {
            return false;
        }
        self.in_cylinders(x)
    }

    fn widen(&self, window: usize) -> Vec<bool> {
        let mask = (1usize << self.window) - 1;
        (0..1usize << window).map(|p| self.pattern[p & mask]).collect()
    }

    fn combine(&self, other: &CoinSet, op: impl Fn(bool, bool) -> bool) -> Option<CoinSet> {
        let window = self.window.max(other.window);
        if window > MAX_WINDOW {
            return None;
        }
        let a = self.widen(window);
        let b = other.widen(window);
        let pattern: Vec<bool> = a.iter().zip(&b).map(|(&x, &y)| op(x, y)).collect();
        let mut added = BTreeSet::new();
        let mut removed = BTreeSet::new();
        let exceptions = self
            .added
            .iter()
            .chain(&self.removed)
            .chain(&other.added)
            .chain(&other.removed);
        for x in exceptions {
            let want = op(self.contains(x), other.contains(x));
            let cyl = pattern[x.pattern(window)];
            if want && !cyl {
                added.insert(x.clone());
            } else if !want && cyl {
                removed.insert(x.clone());
            }
        }
        Some(CoinSet::build(window, pattern, added, removed))
    }

    pub fn union(&self, other: &CoinSet) -> Option<CoinSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &CoinSet) -> Option<CoinSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> CoinSet {
        CoinSet::build(
            self.window,
            self.pattern.iter().map(|&b| !b).collect(),
            self.removed.clone(),
            self.added.clone(),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.pattern_count() == 0 && self.added.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn equivalent(&self, other: &CoinSet) -> bool {
        self.combine(other, |a, b| a != b)
            .is_some_and(|d| d.is_empty())
    }

    pub fn finite_members(&self) -> Option<Vec<Sequence>> {
        (self.pattern_count() == 0).then(|| self.added.iter().cloned().collect())
    }

    /// Exact `|A ∩ {b ⊛ c : b in {H,T}^N, c in sigma}|` for distinct `sigma`.
    pub fn count_at(&self, tosses: usize, sigma: &[Sequence]) -> u128 {
        if tosses < self.window {
            let mut total = 0u128;
            for bits in 0..1usize << tosses {
                let b: Vec<Coin> = (0..tosses)
                    .map(|i| if (bits >> i) & 1 == 1 { Coin::T } else { Coin::H })
                    .collect();
                total += sigma.iter().filter(|c| self.contains(&c.prepend(&b))).count() as u128;
            }
            return total;
        }
        let per_tail = (self.pattern_count() as u128) << (tosses - self.window);
        let mut total = per_tail * sigma.len() as u128;
        let in_grid = |x: &Sequence| sigma.contains(&x.shift(tosses));
        total += self.added.iter().filter(|x| in_grid(x)).count() as u128;
        total -= self.removed.iter().filter(|x| in_grid(x)).count() as u128;
        total
    }

    /// Toss count beyond which every exception `x` satisfies `shift^N(x)` constant.
    pub fn toss_threshold(&self) -> usize {
        self.added
            .iter()
            .chain(&self.removed)
            .map(|x| x.prefix().len())
            .max()
            .unwrap_or(0)
            .max(self.window)
    }

    /// `(|S| / 2^M) h s + |added| - |removed|`, valid once `N` passes the
    /// threshold and `sigma` contains both constant sequences.
    pub fn eventual_count(&self) -> QuasiPolynomial {
        let density = BigRational::new(
            BigInt::from(self.pattern_count()),
            BigInt::from(1u64) << self.window,
        );
        let hs = {
            let mut m = Monomial::ONE;
            m.0[VAR_S] = 1;
            m.0[VAR_H] = 1;
            Poly::term(m, density)
        };
        let delta = self.added.len() as i64 - self.removed.len() as i64;
        QuasiPolynomial::polynomial(&hs + &Poly::from_int(delta))
            .with_threshold(self.toss_threshold() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventual::GridPoint;

    fn seq(s: &str, tail: Coin) -> Sequence {
        Sequence::new(s.chars().map(|c| Coin::from_symbol(c).unwrap()).collect(), tail)
    }

    fn constants() -> Vec<Sequence> {
        vec![Sequence::constant(Coin::H), Sequence::constant(Coin::T)]
    }

    #[test]
    fn sequences_normalize() {
        assert_eq!(seq("HTHH", Coin::H), seq("HT", Coin::H));
        assert_eq!(seq("HTT", Coin::T).shift(1), Sequence::constant(Coin::T));
        assert_eq!(seq("HT", Coin::H).to_string(), "seq(HT, tail=H)");
    }

    #[test]
    fn cylinder_counts() {
        let c = CoinSet::cylinder(&[(1, Coin::H), (2, Coin::H), (3, Coin::H)]).unwrap();
        assert_eq!(c.count_at(3, &constants()), 2);
        assert_eq!(c.count_at(10, &constants()), 256);
        let f = c.eventual_count();
        assert_eq!(f.to_string(), "1/8*s*h; period=1; corr=[0]; n0=3");
        assert_eq!(
            f.eval(&GridPoint::coin(10, 2)),
            BigRational::from_integer(256.into())
        );
    }

    #[test]
    fn exceptions_and_boolean_ops() {
        let c = CoinSet::cylinder(&[(1, Coin::H)]).unwrap();
        let x = seq("T", Coin::H);
        let y = Sequence::constant(Coin::H);
        let a = c.union(&CoinSet::singleton(x.clone())).unwrap();
        assert!(a.contains(&x) && a.contains(&y));
        let b = a.intersect(&CoinSet::singleton(y.clone()).complement()).unwrap();
        assert!(!b.contains(&y));
        assert_eq!(b.added().len(), 1);
        assert_eq!(b.removed().len(), 1);
        assert!(b.union(&b.complement()).unwrap().is_full());
        // Cylinder part counts 2^(N-1)*|sigma|; x enters and y leaves.
        assert_eq!(b.count_at(4, &constants()), 16 + 1 - 1);
        assert_eq!(b.count_at(0, &constants()), 0);
    }

    #[test]
    fn window_shrinks() {
        let a = CoinSet::cylinder(&[(3, Coin::H)]).unwrap();
        let b = CoinSet::cylinder(&[(3, Coin::T)]).unwrap();
        let u = a.union(&b).unwrap();
        assert!(u.is_full());
        assert_eq!(u.window(), 0);
    }
}
