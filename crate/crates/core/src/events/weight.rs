//! Positive rational weights on the naturals, periodic up to finitely many points.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::intset::IntSet;
use crate::eventual::{QuasiPolynomial, VAR_N};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightFn {
    /// `residues[x mod k]` for `k = residues.len()`.
    residues: Vec<BigRational>,
    exceptions: BTreeMap<u64, BigRational>,
}

impl WeightFn {
    pub fn uniform() -> Self {
        WeightFn::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        WeightFn {
            residues: vec![c],
            exceptions: BTreeMap::new(),
        }
    }

    /// `None` when some weight is not strictly positive or no residue is given.
    pub fn new(residues: Vec<BigRational>, exceptions: BTreeMap<u64, BigRational>) -> Option<Self> {
        if residues.is_empty() || residues.iter().chain(exceptions.values()).any(|w| !w.is_positive()) {
            return None;
        }
        Some(WeightFn {
            residues,
            exceptions,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.residues.len() as u64
    }

    pub fn residues(&self) -> &[BigRational] {
        &self.residues
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, BigRational> {
        &self.exceptions
    }

    pub fn at(&self, x: u64) -> BigRational {
        self.exceptions
            .get(&x)
            .cloned()
            .unwrap_or_else(|| self.residues[(x % self.modulus()) as usize].clone())
    }

    /// The constant value, when the weight is constant.
    pub fn as_constant(&self) -> Option<&BigRational> {
        let c = &self.residues[0];
        (self.residues.iter().all(|w| w == c) && self.exceptions.values().all(|w| w == c)).then_some(c)
    }

    pub fn is_uniform(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, r: &BigRational) -> WeightFn {
        WeightFn {
            residues: self.residues.iter().map(|w| w * r).collect(),
            exceptions: self.exceptions.iter().map(|(k, w)| (*k, w * r)).collect(),
        }
    }

    /// Rescaled so that `w(x0) = 1`.
    pub fn normalized_at(&self, x0: u64) -> WeightFn {
        self.scale(&self.at(x0).recip())
    }

    /// `sum_{x in A, 1 <= x <= n} w(x)` for `A` inside the naturals.
    pub fn partial_sum(&self, set: &IntSet, n: u64) -> BigRational {
        let l = set.modulus().lcm(&self.modulus());
        let counts = set.count_by_residue(1, n as i128, l);
        let k = self.modulus() as usize;
        let mut total = BigRational::zero();
        for (r, c) in counts.iter().enumerate() {
            if *c != 0 {
                total += &self.residues[r % k] * BigRational::from_integer(BigInt::from(*c));
            }
        }
        for (&x, w) in &self.exceptions {
            if x >= 1 && x <= n && set.contains(x as i64) {
                total += w - &self.residues[(x % self.modulus()) as usize];
            }
        }
        total
    }

    /// Partial sums over `A ∩ {1..n}` as a quasi-polynomial in `n`.
    pub fn partial_sum_qp(&self, set: &IntSet) -> QuasiPolynomial {
        let l = set.modulus().lcm(&self.modulus());
        let last_cut = set.cuts().last().copied().unwrap_or(1).max(1) as u64;
        let last_exception = self.exceptions.keys().next_back().copied().unwrap_or(0);
        let n0 = last_cut.max(l).max(last_exception).max(1);
        // Slope: mean weight over one period of the upper tail.
        let tail = set.segments().last().expect("at least one segment");
        let k = self.modulus() as usize;
        let km = set.modulus() as usize;
        let mut sum = BigRational::zero();
        for r in 0..l as usize {
            if tail[r % km] {
                sum += &self.residues[r % k];
            }
        }
        let slope = sum / BigRational::from_integer(BigInt::from(l));
        let mut corrections = vec![BigRational::zero(); l as usize];
        for n in n0..n0 + l {
            let value = self.partial_sum(set, n);
            corrections[(n % l) as usize] = value - &slope * BigRational::from_integer(n.into());
        }
        QuasiPolynomial::with_rational_corrections(Poly::var(VAR_N).scale(&slope), &corrections, n0)
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "weight [")?;
        for (i, w) in self.residues.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")?;
        if !self.exceptions.is_empty() {
            write!(f, " except{{")?;
            for (i, (x, w)) in self.exceptions.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}:{w}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn uniform_counts_evens() {
        let f = WeightFn::uniform().partial_sum_qp(&IntSet::progression(2, 0));
        assert_eq!(f.to_string(), "1/2*n; period=2; corr=[0, -1/2]; n0=2");
    }

    #[test]
    fn weighted_sums_match_direct_evaluation() {
        let mut exc = BTreeMap::new();
        exc.insert(5, q(7, 2));
        let w = WeightFn::new(vec![q(2, 1), q(1, 1), q(1, 3)], exc).unwrap();
        let set = IntSet::progression(2, 1).union(&IntSet::points(&[4]));
        let f = w.partial_sum_qp(&set);
        for n in f.threshold()..f.threshold() + 40 {
            let direct: BigRational = (1..=n)
                .filter(|&x| set.contains(x as i64))
                .map(|x| w.at(x))
                .sum();
            assert_eq!(f.eval(&crate::eventual::GridPoint::nat(n)), direct);
            assert_eq!(w.partial_sum(&set, n), direct);
        }
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(WeightFn::new(vec![q(0, 1)], BTreeMap::new()).is_none());
        assert!(WeightFn::new(vec![], BTreeMap::new()).is_none());
    }
}
