//! Eventually periodic subsets of the integers.
//!
//! A set is a common modulus `K`, sorted cut points `c_1 < ... < c_k`, and
//! one residue pattern mod `K` per segment. Segment `0` is `x < c_1`,
//! segment `i` is `c_i <= x < c_{i+1}`, and the last is `x >= c_k`.

use num_integer::Integer;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntSet {
    modulus: u64,
    cuts: Vec<i64>,
    segments: Vec<Vec<bool>>,
}

/// `#{x in [lo, hi] : x = r (mod k)}`.
pub(crate) fn count_residue(lo: i128, hi: i128, r: i128, k: i128) -> i128 {
    if hi < lo {
        return 0;
    }
    Integer::div_floor(&(hi - r), &k) - Integer::div_floor(&(lo - 1 - r), &k)
}

impl IntSet {
    fn build(modulus: u64, cuts: Vec<i64>, segments: Vec<Vec<bool>>) -> Self {
        debug_assert_eq!(segments.len(), cuts.len() + 1);
        debug_assert!(segments.iter().all(|s| s.len() == modulus as usize));
        IntSet {
            modulus,
            cuts,
            segments,
        }
        .normalized()
    }

    pub fn empty() -> Self {
        IntSet::build(1, vec![], vec![vec![false]])
    }

    pub fn full() -> Self {
        IntSet::build(1, vec![], vec![vec![true]])
    }

    /// Integers in `[lo, hi)`; `None` leaves a side unbounded.
    pub fn range(lo: Option<i64>, hi: Option<i64>) -> Self {
        match (lo, hi) {
            (None, None) => IntSet::full(),
            (Some(a), None) => IntSet::build(1, vec![a], vec![vec![false], vec![true]]),
            (None, Some(b)) => IntSet::build(1, vec![b], vec![vec![true], vec![false]]),
            (Some(a), Some(b)) if a >= b => IntSet::empty(),
            (Some(a), Some(b)) => IntSet::build(
                1,
                vec![a, b],
                vec![vec![false], vec![true], vec![false]],
            ),
        }
    }

    /// `{1, 2, 3, ...}`.
    pub fn naturals() -> Self {
        IntSet::range(Some(1), None)
    }

    /// All integers congruent to `r` mod `k`.
    pub fn residue_class(k: u64, r: i64) -> Self {
        assert!(k >= 1);
        let r = r.rem_euclid(k as i64) as usize;
        let pattern = (0..k as usize).map(|i| i == r).collect();
        IntSet::build(k, vec![], vec![pattern])
    }

    /// `{k - l, 2k - l, 3k - l, ...}`: positive integers congruent to `-l` mod `k`.
    pub fn progression(k: u64, l: i64) -> Self {
        IntSet::residue_class(k, -l).intersect(&IntSet::naturals())
    }

    pub fn points(xs: &[i64]) -> Self {
        xs.iter().fold(IntSet::empty(), |acc, &x| {
            acc.union(&IntSet::range(Some(x), Some(x + 1)))
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn cuts(&self) -> &[i64] {
        &self.cuts
    }

    pub fn segments(&self) -> &[Vec<bool>] {
        &self.segments
    }

    fn segment_of(&self, x: i64) -> usize {
        self.cuts.partition_point(|&c| c <= x)
    }

    /// `[lo, hi)` of segment `i`; `None` marks an infinite side.
    fn segment_bounds(&self, i: usize) -> (Option<i64>, Option<i64>) {
        let lo = if i == 0 { None } else { Some(self.cuts[i - 1]) };
        let hi = self.cuts.get(i).copied();
        (lo, hi)
    }

    pub fn contains(&self, x: i64) -> bool {
        let seg = &self.segments[self.segment_of(x)];
        seg[x.rem_euclid(self.modulus as i64) as usize]
    }

    /// Patterns re-expressed over a finer modulus and a superset of the cuts.
    fn refine(&self, modulus: u64, cuts: &[i64]) -> Vec<Vec<bool>> {
        debug_assert_eq!(modulus % self.modulus, 0);
        let k = self.modulus as usize;
        (0..=cuts.len())
            .map(|i| {
                // Any representative of segment i lies in one old segment.
                let old = if i == 0 {
                    0
                } else {
                    self.segment_of(cuts[i - 1])
                };
                (0..modulus as usize).map(|r| self.segments[old][r % k]).collect()
            })
            .collect()
    }

    fn combine(&self, other: &IntSet, op: impl Fn(bool, bool) -> bool) -> IntSet {
        let modulus = self.modulus.lcm(&other.modulus);
        let mut cuts: Vec<i64> = self.cuts.iter().chain(&other.cuts).copied().collect();
        cuts.sort_unstable();
        cuts.dedup();
        let a = self.refine(modulus, &cuts);
        let b = other.refine(modulus, &cuts);
        let segments = a
            .iter()
            .zip(&b)
            .map(|(sa, sb)| sa.iter().zip(sb).map(|(&x, &y)| op(x, y)).collect())
            .collect();
        IntSet::build(modulus, cuts, segments)
    }

    pub fn union(&self, other: &IntSet) -> IntSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &IntSet) -> IntSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &IntSet) -> IntSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> IntSet {
        let segments = self
            .segments
            .iter()
            .map(|s| s.iter().map(|&b| !b).collect())
            .collect();
        IntSet::build(self.modulus, self.cuts.clone(), segments)
    }

    /// Minimal modulus, then merge of adjacent segments with equal patterns.
    fn normalized(mut self) -> Self {
        let k = self.modulus as usize;
        for d in 1..=k {
            if k % d == 0 && self.segments.iter().all(|s| (0..k).all(|r| s[r] == s[r % d])) {
                for s in &mut self.segments {
                    s.truncate(d);
                }
                self.modulus = d as u64;
                break;
            }
        }
        let mut cuts = Vec::with_capacity(self.cuts.len());
        let mut segments = vec![self.segments[0].clone()];
        for (i, c) in self.cuts.iter().enumerate() {
            let next = &self.segments[i + 1];
            if segments.last() != Some(next) {
                cuts.push(*c);
                segments.push(next.clone());
            }
        }
        self.cuts = cuts;
        self.segments = segments;
        self
    }

    /// Number of members of segment `i` inside `[lo, hi]`, per residue mod `modulus`.
    fn segment_counts(&self, i: usize, lo: i128, hi: i128, modulus: u64, out: &mut [i128]) {
        let (slo, shi) = self.segment_bounds(i);
        let lo = slo.map_or(lo, |a| lo.max(a as i128));
        let hi = shi.map_or(hi, |b| hi.min(b as i128 - 1));
        if hi < lo {
            return;
        }
        let k = self.modulus as usize;
        for (r, slot) in out.iter_mut().enumerate() {
            if self.segments[i][r % k] {
                *slot += count_residue(lo, hi, r as i128, modulus as i128);
            }
        }
    }

    /// Members in `[lo, hi]` split by residue mod `modulus`, a multiple of the set's modulus.
    pub fn count_by_residue(&self, lo: i128, hi: i128, modulus: u64) -> Vec<i128> {
        debug_assert_eq!(modulus % self.modulus, 0);
        let mut out = vec![0i128; modulus as usize];
        for i in 0..self.segments.len() {
            self.segment_counts(i, lo, hi, modulus, &mut out);
        }
        out
    }

    /// Members in `[lo, hi]`.
    pub fn count_range(&self, lo: i128, hi: i128) -> u128 {
        let total: i128 = self.count_by_residue(lo, hi, self.modulus).iter().sum();
        total as u128
    }

    /// Residues (mod the set's modulus) present in the upper tail.
    pub fn upper_density_count(&self) -> usize {
        self.segments.last().unwrap().iter().filter(|&&b| b).count()
    }

    pub fn lower_density_count(&self) -> usize {
        self.segments[0].iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        (0..self.segments.len()).all(|i| self.segment_is_empty(i))
    }

    fn segment_is_empty(&self, i: usize) -> bool {
        match self.segment_bounds(i) {
            (Some(lo), Some(hi)) => self.count_range(lo as i128, hi as i128 - 1) == 0,
            _ => self.segments[i].iter().all(|&b| !b),
        }
    }

    pub fn is_full(&self) -> bool {
        self.complement().is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.lower_density_count() == 0 && self.upper_density_count() == 0
    }

    /// Extensional equality.
    pub fn equivalent(&self, other: &IntSet) -> bool {
        self.combine(other, |a, b| a != b).is_empty()
    }

    pub fn is_subset(&self, other: &IntSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Smallest `B >= 0` with every cut in `[-B, B]`.
    pub fn cut_bound(&self) -> u64 {
        self.cuts.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// Explicit members of a finite set, ascending.
    pub fn finite_members(&self) -> Option<Vec<i64>> {
        if !self.is_finite() {
            return None;
        }
        let mut out = Vec::new();
        for i in 1..self.segments.len().saturating_sub(1) {
            let (Some(lo), Some(hi)) = self.segment_bounds(i) else {
                continue;
            };
            out.extend((lo..hi).filter(|&x| self.contains(x)));
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn progressions() {
        let p = IntSet::progression(3, 1);
        assert!(p.contains(2) && p.contains(5) && !p.contains(-1) && !p.contains(3));
        let e = IntSet::progression(2, 0);
        let o = IntSet::progression(2, 1);
        assert!(e.union(&o).equivalent(&IntSet::naturals()));
        assert!(e.intersect(&o).is_empty());
        assert!(e.complement().intersect(&IntSet::naturals()).equivalent(&o));
    }

    #[test]
    fn crt_intersection() {
        let six = IntSet::progression(2, 0).intersect(&IntSet::progression(3, 0));
        assert!(six.equivalent(&IntSet::progression(6, 0)));
        assert_eq!(six.modulus(), 6);
        for x in -50..10_000 {
            assert_eq!(six.contains(x), x >= 1 && x % 6 == 0);
        }
    }

    #[test]
    fn counts() {
        let e = IntSet::progression(2, 0);
        assert_eq!(e.count_range(1, 720), 360);
        let f = IntSet::points(&[3, 7, 9]);
        assert_eq!(f.count_range(1, 8), 2);
        assert_eq!(f.finite_members(), Some(vec![3, 7, 9]));
        assert_eq!(IntSet::full().count_range(-24, 24), 49);
    }

    #[test]
    fn normal_form_merges() {
        let a = IntSet::range(Some(0), Some(5)).union(&IntSet::range(Some(5), Some(9)));
        assert_eq!(a.cuts(), &[0, 9]);
        assert!(IntSet::residue_class(4, 1).union(&IntSet::residue_class(4, 3))
            .equivalent(&IntSet::residue_class(2, 1)));
        assert_eq!(
            IntSet::residue_class(4, 1).union(&IntSet::residue_class(4, 3)).modulus(),
            2
        );
    }

    #[test]
    fn emptiness_of_short_segments() {
        let s = IntSet::points(&[2]).intersect(&IntSet::residue_class(2, 1));
        assert!(s.is_empty());
        assert!(!IntSet::points(&[2]).is_empty());
    }
}
