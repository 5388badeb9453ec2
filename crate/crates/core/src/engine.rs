//! NAP-spaces and their probability functions.
//!
//! A [`NapSpace`] fixes a sample space, a directed family and a weight
//! function. Probabilities are Lambda-limits of ratios of weighted counts.
//! When the family visits several residue classes the numerator and the
//! denominator are evaluated on the same residue branch, never crosswise.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::eventual::{branch_limits_mod, limit, DirectedFamily, EventualError, LimitResult, QuasiPolynomial};
use crate::events::coin::{Coin, Sequence};
use crate::events::weight::WeightFn;
use crate::events::{Event, EventError, EventualCount, Point, SpaceKind};
use crate::hyperreal::{CompareResult, HyperReal, HyperRealError};
use crate::surd::Quadratic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Eventual(#[from] EventualError),
    #[error(transparent)]
    HyperReal(#[from] HyperRealError),
    #[error("numerosity is defined for fair spaces only")]
    FairOnly,
    #[error("conditioning on an empty event")]
    ConditioningOnEmpty,
    #[error("unsupported function: {0}")]
    UnsupportedFunction(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbabilityValue {
    Exact(HyperReal),
    /// Distinct branch values in residue order.
    CandidateSet(Vec<HyperReal>),
    Enclosure { lower: HyperReal, upper: HyperReal },
}

impl ProbabilityValue {
    fn from_branches(values: Vec<HyperReal>) -> Self {
        match LimitResult::from_branches(values) {
            LimitResult::Determined(x) => ProbabilityValue::Exact(x),
            LimitResult::Candidates(v) => ProbabilityValue::CandidateSet(v),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProbabilityValue::Exact(_) => "exact",
            ProbabilityValue::CandidateSet(_) => "candidates",
            ProbabilityValue::Enclosure { .. } => "enclosure",
        }
    }

    pub fn exact(&self) -> Option<&HyperReal> {
        match self {
            ProbabilityValue::Exact(x) => Some(x),
            _ => None,
        }
    }

    /// Every value the probability may take; both ends for an enclosure.
    pub fn values(&self) -> Vec<&HyperReal> {
        match self {
            ProbabilityValue::Exact(x) => vec![x],
            ProbabilityValue::CandidateSet(v) => v.iter().collect(),
            ProbabilityValue::Enclosure { lower, upper } => vec![lower, upper],
        }
    }
}

impl fmt::Display for ProbabilityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbabilityValue::Exact(x) => write!(f, "exact: {x}"),
            ProbabilityValue::CandidateSet(v) => {
                write!(f, "candidates: ")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            ProbabilityValue::Enclosure { lower, upper } => write!(f, "enclosure: [{lower}, {upper}]"),
        }
    }
}

/// Standard part of a probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArchProbability {
    Exact(BigRational),
    Candidates(Vec<BigRational>),
    Enclosure(BigRational, BigRational),
}

impl fmt::Display for ArchProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchProbability::Exact(x) => write!(f, "{x}"),
            ArchProbability::Candidates(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(", "))
            }
            ArchProbability::Enclosure(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NapSpace {
    kind: SpaceKind,
    family: DirectedFamily,
    weight: WeightFn,
    omega0: Point,
    total: QuasiPolynomial,
}

/// The canonical reference point of each space.
pub fn default_omega0(kind: SpaceKind) -> Point {
    match kind {
        SpaceKind::Nat => Point::nat(1),
        SpaceKind::Rational | SpaceKind::Real => Point::Number(Quadratic::from_int(0)),
        SpaceKind::Coin => Point::Seq(Sequence::constant(Coin::H)),
    }
}

impl NapSpace {
    /// The fair space on `kind` along `family`.
    pub fn new(kind: SpaceKind, family: DirectedFamily) -> Result<Self, EngineError> {
        NapSpace::build(kind, family, WeightFn::uniform(), default_omega0(kind))
    }

    /// A weighted lottery on the naturals; weights are rescaled so that `w(1) = 1`.
    pub fn weighted(family: DirectedFamily, weight: WeightFn) -> Result<Self, EngineError> {
        NapSpace::build(SpaceKind::Nat, family, weight, Point::nat(1))
    }

    fn build(kind: SpaceKind, family: DirectedFamily, weight: WeightFn, omega0: Point) -> Result<Self, EngineError> {
        if !kind.supports(family) {
            return Err(EventError::FamilyMismatch { space: kind, family }.into());
        }
        if !omega0.in_space(kind) {
            return Err(EventError::PointOutsideSpace(omega0.to_string()).into());
        }
        if kind != SpaceKind::Nat && !weight.is_uniform() {
            return Err(EngineError::InvalidSpace(
                "non-uniform weights are supported on the naturals only".into(),
            ));
        }
        let weight = match omega0.as_nat() {
            Some(x0) if kind == SpaceKind::Nat => weight.normalized_at(x0),
            _ => weight,
        };
        let full = Event::full(kind);
        let total = match kind {
            SpaceKind::Nat => full.weighted_eventual_count(&weight)?,
            _ => full
                .eventual_count(family)?
                .exact()
                .expect("the full event has an exact count")
                .clone(),
        };
        Ok(NapSpace {
            kind,
            family,
            weight,
            omega0,
            total,
        })
    }

    /// The same space with another reference point `w(omega0) = 1`.
    pub fn with_reference_point(&self, omega0: Point) -> Result<Self, EngineError> {
        NapSpace::build(self.kind, self.family, self.weight.clone(), omega0)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn family(&self) -> DirectedFamily {
        self.family
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    pub fn omega0(&self) -> &Point {
        &self.omega0
    }

    pub fn is_fair(&self) -> bool {
        self.weight.as_constant().is_some()
    }

    pub fn weight_at(&self, x: &Point) -> BigRational {
        match x.as_nat() {
            Some(n) if self.kind == SpaceKind::Nat => self.weight.at(n),
            _ => BigRational::one(),
        }
    }

    /// Partial sums of the weight over the grids.
    pub fn total_weight_count(&self) -> &QuasiPolynomial {
        &self.total
    }

    pub fn omega_numerosity(&self) -> Result<LimitResult, EngineError> {
        Ok(limit(&self.total, self.family)?)
    }

    /// Weighted eventual count of `a` along the space's family.
    pub fn count(&self, a: &Event) -> Result<EventualCount, EngineError> {
        self.check_space(a)?;
        Ok(match self.kind {
            SpaceKind::Nat => EventualCount::Exact(a.weighted_eventual_count(&self.weight)?),
            _ => a.eventual_count(self.family)?,
        })
    }

    fn check_space(&self, a: &Event) -> Result<(), EngineError> {
        if a.space() != self.kind {
            return Err(EventError::SpaceMismatch(self.kind, a.space()).into());
        }
        Ok(())
    }

    /// A modulus that is a multiple of every period involved, for aligned branch queries.
    pub fn branch_modulus(&self, events: &[Event]) -> Result<usize, EngineError> {
        let mut m = self.total.period();
        for e in events {
            let c = self.count(e)?;
            m = m.lcm(&c.lower().period()).lcm(&c.upper().period());
        }
        Ok(m)
    }

    fn ratio_branches(
        &self,
        num: &QuasiPolynomial,
        den: &QuasiPolynomial,
        modulus: usize,
    ) -> Result<Vec<(usize, HyperReal)>, EngineError> {
        let m = modulus.lcm(&num.period()).lcm(&den.period());
        let nb = branch_limits_mod(num, self.family, m)?;
        let db = branch_limits_mod(den, self.family, m)?;
        nb.into_iter()
            .zip(db)
            .map(|((r, n), (_, d))| {
                if d.is_zero() {
                    return Err(EngineError::ConditioningOnEmpty);
                }
                Ok((r, n.checked_div(&d)?))
            })
            .collect()
    }

    fn ratio(&self, num: &EventualCount, den: &EventualCount) -> Result<ProbabilityValue, EngineError> {
        if let (EventualCount::Exact(n), EventualCount::Exact(d)) = (num, den) {
            let b = self.ratio_branches(n, d, 1)?;
            return Ok(ProbabilityValue::from_branches(b.into_iter().map(|(_, v)| v).collect()));
        }
        let lo = self.ratio_branches(num.lower(), den.upper(), 1)?;
        let hi = self.ratio_branches(num.upper(), den.lower(), 1)?;
        if lo.len() != 1 || hi.len() != 1 {
            return Err(EngineError::UnsupportedFunction(
                "enclosures on periodic families".into(),
            ));
        }
        let zero = HyperReal::zero();
        let one = HyperReal::one();
        let mut lower = lo.into_iter().next().unwrap().1;
        let mut upper = hi.into_iter().next().unwrap().1;
        if lower.compare(&zero) == CompareResult::Less {
            lower = zero;
        }
        if upper.compare(&one) == CompareResult::Greater {
            upper = one;
        }
        Ok(ProbabilityValue::Enclosure { lower, upper })
    }

    /// `n(A)`, the Lambda-limit of `|A ∩ λ|` on a fair space.
    pub fn numerosity(&self, a: &Event) -> Result<ProbabilityValue, EngineError> {
        if !self.is_fair() {
            return Err(EngineError::FairOnly);
        }
        self.check_space(a)?;
        let c = a.eventual_count(self.family)?;
        Ok(match c {
            EventualCount::Exact(f) => match limit(&f, self.family)? {
                LimitResult::Determined(x) => ProbabilityValue::Exact(x),
                LimitResult::Candidates(v) => ProbabilityValue::CandidateSet(v),
            },
            EventualCount::Bounds { lower, upper } => ProbabilityValue::Enclosure {
                lower: limit(&lower, self.family)?
                    .determined()
                    .cloned()
                    .expect("line counts have period 1"),
                upper: limit(&upper, self.family)?
                    .determined()
                    .cloned()
                    .expect("line counts have period 1"),
            },
        })
    }

    pub fn probability(&self, a: &Event) -> Result<ProbabilityValue, EngineError> {
        let c = self.count(a)?;
        self.ratio(&c, &EventualCount::Exact(self.total.clone()))
    }

    /// Probability per residue branch mod `modulus` (a multiple of every period involved).
    pub fn probability_branches(&self, a: &Event, modulus: usize) -> Result<Vec<(usize, HyperReal)>, EngineError> {
        match self.count(a)? {
            EventualCount::Exact(f) => self.ratio_branches(&f, &self.total, modulus),
            EventualCount::Bounds { .. } => Err(EngineError::UnsupportedFunction(
                "branches of an enclosed probability".into(),
            )),
        }
    }

    /// `P(A | B) = P(A ∩ B) / P(B)`.
    pub fn conditional(&self, a: &Event, b: &Event) -> Result<ProbabilityValue, EngineError> {
        self.check_space(a)?;
        self.check_space(b)?;
        if b.is_empty() {
            return Err(EngineError::ConditioningOnEmpty);
        }
        let ab = a.intersect(b)?;
        self.ratio(&self.count(&ab)?, &self.count(b)?)
    }

    /// `P(A | λ)` for an explicit finite `λ`.
    pub fn conditional_given_finite(&self, a: &Event, lam: &[Point]) -> Result<BigRational, EngineError> {
        self.check_space(a)?;
        let lam: BTreeSet<&Point> = lam.iter().collect();
        if lam.is_empty() {
            return Err(EngineError::ConditioningOnEmpty);
        }
        let mut num = BigRational::zero();
        let mut den = BigRational::zero();
        for x in lam {
            let w = self.weight_at(x);
            if a.member(x)? {
                num += &w;
            }
            den += w;
        }
        Ok(num / den)
    }

    /// `sum_{x in A} u(x)`, the Lambda-limit of the partial sums.
    pub fn infinite_sum(&self, u: &WeightFn, a: &Event) -> Result<LimitResult, EngineError> {
        self.check_space(a)?;
        let f = match self.kind {
            SpaceKind::Nat => a.weighted_eventual_count(u)?,
            _ => {
                let c = u.as_constant().ok_or_else(|| {
                    EngineError::UnsupportedFunction(
                        "only constant functions can be summed outside the naturals".into(),
                    )
                })?;
                match a.eventual_count(self.family)? {
                    EventualCount::Exact(f) => f.scale(c),
                    EventualCount::Bounds { .. } => {
                        return Err(EngineError::UnsupportedFunction(
                            "sums over events with irrational endpoints are only enclosed".into(),
                        ))
                    }
                }
            }
        };
        Ok(limit(&f, self.family)?)
    }

    /// `st(P(A))`, collapsing candidates with a common standard part.
    pub fn arch_probability(&self, a: &Event) -> Result<ArchProbability, EngineError> {
        Ok(match self.probability(a)? {
            ProbabilityValue::Exact(x) => ArchProbability::Exact(x.standard_part()?),
            ProbabilityValue::CandidateSet(v) => {
                let mut out: Vec<BigRational> = Vec::new();
                for x in &v {
                    let s = x.standard_part()?;
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
                if out.len() == 1 {
                    ArchProbability::Exact(out.pop().unwrap())
                } else {
                    ArchProbability::Candidates(out)
                }
            }
            ProbabilityValue::Enclosure { lower, upper } => {
                let (l, u) = (lower.standard_part()?, upper.standard_part()?);
                if l == u {
                    ArchProbability::Exact(l)
                } else {
                    ArchProbability::Enclosure(l, u)
                }
            }
        })
    }

    pub fn axiom_report(&self, events: &[Event], partition: Option<&[Event]>) -> Result<AxiomReport, EngineError> {
        let mut report = AxiomReport::default();
        let zero = HyperReal::zero();
        let one = HyperReal::one();

        let full = Event::full(self.kind);
        let p_full = self.probability(&full)?;
        report.push(
            "normalization",
            "all",
            p_full == ProbabilityValue::Exact(one.clone()),
            p_full.to_string(),
        );

        for (i, e) in events.iter().enumerate() {
            let subject = format!("E{}", i + 1);
            let p = self.probability(e)?;
            let nonneg = p
                .values()
                .iter()
                .all(|x| matches!(x.compare(&zero), CompareResult::Greater | CompareResult::Equal));
            report.push("nonnegativity", &subject, nonneg, p.to_string());
            let (is_one, is_zero) = match &p {
                ProbabilityValue::Enclosure { lower, upper } => (
                    lower == &one && upper == &one,
                    lower == &zero && upper == &zero,
                ),
                _ => (
                    p.values().iter().any(|x| **x == one),
                    p.values().iter().any(|x| **x == zero),
                ),
            };
            report.push("unit iff full", &subject, is_one == e.is_full(), p.to_string());
            report.push("zero iff empty", &subject, is_zero == e.is_empty(), p.to_string());
        }

        for i in 0..events.len() {
            for j in i + 1..events.len() {
                let (a, b) = (&events[i], &events[j]);
                if !a.is_disjoint(b) {
                    continue;
                }
                let ab = a.union(b)?;
                let subject = format!("E{} + E{}", i + 1, j + 1);
                let (ok, detail) = self.additivity(&[a.clone(), b.clone()], &ab)?;
                report.push("finite additivity", &subject, ok, detail);
            }
        }

        if self.is_fair() && self.kind != SpaceKind::Real {
            let second = match self.kind {
                SpaceKind::Nat => Point::nat(17),
                SpaceKind::Rational => Point::Number(Quadratic::from_rational(BigRational::new(1.into(), 2.into()))),
                _ => Point::Seq(Sequence::new(vec![Coin::T], Coin::H)),
            };
            let p0 = self.probability(&Event::finite(self.kind, &[self.omega0.clone()])?)?;
            let p1 = self.probability(&Event::finite(self.kind, &[second])?)?;
            let infinitesimal = match p0.exact() {
                Some(x) => x.is_infinitesimal().unwrap_or(false),
                None => false,
            };
            report.push(
                "equal infinitesimal singletons",
                "points",
                p0 == p1 && infinitesimal,
                p0.to_string(),
            );
        }

        if let Some(parts) = partition {
            let mut disjoint = true;
            let mut cover = Event::empty(self.kind);
            for (i, a) in parts.iter().enumerate() {
                for b in &parts[i + 1..] {
                    disjoint &= a.is_disjoint(b);
                }
                cover = cover.union(a)?;
            }
            if !disjoint || !cover.is_full() {
                report.push("partition additivity", "partition", false, "not a partition".into());
            } else {
                let (ok, detail) = self.additivity(parts, &full)?;
                report.push("partition additivity", "partition", ok, detail);
            }
        }
        Ok(report)
    }

    /// Whether `P(whole) = sum P(parts)` on every aligned branch.
    fn additivity(&self, parts: &[Event], whole: &Event) -> Result<(bool, String), EngineError> {
        let mut all = parts.to_vec();
        all.push(whole.clone());
        let exact = all
            .iter()
            .map(|e| self.count(e).map(|c| c.exact().is_some()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|b| b);
        if exact {
            let m = self.branch_modulus(&all)?;
            let target = self.probability_branches(whole, m)?;
            let mut sums = vec![HyperReal::zero(); target.len()];
            for p in parts {
                for (k, (_, v)) in self.probability_branches(p, m)?.into_iter().enumerate() {
                    sums[k] = &sums[k] + &v;
                }
            }
            let ok = target.iter().zip(&sums).all(|((_, t), s)| t == s);
            let detail = target
                .iter()
                .map(|(r, t)| format!("r={r}: {t}"))
                .collect::<Vec<_>>()
                .join("; ");
            return Ok((ok, detail));
        }
        // Enclosures: the sum of the parts' bounds must overlap the whole's bounds.
        let mut lo = HyperReal::zero();
        let mut hi = HyperReal::zero();
        for p in parts {
            let v = self.probability(p)?;
            let vals = v.values();
            lo = &lo + vals[0];
            hi = &hi + *vals.last().unwrap();
        }
        let w = self.probability(whole)?;
        let wv = w.values();
        let ok = lo.compare(wv.last().unwrap()) != CompareResult::Greater
            && wv[0].compare(&hi) != CompareResult::Greater;
        Ok((ok, w.to_string()))
    }
}

/// `lim |A ∩ {1..n}| / n` for an event on the naturals.
pub fn asymptotic_density(a: &Event) -> Result<BigRational, EngineError> {
    let set = a.as_int_set().ok_or_else(|| {
        EngineError::Event(EventError::Unsupported(
            "asymptotic density is defined for events on the naturals".into(),
        ))
    })?;
    Ok(BigRational::new(
        (set.upper_density_count() as i64).into(),
        (set.modulus() as i64).into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub subject: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    fn push(&mut self, name: &str, subject: &str, passed: bool, detail: String) {
        self.checks.push(AxiomCheck {
            name: name.into(),
            subject: subject.into(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {} [{}]: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.subject,
                c.detail
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::expr::EventExpr;

    fn ev(space: SpaceKind, src: &str) -> Event {
        EventExpr::parse(src).unwrap().compile(space).unwrap()
    }

    #[test]
    fn fair_naturals() {
        let s = NapSpace::new(SpaceKind::Nat, DirectedFamily::FactorialN).unwrap();
        assert_eq!(
            s.probability(&ev(SpaceKind::Nat, "prog(7,0)")).unwrap().to_string(),
            "exact: (1)/(7)"
        );
        let all = NapSpace::new(SpaceKind::Nat, DirectedFamily::AllN).unwrap();
        let p = all.probability(&ev(SpaceKind::Nat, "prog(2,0)")).unwrap();
        assert_eq!(p.to_string(), "candidates: (1)/(2), (a - 1)/(2*a)");
        assert_eq!(
            all.arch_probability(&ev(SpaceKind::Nat, "prog(2,0)")).unwrap(),
            ArchProbability::Exact(BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(
            s.numerosity(&ev(SpaceKind::Nat, "fin{3,7,9}")).unwrap().to_string(),
            "exact: (3)/(1)"
        );
    }

    #[test]
    fn rational_lottery() {
        let s = NapSpace::new(SpaceKind::Rational, DirectedFamily::QGrid).unwrap();
        assert_eq!(
            s.probability(&ev(SpaceKind::Rational, "nat")).unwrap().to_string(),
            "exact: (a)/(2*a^2 + 1)"
        );
        assert_eq!(
            s.omega_numerosity().unwrap().to_string(),
            "exact: (2*a^2 + 1)/(1)"
        );
    }

    #[test]
    fn weighted_conditionals() {
        let w = WeightFn::new(
            vec![BigRational::from_integer(2.into()), BigRational::one()],
            Default::default(),
        )
        .unwrap();
        let s = NapSpace::weighted(DirectedFamily::FactorialN, w).unwrap();
        let e = ev(SpaceKind::Nat, "prog(2,0)");
        assert_eq!(
            s.conditional_given_finite(&e, &[Point::nat(1), Point::nat(2)]).unwrap(),
            BigRational::new(2.into(), 3.into())
        );
        assert_eq!(s.probability(&e).unwrap().to_string(), "exact: (2)/(3)");
        let moved = s.with_reference_point(Point::nat(2)).unwrap();
        assert_eq!(moved.probability(&e).unwrap(), s.probability(&e).unwrap());
        assert!(matches!(s.numerosity(&e), Err(EngineError::FairOnly)));
    }

    #[test]
    fn conditioning_on_empty_fails() {
        let s = NapSpace::new(SpaceKind::Nat, DirectedFamily::FactorialN).unwrap();
        let e = ev(SpaceKind::Nat, "prog(2,0)");
        assert!(matches!(
            s.conditional(&e, &Event::empty(SpaceKind::Nat)),
            Err(EngineError::ConditioningOnEmpty)
        ));
        assert!(matches!(
            s.conditional_given_finite(&e, &[]),
            Err(EngineError::ConditioningOnEmpty)
        ));
    }

    #[test]
    fn axiom_report_on_residue_partition() {
        let s = NapSpace::new(SpaceKind::Nat, DirectedFamily::AllN).unwrap();
        let parts: Vec<Event> = (0..3).map(|l| ev(SpaceKind::Nat, &format!("prog(3,{l})"))).collect();
        let r = s.axiom_report(&parts, Some(&parts)).unwrap();
        assert!(r.all_passed(), "{r}");
    }
}
