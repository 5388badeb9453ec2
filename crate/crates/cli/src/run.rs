//! Statement execution and result records.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use nap_core::engine::{asymptotic_density, ArchProbability, EngineError, NapSpace, ProbabilityValue};
use nap_core::eventual::LimitResult;
use nap_core::events::expr::EventExpr;
use nap_core::events::{Event, EventError};
use nap_core::hyperreal::HyperReal;
use nap_core::oracle::{default_indices, verify_conditional, verify_counts, OracleError};

use crate::query::{Command, Program, SpaceDecl, Stmt};
use crate::{CliError, ErrorKind, Format, Options};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Exact,
    Candidates,
    Enclosure,
    Rational,
    Report,
}

impl ValueKind {
    fn name(self) -> &'static str {
        match self {
            ValueKind::Exact => "exact",
            ValueKind::Candidates => "candidates",
            ValueKind::Enclosure => "enclosure",
            ValueKind::Rational => "rational",
            ValueKind::Report => "report",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Symbolic,
    OracleVerified,
}

/// One command's result. `shadow` is a rounded decimal for display only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub kind: ValueKind,
    pub values: Vec<String>,
    /// Standard part shared by every value, as an exact rational.
    pub st: Option<String>,
    pub shadow: Option<String>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

impl ResultRecord {
    fn text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        match self.kind {
            ValueKind::Enclosure => out += &format!("  enclosure: [{}]\n", self.values.join(", ")),
            ValueKind::Report => {
                let verdict = if self.passed == Some(true) { "PASS" } else { "FAIL" };
                out += &format!("  {verdict}: {}\n", self.values.join("; "));
            }
            k => out += &format!("  {}: {}\n", k.name(), self.values.join(", ")),
        }
        if let (Some(st), Some(shadow)) = (&self.st, &self.shadow) {
            out += &format!("  st: {st} ~ {shadow}\n");
        }
        for d in &self.details {
            out += &format!("    {d}\n");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub records: Vec<ResultRecord>,
    pub error: Option<CliError>,
}

impl Execution {
    pub fn success(&self) -> bool {
        self.error.is_none() && self.records.iter().all(|r| r.passed != Some(false))
    }

    pub fn render(&self, opts: &Options) -> String {
        self.records
            .iter()
            .map(|r| match opts.format {
                Format::Text => r.text(),
                Format::Json => format!("{}\n", serde_json::to_string(r).expect("serializable")),
            })
            .collect()
    }
}

/// `r` rounded half away from zero to `digits` places.
pub fn decimal(r: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r.abs() * BigRational::from_integer(scale);
    let m = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    let sign = if r.is_negative() && !m.is_zero() { "-" } else { "" };
    let s = format!("{:0>width$}", m.to_string(), width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

struct Failure(ErrorKind, String);

impl From<EventError> for Failure {
    fn from(e: EventError) -> Self {
        Failure(ErrorKind::Event, e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Event(e) => e.into(),
            e => Failure(ErrorKind::Engine, e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Event(e) => e.into(),
            OracleError::Engine(e) => e.into(),
            e => Failure(ErrorKind::Oracle, e.to_string()),
        }
    }
}

fn shared_st(values: &[&HyperReal]) -> Option<BigRational> {
    let mut parts = values.iter().map(|v| v.standard_part().ok());
    let first = parts.next()??;
    for p in parts {
        if p? != first {
            return None;
        }
    }
    Some(first)
}

struct Ctx<'a> {
    space: &'a NapSpace,
    opts: &'a Options,
    command: String,
}

impl Ctx<'_> {
    fn record(&self, kind: ValueKind, values: Vec<String>, st: Option<BigRational>) -> ResultRecord {
        ResultRecord {
            command: self.command.clone(),
            kind,
            values,
            shadow: st.as_ref().map(|s| decimal(s, self.opts.digits)),
            st: st.map(|s| s.to_string()),
            provenance: Provenance::Symbolic,
            passed: None,
            details: Vec::new(),
        }
    }

    fn hyper(&self, v: &ProbabilityValue) -> ResultRecord {
        let kind = match v {
            ProbabilityValue::Exact(_) => ValueKind::Exact,
            ProbabilityValue::CandidateSet(_) => ValueKind::Candidates,
            ProbabilityValue::Enclosure { .. } => ValueKind::Enclosure,
        };
        let values = v.values();
        self.record(kind, values.iter().map(|x| x.to_string()).collect(), shared_st(&values))
    }

    fn limit(&self, v: &LimitResult) -> ResultRecord {
        let pv = match v {
            LimitResult::Determined(x) => ProbabilityValue::Exact(x.clone()),
            LimitResult::Candidates(xs) => ProbabilityValue::CandidateSet(xs.clone()),
        };
        self.hyper(&pv)
    }

    fn rational(&self, r: BigRational) -> ResultRecord {
        self.record(ValueKind::Rational, vec![r.to_string()], Some(r))
    }

    fn compile(&self, e: &EventExpr) -> Result<Event, Failure> {
        Ok(e.compile(self.space.kind())?)
    }

    fn compile_all(&self, es: &[EventExpr]) -> Result<Vec<Event>, Failure> {
        es.iter().map(|e| self.compile(e)).collect()
    }

    fn run(&self, cmd: &Command) -> Result<ResultRecord, Failure> {
        let space = self.space;
        Ok(match cmd {
            Command::Numerosity(a) => self.hyper(&space.numerosity(&self.compile(a)?)?),
            Command::Prob(a) => self.hyper(&space.probability(&self.compile(a)?)?),
            Command::Cond(a, b) => self.hyper(&space.conditional(&self.compile(a)?, &self.compile(b)?)?),
            Command::CondFin(a, f) => {
                let points = self
                    .compile(f)?
                    .finite_members()
                    .ok_or_else(|| Failure(ErrorKind::Usage, format!("`{f}` is not a finite event")))?;
                self.rational(space.conditional_given_finite(&self.compile(a)?, &points)?)
            }
            Command::Sum(w, a) => self.limit(&space.infinite_sum(w, &self.compile(a)?)?),
            Command::St(a) => match space.arch_probability(&self.compile(a)?)? {
                ArchProbability::Exact(r) => self.rational(r),
                ArchProbability::Candidates(v) => {
                    self.record(ValueKind::Candidates, v.iter().map(|x| x.to_string()).collect(), None)
                }
                ArchProbability::Enclosure(lo, hi) => {
                    let st = (lo == hi).then(|| lo.clone());
                    self.record(ValueKind::Enclosure, vec![lo.to_string(), hi.to_string()], st)
                }
            },
            Command::Density(a) => self.rational(asymptotic_density(&self.compile(a)?)?),
            Command::Axioms(events, partition) => {
                let events = self.compile_all(events)?;
                let partition = partition.as_ref().map(|p| self.compile_all(p)).transpose()?;
                let report = space.axiom_report(&events, partition.as_deref())?;
                let passed = report.checks.iter().filter(|c| c.passed).count();
                let mut r = self.record(
                    ValueKind::Report,
                    vec![format!("{passed}/{} checks passed", report.checks.len())],
                    None,
                );
                r.passed = Some(report.all_passed());
                r.details = report.to_string().lines().map(str::to_string).collect();
                r
            }
            Command::Verify(a) => self.verify(a)?,
        })
    }

    /// Fair counts and the space's probability, both against brute force.
    fn verify(&self, a: &EventExpr) -> Result<ResultRecord, Failure> {
        let (space, caps) = (self.space, &self.opts.caps);
        let (kind, family) = (space.kind(), space.family());
        let event = self.compile(a)?;
        let threshold = event
            .eventual_count(family)?
            .threshold()
            .max(space.count(&event)?.threshold())
            .max(space.count(&Event::full(kind))?.threshold());
        let indices = default_indices(family, threshold, caps);
        let reports = [
            verify_counts(a, kind, family, &indices, caps)?,
            verify_conditional(space, a, None, &indices, caps)?,
        ];
        let mut r = self.record(
            ValueKind::Report,
            reports
                .iter()
                .map(|rep| {
                    let s = rep.summary();
                    format!("{}: {}/{} indices", s.subject, s.passed, s.checked)
                })
                .collect(),
            None,
        );
        r.provenance = Provenance::OracleVerified;
        r.passed = Some(reports.iter().all(|rep| rep.passed()));
        r.details = reports
            .iter()
            .flat_map(|rep| rep.to_string().lines().map(str::to_string).collect::<Vec<_>>())
            .collect();
        Ok(r)
    }
}

fn build_space(d: &SpaceDecl) -> Result<NapSpace, EngineError> {
    match &d.weight {
        Some(w) => NapSpace::weighted(d.family, w.clone()),
        None => NapSpace::new(d.kind, d.family),
    }
}

pub fn execute(program: &Program, opts: &Options) -> Execution {
    let mut records = Vec::new();
    let mut space = None;
    for (i, stmt) in program.stmts.iter().enumerate() {
        let result = match stmt {
            Stmt::Space(d) => build_space(d).map(|s| space = Some(s)).map_err(Failure::from),
            Stmt::Let(..) => Ok(()),
            Stmt::Command(cmd) => {
                let ctx = Ctx {
                    space: space.as_ref().expect("the parser rejects commands before a space"),
                    opts,
                    command: cmd.to_string(),
                };
                ctx.run(cmd).map(|r| records.push(r))
            }
        };
        if let Err(Failure(kind, message)) = result {
            let (line, column) = program.position(i);
            let error = CliError {
                kind,
                message,
                line: Some(line),
                column: Some(column),
            };
            return Execution {
                records,
                error: Some(error),
            };
        }
    }
    Execution { records, error: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_round_half_away() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(decimal(&q(1, 7), 6), "0.142857");
        assert_eq!(decimal(&q(2, 3), 3), "0.667");
        assert_eq!(decimal(&q(-1, 8), 2), "-0.13");
        assert_eq!(decimal(&q(-1, 1000), 2), "0.00");
        assert_eq!(decimal(&q(5, 2), 0), "3");
        assert_eq!(decimal(&q(12, 1), 1), "12.0");
    }
}
