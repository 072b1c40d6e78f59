//! Monte Carlo estimation and the inequality suites that compare estimated
//! crossing probabilities against the bounds relating them.

mod checks;
mod estimate;
mod suites;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::homeo::{de_f64, lp_margin, ser_f64, LogProb};
use crate::models::ModelSpec;

pub use checks::{
    corridor_suite, duality_suite, fk_bernoulli_comparison, fkg_check, fkg_pairs, homeo_suite, mixed_diag_fkg_pair,
    sqrt_trick_check, z_score, CorridorOptions, FkgStats, SqrtTrickStats,
};
pub use estimate::{wilson, Engine, Estimate, JointCounts, Quantity, ESTIMATE_SCHEMA, WILSON_Z};
pub use suites::{
    cascade, closing, default_arm_family, fk_nesting, lemma31, lemma42, reduced_star, renormalization_trace, theorem1,
    uniform_arm_bound, ArmFamilyMember, TraceRow, TraceSummary,
};

pub const VERDICT_SCHEMA: &str = "rswlab/verdict/v1";
pub const CHECK_SCHEMA: &str = "rswlab/check/v1";

/// Right-hand sides with `ln p` below this are reported as vacuous.
pub const VACUOUS_LP: f64 = -1e4;

/// A probability with lower and upper confidence bounds, all in log form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: LogProb,
    pub point: LogProb,
    pub hi: LogProb,
}

impl Interval {
    pub fn exact(x: LogProb) -> Self {
        Self { lo: x, point: x, hi: x }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Image under an increasing map.
    pub fn map(&self, f: impl Fn(LogProb) -> LogProb) -> Self {
        Self { lo: f(self.lo), point: f(self.point), hi: f(self.hi) }
    }

    pub fn try_map(&self, f: impl Fn(LogProb) -> Result<LogProb>) -> Result<Self> {
        Ok(Self { lo: f(self.lo)?, point: f(self.point)?, hi: f(self.hi)? })
    }

    /// `1 - x`; the bounds swap.
    pub fn complement(&self) -> Self {
        Self { lo: self.hi.complement(), point: self.point.complement(), hi: self.lo.complement() }
    }

    pub fn mul(&self, other: &Interval) -> Self {
        Self { lo: self.lo.mul(&other.lo), point: self.point.mul(&other.point), hi: self.hi.mul(&other.hi) }
    }

    pub fn powf(&self, k: f64) -> Self {
        self.map(|x| x.powf(k))
    }

    pub fn max(&self, other: &Interval) -> Self {
        Self { lo: self.lo.max(other.lo), point: self.point.max(other.point), hi: self.hi.max(other.hi) }
    }

    pub fn min(&self, other: &Interval) -> Self {
        Self { lo: self.lo.min(other.lo), point: self.point.min(other.point), hi: self.hi.min(other.hi) }
    }

    /// `min(self / other, 1)`: increasing in `self`, decreasing in `other`.
    /// A zero numerator gives 0; a zero denominator otherwise gives 1.
    pub fn ratio_capped(&self, other: &Interval) -> Self {
        let div = |a: LogProb, b: LogProb| {
            if a.is_zero() {
                LogProb::ZERO
            } else {
                LogProb::from_lp((a.lp - b.lp).min(0.0))
            }
        };
        Self { lo: div(self.lo, other.hi), point: div(self.point, other.point), hi: div(self.hi, other.lo) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Point estimates satisfy the inequality.
    Holds,
    /// The lower bound of the left side clears the upper bound of the
    /// right side.
    HoldsWithCi,
    /// The upper bound of the left side is below the lower bound of the
    /// right side.
    Violated,
    /// Not violated, but the right side is astronomically small or rests
    /// on an input that may be zero.
    Vacuous,
    /// Point estimates disagree with the inequality but the intervals
    /// overlap.
    Unresolved,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::HoldsWithCi => "holds-with-ci",
            Status::Violated => "violated",
            Status::Vacuous => "vacuous",
            Status::Unresolved => "unresolved",
        }
    }
}

/// Status of `lhs >= rhs`.
pub fn classify(lhs: &Interval, rhs: &Interval, degenerate_input: bool) -> Status {
    let ge = |a: &LogProb, b: &LogProb| a.total_cmp(b) != Ordering::Less;
    if !ge(&lhs.hi, &rhs.lo) {
        Status::Violated
    } else if degenerate_input || (rhs.hi.lp < VACUOUS_LP && !rhs.hi.is_zero()) {
        Status::Vacuous
    } else if ge(&lhs.lo, &rhs.hi) {
        Status::HoldsWithCi
    } else if ge(&lhs.point, &rhs.point) {
        Status::Holds
    } else {
        Status::Unresolved
    }
}

/// One inequality `lhs >= rhs` evaluated on estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub schema: String,
    pub suite: String,
    pub id: String,
    pub relation: String,
    pub model: String,
    pub scales: BTreeMap<String, u32>,
    pub lhs: Interval,
    pub rhs: Interval,
    /// `lp_margin` of the lower bound of the left side against the upper
    /// bound of the right side.
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub margin: f64,
    /// `lp_margin` of the point values.
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub point_margin: f64,
    pub degenerate_input: bool,
    pub status: Status,
    /// The model does not satisfy the hypotheses of the inequality, so a
    /// failure is not a defect.
    pub expected_failure: bool,
}

impl VerdictRecord {
    pub fn new(
        suite: &str,
        id: &str,
        relation: impl Into<String>,
        model: &ModelSpec,
        scales: &[(&str, u32)],
        lhs: Interval,
        rhs: Interval,
        degenerate_input: bool,
    ) -> Self {
        Self {
            schema: VERDICT_SCHEMA.into(),
            suite: suite.into(),
            id: id.into(),
            relation: relation.into(),
            model: model.label(),
            scales: scales.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            margin: lp_margin(lhs.lo.lp, rhs.hi.lp),
            point_margin: lp_margin(lhs.point.lp, rhs.point.lp),
            degenerate_input,
            status: classify(&lhs, &rhs, degenerate_input),
            expected_failure: false,
        }
    }

    pub fn expecting_failure(mut self, expected: bool) -> Self {
        self.expected_failure = expected;
        self
    }

    /// Recomputes the status from the stored numbers.
    pub fn derived_status(&self) -> Status {
        classify(&self.lhs, &self.rhs, self.degenerate_input)
    }

    /// The point estimates contradict the inequality.
    pub fn fails(&self) -> bool {
        matches!(self.status, Status::Violated | Status::Unresolved)
    }
}

/// A pass/fail check that is not an inequality between two estimated
/// probabilities: exhaustive enumerations, property grids, z-tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub schema: String,
    pub suite: String,
    pub id: String,
    pub model: Option<String>,
    pub passed: bool,
    pub total: u64,
    pub failures: u64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub statistic: f64,
    pub detail: String,
    /// The check is expected to fail for this model.
    pub expected_failure: bool,
}

impl CheckRecord {
    pub fn new(suite: &str, id: &str, model: Option<&ModelSpec>, passed: bool, total: u64, failures: u64, statistic: f64, detail: impl Into<String>) -> Self {
        Self {
            schema: CHECK_SCHEMA.into(),
            suite: suite.into(),
            id: id.into(),
            model: model.map(|m| m.label()),
            passed,
            total,
            failures,
            statistic,
            detail: detail.into(),
            expected_failure: false,
        }
    }
}

/// One line of a results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Record {
    Estimate(Estimate),
    Verdict(VerdictRecord),
    Check(CheckRecord),
}

impl Record {
    /// Parses one JSONL line, dispatching on its `schema` field.
    pub fn from_json(line: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(line)?;
        let schema = v.get("schema").and_then(|s| s.as_str()).unwrap_or_default().to_string();
        Ok(match schema.as_str() {
            ESTIMATE_SCHEMA => Record::Estimate(serde_json::from_value(v)?),
            VERDICT_SCHEMA => Record::Verdict(serde_json::from_value(v)?),
            CHECK_SCHEMA => Record::Check(serde_json::from_value(v)?),
            other => return Err(crate::Error::Format(format!("unknown record schema {other:?}"))),
        })
    }
}

/// Everything one run produced, in the order it was produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub estimates: Vec<Estimate>,
    pub verdicts: Vec<VerdictRecord>,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    /// Estimates first, then verdicts, then checks, one JSON object per
    /// line.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for e in &self.estimates {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        for v in &self.verdicts {
            serde_json::to_writer(&mut w, v)?;
            writeln!(w)?;
        }
        for c in &self.checks {
            serde_json::to_writer(&mut w, c)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    /// Violated verdicts and failed checks. With `tolerate_expected`,
    /// records flagged as expected failures are not counted.
    pub fn unexpected_failures(&self, tolerate_expected: bool) -> usize {
        let counts = |expected: bool| !(tolerate_expected && expected);
        self.verdicts.iter().filter(|v| v.status == Status::Violated && counts(v.expected_failure)).count()
            + self.checks.iter().filter(|c| !c.passed && counts(c.expected_failure)).count()
    }

    /// Records flagged as expected failures whose failure showed up.
    pub fn observed_expected_failures(&self) -> usize {
        self.verdicts.iter().filter(|v| v.expected_failure && v.fails()).count()
            + self.checks.iter().filter(|c| c.expected_failure && !c.passed).count()
    }

    pub fn extend(&mut self, other: Report) {
        for e in other.estimates {
            self.push_estimate(e);
        }
        self.verdicts.extend(other.verdicts);
        self.checks.extend(other.checks);
    }

    fn push_estimate(&mut self, e: Estimate) {
        if !self.estimates.contains(&e) {
            self.estimates.push(e);
        }
    }

    /// Human-readable table of verdicts and checks.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let scales: Vec<String> = v.scales.iter().map(|(k, x)| format!("{k}={x}")).collect();
            out += &format!(
                "{:<14} {:<28} {:<16} lhs {:>24}  rhs {:>24}  margin {:>11.4e}  {}{}\n",
                v.suite,
                v.id,
                scales.join(","),
                format!("[{}, {}]", v.lhs.lo, v.lhs.hi),
                format!("[{}, {}]", v.rhs.lo, v.rhs.hi),
                v.margin,
                v.status.as_str(),
                if v.expected_failure { " (expected to fail)" } else { "" }
            );
        }
        for c in &self.checks {
            out += &format!(
                "{:<14} {:<28} {} {}/{} failures {}  {}{}\n",
                c.suite,
                c.id,
                if c.passed { "pass" } else { "FAIL" },
                c.total - c.failures,
                c.total,
                c.failures,
                c.detail,
                if c.expected_failure { " (expected to fail)" } else { "" }
            );
        }
        out
    }
}

/// An engine bound to one model, replicate count and seed, collecting
/// every estimate and verdict it produces.
pub struct Session<'a> {
    pub engine: &'a Engine,
    pub model: ModelSpec,
    pub replicates: u64,
    pub seed: u64,
    pub report: Report,
}

impl<'a> Session<'a> {
    pub fn new(engine: &'a Engine, model: ModelSpec, replicates: u64, seed: u64) -> Self {
        Self { engine, model, replicates, seed, report: Report::default() }
    }

    pub fn estimate(&mut self, q: &Quantity) -> Result<Estimate> {
        let model = self.model;
        self.estimate_under(&model, q)
    }

    pub fn estimate_under(&mut self, model: &ModelSpec, q: &Quantity) -> Result<Estimate> {
        let e = self.engine.estimate(model, q, self.replicates, self.seed)?;
        self.report.push_estimate(e.clone());
        Ok(e)
    }

    pub fn interval(&mut self, q: &Quantity) -> Result<Interval> {
        Ok(self.estimate(q)?.interval())
    }

    pub fn record(&mut self, v: VerdictRecord) -> VerdictRecord {
        self.report.verdicts.push(v.clone());
        v
    }

    pub fn check(&mut self, c: CheckRecord) -> CheckRecord {
        self.report.checks.push(c.clone());
        c
    }
}
