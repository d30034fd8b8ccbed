//! Report serialization: JSON, CSV, and plain-text table rendering for the
//! verification pipeline's outputs.

use primdiv::realcf::ConvergentVerdict;
use primdiv::verifier::{Conclusion, EvaluatedConvergent, RangeOutcome, VerificationReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PairDto {
    pub p: i64,
    pub q: i64,
    pub kind: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RangeDto {
    pub lo: u64,
    pub hi: u64,
    pub method: String,
    pub outcome: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ConvergentDto {
    pub k: u64,
    pub n: u64,
    pub dreq_log_int: i64,
    pub dact_log_1dp: f64,
    pub margin_ok: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportDto {
    pub pair: PairDto,
    pub height: f64,
    pub ranges: Vec<RangeDto>,
    pub exceptions_up_to_30: Vec<u64>,
    pub convergents: Vec<ConvergentDto>,
    pub conclusion: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// "-12.6" from tenths = -126, including the "-0.x" cases.
pub fn fmt_tenths(t: i64) -> String {
    let sign = if t < 0 { "-" } else { "" };
    let a = t.unsigned_abs();
    format!("{sign}{}.{}", a / 10, a % 10)
}

fn outcome_string(o: &RangeOutcome) -> String {
    match o {
        RangeOutcome::Pass => "pass".into(),
        RangeOutcome::Exceptions(v) => format!("exceptions at {v:?}"),
        RangeOutcome::Inconclusive(m) => format!("inconclusive: {m}"),
    }
}

pub fn conclusion_string(c: &Conclusion) -> String {
    match c {
        Conclusion::AllPrimitiveAboveThirty => "all-primitive-above-30".into(),
        Conclusion::ExceptionFound(n) => format!("exception-found: {n}"),
        Conclusion::Inconclusive(m) => format!("inconclusive: {m}"),
    }
}

fn convergent_dto(row: &EvaluatedConvergent) -> ConvergentDto {
    ConvergentDto {
        k: row.record.k,
        n: row.record.n,
        dreq_log_int: row.d_req_int.unwrap_or(i64::MIN),
        dact_log_1dp: row
            .d_act_tenths
            .map(|t| t as f64 / 10.0)
            .unwrap_or(f64::NAN),
        margin_ok: row.record.verdict == ConvergentVerdict::Refuted,
    }
}

pub fn report_dto(report: &VerificationReport, timestamp: Option<u64>) -> ReportDto {
    ReportDto {
        pair: PairDto {
            p: report.pair.p,
            q: report.pair.q,
            kind: format!("{:?}", report.pair.kind),
        },
        height: report.height.mid_f64(),
        ranges: report
            .ranges
            .iter()
            .map(|r| RangeDto {
                lo: r.lo,
                hi: r.hi,
                method: format!("{:?}", r.method),
                outcome: outcome_string(&r.outcome),
            })
            .collect(),
        exceptions_up_to_30: report.exceptions_up_to_30.clone(),
        convergents: report.convergent_rows.iter().map(convergent_dto).collect(),
        conclusion: conclusion_string(&report.conclusion),
        timestamp,
    }
}

pub const CONVERGENT_CSV_HEADER: &str = "k,n,dreq_log_trunc,dact_log_trunc";

pub fn convergent_csv(rows: &[EvaluatedConvergent]) -> String {
    let mut out = String::from(CONVERGENT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.record.k,
            r.record.n,
            r.d_req_int
                .map(|v| v.to_string())
                .unwrap_or_else(|| "?".into()),
            r.d_act_tenths.map(fmt_tenths).unwrap_or_else(|| "?".into()),
        ));
    }
    out
}

pub fn report_csv(report: &VerificationReport) -> String {
    convergent_csv(&report.convergent_rows)
}

pub fn report_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "pair (p, q) = ({}, {})  kind = {:?}  height = {:.6}\n",
        report.pair.p,
        report.pair.q,
        report.pair.kind,
        report.height.mid_f64()
    ));
    if !report.exceptions_up_to_30.is_empty() {
        out.push_str(&format!(
            "indices up to 30 without a primitive divisor: {:?}\n",
            report.exceptions_up_to_30
        ));
    }
    for r in &report.ranges {
        out.push_str(&format!(
            "  ({:>5}, {:>11}]  {:<16} {}\n",
            r.lo,
            r.hi,
            format!("{:?}", r.method),
            outcome_string(&r.outcome)
        ));
    }
    if !report.convergent_rows.is_empty() {
        out.push_str(&format!(
            "  {:>11} {:>12} {:>13} {:>9}\n",
            "k", "n", "log|d_req|", "log|d_act|"
        ));
        for r in &report.convergent_rows {
            out.push_str(&format!(
                "  {:>11} {:>12} {:>13} {:>9}\n",
                r.record.k,
                r.record.n,
                r.d_req_int
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "?".into()),
                r.d_act_tenths.map(fmt_tenths).unwrap_or_else(|| "?".into()),
            ));
        }
    }
    out.push_str(&format!(
        "conclusion: {}\n",
        conclusion_string(&report.conclusion)
    ));
    out
}

/// Rows of the n_q table grouped by equal cutoff, one row per run of
/// equal values.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct NqGroupDto {
    pub q_lo: i64,
    pub q_hi: i64,
    pub n_q: u64,
}

pub fn group_nq(rows: &[(i64, u64)]) -> Vec<NqGroupDto> {
    let mut out: Vec<NqGroupDto> = Vec::new();
    for &(q, nq) in rows {
        match out.last_mut() {
            Some(g) if g.n_q == nq && g.q_hi + 1 == q => g.q_hi = q,
            _ => out.push(NqGroupDto {
                q_lo: q,
                q_hi: q,
                n_q: nq,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenths_formatting() {
        assert_eq!(fmt_tenths(-126), "-12.6");
        assert_eq!(fmt_tenths(-5), "-0.5");
        assert_eq!(fmt_tenths(0), "0.0");
        assert_eq!(fmt_tenths(31), "3.1");
    }

    #[test]
    fn nq_grouping() {
        let rows = vec![
            (2i64, 1260u64),
            (3, 330),
            (9, 60),
            (10, 60),
            (11, 60),
            (12, 42),
        ];
        let grouped = group_nq(&rows);
        assert_eq!(grouped.len(), 4);
        assert_eq!(
            grouped[2],
            NqGroupDto {
                q_lo: 9,
                q_hi: 11,
                n_q: 60
            }
        );
    }
}
