use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{SweepRow, Verdict};

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "mu_f",
    "mu1",
    "mu2",
    "mu3",
    "r1",
    "r2",
    "r3",
    "gap1",
    "gap2",
    "gap3",
    "diff_quotient",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format `{other}`"))),
        }
    }
}

/// Run parameters carried in JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub problem: String,
    /// The direction as given, e.g. `random:7` or `1,0`.
    pub direction_source: String,
    pub direction: Vec<f64>,
    pub t_values: Vec<f64>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a ReportMeta>,
    rows: &'a [SweepRow],
    verdicts: &'a [Verdict],
}

/// CSV with the columns of [`CSV_COLUMNS`] (verdicts are not part of the
/// table), or JSON with `rows` and `verdicts`. Output depends only on the
/// inputs.
///
/// ```
/// use minpert::harness::{emit_report, ReportFormat};
///
/// let csv = emit_report(&[], &[], ReportFormat::Csv);
/// assert_eq!(
///     String::from_utf8(csv).unwrap(),
///     "t,mu_f,mu1,mu2,mu3,r1,r2,r3,gap1,gap2,gap3,diff_quotient\n"
/// );
/// ```
pub fn emit_report(rows: &[SweepRow], verdicts: &[Verdict], format: ReportFormat) -> Vec<u8> {
    render(rows, verdicts, None, format)
}

pub fn emit_report_with_meta(
    rows: &[SweepRow],
    verdicts: &[Verdict],
    meta: &ReportMeta,
    format: ReportFormat,
) -> Vec<u8> {
    render(rows, verdicts, Some(meta), format)
}

fn render(rows: &[SweepRow], verdicts: &[Verdict], meta: Option<&ReportMeta>, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => csv(rows).into_bytes(),
        ReportFormat::Json => {
            let report = JsonReport { meta, rows, verdicts };
            let mut out = serde_json::to_vec_pretty(&report).expect("report values serialize");
            out.push(b'\n');
            out
        }
    }
}

fn csv(rows: &[SweepRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            Some(r.t),
            r.mu_f,
            r.mu1,
            r.mu2,
            r.mu3,
            r.r1,
            r.r2,
            r.r3,
            r.gap1,
            r.gap2,
            r.gap3,
            r.diff_quotient,
        ];
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if let Some(v) = cell {
                // 17 significant digits round-trip every f64.
                write!(out, "{v:.16e}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}
