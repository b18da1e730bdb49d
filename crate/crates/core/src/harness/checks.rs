use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::SweepRow;

pub const DUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    MuF,
    Mu1,
    Mu2,
    Mu3,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MuF => "mu_f",
            Self::Mu1 => "mu1",
            Self::Mu2 => "mu2",
            Self::Mu3 => "mu3",
        })
    }
}

/// The chain `μ₁ ~ μ_F`, `μ₂ ~ μ₁`, `μ₂ ~ μ_F`, `μ₃ ~ μ₂`.
pub const ASYMPTOTIC_PAIRS: [(Quantity, Quantity); 4] = [
    (Quantity::Mu1, Quantity::MuF),
    (Quantity::Mu2, Quantity::Mu1),
    (Quantity::Mu2, Quantity::MuF),
    (Quantity::Mu3, Quantity::Mu2),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Duality,
    Asymptotic,
    Differential,
    Lipschitz,
}

impl Check {
    pub const ALL: [Check; 4] = [Self::Duality, Self::Asymptotic, Self::Differential, Self::Lipschitz];
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "duality" => Ok(Self::Duality),
            "asymptotic" => Ok(Self::Asymptotic),
            "differential" => Ok(Self::Differential),
            "lipschitz" => Ok(Self::Lipschitz),
            other => Err(Error::InvalidArgument(format!(
                "unknown check `{other}` (expected duality, asymptotic, differential or lipschitz)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Asymptotic,
    DifferentialOnly,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Asymptotic => "asymptotic",
            Self::DifferentialOnly => "differential-only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check_name: String,
    pub status: Status,
    /// The checked statistic at the smallest decade (or over all rows for
    /// non-asymptotic checks). NaN when nothing was measured.
    #[serde(with = "nan_as_null")]
    pub worst_value: f64,
    #[serde(with = "nan_as_null")]
    pub threshold: f64,
    pub regime: Option<Regime>,
    /// Whether the decade maxima never increase by more than the slack.
    pub monotone: bool,
    /// Maximum of the statistic in each decade, largest `t` first.
    pub decade_max: Vec<(i32, f64)>,
    pub note: Option<String>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    fn simple(name: String, worst: f64, threshold: f64) -> Self {
        Self {
            check_name: name,
            status: if worst <= threshold { Status::Pass } else { Status::Fail },
            worst_value: worst,
            threshold,
            regime: None,
            monotone: true,
            decade_max: Vec::new(),
            note: None,
        }
    }

    fn not_applicable(name: String, note: &str) -> Self {
        Self {
            check_name: name,
            status: Status::NotApplicable,
            worst_value: f64::NAN,
            threshold: f64::NAN,
            regime: None,
            monotone: true,
            decade_max: Vec::new(),
            note: Some(note.to_string()),
        }
    }

    fn failed_with(name: String, err: &Error) -> Self {
        Self {
            check_name: name,
            status: Status::Fail,
            worst_value: f64::NAN,
            threshold: f64::NAN,
            regime: None,
            monotone: false,
            decade_max: Vec::new(),
            note: Some(err.to_string()),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check_name, self.status)?;
        if self.status != Status::NotApplicable {
            write!(f, " (worst {:.3e}, threshold {:.3e}", self.worst_value, self.threshold)?;
            if !self.monotone {
                f.write_str(", not decreasing")?;
            }
            f.write_str(")")?;
        }
        if let Some(regime) = self.regime {
            write!(f, " regime {regime}")?;
        }
        if let Some(note) = &self.note {
            write!(f, " [{note}]")?;
        }
        Ok(())
    }
}

/// JSON has no NaN; write it as `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Bound on the statistic in the smallest decade.
    pub eps_final: f64,
    /// Allowed increase of a decade maximum over the previous one.
    pub slack: f64,
    /// Extra allowance of `rounding_ulps·ε/t` on that increase, where `t` is
    /// the smallest in the decade. Quotients such as `|μ₃ - μ₂|/t` carry
    /// absolute rounding errors of a few ulps divided by `t`.
    pub rounding_ulps: f64,
    pub min_decades: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            eps_final: 1e-2,
            slack: 1e-12,
            rounding_ulps: 64.0,
            min_decades: 3,
        }
    }
}

/// `k` such that `t ∈ (10^-(k+1), 10^-k]`, robust to rounding in `t`.
pub fn decade_of(t: f64) -> i32 {
    (-t.log10() + 1e-9).floor() as i32
}

struct DecadeSummary {
    maxima: Vec<(i32, f64)>,
    monotone: bool,
}

fn summarize(samples: impl Iterator<Item = (f64, f64)>, cfg: &CheckConfig) -> Result<DecadeSummary> {
    // decade -> (max statistic, smallest t)
    let mut by_decade: BTreeMap<i32, (f64, f64)> = BTreeMap::new();
    for (t, v) in samples {
        let entry = by_decade.entry(decade_of(t)).or_insert((0.0, t));
        // NaN statistics must surface, not vanish in `max`.
        entry.0 = if v.is_nan() || entry.0.is_nan() {
            f64::NAN
        } else {
            entry.0.max(v)
        };
        entry.1 = entry.1.min(t);
    }
    if by_decade.len() < cfg.min_decades {
        return Err(Error::InsufficientData(format!(
            "{} decade(s) with data, need {}",
            by_decade.len(),
            cfg.min_decades
        )));
    }
    let decades: Vec<(i32, (f64, f64))> = by_decade.into_iter().collect();
    let monotone = decades.windows(2).all(|w| {
        let (prev, (next, t_min)) = (w[0].1 .0, w[1].1);
        next <= prev + cfg.slack + cfg.rounding_ulps * f64::EPSILON / t_min
    });
    let maxima = decades.into_iter().map(|(k, (v, _))| (k, v)).collect();
    Ok(DecadeSummary { maxima, monotone })
}

fn squeeze_verdict(name: String, summary: DecadeSummary, cfg: &CheckConfig) -> Verdict {
    let worst = summary.maxima.last().map_or(f64::NAN, |d| d.1);
    let pass = summary.monotone && worst <= cfg.eps_final;
    Verdict {
        check_name: name,
        status: if pass { Status::Pass } else { Status::Fail },
        worst_value: worst,
        threshold: cfg.eps_final,
        regime: None,
        monotone: summary.monotone,
        decade_max: summary.maxima,
        note: None,
    }
}

/// Squeeze test for `a / b → 1`: `|a/b - 1|` must fall below `eps_final` in
/// the smallest decade and its decade maxima must not increase.
pub fn check_asymptotic_equality(rows: &[SweepRow], pair: (Quantity, Quantity), cfg: &CheckConfig) -> Result<Verdict> {
    let (a, b) = pair;
    let samples = rows.iter().filter_map(|r| match (r.get(a), r.get(b)) {
        (Some(va), Some(vb)) if va != 0.0 && vb != 0.0 => Some((r.t, (va / vb - 1.0).abs())),
        _ => None,
    });
    let summary = summarize(samples, cfg)?;
    Ok(squeeze_verdict(format!("asymptotic({a},{b})"), summary, cfg))
}

/// Tests `|μ₃ - μ₂| / ‖x - x₀‖ → 0`. The regime is asymptotic when `h6`
/// holds and the ratio `μ₃/μ₂` passes the squeeze test as well.
pub fn check_differential_equivalence(rows: &[SweepRow], h6: bool, cfg: &CheckConfig) -> Result<Verdict> {
    let samples = rows.iter().filter_map(|r| r.diff_quotient.map(|q| (r.t, q)));
    let summary = summarize(samples, cfg)?;
    let mut verdict = squeeze_verdict("differential(mu3,mu2)".into(), summary, cfg);
    let ratio_ok = h6
        && check_asymptotic_equality(rows, (Quantity::Mu3, Quantity::Mu2), cfg)
            .map(|v| v.pass())
            .unwrap_or(false);
    verdict.regime = Some(if ratio_ok {
        Regime::Asymptotic
    } else {
        Regime::DifferentialOnly
    });
    Ok(verdict)
}

/// `max μ_F / t` over the rows that carry `μ_F`.
pub fn estimate_lipschitz(rows: &[SweepRow]) -> Result<f64> {
    let slopes: Vec<f64> = rows.iter().filter_map(|r| r.mu_f.map(|m| m / r.t)).collect();
    if slopes.is_empty() {
        return Err(Error::InsufficientData("no row carries mu_f".into()));
    }
    let l = slopes.iter().copied().fold(0.0, f64::max);
    if !l.is_finite() {
        return Err(Error::NonFinite("Lipschitz estimate"));
    }
    Ok(l)
}

/// `μ_F / t` must stay within twice its median over the sweep.
pub fn check_lipschitz(rows: &[SweepRow]) -> Result<Verdict> {
    let mut slopes: Vec<f64> = rows.iter().filter_map(|r| r.mu_f.map(|m| m / r.t)).collect();
    let l = estimate_lipschitz(rows)?;
    slopes.sort_by(f64::total_cmp);
    let mid = slopes.len() / 2;
    let median = if slopes.len() % 2 == 1 {
        slopes[mid]
    } else {
        0.5 * (slopes[mid - 1] + slopes[mid])
    };
    let mut verdict = Verdict::simple("lipschitz".into(), l, 2.0 * median);
    verdict.note = Some(format!("L = {l:.6e}"));
    Ok(verdict)
}

/// All duality gaps must be at most [`DUALITY_TOL`].
pub fn check_duality(rows: &[SweepRow]) -> Result<Verdict> {
    let gaps: Vec<f64> = rows.iter().flat_map(|r| [r.gap1, r.gap2, r.gap3]).flatten().collect();
    if gaps.is_empty() {
        return Err(Error::InsufficientData("no duality gaps recorded".into()));
    }
    let worst = gaps
        .iter()
        .copied()
        .fold(0.0, |m: f64, g| if g.is_nan() { f64::NAN } else { m.max(g) });
    Ok(Verdict::simple("duality".into(), worst, DUALITY_TOL))
}

/// Renders the requested checks in a fixed order. Checks that need `μ_F`
/// are not applicable without it; so is the `(μ₃, μ₂)` squeeze when `J₀`
/// is not one-to-one.
pub fn run_checks(rows: &[SweepRow], checks: &[Check], h6: bool, cfg: &CheckConfig) -> Vec<Verdict> {
    let has_mu_f = rows.iter().any(|r| r.mu_f.is_some());
    let mut out = Vec::new();
    for check in Check::ALL.into_iter().filter(|c| checks.contains(c)) {
        match check {
            Check::Duality => {
                out.push(check_duality(rows).unwrap_or_else(|e| Verdict::failed_with("duality".into(), &e)))
            }
            Check::Asymptotic => {
                for (a, b) in ASYMPTOTIC_PAIRS {
                    let name = format!("asymptotic({a},{b})");
                    let needs_mu_f = a == Quantity::MuF || b == Quantity::MuF;
                    let verdict = if needs_mu_f && !has_mu_f {
                        Verdict::not_applicable(name, "mu_f not computed")
                    } else if (a, b) == (Quantity::Mu3, Quantity::Mu2) && !h6 {
                        Verdict::not_applicable(name, "J0 is not one-to-one")
                    } else {
                        check_asymptotic_equality(rows, (a, b), cfg).unwrap_or_else(|e| Verdict::failed_with(name, &e))
                    };
                    out.push(verdict);
                }
            }
            Check::Differential => out.push(
                check_differential_equivalence(rows, h6, cfg)
                    .unwrap_or_else(|e| Verdict::failed_with("differential(mu3,mu2)".into(), &e)),
            ),
            Check::Lipschitz => out.push(if has_mu_f {
                check_lipschitz(rows).unwrap_or_else(|e| Verdict::failed_with("lipschitz".into(), &e))
            } else {
                Verdict::not_applicable("lipschitz".into(), "mu_f not computed")
            }),
        }
    }
    out
}
