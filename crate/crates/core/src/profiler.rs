//! Synthetic check-cost accounting and hotspot selection.
//!
//! Desk-scale interpreter runs are far too fast for wall-clock profiling,
//! so per-function costs are synthesized from the ledger: plain execution
//! time is statements × per-statement cost, and the checked variant adds
//! checks × per-check cost. Only the cost *ratio* matters for hotspot
//! selection; the defaults keep the measured proportion between a full
//! bounds check and a region query. All arithmetic is exact rational so
//! the overhead fractions sum to exactly one.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::interp::CheckLedger;

/// Default per-check cost: 0.035 cost units.
pub fn default_per_check_cost() -> BigRational {
    BigRational::new(BigInt::from(35), BigInt::from(1000))
}

/// Default per-statement cost: 0.0019 cost units.
pub fn default_per_stmt_cost() -> BigRational {
    BigRational::new(BigInt::from(19), BigInt::from(10000))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProfilerError {
    NegativeCost,
}

impl fmt::Display for ProfilerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfilerError::NegativeCost => write!(f, "cost constants must be nonnegative"),
        }
    }
}

/// Synthetic cost of one function: execution time without checks, with
/// checks, and the check count that separates them.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionCost {
    pub func: String,
    pub t_plain: BigRational,
    pub t_checked: BigRational,
    pub checks: u64,
}

impl FunctionCost {
    pub fn overhead(&self) -> BigRational {
        &self.t_checked - &self.t_plain
    }
}

/// Build per-function costs from a full-check ledger: `t_plain` is
/// statements × per-statement cost and `t_checked` adds checks × per-check
/// cost (bypassed checks count as checks the oracle would have run).
pub fn synthetic_cost_model(
    ledger: &CheckLedger,
    per_check_cost: &BigRational,
    per_stmt_cost: &BigRational,
) -> Result<Vec<FunctionCost>, ProfilerError> {
    if per_check_cost.is_negative() || per_stmt_cost.is_negative() {
        return Err(ProfilerError::NegativeCost);
    }
    let mut costs = Vec::new();
    for (name, fl) in &ledger.per_function {
        let checks = fl.total_accesses();
        let t_plain = per_stmt_cost * BigRational::from(BigInt::from(fl.statements));
        let t_checked = &t_plain + per_check_cost * BigRational::from(BigInt::from(checks));
        costs.push(FunctionCost {
            func: name.clone(),
            t_plain,
            t_checked,
            checks,
        });
    }
    Ok(costs)
}

/// One row of the hotspot report.
#[derive(Clone, Debug, PartialEq)]
pub struct HotspotRow {
    pub func: String,
    pub t_plain: BigRational,
    pub t_checked: BigRational,
    /// Fraction of the total check overhead attributed to this function.
    pub overhead_fraction: BigRational,
    pub selected: bool,
}

/// Ranked per-function overhead breakdown with threshold selection.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HotspotReport {
    /// Rows ranked by descending overhead fraction (ties by name).
    pub rows: Vec<HotspotRow>,
    pub threshold: BigRational,
    /// Set when the total overhead was zero and nothing was selected.
    pub note: Option<String>,
}

impl HotspotReport {
    pub fn selected(&self) -> impl Iterator<Item = &HotspotRow> {
        self.rows.iter().filter(|r| r.selected)
    }
}

/// Compute each function's share of the total bounds-check overhead,
/// `O_f = (t̂_f − t_f) / (T̂ − T)`, rank descending, and select every
/// function at or above the threshold (default 0.05).
pub fn overhead_breakdown(costs: &[FunctionCost], threshold: &BigRational) -> HotspotReport {
    let total_overhead: BigRational = costs
        .iter()
        .map(FunctionCost::overhead)
        .fold(BigRational::zero(), |acc, o| acc + o);
    if total_overhead.is_zero() {
        return HotspotReport {
            rows: Vec::new(),
            threshold: threshold.clone(),
            note: Some("total overhead is zero; nothing to select".to_string()),
        };
    }
    let mut rows: Vec<HotspotRow> = costs
        .iter()
        .map(|c| {
            let fraction = c.overhead() / &total_overhead;
            HotspotRow {
                func: c.func.clone(),
                t_plain: c.t_plain.clone(),
                t_checked: c.t_checked.clone(),
                selected: fraction >= *threshold,
                overhead_fraction: fraction,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.overhead_fraction
            .cmp(&a.overhead_fraction)
            .then_with(|| a.func.cmp(&b.func))
    });
    HotspotReport {
        rows,
        threshold: threshold.clone(),
        note: None,
    }
}

/// Parse a decimal cost string ("0.035", "12", "7/2") into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.trim_start().starts_with('-');
        let int: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        let frac: BigInt = frac_part.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let magnitude = int.abs() * &scale + frac;
        let signed = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(signed, scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from(n))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Percentage with two decimals, computed in exact arithmetic and rounded
/// only at the formatting step.
pub fn format_percent(r: &BigRational) -> String {
    let scaled = r * BigRational::from(BigInt::from(10000));
    let rounded = scaled.round();
    let hundredths = rounded.to_integer();
    let whole = &hundredths / 100;
    let frac = (&hundredths % BigInt::from(100)).abs();
    alloc::format!("{whole}.{frac:02}%")
}
