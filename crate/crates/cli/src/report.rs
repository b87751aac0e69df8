//! Bypass-run reports: per-function breakdown, the conservation identity,
//! and the optional union-versus-hull comparison table.

use std::collections::BTreeMap;

use checklang_core::interp::CheckLedger;

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub total_checks: u64,
    pub bypassed: u64,
    pub false_positives: u64,
    pub per_function: BTreeMap<String, FunctionRow>,
    /// Functions carrying both checked and check-free paths.
    pub dual_functions: usize,
    pub inputs_run: usize,
    pub inputs_failed: usize,
}

#[derive(Clone, Debug, Default)]
pub struct FunctionRow {
    pub total: u64,
    pub bypassed: u64,
    pub false_positives: u64,
}

impl RunReport {
    pub fn from_ledger(ledger: &CheckLedger, dual_functions: usize) -> Self {
        let mut report = RunReport {
            total_checks: ledger.total_accesses(),
            bypassed: ledger.checks_bypassed,
            false_positives: ledger.false_positives,
            dual_functions,
            ..Default::default()
        };
        for (func, fl) in &ledger.per_function {
            if fl.total_accesses() == 0 {
                continue;
            }
            report.per_function.insert(
                func.clone(),
                FunctionRow {
                    total: fl.total_accesses(),
                    bypassed: fl.checks_bypassed,
                    false_positives: fl.false_positives,
                },
            );
        }
        report
    }

    pub fn ratio(&self) -> f64 {
        if self.total_checks == 0 {
            0.0
        } else {
            self.bypassed as f64 / self.total_checks as f64
        }
    }

    pub fn render_text(&self, other: Option<(&str, &RunReport)>) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "inputs run: {} ({} aborted)\n",
            self.inputs_run, self.inputs_failed
        ));
        out.push_str(&format!("total bounds checks: {}\n", self.total_checks));
        out.push_str(&format!(
            "bypassed: {} ({:.2}%)\n",
            self.bypassed,
            self.ratio() * 100.0
        ));
        out.push_str(&format!("false positives: {}\n", self.false_positives));
        let performed = self.total_checks - self.bypassed;
        out.push_str(&format!(
            "conservation: {performed} performed + {} bypassed = {} total\n",
            self.bypassed, self.total_checks
        ));
        out.push_str(&format!(
            "functions with dual paths: {}\n",
            self.dual_functions
        ));
        match other {
            None => {
                out.push_str(&format!(
                    "\n{:<24} {:>12} {:>12} {:>9} {:>6}\n",
                    "function", "checks", "bypassed", "ratio", "fp"
                ));
                for (func, row) in &self.per_function {
                    out.push_str(&format!(
                        "{:<24} {:>12} {:>12} {:>8.2}% {:>6}\n",
                        func,
                        row.total,
                        row.bypassed,
                        row.bypassed as f64 / row.total.max(1) as f64 * 100.0,
                        row.false_positives
                    ));
                }
            }
            Some((label, other_report)) => {
                out.push_str(&format!(
                    "\n{:<24} {:>12} {:>16} {:>16} {:>6}\n",
                    "function", "checks", "bypassed (this)", label, "fp"
                ));
                for (func, row) in &self.per_function {
                    let other_row = other_report.per_function.get(func);
                    out.push_str(&format!(
                        "{:<24} {:>12} {:>9} ({:>5.2}%) {:>9} ({:>5.2}%) {:>6}\n",
                        func,
                        row.total,
                        row.bypassed,
                        row.bypassed as f64 / row.total.max(1) as f64 * 100.0,
                        other_row.map(|r| r.bypassed).unwrap_or(0),
                        other_row
                            .map(|r| r.bypassed as f64 / r.total.max(1) as f64 * 100.0)
                            .unwrap_or(0.0),
                        row.false_positives
                    ));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let per_function: serde_json::Map<String, serde_json::Value> = self
            .per_function
            .iter()
            .map(|(func, row)| {
                (
                    func.clone(),
                    serde_json::json!({
                        "checks": row.total,
                        "bypassed": row.bypassed,
                        "ratio": row.bypassed as f64 / row.total.max(1) as f64,
                        "false_positives": row.false_positives,
                    }),
                )
            })
            .collect();
        serde_json::json!({
            "inputs_run": self.inputs_run,
            "inputs_failed": self.inputs_failed,
            "total_checks": self.total_checks,
            "bypassed": self.bypassed,
            "bypass_ratio": self.ratio(),
            "false_positives": self.false_positives,
            "checks_performed": self.total_checks - self.bypassed,
            "dual_functions": self.dual_functions,
            "per_function": per_function,
        })
    }
}
