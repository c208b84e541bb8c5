use serde::Serialize;

use crate::config::Config;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub check_id: String,
    pub paper_ref: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl Entry {
    /// NaN residuals never pass.
    pub fn new(check_id: &str, paper_ref: &str, residual: f64, tolerance: f64) -> Self {
        Entry {
            check_id: check_id.to_string(),
            paper_ref: paper_ref.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            runtime_ms: 0,
        }
    }
}

/// A place where the printed formula and the implemented one differ, with
/// the residual of each against the same oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolution {
    pub id: String,
    pub paper_ref: String,
    pub printed: String,
    pub adopted: String,
    pub printed_residual: f64,
    pub adopted_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub config: Config,
    pub entries: Vec<Entry>,
    pub summary: Summary,
    pub resolutions: Vec<Resolution>,
}

impl ResidualReport {
    pub fn new(config: Config, entries: Vec<Entry>, resolutions: Vec<Resolution>) -> Self {
        let passed = entries.iter().filter(|e| e.pass).count();
        let summary = Summary { total: entries.len(), passed, failed: entries.len() - passed };
        ResidualReport { config, entries, summary, resolutions }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per entry, for the terminal.
    pub fn table(&self) -> String {
        let width = self.entries.iter().map(|e| e.check_id.len()).max().unwrap_or(0);
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:<width$}  {}  {:.3e} <= {:.3e}\n",
                e.check_id,
                if e.pass { "PASS" } else { "FAIL" },
                e.residual,
                e.tolerance,
            ));
        }
        out.push_str(&format!(
            "{} checks, {} passed, {} failed\n",
            self.summary.total, self.summary.passed, self.summary.failed
        ));
        out
    }
}
