// SPDX-License-Identifier: Apache-2.0

//! Pass/fail bookkeeping for the acceptance runner.
//!
//! Each criterion is recorded once and printed immediately as a single line:
//!
//! ```text
//! PASS  C1    nominal mss-otalg run: ...
//! FAIL  C3    divert-event timing: ...
//! ```
//!
//! [`Report::finish`] prints a tally and returns a failing exit code when any
//! criterion failed.

use std::process::ExitCode;
use std::time::Instant;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

/// Running collection of criterion outcomes.
#[derive(Debug)]
pub struct Report {
    checks: Vec<Check>,
    started: Instant,
}

impl Default for Report {
    fn default() -> Self {
        Self::new()
    }
}

impl Report {
    pub fn new() -> Self {
        Report {
            checks: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Records and prints one outcome. Returns `passed` for chaining.
    pub fn record(&mut self, id: &str, title: &str, passed: bool, detail: impl Into<String>) -> bool {
        let check = Check {
            id: id.to_owned(),
            title: title.to_owned(),
            passed,
            detail: detail.into(),
        };
        println!("{}", format_line(&check));
        self.checks.push(check);
        passed
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Prints the tally and converts it into a process exit code.
    pub fn finish(self) -> ExitCode {
        let failed = self.failures().count();
        println!(
            "acceptance: {} passed, {} failed, {:.1} s",
            self.checks.len() - failed,
            failed,
            self.started.elapsed().as_secs_f64()
        );
        if failed == 0 {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}

/// `PASS  C1    title: detail`.
pub fn format_line(c: &Check) -> String {
    let tag = if c.passed { "PASS" } else { "FAIL" };
    if c.detail.is_empty() {
        format!("{tag}  {:<5} {}", c.id, c.title)
    } else {
        format!("{tag}  {:<5} {}: {}", c.id, c.title, c.detail)
    }
}

/// `lo ≤ x ≤ hi`, false for NaN.
pub fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

/// `|x − reference| ≤ frac·|reference|`.
pub fn within_rel(x: f64, reference: f64, frac: f64) -> bool {
    (x - reference).abs() <= frac * reference.abs()
}
