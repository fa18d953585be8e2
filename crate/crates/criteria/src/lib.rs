//! Bookkeeping for the acceptance run: each criterion prints exactly one
//! `PASS`/`FAIL` line, and the run exits nonzero if any criterion failed.

use std::time::{Duration, Instant};

pub struct Outcome {
    pub passed: bool,
    pub detail: String,
    /// Extra lines printed under the verdict.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }

    pub fn with_notes(mut self, notes: Vec<String>) -> Self {
        self.notes = notes;
        self
    }
}

struct Line {
    id: u32,
    passed: bool,
}

#[derive(Default)]
pub struct Report {
    lines: Vec<Line>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs one criterion. `budget` is a wall-clock limit that counts
    /// toward pass/fail.
    pub fn check(
        &mut self,
        id: u32,
        title: &str,
        budget: Option<Duration>,
        f: impl FnOnce() -> Outcome,
    ) {
        let start = Instant::now();
        let mut out = f();
        let elapsed = start.elapsed();
        if let Some(b) = budget {
            if elapsed > b {
                out.passed = false;
                out.detail = format!("{}; over time budget of {b:?}", out.detail);
            }
        }
        println!(
            "{} [{id:>2}] {title} ({:.3}s): {}",
            if out.passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
        for n in &out.notes {
            println!("     {n}");
        }
        self.lines.push(Line {
            id,
            passed: out.passed,
        });
    }

    pub fn failed(&self) -> Vec<u32> {
        self.lines
            .iter()
            .filter(|l| !l.passed)
            .map(|l| l.id)
            .collect()
    }

    /// Prints the summary and returns the process exit code.
    pub fn finish(&self) -> i32 {
        let failed = self.failed();
        println!(
            "acceptance: {}/{} criteria passed{}",
            self.lines.len() - failed.len(),
            self.lines.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {failed:?}")
            }
        );
        i32::from(!failed.is_empty())
    }
}

/// |a/b − 1|, or |a − b| when b is zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Digits a printed value carries: `significant` digits in base 10 starting
/// at its leading digit. Returns the unit in the last printed place.
pub fn last_place(printed: f64, significant: u32) -> f64 {
    let lead = printed.abs().log10().floor() as i32;
    10f64.powi(lead + 1 - significant as i32)
}

/// Whether `value` rounds or truncates to `printed` at the given number of
/// significant digits.
pub fn consistent_with_print(value: f64, printed: f64, significant: u32) -> bool {
    let ulp = last_place(printed, significant);
    let rounds = (value - printed).abs() <= 0.5 * ulp * (1.0 + 1e-12);
    let truncates = value >= printed && value < printed + ulp;
    rounds || truncates
}
