//! Pass/fail bookkeeping for the acceptance gate, plus the sample
//! statistics the gate needs.

use std::fmt;
use std::process::ExitCode;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{:02}] {}: {}", self.id, self.title, self.detail)
    }
}

/// Collects one verdict per criterion and prints each as it arrives.
#[derive(Debug, Default)]
pub struct Gate {
    verdicts: Vec<Verdict>,
}

impl Gate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, id: u32, title: &'static str, passed: bool, detail: String) {
        let v = Verdict {
            id,
            title,
            passed,
            detail,
        };
        println!("{v}");
        self.verdicts.push(v);
    }

    /// A criterion whose run itself errored counts as failed.
    pub fn record_result(
        &mut self,
        id: u32,
        title: &'static str,
        outcome: Result<(bool, String), String>,
    ) {
        match outcome {
            Ok((passed, detail)) => self.record(id, title, passed, detail),
            Err(e) => self.record(id, title, false, format!("error: {e}")),
        }
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn failed(&self) -> Vec<u32> {
        self.verdicts
            .iter()
            .filter(|v| !v.passed)
            .map(|v| v.id)
            .collect()
    }

    pub fn finish(&self) -> ExitCode {
        let failed = self.failed();
        println!(
            "\n{} of {} criteria passed",
            self.verdicts.len() - failed.len(),
            self.verdicts.len()
        );
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            println!("failed: {failed:?}");
            ExitCode::FAILURE
        }
    }
}

/// Sample mean, unbiased sample variance, and the standard error of that
/// variance estimate from the fourth central moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub variance_se: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (m2, m4) = xs.iter().fold((0.0, 0.0), |(a, b), x| {
            let d = (x - mean).powi(2);
            (a + d, b + d * d)
        });
        let variance = m2 / (n - 1.0);
        let m2 = m2 / n;
        let m4 = m4 / n;
        Self {
            mean,
            variance,
            variance_se: ((m4 - m2 * m2) / n).sqrt(),
        }
    }
}
