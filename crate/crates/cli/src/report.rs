use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Witness lines shown per check in text output; JSON carries all of them.
const TEXT_WITNESSES: usize = 8;

/// Run parameters that influence results or resource use.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub bound: Option<u64>,
    pub n_empirical: Option<u64>,
    pub pool_cap: Option<usize>,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witnesses: Vec<String>,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    pub fn with_witnesses(mut self, witnesses: Vec<String>) -> Self {
        self.witnesses = witnesses;
        self
    }
}

/// Wall-clock timings in microseconds; `checks_us[i]` belongs to `checks[i]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub total_us: u64,
    pub checks_us: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
    pub timings: Timings,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "tuv {}", self.command.join(" "));
        let mut cfg = vec![format!("jobs {}", c.jobs)];
        if let Some(b) = c.bound {
            cfg.push(format!("bound {b}"));
        }
        if let Some(n) = c.n_empirical {
            cfg.push(format!("empirical bound {n}"));
        }
        if let Some(p) = c.pool_cap {
            cfg.push(format!("pool cap {p}"));
        }
        let _ = writeln!(out, "  {}", cfg.join(", "));
        for (i, check) in self.checks.iter().enumerate() {
            let verdict = if check.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "  {verdict} {}: {}", check.name, check.detail);
            match self.timings.checks_us.get(i).copied().unwrap_or(0) {
                0 => out.push('\n'),
                us => {
                    let _ = writeln!(out, " [{:.2}s]", us as f64 / 1e6);
                }
            }
            for w in check.witnesses.iter().take(TEXT_WITNESSES) {
                let _ = writeln!(out, "       {w}");
            }
            if check.witnesses.len() > TEXT_WITNESSES {
                let _ = writeln!(out, "       ... {} more", check.witnesses.len() - TEXT_WITNESSES);
            }
        }
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "result: {verdict} [{:.2}s]", self.timings.total_us as f64 / 1e6);
        out
    }
}

/// Collects checks in order, timing each one.
pub struct ReportBuilder {
    command: Vec<String>,
    config: RunConfig,
    checks: Vec<CheckOutcome>,
    checks_us: Vec<u64>,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(command: Vec<String>, config: RunConfig) -> Self {
        ReportBuilder {
            command,
            config,
            checks: Vec::new(),
            checks_us: Vec::new(),
            start: Instant::now(),
        }
    }

    pub fn run<E>(&mut self, f: impl FnOnce() -> Result<Vec<CheckOutcome>, E>) -> Result<(), E> {
        let t = Instant::now();
        let outcomes = f()?;
        let us = t.elapsed().as_micros() as u64;
        for (i, o) in outcomes.into_iter().enumerate() {
            // a batch is timed as a whole, on its first entry
            self.checks.push(o);
            self.checks_us.push(if i == 0 { us } else { 0 });
        }
        Ok(())
    }

    pub fn finish(self) -> RunReport {
        RunReport {
            passed: self.checks.iter().all(|c| c.passed),
            command: self.command,
            config: self.config,
            checks: self.checks,
            timings: Timings {
                total_us: self.start.elapsed().as_micros() as u64,
                checks_us: self.checks_us,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut b = ReportBuilder::new(
            vec!["enumerate".into(), "1,1,1".into(), "3".into()],
            RunConfig {
                bound: Some(3),
                jobs: 2,
                ..Default::default()
            },
        );
        b.run::<()>(|| {
            Ok(vec![
                CheckOutcome::new("a", true, "ok"),
                CheckOutcome::new("b", false, "no").with_witnesses((0..20).map(|i| i.to_string()).collect()),
            ])
        })
        .unwrap();
        b.finish()
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.timings.checks_us.len(), r.checks.len());
    }

    #[test]
    fn verdict_and_text() {
        let r = sample();
        assert!(!r.passed);
        assert_eq!(r.exit_code(), 1);
        let text = r.to_text();
        assert!(text.contains("FAIL b: no"));
        assert!(text.contains("... 12 more"));
        assert!(text.ends_with("]\n"));
    }
}
