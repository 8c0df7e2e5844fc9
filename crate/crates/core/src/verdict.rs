//! Outcomes of mechanical checks.

use std::fmt;

use serde::Serialize;

/// A concrete instance where a checked statement fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub check: String,
    /// Lexicographic sort key identifying the instance, e.g. `[p, s, k, l]`.
    pub key: Vec<i64>,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?}: {}", self.check, self.key, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// The hypotheses of the statement do not apply to this instance.
    Inapplicable { reason: String },
    Fail(Counterexample),
}

impl Verdict {
    pub fn inapplicable(reason: impl Into<String>) -> Self {
        Verdict::Inapplicable { reason: reason.into() }
    }

    pub fn fail(check: &str, key: Vec<i64>, detail: impl Into<String>) -> Self {
        Verdict::Fail(Counterexample {
            check: check.to_string(),
            key,
            detail: detail.into(),
        })
    }

    /// `Pass` when `ok`, otherwise a failure built lazily.
    pub fn check(ok: bool, check: &str, key: Vec<i64>, detail: impl FnOnce() -> String) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::fail(check, key, detail())
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

/// Aggregate of many verdicts, keeping the failure with the smallest key.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub inapplicable: u64,
    pub failed: u64,
    pub first_failure: Option<Counterexample>,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.passed += 1,
            Verdict::Inapplicable { .. } => self.inapplicable += 1,
            Verdict::Fail(c) => {
                self.failed += 1;
                let smaller = match &self.first_failure {
                    None => true,
                    Some(old) => c.key < old.key,
                };
                if smaller {
                    self.first_failure = Some(c);
                }
            }
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.passed += other.passed;
        self.inapplicable += other.inapplicable;
        self.failed += other.failed;
        if let Some(c) = other.first_failure {
            self.add_failure_only(c);
        }
        self
    }

    fn add_failure_only(&mut self, c: Counterexample) {
        let smaller = match &self.first_failure {
            None => true,
            Some(old) => c.key < old.key,
        };
        if smaller {
            self.first_failure = Some(c);
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

impl FromIterator<Verdict> for Tally {
    fn from_iter<I: IntoIterator<Item = Verdict>>(iter: I) -> Self {
        let mut t = Tally::default();
        for v in iter {
            t.add(v);
        }
        t
    }
}
