use serde::{Deserialize, Serialize};

use super::config::Switch;
use crate::signals::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    #[default]
    Pass,
    Fail,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByModulation {
    pub modulation_on: Outcome,
    pub modulation_off: Outcome,
}

/// What the condition is expected to do. A check passes when the outcome
/// matches the expectation, so a declared `fail` documents a known
/// negative result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expect {
    Always(Outcome),
    ByModulation(ByModulation),
}

impl Default for Expect {
    fn default() -> Self {
        Expect::Always(Outcome::Pass)
    }
}

impl Expect {
    pub fn resolve(&self, modulation: Switch) -> Outcome {
        match *self {
            Expect::Always(o) => o,
            Expect::ByModulation(b) if modulation.is_on() => b.modulation_on,
            Expect::ByModulation(b) => b.modulation_off,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equals: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub expect: Expect,
}

impl Check {
    pub fn validate(&self) -> Result<(), String> {
        let set = [self.lt, self.gt, self.equals, self.approx].iter().filter(|x| x.is_some()).count();
        if set != 1 {
            return Err("exactly one of lt, gt, equals, approx is required".to_string());
        }
        if self.approx.is_some() {
            if self.rel_tol.is_none() && self.abs_tol.is_none() {
                return Err("approx needs rel_tol or abs_tol".to_string());
            }
        } else if self.rel_tol.is_some() || self.abs_tol.is_some() {
            return Err("rel_tol and abs_tol only apply to approx".to_string());
        }
        for t in [self.rel_tol, self.abs_tol].into_iter().flatten() {
            if !(t >= 0.0) {
                return Err(format!("tolerances must be non-negative, got {t}"));
            }
        }
        Ok(())
    }

    /// Whether `value` satisfies the comparison. NaN satisfies nothing.
    pub fn holds(&self, value: f64) -> bool {
        if let Some(x) = self.lt {
            value < x
        } else if let Some(x) = self.gt {
            value > x
        } else if let Some(x) = self.equals {
            value == x
        } else if let Some(x) = self.approx {
            let tol = self.abs_tol.unwrap_or(0.0).max(self.rel_tol.unwrap_or(0.0) * x.abs());
            (value - x).abs() <= tol
        } else {
            false
        }
    }

    pub fn describe(&self) -> String {
        if let Some(x) = self.lt {
            format!("{} < {x}", self.metric)
        } else if let Some(x) = self.gt {
            format!("{} > {x}", self.metric)
        } else if let Some(x) = self.equals {
            format!("{} == {x}", self.metric)
        } else {
            let mut tol = Vec::new();
            if let Some(r) = self.rel_tol {
                tol.push(format!("rel {r}"));
            }
            if let Some(a) = self.abs_tol {
                tol.push(format!("abs {a}"));
            }
            format!("{} ~ {} ({})", self.metric, self.approx.unwrap_or(f64::NAN), tol.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: Check,
    pub value: f64,
    pub expected: Outcome,
    pub held: bool,
}

impl CheckResult {
    pub fn evaluate(check: &Check, value: f64, modulation: Switch) -> Self {
        let expected = check.expect.resolve(modulation);
        Self { check: check.clone(), value, expected, held: check.holds(value) }
    }

    pub fn passed(&self) -> bool {
        self.held == (self.expected == Outcome::Pass)
    }

    pub fn line(&self) -> String {
        format!(
            "{}  {}  observed {}  condition {}  expected {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.check.describe(),
            fmt_f64(self.value),
            if self.held { "held" } else { "did not hold" },
            self.expected.as_str()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(json: &str) -> Check {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn comparisons() {
        assert!(check(r#"{"metric":"x","lt":1}"#).holds(0.5));
        assert!(!check(r#"{"metric":"x","gt":1}"#).holds(1.0));
        assert!(check(r#"{"metric":"x","approx":100,"rel_tol":0.01}"#).holds(100.9));
        assert!(!check(r#"{"metric":"x","approx":100,"abs_tol":0.5}"#).holds(100.9));
        assert!(!check(r#"{"metric":"x","lt":1}"#).holds(f64::NAN));
    }

    #[test]
    fn expected_failure_passes_when_condition_fails() {
        let c = check(r#"{"metric":"x","lt":0.01,"expect":{"modulation_on":"pass","modulation_off":"fail"}}"#);
        assert!(CheckResult::evaluate(&c, 0.7, Switch::Off).passed());
        assert!(!CheckResult::evaluate(&c, 0.7, Switch::On).passed());
        let always_fail = check(r#"{"metric":"x","lt":0.01,"expect":"fail"}"#);
        assert!(CheckResult::evaluate(&always_fail, 0.7, Switch::On).passed());
    }

    #[test]
    fn malformed_checks_are_rejected() {
        assert!(check(r#"{"metric":"x"}"#).validate().is_err());
        assert!(check(r#"{"metric":"x","lt":1,"gt":0}"#).validate().is_err());
        assert!(check(r#"{"metric":"x","approx":1}"#).validate().is_err());
        assert!(check(r#"{"metric":"x","lt":1,"rel_tol":0.1}"#).validate().is_err());
        assert!(serde_json::from_str::<Check>(r#"{"metric":"x","lt":1,"typo":2}"#).is_err());
    }
}
