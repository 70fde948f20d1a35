//! Brute-force oracles, window enumeration and the scenario runner.

mod input;
pub mod oracle;
mod scenarios;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ideals::{IntervalCert, MeagerWitness, Slalom};
use crate::ledger::Ledger;
use crate::words::{zigzag_value, Word};

pub use input::TreeInput;
pub use oracle::oracle_sum_in_cert;
pub use scenarios::{fakenull_inputs, run_scenario, scenarios, Params};

/// Largest number of words an exhaustive pass may visit.
pub const CEILING: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    /// Alphabet `{-B..B}`.
    #[serde(rename = "B")]
    pub b: u32,
    pub d: usize,
    pub budget: usize,
    /// Threshold for the cofinite quantifier.
    #[serde(rename = "N")]
    pub n: u64,
}

impl Window {
    pub fn new(b: u32, d: usize, budget: usize, n: u64) -> Self {
        Window { b, d, budget, n }
    }

    pub fn alphabet(&self) -> usize {
        2 * self.b as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 || self.d == 0 {
            return Err(Error::Invalid(format!(
                "window {} needs B >= 1 and d >= 1",
                self
            )));
        }
        Ok(())
    }

    /// Additionally requires the successor budget to fit the alphabet.
    pub fn validate_exhaustive(&self) -> Result<()> {
        self.validate()?;
        if self.budget > self.alphabet() {
            return Err(Error::Invalid(format!(
                "budget {} exceeds 2B+1 = {}",
                self.budget,
                self.alphabet()
            )));
        }
        Ok(())
    }

    /// `(2B+1)^d`, saturating.
    pub fn count(&self) -> u128 {
        (self.alphabet() as u128)
            .checked_pow(self.d as u32)
            .unwrap_or(u128::MAX)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.b, self.d, self.budget, self.n)
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Invalid(format!("window `{}` is not B,d,budget,N", s));
        if parts.len() != 4 {
            return Err(bad());
        }
        let w = Window {
            b: parts[0].parse().map_err(|_| bad())?,
            d: parts[1].parse().map_err(|_| bad())?,
            budget: parts[2].parse().map_err(|_| bad())?,
            n: parts[3].parse().map_err(|_| bad())?,
        };
        w.validate()?;
        Ok(w)
    }
}

/// Words of length `d` over `{-B..B}`, lexicographic in zigzag order.
pub struct WindowWords {
    digits: Vec<usize>,
    values: Vec<i64>,
    done: bool,
}

impl Iterator for WindowWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let w = Word::new(self.digits.iter().map(|&r| self.values[r]).collect());
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.values.len() {
                break;
            }
            self.digits[i] = 0;
        }
        Some(w)
    }
}

pub fn enumerate_window(w: &Window) -> Result<WindowWords> {
    w.validate()?;
    let count = w.count();
    if count > CEILING {
        return Err(Error::Ceiling {
            count,
            ceiling: CEILING,
        });
    }
    let values = (0..w.alphabet() as u128)
        .map(|r| zigzag_value(r).expect("small rank"))
        .collect();
    Ok(WindowWords {
        digits: vec![0; w.d],
        values,
        done: false,
    })
}

/// Certificate families the sum oracle understands, with their finite
/// horizon reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ideal", rename_all = "kebab-case")]
pub enum IdealCert {
    /// In the set when no `σ_m⌢f(σ_m)` with `N <= m <= upto` fits.
    Meager {
        witness: MeagerWitness,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upto: Option<u64>,
    },
    /// In the set when every checked complete interval differs from the center.
    Interval { cert: IntervalCert },
    /// In the set when `z↾n ∈ S_n` for some `n` in `[N, |z|]`.
    Slalom { slalom: Slalom },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// What the check ranged over.
    pub scope: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, scope: impl Into<String>, failure: Option<Value>) -> Self {
        CheckResult {
            name: name.into(),
            scope: scope.into(),
            pass: failure.is_none(),
            counterexample: failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    /// sha256 of the canonical JSON of scenario, window, seed and params.
    pub inputs_digest: String,
    pub seed: u64,
    pub window: Window,
    pub params: Value,
    pub checks: Vec<CheckResult>,
    #[serde(skip)]
    pub runtime: Duration,
}

pub fn inputs_digest(scenario: &str, w: &Window, seed: u64, params: &Value) -> String {
    let canon = json!({ "scenario": scenario, "window": w, "seed": seed, "params": params });
    hex::encode(Sha256::digest(
        serde_json::to_vec(&canon).expect("json value"),
    ))
}

impl ScenarioReport {
    pub fn new(scenario: &str, w: &Window, seed: u64, params: Value) -> Self {
        ScenarioReport {
            scenario: scenario.into(),
            inputs_digest: inputs_digest(scenario, w, seed, &params),
            seed,
            window: *w,
            params,
            checks: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    /// Copies a construction ledger, one check per entry.
    pub fn push_ledger(&mut self, prefix: &str, ledger: &Ledger) {
        for c in &ledger.0 {
            let failure = (!c.pass).then(|| json!({ "detail": c.detail }));
            self.push(CheckResult::new(
                format!("{}:{}", prefix, c.id),
                "construction ledger",
                failure,
            ));
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_words() {
        let w: Vec<Word> = enumerate_window(&Window::new(1, 1, 3, 0))
            .unwrap()
            .collect();
        assert_eq!(w, vec![Word::from([0]), Word::from([1]), Word::from([-1])]);
        let w: Vec<Word> = enumerate_window(&Window::new(1, 2, 3, 0))
            .unwrap()
            .collect();
        assert_eq!(w.len(), 9);
        assert_eq!(w[0], Word::zeros(2));
        assert_eq!(
            enumerate_window(&Window::new(2, 3, 3, 0)).unwrap().count(),
            125
        );
    }

    #[test]
    fn ceiling() {
        assert!(matches!(
            enumerate_window(&Window::new(2, 11, 3, 0)),
            Err(Error::Ceiling { .. })
        ));
    }

    #[test]
    fn parse_window() {
        let w: Window = "2,6,3,0".parse().unwrap();
        assert_eq!(w, Window::new(2, 6, 3, 0));
        assert!("2,6".parse::<Window>().is_err());
        assert!("0,6,3,0".parse::<Window>().is_err());
        assert!(Window::new(1, 3, 4, 0).validate_exhaustive().is_err());
    }
}
