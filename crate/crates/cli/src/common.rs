//! Config pieces and result containers shared by the commands.

use std::str::FromStr;

use fslab_core::corpus::{random_corpus, standard_corpus, STANDARD_NAMES};
use fslab_core::{make_bump, GridFunction, Profile};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn smooth_bump() -> String {
    "smooth_bump".into()
}

fn ten() -> usize {
    10
}

/// One sampled function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default = "one")]
    pub dim: usize,
    pub level: u32,
    #[serde(default = "unit")]
    pub extent: f64,
    #[serde(default = "unit")]
    pub radius: f64,
    /// `zero`, a profile (`hat`, `smooth_bump`, `abs`, `polynomial(d)`) or a
    /// member of the standard corpus.
    #[serde(default = "smooth_bump")]
    pub shape: String,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<GridFunction> {
        if self.shape == "zero" {
            return Ok(GridFunction::zeros(self.dim, self.level, self.extent, self.radius)?);
        }
        if let Some(i) = STANDARD_NAMES.iter().position(|name| *name == self.shape) {
            let mut corpus = standard_corpus(self.dim, self.level, self.extent, self.radius)?;
            return Ok(corpus.swap_remove(i));
        }
        let profile = Profile::from_str(&self.shape)?;
        Ok(make_bump(self.dim, self.level, self.extent, self.radius, profile)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    #[default]
    Standard,
    Random,
}

/// A family of functions sharing one support ball; the level is chosen by
/// the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    #[serde(default)]
    pub kind: CorpusKind,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default = "unit")]
    pub extent: f64,
    #[serde(default = "unit")]
    pub radius: f64,
    /// Size of a random corpus; the standard corpus always has ten members.
    #[serde(default = "ten")]
    pub count: usize,
    /// Seed of a random corpus, defaulting to the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            kind: CorpusKind::Standard,
            dim: 1,
            extent: 1.0,
            radius: 1.0,
            count: 10,
            seed: None,
        }
    }
}

impl CorpusSpec {
    pub fn build(&self, level: u32, seed: u64) -> Result<Vec<GridFunction>> {
        self.build_with_radius(level, self.radius, seed)
    }

    pub fn build_with_radius(&self, level: u32, radius: f64, seed: u64) -> Result<Vec<GridFunction>> {
        let corpus = match self.kind {
            CorpusKind::Standard => standard_corpus(self.dim, level, self.extent, radius)?,
            CorpusKind::Random => {
                if self.count == 0 {
                    return Err(invalid("a random corpus needs count ≥ 1"));
                }
                random_corpus(self.dim, level, self.extent, radius, self.count, self.seed.unwrap_or(seed))?
            }
        };
        Ok(corpus)
    }
}

/// One declared check: `lower ≤ observed ≤ upper`. A non-finite observation
/// fails unless the bound itself is infinite on that side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl Assertion {
    pub fn between(name: impl Into<String>, observed: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = !observed.is_nan()
            && lower.is_none_or(|lo| observed >= lo)
            && upper.is_none_or(|hi| observed <= hi);
        Assertion {
            name: name.into(),
            passed,
            observed,
            lower,
            upper,
        }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, upper: f64) -> Self {
        Self::between(name, observed, None, Some(upper))
    }

    pub fn at_least(name: impl Into<String>, observed: f64, lower: f64) -> Self {
        Self::between(name, observed, Some(lower), None)
    }
}

/// A CSV file: header plus preformatted rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            file: file.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Everything one experiment produces before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub results: serde_json::Value,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
}

/// Shortest round-trip form, in exponent notation for extreme magnitudes.
pub fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `max(x, 1/x)` over positive finite ratios; `1` for an empty set.
pub fn bracket(ratios: impl IntoIterator<Item = f64>) -> f64 {
    ratios
        .into_iter()
        .fold(1.0_f64, |c, r| c.max(r).max(1.0 / r))
}

/// `max/min` of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub(crate) fn require(condition: bool, message: &str) -> Result<()> {
    if condition {
        Ok(())
    } else {
        Err(invalid(message))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0, -0.5, 1e-20, 3.0e17, 0.1 + 0.2, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Assertion::at_most("x", f64::NAN, f64::INFINITY).passed);
        assert!(!Assertion::at_least("x", f64::NAN, f64::NEG_INFINITY).passed);
        assert!(Assertion::between("x", 2.0, Some(1.0), Some(2.0)).passed);
        assert!(!Assertion::at_most("x", 2.0 + 1e-15, 2.0).passed);
    }

    #[test]
    fn brackets_and_spreads() {
        assert_eq!(bracket([0.5, 1.5]), 2.0);
        assert_eq!(bracket(std::iter::empty()), 1.0);
        assert_eq!(spread(&[2.0, 1.0, 4.0]), 4.0);
    }

    #[test]
    fn function_shapes() {
        let spec = |shape: &str| FunctionSpec {
            dim: 1,
            level: 4,
            extent: 1.0,
            radius: 1.0,
            shape: shape.into(),
        };
        assert!(spec("zero").build().unwrap().values().iter().all(|&v| v == 0.0));
        assert_eq!(spec("hat").build().unwrap().sample(&[0]), 1.0);
        assert_eq!(spec("polynomial(2)").build().unwrap().sample(&[8]), 0.25);
        assert!(spec("dipole").build().is_ok());
        assert!(spec("nonsense").build().is_err());
    }
}
