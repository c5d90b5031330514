use fslab_core::norms::Family;
use fslab_core::{equivalence_probe, quasi_norm, GridFunction, NormVariant, SmoothnessParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{bracket, num, require, Assertion, CorpusSpec, Outcome, Table};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceMode {
    /// Inhomogeneous `(0, 1]` norm over the homogeneous `(0, ∞)` seminorm.
    Support,
    /// Norm with order `r` over the norm with order `r + 1`.
    Order,
    /// F norm against the B norms with `q` replaced by `min(p,q)` and
    /// `max(p,q)`; the ratio is the factor by which the sandwich fails.
    Sandwich,
}

fn default_growth() -> f64 {
    0.1
}

fn default_max_factor() -> f64 {
    4.0
}

/// Level stability of norm ratios on a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    #[serde(default)]
    pub corpus: CorpusSpec,
    pub params: Vec<SmoothnessParams>,
    pub levels: Vec<u32>,
    pub mode: EquivalenceMode,
    /// Later levels may exceed the bracket of the first by this fraction.
    #[serde(default = "default_growth")]
    pub growth: f64,
    /// Largest sandwich factor accepted.
    #[serde(default = "default_max_factor")]
    pub max_factor: f64,
}

impl EquivalenceConfig {
    pub fn validate(&self) -> Result<()> {
        require(!self.params.is_empty(), "params must not be empty")?;
        require(!self.levels.is_empty(), "levels must not be empty")?;
        require(self.growth >= 0.0, "growth must be nonnegative")?;
        require(self.max_factor >= 1.0, "max_factor must be at least 1")?;
        for params in &self.params {
            if self.mode == EquivalenceMode::Sandwich && params.family != Family::F {
                return Err(invalid("sandwich mode needs F-family parameters"));
            }
            if self.mode == EquivalenceMode::Order {
                params.with_order(params.r + 1)?;
            }
        }
        self.corpus.build(self.levels[0], 0)?;
        Ok(())
    }

    fn ratio(&self, f: &GridFunction, params: &SmoothnessParams) -> Result<Option<f64>> {
        let variant = NormVariant::Inhomogeneous01;
        let (num, den) = match self.mode {
            EquivalenceMode::Support => equivalence_probe(f, params)?,
            EquivalenceMode::Order => (
                quasi_norm(f, params, variant)?.total,
                quasi_norm(f, &params.with_order(params.r + 1)?, variant)?.total,
            ),
            EquivalenceMode::Sandwich => {
                let tl = quasi_norm(f, params, variant)?.total;
                let b = |q| -> Result<f64> {
                    let b = SmoothnessParams::new(Family::B, params.s, params.p, q, params.r)?;
                    Ok(quasi_norm(f, &b, variant)?.total)
                };
                let small_q = b(params.p.min(params.q))?;
                let large_q = b(params.p.max(params.q))?;
                if tl == 0.0 {
                    return Ok(None);
                }
                return Ok(Some((tl / small_q).max(large_q / tl).max(1.0)));
            }
        };
        Ok((den != 0.0).then(|| num / den))
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        let mut results = Vec::new();
        let mut assertions = Vec::new();
        let mut tables = Vec::new();
        let mut brackets = Table::new("brackets.csv", &["params", "level", "bracket"]);
        for (i, params) in self.params.iter().enumerate() {
            let mut ratios = Table::new(format!("equivalence_{i}.csv"), &["level", "member", "ratio"]);
            let mut per_level = Vec::new();
            for &level in &self.levels {
                let corpus = self.corpus.build(level, seed)?;
                let values = corpus
                    .par_iter()
                    .map(|f| self.ratio(f, params))
                    .collect::<Result<Vec<_>>>()?;
                for (member, v) in values.iter().enumerate() {
                    if let Some(v) = v {
                        ratios.push(vec![level.to_string(), member.to_string(), num(*v)]);
                    }
                }
                let present = values.iter().flatten().copied();
                let c = match self.mode {
                    EquivalenceMode::Sandwich => present.fold(1.0_f64, f64::max),
                    _ => bracket(present),
                };
                brackets.push(vec![i.to_string(), level.to_string(), num(c)]);
                per_level.push(json!({ "level": level, "bracket": c, "ratios": values }));
                match self.mode {
                    EquivalenceMode::Sandwich => assertions.push(Assertion::at_most(
                        format!("factor_{i}_level_{level}"),
                        c,
                        self.max_factor,
                    )),
                    _ => {
                        let first = per_level[0]["bracket"].as_f64().unwrap_or(f64::NAN);
                        if level != self.levels[0] {
                            assertions.push(Assertion::at_most(
                                format!("bracket_{i}_level_{level}"),
                                c,
                                (1.0 + self.growth) * first,
                            ));
                        } else {
                            assertions.push(Assertion::between(
                                format!("bracket_{i}_level_{level}_finite"),
                                c,
                                Some(1.0),
                                Some(f64::MAX),
                            ));
                        }
                    }
                }
            }
            tables.push(ratios);
            results.push(json!({ "params": params, "levels": per_level }));
        }
        tables.push(brackets);
        Ok(Outcome {
            results: json!(results),
            assertions,
            tables,
        })
    }
}
