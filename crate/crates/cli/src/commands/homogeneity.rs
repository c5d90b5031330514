use fslab_core::dilation::predicted_homogeneity_slope;
use fslab_core::norms::Family;
use fslab_core::{dilate, homogeneity_experiment, LpExponent, SmoothnessParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{num, require, Assertion, FunctionSpec, Outcome, Table};
use crate::error::Result;

fn default_steps() -> u32 {
    4
}

fn default_slope_tolerance() -> f64 {
    0.1
}

fn default_max_residual() -> f64 {
    0.15
}

/// Cartesian grid of `(s, p, q)` for one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub family: Family,
    pub s: Vec<f64>,
    pub p: Vec<LpExponent>,
    pub q: Vec<LpExponent>,
    /// Difference order; `⌊s⌋ + 1` when absent.
    #[serde(default)]
    pub r: Option<usize>,
}

impl ParamGrid {
    pub fn expand(&self) -> Result<Vec<SmoothnessParams>> {
        let mut out = Vec::new();
        for &s in &self.s {
            for &p in &self.p {
                for &q in &self.q {
                    let r = self.r.unwrap_or_else(|| fslab_core::norms::default_order(s));
                    out.push(SmoothnessParams::new(self.family, s, p, q, r)?);
                }
            }
        }
        Ok(out)
    }
}

/// Log-log fit of the quasi-norm of `f0(λ·)` against `λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneityConfig {
    pub mother: FunctionSpec,
    pub grid: ParamGrid,
    #[serde(default = "default_steps")]
    pub steps: u32,
    /// Allowed `|fitted - predicted|` slope gap.
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
    /// Allowed largest residual of the fit, in natural-log units.
    #[serde(default = "default_max_residual")]
    pub max_residual: f64,
}

impl HomogeneityConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.steps >= 3, "steps must be at least 3")?;
        require(self.slope_tolerance >= 0.0, "slope_tolerance must be nonnegative")?;
        require(self.max_residual >= 0.0, "max_residual must be nonnegative")?;
        require(!self.grid.expand()?.is_empty(), "the parameter grid is empty")?;
        dilate(&self.mother.build()?, self.steps)?;
        Ok(())
    }

    pub fn run(&self) -> Result<Outcome> {
        let f0 = self.mother.build()?;
        let grid = self.grid.expand()?;
        let runs = grid
            .par_iter()
            .map(|params| homogeneity_experiment(&f0, params, self.steps))
            .collect::<std::result::Result<Vec<_>, _>>()?;

        let mut results = Vec::new();
        let mut assertions = Vec::new();
        let mut tables = Vec::new();
        let mut slopes = Table::new(
            "slopes.csv",
            &["s", "p", "q", "r", "slope", "predicted_slope", "max_residual"],
        );
        for (i, (params, run)) in grid.iter().zip(&runs).enumerate() {
            let predicted = predicted_homogeneity_slope(params, f0.dim());
            let mut points = Table::new(format!("homogeneity_{i}.csv"), &["lambda", "norm"]);
            for (l, n) in run.lambdas.iter().zip(&run.norms) {
                points.push(vec![num(*l), num(*n)]);
            }
            tables.push(points);
            slopes.push(vec![
                num(params.s),
                params.p.to_string(),
                params.q.to_string(),
                params.r.to_string(),
                num(run.fit.slope),
                num(predicted),
                num(run.fit.max_residual),
            ]);
            assertions.push(Assertion::at_most(
                format!("slope_{i}"),
                (run.fit.slope - predicted).abs(),
                self.slope_tolerance,
            ));
            assertions.push(Assertion::at_most(
                format!("residual_{i}"),
                run.fit.max_residual,
                self.max_residual,
            ));
            results.push(json!({ "params": params, "run": run }));
        }
        tables.push(slopes);
        Ok(Outcome {
            results: json!(results),
            assertions,
            tables,
        })
    }
}
