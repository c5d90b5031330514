use fslab_core::norms::Family;
use fslab_core::{modulus_curve, quasi_norm, NormVariant, SmoothnessParams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{num, require, Assertion, FunctionSpec, Outcome, Table};
use crate::error::Result;

fn default_variant() -> NormVariant {
    NormVariant::Inhomogeneous01
}

fn default_tolerance() -> f64 {
    1e-12
}

/// Quasi-norms of one function for several parameter sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub function: FunctionSpec,
    pub params: Vec<SmoothnessParams>,
    #[serde(default = "default_variant")]
    pub variant: NormVariant,
    /// Every total must match this, relative to `|expected|` (absolute when
    /// it is zero).
    #[serde(default)]
    pub expected_total: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl NormConfig {
    pub fn validate(&self) -> Result<()> {
        require(!self.params.is_empty(), "params must not be empty")?;
        require(self.tolerance >= 0.0, "tolerance must be nonnegative")?;
        self.function.build()?;
        Ok(())
    }

    pub fn run(&self) -> Result<Outcome> {
        let f = self.function.build()?;
        let mut results = Vec::new();
        let mut assertions = Vec::new();
        let mut tables = Vec::new();
        for (i, params) in self.params.iter().enumerate() {
            let report = quasi_norm(&f, params, self.variant)?;
            let mut scales = Table::new(format!("norm_{i}_scales.csv"), &["t", "contribution"]);
            for sc in &report.scales {
                scales.push(vec![num(sc.t), num(sc.contribution)]);
            }
            tables.push(scales);
            if params.family == Family::B {
                let curve = modulus_curve(&f, params.p, params.r, 0, f.level() as i32)?;
                let mut omega = Table::new(format!("norm_{i}_modulus.csv"), &["t", "omega"]);
                for (t, w) in curve.radii.iter().zip(&curve.values) {
                    omega.push(vec![num(*t), num(*w)]);
                }
                tables.push(omega);
            }
            assertions.push(Assertion::between(
                format!("total_{i}_finite"),
                report.total,
                Some(0.0),
                Some(f64::MAX),
            ));
            if let Some(expected) = self.expected_total {
                let gap = if expected == 0.0 {
                    report.total.abs()
                } else {
                    (report.total - expected).abs() / expected.abs()
                };
                assertions.push(Assertion::at_most(format!("total_{i}_matches"), gap, self.tolerance));
            }
            results.push(json!({ "params": params, "report": report }));
        }
        Ok(Outcome {
            results: json!(results),
            assertions,
            tables,
        })
    }
}
