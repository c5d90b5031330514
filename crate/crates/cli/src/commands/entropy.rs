use fslab_core::seqspace::{
    check_embedding,
    entropy_calculus_check, entropy_estimates, entropy_rate_fit, predicted_entropy_slope,
    tiny_calculus_suite, CoverOptions, SeqSpaceParams, MAX_CLOUD,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{num, require, Assertion, Outcome, Table};
use crate::error::{invalid, Result};

fn default_cloud() -> usize {
    512
}

fn default_slack() -> f64 {
    2.0
}

fn default_pairs() -> Vec<(u32, u32)> {
    vec![(1, 1), (1, 2), (2, 1), (2, 2), (2, 3)]
}

/// Additivity and multiplicativity on the built-in tiny instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalculusConfig {
    #[serde(default = "default_pairs")]
    pub pairs: Vec<(u32, u32)>,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_cloud")]
    pub cloud_size: usize,
}

/// Entropy numbers of `id: src → dst`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub src: SeqSpaceParams,
    pub dst: SeqSpaceParams,
    /// Ascending entropy indices.
    pub ks: Vec<u32>,
    #[serde(default = "default_cloud")]
    pub cloud_size: usize,
    /// One run per seed; the run seed when absent.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub force_greedy: bool,
    /// Accepted range of the fitted log-log slope.
    #[serde(default)]
    pub slope_range: Option<[f64; 2]>,
    /// Relative tolerance of the greedy cover against the closed form;
    /// one-coordinate spaces only.
    #[serde(default)]
    pub exact_tolerance: Option<f64>,
    #[serde(default)]
    pub calculus: Option<CalculusConfig>,
}

impl EntropyConfig {
    fn wants_fit(&self) -> bool {
        self.ks.len() >= 4 && self.src.levels() > 1
    }

    pub fn validate(&self) -> Result<()> {
        require(!self.ks.is_empty(), "ks must not be empty")?;
        require(
            self.ks.windows(2).all(|w| w[0] < w[1]) && self.ks[0] >= 1,
            "ks must be ascending and at least 1",
        )?;
        require(self.cloud_size <= MAX_CLOUD, "cloud_size exceeds the supported maximum")?;
        let last = *self.ks.last().unwrap();
        require(
            last <= 20 && self.cloud_size >= 1usize << (last - 1),
            "cloud_size must be at least 2^(k-1) for the largest k",
        )?;
        if self.slope_range.is_some() && !self.wants_fit() {
            return Err(invalid(
                "slope_range needs at least 4 indices and a source space with several levels",
            ));
        }
        if let Some([lo, hi]) = self.slope_range {
            require(lo <= hi, "slope_range must be [low, high]")?;
        }
        if self.exact_tolerance.is_some() {
            require(
                self.src.dimension() == 1 && self.dst.dimension() == 1,
                "exact_tolerance applies to one-coordinate spaces only",
            )?;
        }
        if let Some(c) = &self.calculus {
            require(!c.pairs.is_empty(), "calculus pairs must not be empty")?;
            require(c.pairs.iter().all(|&(j, k)| j >= 1 && k >= 1), "calculus indices start at 1")?;
            let top = c.pairs.iter().map(|&(j, k)| j + k - 1).max().unwrap_or(1);
            require(
                top <= 20 && c.cloud_size >= 1usize << (top - 1) && c.cloud_size <= MAX_CLOUD,
                "calculus cloud_size does not cover the largest index",
            )?;
            require(c.slack >= 1.0, "calculus slack must be at least 1")?;
        }
        check_embedding(&self.src, &self.dst)?;
        Ok(())
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        let seeds = self.seeds.clone().unwrap_or_else(|| vec![seed]);
        let mut results = Vec::new();
        let mut assertions = Vec::new();
        let mut tables = Vec::new();
        let predicted = predicted_entropy_slope(&self.src, &self.dst);
        for &s in &seeds {
            let options = CoverOptions {
                cloud_size: self.cloud_size,
                seed: s,
                force_greedy: self.force_greedy,
            };
            let (estimates, fit) = if self.wants_fit() {
                let run = entropy_rate_fit(&self.src, &self.dst, &self.ks, options)?;
                (run.estimates, Some(run.fit))
            } else {
                (entropy_estimates(&self.src, &self.dst, &self.ks, options)?, None)
            };
            let mut table = Table::new(format!("entropy_seed{s}.csv"), &["k", "e_k"]);
            for e in &estimates {
                table.push(vec![e.k.to_string(), num(e.value)]);
            }
            tables.push(table);
            let rise = estimates
                .windows(2)
                .map(|w| w[1].value - w[0].value)
                .fold(f64::NEG_INFINITY, f64::max);
            if estimates.len() > 1 {
                assertions.push(Assertion::at_most(format!("monotone_seed{s}"), rise, 0.0));
            }
            let slope = fit.as_ref().map(|f| f.slope);
            if let (Some([lo, hi]), Some(slope)) = (self.slope_range, slope) {
                assertions.push(Assertion::between(format!("slope_seed{s}"), slope, Some(lo), Some(hi)));
            }
            results.push(json!({
                "manifest": {
                    "src": self.src,
                    "dst": self.dst,
                    "k_range": [self.ks[0], self.ks[self.ks.len() - 1]],
                    "cloud_size": self.cloud_size,
                    "seed": s,
                    "slope": slope,
                    "predicted_slope": predicted,
                },
                "fit": fit,
                "estimates": estimates,
            }));
        }

        let mut extra = serde_json::Map::new();
        if let Some(tol) = self.exact_tolerance {
            let mut table = Table::new("entropy_exact.csv", &["seed", "k", "exact", "greedy"]);
            let mut worst = 0.0_f64;
            for &s in &seeds {
                let exact = entropy_estimates(&self.src, &self.dst, &self.ks, CoverOptions::new(self.cloud_size, s))?;
                let options = CoverOptions {
                    force_greedy: true,
                    ..CoverOptions::new(self.cloud_size, s)
                };
                let greedy = entropy_estimates(&self.src, &self.dst, &self.ks, options)?;
                for (a, b) in exact.iter().zip(&greedy) {
                    table.push(vec![s.to_string(), a.k.to_string(), num(a.value), num(b.value)]);
                    worst = worst.max((b.value - a.value).abs() / a.value);
                }
            }
            assertions.push(Assertion::at_most("greedy_matches_exact", worst, tol));
            extra.insert("greedy_max_relative_gap".into(), json!(worst));
            tables.push(table);
        }
        if let Some(c) = &self.calculus {
            let mut table = Table::new(
                "calculus.csv",
                &["instance", "rule", "j", "k", "lhs", "rhs", "holds"],
            );
            let mut checks = Vec::new();
            for instance in tiny_calculus_suite()? {
                let found = entropy_calculus_check(
                    &instance,
                    &c.pairs,
                    CoverOptions::new(c.cloud_size, seeds[0]),
                    c.slack,
                )?;
                let worst = found
                    .iter()
                    .map(|x| if x.rhs > 0.0 { x.lhs / x.rhs } else if x.lhs > 0.0 { f64::INFINITY } else { 0.0 })
                    .fold(0.0_f64, f64::max);
                assertions.push(Assertion::at_most(format!("calculus_{}", instance.name), worst, 1.0));
                for x in &found {
                    table.push(vec![
                        x.instance.clone(),
                        serde_json::to_value(x.rule)?.as_str().unwrap_or_default().to_string(),
                        x.j.to_string(),
                        x.k.to_string(),
                        num(x.lhs),
                        num(x.rhs),
                        x.holds.to_string(),
                    ]);
                }
                checks.extend(found);
            }
            extra.insert("calculus".into(), json!(checks));
            tables.push(table);
        }
        Ok(Outcome {
            results: json!({ "runs": results, "checks": extra }),
            assertions,
            tables,
        })
    }
}
