use fslab_core::multiplier::{
    derivative_profile, f_family_threshold, make_multiplier, multiplier_bound_experiment, Mother, MultiplierSpec,
};
use fslab_core::SmoothnessParams;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{num, require, spread, Assertion, CorpusSpec, Outcome, Table};
use crate::error::Result;

fn default_mother() -> Mother {
    Mother::Modulated
}

fn default_uniformity() -> f64 {
    4.0
}

/// `max ‖φ_λ f‖/‖f‖` over a corpus supported in `B_λ`, for `λ = 2^{-m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierConfig {
    /// The corpus radius is replaced by `λ` for every `m`.
    #[serde(default)]
    pub corpus: CorpusSpec,
    pub level: u32,
    pub ms: Vec<u32>,
    pub params: SmoothnessParams,
    #[serde(default = "default_mother")]
    pub mother: Mother,
    /// Run F-family cases that violate the smoothness restriction; nothing
    /// is asserted about the bound there.
    #[serde(default)]
    pub override_restriction: bool,
    /// Allowed max/min of the ratios across `λ`.
    #[serde(default = "default_uniformity")]
    pub uniformity_factor: f64,
    /// Require every ratio to be exactly 1; defaults to true for the
    /// plateau mother, which is 1 on the whole corpus support.
    #[serde(default)]
    pub unit_ratio: Option<bool>,
}

impl MultiplierConfig {
    pub fn validate(&self) -> Result<()> {
        require(!self.ms.is_empty(), "ms must not be empty")?;
        require(self.uniformity_factor >= 1.0, "uniformity_factor must be at least 1")?;
        for &m in &self.ms {
            let lambda = (-(m as f64)).exp2();
            require(lambda <= self.corpus.extent, "λ must fit inside the corpus extent")?;
            let spec = MultiplierSpec {
                m,
                a: 1.0,
                order: 1,
                mother: self.mother,
            };
            make_multiplier(&spec, self.corpus.dim, self.level, self.corpus.extent)?;
        }
        if self.params.family == fslab_core::Family::F && !self.override_restriction {
            let threshold = f_family_threshold(&self.params, self.corpus.dim);
            if self.params.s <= threshold {
                return Err(fslab_core::Error::Usage(format!(
                    "the F-family bound needs s > {threshold}; set override_restriction to explore"
                ))
                .into());
            }
        }
        Ok(())
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        let mut summary = Table::new("multiplier.csv", &["lambda", "max_ratio"]);
        let mut ratios = Table::new("multiplier_ratios.csv", &["lambda", "member", "ratio"]);
        let mut results = Vec::new();
        let mut assertions = Vec::new();
        let mut maxima = Vec::new();
        let unit = self.unit_ratio.unwrap_or(self.mother == Mother::Plateau);
        for &m in &self.ms {
            let spec = MultiplierSpec::new(m, self.params.s, self.mother);
            let lambda = spec.lambda();
            let corpus = self.corpus.build_with_radius(self.level, lambda, seed)?;
            let outcome = multiplier_bound_experiment(&corpus, &spec, &self.params, self.override_restriction)?;
            summary.push(vec![num(lambda), num(outcome.max_ratio)]);
            for (i, r) in outcome.ratios.iter().enumerate() {
                if let Some(r) = r {
                    ratios.push(vec![num(lambda), i.to_string(), num(*r)]);
                }
            }
            let phi = make_multiplier(&spec, self.corpus.dim, self.level, self.corpus.extent)?;
            let profile = derivative_profile(&phi, &spec);
            let worst = profile.iter().fold(0.0_f64, |w, d| w.max(d / spec.a));
            assertions.push(Assertion::at_most(format!("derivative_bounds_m{m}"), worst, 1.0));
            if unit {
                let off = outcome
                    .ratios
                    .iter()
                    .flatten()
                    .fold(0.0_f64, |w, r| w.max((r - 1.0).abs()));
                assertions.push(Assertion::at_most(format!("unit_ratio_m{m}"), off, 0.0));
            }
            maxima.push(outcome.max_ratio);
            results.push(json!({ "spec": spec, "derivative_profile": profile, "outcome": outcome }));
        }
        let restricted = self.params.family == fslab_core::Family::F
            && self.params.s <= f_family_threshold(&self.params, self.corpus.dim);
        if !restricted {
            assertions.push(Assertion::at_most("uniformity", spread(&maxima), self.uniformity_factor));
        }
        Ok(Outcome {
            results: json!(results),
            assertions,
            tables: vec![summary, ratios],
        })
    }
}
