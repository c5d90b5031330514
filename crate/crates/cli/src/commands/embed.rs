use fslab_core::norms::embedding_gap;
use fslab_core::{embedding_probe, Error, SmoothnessParams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{num, require, spread, Assertion, CorpusSpec, Outcome, Table};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedPair {
    pub src: SmoothnessParams,
    pub dst: SmoothnessParams,
}

fn default_stability() -> f64 {
    2.0
}

/// Max ratio `‖f|dst‖/‖f|src‖` over a corpus, tracked across levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    #[serde(default)]
    pub corpus: CorpusSpec,
    pub pairs: Vec<EmbedPair>,
    pub levels: Vec<u32>,
    /// Allowed max/min of the statistic across levels.
    #[serde(default = "default_stability")]
    pub stability_factor: f64,
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        require(!self.pairs.is_empty(), "pairs must not be empty")?;
        require(!self.levels.is_empty(), "levels must not be empty")?;
        require(self.stability_factor >= 1.0, "stability_factor must be at least 1")?;
        for (i, pair) in self.pairs.iter().enumerate() {
            let gap = embedding_gap(&pair.src, &pair.dst, self.corpus.dim);
            if gap <= 0.0 {
                return Err(Error::Usage(format!(
                    "pair {i} has no embedding: s₁ - s₂ - n(1/p₁ - 1/p₂)₊ = {gap} ≤ 0"
                ))
                .into());
            }
        }
        self.corpus.build(self.levels[0], 0)?;
        Ok(())
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        let corpora = self
            .levels
            .iter()
            .map(|&level| self.corpus.build(level, seed))
            .collect::<Result<Vec<_>>>()?;
        let mut results = Vec::new();
        let mut assertions = Vec::new();
        let mut tables = Vec::new();
        for (i, pair) in self.pairs.iter().enumerate() {
            let mut table = Table::new(format!("embed_{i}.csv"), &["level", "max_ratio"]);
            let mut stats = Vec::new();
            for (&level, corpus) in self.levels.iter().zip(&corpora) {
                let stat = embedding_probe(corpus, &pair.src, &pair.dst)?;
                table.push(vec![level.to_string(), num(stat)]);
                assertions.push(Assertion::between(
                    format!("pair_{i}_level_{level}_finite"),
                    stat,
                    Some(f64::MIN_POSITIVE),
                    Some(f64::MAX),
                ));
                stats.push(stat);
            }
            let s = spread(&stats);
            assertions.push(Assertion::at_most(format!("pair_{i}_stability"), s, self.stability_factor));
            tables.push(table);
            results.push(json!({
                "src": pair.src,
                "dst": pair.dst,
                "gap": embedding_gap(&pair.src, &pair.dst, self.corpus.dim),
                "levels": self.levels,
                "max_ratios": stats,
                "spread": s,
            }));
        }
        Ok(Outcome {
            results: json!(results),
            assertions,
            tables,
        })
    }
}
