//! Experiment configs: one JSON document per run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::commands::{
    embed::EmbedConfig, entropy::EntropyConfig, equivalence::EquivalenceConfig,
    homogeneity::HomogeneityConfig, identities::IdentitiesConfig, multiplier::MultiplierConfig,
    norm::NormConfig,
};
use crate::common::Outcome;
use crate::error::{invalid, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Norm,
    Homogeneity,
    Equivalence,
    Embed,
    Entropy,
    Multiplier,
    Identities,
}

/// The document on disk. `command` may be omitted when the subcommand names
/// it; `parameters` mirrors the experiment's config struct.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Clone, Debug)]
pub enum Experiment {
    Norm(NormConfig),
    Homogeneity(HomogeneityConfig),
    Equivalence(EquivalenceConfig),
    Embed(EmbedConfig),
    Entropy(EntropyConfig),
    Multiplier(MultiplierConfig),
    Identities(IdentitiesConfig),
}

fn parse<T: DeserializeOwned>(parameters: serde_json::Value) -> Result<T> {
    let parameters = if parameters.is_null() {
        serde_json::Value::Object(Default::default())
    } else {
        parameters
    };
    Ok(serde_json::from_value(parameters)?)
}

impl Experiment {
    pub fn parse(command: Command, parameters: serde_json::Value) -> Result<Self> {
        Ok(match command {
            Command::Norm => Experiment::Norm(parse(parameters)?),
            Command::Homogeneity => Experiment::Homogeneity(parse(parameters)?),
            Command::Equivalence => Experiment::Equivalence(parse(parameters)?),
            Command::Embed => Experiment::Embed(parse(parameters)?),
            Command::Entropy => Experiment::Entropy(parse(parameters)?),
            Command::Multiplier => Experiment::Multiplier(parse(parameters)?),
            Command::Identities => Experiment::Identities(parse(parameters)?),
        })
    }

    pub fn command(&self) -> Command {
        match self {
            Experiment::Norm(_) => Command::Norm,
            Experiment::Homogeneity(_) => Command::Homogeneity,
            Experiment::Equivalence(_) => Command::Equivalence,
            Experiment::Embed(_) => Command::Embed,
            Experiment::Entropy(_) => Command::Entropy,
            Experiment::Multiplier(_) => Command::Multiplier,
            Experiment::Identities(_) => Command::Identities,
        }
    }

    /// Checks every precondition that does not need the main computation.
    pub fn validate(&self) -> Result<()> {
        match self {
            Experiment::Norm(c) => c.validate(),
            Experiment::Homogeneity(c) => c.validate(),
            Experiment::Equivalence(c) => c.validate(),
            Experiment::Embed(c) => c.validate(),
            Experiment::Entropy(c) => c.validate(),
            Experiment::Multiplier(c) => c.validate(),
            Experiment::Identities(c) => c.validate(),
        }
    }

    pub fn run(&self, seed: u64) -> Result<Outcome> {
        match self {
            Experiment::Norm(c) => c.run(),
            Experiment::Homogeneity(c) => c.run(),
            Experiment::Equivalence(c) => c.run(seed),
            Experiment::Embed(c) => c.run(seed),
            Experiment::Entropy(c) => c.run(seed),
            Experiment::Multiplier(c) => c.run(seed),
            Experiment::Identities(c) => c.run(seed),
        }
    }

    /// The parsed parameters with all defaults filled in.
    pub fn inputs(&self) -> Result<serde_json::Value> {
        Ok(match self {
            Experiment::Norm(c) => serde_json::to_value(c)?,
            Experiment::Homogeneity(c) => serde_json::to_value(c)?,
            Experiment::Equivalence(c) => serde_json::to_value(c)?,
            Experiment::Embed(c) => serde_json::to_value(c)?,
            Experiment::Entropy(c) => serde_json::to_value(c)?,
            Experiment::Multiplier(c) => serde_json::to_value(c)?,
            Experiment::Identities(c) => serde_json::to_value(c)?,
        })
    }
}

/// A validated run, ready to compute.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_OUTPUT_DIR: &str = "fslab-out";

/// Reads and validates a config. `out` and `seed` override the file.
pub fn load(command: Command, path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<Prepared> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ConfigFile = serde_json::from_str(&text)?;
    if let Some(declared) = file.command {
        if declared != command {
            return Err(invalid(format!(
                "config is for {declared:?} but the {command:?} command was invoked"
            )));
        }
    }
    let experiment = Experiment::parse(command, file.parameters)?;
    experiment.validate()?;
    Ok(Prepared {
        experiment,
        seed: seed.or(file.seed).unwrap_or(0),
        output_dir: out
            .or(file.output_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
    })
}
