//! The fixed acceptance grid behind `fslab suite`.

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::{Command, Experiment, Prepared};
use crate::error::Result;
use crate::output::write_atomic;

/// Seed shared by every suite experiment.
pub const SUITE_SEED: u64 = 0;

/// `(name, command, parameters)` of every suite experiment, in run order.
pub fn entries() -> Vec<(String, Command, serde_json::Value)> {
    let inf = "inf";
    let b = |s: f64, p: serde_json::Value, q: serde_json::Value| json!({"family": "B", "s": s, "p": p, "q": q});
    let f = |s: f64, p: serde_json::Value, q: serde_json::Value| json!({"family": "F", "s": s, "p": p, "q": q});
    let mother = json!({"dim": 1, "level": 10, "extent": 0.0625, "radius": 0.0625, "shape": "smooth_bump"});
    let mut out: Vec<(String, Command, serde_json::Value)> = vec![
        (
            "homogeneity_b".into(),
            Command::Homogeneity,
            json!({
                "mother": mother,
                "grid": {"family": "B", "s": [0.5, 0.75, 1.25], "p": [1, 2, inf], "q": [1, 2, inf]},
                "steps": 4,
            }),
        ),
        (
            "homogeneity_f".into(),
            Command::Homogeneity,
            json!({
                "mother": mother,
                "grid": {"family": "F", "s": [0.8, 1.5], "p": [1, 2], "q": [2, inf]},
                "steps": 4,
            }),
        ),
        ("identities".into(), Command::Identities, json!({})),
        (
            "equivalence_support".into(),
            Command::Equivalence,
            json!({
                "params": [b(0.75, json!(2), json!(2)), b(0.5, json!(inf), json!(inf)), f(0.8, json!(2), json!(2))],
                "levels": [8, 9, 10],
                "mode": "support",
            }),
        ),
        (
            "equivalence_order".into(),
            Command::Equivalence,
            json!({
                "params": [b(0.75, json!(2), json!(2)), b(0.5, json!(inf), json!(inf))],
                "levels": [8, 9, 10],
                "mode": "order",
            }),
        ),
        (
            "sandwich".into(),
            Command::Equivalence,
            json!({
                "params": [f(0.8, json!(2), json!(1)), f(0.8, json!(2), json!(inf))],
                "levels": [8, 9, 10],
                "mode": "sandwich",
            }),
        ),
        (
            "entropy_exact".into(),
            Command::Entropy,
            json!({
                "src": {"s": 2.0, "rho": 1.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1]},
                "dst": {"s": 1.0, "rho": 0.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1]},
                "ks": [1, 2, 3, 4, 5, 6],
                "cloud_size": 512,
                "exact_tolerance": 0.15,
                "calculus": {"slack": 2.0},
            }),
        ),
        (
            "entropy_rate".into(),
            Command::Entropy,
            json!({
                "src": {"s": 2.0, "rho": 1.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1, 2, 4]},
                "dst": {"s": 1.0, "rho": 0.0, "p": 2, "q": 2, "n": 1.0, "sizes": [1, 2, 4]},
                "ks": [2, 3, 4, 5, 6, 7],
                "cloud_size": 4096,
                "seeds": [0, 1, 2],
                "slope_range": [-1.4, -0.6],
            }),
        ),
    ];
    let multipliers = [
        ("multiplier_b050", b(0.5, json!(2), json!(2))),
        ("multiplier_b125", b(1.25, json!(2), json!(2))),
        ("multiplier_b075_inf", b(0.75, json!(inf), json!(inf))),
    ];
    for (name, params) in multipliers {
        for mother in ["modulated", "plateau"] {
            let name = format!("{name}_{mother}");
            out.push((
                name,
                Command::Multiplier,
                json!({
                    "corpus": {"extent": 2.0},
                    "level": 10,
                    "ms": [0, 1, 2, 3],
                    "params": params,
                    "mother": mother,
                }),
            ));
        }
    }
    out.push((
        "embed".into(),
        Command::Embed,
        json!({
            "pairs": [
                {"src": b(1.5, json!(2), json!(2)), "dst": b(0.5, json!(2), json!(2))},
                {"src": b(1.0, json!(inf), json!(inf)), "dst": b(0.5, json!(1), json!(inf))},
                {"src": b(1.25, json!(1), json!(1)), "dst": b(0.5, json!(2), json!(2))},
            ],
            "levels": [5, 6, 7],
        }),
    ));
    out
}

#[derive(Debug, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub command: Command,
    pub passed: bool,
}

/// Runs every entry into `out/<name>` and writes `out/suite.json`. All
/// configs are validated before the first computation.
pub fn run_suite(out: &Path, mut log: impl FnMut(&SuiteEntry)) -> Result<Vec<SuiteEntry>> {
    let prepared = entries()
        .into_iter()
        .map(|(name, command, parameters)| {
            let experiment = Experiment::parse(command, parameters)?;
            experiment.validate()?;
            let output_dir = out.join(&name);
            Ok((
                name,
                Prepared {
                    experiment,
                    seed: SUITE_SEED,
                    output_dir,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (name, p) in prepared {
        let passed = crate::execute(&p)?;
        let entry = SuiteEntry {
            name,
            command: p.experiment.command(),
            passed,
        };
        log(&entry);
        entries.push(entry);
    }
    let passed = entries.iter().all(|e| e.passed);
    let mut json = serde_json::to_vec_pretty(&json!({ "passed": passed, "experiments": entries }))?;
    json.push(b'\n');
    std::fs::create_dir_all(out)?;
    write_atomic(out, "suite.json", &json)?;
    Ok(entries)
}
