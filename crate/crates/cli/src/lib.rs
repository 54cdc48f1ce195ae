//! Scenario runner for `prolim`: JSON scenarios in, JSON reports out.

pub mod error;
pub mod ops;
pub mod report;
pub mod scenario;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub use error::CliError;
pub use report::{Check, OpResult, OpStatus, Report, Timing};
pub use scenario::{Op, Prepared, Scenario};

/// Overrides applied from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub depth: Option<usize>,
    pub seed: Option<u64>,
}

/// Bundled scenarios, one per construction.
pub const BUNDLED: &[(&str, &str)] = &[
    ("example-finite-canonical", include_str!("../scenarios/example-finite-canonical.json")),
    ("prop-bounded-roundtrip", include_str!("../scenarios/prop-bounded-roundtrip.json")),
    ("cor-mdiv-divide-everywhere", include_str!("../scenarios/cor-mdiv-divide-everywhere.json")),
    ("prop-divide-off-finite", include_str!("../scenarios/prop-divide-off-finite.json")),
    ("alg-compact-recursion", include_str!("../scenarios/alg-compact-recursion.json")),
    ("finite-counter-cotorsion", include_str!("../scenarios/finite-counter-cotorsion.json")),
    ("not-cotorsion-counting", include_str!("../scenarios/not-cotorsion-counting.json")),
    ("criterion-stabilization", include_str!("../scenarios/criterion-stabilization.json")),
];

pub fn bundled(name: &str) -> Result<Scenario, CliError> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    Scenario::from_json(text, name)
}

/// `(name, description)` of bundled scenarios whose name or description
/// contains `filter`.
pub fn list_scenarios(filter: Option<&str>) -> Vec<(String, String)> {
    BUNDLED
        .iter()
        .filter_map(|(name, text)| {
            let s = Scenario::from_json(text, name).ok()?;
            let keep = filter.is_none_or(|f| name.contains(f) || s.description.contains(f));
            keep.then(|| (name.to_string(), s.description))
        })
        .collect()
}

/// Op `i` gets its own stream so that editing one op leaves the others' draws alone.
fn op_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

pub fn run(scenario: Scenario, overrides: Overrides) -> Result<Report, CliError> {
    let mut scenario = scenario;
    if let Some(d) = overrides.depth {
        scenario.depth = d;
    }
    if let Some(s) = overrides.seed {
        scenario.seed = s;
    }
    let echo = serde_json::to_value(&scenario).expect("scenarios serialize");
    let prepared = scenario.prepare()?;
    Ok(run_prepared(&prepared, echo))
}

fn run_prepared(p: &Prepared, echo: Value) -> Report {
    let start = Instant::now();
    let s = &p.scenario;
    let mut results = Vec::with_capacity(s.pipeline.len());
    let mut checklist = Vec::new();
    let mut ops_ms = Vec::with_capacity(s.pipeline.len());
    for (i, op) in s.pipeline.iter().enumerate() {
        let op_start = Instant::now();
        let mut ctx = ops::Ctx {
            group: &p.groups[i],
            tower: &p.tower,
            tower_spec: &s.tower,
            depth: s.depth,
            rng: op_rng(s.seed, i),
        };
        let (status, output) = match ops::execute(op, &mut ctx) {
            Ok(outcome) => {
                checklist.extend(outcome.checks.into_iter().map(|(invariant, pass, detail)| Check {
                    op: i,
                    invariant,
                    pass,
                    detail,
                }));
                (OpStatus::Ok, Value::Object(outcome.output))
            }
            Err(e) => {
                checklist.push(Check {
                    op: i,
                    invariant: format!("{} completes", op.name()),
                    pass: false,
                    detail: Some(e.to_string()),
                });
                (OpStatus::Error, json!({ "error": e.to_string(), "witness": format!("{e:?}") }))
            }
        };
        ops_ms.push(op_start.elapsed().as_secs_f64() * 1e3);
        results.push(OpResult {
            index: i,
            op: op.name().to_string(),
            status,
            output,
        });
    }
    let passed = checklist.iter().all(|c| c.pass);
    Report {
        scenario: echo,
        seed: s.seed,
        depth: s.depth,
        results,
        checklist,
        passed,
        timing: Timing {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            ops_ms,
        },
    }
}
