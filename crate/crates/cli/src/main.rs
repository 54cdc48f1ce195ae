use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prolim_cli::report::{diff_paths, strip_timing};
use prolim_cli::{bundled, list_scenarios, run, CliError, Overrides, Report, Scenario};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "prolim", version, about = "Runs tower, division and cotorsion scenarios")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Probe depth, overriding the scenario's.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Seed for randomized checks, overriding the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the JSON report instead of the text view.
    #[arg(long, global = true)]
    json: bool,
    /// Compare against a stored report (timing excluded); a mismatch exits 1.
    #[arg(long, value_name = "PATH", global = true)]
    golden_compare: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long, value_name = "PATH", global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run { scenario: String },
    /// List bundled scenarios whose name or description contains FILTER.
    List { filter: Option<String> },
    /// Factorize ρ of a formal sum: {"group", "tower"?, "terms"}.
    Factorize { file: PathBuf },
    /// Divide a class: {"group", "class", "m", "threads"?}; without threads it divides everywhere.
    Divide { file: PathBuf },
    /// p^ω-division recursion: {"group", "pack", "m_max"}.
    POmegaDivide { file: PathBuf },
    /// Coset-tower certificate: {"group", "q", "a", "depth"}.
    CertifyNoncotorsion { file: PathBuf },
    /// Invariants, p-lengths and stabilization for a group literal.
    AnalyzeGroup {
        group: String,
        /// Primes to compute p-lengths for (default: those dividing the torsion).
        #[arg(long = "prime")]
        primes: Vec<u64>,
    },
    /// Mittag-Leffler index of a tower: {"tower", "t"}.
    MlIndex { file: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Wraps a single-op fragment `{"group"?, "tower"?, "depth"?, "seed"?, ...op fields}`
/// into a one-op scenario.
fn fragment(name: &str, op: &str, path: &Path, rename: &[(&str, &str)]) -> Result<Scenario, CliError> {
    let origin = path.display().to_string();
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        origin: origin.clone(),
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })?;
    let Value::Object(mut fields) = value else {
        return Err(CliError::Schema {
            field: origin,
            reason: "expected a JSON object".into(),
        });
    };
    let mut scenario = Map::new();
    scenario.insert("name".into(), json!(name));
    for key in ["group", "tower", "depth", "seed"] {
        if let Some(v) = fields.remove(key) {
            scenario.insert(key.into(), v);
        }
    }
    scenario.entry("group").or_insert(json!("Z"));
    for (from, to) in rename {
        if let Some(v) = fields.remove(*from) {
            fields.insert(to.to_string(), v);
        }
    }
    fields.insert("op".into(), json!(op));
    scenario.insert("pipeline".into(), json!([Value::Object(fields)]));
    Scenario::from_json(&Value::Object(scenario).to_string(), &origin)
}

fn scenario_for(command: &Command) -> Result<Option<Scenario>, CliError> {
    let s = match command {
        Command::List { .. } => return Ok(None),
        Command::Run { scenario } => {
            let path = Path::new(scenario);
            if path.exists() {
                Scenario::from_json(&read(path)?, scenario)?
            } else {
                bundled(scenario)?
            }
        }
        Command::Factorize { file } => fragment("factorize", "rho_round_trip", file, &[])?,
        Command::Divide { file } => {
            let has_threads = serde_json::from_str::<Value>(&read(file)?)
                .ok()
                .is_some_and(|v| v.get("threads").is_some());
            let op = if has_threads { "divide_off_finite" } else { "divide_everywhere" };
            fragment("divide", op, file, &[])?
        }
        Command::POmegaDivide { file } => fragment("p-omega-divide", "p_omega_divide", file, &[])?,
        Command::CertifyNoncotorsion { file } => fragment("certify-noncotorsion", "certify_noncotorsion", file, &[])?,
        Command::MlIndex { file } => fragment("ml-index", "ml_index", file, &[])?,
        Command::AnalyzeGroup { group, primes } => {
            let s = json!({
                "name": "analyze-group",
                "group": group,
                "pipeline": [{"op": "analyze_group", "primes": primes}],
            });
            Scenario::from_json(&s.to_string(), "analyze-group")?
        }
    };
    Ok(Some(s))
}

fn emit(report: &Report, common: &Common) -> Result<bool, CliError> {
    let json = report.to_json();
    if common.json {
        println!("{}", serde_json::to_string_pretty(&json).expect("serializes"));
    } else {
        print!("{}", report.render_text());
    }
    if let Some(path) = &common.output {
        let text = serde_json::to_string_pretty(&json).expect("serializes") + "\n";
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let mut ok = report.passed;
    if let Some(path) = &common.golden_compare {
        let origin = path.display().to_string();
        let golden: Value = serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse {
            origin,
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        })?;
        if strip_timing(golden.clone()) == report.comparable() {
            eprintln!("golden: match");
        } else {
            ok = false;
            eprintln!("golden: mismatch at {}", diff_paths(&golden, &json, 10).join(", "));
        }
    }
    Ok(ok)
}

fn main_inner(cli: Cli) -> Result<bool, CliError> {
    let common = cli.common;
    if let Command::List { filter } = &cli.command {
        let entries = list_scenarios(filter.as_deref());
        if common.json {
            let v: Vec<Value> = entries.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
            println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
        } else {
            for (name, description) in entries {
                println!("{name:32} {description}");
            }
        }
        return Ok(true);
    }
    let scenario = scenario_for(&cli.command)?.expect("non-list command");
    let report = run(
        scenario,
        Overrides {
            depth: common.depth,
            seed: common.seed,
        },
    )?;
    emit(&report, &common)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
