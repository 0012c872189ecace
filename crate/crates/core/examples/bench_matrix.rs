//! Runs the quick experiment matrix and prints the aggregate CSV.
//!
//! ```text
//! cargo run --release --example bench_matrix [experiment.json]
//! ```

use std::path::PathBuf;

use quintic::bench::{run_matrix, to_csv, ExperimentSpec};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/experiments/quick.json").into());
    let spec = ExperimentSpec::from_json(&std::fs::read_to_string(&path)?)?;
    let result = run_matrix(&spec, path.parent().unwrap())?;
    let failures = result.trials.iter().filter(|t| !t.success).count();
    eprintln!("{} trials, {failures} failed", result.trials.len());
    print!("{}", to_csv(&result.rows)?);
    Ok(())
}
