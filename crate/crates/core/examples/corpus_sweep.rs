//! Learns every corpus target under each learner variant and prints one
//! metrics line per run.
//!
//! ```text
//! cargo run --release --example corpus_sweep [corpus-dir]
//! ```

use std::time::Instant;

use anyhow::Context as _;
use quintic::automaton::{check_label_equivalence, parse};
use quintic::teacher::SimulatedTeacher;
use quintic::{run_quintic, run_remap, ValuationKind, Variant};

fn main() -> anyhow::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/corpus").to_string());
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .with_context(|| format!("reading {dir}"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qa"))
        .collect();
    paths.sort();
    println!("{:<24} {:<8} {:>6} {:>6} {:>6} {:>6} {:>8} {:>9}", "target", "variant", "states", "prefs", "equivs", "backtr", "solves", "ms");
    for path in paths {
        let target = parse(&std::fs::read_to_string(&path)?)?;
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let mut variants = Variant::QUINTIC.to_vec();
        if matches!(target.valuation(), ValuationKind::Classification) {
            variants.push(Variant::Remap);
        }
        for v in variants {
            let mut teacher = SimulatedTeacher::new(target.clone());
            let start = Instant::now();
            let result = match v.config() {
                Some(cfg) => run_quintic(&mut teacher, &cfg)?,
                None => run_remap(&mut teacher)?,
            };
            let ms = start.elapsed().as_millis();
            let states = match result.learned() {
                Some(a) => {
                    anyhow::ensure!(check_label_equivalence(&target, a)?.is_none(), "{name} {v}: wrong machine");
                    a.num_states().to_string()
                }
                None => "-".to_string(),
            };
            let m = &result.metrics;
            println!(
                "{name:<24} {:<8} {states:>6} {:>6} {:>6} {:>6} {:>8} {ms:>9}",
                v.name(),
                m.pref_queries,
                m.equiv_queries,
                m.backtracks,
                m.maxsmt_solves
            );
        }
    }
    Ok(())
}
