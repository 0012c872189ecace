//! Compares REMAP with the backtracking learner on the classification
//! targets of the corpus.

use quintic::automaton::is_isomorphic;
use quintic::bench::load_corpus;
use quintic::teacher::SimulatedTeacher;
use quintic::{run_quintic, run_remap, LearnerConfig, ValuationKind};

fn main() -> anyhow::Result<()> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus").as_ref())?;
    println!("{:<14} {:>6} {:>11} {:>11} {:>10}", "target", "states", "remap prefs", "quint prefs", "isomorphic");
    for (name, target) in corpus {
        if !matches!(target.valuation(), ValuationKind::Classification) {
            continue;
        }
        let remap = run_remap(&mut SimulatedTeacher::new(target.clone()))?;
        let quintic = run_quintic(&mut SimulatedTeacher::new(target.clone()), &LearnerConfig::default())?;
        let (a, b) = (remap.learned().unwrap(), quintic.learned().unwrap());
        println!(
            "{name:<14} {:>6} {:>11} {:>11} {:>10}",
            a.num_states(),
            remap.metrics.pref_queries,
            quintic.metrics.pref_queries,
            is_isomorphic(a, b)
        );
    }
    Ok(())
}
