//! Learns one target file with a chosen variant and prints the result.
//!
//! ```text
//! cargo run --release --example learn_target [target.qa] [variant]
//! ```

use anyhow::Context as _;
use quintic::automaton::{check_label_equivalence, parse, to_dot};
use quintic::teacher::SimulatedTeacher;
use quintic::{run_quintic, Variant};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/toggle_sum.qa").to_string());
    let variant: Variant = args.next().as_deref().unwrap_or("S-VE").parse()?;
    let target = parse(&std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?)?;
    let cfg = variant.config().context("REMAP has its own example")?;

    let mut teacher = SimulatedTeacher::new(target.clone());
    let result = run_quintic(&mut teacher, &cfg)?;
    let learned = result.learned().context("learning stopped early")?;
    anyhow::ensure!(check_label_equivalence(&target, learned)?.is_none());

    println!("{}", to_dot(learned));
    println!("{:#?}", result.metrics);
    println!("{:#?}", result.stats);
    println!("-- transcript, conjectures and equivalence queries only --");
    for line in result.transcript.lines() {
        if line.starts_with("conjecture") || line.starts_with("equiv") || line.starts_with("backtrack") {
            println!("{line}");
        }
    }
    Ok(())
}
