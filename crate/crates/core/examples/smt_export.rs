//! Dumps the first solver problem over a table as SMT-LIB, for checking
//! against an external solver. Unknown pairs appear as `assert-soft`.
//!
//! ```text
//! cargo run --example smt_export > position.smt2
//! ```

use quintic::automaton::parse;
use quintic::learner::export_position;
use quintic::teacher::SimulatedTeacher;

fn main() -> anyhow::Result<()> {
    let target = parse(include_str!("../corpus/halving_product.qa"))?;
    // upper rows ε, a and aa
    let rows = [target.input().parse("aa")?];
    let text = export_position(&mut SimulatedTeacher::new(target), &rows)?;
    print!("{text}");
    Ok(())
}
