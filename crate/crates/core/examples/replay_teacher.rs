//! Records every answer of a simulated teacher to a session file, then
//! learns again from the file alone and checks that nothing changed.

use quintic::automaton::{is_isomorphic, parse};
use quintic::teacher::{Recorder, ReplayTeacher, SimulatedTeacher, Teacher};
use quintic::{run_quintic, Variant};

fn main() -> anyhow::Result<()> {
    let target = parse(include_str!("../corpus/three_way_sum.qa"))?;
    let cfg = Variant::WVe.config().unwrap();

    let mut recorder = Recorder::new(SimulatedTeacher::new(target.clone()), Vec::new());
    let first = run_quintic(&mut recorder, &cfg)?;
    let (_, bytes) = recorder.into_parts();
    let session = String::from_utf8(bytes)?;
    println!("session: {} lines", session.lines().count());
    for line in session.lines().filter(|l| l.starts_with("equiv")) {
        println!("  {line}");
    }

    let mut replay = ReplayTeacher::parse(&session, target.input().clone(), target.output().clone(), target.valuation().clone())?;
    let second = run_quintic(&mut replay, &cfg)?;
    let same = is_isomorphic(first.learned().unwrap(), second.learned().unwrap());
    println!(
        "replayed run: {} states, {} preference queries, same machine: {same}",
        second.learned().unwrap().num_states(),
        replay.log().pref_count
    );
    anyhow::ensure!(same);
    Ok(())
}
