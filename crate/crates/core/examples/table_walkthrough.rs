//! One round of the learner by hand on the two-state sum target: fill a
//! symbolic table, gather preference constraints, split variable pairs
//! into known and unknown, solve for a merge pattern and unify.

use anyhow::Context as _;
use quintic::automaton::parse;
use quintic::inference::{gather_constraints, partition_pairs};
use quintic::solver::{known_constraints, Solver};
use quintic::table::{Context, SymbolicTable};
use quintic::teacher::{SimulatedTeacher, Teacher};

fn main() -> anyhow::Result<()> {
    let target = parse(include_str!("../corpus/toggle_sum.qa"))?;
    let input = target.input().clone();
    let mut teacher = SimulatedTeacher::new(target.clone());
    let mut ctx = Context::new();
    let mut table = SymbolicTable::new(input.len(), &mut ctx);

    loop {
        println!("{}", table.dump(&input));
        let cs = gather_constraints(&table, &mut teacher)?;
        for c in cs.constraints() {
            println!("  C: {c}");
        }
        let part = partition_pairs(&table, &cs, teacher.valuation());
        println!("  {} known and {} unknown ordered pairs", part.known.len(), part.unknown.len());

        let mut solver = Solver::new(target.output().sorted_values())?;
        solver.assert_all(cs.constraints().cloned());
        solver.assert_all(known_constraints(&part));
        let sol = solver
            .solve_ve(&table.vars(), &part.unordered_unknown())?
            .context("constraints are satisfiable under the true labels")?;
        println!("  conjecture {:?} (VE {})", sol.classes.classes(), sol.ve);

        let unified = table.unify(&sol.classes)?;
        match unified.defect()? {
            Some(d) => {
                println!("  defect {d:?}; repairing\n");
                table.repair(&d, &mut ctx);
            }
            None => {
                let h = unified.build_symbolic_hypothesis()?;
                println!("  closed and consistent: {} states, labels {:?}", h.num_states(), h.label_vars());
                break;
            }
        }
    }
    Ok(())
}
