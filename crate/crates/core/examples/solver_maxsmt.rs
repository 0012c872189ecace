//! The finite-domain solver on its own: hard constraints, the VE objective,
//! lexicographic model enumeration and a conjecture block.

use std::collections::BTreeMap;

use quintic::inference::{Constraint, Relation, ValExpr};
use quintic::table::VarId;
use quintic::{solver::Solver, Rational};

fn main() -> quintic::Result<()> {
    let int = Rational::from_integer;
    let (x, y, z) = (VarId(0), VarId(1), VarId(2));
    let vars = [x, y, z];
    let mut solver = Solver::new([int(0), int(1), int(2)])?;

    // x + y = 2 and z != x
    let sum = ValExpr::Linear {
        terms: BTreeMap::from([(x, Rational::one()), (y, Rational::one())]),
        constant: Rational::zero(),
    };
    solver.assert(Constraint::new(sum, Relation::Eq, ValExpr::constant(int(2))));
    solver.assert(Constraint::new(ValExpr::var(z), Relation::Ne, ValExpr::var(x)));

    // as many of these pairs equal as possible
    let unknown = [(x, y), (y, z)];
    let best = solver.solve_ve(&vars, &unknown)?.expect("satisfiable");
    println!("VE optimum {} with {:?}", best.ve, best.values);
    println!("classes {:?}", best.classes.classes());

    println!("all models of x, y:");
    for m in solver.enumerate_models(&vars, &[x, y], None)? {
        println!("  {m:?}");
    }

    // forbid the optimal merge pattern while at most 3 variables exist
    solver.block_conjecture(best.classes.clone(), vars.len());
    let next = solver.solve_ve(&vars, &unknown)?.expect("another pattern");
    println!("after blocking: VE {} with {:?}", next.ve, next.values);

    println!("{}", solver.to_smtlib(&vars, &unknown));
    Ok(())
}
