//! Truncated fractals built from a Y-cell, closed either by Dirichlet data
//! or by the Robin constant, against the self-reproducing solution.
//!
//! `cargo run --release --example fractal_oracle`

use capnet::edge_ode::DEFAULT_TOL;
use capnet::fixtures;
use capnet::fractal::{
    compare_oracle, FractalOpts, LeafClosure, SelfReproducing, TruncatedFractal,
};
use capnet::scaling::{ScalingFactors, ScalingOpts, ScalingProblem};

fn main() -> capnet::Result<()> {
    let cell = fixtures::graded_y();
    let factors = ScalingFactors::new(vec![0.5, 0.6], vec![0.4, 0.3])?;
    let report =
        ScalingProblem::new(&cell, DEFAULT_TOL)?.solve(&factors.kappa, &ScalingOpts::default())?;
    let m = report.roots[0].m.clone();
    let oracle = SelfReproducing::new(&cell, &m, &factors.l, DEFAULT_TOL)?;
    println!("m = {m:?}, beta = {:.12}", oracle.beta());

    for depth in 1..=6 {
        for (name, closure) in [
            (
                "dirichlet",
                LeafClosure::DirichletSelfSimilar { m: m.clone() },
            ),
            (
                "robin",
                LeafClosure::Robin {
                    beta: oracle.beta(),
                },
            ),
        ] {
            let f = TruncatedFractal::assemble(
                &cell,
                &factors,
                closure,
                depth,
                &FractalOpts::default(),
            )?;
            let rep = compare_oracle(&f.solve(1.0)?, &oracle)?;
            println!(
                "depth {depth} {name:>9}: {:>4} cells  max gap {:.2e}  F0 - beta {:.2e}",
                f.num_cells(),
                rep.max_discrepancy,
                rep.flux_discrepancy
            );
        }
    }
    Ok(())
}
