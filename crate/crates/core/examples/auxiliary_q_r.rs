//! The auxiliary solutions: Q with data (1, 0) on a B ≥ 0 cell and R with
//! data (1, 1) on a B ≤ 0 cell.
//!
//! `cargo run --example auxiliary_q_r`

use capnet::dtn::{solve_q, solve_r, CellSolver};
use capnet::edge_ode::DEFAULT_TOL;
use capnet::fixtures;

fn main() -> capnet::Result<()> {
    let plus = fixtures::y_cell(2.0);
    let q = solve_q(&plus)?;
    println!(
        "Q on Y (B = 2): W1 {:.10}, W2 {:.10}, F0 {:.10}",
        q.value("b").unwrap(),
        q.value("c").unwrap(),
        q.fluxes[0]
    );

    let minus = fixtures::y_cell(-0.5);
    let r = solve_r(&minus)?;
    let solver = CellSolver::new(&minus, DEFAULT_TOL)?;
    let min_interior = solver
        .interior_samples(&r, 33)?
        .iter()
        .map(|s| s.w)
        .fold(f64::INFINITY, f64::min);
    println!(
        "R on Y (B = -1/2): min interior {:.10}, F0 {:.10}, F1 {:.10}, F2 {:.10}",
        min_interior, r.fluxes[0], r.fluxes[1], r.fluxes[2]
    );
    Ok(())
}
