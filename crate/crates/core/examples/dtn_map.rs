//! Flux map of a Y-cell, Green symmetry, conservation at B = 0 and
//! agreement with the finite-element oracle.
//!
//! `cargo run --example dtn_map`

use capnet::dtn::{fem_oracle_solve, CellSolver, DirichletData};
use capnet::edge_ode::DEFAULT_TOL;
use capnet::fixtures;

fn main() -> capnet::Result<()> {
    for (name, cell) in [
        ("Y, B = 0", fixtures::y_cell(0.0)),
        ("graded Y", fixtures::graded_y()),
    ] {
        let solver = CellSolver::new(&cell, DEFAULT_TOL)?;
        let a = solver.flux_map()?;
        println!("{name}\n{}", a.to_csv());
        println!("  green symmetry defect {:.2e}", a.green_symmetry_defect());

        let data = DirichletData::new(1.0, vec![0.3, 0.6])?;
        let sol = solver.solve_dirichlet(&data)?;
        let f = &sol.fluxes;
        println!(
            "  fluxes {:?}\n  F0 - F1 - F2 = {:.2e}  (zero only without wall exchange)",
            f,
            f[0] - f[1] - f[2]
        );
        let fem = fem_oracle_solve(&cell, &data, 256)?;
        let gap = sol
            .vertex_values
            .iter()
            .zip(&fem.solution.vertex_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("  max vertex gap to FEM (256 elements/edge) {gap:.2e}\n");
    }
    Ok(())
}
