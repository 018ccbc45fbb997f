//! Integrates the fundamental system on single edges and compares the
//! edge map with the closed forms for constant coefficients.
//!
//! `cargo run --example edge_basis`

use capnet::cell::{CoefficientSpec, Edge};
use capnet::edge_ode::{edge_dtn, edge_evaluate, edge_fundamental_system, DEFAULT_TOL};

fn main() -> capnet::Result<()> {
    let c = |v: f64| CoefficientSpec::constant(v);
    for (name, b) in [("B = 0", 0.0), ("B = 4", 4.0), ("B = -1", -1.0)] {
        let edge = Edge::new("e", "a", "b", 1.0, c(1.0), c(b));
        let basis = edge_fundamental_system(&edge, DEFAULT_TOL)?;
        let t = edge_dtn(&basis)?;
        // Constant coefficients: T₀₀ = √B coth √B, 1 or √|B| cot √|B|.
        let exact = if b > 0.0 {
            b.sqrt() / b.sqrt().tanh()
        } else if b < 0.0 {
            (-b).sqrt() / (-b).sqrt().tan()
        } else {
            1.0
        };
        println!(
            "{name:>7}: steps {:>3}  wronskian drift {:.1e}  T00 {:.12} (exact {:.12})  w(1/2) {:.12}",
            basis.samples().len() - 1,
            basis.max_wronskian_drift(),
            t.matrix[0][0],
            exact,
            edge_evaluate(&basis, 1.0, 0.0, 0.5)?,
        );
    }

    // Variable coefficients: the basis can be dumped for plotting.
    let edge = Edge::new(
        "taper",
        "a",
        "b",
        2.0,
        CoefficientSpec::polynomial(vec![2.0, -0.5]),
        CoefficientSpec::polynomial(vec![0.0, 0.0, 1.0]),
    );
    let basis = edge_fundamental_system(&edge, 1e-12)?;
    print!(
        "{}",
        basis
            .to_csv()
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!("\n... {} rows", basis.samples().len());
    Ok(())
}
