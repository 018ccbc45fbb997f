//! Scaling roots in the three regimes, with the energy sign and set
//! membership of each root.
//!
//! `cargo run --example scaling_roots`

use capnet::edge_ode::DEFAULT_TOL;
use capnet::fixtures;
use capnet::scaling::{solve_scaling, ScalingFactors, ScalingOpts, ScalingProblem};

fn main() -> capnet::Result<()> {
    let opts = ScalingOpts::default();

    // B = 0, κ = (1, 1): m = 1/(2κ).
    let y = fixtures::y_cell(0.0);
    let rep = solve_scaling(
        &y,
        &ScalingFactors::new(vec![0.5, 0.5], vec![0.5, 0.5])?,
        &opts,
    )?;
    println!(
        "Y, B = 0, kappa (1, 1): {:?}",
        rep.roots.iter().map(|r| &r.m).collect::<Vec<_>>()
    );

    // Σκ < 1 is outside the range when B = 0.
    let rep = solve_scaling(
        &fixtures::single_edge(1.0, 0.0, 1.0),
        &ScalingFactors::new(vec![0.5], vec![0.45])?,
        &opts,
    )?;
    println!(
        "edge, B = 0, kappa 0.9: feasible {} reason {:?}",
        rep.feasible, rep.reason
    );

    // B > 0: one root for every κ.
    let g = ScalingProblem::new(&fixtures::graded_y(), DEFAULT_TOL)?;
    for kappa in [[0.1, 0.2], [1.0, 1.0], [8.0, 3.0]] {
        let rep = g.solve(&kappa, &opts)?;
        println!(
            "graded Y, kappa {kappa:?}: {} root(s), m {:?}",
            rep.roots.len(),
            rep.roots[0].m
        );
    }

    // B < 0: roots come in pairs across the critical surface S = 0.
    let p = ScalingProblem::new(&fixtures::y_cell(-0.3), DEFAULT_TOL)?;
    let rep = p.solve(&[12.0, 12.0], &opts)?;
    for r in &rep.roots {
        println!(
            "Y, B = -0.3, kappa (12, 12): m {:?}  S {:+.6}  beta {:.6}  in OmegaHat+ {}",
            r.m, r.s, r.beta, r.in_omega_hat_plus
        );
    }
    if let Some(t) = p.critical_surface_ray(&[1.0, 1.0])? {
        println!("critical surface on the diagonal at |m| = {t:.10}");
    }
    Ok(())
}
