//! The single edge with B = −γ²: scaling curve against its closed form and
//! the two roots above the minimum.
//!
//! `cargo run --example gamma_example [gamma]`

use capnet::gamma::{gamma_example, DEFAULT_KAPPAS};

fn main() -> capnet::Result<()> {
    let gamma = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(std::f64::consts::FRAC_PI_3);
    let ex = gamma_example(gamma, 200, &DEFAULT_KAPPAS, 1e-12)?;
    let worst = ex
        .curve
        .iter()
        .map(|p| ((p.numeric - p.closed_form) / p.closed_form).abs())
        .fold(0.0, f64::max);
    println!("gamma {gamma:.6}: worst relative gap to closed form {worst:.2e}");
    println!("min F = {:.10} at m = {:.10}", ex.f_min, ex.m_at_min);
    for p in &ex.root_pairs {
        println!(
            "kappa {:>5}: roots {:?}  S > 0 {:?}",
            p.kappa, p.roots, p.positive_energy
        );
    }
    Ok(())
}
