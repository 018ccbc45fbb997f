//! Runs the invariant suite and prints one line per check.
//!
//! `cargo run --release --example verify_suite [seed]`

use capnet::verify::{run_invariant_suite, VerificationConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let report = run_invariant_suite(&VerificationConfig {
        seed,
        ..VerificationConfig::default()
    });
    for f in &report.generator_failures {
        println!("generator: {f}");
    }
    for c in &report.checks {
        println!(
            "{:<5} {:<30} cases {:>5}  worst {:.3e}  tol {:.0e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.cases,
            c.worst,
            c.tolerance
        );
        if let Some(w) = &c.witness {
            println!("      at {} (violation {:e})", w.location, w.violation);
        }
    }
    println!("all passed: {}", report.all_passed);
}
