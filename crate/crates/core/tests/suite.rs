//! The seeded generator and the invariant suite as a whole.

use capnet::cell::serialize_cell;
use capnet::error::Error;
use capnet::scaling::{classify_regime, RegimeClass};
use capnet::verify::{
    random_cell, registry, run_invariant_suite, Fault, RandomCellParams, VerificationConfig,
};

fn small(seed: u64) -> VerificationConfig {
    VerificationConfig {
        seed,
        cells_per_regime: 3,
        data_per_cell: 4,
        ..VerificationConfig::default()
    }
}

#[test]
fn generator_golden_cell() {
    let params = RandomCellParams {
        num_outputs: Some(2),
        ..RandomCellParams::default()
    };
    let cell = random_cell(42, RegimeClass::Impermeable, &params).unwrap();
    let text = serialize_cell(&cell);
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden/random_cell_seed42.json");
    if std::env::var_os("CAPNET_BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    assert_eq!(text, std::fs::read_to_string(&path).unwrap());
    assert_eq!(cell.num_outputs(), 2);
    assert_eq!(classify_regime(&cell), RegimeClass::Impermeable);
}

#[test]
fn generator_rejects_indefinite_forms() {
    let params = RandomCellParams {
        b_override: Some(-100.0),
        ..RandomCellParams::default()
    };
    let err = random_cell(7, RegimeClass::PermeableMinus, &params).unwrap_err();
    assert!(matches!(err, Error::Generator(_)), "{err}");
    assert!(random_cell(7, RegimeClass::Mixed, &RandomCellParams::default()).is_err());
}

#[test]
fn suite_passes_and_is_deterministic() {
    let a = run_invariant_suite(&small(7));
    let b = run_invariant_suite(&small(7));
    assert!(a.all_passed, "{}", a.to_json());
    assert!(a.generator_failures.is_empty());
    assert_eq!(a.to_json(), b.to_json());
    let ids: Vec<&str> = a.checks.iter().map(|c| c.id).collect();
    let declared: Vec<&str> = registry().iter().map(|c| c.id).collect();
    assert_eq!(ids, declared);
    assert!(
        a.checks.iter().all(|c| c.cases > 0),
        "every check exercised"
    );
}

#[test]
fn injected_fault_is_caught() {
    let report = run_invariant_suite(&VerificationConfig {
        fault: Some(Fault::FlipInputFluxSign),
        ..small(7)
    });
    assert!(!report.all_passed);
    for id in ["dtn.green_symmetry", "dtn.flux_conservation"] {
        let c = report.check(id).unwrap();
        assert!(!c.passed, "{id} missed the fault");
        assert!(c.witness.is_some());
    }
}
