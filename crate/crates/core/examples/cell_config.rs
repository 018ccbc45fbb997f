//! Parses a cell configuration, reports every violation of a broken one and
//! round-trips a valid one through JSON.
//!
//! `cargo run --example cell_config`

use capnet::cell::{parse_cell, parse_cell_unchecked, serialize_cell, validate_cell};
use capnet::scaling::classify_regime;

const Y_CELL: &str = r#"{
  "vertices": ["W0", "v", "W1", "W2"],
  "input": "W0",
  "outputs": ["W1", "W2"],
  "edges": [
    {"id": "trunk", "tail": "W0", "head": "v", "length": 1.0,
     "H": {"kind": "polynomial", "values": [1.5, -0.5]},
     "B": {"kind": "constant", "values": [0.2]}},
    {"id": "left", "tail": "v", "head": "W1", "length": 0.7,
     "H": {"kind": "constant", "values": [1.0]},
     "B": {"kind": "constant", "values": [0.0]}},
    {"id": "right", "tail": "v", "head": "W2", "length": 0.9,
     "H": {"kind": "constant", "values": [0.8]},
     "B": {"kind": "polynomial", "values": [0.0, 0.4]}}
  ]
}"#;

fn main() -> capnet::Result<()> {
    let cell = parse_cell(Y_CELL)?;
    println!(
        "{} vertices, {} edges, J = {}, regime {:?}",
        cell.vertices().len(),
        cell.edges().len(),
        cell.num_outputs(),
        classify_regime(&cell)
    );
    let again = parse_cell(&serialize_cell(&cell))?;
    println!("round trip identical: {}", again == cell);

    // Negative H on one edge and an output with two edges.
    let broken = Y_CELL
        .replace(
            "[1.0]},\n     \"B\": {\"kind\": \"constant\", \"values\": [0.0]}",
            "[-1.0]},\n     \"B\": {\"kind\": \"constant\", \"values\": [0.0]}",
        )
        .replace(
            "\"tail\": \"v\", \"head\": \"W2\"",
            "\"tail\": \"W1\", \"head\": \"W2\"",
        );
    let report = validate_cell(&parse_cell_unchecked(&broken)?);
    println!("broken cell ok: {}", report.ok);
    for d in &report.diagnostics {
        println!("  {:?} at {}: {}", d.severity, d.location, d.message);
    }
    Ok(())
}
