//! Small reference cells with closed-form solutions.

use crate::cell::{CoefficientSpec, Edge, ElementaryCell};

fn ids(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// One edge `a → b` of length `length` with constant `H` and `B`.
pub fn single_edge(h: f64, b: f64, length: f64) -> ElementaryCell {
    ElementaryCell::new(
        ids(&["a", "b"]),
        vec![Edge::new(
            "e",
            "a",
            "b",
            length,
            CoefficientSpec::constant(h),
            CoefficientSpec::constant(b),
        )],
        "a",
        ids(&["b"]),
    )
    .expect("single edge fixture is admissible")
}

/// Unit edge with `H = 1`, `B = −γ²`. For `γ < π` it has no Dirichlet
/// eigenvalue and `𝓕(m) = (1 − m cos γ) / ((cos γ − m) m)`.
pub fn gamma_edge(gamma: f64) -> ElementaryCell {
    single_edge(1.0, -gamma * gamma, 1.0)
}

/// Star `a → v`, `v → b`, `v → c`, unit lengths, `H = 1`, constant `B = b`.
pub fn y_cell(b: f64) -> ElementaryCell {
    let e = |id: &str, t: &str, h: &str| {
        Edge::new(
            id,
            t,
            h,
            1.0,
            CoefficientSpec::constant(1.0),
            CoefficientSpec::constant(b),
        )
    };
    y_from(e("e0", "a", "v"), e("e1", "v", "b"), e("e2", "v", "c"))
}

fn y_from(e0: Edge, e1: Edge, e2: Edge) -> ElementaryCell {
    ElementaryCell::new(
        ids(&["a", "v", "b", "c"]),
        vec![e0, e1, e2],
        "a",
        ids(&["b", "c"]),
    )
    .expect("Y fixture is admissible")
}

/// Y-shaped cell with tapering polynomial `H` and non-negative polynomial
/// `B`; the outputs have different lengths.
pub fn graded_y() -> ElementaryCell {
    let e = |id: &str, t: &str, h: &str, len: f64, hc: Vec<f64>, bc: Vec<f64>| {
        Edge::new(
            id,
            t,
            h,
            len,
            CoefficientSpec::polynomial(hc),
            CoefficientSpec::polynomial(bc),
        )
    };
    y_from(
        e("e0", "a", "v", 1.0, vec![1.5, -0.5], vec![0.1, 0.0, 0.2]),
        e("e1", "v", "b", 0.8, vec![1.0, -0.3, 0.1], vec![0.05, 0.1]),
        e("e2", "v", "c", 1.2, vec![0.8, 0.2], vec![0.0, 0.3]),
    )
}
