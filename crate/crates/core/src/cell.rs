//! The elementary cell: a finite metric graph with one input, `J` outputs and
//! polynomial coefficients `H`, `B` on every edge.
//!
//! Cells are read from a small JSON schema:
//!
//! ```json
//! {
//!   "vertices": ["a", "v", "b", "c"],
//!   "edges": [
//!     {"id": "e0", "tail": "a", "head": "v", "length": 1.0,
//!      "H": {"kind": "constant", "values": [1.0]},
//!      "B": {"kind": "constant", "values": [0.0]}}
//!   ],
//!   "input": "a",
//!   "outputs": ["b", "c"]
//! }
//! ```
//!
//! Arc length on an edge runs from 0 at `tail` to `length` at `head`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomials up to this degree get exact extremum search through root
/// isolation of the derivative; higher degrees fall back to sampling.
const EXACT_EXTREMA_MAX_DEGREE: usize = 4;
const EXTREMA_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientKind {
    Constant,
    Polynomial,
}

/// A coefficient function of arc length, `c0 + c1 ξ + ... + cd ξ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub kind: CoefficientKind,
    pub values: Vec<f64>,
}

impl CoefficientSpec {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: CoefficientKind::Constant,
            values: vec![c],
        }
    }

    pub fn polynomial(values: Vec<f64>) -> Self {
        Self {
            kind: CoefficientKind::Polynomial,
            values,
        }
    }

    /// Horner evaluation, no range check.
    pub fn eval(&self, xi: f64) -> f64 {
        horner(&self.values, xi)
    }

    /// Evaluates at `xi` after checking `0 <= xi <= length`.
    pub fn eval_on(&self, xi: f64, length: f64) -> Result<f64> {
        if !(0.0..=length).contains(&xi) {
            return Err(Error::OutOfRange {
                what: "xi",
                value: xi,
                lo: 0.0,
                hi: length,
            });
        }
        Ok(self.eval(xi))
    }

    pub fn derivative(&self) -> CoefficientSpec {
        let d = derivative(&self.values);
        CoefficientSpec {
            kind: self.kind,
            values: if d.is_empty() { vec![0.0] } else { d },
        }
    }

    pub fn degree(&self) -> usize {
        self.values.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&c| c == 0.0)
    }

    /// `ξ ↦ factor · p(ξ / scale)`.
    pub fn rescaled(&self, factor: f64, scale: f64) -> CoefficientSpec {
        let mut s = 1.0;
        let values = self
            .values
            .iter()
            .map(|&c| {
                let v = factor * c / s;
                s *= scale;
                v
            })
            .collect();
        CoefficientSpec {
            kind: self.kind,
            values,
        }
    }

    /// `ξ ↦ p(length - ξ)`.
    pub fn reflected(&self, length: f64) -> CoefficientSpec {
        let n = self.values.len();
        let mut out = vec![0.0; n];
        // p(L - ξ) = Σ_i c_i Σ_k C(i,k) L^(i-k) (-ξ)^k
        for (i, &c) in self.values.iter().enumerate() {
            let mut binom = 1.0;
            for (k, slot) in out.iter_mut().enumerate().take(i + 1) {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *slot += c * binom * length.powi((i - k) as i32) * sign;
                binom = binom * (i - k) as f64 / (k + 1) as f64;
            }
        }
        CoefficientSpec {
            kind: self.kind,
            values: out,
        }
    }

    /// Minimum and maximum over `[0, length]`.
    ///
    /// Exact (up to bisection precision) for degree ≤ 4; sampled on 1024
    /// subintervals otherwise, which may miss narrow excursions.
    pub fn extrema(&self, length: f64) -> (f64, f64) {
        let deg = self.degree();
        let mut candidates = vec![0.0, length];
        if deg <= EXACT_EXTREMA_MAX_DEGREE {
            candidates.extend(real_roots_in(&derivative(&self.values), 0.0, length));
        } else {
            candidates
                .extend((1..EXTREMA_SAMPLES).map(|i| length * i as f64 / EXTREMA_SAMPLES as f64));
        }
        candidates
            .into_iter()
            .map(|x| self.eval(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ci)| i as f64 * ci)
        .collect()
}

/// Real roots of a polynomial inside `(a, b)`, isolated recursively between
/// the critical points and refined by bisection.
fn real_roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let deg = c.iter().rposition(|&x| x != 0.0);
    let Some(deg) = deg else {
        return Vec::new();
    };
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        let r = -c[0] / c[1];
        return if r > a && r < b { vec![r] } else { Vec::new() };
    }
    let mut knots = vec![a];
    knots.extend(real_roots_in(&derivative(&c[..=deg]), a, b));
    knots.push(b);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (horner(c, lo), horner(c, hi));
        if flo == 0.0 {
            if lo > a {
                roots.push(lo);
            }
            continue;
        }
        if flo.signum() == fhi.signum() || fhi == 0.0 {
            continue;
        }
        // monotone on [lo, hi] with a sign change
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if horner(c, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub length: f64,
    #[serde(rename = "H")]
    pub h: CoefficientSpec,
    #[serde(rename = "B")]
    pub b: CoefficientSpec,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        length: f64,
        h: CoefficientSpec,
        b: CoefficientSpec,
    ) -> Self {
        Self {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            length,
            h,
            b,
        }
    }

    /// The same physical edge traversed from head to tail.
    pub fn reversed(&self) -> Edge {
        Edge {
            id: self.id.clone(),
            tail: self.head.clone(),
            head: self.tail.clone(),
            length: self.length,
            h: self.h.reflected(self.length),
            b: self.b.reflected(self.length),
        }
    }
}

/// On-disk layout of a cell; field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellConfig {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    input: String,
    outputs: Vec<String>,
}

/// The elementary cell `G⁰`. Immutable once built.
#[derive(Debug, Clone)]
pub struct ElementaryCell {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    input: String,
    outputs: Vec<String>,
    vertex_index: HashMap<String, usize>,
    edge_ends: Vec<(usize, usize)>,
    boundary: Vec<usize>,
}

impl PartialEq for ElementaryCell {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.edges == other.edges
            && self.input == other.input
            && self.outputs == other.outputs
    }
}

impl ElementaryCell {
    /// Builds a cell and enforces every admissibility invariant.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        input: impl Into<String>,
        outputs: Vec<String>,
    ) -> Result<Self> {
        let cell = Self::from_parts(vertices, edges, input, outputs)?;
        let report = validate_cell(&cell);
        if report.ok {
            Ok(cell)
        } else {
            Err(Error::InvalidCell(report.error_messages()))
        }
    }

    /// Builds a cell checking only that identifiers resolve and are unique.
    /// Use [`validate_cell`] before handing the result to a solver.
    pub fn from_parts(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        input: impl Into<String>,
        outputs: Vec<String>,
    ) -> Result<Self> {
        let input = input.into();
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate vertex id '{v}'")));
            }
        }
        let mut seen = HashSet::new();
        let mut edge_ends = Vec::with_capacity(edges.len());
        for e in &edges {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Schema(format!("duplicate edge id '{}'", e.id)));
            }
            let lookup = |v: &str| {
                vertex_index.get(v).copied().ok_or_else(|| {
                    Error::Schema(format!("edge '{}' references unknown vertex '{v}'", e.id))
                })
            };
            edge_ends.push((lookup(&e.tail)?, lookup(&e.head)?));
        }
        let mut boundary = Vec::with_capacity(outputs.len() + 1);
        for v in std::iter::once(&input).chain(outputs.iter()) {
            let idx = vertex_index
                .get(v)
                .copied()
                .ok_or_else(|| Error::Schema(format!("boundary vertex '{v}' is not declared")))?;
            boundary.push(idx);
        }
        Ok(Self {
            vertices,
            edges,
            input,
            outputs,
            vertex_index,
            edge_ends,
            boundary,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Number of outputs `J`.
    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// `(tail, head)` vertex indices per edge.
    pub fn edge_ends(&self) -> &[(usize, usize)] {
        &self.edge_ends
    }

    /// Vertex indices of `W₀, W₁, …, W_J`.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.contains(&v)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for &(t, h) in &self.edge_ends {
            deg[t] += 1;
            deg[h] += 1;
        }
        deg
    }

    /// A copy with every edge coefficient replaced by the given map.
    pub fn map_edges(&self, f: impl Fn(&Edge) -> Edge) -> ElementaryCell {
        let edges = self.edges.iter().map(f).collect();
        // identifiers are unchanged so this cannot fail
        Self::from_parts(
            self.vertices.clone(),
            edges,
            self.input.clone(),
            self.outputs.clone(),
        )
        .expect("edge map preserves identifiers")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.config()).expect("cell serializes")
    }

    fn config(&self) -> CellConfig {
        CellConfig {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            input: self.input.clone(),
            outputs: self.outputs.clone(),
        }
    }
}

/// Parses a cell configuration and enforces all invariants.
pub fn parse_cell(config_text: &str) -> Result<ElementaryCell> {
    let cfg = parse_config(config_text)?;
    ElementaryCell::new(cfg.vertices, cfg.edges, cfg.input, cfg.outputs)
}

/// Parses a cell configuration checking only the schema, so that
/// [`validate_cell`] can report every invariant violation.
pub fn parse_cell_unchecked(config_text: &str) -> Result<ElementaryCell> {
    let cfg = parse_config(config_text)?;
    ElementaryCell::from_parts(cfg.vertices, cfg.edges, cfg.input, cfg.outputs)
}

fn parse_config(text: &str) -> Result<CellConfig> {
    let cfg: CellConfig = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => Error::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
            Category::Data => Error::Schema(e.to_string()),
        }
    })?;
    for e in &cfg.edges {
        for (name, c) in [("H", &e.h), ("B", &e.b)] {
            if c.kind == CoefficientKind::Constant && c.values.len() != 1 {
                return Err(Error::Schema(format!(
                    "edge '{}': constant {name} needs exactly one value",
                    e.id
                )));
            }
        }
    }
    Ok(cfg)
}

pub fn serialize_cell(cell: &ElementaryCell) -> String {
    cell.to_json()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn error_messages(&self) -> Vec<String> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| format!("{} ({})", d.message, d.location))
            .collect()
    }
}

/// Checks every admissibility invariant and reports each violation.
pub fn validate_cell(cell: &ElementaryCell) -> ValidationReport {
    let mut diags = Vec::new();
    let mut error = |message: String, location: String| {
        diags.push(Diagnostic {
            severity: Severity::Error,
            message,
            location,
        })
    };

    if cell.outputs.is_empty() {
        error("cell needs at least one output".into(), "outputs".into());
    }
    if cell.outputs.contains(&cell.input) {
        error("input is also listed as an output".into(), "input".into());
    }
    let mut seen = HashSet::new();
    for o in &cell.outputs {
        if !seen.insert(o) {
            error(format!("output '{o}' listed twice"), "outputs".into());
        }
    }

    for (e, &(t, h)) in cell.edges.iter().zip(&cell.edge_ends) {
        let loc = format!("edge '{}'", e.id);
        if !(e.length.is_finite() && e.length > 0.0) {
            error(
                format!("length {} is not positive and finite", e.length),
                loc.clone(),
            );
        }
        if t == h {
            error("self-loop".into(), loc.clone());
        }
        for (name, c) in [("H", &e.h), ("B", &e.b)] {
            if c.values.is_empty() {
                error(format!("{name} has no coefficients"), loc.clone());
            } else if c.values.iter().any(|v| !v.is_finite()) {
                error(format!("{name} has non-finite coefficients"), loc.clone());
            }
        }
        let h_ok = !e.h.values.is_empty() && e.h.values.iter().all(|v| v.is_finite());
        if h_ok && e.length.is_finite() && e.length > 0.0 {
            let (min_h, _) = e.h.extrema(e.length);
            if !(min_h > 0.0) {
                error(
                    format!("H not uniformly positive (min {min_h})"),
                    loc.clone(),
                );
            }
        }
    }

    let deg = cell.degrees();
    for (i, v) in cell.vertices.iter().enumerate() {
        let loc = format!("vertex '{v}'");
        if cell.boundary.contains(&i) {
            if deg[i] != 1 {
                error(
                    format!("boundary vertex degree ≠ 1 (degree {})", deg[i]),
                    loc,
                );
            }
        } else if deg[i] < 2 {
            error(
                format!("interior vertex degree < 2 (degree {})", deg[i]),
                loc,
            );
        }
    }

    if !cell.vertices.is_empty() && !is_connected(cell) {
        error("graph not connected".into(), "graph".into());
    }

    let ok = diags.iter().all(|d| d.severity != Severity::Error);
    ValidationReport {
        ok,
        diagnostics: diags,
    }
}

fn is_connected(cell: &ElementaryCell) -> bool {
    let n = cell.vertices.len();
    let mut adj = vec![Vec::new(); n];
    for &(t, h) in &cell.edge_ends {
        adj[t].push(h);
        adj[h].push(t);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const_edge(id: &str, t: &str, h: &str, len: f64) -> Edge {
        Edge::new(
            id,
            t,
            h,
            len,
            CoefficientSpec::constant(1.0),
            CoefficientSpec::constant(0.0),
        )
    }

    const SINGLE: &str = r#"{"vertices":["a","b"],"edges":[{"id":"e","tail":"a","head":"b","length":1,
        "H":{"kind":"constant","values":[1]},"B":{"kind":"constant","values":[0]}}],
        "input":"a","outputs":["b"]}"#;

    fn y_json() -> String {
        let edge = |id: &str, t: &str, h: &str| {
            format!(
                r#"{{"id":"{id}","tail":"{t}","head":"{h}","length":1,
                "H":{{"kind":"constant","values":[1]}},"B":{{"kind":"constant","values":[0]}}}}"#
            )
        };
        format!(
            r#"{{"vertices":["a","v","b","c"],"edges":[{},{},{}],"input":"a","outputs":["b","c"]}}"#,
            edge("e0", "a", "v"),
            edge("e1", "v", "b"),
            edge("e2", "v", "c")
        )
    }

    #[test]
    fn parses_single_edge() {
        let cell = parse_cell(SINGLE).unwrap();
        assert_eq!(cell.num_outputs(), 1);
        assert_eq!(cell.edges()[0].length, 1.0);
    }

    #[test]
    fn parses_y_cell() {
        let cell = parse_cell(&y_json()).unwrap();
        assert_eq!(cell.num_outputs(), 2);
        let v = cell.vertex_index("v").unwrap();
        assert!(!cell.is_boundary(v));
        let deg = cell.degrees();
        let got: Vec<_> = ["a", "v", "b", "c"]
            .iter()
            .map(|id| deg[cell.vertex_index(id).unwrap()])
            .collect();
        assert_eq!(got, vec![1, 3, 1, 1]);
    }

    #[test]
    fn rejects_input_of_degree_two() {
        let text = r#"{"vertices":["a","b","c"],"edges":[
          {"id":"e0","tail":"a","head":"b","length":1,"H":{"kind":"constant","values":[1]},"B":{"kind":"constant","values":[0]}},
          {"id":"e1","tail":"a","head":"c","length":1,"H":{"kind":"constant","values":[1]},"B":{"kind":"constant","values":[0]}}],
          "input":"a","outputs":["b"]}"#;
        let err = parse_cell(text).unwrap_err();
        assert!(
            err.to_string().contains("boundary vertex degree ≠ 1"),
            "{err}"
        );
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_cell("{\"vertices\": [\n  \"a\",,]}").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn schema_errors() {
        let missing = r#"{"vertices":["a","b"],"edges":[],"outputs":["b"]}"#;
        assert!(matches!(parse_cell(missing), Err(Error::Schema(_))));
        let dup = SINGLE.replace(r#"["a","b"]"#, r#"["a","a"]"#);
        assert!(matches!(parse_cell(&dup), Err(Error::Schema(_))));
        let bad_const = SINGLE.replace(r#""values":[1]"#, r#""values":[1,2]"#);
        assert!(matches!(parse_cell(&bad_const), Err(Error::Schema(_))));
    }

    #[test]
    fn validate_admissible_y_cell_is_clean() {
        let cell = parse_cell_unchecked(&y_json()).unwrap();
        let report = validate_cell(&cell);
        assert!(report.ok);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn validate_flags_sign_changing_h() {
        let mut e = const_edge("e", "a", "b", 1.0);
        e.h = CoefficientSpec::polynomial(vec![1.0, -2.0]);
        let cell = ElementaryCell::from_parts(
            vec!["a".into(), "b".into()],
            vec![e],
            "a",
            vec!["b".into()],
        )
        .unwrap();
        let report = validate_cell(&cell);
        assert!(!report.ok);
        assert!(report.diagnostics[0]
            .message
            .contains("H not uniformly positive"));
    }

    #[test]
    fn validate_flags_disconnected_graph() {
        let vs = ["a", "b", "c", "d"].map(String::from).to_vec();
        let edges = vec![
            const_edge("e0", "a", "b", 1.0),
            const_edge("e1", "c", "d", 1.0),
        ];
        let cell =
            ElementaryCell::from_parts(vs, edges, "a", vec!["b".into(), "c".into(), "d".into()])
                .unwrap();
        let report = validate_cell(&cell);
        assert!(!report.ok);
        assert!(report
            .diagnostics
            .iter()
            .any(|d| d.message.contains("graph not connected")));
    }

    #[test]
    fn self_loop_forbidden_parallel_edges_allowed() {
        let vs = ["a", "u", "v", "b"].map(String::from).to_vec();
        let edges = vec![
            const_edge("e0", "a", "u", 1.0),
            const_edge("p1", "u", "v", 1.0),
            const_edge("p2", "u", "v", 2.0),
            const_edge("e3", "v", "b", 1.0),
        ];
        assert!(ElementaryCell::new(vs.clone(), edges.clone(), "a", vec!["b".into()]).is_ok());
        let mut looped = edges;
        looped.push(const_edge("loop", "u", "u", 1.0));
        let err = ElementaryCell::new(vs, looped, "a", vec!["b".into()]).unwrap_err();
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn coefficient_evaluation() {
        assert_eq!(
            CoefficientSpec::constant(3.5).eval_on(0.7, 1.0).unwrap(),
            3.5
        );
        assert_eq!(
            CoefficientSpec::polynomial(vec![1.0, 2.0])
                .eval_on(0.5, 1.0)
                .unwrap(),
            2.0
        );
        assert_eq!(
            CoefficientSpec::polynomial(vec![0.0, 0.0, 1.0])
                .eval_on(3.0, 3.0)
                .unwrap(),
            9.0
        );
        assert!(matches!(
            CoefficientSpec::constant(1.0).eval_on(1.5, 1.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn extrema_find_interior_minimum() {
        // (ξ - 0.3)² + 0.01 has its minimum inside the interval
        let p = CoefficientSpec::polynomial(vec![0.1, -0.6, 1.0]);
        let (lo, hi) = p.extrema(1.0);
        assert!((lo - 0.01).abs() < 1e-14);
        assert!((hi - 0.5).abs() < 1e-14);
        // quartic with two interior wells
        let q = CoefficientSpec::polynomial(vec![0.0, 0.0, -1.0, 0.0, 1.0]);
        let (lo, _) = q.extrema(2.0);
        assert!((lo + 0.25).abs() < 1e-14);
    }

    #[test]
    fn reflection_and_rescaling() {
        let p = CoefficientSpec::polynomial(vec![1.0, 2.0, 3.0]);
        let r = p.reflected(2.0);
        for x in [0.0, 0.3, 1.1, 2.0] {
            assert!((r.eval(x) - p.eval(2.0 - x)).abs() < 1e-12);
        }
        let s = p.rescaled(0.5, 0.25);
        for x in [0.0, 0.1, 0.2] {
            assert!((s.eval(x) - 0.5 * p.eval(x / 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_one_census() {
        for text in [SINGLE.to_string(), y_json()] {
            let cell = parse_cell(&text).unwrap();
            let ones = cell.degrees().iter().filter(|&&d| d == 1).count();
            assert_eq!(ones, cell.num_outputs() + 1);
        }
    }
}
