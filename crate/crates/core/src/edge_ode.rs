//! Integration of `-(H w')' + B w = 0` along a single edge.
//!
//! The equation is integrated as the first-order system
//! `(w, p)' = (p / H, B w)` with `p = H w'`, which keeps the flux `p`
//! continuous even where `H` varies. Two solutions are carried together:
//! `φ₁` with `(w, p)(0) = (1, 0)` and `φ₂` with `(w, p)(0) = (0, 1)`.
//! Every other solution on the edge is a combination of these two.

use serde::Serialize;

use crate::cell::Edge;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-4;

/// Floor of the relative `|φ₂(L)|` below which the edge is treated as
/// carrying a Dirichlet eigenvalue.
pub const DEGENERATE_PHI2: f64 = 1e-12;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 4];

fn rhs(edge: &Edge, xi: f64, y: &State) -> State {
    let h = edge.h.eval(xi);
    let b = edge.b.eval(xi);
    [y[1] / h, b * y[0], y[3] / h, b * y[2]]
}

/// One Dormand–Prince step; returns the fifth-order update and the error
/// vector of the embedded pair.
fn dp5_step(edge: &Edge, x: f64, y: &State, h: f64) -> (State, State) {
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(edge, x, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..4 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(edge, x + C[s] * h, &ys);
    }
    let mut y_new = *y;
    let mut err = [0.0; 4];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..4 {
            y_new[i] += h * B5[s] * ks[i];
            err[i] += h * E[s] * ks[i];
        }
    }
    (y_new, err)
}

struct Trajectory {
    points: Vec<(f64, State)>,
    accepted: usize,
    rejected: usize,
    max_err: f64,
}

fn integrate(
    edge: &Edge,
    x0: f64,
    y0: State,
    x1: f64,
    tol: f64,
    record: bool,
) -> Result<Trajectory> {
    let span = x1 - x0;
    let mut traj = Trajectory {
        points: vec![(x0, y0)],
        accepted: 0,
        rejected: 0,
        max_err: 0.0,
    };
    if span <= 0.0 {
        return Ok(traj);
    }
    let max_step = edge.length / 4.0;
    let min_step = edge.length * 1e-13;
    let mut h = (edge.length / 16.0).min(span);
    let (mut x, mut y) = (x0, y0);
    while x < x1 {
        let last = x + h >= x1;
        let step = if last { x1 - x } else { h };
        let (y_new, e) = dp5_step(edge, x, &y, step);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                edge: edge.id.clone(),
                xi: x,
            });
        }
        let err = (0..4)
            .map(|i| e[i].abs() / (tol * (1.0 + y[i].abs().max(y_new[i].abs()))))
            .fold(0.0, f64::max);
        if err <= 1.0 {
            x = if last { x1 } else { x + step };
            y = y_new;
            traj.accepted += 1;
            traj.max_err = traj.max_err.max(err * tol);
            if record || x == x1 {
                traj.points.push((x, y));
            }
        } else {
            traj.rejected += 1;
        }
        if x >= x1 {
            break;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (step * factor).min(max_step);
        if h < min_step {
            return Err(Error::StepUnderflow {
                edge: edge.id.clone(),
                xi: x,
            });
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisSample {
    pub xi: f64,
    pub phi1: f64,
    /// `H φ₁'`
    pub flux1: f64,
    pub phi2: f64,
    /// `H φ₂'`
    pub flux2: f64,
}

impl BasisSample {
    fn from_state(xi: f64, y: &State) -> Self {
        Self {
            xi,
            phi1: y[0],
            flux1: y[1],
            phi2: y[2],
            flux2: y[3],
        }
    }

    fn state(&self) -> State {
        [self.phi1, self.flux1, self.phi2, self.flux2]
    }

    /// `φ₁ Hφ₂' − φ₂ Hφ₁'`, identically 1 for the exact basis.
    pub fn wronskian(&self) -> f64 {
        self.phi1 * self.flux2 - self.phi2 * self.flux1
    }
}

/// Fundamental system of one edge with its integrator record.
#[derive(Debug, Clone)]
pub struct EdgeSolutionBasis {
    edge: Edge,
    tol: f64,
    samples: Vec<BasisSample>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest accepted local error estimate.
    pub max_local_error: f64,
}

impl EdgeSolutionBasis {
    pub fn edge(&self) -> &Edge {
        &self.edge
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn samples(&self) -> &[BasisSample] {
        &self.samples
    }

    pub fn end(&self) -> &BasisSample {
        self.samples.last().expect("basis has at least one sample")
    }

    pub fn max_wronskian_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.wronskian() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Basis values at an arbitrary `ξ`, re-integrated from the nearest
    /// stored sample at the basis tolerance.
    pub fn sample_at(&self, xi: f64) -> Result<BasisSample> {
        let len = self.edge.length;
        if !(0.0..=len).contains(&xi) {
            return Err(Error::OutOfRange {
                what: "xi",
                value: xi,
                lo: 0.0,
                hi: len,
            });
        }
        let k = self.samples.partition_point(|s| s.xi <= xi) - 1;
        let start = self.samples[k];
        if start.xi == xi {
            return Ok(start);
        }
        let traj = integrate(&self.edge, start.xi, start.state(), xi, self.tol, false)?;
        let (x, y) = traj.points.last().copied().expect("trajectory end");
        Ok(BasisSample::from_state(x, &y))
    }

    /// CSV dump: `xi,phi1,H_phi1_prime,phi2,H_phi2_prime`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,phi1,H_phi1_prime,phi2,H_phi2_prime\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.xi, s.phi1, s.flux1, s.phi2, s.flux2
            ));
        }
        out
    }
}

/// Integrates the fundamental system along `edge` with local error ≤ `tol`.
pub fn edge_fundamental_system(edge: &Edge, tol: f64) -> Result<EdgeSolutionBasis> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::OutOfRange {
            what: "tol",
            value: tol,
            lo: MIN_TOL,
            hi: MAX_TOL,
        });
    }
    let traj = integrate(edge, 0.0, [1.0, 0.0, 0.0, 1.0], edge.length, tol, true)?;
    Ok(EdgeSolutionBasis {
        edge: edge.clone(),
        tol,
        samples: traj
            .points
            .iter()
            .map(|(x, y)| BasisSample::from_state(*x, y))
            .collect(),
        accepted_steps: traj.accepted,
        rejected_steps: traj.rejected,
        max_local_error: traj.max_err,
    })
}

/// End values `(φ₁, Hφ₁', φ₂, Hφ₂')(L)` from `steps` equal Dormand–Prince
/// steps, without error control. Used for convergence-order studies.
pub fn fundamental_end_fixed_step(edge: &Edge, steps: usize) -> BasisSample {
    let h = edge.length / steps as f64;
    let mut y = [1.0, 0.0, 0.0, 1.0];
    for i in 0..steps {
        y = dp5_step(edge, i as f64 * h, &y, h).0;
    }
    BasisSample::from_state(edge.length, &y)
}

/// The 2×2 map from end values `(w(0), w(L))` to the outward conormal
/// derivatives `(−Hw'(0), Hw'(L))` of the solution on one edge.
///
/// With this orientation the edge energy is `∫ H w'² + B w² = uᵀ T u`, so `T`
/// is symmetric for the exact solution operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDtN {
    pub edge_id: String,
    pub matrix: [[f64; 2]; 2],
    pub phi2_end: f64,
}

impl EdgeDtN {
    /// Raw `(Hw'(0), Hw'(L))` for end data `(u0, u1)`.
    pub fn end_fluxes(&self, u0: f64, u1: f64) -> (f64, f64) {
        let t = &self.matrix;
        let q0 = t[0][0] * u0 + t[0][1] * u1;
        let q1 = t[1][0] * u0 + t[1][1] * u1;
        (-q0, q1)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let t = &self.matrix;
        let norm = t.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        (t[0][1] - t[1][0]).abs() / (1.0 + norm)
    }
}

/// `|φ₂(L)|` against `max |φ₂|` along the edge. The cut-off follows the
/// integration tolerance, since at an eigenvalue `φ₂(L)` is pure
/// integration error.
fn is_degenerate(basis: &EdgeSolutionBasis) -> bool {
    let scale = basis
        .samples
        .iter()
        .map(|s| s.phi2.abs())
        .fold(0.0, f64::max);
    let rel = (100.0 * basis.tol).clamp(DEGENERATE_PHI2, 1e-6);
    basis.end().phi2.abs() <= rel * scale.max(f64::MIN_POSITIVE)
}

pub fn edge_dtn(basis: &EdgeSolutionBasis) -> Result<EdgeDtN> {
    let end = basis.end();
    if is_degenerate(basis) {
        return Err(Error::DegenerateEdge {
            edge: basis.edge.id.clone(),
            phi2: end.phi2,
        });
    }
    // Hw'(0) = (u1 - φ₁(L) u0) / φ₂(L); Hw'(L) = Hφ₁'(L) u0 + Hφ₂'(L) Hw'(0).
    // Both off-diagonal entries are formed directly so that their agreement
    // is a genuine check of the integration.
    let d = end.phi2;
    let matrix = [
        [end.phi1 / d, -1.0 / d],
        [end.flux1 - end.flux2 * end.phi1 / d, end.flux2 / d],
    ];
    Ok(EdgeDtN {
        edge_id: basis.edge.id.clone(),
        matrix,
        phi2_end: d,
    })
}

/// `w(ξ)` for the edge solution with end values `(u0, u1)`.
pub fn edge_evaluate(basis: &EdgeSolutionBasis, u0: f64, u1: f64, xi: f64) -> Result<f64> {
    let (w, _) = edge_evaluate_with_flux(basis, u0, u1, xi)?;
    Ok(w)
}

/// `(w(ξ), Hw'(ξ))` for the edge solution with end values `(u0, u1)`.
pub fn edge_evaluate_with_flux(
    basis: &EdgeSolutionBasis,
    u0: f64,
    u1: f64,
    xi: f64,
) -> Result<(f64, f64)> {
    let end = basis.end();
    if is_degenerate(basis) {
        return Err(Error::DegenerateEdge {
            edge: basis.edge.id.clone(),
            phi2: end.phi2,
        });
    }
    let c = (u1 - end.phi1 * u0) / end.phi2;
    let s = basis.sample_at(xi)?;
    Ok((u0 * s.phi1 + c * s.phi2, u0 * s.flux1 + c * s.flux2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CoefficientSpec;
    use std::f64::consts::PI;

    fn edge(h: f64, b: f64, len: f64) -> Edge {
        Edge::new(
            "e",
            "a",
            "b",
            len,
            CoefficientSpec::constant(h),
            CoefficientSpec::constant(b),
        )
    }

    fn gamma_edge() -> Edge {
        edge(1.0, -(PI / 3.0).powi(2), 1.0)
    }

    #[test]
    fn laplace_edge_basis_is_linear() {
        let basis = edge_fundamental_system(&edge(1.0, 0.0, 1.0), DEFAULT_TOL).unwrap();
        let first = basis.samples()[0];
        assert_eq!(
            (first.phi1, first.flux1, first.phi2, first.flux2),
            (1.0, 0.0, 0.0, 1.0)
        );
        for s in basis.samples() {
            assert!((s.phi1 - 1.0).abs() < 1e-12);
            assert!((s.phi2 - s.xi).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_edge_basis_matches_trigonometric_closed_form() {
        let basis = edge_fundamental_system(&gamma_edge(), DEFAULT_TOL).unwrap();
        let end = basis.end();
        assert!((end.phi1 - 0.5).abs() < 1e-9);
        // sin(π/3)/(π/3)
        assert!((end.phi2 - 0.826_993_343_132_688_1).abs() < 1e-9);
    }

    #[test]
    fn stiff_conductance_edge() {
        let basis = edge_fundamental_system(&edge(2.0, 0.0, 0.5), DEFAULT_TOL).unwrap();
        assert!((basis.end().phi2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tolerance_range_is_enforced() {
        assert!(edge_fundamental_system(&gamma_edge(), 1e-3).is_err());
        assert!(edge_fundamental_system(&gamma_edge(), 1e-15).is_err());
    }

    #[test]
    fn dtn_end_fluxes() {
        let b = edge_fundamental_system(&edge(1.0, 0.0, 1.0), DEFAULT_TOL).unwrap();
        let (f0, f1) = edge_dtn(&b).unwrap().end_fluxes(1.0, 0.0);
        assert!((f0 + 1.0).abs() < 1e-12 && (f1 + 1.0).abs() < 1e-12);

        let b = edge_fundamental_system(&edge(2.0, 0.0, 0.5), DEFAULT_TOL).unwrap();
        let (f0, f1) = edge_dtn(&b).unwrap().end_fluxes(1.0, 0.0);
        assert!((f0 + 4.0).abs() < 1e-12 && (f1 + 4.0).abs() < 1e-12);

        let b = edge_fundamental_system(&gamma_edge(), DEFAULT_TOL).unwrap();
        let dtn = edge_dtn(&b).unwrap();
        for m in [0.1, 0.25, 0.4] {
            let (f0, _) = dtn.end_fluxes(1.0, m);
            let expected = (m - 0.5) / 0.826_993_343_132_688_1;
            assert!((f0 - expected).abs() < 1e-9, "m={m}: {f0} vs {expected}");
        }
    }

    #[test]
    fn degenerate_edge_is_refused() {
        // B = -π² on a unit edge: φ₂(1) = sin(π)/π = 0
        let b = edge_fundamental_system(&edge(1.0, -PI * PI, 1.0), 1e-12).unwrap();
        assert!(matches!(edge_dtn(&b), Err(Error::DegenerateEdge { .. })));
        assert!(matches!(
            edge_evaluate(&b, 1.0, 0.0, 0.5),
            Err(Error::DegenerateEdge { .. })
        ));
    }

    #[test]
    fn evaluation() {
        let b = edge_fundamental_system(&edge(1.0, 0.0, 1.0), DEFAULT_TOL).unwrap();
        assert!((edge_evaluate(&b, 1.0, 0.5, 0.5).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(edge_evaluate(&b, 1.0, 0.5, 0.0).unwrap(), 1.0);
        assert!(edge_evaluate(&b, 1.0, 0.5, 1.01).is_err());

        let b = edge_fundamental_system(&gamma_edge(), DEFAULT_TOL).unwrap();
        let w = edge_evaluate(&b, 1.0, 0.25, 0.5).unwrap();
        let g = PI / 3.0;
        let a = (0.5 - 0.25) / g.sin();
        let exact = (g * 0.5).cos() - a * (g * 0.5).sin();
        assert!((exact - 0.721_687_836_487_032_2).abs() < 1e-15);
        assert!((w - exact).abs() < 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn evaluation_next_to_a_stored_sample() {
        let b = edge_fundamental_system(&gamma_edge(), DEFAULT_TOL).unwrap();
        for s in b.samples().to_vec() {
            for dx in [1e-15, 1e-12, 1e-9] {
                let xi = (s.xi + dx).min(1.0);
                assert!(b.sample_at(xi).is_ok(), "xi = {xi}");
            }
        }
    }

    #[test]
    fn resonant_edge_is_refused() {
        let pi2 = std::f64::consts::PI.powi(2);
        for tol in [1e-12, DEFAULT_TOL, 1e-8] {
            let b = edge_fundamental_system(&edge(1.0, -pi2, 1.0), tol).unwrap();
            assert!(
                matches!(edge_dtn(&b), Err(Error::DegenerateEdge { .. })),
                "tol {tol}"
            );
        }
        let b = edge_fundamental_system(&edge(1.0, -0.99 * pi2, 1.0), DEFAULT_TOL).unwrap();
        assert!(edge_dtn(&b).is_ok());
    }

    #[test]
    fn wronskian_is_conserved() {
        let mut e = edge(1.0, 0.0, 1.7);
        e.h = CoefficientSpec::polynomial(vec![1.0, 0.5, 0.25]);
        e.b = CoefficientSpec::polynomial(vec![-0.3, 0.2]);
        for edge in [gamma_edge(), e] {
            let b = edge_fundamental_system(&edge, DEFAULT_TOL).unwrap();
            assert!(
                b.max_wronskian_drift() <= 1e-10,
                "{}",
                b.max_wronskian_drift()
            );
        }
    }

    #[test]
    fn fixed_step_convergence_order() {
        let g = PI / 3.0;
        let exact = (g.cos(), g.sin() / g);
        let mut prev = f64::INFINITY;
        for steps in [1usize, 2, 4, 8] {
            let s = fundamental_end_fixed_step(&gamma_edge(), steps);
            let err = (s.phi1 - exact.0).abs().max((s.phi2 - exact.1).abs());
            if prev > 1e-12 && err > 1e-13 {
                assert!(prev / err >= 4.0, "steps {steps}: {prev} -> {err}");
            }
            prev = err;
        }
    }

    #[test]
    fn reversal_swaps_ends() {
        let mut e = edge(1.0, 0.0, 1.3);
        e.h = CoefficientSpec::polynomial(vec![0.8, 0.6, -0.1]);
        e.b = CoefficientSpec::polynomial(vec![0.2, -0.3]);
        let t = edge_dtn(&edge_fundamental_system(&e, 1e-12).unwrap())
            .unwrap()
            .matrix;
        let r = edge_dtn(&edge_fundamental_system(&e.reversed(), 1e-12).unwrap())
            .unwrap()
            .matrix;
        for i in 0..2 {
            for j in 0..2 {
                assert!((t[i][j] - r[1 - i][1 - j]).abs() < 1e-10);
            }
        }
    }
}
