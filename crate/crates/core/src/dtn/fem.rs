//! Independent P1 finite-element solver for the cell Dirichlet problem.
//!
//! Shares nothing with the shooting path except the cell description. Each
//! edge is meshed uniformly, its interior nodes are condensed onto the two
//! end nodes with a tridiagonal LDLᵀ sweep, and the resulting vertex system
//! is solved densely.

use nalgebra::DMatrix;

use super::{package_solution, solve_vertex_system, CellSolution, DirichletData};
use crate::cell::{Edge, ElementaryCell};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FemSolution {
    pub solution: CellSolution,
    /// Whether the clamped stiffness-plus-mass matrix is positive definite.
    pub definite: bool,
    pub n_per_edge: usize,
}

/// Edge matrix condensed onto its end nodes, plus whether every interior
/// pivot was positive.
fn condensed_edge(edge: &Edge, n: usize) -> Result<([[f64; 2]; 2], bool)> {
    let h = edge.length / n as f64;
    let g = 0.5 / 3f64.sqrt();
    let gauss = [0.5 - g, 0.5 + g];
    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    for e in 0..n {
        let x0 = e as f64 * h;
        for s in gauss {
            let x = x0 + s * h;
            let w = 0.5 * h;
            let hk = edge.h.eval(x) * w / (h * h);
            let bk = edge.b.eval(x) * w;
            let (n0, n1) = (1.0 - s, s);
            diag[e] += hk + bk * n0 * n0;
            diag[e + 1] += hk + bk * n1 * n1;
            off[e] += -hk + bk * n0 * n1;
        }
    }
    if n == 1 {
        return Ok(([[diag[0], off[0]], [off[0], diag[1]]], true));
    }
    // interior block: nodes 1..n-1; coupling columns are off[0]·e₁ and
    // off[n-1]·e_{n-1}
    let m = n - 1;
    let mut pivots = vec![0.0; m];
    let mut lower = vec![0.0; m];
    let mut definite = true;
    for i in 0..m {
        let sub = if i == 0 { 0.0 } else { off[i] };
        pivots[i] = diag[i + 1]
            - if i == 0 {
                0.0
            } else {
                sub * sub / pivots[i - 1]
            };
        if i > 0 {
            lower[i] = sub / pivots[i - 1];
        }
        if !(pivots[i].abs() > 1e-300) {
            return Err(Error::SingularSystem {
                context: format!("FEM interior of edge '{}'", edge.id),
            });
        }
        definite &= pivots[i] > 0.0;
    }
    let solve = |rhs: &mut [f64]| {
        for i in 1..m {
            rhs[i] -= lower[i] * rhs[i - 1];
        }
        for i in 0..m {
            rhs[i] /= pivots[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= lower[i + 1] * rhs[i + 1];
        }
    };
    let mut z0 = vec![0.0; m];
    z0[0] = off[0];
    solve(&mut z0);
    let mut z1 = vec![0.0; m];
    z1[m - 1] = off[n - 1];
    solve(&mut z1);
    let t00 = diag[0] - off[0] * z0[0];
    let t01 = -off[0] * z1[0];
    let t10 = -off[n - 1] * z0[m - 1];
    let t11 = diag[n] - off[n - 1] * z1[m - 1];
    let sym = 0.5 * (t01 + t10);
    Ok(([[t00, sym], [sym, t11]], definite))
}

/// Solves the Dirichlet problem by P1 elements with `n_per_edge` elements on
/// every edge.
pub fn fem_oracle_solve(
    cell: &ElementaryCell,
    data: &DirichletData,
    n_per_edge: usize,
) -> Result<FemSolution> {
    if n_per_edge == 0 {
        return Err(Error::InvalidInput("n_per_edge must be positive".into()));
    }
    if data.x.len() != cell.num_outputs() {
        return Err(Error::InvalidInput(format!(
            "expected {} output values, got {}",
            cell.num_outputs(),
            data.x.len()
        )));
    }
    let mut definite = true;
    let mut maps = Vec::with_capacity(cell.edges().len());
    for e in cell.edges() {
        let (t, d) = condensed_edge(e, n_per_edge)?;
        definite &= d;
        maps.push(t);
    }
    let k = super::assemble(cell, maps.into_iter());
    let mut fixed = vec![None; cell.vertices().len()];
    for (&v, x) in cell.boundary().iter().zip(data.as_vec()) {
        fixed[v] = Some(x);
    }
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
    if definite && !free.is_empty() {
        let kff = DMatrix::from_fn(free.len(), free.len(), |r, c| k[(free[r], free[c])]);
        definite = kff.cholesky().is_some();
    }
    let (values, condition) = solve_vertex_system(&k, &fixed, "FEM vertex system")?;
    Ok(FemSolution {
        solution: package_solution(cell, 0, &k, values, condition, &fixed),
        definite,
        n_per_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtn::solve_dirichlet;
    use crate::fixtures;
    use std::f64::consts::PI;

    #[test]
    fn y_cell_is_exact_for_b_zero() {
        let f = fem_oracle_solve(
            &fixtures::y_cell(0.0),
            &DirichletData::new(1.0, vec![0.25, 0.25]).unwrap(),
            16,
        )
        .unwrap();
        assert!((f.solution.value("v").unwrap() - 0.5).abs() < 1e-12);
        assert!(f.definite);
    }

    #[test]
    fn second_order_on_gamma_edge() {
        let cell = fixtures::gamma_edge(PI / 3.0);
        let data = DirichletData::new(1.0, vec![0.25]).unwrap();
        // F₀ = γ(cos γ − m)/sin γ
        let g = PI / 3.0;
        let exact = g * (g.cos() - 0.25) / g.sin();
        let e64 = (fem_oracle_solve(&cell, &data, 64).unwrap().solution.fluxes[0] - exact).abs();
        let e128 = (fem_oracle_solve(&cell, &data, 128).unwrap().solution.fluxes[0] - exact).abs();
        let ratio = e64 / e128;
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn agrees_with_shooting_at_256() {
        for cell in [
            fixtures::gamma_edge(PI / 3.0),
            fixtures::y_cell(0.3),
            fixtures::y_cell(-0.5),
        ] {
            let data = DirichletData::from_slice(
                &(0..=cell.num_outputs())
                    .map(|i| 1.0 - 0.3 * i as f64)
                    .collect::<Vec<_>>(),
            );
            let a = solve_dirichlet(&cell, &data, 1e-12).unwrap();
            let b = fem_oracle_solve(&cell, &data, 256).unwrap();
            for (x, y) in a.vertex_values.iter().zip(&b.solution.vertex_values) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn strongly_negative_b_is_indefinite() {
        let cell = fixtures::single_edge(1.0, -100.0, 1.0);
        let f = fem_oracle_solve(&cell, &DirichletData::new(1.0, vec![0.0]).unwrap(), 256).unwrap();
        assert!(!f.definite);
    }
}
