//! Cell-level Dirichlet problems and the boundary flux (Dirichlet-to-Neumann)
//! map.
//!
//! Every edge is reduced to its 2×2 conormal map, the edge maps are assembled
//! into a vertex stiffness matrix `K`, and interior vertices are eliminated
//! by a dense LU solve. For a solution with vertex values `u`, the boundary
//! fluxes are
//!
//! * `F₀ = (K u)(W₀)` (derivative directed into the graph at the input),
//! * `F_j = −(K u)(W_j)` for `j ≥ 1` (outward derivative at the outputs).

mod fem;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cell::{serialize_cell, ElementaryCell};
use crate::edge_ode::{
    edge_dtn, edge_evaluate, edge_evaluate_with_flux, edge_fundamental_system, EdgeDtN,
    EdgeSolutionBasis, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::scaling::{classify_regime, RegimeClass};

pub use fem::{fem_oracle_solve, FemSolution};

/// Equispaced sample points per edge used as the finite surrogate for
/// statements about the interior of the cell.
pub const SAMPLES_PER_EDGE: usize = 33;

/// Pivots below this fraction of the matrix norm count as singular.
const SINGULAR_PIVOT: f64 = 1e-13;

/// Dirichlet data `(X₀, X₁, …, X_J)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletData {
    pub x0: f64,
    pub x: Vec<f64>,
}

impl DirichletData {
    pub fn new(x0: f64, x: Vec<f64>) -> Result<Self> {
        if !x0.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("Dirichlet data must be finite".into()));
        }
        Ok(Self { x0, x })
    }

    /// Unit data at boundary position `k` (0 = input).
    pub fn unit(j: usize, k: usize) -> Self {
        let mut all = vec![0.0; j + 1];
        all[k] = 1.0;
        Self::from_slice(&all)
    }

    pub fn from_slice(all: &[f64]) -> Self {
        Self {
            x0: all[0],
            x: all[1..].to_vec(),
        }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        std::iter::once(self.x0)
            .chain(self.x.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSolution {
    #[serde(skip)]
    cell_key: u64,
    pub vertex_ids: Vec<String>,
    pub vertex_values: Vec<f64>,
    /// `(w(0), w(L))` per edge, in cell edge order.
    pub edge_end_values: Vec<(f64, f64)>,
    /// `(F₀, F₁, …, F_J)`.
    pub fluxes: Vec<f64>,
    /// Largest conormal imbalance over vertices carrying a Kirchhoff condition.
    pub kirchhoff_residual: f64,
    /// 1-norm condition estimate of the eliminated interior block.
    pub condition: f64,
}

impl CellSolution {
    pub fn value(&self, vertex_id: &str) -> Option<f64> {
        self.vertex_ids
            .iter()
            .position(|v| v == vertex_id)
            .map(|i| self.vertex_values[i])
    }

    /// Values at `W₀, W₁, …, W_J`.
    pub fn boundary_values(&self, cell: &ElementaryCell) -> Vec<f64> {
        cell.boundary()
            .iter()
            .map(|&i| self.vertex_values[i])
            .collect()
    }
}

/// A pointwise sample `w(ξ)` on edge `edge_id`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureSample {
    pub edge_id: String,
    pub xi: f64,
    pub w: f64,
}

/// `(F₀, …, F_J)ᵀ = A (X₀, …, X_J)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtNMatrix {
    pub a: DMatrix<f64>,
}

impl DtNMatrix {
    pub fn num_outputs(&self) -> usize {
        self.a.nrows() - 1
    }

    /// `F_k(X₀, X)`.
    pub fn flux(&self, k: usize, x0: f64, x: &[f64]) -> f64 {
        self.a[(k, 0)] * x0
            + x.iter()
                .enumerate()
                .map(|(i, xi)| self.a[(k, i + 1)] * xi)
                .sum::<f64>()
    }

    /// `(F₀, …, F_J)(X₀, X)`.
    pub fn fluxes(&self, x0: f64, x: &[f64]) -> Vec<f64> {
        (0..self.a.nrows()).map(|k| self.flux(k, x0, x)).collect()
    }

    /// Green-transformed matrix: row 0 kept, rows `j ≥ 1` negated. Symmetric
    /// for an exact flux map.
    pub fn green_form(&self) -> DMatrix<f64> {
        let mut m = self.a.clone();
        for j in 1..m.nrows() {
            m.row_mut(j).neg_mut();
        }
        m
    }

    /// `max |M − Mᵀ| / max(1, max |M|)`.
    pub fn green_symmetry_defect(&self) -> f64 {
        let m = self.green_form();
        let scale = m.amax().max(1.0);
        (&m - m.transpose()).amax() / scale
    }

    /// `(F₀, …, F_J) → (F₀, …, F_J)` rescaled by `factor` (scaled cells).
    pub fn scaled(&self, factor: f64) -> DtNMatrix {
        DtNMatrix {
            a: &self.a * factor,
        }
    }

    /// The matrix as a CSV block, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.a.nrows() {
            let row: Vec<String> = (0..self.a.ncols())
                .map(|c| format!("{:.16e}", self.a[(r, c)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn cell_key(cell: &ElementaryCell) -> u64 {
    let mut h = DefaultHasher::new();
    serialize_cell(cell).hash(&mut h);
    h.finish()
}

/// Edge bases and the assembled vertex stiffness of one cell, reusable across
/// many boundary-value solves.
#[derive(Debug, Clone)]
pub struct CellSolver {
    cell: ElementaryCell,
    key: u64,
    tol: f64,
    bases: Vec<EdgeSolutionBasis>,
    edge_maps: Vec<EdgeDtN>,
    stiffness: DMatrix<f64>,
}

impl CellSolver {
    pub fn new(cell: &ElementaryCell, tol: f64) -> Result<Self> {
        let mut bases = Vec::with_capacity(cell.edges().len());
        let mut edge_maps = Vec::with_capacity(cell.edges().len());
        for e in cell.edges() {
            let basis = edge_fundamental_system(e, tol)?;
            edge_maps.push(edge_dtn(&basis)?);
            bases.push(basis);
        }
        let stiffness = assemble(cell, edge_maps.iter().map(|t| t.matrix));
        Ok(Self {
            cell: cell.clone(),
            key: cell_key(cell),
            tol,
            bases,
            edge_maps,
            stiffness,
        })
    }

    pub fn cell(&self) -> &ElementaryCell {
        &self.cell
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn bases(&self) -> &[EdgeSolutionBasis] {
        &self.bases
    }

    pub fn edge_maps(&self) -> &[EdgeDtN] {
        &self.edge_maps
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn solve_dirichlet(&self, data: &DirichletData) -> Result<CellSolution> {
        let j = self.cell.num_outputs();
        if data.x.len() != j {
            return Err(Error::InvalidInput(format!(
                "expected {j} output values, got {}",
                data.x.len()
            )));
        }
        let mut fixed = vec![None; self.cell.vertices().len()];
        for (&v, x) in self.cell.boundary().iter().zip(data.as_vec()) {
            fixed[v] = Some(x);
        }
        self.solve_with(&fixed)
    }

    fn solve_with(&self, fixed: &[Option<f64>]) -> Result<CellSolution> {
        let (values, condition) = solve_vertex_system(&self.stiffness, fixed, "cell interior")?;
        Ok(self.package(values, condition, fixed))
    }

    fn package(&self, values: Vec<f64>, condition: f64, fixed: &[Option<f64>]) -> CellSolution {
        package_solution(
            &self.cell,
            self.key,
            &self.stiffness,
            values,
            condition,
            fixed,
        )
    }

    pub fn flux_map(&self) -> Result<DtNMatrix> {
        flux_map_from_stiffness(&self.cell, &self.stiffness)
    }

    /// Mixed problem `Q(W₀) = 1`, `F_j(Q) = 0`; requires `B ≥ 0`, `B ≢ 0`.
    pub fn solve_q(&self) -> Result<CellSolution> {
        let regime = classify_regime(&self.cell);
        if regime != RegimeClass::PermeablePlus {
            return Err(Error::Regime(format!(
                "Q needs B >= 0 and B not identically zero, cell is {regime:?}"
            )));
        }
        let mut fixed = vec![None; self.cell.vertices().len()];
        fixed[self.cell.boundary()[0]] = Some(1.0);
        let sol = self.solve_with(&fixed)?;
        let outs = &sol.boundary_values(&self.cell)[1..];
        if let Some(q) = outs.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::Postcondition(format!("Q(W_k) = {q} not in (0, 1)")));
        }
        if !(sol.fluxes[0] > 0.0) {
            return Err(Error::Postcondition(format!(
                "F0(Q) = {} not positive",
                sol.fluxes[0]
            )));
        }
        Ok(sol)
    }

    /// Dirichlet problem with all boundary data 1; requires `B ≤ 0`, `B ≢ 0`.
    pub fn solve_r(&self) -> Result<CellSolution> {
        let regime = classify_regime(&self.cell);
        if regime != RegimeClass::PermeableMinus {
            return Err(Error::Regime(format!(
                "R needs B <= 0 and B not identically zero, cell is {regime:?}"
            )));
        }
        let j = self.cell.num_outputs();
        let sol = self.solve_dirichlet(&DirichletData::new(1.0, vec![1.0; j])?)?;
        let min_interior = self
            .interior_samples(&sol, SAMPLES_PER_EDGE)?
            .iter()
            .map(|s| s.w)
            .fold(f64::INFINITY, f64::min);
        if !(min_interior > 1.0) {
            return Err(Error::Postcondition(format!(
                "sampled min R = {min_interior} is not > 1"
            )));
        }
        if !(sol.fluxes[0] < 0.0) || sol.fluxes[1..].iter().any(|&f| !(f > 0.0)) {
            return Err(Error::Postcondition(format!(
                "R flux signs violated: {:?}",
                sol.fluxes
            )));
        }
        Ok(sol)
    }

    /// `a(w, w) = Σ_e ∫ (H w'² + B w²) dξ` by composite Gauss–Legendre
    /// quadrature of the edge solutions, independent of the boundary fluxes.
    pub fn energy_integral(&self, sol: &CellSolution) -> Result<f64> {
        const PANELS: usize = 16;
        const NODES: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.236_926_885_056_189_1,
            0.478_628_670_499_366_5,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
        ];
        self.check(sol)?;
        let mut total = 0.0;
        for (e, edge) in self.cell.edges().iter().enumerate() {
            let (u0, u1) = sol.edge_end_values[e];
            let h = edge.length / PANELS as f64;
            for p in 0..PANELS {
                let mid = (p as f64 + 0.5) * h;
                for (x, wt) in NODES.iter().zip(WEIGHTS) {
                    let xi = mid + 0.5 * h * x;
                    let (w, flux) = edge_evaluate_with_flux(&self.bases[e], u0, u1, xi)?;
                    total +=
                        0.5 * h * wt * (flux * flux / edge.h.eval(xi) + edge.b.eval(xi) * w * w);
                }
            }
        }
        Ok(total)
    }

    /// `w(ξ)` on edge `edge` of a solution of this cell.
    pub fn evaluate(&self, sol: &CellSolution, edge: usize, xi: f64) -> Result<f64> {
        self.check(sol)?;
        let (u0, u1) = sol.edge_end_values[edge];
        edge_evaluate(&self.bases[edge], u0, u1, xi)
    }

    /// `points` equispaced samples on every edge, endpoints included.
    pub fn sample(&self, sol: &CellSolution, points: usize) -> Result<Vec<PressureSample>> {
        self.samples_where(sol, points, |_, _| true)
    }

    /// Like [`sample`](Self::sample) but without points sitting on
    /// `W₀, …, W_J`.
    pub fn interior_samples(
        &self,
        sol: &CellSolution,
        points: usize,
    ) -> Result<Vec<PressureSample>> {
        let cell = &self.cell;
        self.samples_where(sol, points, |e, end| match end {
            Some(false) => !cell.is_boundary(cell.edge_ends()[e].0),
            Some(true) => !cell.is_boundary(cell.edge_ends()[e].1),
            None => true,
        })
    }

    fn samples_where(
        &self,
        sol: &CellSolution,
        points: usize,
        keep: impl Fn(usize, Option<bool>) -> bool,
    ) -> Result<Vec<PressureSample>> {
        self.check(sol)?;
        let points = points.max(2);
        let mut out = Vec::new();
        for (e, edge) in self.cell.edges().iter().enumerate() {
            let (u0, u1) = sol.edge_end_values[e];
            for i in 0..points {
                let end = match i {
                    0 => Some(false),
                    i if i == points - 1 => Some(true),
                    _ => None,
                };
                if !keep(e, end) {
                    continue;
                }
                let (xi, w) = match end {
                    Some(false) => (0.0, u0),
                    Some(true) => (edge.length, u1),
                    None => {
                        let xi = edge.length * i as f64 / (points - 1) as f64;
                        (xi, edge_evaluate(&self.bases[e], u0, u1, xi)?)
                    }
                };
                out.push(PressureSample {
                    edge_id: edge.id.clone(),
                    xi,
                    w,
                });
            }
        }
        Ok(out)
    }

    fn check(&self, sol: &CellSolution) -> Result<()> {
        if sol.cell_key != self.key {
            Err(Error::MismatchedCells)
        } else {
            Ok(())
        }
    }
}

/// Column `k` is the flux vector of the solution with unit data at the
/// `k`-th boundary vertex.
pub(crate) fn flux_map_from_stiffness(
    cell: &ElementaryCell,
    k: &DMatrix<f64>,
) -> Result<DtNMatrix> {
    let j = cell.num_outputs();
    let mut a = DMatrix::zeros(j + 1, j + 1);
    for col in 0..=j {
        let mut fixed = vec![None; cell.vertices().len()];
        for (i, &v) in cell.boundary().iter().enumerate() {
            fixed[v] = Some(if i == col { 1.0 } else { 0.0 });
        }
        let (values, cond) = solve_vertex_system(k, &fixed, "cell interior")?;
        let sol = package_solution(cell, 0, k, values, cond, &fixed);
        for (r, f) in sol.fluxes.iter().enumerate() {
            a[(r, col)] = *f;
        }
    }
    Ok(DtNMatrix { a })
}

/// Assembles the vertex stiffness from per-edge 2×2 conormal maps.
pub(crate) fn assemble(
    cell: &ElementaryCell,
    edge_maps: impl Iterator<Item = [[f64; 2]; 2]>,
) -> DMatrix<f64> {
    let n = cell.vertices().len();
    let mut k = DMatrix::zeros(n, n);
    for (t, &(a, b)) in edge_maps.zip(cell.edge_ends()) {
        let idx = [a, b];
        for r in 0..2 {
            for c in 0..2 {
                k[(idx[r], idx[c])] += t[r][c];
            }
        }
    }
    k
}

/// Solves `K u = 0` on the free vertices with `u` prescribed on the fixed
/// ones. Returns vertex values and a 1-norm condition estimate of the free
/// block.
pub(crate) fn solve_vertex_system(
    k: &DMatrix<f64>,
    fixed: &[Option<f64>],
    context: &str,
) -> Result<(Vec<f64>, f64)> {
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
    let mut values: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
    if free.is_empty() {
        return Ok((values, 1.0));
    }
    let nf = free.len();
    let kff = DMatrix::from_fn(nf, nf, |r, c| k[(free[r], free[c])]);
    let rhs = DVector::from_fn(nf, |r, _| {
        -(0..fixed.len())
            .filter_map(|c| fixed[c].map(|x| k[(free[r], c)] * x))
            .sum::<f64>()
    });
    let (sol, cond) = lu_solve(&kff, &rhs, context)?;
    for (r, &v) in free.iter().enumerate() {
        values[v] = sol[r];
    }
    Ok((values, cond))
}

/// Dense LU with partial pivoting plus a 1-norm condition estimate.
pub(crate) fn lu_solve(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    context: &str,
) -> Result<(DVector<f64>, f64)> {
    let scale = m.amax();
    let lu = m.clone().lu();
    let min_pivot = lu.u().diagonal().amin();
    if !(min_pivot > SINGULAR_PIVOT * scale) {
        return Err(Error::SingularSystem {
            context: context.to_string(),
        });
    }
    let x = lu.solve(rhs).ok_or_else(|| Error::SingularSystem {
        context: context.to_string(),
    })?;
    let cond = lu
        .try_inverse()
        .map(|inv| norm1(m) * norm1(&inv))
        .unwrap_or(f64::INFINITY);
    Ok((x, cond))
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn package_solution(
    cell: &ElementaryCell,
    key: u64,
    k: &DMatrix<f64>,
    values: Vec<f64>,
    condition: f64,
    fixed: &[Option<f64>],
) -> CellSolution {
    let u = DVector::from_column_slice(&values);
    let ku = k * &u;
    let bnd = cell.boundary();
    let fluxes = bnd
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == 0 { ku[v] } else { -ku[v] })
        .collect();
    let kirchhoff_residual = (0..values.len())
        .filter(|&v| fixed[v].is_none())
        .map(|v| ku[v].abs())
        .fold(0.0, f64::max);
    CellSolution {
        cell_key: key,
        vertex_ids: cell.vertices().to_vec(),
        edge_end_values: cell
            .edge_ends()
            .iter()
            .map(|&(a, b)| (values[a], values[b]))
            .collect(),
        vertex_values: values,
        fluxes,
        kirchhoff_residual,
        condition,
    }
}

pub fn solve_dirichlet(
    cell: &ElementaryCell,
    data: &DirichletData,
    tol: f64,
) -> Result<CellSolution> {
    CellSolver::new(cell, tol)?.solve_dirichlet(data)
}

pub fn flux_map(cell: &ElementaryCell, tol: f64) -> Result<DtNMatrix> {
    CellSolver::new(cell, tol)?.flux_map()
}

/// `a(w, v) = F₀(w) Y₀ − Σ_j F_j(w) Y_j`, with `Y` the boundary data of `v`.
pub fn bilinear_energy(
    cell: &ElementaryCell,
    sol_w: &CellSolution,
    sol_v: &CellSolution,
) -> Result<f64> {
    let key = cell_key(cell);
    if sol_w.cell_key != key || sol_v.cell_key != key {
        return Err(Error::MismatchedCells);
    }
    let y = sol_v.boundary_values(cell);
    Ok(sol_w.fluxes[0] * y[0]
        - sol_w.fluxes[1..]
            .iter()
            .zip(&y[1..])
            .map(|(f, y)| f * y)
            .sum::<f64>())
}

pub fn solve_q(cell: &ElementaryCell) -> Result<CellSolution> {
    CellSolver::new(cell, DEFAULT_TOL)?.solve_q()
}

pub fn solve_r(cell: &ElementaryCell) -> Result<CellSolution> {
    CellSolver::new(cell, DEFAULT_TOL)?.solve_r()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    #[test]
    fn single_edge_dirichlet() {
        let cell = fixtures::single_edge(1.0, 0.0, 1.0);
        let sol =
            solve_dirichlet(&cell, &DirichletData::new(1.0, vec![0.5]).unwrap(), 1e-10).unwrap();
        assert!((sol.fluxes[0] - 0.5).abs() < 1e-12);
        assert!((sol.fluxes[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn y_cell_dirichlet_matches_hand_balance() {
        let cell = fixtures::y_cell(0.0);
        let sol = solve_dirichlet(
            &cell,
            &DirichletData::new(1.0, vec![0.25, 0.25]).unwrap(),
            1e-10,
        )
        .unwrap();
        assert!((sol.value("v").unwrap() - 0.5).abs() < 1e-12);
        assert!((sol.fluxes[0] - 0.5).abs() < 1e-12);
        assert!((sol.fluxes[1] - 0.25).abs() < 1e-12);
        assert!((sol.fluxes[2] - 0.25).abs() < 1e-12);
        assert!(sol.kirchhoff_residual <= 1e-9 * (1.0 + 0.5));
    }

    #[test]
    fn gamma_edge_flux_ratio() {
        let cell = fixtures::gamma_edge(PI / 3.0);
        let sol =
            solve_dirichlet(&cell, &DirichletData::new(1.0, vec![0.25]).unwrap(), 1e-10).unwrap();
        let ratio = sol.fluxes[1] / (sol.fluxes[0] * 0.25);
        assert!((ratio - 14.0).abs() < 1e-8, "{ratio}");
    }

    #[test]
    fn flux_maps_of_fixtures() {
        let a = flux_map(&fixtures::single_edge(1.0, 0.0, 1.0), 1e-10)
            .unwrap()
            .a;
        let expected = [[1.0, -1.0], [1.0, -1.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((a[(r, c)] - expected[r][c]).abs() < 1e-12);
            }
        }
        let a = flux_map(&fixtures::y_cell(0.0), 1e-10).unwrap().a;
        for (c, e) in [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0].iter().enumerate() {
            assert!((a[(0, c)] - e).abs() < 1e-12);
        }
        for c in 0..3 {
            assert!((a[(0, c)] - a[(1, c)] - a[(2, c)]).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_from_boundary_data() {
        let cell = fixtures::single_edge(1.0, 0.0, 1.0);
        let s = CellSolver::new(&cell, 1e-10).unwrap();
        let w = s
            .solve_dirichlet(&DirichletData::new(1.0, vec![0.0]).unwrap())
            .unwrap();
        let v = s
            .solve_dirichlet(&DirichletData::new(0.0, vec![1.0]).unwrap())
            .unwrap();
        assert!((bilinear_energy(&cell, &w, &w).unwrap() - 1.0).abs() < 1e-12);
        assert!((bilinear_energy(&cell, &w, &v).unwrap() + 1.0).abs() < 1e-12);

        let y = fixtures::y_cell(0.0);
        let sy = CellSolver::new(&y, 1e-10).unwrap();
        let w = sy.solve_dirichlet(&DirichletData::unit(2, 0)).unwrap();
        assert!((bilinear_energy(&y, &w, &w).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            bilinear_energy(&cell, &w, &w),
            Err(Error::MismatchedCells)
        ));
    }

    #[test]
    fn quadrature_energy_matches_boundary_form() {
        for cell in [
            fixtures::y_cell(0.3),
            fixtures::gamma_edge(PI / 3.0),
            fixtures::graded_y(),
        ] {
            let s = CellSolver::new(&cell, 1e-12).unwrap();
            let m: Vec<f64> = (0..cell.num_outputs())
                .map(|j| 0.3 + 0.1 * j as f64)
                .collect();
            let sol = s
                .solve_dirichlet(&DirichletData::new(1.0, m).unwrap())
                .unwrap();
            let a = bilinear_energy(&cell, &sol, &sol).unwrap();
            assert!((s.energy_integral(&sol).unwrap() - a).abs() < 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn q_on_permeable_edge() {
        let q = solve_q(&fixtures::single_edge(1.0, 0.04, 1.0)).unwrap();
        // cosh(0.2 (1 - ξ)) / cosh(0.2)
        assert!((q.vertex_values[1] - 0.980_327_997_644_725_3).abs() < 1e-9);
        assert!((q.fluxes[0] - 0.039_475_064_044_980_8).abs() < 1e-9);
        assert!(matches!(
            solve_q(&fixtures::single_edge(1.0, 0.0, 1.0)),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn r_on_gamma_edge() {
        let cell = fixtures::gamma_edge(PI / 3.0);
        let s = CellSolver::new(&cell, 1e-10).unwrap();
        let r = s.solve_r().unwrap();
        let mid = s.evaluate(&r, 0, 0.5).unwrap();
        assert!((mid - 1.154_700_538_379_251_5).abs() < 1e-9);
        assert!((r.fluxes[0] + 0.604_599_788_078_072_6).abs() < 1e-9);
        assert!(matches!(
            CellSolver::new(&fixtures::y_cell(0.0), 1e-10)
                .unwrap()
                .solve_r(),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn resonant_interior_is_reported() {
        // sin(π ξ) is a Dirichlet eigenfunction of the unit edge
        let cell = fixtures::single_edge(1.0, -PI * PI, 1.0);
        let err = CellSolver::new(&cell, 1e-12).unwrap_err();
        assert!(matches!(err, Error::DegenerateEdge { .. }));
    }

    #[test]
    fn sampling_excludes_boundary_points() {
        let cell = fixtures::y_cell(0.0);
        let s = CellSolver::new(&cell, 1e-10).unwrap();
        let sol = s
            .solve_dirichlet(&DirichletData::new(1.0, vec![0.0, 0.0]).unwrap())
            .unwrap();
        let inner = s.interior_samples(&sol, SAMPLES_PER_EDGE).unwrap();
        assert_eq!(inner.len(), 3 * (SAMPLES_PER_EDGE - 1));
        assert!(inner.iter().all(|p| p.w > 0.0 && p.w < 1.0));
        assert_eq!(
            s.sample(&sol, SAMPLES_PER_EDGE).unwrap().len(),
            3 * SAMPLES_PER_EDGE
        );
    }
}
