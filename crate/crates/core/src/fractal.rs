//! Depth-`N` truncation of the self-similar fractal graph.
//!
//! The cell at address `(j₁, …, j_n)` is a copy of `G⁰` with lengths scaled
//! by `Πl` and coefficients `H = Πk·H(ξ/Πl)`, `B = (Πk/Πl²)·B(ξ/Πl)`; its
//! input is glued to output `j_n` of its parent. Every instance integrates
//! its own scaled edges. The global problem is a tree of cells, so it is
//! solved exactly by eliminating cells bottom-up (each subtree collapses to
//! an affine input response) and substituting top-down.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::cell::ElementaryCell;
use crate::dtn::{
    assemble, flux_map_from_stiffness, lu_solve, CellSolution, CellSolver, DirichletData, DtNMatrix,
};
use crate::edge_ode::{edge_dtn, edge_fundamental_system, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::scaling::ScalingFactors;

/// Default cap on the number of vertices in a truncated graph.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Sequence `(j₁, …, j_n)` of 1-based output indices; empty for `G⁰`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FractalAddress(pub Vec<usize>);

impl FractalAddress {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn new(indices: Vec<usize>, num_outputs: usize) -> Result<Self> {
        if let Some(&j) = indices.iter().find(|&&j| j == 0 || j > num_outputs) {
            return Err(Error::InvalidInput(format!(
                "address index {j} outside 1..={num_outputs}"
            )));
        }
        Ok(Self(indices))
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v.push(j);
        Self(v)
    }

    /// `Π v_{j_i}` along the address.
    pub fn product(&self, v: &[f64]) -> f64 {
        self.0.iter().map(|&j| v[j - 1]).product()
    }

    /// `Πk / Πl`, the factor relating this cell's flux map to `G⁰`'s.
    pub fn conductance_scale(&self, factors: &ScalingFactors) -> f64 {
        self.product(&factors.k) / self.product(&factors.l)
    }
}

impl fmt::Display for FractalAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// Condition at the outputs of the deepest cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LeafClosure {
    /// `w = Πm·m_j` at output `j` of a leaf cell (`X₀ = 1`; scaled with `X₀`).
    DirichletSelfSimilar { m: Vec<f64> },
    /// Outflow `(Πk/Πl)(address + j)·β·w` at output `j` of a leaf cell.
    Robin { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalOpts {
    pub tol: f64,
    pub budget: usize,
}

impl Default for FractalOpts {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone)]
struct CellInstance {
    address: FractalAddress,
    parent: Option<(usize, usize)>,
    /// Instance index per output; `None` at leaves.
    children: Vec<Option<usize>>,
    stiffness: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct TruncatedFractal {
    cell: ElementaryCell,
    factors: ScalingFactors,
    depth: usize,
    closure: LeafClosure,
    /// Depth-first pre-order, which is lexicographic order of addresses.
    instances: Vec<CellInstance>,
    /// Global vertex number per instance and local vertex.
    global: Vec<Vec<usize>>,
    num_vertices: usize,
}

fn instance_count(j: usize, depth: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for _ in 0..=depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(j)?;
    }
    Some(total)
}

impl TruncatedFractal {
    pub fn assemble(
        cell: &ElementaryCell,
        factors: &ScalingFactors,
        closure: LeafClosure,
        depth: usize,
        opts: &FractalOpts,
    ) -> Result<Self> {
        let j = cell.num_outputs();
        if factors.num_outputs() != j {
            return Err(Error::InvalidInput(format!(
                "cell has {j} outputs but {} scaling factors",
                factors.num_outputs()
            )));
        }
        match &closure {
            LeafClosure::DirichletSelfSimilar { m } => {
                if m.len() != j || m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "Dirichlet closure needs {j} finite m values"
                    )));
                }
            }
            LeafClosure::Robin { beta } => {
                if !beta.is_finite() {
                    return Err(Error::InvalidInput(
                        "Robin closure needs a finite beta".into(),
                    ));
                }
            }
        }
        let per_cell = cell.vertices().len() - 1;
        let needed = instance_count(j, depth)
            .and_then(|n| n.checked_mul(per_cell))
            .map(|n| n + 1)
            .unwrap_or(usize::MAX);
        if needed > opts.budget {
            return Err(Error::BudgetExceeded {
                needed,
                budget: opts.budget,
            });
        }

        let mut skeleton: Vec<(FractalAddress, Option<(usize, usize)>)> = Vec::new();
        let mut stack = vec![(FractalAddress::root(), None)];
        while let Some((addr, parent)) = stack.pop() {
            let idx = skeleton.len();
            if addr.depth() < depth {
                for jj in (1..=j).rev() {
                    stack.push((addr.child(jj), Some((idx, jj))));
                }
            }
            skeleton.push((addr, parent));
        }

        let stiffness: Vec<DMatrix<f64>> = skeleton
            .par_iter()
            .map(|(addr, _)| scaled_stiffness(cell, factors, addr, opts.tol))
            .collect::<Result<_>>()?;

        let mut instances: Vec<CellInstance> = skeleton
            .into_iter()
            .zip(stiffness)
            .map(|((address, parent), stiffness)| CellInstance {
                address,
                parent,
                children: vec![None; j],
                stiffness,
            })
            .collect();
        for i in 0..instances.len() {
            if let Some((p, jj)) = instances[i].parent {
                instances[p].children[jj - 1] = Some(i);
            }
        }

        let bnd = cell.boundary();
        let nv = cell.vertices().len();
        let mut global: Vec<Vec<usize>> = Vec::with_capacity(instances.len());
        let mut next = 0;
        for inst in &instances {
            let mut ids = vec![usize::MAX; nv];
            if let Some((p, jj)) = inst.parent {
                ids[bnd[0]] = global[p][bnd[jj]];
            }
            for id in ids.iter_mut().filter(|id| **id == usize::MAX) {
                *id = next;
                next += 1;
            }
            global.push(ids);
        }

        Ok(Self {
            cell: cell.clone(),
            factors: factors.clone(),
            depth,
            closure,
            instances,
            global,
            num_vertices: next,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell(&self) -> &ElementaryCell {
        &self.cell
    }

    pub fn factors(&self) -> &ScalingFactors {
        &self.factors
    }

    pub fn closure(&self) -> &LeafClosure {
        &self.closure
    }

    pub fn num_cells(&self) -> usize {
        self.instances.len()
    }

    pub fn addresses(&self) -> impl Iterator<Item = &FractalAddress> {
        self.instances.iter().map(|i| &i.address)
    }

    /// Vertices in the glued graph.
    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Vertices whose value is not prescribed.
    pub fn num_unknowns(&self) -> usize {
        let fixed_leaves = match self.closure {
            LeafClosure::DirichletSelfSimilar { .. } => self
                .instances
                .iter()
                .map(|i| i.children.iter().filter(|c| c.is_none()).count())
                .sum(),
            LeafClosure::Robin { .. } => 0,
        };
        self.num_vertices - 1 - fixed_leaves
    }

    /// Global vertex number of `(address, local vertex)`.
    pub fn global_index(&self, address: &FractalAddress, vertex: &str) -> Option<usize> {
        let i = self.instance_of(address)?;
        let v = self.cell.vertex_index(vertex)?;
        Some(self.global[i][v])
    }

    fn instance_of(&self, address: &FractalAddress) -> Option<usize> {
        self.instances
            .binary_search_by(|inst| inst.address.cmp(address))
            .ok()
    }

    /// Flux map of the instance at `address`, from its own integrated edges.
    pub fn instance_dtn(&self, address: &FractalAddress) -> Result<DtNMatrix> {
        let i = self
            .instance_of(address)
            .ok_or_else(|| Error::InvalidInput(format!("no cell at address {address}")))?;
        flux_map_from_stiffness(&self.cell, &self.instances[i].stiffness)
    }

    /// Largest relative deviation of any instance's flux map from
    /// `(Πk/Πl)·A(G⁰)`.
    pub fn scaled_dtn_defect(&self, base: &DtNMatrix) -> Result<f64> {
        self.instances
            .par_iter()
            .map(|inst| {
                let a = flux_map_from_stiffness(&self.cell, &inst.stiffness)?.a;
                let expect = &base.a * inst.address.conductance_scale(&self.factors);
                Ok((&a - &expect).amax() / expect.amax().max(f64::MIN_POSITIVE))
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    fn leaf_value(&self, inst: &CellInstance, j: usize, x0: f64) -> Option<f64> {
        match &self.closure {
            LeafClosure::DirichletSelfSimilar { m } => {
                Some(x0 * inst.address.product(m) * m[j - 1])
            }
            LeafClosure::Robin { .. } => None,
        }
    }

    fn robin_coefficient(&self, inst: &CellInstance, j: usize) -> f64 {
        match self.closure {
            LeafClosure::Robin { beta } => {
                inst.address.child(j).conductance_scale(&self.factors) * beta
            }
            LeafClosure::DirichletSelfSimilar { .. } => 0.0,
        }
    }

    /// Solves with input value `x0` at the root `W₀`.
    pub fn solve(&self, x0: f64) -> Result<FractalSolution> {
        if !x0.is_finite() {
            return Err(Error::InvalidInput("X0 must be finite".into()));
        }
        let bnd = self.cell.boundary();
        let nv = self.cell.vertices().len();
        let n = self.instances.len();
        // per instance: free local vertices, u_free = a + b·u₀, and the
        // input response F₀ = s·u₀ + g
        let mut free: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut a_vec: Vec<DVector<f64>> = vec![DVector::zeros(0); n];
        let mut b_vec: Vec<DVector<f64>> = vec![DVector::zeros(0); n];
        let mut s = vec![0.0; n];
        let mut g = vec![0.0; n];

        for i in (0..n).rev() {
            let inst = &self.instances[i];
            let k = &inst.stiffness;
            let mut fixed: Vec<Option<f64>> = vec![None; nv];
            let mut extra_diag = vec![0.0; nv];
            let mut extra_rhs = vec![0.0; nv];
            for (jj, &v) in bnd.iter().enumerate().skip(1) {
                match inst.children[jj - 1] {
                    Some(c) => {
                        extra_diag[v] += s[c];
                        extra_rhs[v] += g[c];
                    }
                    None => match self.leaf_value(inst, jj, x0) {
                        Some(x) => fixed[v] = Some(x),
                        None => extra_diag[v] += self.robin_coefficient(inst, jj),
                    },
                }
            }
            let f: Vec<usize> = (0..nv)
                .filter(|&v| v != bnd[0] && fixed[v].is_none())
                .collect();
            let nf = f.len();
            let kff = DMatrix::from_fn(nf, nf, |r, c| {
                k[(f[r], f[c])] + if r == c { extra_diag[f[r]] } else { 0.0 }
            });
            let rhs_b = DVector::from_fn(nf, |r, _| -k[(f[r], bnd[0])]);
            let rhs_a = DVector::from_fn(nf, |r, _| {
                -extra_rhs[f[r]]
                    - (0..nv)
                        .filter_map(|c| fixed[c].map(|x| k[(f[r], c)] * x))
                        .sum::<f64>()
            });
            let context = format!("fractal cell at address {}", inst.address);
            let (aa, bb) = if nf == 0 {
                (DVector::zeros(0), DVector::zeros(0))
            } else {
                let (bb, _) = lu_solve(&kff, &rhs_b, &context)?;
                let (aa, _) = lu_solve(&kff, &rhs_a, &context)?;
                (aa, bb)
            };
            let w0 = bnd[0];
            s[i] = k[(w0, w0)]
                + f.iter()
                    .zip(bb.iter())
                    .map(|(&v, b)| k[(w0, v)] * b)
                    .sum::<f64>();
            g[i] = f
                .iter()
                .zip(aa.iter())
                .map(|(&v, a)| k[(w0, v)] * a)
                .sum::<f64>()
                + (0..nv)
                    .filter_map(|c| fixed[c].map(|x| k[(w0, c)] * x))
                    .sum::<f64>();
            free[i] = f;
            a_vec[i] = aa;
            b_vec[i] = bb;
        }

        let mut values: Vec<Vec<f64>> = vec![vec![0.0; nv]; n];
        for i in 0..n {
            let inst = &self.instances[i];
            let u0 = match inst.parent {
                None => x0,
                Some((p, jj)) => values[p][bnd[jj]],
            };
            let mut u = vec![0.0; nv];
            u[bnd[0]] = u0;
            for jj in 1..=self.cell.num_outputs() {
                if inst.children[jj - 1].is_none() {
                    if let Some(x) = self.leaf_value(inst, jj, x0) {
                        u[bnd[jj]] = x;
                    }
                }
            }
            for (r, &v) in free[i].iter().enumerate() {
                u[v] = a_vec[i][r] + b_vec[i][r] * u0;
            }
            values[i] = u;
        }

        let input_flux = s[0] * x0 + g[0];
        let kirchhoff_residual = self.kirchhoff_residual(&values);
        Ok(FractalSolution {
            x0,
            input_flux,
            kirchhoff_residual,
            unknowns: self.num_unknowns(),
            addresses: self.instances.iter().map(|i| i.address.clone()).collect(),
            vertex_ids: self.cell.vertices().to_vec(),
            input_vertex: bnd[0],
            values,
        })
    }

    /// Conormal imbalance at every vertex carrying a Kirchhoff or Robin
    /// condition, recomputed from the edge matrices and global values.
    fn kirchhoff_residual(&self, values: &[Vec<f64>]) -> f64 {
        let mut sums = vec![0.0; self.num_vertices];
        let mut constrained = vec![true; self.num_vertices];
        let bnd = self.cell.boundary();
        for (i, inst) in self.instances.iter().enumerate() {
            let ku = &inst.stiffness * DVector::from_column_slice(&values[i]);
            for (v, kv) in ku.iter().enumerate() {
                sums[self.global[i][v]] += kv;
            }
            for jj in 1..=self.cell.num_outputs() {
                if inst.children[jj - 1].is_none() {
                    let gid = self.global[i][bnd[jj]];
                    match self.closure {
                        LeafClosure::DirichletSelfSimilar { .. } => constrained[gid] = false,
                        LeafClosure::Robin { .. } => {
                            sums[gid] += self.robin_coefficient(inst, jj) * values[i][bnd[jj]]
                        }
                    }
                }
            }
        }
        constrained[self.global[0][bnd[0]]] = false;
        sums.iter()
            .zip(&constrained)
            .filter(|(_, &c)| c)
            .map(|(s, _)| s.abs())
            .fold(0.0, f64::max)
    }
}

fn scaled_stiffness(
    cell: &ElementaryCell,
    factors: &ScalingFactors,
    address: &FractalAddress,
    tol: f64,
) -> Result<DMatrix<f64>> {
    let pl = address.product(&factors.l);
    let pk = address.product(&factors.k);
    let scaled = cell.map_edges(|e| {
        let mut e = e.clone();
        e.length *= pl;
        e.h = e.h.rescaled(pk, pl);
        e.b = e.b.rescaled(pk / (pl * pl), pl);
        e
    });
    let maps = scaled
        .edges()
        .iter()
        .map(|e| Ok(edge_dtn(&edge_fundamental_system(e, tol)?)?.matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(&scaled, maps.into_iter()))
}

#[derive(Debug, Clone, Serialize)]
pub struct FractalSolution {
    pub x0: f64,
    /// `F₀` at the root input.
    pub input_flux: f64,
    pub kirchhoff_residual: f64,
    pub unknowns: usize,
    #[serde(skip)]
    addresses: Vec<FractalAddress>,
    #[serde(skip)]
    vertex_ids: Vec<String>,
    #[serde(skip)]
    input_vertex: usize,
    #[serde(skip)]
    values: Vec<Vec<f64>>,
}

/// One row of the pressure table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexPressure {
    pub address: String,
    pub vertex: String,
    pub pressure: f64,
}

impl FractalSolution {
    pub fn pressure(&self, address: &FractalAddress, vertex: &str) -> Option<f64> {
        let i = self.addresses.binary_search(address).ok()?;
        let v = self.vertex_ids.iter().position(|x| x == vertex)?;
        Some(self.values[i][v])
    }

    /// Each glued vertex once, in global order; a child's input appears as
    /// its parent's output.
    pub fn pressures(&self) -> Vec<VertexPressure> {
        let mut out = Vec::new();
        for (i, addr) in self.addresses.iter().enumerate() {
            for (v, id) in self.vertex_ids.iter().enumerate() {
                if i > 0 && v == self.input_vertex {
                    continue;
                }
                out.push(VertexPressure {
                    address: addr.to_string(),
                    vertex: id.clone(),
                    pressure: self.values[i][v],
                });
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("address,vertex,pressure\n");
        for p in self.pressures() {
            s.push_str(&format!("{},{},{:.16e}\n", p.address, p.vertex, p.pressure));
        }
        s
    }
}

/// `w^{J_n}(ξ) = Πm · w(ξ/Πl)` built from the `G⁰` solution with data
/// `(1, m)`.
#[derive(Debug, Clone)]
pub struct SelfReproducing {
    solver: CellSolver,
    solution: CellSolution,
    m: Vec<f64>,
    l: Vec<f64>,
}

impl SelfReproducing {
    pub fn new(cell: &ElementaryCell, m: &[f64], l: &[f64], tol: f64) -> Result<Self> {
        let j = cell.num_outputs();
        if m.len() != j || l.len() != j {
            return Err(Error::InvalidInput(format!("m and l need {j} values")));
        }
        let solver = CellSolver::new(cell, tol)?;
        let solution = solver.solve_dirichlet(&DirichletData::new(1.0, m.to_vec())?)?;
        Ok(Self {
            solver,
            solution,
            m: m.to_vec(),
            l: l.to_vec(),
        })
    }

    /// `β = F₀(1, m)`.
    pub fn beta(&self) -> f64 {
        self.solution.fluxes[0]
    }

    fn check(&self, address: &FractalAddress) -> Result<()> {
        FractalAddress::new(address.0.clone(), self.m.len()).map(|_| ())
    }

    pub fn vertex(&self, address: &FractalAddress, vertex: &str) -> Result<f64> {
        self.check(address)?;
        let w = self
            .solution
            .value(vertex)
            .ok_or_else(|| Error::InvalidInput(format!("unknown vertex '{vertex}'")))?;
        Ok(address.product(&self.m) * w)
    }

    /// Value at coordinate `xi ∈ [0, Πl·L]` of edge `edge_id` in the cell at
    /// `address`.
    pub fn evaluate(&self, address: &FractalAddress, edge_id: &str, xi: f64) -> Result<f64> {
        self.check(address)?;
        let cell = self.solver.cell();
        let e = cell
            .edge_index(edge_id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown edge '{edge_id}'")))?;
        let pl = address.product(&self.l);
        let len = pl * cell.edges()[e].length;
        if !(0.0..=len).contains(&xi) {
            return Err(Error::OutOfRange {
                what: "xi",
                value: xi,
                lo: 0.0,
                hi: len,
            });
        }
        let local = (xi / pl).min(cell.edges()[e].length);
        Ok(address.product(&self.m) * self.solver.evaluate(&self.solution, e, local)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub max_discrepancy: f64,
    pub input_flux: f64,
    pub beta: f64,
    pub flux_discrepancy: f64,
    pub kirchhoff_residual: f64,
    pub unknowns: usize,
}

/// Compares a direct truncated solve with the self-reproducing formula at
/// every vertex of the glued graph.
pub fn compare_oracle(sol: &FractalSolution, evaluator: &SelfReproducing) -> Result<OracleReport> {
    let mut max = 0.0f64;
    for (i, addr) in sol.addresses.iter().enumerate() {
        for (v, id) in sol.vertex_ids.iter().enumerate() {
            let expect = sol.x0 * evaluator.vertex(addr, id)?;
            max = max.max((sol.values[i][v] - expect).abs());
        }
    }
    let beta = evaluator.beta();
    Ok(OracleReport {
        max_discrepancy: max,
        input_flux: sol.input_flux,
        beta,
        flux_discrepancy: (sol.input_flux - beta * sol.x0).abs(),
        kirchhoff_residual: sol.kirchhoff_residual,
        unknowns: sol.unknowns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtn::flux_map;
    use crate::fixtures;

    fn chain(closure: LeafClosure) -> (TruncatedFractal, FractalSolution) {
        let cell = fixtures::single_edge(1.0, 0.0, 1.0);
        let f = ScalingFactors::new(vec![0.4], vec![0.8]).unwrap();
        let tf =
            TruncatedFractal::assemble(&cell, &f, closure, 2, &FractalOpts::default()).unwrap();
        let sol = tf.solve(1.0).unwrap();
        (tf, sol)
    }

    #[test]
    fn single_edge_chain() {
        let (tf, sol) = chain(LeafClosure::DirichletSelfSimilar { m: vec![0.5] });
        assert_eq!(tf.num_cells(), 3);
        assert_eq!(tf.num_vertices(), 4);
        assert_eq!(tf.num_unknowns(), 2);
        let p1 = sol.pressure(&FractalAddress(vec![1]), "a").unwrap();
        let p2 = sol.pressure(&FractalAddress(vec![1, 1]), "a").unwrap();
        assert!((p1 - 0.5).abs() < 1e-12 && (p2 - 0.25).abs() < 1e-12);
        assert!((sol.input_flux - 0.5).abs() < 1e-12);
        assert!(sol.kirchhoff_residual < 1e-12);
        assert!((sol.pressure(&FractalAddress(vec![1, 1]), "b").unwrap() - 0.125).abs() < 1e-15);

        let (_, robin) = chain(LeafClosure::Robin { beta: 0.5 });
        for (a, b) in sol.pressures().iter().zip(robin.pressures()) {
            assert!((a.pressure - b.pressure).abs() < 1e-12);
        }
    }

    #[test]
    fn y_cell_depth_three_matches_self_reproduction() {
        let cell = fixtures::y_cell(0.0);
        let f = ScalingFactors::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let m = vec![0.5, 0.5];
        let tf = TruncatedFractal::assemble(
            &cell,
            &f,
            LeafClosure::DirichletSelfSimilar { m: m.clone() },
            3,
            &FractalOpts::default(),
        )
        .unwrap();
        assert_eq!(tf.num_cells(), 15);
        let sol = tf.solve(1.0).unwrap();
        let ev = SelfReproducing::new(&cell, &m, &f.l, 1e-10).unwrap();
        let rep = compare_oracle(&sol, &ev).unwrap();
        assert!(rep.max_discrepancy < 1e-8, "{rep:?}");
        assert!((rep.input_flux - 1.0 / 3.0).abs() < 1e-8);
        let base = flux_map(&cell, 1e-10).unwrap();
        assert!(tf.scaled_dtn_defect(&base).unwrap() < 1e-9);
    }

    #[test]
    fn linear_in_input_value() {
        let (_, one) = chain(LeafClosure::DirichletSelfSimilar { m: vec![0.5] });
        let cell = fixtures::single_edge(1.0, 0.0, 1.0);
        let f = ScalingFactors::new(vec![0.4], vec![0.8]).unwrap();
        let tf = TruncatedFractal::assemble(
            &cell,
            &f,
            LeafClosure::DirichletSelfSimilar { m: vec![0.5] },
            2,
            &FractalOpts::default(),
        )
        .unwrap();
        let two = tf.solve(2.0).unwrap();
        assert!((two.input_flux - 2.0 * one.input_flux).abs() < 1e-12);
    }

    #[test]
    fn self_reproducing_evaluation() {
        let cell = fixtures::single_edge(1.0, 0.0, 1.0);
        let ev = SelfReproducing::new(&cell, &[0.5], &[0.4], 1e-10).unwrap();
        assert_eq!(ev.vertex(&FractalAddress::root(), "a").unwrap(), 1.0);
        assert!((ev.vertex(&FractalAddress(vec![1, 1, 1]), "a").unwrap() - 0.125).abs() < 1e-15);
        let mid = ev
            .evaluate(&FractalAddress(vec![1]), "e", 0.5 * 0.4)
            .unwrap();
        assert!((mid - 0.375).abs() < 1e-10);
        assert!(ev.evaluate(&FractalAddress(vec![1]), "e", 0.5).is_err());
        assert!(ev.vertex(&FractalAddress(vec![2]), "a").is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let cell = fixtures::y_cell(0.0);
        let f = ScalingFactors::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let err = TruncatedFractal::assemble(
            &cell,
            &f,
            LeafClosure::Robin { beta: 1.0 / 3.0 },
            10,
            &FractalOpts {
                budget: 1000,
                ..FractalOpts::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
