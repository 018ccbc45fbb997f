//! Property tests over randomly shaped star cells.

use capnet::cell::{parse_cell, serialize_cell, CoefficientSpec, Edge, ElementaryCell};
use capnet::dtn::{CellSolver, DirichletData};
use capnet::edge_ode::{edge_dtn, edge_fundamental_system};
use capnet::fractal::{FractalOpts, LeafClosure, TruncatedFractal};
use capnet::scaling::{classify_regime, RegimeClass, ScalingFactors, ScalingOpts, ScalingProblem};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

const TOL: f64 = 1e-10;

/// Fixed seed so that runs are reproducible.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(42),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

#[derive(Debug, Clone)]
struct EdgeParams {
    length: f64,
    h: Vec<f64>,
    b: Vec<f64>,
}

impl EdgeParams {
    fn edge(&self, id: &str, tail: &str, head: &str) -> Edge {
        Edge::new(
            id,
            tail,
            head,
            self.length,
            CoefficientSpec::polynomial(self.h.clone()),
            CoefficientSpec::polynomial(self.b.clone()),
        )
    }
}

/// `H` linear and bounded below by 0.5, `B` constant in `b_range`. Paths
/// through the star are at most 4 long, so `B > −0.2` keeps the form
/// positive.
fn edge_params(b_lo: f64, b_hi: f64) -> impl Strategy<Value = EdgeParams> {
    (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64, b_lo..=b_hi).prop_map(|(length, h0, h1, b)| {
        EdgeParams {
            length,
            h: vec![h0, (h1 - h0) / length],
            b: vec![b],
        }
    })
}

fn star(trunk: &EdgeParams, branches: &[EdgeParams]) -> ElementaryCell {
    let mut vertices = vec!["W0".to_string(), "v".to_string()];
    let mut edges = vec![trunk.edge("e0", "W0", "v")];
    let mut outputs = Vec::new();
    for (i, p) in branches.iter().enumerate() {
        let w = format!("W{}", i + 1);
        edges.push(p.edge(&format!("e{}", i + 1), "v", &w));
        vertices.push(w.clone());
        outputs.push(w);
    }
    ElementaryCell::new(vertices, edges, "W0", outputs).expect("star cells are admissible")
}

fn star_cell(b_lo: f64, b_hi: f64) -> impl Strategy<Value = ElementaryCell> {
    (
        edge_params(b_lo, b_hi),
        prop::collection::vec(edge_params(b_lo, b_hi), 1..=3),
    )
        .prop_map(|(t, b)| star(&t, &b))
}

fn data(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn config_round_trip(cell in star_cell(-0.2, 0.5)) {
        prop_assert_eq!(parse_cell(&serialize_cell(&cell)).unwrap(), cell);
    }

    #[test]
    fn green_symmetry(cell in star_cell(-0.2, 0.5)) {
        let a = CellSolver::new(&cell, TOL).unwrap().flux_map().unwrap();
        prop_assert!(a.green_symmetry_defect() <= 1e-9);
    }

    #[test]
    fn conservation_without_wall_exchange(cell in star_cell(0.0, 0.0), seed in any::<u64>()) {
        let solver = CellSolver::new(&cell, TOL).unwrap();
        let n = cell.num_outputs() + 1;
        let x: Vec<f64> = (0..n).map(|i| ((seed >> (i * 8)) & 0xff) as f64 / 255.0 - 0.5).collect();
        let f = solver.solve_dirichlet(&DirichletData::from_slice(&x)).unwrap().fluxes;
        let out: f64 = f[1..].iter().sum();
        prop_assert!((out - f[0]).abs() <= 1e-9 * (1.0 + f[0].abs()));
    }

    #[test]
    fn solve_is_linear_and_matches_flux_map(
        cell in star_cell(-0.2, 0.5),
        x in data(4),
        y in data(4),
        alpha in -2.0..2.0f64,
    ) {
        let n = cell.num_outputs() + 1;
        let (x, y) = (&x[..n], &y[..n]);
        let solver = CellSolver::new(&cell, TOL).unwrap();
        let a = solver.flux_map().unwrap();
        let z: Vec<f64> = x.iter().zip(y).map(|(p, q)| alpha * p + q).collect();
        let fx = solver.solve_dirichlet(&DirichletData::from_slice(x)).unwrap().fluxes;
        let fy = solver.solve_dirichlet(&DirichletData::from_slice(y)).unwrap().fluxes;
        let fz = solver.solve_dirichlet(&DirichletData::from_slice(&z)).unwrap().fluxes;
        let direct = a.fluxes(z[0], &z[1..]);
        for k in 0..n {
            prop_assert!((fz[k] - (alpha * fx[k] + fy[k])).abs() <= 1e-9 * (1.0 + fz[k].abs()));
            prop_assert!((fz[k] - direct[k]).abs() <= 1e-9 * (1.0 + fz[k].abs()));
        }
    }

    #[test]
    fn nonnegative_data_gives_positive_pressure(cell in star_cell(-0.2, 0.5), x in data(4)) {
        let n = cell.num_outputs() + 1;
        let mut x: Vec<f64> = x[..n].iter().map(|v| v.abs()).collect();
        x[0] += 0.01;
        let solver = CellSolver::new(&cell, TOL).unwrap();
        let sol = solver.solve_dirichlet(&DirichletData::from_slice(&x)).unwrap();
        for s in solver.interior_samples(&sol, 17).unwrap() {
            prop_assert!(s.w > 0.0, "{:?}", s);
        }
    }

    #[test]
    fn reversed_edge_swaps_the_edge_map(p in edge_params(-0.2, 0.5)) {
        // Global error runs a few times the local tolerance; integrate
        // tighter than the 1e-10 being checked.
        let e = p.edge("e", "a", "b");
        let t = edge_dtn(&edge_fundamental_system(&e, 1e-12).unwrap()).unwrap().matrix;
        let r = edge_dtn(&edge_fundamental_system(&e.reversed(), 1e-12).unwrap()).unwrap().matrix;
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((t[i][j] - r[1 - i][1 - j]).abs() <= 1e-10 * (1.0 + t[i][j].abs()));
            }
        }
    }

    #[test]
    fn wronskian_is_constant(p in edge_params(-0.2, 0.5)) {
        let basis = edge_fundamental_system(&p.edge("e", "a", "b"), TOL).unwrap();
        prop_assert!(basis.max_wronskian_drift() <= 1e-10);
    }

    #[test]
    fn energy_identity(cell in star_cell(-0.2, 0.5), u in prop::collection::vec(0.05..0.95f64, 3)) {
        let solver = CellSolver::new(&cell, TOL).unwrap();
        let p = ScalingProblem::new(&cell, TOL).unwrap();
        let m = &u[..cell.num_outputs()];
        let sol = solver.solve_dirichlet(&DirichletData::new(1.0, m.to_vec()).unwrap()).unwrap();
        let s = p.energy(m);
        prop_assert!((s - solver.energy_integral(&sol).unwrap()).abs() <= 1e-9 * (1.0 + s.abs()));
    }

    #[test]
    fn jacobian_matches_differences(cell in star_cell(0.0, 0.5), u in prop::collection::vec(0.1..0.9f64, 4)) {
        let p = ScalingProblem::new(&cell, TOL).unwrap();
        let j = p.num_outputs();
        let d = &u[..j];
        let (lo, hi) = p.omega_hat_interval(d).unwrap();
        let t = lo + (hi - lo) * u[3];
        let m: Vec<f64> = d.iter().map(|v| v * t).collect();
        let jac = p.jacobian(&m).unwrap();
        let h = 1e-6;
        for i in 0..j {
            let (mut a, mut b) = (m.clone(), m.clone());
            a[i] += h;
            b[i] -= h;
            let (fa, fb) = (p.cal_f(&a).unwrap(), p.cal_f(&b).unwrap());
            for r in 0..j {
                let fd = (fa[r] - fb[r]) / (2.0 * h);
                prop_assert!((jac[(r, i)] - fd).abs() <= 1e-6 * jac.amax().max(1.0));
            }
        }
    }

    #[test]
    fn scaling_recovers_the_unique_root(cell in star_cell(0.0, 0.5), u in prop::collection::vec(0.1..0.9f64, 4)) {
        let p = ScalingProblem::new(&cell, TOL).unwrap();
        prop_assert_ne!(p.regime(), RegimeClass::PermeableMinus);
        let j = p.num_outputs();
        let d = &u[..j];
        let (lo, hi) = p.omega_hat_interval(d).unwrap();
        let m0: Vec<f64> = d.iter().map(|v| v * (lo + (hi - lo) * (0.1 + 0.8 * u[3]))).collect();
        prop_assume!(p.membership(&m0).omega);
        let kappa = p.cal_f(&m0).unwrap();
        let rep = p.solve(&kappa, &ScalingOpts::default()).unwrap();
        prop_assert_eq!(rep.roots.len(), 1);
        let r = &rep.roots[0];
        prop_assert!(r.residual <= 1e-10);
        for (a, b) in r.m.iter().zip(&m0) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn fractal_is_linear_in_input_pressure(
        cell in star_cell(0.0, 0.5),
        lk in prop::collection::vec(0.2..0.9f64, 6),
        depth in 1usize..=3,
        x0 in -3.0..3.0f64,
    ) {
        let j = cell.num_outputs();
        let factors = ScalingFactors::new(lk[..j].to_vec(), lk[3..3 + j].to_vec()).unwrap();
        let closure = LeafClosure::Robin { beta: 0.3 };
        let f = TruncatedFractal::assemble(&cell, &factors, closure, depth, &FractalOpts::default()).unwrap();
        let one = f.solve(1.0).unwrap();
        let scaled = f.solve(x0).unwrap();
        prop_assert!((scaled.input_flux - x0 * one.input_flux).abs() <= 1e-12 * (1.0 + scaled.input_flux.abs()));
        for (a, b) in scaled.pressures().iter().zip(one.pressures()) {
            prop_assert!((a.pressure - x0 * b.pressure).abs() <= 1e-12 * (1.0 + a.pressure.abs()));
        }
        prop_assert!(scaled.kirchhoff_residual <= 1e-9 * (1.0 + x0.abs()));
    }

    #[test]
    fn instance_maps_are_scaled_copies(
        cell in star_cell(-0.2, 0.5),
        lk in prop::collection::vec(0.2..0.9f64, 6),
    ) {
        let j = cell.num_outputs();
        let factors = ScalingFactors::new(lk[..j].to_vec(), lk[3..3 + j].to_vec()).unwrap();
        let base = CellSolver::new(&cell, TOL).unwrap().flux_map().unwrap();
        let f = TruncatedFractal::assemble(&cell, &factors, LeafClosure::Robin { beta: 0.3 }, 2, &FractalOpts::default())
            .unwrap();
        prop_assert!(f.scaled_dtn_defect(&base).unwrap() <= 1e-9);
        prop_assert_eq!(classify_regime(f.cell()), classify_regime(&cell));
    }
}
