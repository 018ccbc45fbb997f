//! Seeded random cells and the cross-module invariant suite.
//!
//! Every check in [`registry`] runs over hand-written fixtures and/or random
//! cells and reports its worst measured value together with a witness for
//! the first failure. Interior statements are checked on equispaced sample
//! points per edge, a finite surrogate for "everywhere inside the cell".

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cell::{serialize_cell, CoefficientSpec, Edge, ElementaryCell};
use crate::dtn::{fem_oracle_solve, CellSolver, DirichletData, DtNMatrix, SAMPLES_PER_EDGE};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::fractal::{compare_oracle, FractalOpts, LeafClosure, SelfReproducing, TruncatedFractal};
use crate::scaling::{
    classify_regime, InfeasibleReason, RegimeClass, ScalingFactors, ScalingOpts, ScalingProblem,
};

pub const REPORT_SCHEMA: &str = "capnet.verify/1";

/// Knobs of the random cell generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomCellParams {
    /// Fixed `J`; drawn from `1..=4` when `None`.
    pub num_outputs: Option<usize>,
    pub max_interior: usize,
    /// Replaces the regime's random `B` on every edge.
    pub b_override: Option<f64>,
    /// Elements per edge for the finite-element definiteness screen.
    pub fem_elements: usize,
    pub max_tries: usize,
}

impl Default for RandomCellParams {
    fn default() -> Self {
        Self {
            num_outputs: None,
            max_interior: 6,
            b_override: None,
            fem_elements: 256,
            max_tries: 100,
        }
    }
}

/// A random admissible cell: a random tree on the interior vertices, one
/// input, `J` outputs, optionally one extra interior edge. Lengths and `H`
/// are constants in `[0.5, 2]`; `B` is `0`, in `(0, 0.5]` or in `[−0.5, 0)`
/// by regime. Cells with negative `B` must pass the finite-element
/// definiteness screen, otherwise they are redrawn.
pub fn random_cell(
    seed: u64,
    regime: RegimeClass,
    params: &RandomCellParams,
) -> Result<ElementaryCell> {
    if regime == RegimeClass::Mixed {
        return Err(Error::InvalidInput("no generator for mixed-sign B".into()));
    }
    if params.max_interior == 0 || params.num_outputs == Some(0) {
        return Err(Error::InvalidInput(
            "need at least one interior vertex and one output".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::from("no attempt made");
    for _ in 0..params.max_tries {
        let cell = draw_cell(&mut rng, regime, params);
        let negative = cell.edges().iter().any(|e| e.b.eval(0.0) < 0.0);
        if !negative {
            return Ok(cell);
        }
        let zeros = DirichletData::new(0.0, vec![0.0; cell.num_outputs()])?;
        match fem_oracle_solve(&cell, &zeros, params.fem_elements) {
            Ok(f) if f.definite => {
                if CellSolver::new(&cell, crate::edge_ode::DEFAULT_TOL).is_ok() {
                    return Ok(cell);
                }
                last = "degenerate edge".into();
            }
            Ok(_) => last = "form not positive definite".into(),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Generator(format!(
        "{} attempts rejected, last reason: {last}",
        params.max_tries
    )))
}

fn draw_cell(
    rng: &mut ChaCha8Rng,
    regime: RegimeClass,
    params: &RandomCellParams,
) -> ElementaryCell {
    let j = params.num_outputs.unwrap_or_else(|| rng.gen_range(1..=4));
    let n = rng.gen_range(1..=params.max_interior);
    // 0 = input, 1..=n interior, n+1..=n+j outputs
    let mut ends: Vec<(usize, usize)> = (1..n).map(|i| (1 + rng.gen_range(0..i), 1 + i)).collect();
    let mut degree = vec![0usize; n + 1 + j];
    for &(a, b) in &ends {
        degree[a] += 1;
        degree[b] += 1;
    }
    let attach = |rng: &mut ChaCha8Rng,
                  degree: &mut Vec<usize>,
                  ends: &mut Vec<(usize, usize)>,
                  outer: usize,
                  is_input: bool| {
        let deficient: Vec<usize> = (1..=n).filter(|&v| degree[v] < 2).collect();
        let v = if deficient.is_empty() {
            1 + rng.gen_range(0..n)
        } else {
            deficient[rng.gen_range(0..deficient.len())]
        };
        ends.push(if is_input { (outer, v) } else { (v, outer) });
        degree[v] += 1;
        degree[outer] += 1;
    };
    attach(rng, &mut degree, &mut ends, 0, true);
    for k in 0..j {
        attach(rng, &mut degree, &mut ends, n + 1 + k, false);
    }
    while let Some(v) = (1..=n).find(|&v| degree[v] < 2) {
        let others: Vec<usize> = (1..=n).filter(|&u| u != v).collect();
        let needy: Vec<usize> = others.iter().copied().filter(|&u| degree[u] < 2).collect();
        let pool = if needy.is_empty() { &others } else { &needy };
        let u = pool[rng.gen_range(0..pool.len())];
        ends.push((v, u));
        degree[v] += 1;
        degree[u] += 1;
    }
    if n >= 2 && rng.gen_bool(0.3) {
        let a = 1 + rng.gen_range(0..n);
        let mut b = 1 + rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        ends.push((a, b));
    }

    let name = |v: usize| match v {
        0 => "W0".to_string(),
        v if v <= n => format!("v{v}"),
        v => format!("W{}", v - n),
    };
    let edges = ends
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let length = rng.gen_range(0.5..=2.0);
            let h = rng.gen_range(0.5..=2.0);
            let b_val = match regime {
                RegimeClass::Impermeable | RegimeClass::Mixed => 0.0,
                RegimeClass::PermeablePlus => 0.5 - rng.gen_range(0.0..0.5),
                RegimeClass::PermeableMinus => -(0.5 - rng.gen_range(0.0..0.5)),
            };
            Edge::new(
                format!("e{}", i + 1),
                name(a),
                name(b),
                length,
                CoefficientSpec::constant(h),
                CoefficientSpec::constant(params.b_override.unwrap_or(b_val)),
            )
        })
        .collect();
    let vertices = (0..n + 1 + j).map(name).collect();
    let outputs = (1..=j).map(|k| format!("W{k}")).collect();
    ElementaryCell::new(vertices, edges, "W0", outputs)
        .expect("generator produces admissible topology")
}

/// Deliberate defects for testing that the suite detects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Reverse the sign convention of `F₀` in the computed flux maps.
    FlipInputFluxSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub green: f64,
    pub conservation: f64,
    pub fem: f64,
    pub energy: f64,
    pub jacobian: f64,
    pub residual: f64,
    pub roots: f64,
    pub fractal: f64,
    pub scaled_dtn: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            green: 1e-9,
            conservation: 1e-9,
            fem: 1e-6,
            energy: 1e-9,
            jacobian: 1e-6,
            residual: 1e-10,
            roots: 1e-8,
            fractal: 1e-8,
            scaled_dtn: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationConfig {
    pub seed: u64,
    pub cells_per_regime: usize,
    pub points_per_edge: usize,
    /// Random Dirichlet data sets per cell.
    pub data_per_cell: usize,
    pub tolerances: Tolerances,
    pub fault: Option<Fault>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            cells_per_regime: 20,
            points_per_edge: SAMPLES_PER_EDGE,
            data_per_cell: 10,
            tolerances: Tolerances::default(),
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Compact JSON of the offending cell.
    pub cell: String,
    pub data: Vec<f64>,
    pub location: String,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub module: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest measured value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub config: VerificationConfig,
    pub sampling_note: String,
    pub generator_failures: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

pub struct CheckSpec {
    pub id: &'static str,
    pub module: &'static str,
    pub description: &'static str,
    run: fn(&Suite, &mut Tracker),
}

/// All checks, in report order.
pub fn registry() -> &'static [CheckSpec] {
    REGISTRY
}

/// Invariants each module declares; the registry must cover exactly these.
pub const DECLARED_INVARIANTS: &[(&str, &[&str])] = &[
    (
        "dtn",
        &[
            "dtn.green_symmetry",
            "dtn.flux_conservation",
            "dtn.max_principle_b0",
            "dtn.max_principle_bpos",
            "dtn.positivity",
            "dtn.fem_agreement",
            "dtn.q_properties",
            "dtn.r_properties",
        ],
    ),
    (
        "scaling",
        &[
            "scaling.solution_invariants",
            "scaling.jacobian_fd",
            "scaling.det_factorization",
            "scaling.energy_identity",
            "scaling.range_b0",
            "scaling.range_bpos",
            "scaling.uniqueness_bneg",
        ],
    ),
    (
        "fractal",
        &[
            "fractal.scaled_dtn",
            "fractal.self_reproduction",
            "fractal.closure_equivalence",
            "fractal.flux_law",
            "fractal.linearity",
        ],
    ),
    ("example", &["example.gamma"]),
];

macro_rules! check {
    ($id:literal, $module:literal, $desc:literal, $f:ident) => {
        CheckSpec {
            id: $id,
            module: $module,
            description: $desc,
            run: $f,
        }
    };
}

static REGISTRY: &[CheckSpec] = &[
    check!(
        "dtn.green_symmetry",
        "dtn",
        "flux map is symmetric after negating output rows",
        green_symmetry
    ),
    check!(
        "dtn.flux_conservation",
        "dtn",
        "sum of output fluxes equals input flux when B = 0",
        flux_conservation
    ),
    check!(
        "dtn.max_principle_b0",
        "dtn",
        "strict maximum principle and flux signs at the maximiser, B = 0",
        max_principle_b0
    ),
    check!(
        "dtn.max_principle_bpos",
        "dtn",
        "interior values below a non-negative boundary maximum, B >= 0",
        max_principle_bpos
    ),
    check!(
        "dtn.positivity",
        "dtn",
        "non-negative data give positive solutions and signed fluxes at zero data",
        positivity
    ),
    check!(
        "dtn.fem_agreement",
        "dtn",
        "shooting and finite-element vertex values agree",
        fem_agreement
    ),
    check!(
        "dtn.q_properties",
        "dtn",
        "0 < Q(W_k) < 1 and F0(Q) > 0 when B >= 0",
        q_properties
    ),
    check!(
        "dtn.r_properties",
        "dtn",
        "R > 1 inside, F0(1,1) < 0, F_j(1,1) > 0 when B <= 0",
        r_properties
    ),
    check!(
        "scaling.solution_invariants",
        "scaling",
        "roots satisfy the residual, beta and membership invariants",
        solution_invariants
    ),
    check!(
        "scaling.jacobian_fd",
        "scaling",
        "Jacobian agrees with central differences",
        jacobian_fd
    ),
    check!(
        "scaling.det_factorization",
        "scaling",
        "det J changes sign exactly where S does along rays",
        det_factorization
    ),
    check!(
        "scaling.energy_identity",
        "scaling",
        "S(m) equals the energy integral of the (1, m) solution",
        energy_identity
    ),
    check!(
        "scaling.range_b0",
        "scaling",
        "B = 0: solvable iff sum of kappa exceeds 1",
        range_b0
    ),
    check!(
        "scaling.range_bpos",
        "scaling",
        "B >= 0: exactly one root for every positive kappa",
        range_bpos
    ),
    check!(
        "scaling.uniqueness_bneg",
        "scaling",
        "B <= 0: at most one root with S > 0",
        uniqueness_bneg
    ),
    check!(
        "fractal.scaled_dtn",
        "fractal",
        "scaled cell flux maps equal (prod k / prod l) A",
        scaled_dtn
    ),
    check!(
        "fractal.self_reproduction",
        "fractal",
        "truncated solve matches the self-reproducing formula",
        self_reproduction
    ),
    check!(
        "fractal.closure_equivalence",
        "fractal",
        "Robin and Dirichlet leaf closures agree",
        closure_equivalence
    ),
    check!(
        "fractal.flux_law",
        "fractal",
        "input flux equals beta times X0",
        flux_law
    ),
    check!(
        "fractal.linearity",
        "fractal",
        "doubling X0 doubles the solution",
        linearity
    ),
    check!(
        "example.gamma",
        "example",
        "closed-form scaling map and its two roots at kappa = 14",
        gamma_example_check
    ),
];

/// Inputs shared by all checks.
pub struct Suite {
    cfg: VerificationConfig,
    random: Vec<(RegimeClass, Vec<ElementaryCell>)>,
}

const REGIMES: [RegimeClass; 3] = [
    RegimeClass::Impermeable,
    RegimeClass::PermeablePlus,
    RegimeClass::PermeableMinus,
];

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of random cell `index` of `regime` under master seed `seed`.
pub fn cell_seed(seed: u64, regime: RegimeClass, index: usize) -> u64 {
    let r = REGIMES.iter().position(|&x| x == regime).unwrap_or(3) as u64;
    splitmix(seed ^ splitmix((r << 32) | index as u64))
}

fn check_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let h = id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ h))
}

impl Suite {
    fn new(cfg: VerificationConfig) -> (Self, Vec<String>) {
        let jobs: Vec<(RegimeClass, usize)> = REGIMES
            .iter()
            .flat_map(|&r| (0..cfg.cells_per_regime).map(move |i| (r, i)))
            .collect();
        let drawn: Vec<(RegimeClass, usize, Result<ElementaryCell>)> = jobs
            .par_iter()
            .map(|&(r, i)| {
                (
                    r,
                    i,
                    random_cell(cell_seed(cfg.seed, r, i), r, &RandomCellParams::default()),
                )
            })
            .collect();
        let mut random: Vec<(RegimeClass, Vec<ElementaryCell>)> =
            REGIMES.iter().map(|&r| (r, Vec::new())).collect();
        let mut failures = Vec::new();
        for (r, i, res) in drawn {
            match res {
                Ok(c) => random.iter_mut().find(|(x, _)| *x == r).unwrap().1.push(c),
                Err(e) => failures.push(format!("{r:?} cell {i}: {e}")),
            }
        }
        (Self { cfg, random }, failures)
    }

    fn random(&self, regime: RegimeClass) -> &[ElementaryCell] {
        &self.random.iter().find(|(r, _)| *r == regime).unwrap().1
    }

    fn all_random(&self) -> impl Iterator<Item = &ElementaryCell> {
        self.random.iter().flat_map(|(_, c)| c.iter())
    }

    fn flux_map(&self, solver: &CellSolver) -> Result<DtNMatrix> {
        let mut a = solver.flux_map()?;
        if self.cfg.fault == Some(Fault::FlipInputFluxSign) {
            a.a.row_mut(0).neg_mut();
        }
        Ok(a)
    }
}

/// Named fixtures with known closed forms.
pub fn fixture_cells() -> Vec<(&'static str, ElementaryCell)> {
    vec![
        ("single_edge", fixtures::single_edge(1.0, 0.0, 1.0)),
        ("gamma_edge", fixtures::gamma_edge(PI / 3.0)),
        ("cosh_edge", fixtures::single_edge(1.0, 0.04, 1.0)),
        ("y_cell", fixtures::y_cell(0.0)),
        ("y_cell_plus", fixtures::y_cell(0.3)),
        ("y_cell_minus", fixtures::y_cell(-0.5)),
        ("graded_y", fixtures::graded_y()),
    ]
}

/// Name, cell, factors and root `m`.
pub type FractalFixture = (&'static str, ElementaryCell, ScalingFactors, Vec<f64>);

/// Fixture cells with admissible fractal factors and a root `m` of the
/// scaling system for them.
pub fn fractal_fixtures() -> Result<Vec<FractalFixture>> {
    let cases = vec![
        (
            "single_edge",
            fixtures::single_edge(1.0, 0.0, 1.0),
            vec![0.4],
            vec![0.8],
        ),
        (
            "y_cell",
            fixtures::y_cell(0.0),
            vec![0.5, 0.5],
            vec![0.5, 0.5],
        ),
        (
            "graded_y",
            fixtures::graded_y(),
            vec![0.5, 0.6],
            vec![0.4, 0.3],
        ),
        (
            "gamma_edge",
            fixtures::gamma_edge(PI / 3.0),
            vec![0.05],
            vec![0.7],
        ),
    ];
    cases
        .into_iter()
        .map(|(name, cell, l, k)| {
            let f = ScalingFactors::new(l, k)?;
            let p = ScalingProblem::new(&cell, 1e-12)?;
            let rep = p.solve(&f.kappa, &ScalingOpts::default())?;
            let root = rep
                .roots
                .iter()
                .find(|r| r.in_omega_hat_plus)
                .ok_or_else(|| {
                    Error::Postcondition(format!("no root in the positive-energy set for {name}"))
                })?;
            Ok((name, cell, f, root.m.clone()))
        })
        .collect()
}

/// Accumulates one check's outcome.
struct Tracker {
    cases: usize,
    worst: f64,
    tolerance: f64,
    failed: bool,
    witness: Option<Witness>,
}

impl Tracker {
    fn new(tolerance: f64) -> Self {
        Self {
            cases: 0,
            worst: 0.0,
            tolerance,
            failed: false,
            witness: None,
        }
    }

    /// Records a measurement; passes when `value <= tolerance`.
    fn measure(
        &mut self,
        value: f64,
        cell: &ElementaryCell,
        data: &[f64],
        location: impl FnOnce() -> String,
    ) {
        self.cases += 1;
        if !(value <= self.worst) {
            self.worst = if value.is_nan() {
                f64::INFINITY
            } else {
                value.max(self.worst)
            };
        }
        if !(value <= self.tolerance) && !self.failed {
            self.failed = true;
            self.witness = Some(Witness {
                cell: serialize_cell(cell),
                data: data.to_vec(),
                location: location(),
                violation: value,
            });
        }
    }

    /// A pass/fail case counted as 0 or 1 violations.
    fn expect(
        &mut self,
        ok: bool,
        cell: &ElementaryCell,
        data: &[f64],
        location: impl FnOnce() -> String,
    ) {
        self.measure(if ok { 0.0 } else { 1.0 }, cell, data, location);
    }

    fn error(&mut self, err: &Error, cell: &ElementaryCell, data: &[f64]) {
        self.measure(f64::INFINITY, cell, data, || format!("error: {err}"));
    }
}

macro_rules! try_or_record {
    ($t:expr, $cell:expr, $data:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => {
                $t.error(&err, $cell, $data);
                continue;
            }
        }
    };
}

fn random_data(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn cells_of<'a>(suite: &'a Suite, regimes: &[RegimeClass]) -> Vec<&'a ElementaryCell> {
    regimes
        .iter()
        .flat_map(|&r| suite.random(r).iter())
        .collect()
}

fn fixture_list(names: &[&str]) -> Vec<ElementaryCell> {
    fixture_cells()
        .into_iter()
        .filter(|(n, _)| names.contains(n))
        .map(|(_, c)| c)
        .collect()
}

fn green_symmetry(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.green;
    let fx = fixture_list(&[
        "single_edge",
        "gamma_edge",
        "cosh_edge",
        "y_cell",
        "y_cell_plus",
        "y_cell_minus",
        "graded_y",
    ]);
    for cell in s.all_random().chain(fx.iter()) {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        let a = try_or_record!(t, cell, &[], s.flux_map(&solver));
        t.measure(a.green_symmetry_defect(), cell, &[], || "flux map".into());
    }
}

fn flux_conservation(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.conservation;
    let mut rng = check_rng(s.cfg.seed, "dtn.flux_conservation");
    let fx = fixture_list(&["single_edge", "y_cell"]);
    for cell in cells_of(s, &[RegimeClass::Impermeable])
        .into_iter()
        .chain(fx.iter())
    {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        let a = try_or_record!(t, cell, &[], s.flux_map(&solver));
        for _ in 0..s.cfg.data_per_cell {
            let x = random_data(&mut rng, cell.num_outputs() + 1, -1.0, 1.0);
            let sol = try_or_record!(
                t,
                cell,
                &x,
                solver.solve_dirichlet(&DirichletData::from_slice(&x))
            );
            // Both the solution's own fluxes and the assembled map.
            for (what, f) in [
                ("solution", sol.fluxes.clone()),
                ("flux map", a.fluxes(x[0], &x[1..])),
            ] {
                let norm = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let defect = (f[1..].iter().sum::<f64>() - f[0]).abs() / (1.0 + norm);
                t.measure(defect, cell, &x, || {
                    format!("sum F_j - F_0 from the {what}")
                });
            }
        }
    }
}

fn max_principle_b0(s: &Suite, t: &mut Tracker) {
    let mut rng = check_rng(s.cfg.seed, "dtn.max_principle_b0");
    t.tolerance = 0.0;
    let fx = fixture_list(&["single_edge", "y_cell"]);
    for cell in cells_of(s, &[RegimeClass::Impermeable])
        .into_iter()
        .chain(fx.iter())
    {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        for _ in 0..s.cfg.data_per_cell {
            let x = random_data(&mut rng, cell.num_outputs() + 1, -1.0, 1.0);
            let sol = try_or_record!(
                t,
                cell,
                &x,
                solver.solve_dirichlet(&DirichletData::from_slice(&x))
            );
            let (lo, hi) = x
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
            let pts = try_or_record!(
                t,
                cell,
                &x,
                solver.interior_samples(&sol, s.cfg.points_per_edge)
            );
            let bad = pts.iter().find(|p| !(p.w > lo && p.w < hi));
            t.expect(bad.is_none(), cell, &x, || {
                let p = bad.unwrap();
                format!("edge {} xi {} w {}", p.edge_id, p.xi, p.w)
            });
            let k = x
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            let sign_ok = if k == 0 {
                sol.fluxes[0] > 0.0
            } else {
                sol.fluxes[k] < 0.0
            };
            t.expect(sign_ok, cell, &x, || format!("flux sign at maximiser W{k}"));
        }
    }
}

fn max_principle_bpos(s: &Suite, t: &mut Tracker) {
    let mut rng = check_rng(s.cfg.seed, "dtn.max_principle_bpos");
    t.tolerance = 0.0;
    let fx = fixture_list(&["cosh_edge", "y_cell_plus", "graded_y"]);
    for cell in cells_of(s, &[RegimeClass::PermeablePlus])
        .into_iter()
        .chain(fx.iter())
    {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        for _ in 0..s.cfg.data_per_cell {
            let x = random_data(&mut rng, cell.num_outputs() + 1, -0.5, 1.0);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi < 0.0 {
                continue;
            }
            let sol = try_or_record!(
                t,
                cell,
                &x,
                solver.solve_dirichlet(&DirichletData::from_slice(&x))
            );
            let pts = try_or_record!(
                t,
                cell,
                &x,
                solver.interior_samples(&sol, s.cfg.points_per_edge)
            );
            let bad = pts.iter().find(|p| !(p.w < hi));
            t.expect(bad.is_none(), cell, &x, || {
                let p = bad.unwrap();
                format!("edge {} xi {} w {}", p.edge_id, p.xi, p.w)
            });
        }
    }
}

fn positivity(s: &Suite, t: &mut Tracker) {
    let mut rng = check_rng(s.cfg.seed, "dtn.positivity");
    t.tolerance = 0.0;
    let fx = fixture_list(&[
        "single_edge",
        "gamma_edge",
        "cosh_edge",
        "y_cell",
        "y_cell_plus",
        "y_cell_minus",
        "graded_y",
    ]);
    for cell in s.all_random().chain(fx.iter()) {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        for _ in 0..s.cfg.data_per_cell {
            let n = cell.num_outputs() + 1;
            let mut x = random_data(&mut rng, n, 0.0, 1.0);
            let zero = rng.gen_range(0..n);
            x[zero] = 0.0;
            if x.iter().all(|&v| v == 0.0) {
                x[(zero + 1) % n] = 1.0;
            }
            let sol = try_or_record!(
                t,
                cell,
                &x,
                solver.solve_dirichlet(&DirichletData::from_slice(&x))
            );
            let pts = try_or_record!(
                t,
                cell,
                &x,
                solver.interior_samples(&sol, s.cfg.points_per_edge)
            );
            let bad = pts.iter().find(|p| !(p.w > 0.0));
            t.expect(bad.is_none(), cell, &x, || {
                let p = bad.unwrap();
                format!("edge {} xi {} w {}", p.edge_id, p.xi, p.w)
            });
            for (k, &v) in x.iter().enumerate() {
                if v == 0.0 {
                    let ok = if k == 0 {
                        sol.fluxes[0] < 0.0
                    } else {
                        sol.fluxes[k] > 0.0
                    };
                    t.expect(ok, cell, &x, || {
                        format!("flux sign at zero datum W{k}: {}", sol.fluxes[k])
                    });
                }
            }
        }
    }
}

fn fem_agreement(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.fem;
    let mut rng = check_rng(s.cfg.seed, "dtn.fem_agreement");
    for (_, cell) in fixture_cells() {
        let x = random_data(&mut rng, cell.num_outputs() + 1, -1.0, 1.0);
        let data = DirichletData::from_slice(&x);
        let ivp = try_or_record!(
            t,
            &cell,
            &x,
            CellSolver::new(&cell, 1e-12).and_then(|s| s.solve_dirichlet(&data))
        );
        let fem = try_or_record!(t, &cell, &x, fem_oracle_solve(&cell, &data, 256));
        let diff = ivp
            .vertex_values
            .iter()
            .zip(&fem.solution.vertex_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        t.measure(diff, &cell, &x, || "vertex values".into());
    }
}

fn q_properties(s: &Suite, t: &mut Tracker) {
    t.tolerance = 0.0;
    let fx = fixture_list(&["cosh_edge", "y_cell_plus", "graded_y"]);
    for cell in cells_of(s, &[RegimeClass::PermeablePlus])
        .into_iter()
        .chain(fx.iter())
    {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        let q = try_or_record!(t, cell, &[], solver.solve_q());
        let out = q.boundary_values(cell);
        let ok = out[1..].iter().all(|&v| v > 0.0 && v < 1.0) && q.fluxes[0] > 0.0;
        t.expect(ok, cell, &[], || {
            format!("Q at outputs {:?}, F0 {}", &out[1..], q.fluxes[0])
        });
    }
}

fn r_properties(s: &Suite, t: &mut Tracker) {
    t.tolerance = 0.0;
    let fx = fixture_list(&["gamma_edge", "y_cell_minus"]);
    for cell in cells_of(s, &[RegimeClass::PermeableMinus])
        .into_iter()
        .chain(fx.iter())
    {
        let solver = try_or_record!(t, cell, &[], CellSolver::new(cell, 1e-10));
        let r = try_or_record!(t, cell, &[], solver.solve_r());
        let pts = try_or_record!(
            t,
            cell,
            &[],
            solver.interior_samples(&r, s.cfg.points_per_edge)
        );
        let ok = pts.iter().all(|p| p.w > 1.0)
            && r.fluxes[0] < 0.0
            && r.fluxes[1..].iter().all(|&f| f > 0.0);
        t.expect(ok, cell, &[], || format!("R fluxes {:?}", r.fluxes));
    }
}

fn scaling_fixtures() -> Vec<ElementaryCell> {
    fixture_list(&[
        "single_edge",
        "gamma_edge",
        "y_cell",
        "y_cell_plus",
        "y_cell_minus",
        "graded_y",
    ])
}

/// Random point of `Ω̂` along a random positive direction, at a fraction in
/// `[lo, hi)` of the ray's feasible interval. `None` if ten directions miss.
fn random_point(p: &ScalingProblem, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Option<Vec<f64>> {
    for _ in 0..10 {
        let d: Vec<f64> = (0..p.num_outputs())
            .map(|_| rng.gen_range(0.2..1.0))
            .collect();
        if let Some((a, b)) = p.omega_hat_interval(&d) {
            let t = a + (b - a) * rng.gen_range(lo..hi);
            return Some(d.iter().map(|v| v * t).collect());
        }
    }
    None
}

fn solution_invariants(s: &Suite, t: &mut Tracker) {
    let tol = s.cfg.tolerances.residual;
    t.tolerance = tol;
    let mut rng = check_rng(s.cfg.seed, "scaling.solution_invariants");
    let cells: Vec<ElementaryCell> = scaling_fixtures()
        .into_iter()
        .chain(
            REGIMES
                .iter()
                .flat_map(|&r| s.random(r).iter().take(5).cloned()),
        )
        .collect();
    for cell in &cells {
        let p = try_or_record!(t, cell, &[], ScalingProblem::new(cell, 1e-10));
        // Cells with F₀(1, 0) ≤ 0 may leave no admissible ray at all.
        let Some(m0) = random_point(&p, &mut rng, 0.2, 0.6) else {
            continue;
        };
        let kappa = try_or_record!(t, cell, &m0, p.cal_f(&m0));
        let rep = try_or_record!(t, cell, &kappa, p.solve(&kappa, &ScalingOpts::default()));
        t.expect(!rep.roots.is_empty(), cell, &kappa, || {
            "no root for a kappa in the image".into()
        });
        for r in &rep.roots {
            let f = p.fluxes(&r.m);
            let eq = (0..r.m.len())
                .map(|j| (f[j + 1] - r.m[j] * kappa[j] * f[0]).abs() / f[0].abs())
                .fold(0.0, f64::max);
            t.measure(r.residual.max(eq), cell, &kappa, || {
                format!("root {:?}", r.m)
            });
            t.expect(r.beta == f[0], cell, &kappa, || {
                "stored beta differs from F0(1, m)".into()
            });
            t.expect(r.membership() == p.membership(&r.m), cell, &kappa, || {
                "membership flags differ".into()
            });
        }
    }
}

fn jacobian_fd(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.jacobian;
    let mut rng = check_rng(s.cfg.seed, "scaling.jacobian_fd");
    const H: f64 = 1e-6;
    for cell in scaling_fixtures() {
        let p = try_or_record!(t, &cell, &[], ScalingProblem::new(&cell, 1e-10));
        for _ in 0..20 {
            let Some(m) = random_point(&p, &mut rng, 0.1, 0.9) else {
                continue;
            };
            let jac = try_or_record!(t, &cell, &m, p.jacobian(&m));
            let n = m.len();
            let mut fd = DMatrix::zeros(n, n);
            for i in 0..n {
                let mut a = m.clone();
                let mut b = m.clone();
                a[i] += H;
                b[i] -= H;
                let fa = try_or_record!(t, &cell, &m, p.cal_f(&a));
                let fb = try_or_record!(t, &cell, &m, p.cal_f(&b));
                for r in 0..n {
                    fd[(r, i)] = (fa[r] - fb[r]) / (2.0 * H);
                }
            }
            let rel = (&jac - &fd).amax() / jac.amax().max(1.0);
            t.measure(rel, &cell, &m, || "max entry".into());
        }
    }
}

/// Sign law of `det 𝓙 = Λ S` along the diagonal ray.
fn det_factorization(s: &Suite, t: &mut Tracker) {
    t.tolerance = 0.0;
    let mut cells = vec![fixtures::gamma_edge(PI / 3.0)];
    let mut found_random = false;
    for cell in s.random(RegimeClass::PermeableMinus) {
        if let Ok(p) = ScalingProblem::new(cell, 1e-12) {
            let d = vec![1.0; p.num_outputs()];
            if let Ok(Some(ts)) = p.critical_surface_ray(&d) {
                let dn = (d.len() as f64).sqrt();
                let m: Vec<f64> = d.iter().map(|v| v * ts / dn).collect();
                if p.check_ttf1s(&m).unwrap_or(false) {
                    cells.push(cell.clone());
                    found_random = true;
                    break;
                }
            }
        }
    }
    if !found_random && s.cfg.cells_per_regime > 0 {
        let witness_cell = fixtures::gamma_edge(PI / 3.0);
        t.expect(false, &witness_cell, &[], || {
            "no random B <= 0 cell with a critical crossing passing the subspace condition".into()
        });
    }
    for cell in &cells {
        let p = try_or_record!(t, cell, &[], ScalingProblem::new(cell, 1e-12));
        let j = p.num_outputs();
        let d: Vec<f64> = vec![1.0 / (j as f64).sqrt(); j];
        let ts = match try_or_record!(t, cell, &[], p.critical_surface_ray(&d)) {
            Some(v) => v,
            None => {
                t.expect(false, cell, &d, || "no crossing on the diagonal".into());
                continue;
            }
        };
        let at = |tt: f64| -> Vec<f64> { d.iter().map(|v| v * tt).collect() };
        let det = |m: &[f64]| p.jacobian(m).map(|j| j.determinant());
        let lo = try_or_record!(t, cell, &d, det(&at(ts - 5e-9)));
        let hi = try_or_record!(t, cell, &d, det(&at(ts + 5e-9)));
        t.expect(lo * hi < 0.0, cell, &d, || {
            format!("det J at t* -/+ 5e-9: {lo:e}, {hi:e}")
        });
        // one crossing of S, and det J / S of constant sign away from it
        let t_end = p.omega_hat_extent(&d);
        let mut sigma: Option<f64> = None;
        let mut s_changes = 0;
        let mut prev_s: Option<f64> = None;
        for i in 1..64 {
            let tt = t_end * i as f64 / 64.0;
            let m = at(tt);
            let sv = p.energy(&m);
            if let Some(ps) = prev_s {
                if ps * sv < 0.0 {
                    s_changes += 1;
                }
            }
            prev_s = Some(sv);
            if (tt - ts).abs() < 1e-6 || !p.check_ttf1s(&m).unwrap_or(false) {
                continue;
            }
            let dv = try_or_record!(t, cell, &m, det(&m));
            let sg = (dv * sv).signum();
            match sigma {
                None => sigma = Some(sg),
                Some(s0) => t.expect(s0 == sg, cell, &m, || {
                    format!("sign of det J / S flips at t = {tt}")
                }),
            }
        }
        t.expect(s_changes == 1, cell, &d, || {
            format!("S changes sign {s_changes} times on the ray")
        });
    }
}

fn energy_identity(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.energy;
    let mut rng = check_rng(s.cfg.seed, "scaling.energy_identity");
    for cell in scaling_fixtures() {
        let solver = try_or_record!(t, &cell, &[], CellSolver::new(&cell, 1e-12));
        let a = try_or_record!(t, &cell, &[], solver.flux_map());
        let p = ScalingProblem::from_dtn(a, classify_regime(&cell));
        for _ in 0..10 {
            let m = random_data(&mut rng, cell.num_outputs(), 0.05, 0.95);
            let sol = try_or_record!(
                t,
                &cell,
                &m,
                solver.solve_dirichlet(&DirichletData::new(1.0, m.clone()).unwrap())
            );
            let energy = try_or_record!(t, &cell, &m, solver.energy_integral(&sol));
            let sv = p.energy(&m);
            t.measure((sv - energy).abs() / (1.0 + sv.abs()), &cell, &m, || {
                "S(m) vs integral".into()
            });
        }
    }
}

fn range_b0(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.roots;
    let opts = ScalingOpts::default();
    let fx = fixture_list(&["single_edge", "y_cell"]);
    let closed_form = fx.len();
    for (i, cell) in fx
        .iter()
        .chain(s.random(RegimeClass::Impermeable).iter())
        .enumerate()
    {
        let p = try_or_record!(t, cell, &[], ScalingProblem::new(cell, 1e-10));
        let j = p.num_outputs();
        let above = vec![1.01 / j as f64; j];
        let below = vec![0.99 / j as f64; j];
        let rep = try_or_record!(t, cell, &above, p.solve(&above, &opts));
        t.expect(
            rep.roots.len() == 1 && rep.roots[0].in_omega,
            cell,
            &above,
            || format!("{} roots above the threshold", rep.roots.len()),
        );
        if i < closed_form && rep.roots.len() == 1 {
            // single edge and unit Y-cell: m = 1/(J κ)
            let expect = 1.0 / (j as f64 * above[0]);
            let err = rep.roots[0]
                .m
                .iter()
                .map(|m| (m - expect).abs())
                .fold(0.0, f64::max);
            t.measure(err, cell, &above, || "m against the closed form".into());
        }
        let rep = try_or_record!(t, cell, &below, p.solve(&below, &opts));
        t.expect(
            !rep.feasible && rep.reason == Some(InfeasibleReason::KappaNotInXi),
            cell,
            &below,
            || "feasible below the threshold".into(),
        );
    }
}

fn range_bpos(s: &Suite, t: &mut Tracker) {
    t.tolerance = 0.0;
    let opts = ScalingOpts {
        exhaustive: true,
        ..ScalingOpts::default()
    };
    for cell in s.random(RegimeClass::PermeablePlus) {
        let p = try_or_record!(t, cell, &[], ScalingProblem::new(cell, 1e-10));
        let j = p.num_outputs();
        for idx in 0..3usize.pow(j as u32) {
            let kappa: Vec<f64> = (0..j)
                .map(|c| [0.1, 1.0, 10.0][(idx / 3usize.pow(c as u32)) % 3])
                .collect();
            let rep = try_or_record!(t, cell, &kappa, p.solve(&kappa, &opts));
            let ok = rep.roots.len() == 1
                && rep.roots[0].residual <= s.cfg.tolerances.residual
                && rep.roots[0].in_omega;
            t.expect(ok, cell, &kappa, || format!("{} roots", rep.roots.len()));
        }
    }
}

fn uniqueness_bneg(s: &Suite, t: &mut Tracker) {
    t.tolerance = 0.0;
    let opts = ScalingOpts::default();
    let gamma = fixtures::gamma_edge(PI / 3.0);
    match ScalingProblem::new(&gamma, 1e-12).and_then(|p| p.solve(&[14.0], &opts)) {
        Ok(rep) => {
            let ms: Vec<f64> = rep.roots.iter().map(|r| r.m[0]).collect();
            let ok = ms.len() == 2
                && (ms[0] - 0.25).abs() <= s.cfg.tolerances.roots
                && (ms[1] - 2.0 / 7.0).abs() <= s.cfg.tolerances.roots
                && rep.roots.iter().filter(|r| r.s > 0.0).count() == 1;
            t.expect(ok, &gamma, &[14.0], || format!("roots {ms:?}"));
        }
        Err(e) => t.error(&e, &gamma, &[14.0]),
    }
    for cell in s.random(RegimeClass::PermeableMinus) {
        let p = try_or_record!(t, cell, &[], ScalingProblem::new(cell, 1e-10));
        if !(p.dtn().a[(0, 0)] > 0.0) {
            continue;
        }
        let j = p.num_outputs();
        let d = vec![1.0; j];
        let ts = match p.critical_surface_ray(&d) {
            Ok(Some(v)) => v,
            _ => continue,
        };
        let m0: Vec<f64> = vec![0.5 * ts / (j as f64).sqrt(); j];
        let kappa = try_or_record!(t, cell, &m0, p.cal_f(&m0));
        let rep = try_or_record!(t, cell, &kappa, p.solve(&kappa, &opts));
        let plus: Vec<&Vec<f64>> = rep
            .roots
            .iter()
            .filter(|r| r.s > 0.0)
            .map(|r| &r.m)
            .collect();
        let ok = plus.len() == 1
            && plus[0]
                .iter()
                .zip(&m0)
                .all(|(a, b)| (a - b).abs() <= s.cfg.tolerances.roots);
        t.expect(ok, cell, &kappa, || {
            format!("positive-energy roots {plus:?}, expected {m0:?}")
        });
    }
}

/// Runs `f` on every fractal fixture at depths 1 to 3.
fn each_fractal(
    t: &mut Tracker,
    mut f: impl FnMut(&mut Tracker, &ElementaryCell, &ScalingFactors, &[f64], usize) -> Result<()>,
) {
    let fx = match fractal_fixtures() {
        Ok(v) => v,
        Err(e) => {
            t.error(&e, &fixtures::single_edge(1.0, 0.0, 1.0), &[]);
            return;
        }
    };
    for (_, cell, factors, m) in &fx {
        for depth in 1..=3 {
            if let Err(e) = f(t, cell, factors, m, depth) {
                t.error(&e, cell, m);
            }
        }
    }
}

fn dirichlet(
    cell: &ElementaryCell,
    f: &ScalingFactors,
    m: &[f64],
    depth: usize,
) -> Result<TruncatedFractal> {
    TruncatedFractal::assemble(
        cell,
        f,
        LeafClosure::DirichletSelfSimilar { m: m.to_vec() },
        depth,
        &FractalOpts::default(),
    )
}

fn scaled_dtn(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.scaled_dtn;
    each_fractal(t, |t, cell, f, m, depth| {
        let base = CellSolver::new(cell, 1e-10)?.flux_map()?;
        let defect = dirichlet(cell, f, m, depth)?.scaled_dtn_defect(&base)?;
        t.measure(defect, cell, m, || format!("depth {depth}"));
        Ok(())
    });
}

fn self_reproduction(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.fractal;
    each_fractal(t, |t, cell, f, m, depth| {
        let sol = dirichlet(cell, f, m, depth)?.solve(1.0)?;
        let ev = SelfReproducing::new(cell, m, &f.l, 1e-10)?;
        let rep = compare_oracle(&sol, &ev)?;
        t.measure(
            rep.max_discrepancy.max(sol.kirchhoff_residual),
            cell,
            m,
            || format!("depth {depth}"),
        );
        Ok(())
    });
}

fn closure_equivalence(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.fractal;
    each_fractal(t, |t, cell, f, m, depth| {
        let d = dirichlet(cell, f, m, depth)?.solve(1.0)?;
        let beta = SelfReproducing::new(cell, m, &f.l, 1e-10)?.beta();
        let r = TruncatedFractal::assemble(
            cell,
            f,
            LeafClosure::Robin { beta },
            depth,
            &FractalOpts::default(),
        )?
        .solve(1.0)?;
        let mut diff = 0.0f64;
        for (a, b) in d.pressures().iter().zip(r.pressures()) {
            diff = diff.max((a.pressure - b.pressure).abs());
        }
        t.measure(diff, cell, m, || format!("depth {depth}"));
        Ok(())
    });
}

fn flux_law(s: &Suite, t: &mut Tracker) {
    t.tolerance = s.cfg.tolerances.fractal;
    each_fractal(t, |t, cell, f, m, depth| {
        let sol = dirichlet(cell, f, m, depth)?.solve(1.0)?;
        let beta = SelfReproducing::new(cell, m, &f.l, 1e-10)?.beta();
        t.measure((sol.input_flux - beta).abs(), cell, m, || {
            format!("depth {depth}")
        });
        Ok(())
    });
}

fn linearity(_s: &Suite, t: &mut Tracker) {
    t.tolerance = 1e-12;
    each_fractal(t, |t, cell, f, m, depth| {
        let tf = dirichlet(cell, f, m, depth)?;
        let one = tf.solve(1.0)?;
        let two = tf.solve(2.0)?;
        let mut diff = (two.input_flux - 2.0 * one.input_flux).abs();
        for (a, b) in one.pressures().iter().zip(two.pressures()) {
            diff = diff.max((b.pressure - 2.0 * a.pressure).abs());
        }
        t.measure(diff, cell, m, || format!("depth {depth}"));
        Ok(())
    });
}

fn gamma_example_check(s: &Suite, t: &mut Tracker) {
    t.tolerance = 1e-8;
    let g = PI / 3.0;
    let cell = fixtures::gamma_edge(g);
    let p = match ScalingProblem::new(&cell, 1e-12) {
        Ok(p) => p,
        Err(e) => return t.error(&e, &cell, &[]),
    };
    for i in 0..200 {
        let m = 0.01 + 0.48 * i as f64 / 199.0;
        let exact = (1.0 - m * g.cos()) / ((g.cos() - m) * m);
        match p.cal_f(&[m]) {
            Ok(v) => t.measure((v[0] - exact).abs() / exact.abs(), &cell, &[m], || {
                "relative error".into()
            }),
            Err(e) => t.error(&e, &cell, &[m]),
        }
    }
    match p.solve(&[14.0], &ScalingOpts::default()) {
        Ok(rep) => {
            let ms: Vec<f64> = rep.roots.iter().map(|r| r.m[0]).collect();
            let ok = ms.len() == 2
                && (ms[0] - 0.25).abs() <= s.cfg.tolerances.roots
                && (ms[1] - 2.0 / 7.0).abs() <= s.cfg.tolerances.roots
                && rep.roots.iter().filter(|r| r.in_omega_hat_plus).count() == 1;
            t.expect(ok, &cell, &[14.0], || format!("roots {ms:?}"));
        }
        Err(e) => t.error(&e, &cell, &[14.0]),
    }
}

/// Runs every registered check. Deterministic for a given config.
pub fn run_invariant_suite(config: &VerificationConfig) -> VerificationReport {
    let (suite, generator_failures) = Suite::new(config.clone());
    let checks: Vec<CheckResult> = REGISTRY
        .par_iter()
        .map(|spec| {
            let mut t = Tracker::new(0.0);
            (spec.run)(&suite, &mut t);
            CheckResult {
                id: spec.id,
                module: spec.module,
                description: spec.description,
                passed: !t.failed,
                cases: t.cases,
                worst: t.worst,
                tolerance: t.tolerance,
                witness: t.witness,
            }
        })
        .collect();
    let ids: Vec<&str> = checks.iter().map(|c| c.id).collect();
    let declared: Vec<&str> = DECLARED_INVARIANTS
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .collect();
    assert_eq!(
        ids, declared,
        "check registry out of sync with declared invariants"
    );
    let all_passed = generator_failures.is_empty() && checks.iter().all(|c| c.passed);
    VerificationReport {
        schema: REPORT_SCHEMA,
        config: config.clone(),
        sampling_note: format!(
            "interior statements are checked at {} equispaced points per edge",
            config.points_per_edge
        ),
        generator_failures,
        checks,
        all_passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic_and_admissible() {
        let p = RandomCellParams::default();
        for regime in REGIMES {
            for seed in 0..10 {
                let a = random_cell(seed, regime, &p).unwrap();
                let b = random_cell(seed, regime, &p).unwrap();
                assert_eq!(serialize_cell(&a), serialize_cell(&b));
                assert_eq!(classify_regime(&a), regime);
                assert!((1..=4).contains(&a.num_outputs()));
            }
        }
        assert!(random_cell(1, RegimeClass::Mixed, &p).is_err());
    }

    #[test]
    fn strongly_negative_b_is_rejected() {
        let p = RandomCellParams {
            b_override: Some(-100.0),
            max_tries: 5,
            ..RandomCellParams::default()
        };
        assert!(matches!(
            random_cell(42, RegimeClass::PermeableMinus, &p),
            Err(Error::Generator(_))
        ));
    }

    #[test]
    fn registry_matches_declared_invariants() {
        let ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        let declared: Vec<&str> = DECLARED_INVARIANTS
            .iter()
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        assert_eq!(ids, declared);
        for c in registry() {
            assert!(c.id.starts_with(c.module));
        }
    }
}
