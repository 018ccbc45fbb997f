//! The self-reproduction system `𝓕(m) = κ` and everything derived from the
//! cell flux map along the way: Jacobian, energy `S`, the set memberships
//! `Ω ⊂ Ω̂`, `Ω̂₊`, the Robin coefficient `β`, and the critical surface
//! `S = 0`.
//!
//! All quantities are affine or rational in `m` once the `(J+1)×(J+1)` flux
//! matrix `A` is known, so the flux map is computed once per cell and shared.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::cell::ElementaryCell;
use crate::dtn::{CellSolver, DtNMatrix};
use crate::error::{Error, Result};

/// Margin applied to every strict inequality in set membership tests.
pub const MEMBERSHIP_MARGIN: f64 = 1e-10;
/// `|F₀(1, m)|` at or below this is treated as a pole of `𝓕`.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeClass {
    /// `B ≡ 0`.
    Impermeable,
    /// `B ≥ 0`, `B ≢ 0`.
    PermeablePlus,
    /// `B ≤ 0`, `B ≢ 0`.
    PermeableMinus,
    /// `B` takes both signs.
    Mixed,
}

/// Sign census of `B` over all edges, using exact polynomial extrema.
pub fn classify_regime(cell: &ElementaryCell) -> RegimeClass {
    let (mut pos, mut neg) = (false, false);
    for e in cell.edges() {
        if e.b.is_identically_zero() {
            continue;
        }
        let (lo, hi) = e.b.extrema(e.length);
        let slack = 1e-14 * lo.abs().max(hi.abs());
        pos |= hi > slack;
        neg |= lo < -slack;
    }
    match (pos, neg) {
        (false, false) => RegimeClass::Impermeable,
        (true, false) => RegimeClass::PermeablePlus,
        (false, true) => RegimeClass::PermeableMinus,
        (true, true) => RegimeClass::Mixed,
    }
}

/// Geometric factors `l_j`, `k_j` and the ratio `κ_j = k_j / l_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFactors {
    pub l: Vec<f64>,
    pub k: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl ScalingFactors {
    pub fn new(l: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        if l.len() != k.len() || l.is_empty() {
            return Err(Error::InvalidInput(format!(
                "l and k need the same non-zero length, got {} and {}",
                l.len(),
                k.len()
            )));
        }
        for (what, v) in l
            .iter()
            .map(|v| ("l_j", *v))
            .chain(k.iter().map(|v| ("k_j", *v)))
        {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        let kappa = k.iter().zip(&l).map(|(k, l)| k / l).collect();
        Ok(Self { l, k, kappa })
    }

    pub fn num_outputs(&self) -> usize {
        self.l.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub omega: bool,
    pub omega_hat: bool,
    pub omega_hat_plus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSolution {
    pub m: Vec<f64>,
    pub beta: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub residual: f64,
    #[serde(rename = "in_Omega")]
    pub in_omega: bool,
    #[serde(rename = "in_OmegaHat")]
    pub in_omega_hat: bool,
    #[serde(rename = "in_OmegaHatPlus")]
    pub in_omega_hat_plus: bool,
    pub ttf1s_ok: bool,
}

impl ScalingSolution {
    pub fn membership(&self) -> Membership {
        Membership {
            omega: self.in_omega,
            omega_hat: self.in_omega_hat,
            omega_hat_plus: self.in_omega_hat_plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfeasibleReason {
    KappaNotInXi,
    RegimeMixed,
    Nonconvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub roots: Vec<ScalingSolution>,
    pub regime: RegimeClass,
    pub feasible: bool,
    pub reason: Option<InfeasibleReason>,
    /// Smallest residual reached when nothing converged.
    pub best_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingOpts {
    pub tol: f64,
    pub max_iters: usize,
    pub dedup: f64,
    pub continuation_steps: usize,
    /// Also run the multistart grid in regimes where one root is expected,
    /// so that uniqueness is tested rather than assumed.
    pub exhaustive: bool,
}

impl Default for ScalingOpts {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 100,
            dedup: 1e-8,
            continuation_steps: 12,
            exhaustive: false,
        }
    }
}

/// Flux map of one cell plus its regime. Cheap to clone and share.
#[derive(Debug, Clone)]
pub struct ScalingProblem {
    dtn: DtNMatrix,
    regime: RegimeClass,
}

impl ScalingProblem {
    pub fn new(cell: &ElementaryCell, tol: f64) -> Result<Self> {
        let dtn = CellSolver::new(cell, tol)?.flux_map()?;
        Ok(Self::from_dtn(dtn, classify_regime(cell)))
    }

    pub fn from_dtn(dtn: DtNMatrix, regime: RegimeClass) -> Self {
        Self { dtn, regime }
    }

    pub fn dtn(&self) -> &DtNMatrix {
        &self.dtn
    }

    pub fn regime(&self) -> RegimeClass {
        self.regime
    }

    pub fn num_outputs(&self) -> usize {
        self.dtn.num_outputs()
    }

    /// `(F₀, …, F_J)(1, m)`.
    pub fn fluxes(&self, m: &[f64]) -> Vec<f64> {
        self.dtn.fluxes(1.0, m)
    }

    fn check_dim(&self, m: &[f64]) -> Result<()> {
        if m.len() != self.num_outputs() || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "m must hold {} finite values",
                self.num_outputs()
            )));
        }
        Ok(())
    }

    fn check_domain(&self, m: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(m)?;
        if let Some(v) = m.iter().find(|&&v| v <= 0.0) {
            return Err(Error::InvalidInput(format!("m_j = {v} must be positive")));
        }
        let f = self.fluxes(m);
        if f[0].abs() <= POLE_TOL {
            return Err(Error::InvalidInput(format!(
                "F0(1, m) = {:e} vanishes: pole of the scaling map",
                f[0]
            )));
        }
        Ok(f)
    }

    /// `𝓕_j(m) = F_j(1, m) / (F₀(1, m) m_j)`.
    pub fn cal_f(&self, m: &[f64]) -> Result<Vec<f64>> {
        let f = self.check_domain(m)?;
        Ok(cal_f_from(&f, m))
    }

    pub fn jacobian(&self, m: &[f64]) -> Result<DMatrix<f64>> {
        let f = self.check_domain(m)?;
        let cf = cal_f_from(&f, m);
        let a = &self.dtn.a;
        let j = m.len();
        Ok(DMatrix::from_fn(j, j, |r, i| {
            let delta = if r == i { 1.0 } else { 0.0 };
            (a[(r + 1, i + 1)] - cf[r] * a[(0, i + 1)] * m[r] - cf[r] * f[0] * delta)
                / (f[0] * m[r])
        }))
    }

    /// `S(m) = F₀(1, m) − Σ_j F_j(1, m) m_j`.
    pub fn energy(&self, m: &[f64]) -> f64 {
        let f = self.fluxes(m);
        f[0] - f[1..].iter().zip(m).map(|(f, m)| f * m).sum::<f64>()
    }

    pub fn membership(&self, m: &[f64]) -> Membership {
        let f = self.fluxes(m);
        let box_ok = m
            .iter()
            .all(|&v| v > MEMBERSHIP_MARGIN && v < 1.0 - MEMBERSHIP_MARGIN);
        let f0_ok = f[0] > MEMBERSHIP_MARGIN;
        let omega = box_ok && f0_ok && f[1..].iter().all(|&v| v > MEMBERSHIP_MARGIN);
        let omega_hat = box_ok && f0_ok && f[1..].iter().all(|&v| v >= -MEMBERSHIP_MARGIN);
        Membership {
            omega,
            omega_hat,
            omega_hat_plus: omega_hat && self.energy(m) > MEMBERSHIP_MARGIN,
        }
    }

    /// Positivity of `q(H) = −Σ F_j(0, H) H_j + Σ F_j(1, m) H_j² / m_j` on
    /// `{H : F₀(0, H) = 0}`.
    pub fn check_ttf1s(&self, m: &[f64]) -> Result<bool> {
        self.check_dim(m)?;
        let j = m.len();
        if j == 1 {
            return Ok(true);
        }
        let a = &self.dtn.a;
        let f = self.fluxes(m);
        let mut q = DMatrix::from_fn(j, j, |r, c| {
            let diag = if r == c { f[r + 1] / m[r] } else { 0.0 };
            -a[(r + 1, c + 1)] + diag
        });
        q = (&q + q.transpose()) * 0.5;

        let row = DVector::from_fn(j, |i, _| a[(0, i + 1)]);
        let norm = row.norm();
        if !(norm > POLE_TOL) {
            return Err(Error::InvalidInput(
                "F0(0, .) vanishes identically; the constraint subspace is undefined".into(),
            ));
        }
        let basis = complement_basis(&(row / norm));
        let restricted = basis.transpose() * &q * &basis;
        let eig = SymmetricEigen::new(restricted);
        let min = eig.eigenvalues.min();
        Ok(min > 1e-12 * q.norm())
    }

    /// The interval of `t > 0` with `t·d` inside `Ω̂`, or `None` if the ray
    /// misses it (exact: every constraint is affine in `t`). It starts at
    /// `0` unless `F₀(1, 0) ≤ 0`.
    pub fn omega_hat_interval(&self, d: &[f64]) -> Option<(f64, f64)> {
        let a = &self.dtn.a;
        let mut hi = d
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|v| 1.0 / v)
            .fold(f64::INFINITY, f64::min);
        let mut lo = 0.0f64;
        for r in 0..a.nrows() {
            let c = a[(r, 0)];
            let s: f64 = d.iter().enumerate().map(|(i, di)| a[(r, i + 1)] * di).sum();
            // c + t s > 0
            if s > 0.0 {
                lo = lo.max(-c / s);
            } else if s < 0.0 {
                hi = hi.min(-c / s);
            } else if c <= 0.0 {
                return None;
            }
        }
        (lo < hi).then_some((lo, hi))
    }

    /// Largest `t` with `[0, t)·d` inside `Ω̂`; `0` when the ray does not
    /// start inside.
    pub fn omega_hat_extent(&self, d: &[f64]) -> f64 {
        match self.omega_hat_interval(d) {
            Some((lo, hi)) if lo <= 0.0 => hi,
            _ => 0.0,
        }
    }

    /// The point `t*` on the ray `t·d` (with `d` normalised) where `S`
    /// crosses zero inside `Ω̂`, if any.
    pub fn critical_surface_ray(&self, direction: &[f64]) -> Result<Option<f64>> {
        if self.regime != RegimeClass::PermeableMinus {
            return Err(Error::Regime(format!(
                "critical surface needs B <= 0, cell is {:?}",
                self.regime
            )));
        }
        self.check_dim(direction)?;
        if direction.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput(
                "direction must be strictly positive".into(),
            ));
        }
        if !(self.dtn.a[(0, 0)] > 0.0) {
            return Err(Error::Regime(format!(
                "F0(1, 0) = {} is not positive",
                self.dtn.a[(0, 0)]
            )));
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d: Vec<f64> = direction.iter().map(|v| v / norm).collect();
        let at = |t: f64| {
            let m: Vec<f64> = d.iter().map(|v| v * t).collect();
            self.energy(&m)
        };
        let t_end = self.omega_hat_extent(&d);
        let mut hi = t_end * (1.0 - 1e-13);
        if !(at(hi) < 0.0) {
            return Ok(None);
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let s = at(mid);
            if s.abs() <= 1e-10 * 1e-3 || hi - lo <= 1e-16 * t_end {
                return Ok(Some(mid));
            }
            if s > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if at(t).abs() <= 1e-10 {
            Ok(Some(t))
        } else {
            Err(Error::Postcondition(format!(
                "bisection stalled with |S| = {:e}",
                at(t).abs()
            )))
        }
    }

    /// Packages `m` with all derived quantities.
    pub fn solution_at(&self, m: &[f64], kappa: &[f64]) -> Result<ScalingSolution> {
        let cf = self.cal_f(m)?;
        let residual = cf
            .iter()
            .zip(kappa)
            .map(|(f, k)| (f - k).abs())
            .fold(0.0, f64::max);
        let mem = self.membership(m);
        Ok(ScalingSolution {
            m: m.to_vec(),
            beta: self.fluxes(m)[0],
            s: self.energy(m),
            residual,
            in_omega: mem.omega,
            in_omega_hat: mem.omega_hat,
            in_omega_hat_plus: mem.omega_hat_plus,
            ttf1s_ok: self.check_ttf1s(m).unwrap_or(false),
        })
    }

    /// All roots of `𝓕(m) = κ` that the regime-specific strategy finds.
    pub fn solve(&self, kappa: &[f64], opts: &ScalingOpts) -> Result<ScalingReport> {
        self.check_dim(kappa)?;
        if let Some(k) = kappa.iter().find(|&&k| !(k > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "kappa_j = {k} must be positive"
            )));
        }
        let report = |roots: Vec<ScalingSolution>, reason, best| ScalingReport {
            feasible: !roots.is_empty(),
            roots,
            regime: self.regime,
            reason,
            best_residual: best,
        };
        let mut found: Vec<Vec<f64>> = Vec::new();
        match self.regime {
            RegimeClass::Mixed => {
                return Ok(report(vec![], Some(InfeasibleReason::RegimeMixed), None))
            }
            RegimeClass::Impermeable if kappa.iter().sum::<f64>() <= 1.0 => {
                return Ok(report(vec![], Some(InfeasibleReason::KappaNotInXi), None))
            }
            RegimeClass::Impermeable | RegimeClass::PermeablePlus => {
                let anchor = self.anchor(self.regime);
                found.extend(self.continuation(&anchor, kappa, opts));
                if opts.exhaustive {
                    for start in self.multistart_grid() {
                        found.extend(self.newton(&start, kappa, opts));
                    }
                }
            }
            RegimeClass::PermeableMinus => {
                for start in self.multistart_grid() {
                    found.extend(self.continuation(&start, kappa, opts));
                    found.extend(self.newton(&start, kappa, opts));
                }
            }
        }
        if found.is_empty() {
            found.extend(self.fixed_point(&self.anchor(self.regime), kappa, opts));
        }
        let mut roots: Vec<ScalingSolution> = found
            .iter()
            .filter_map(|m| self.solution_at(m, kappa).ok())
            .filter(|s| s.residual <= opts.tol)
            .collect();
        roots.sort_by(|a, b| a.m.partial_cmp(&b.m).unwrap_or(std::cmp::Ordering::Equal));
        let mut unique: Vec<ScalingSolution> = Vec::new();
        for r in roots {
            match unique
                .iter_mut()
                .find(|u| max_dist(&u.m, &r.m) <= opts.dedup)
            {
                Some(u) if r.residual < u.residual => *u = r,
                Some(_) => {}
                None => unique.push(r),
            }
        }
        if unique.is_empty() {
            let best = self.best_residual(kappa);
            return Ok(report(
                vec![],
                Some(InfeasibleReason::Nonconvergence),
                Some(best),
            ));
        }
        Ok(report(unique, None, None))
    }

    fn best_residual(&self, kappa: &[f64]) -> f64 {
        self.multistart_grid()
            .iter()
            .chain(std::iter::once(&self.anchor(self.regime)))
            .filter_map(|m| self.residual(m, kappa))
            .fold(f64::INFINITY, f64::min)
    }

    fn residual(&self, m: &[f64], kappa: &[f64]) -> Option<f64> {
        let cf = self.cal_f(m).ok()?;
        Some(
            cf.iter()
                .zip(kappa)
                .map(|(f, k)| (f - k).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Homotopy start inside `Ω`: `½·1` for `B = 0` and `B ≤ 0`,
    /// `½·Q(W_j)` for `B ≥ 0`, pulled toward the origin until inside.
    fn anchor(&self, regime: RegimeClass) -> Vec<f64> {
        let j = self.num_outputs();
        let mut m = vec![0.5; j];
        if regime == RegimeClass::PermeablePlus {
            if let Some(q) = self.q_outputs() {
                m = q.iter().map(|v| 0.5 * v).collect();
            }
        }
        for _ in 0..60 {
            if self.membership(&m).omega {
                break;
            }
            m.iter_mut().for_each(|v| *v *= 0.5);
        }
        m
    }

    /// `Q(W_j)` from the flux map: `F_j(1, Q) = 0` for `j ≥ 1`.
    fn q_outputs(&self) -> Option<Vec<f64>> {
        let a = &self.dtn.a;
        let j = self.num_outputs();
        let block = a.view((1, 1), (j, j)).clone_owned();
        let rhs = DVector::from_fn(j, |r, _| -a[(r + 1, 0)]);
        block.lu().solve(&rhs).map(|v| v.iter().copied().collect())
    }

    /// Log-spaced tensor grid inside `Ω̂`, `5^min(J,3)` candidates.
    fn multistart_grid(&self) -> Vec<Vec<f64>> {
        const EPS: f64 = 1e-3;
        let j = self.num_outputs();
        let diag = vec![1.0; j];
        let t_max = self
            .omega_hat_interval(&diag)
            .map_or(0.0, |(_, hi)| hi)
            .min(1.0);
        let hi = (1.0 - EPS) * t_max;
        if !(hi > EPS) {
            return vec![];
        }
        let levels: Vec<f64> = (0..5)
            .map(|i| EPS * (hi / EPS).powf(i as f64 / 4.0))
            .collect();
        let dims = j.min(3);
        let count = 5usize.pow(dims as u32);
        (0..count)
            .map(|idx| {
                (0..j)
                    .map(|c| levels[(idx / 5usize.pow((c % dims) as u32)) % 5])
                    .collect::<Vec<f64>>()
            })
            .filter(|m| self.membership(m).omega_hat)
            .collect()
    }

    /// Linear continuation in `κ` from `𝓕(start)` to the target.
    fn continuation(&self, start: &[f64], kappa: &[f64], opts: &ScalingOpts) -> Option<Vec<f64>> {
        let k0 = self.cal_f(start).ok()?;
        let steps = opts.continuation_steps.max(1);
        let mut m = start.to_vec();
        let mut prev = k0.clone();
        for s in 1..=steps {
            let t = s as f64 / steps as f64;
            let target: Vec<f64> = k0.iter().zip(kappa).map(|(a, b)| a + t * (b - a)).collect();
            m = self.track(&m, &prev, &target, opts, 4)?;
            prev = target;
        }
        Some(m)
    }

    /// One continuation step with tangent predictor; splits the step when
    /// the corrector fails.
    fn track(
        &self,
        m: &[f64],
        from: &[f64],
        to: &[f64],
        opts: &ScalingOpts,
        depth: usize,
    ) -> Option<Vec<f64>> {
        let predicted = self
            .jacobian(m)
            .ok()
            .and_then(|jac| {
                let dk = DVector::from_fn(m.len(), |i, _| to[i] - from[i]);
                jac.lu().solve(&dk)
            })
            .map(|dm| {
                m.iter()
                    .zip(dm.iter())
                    .map(|(a, b)| a + b)
                    .collect::<Vec<f64>>()
            })
            .filter(|p| self.admissible(p))
            .unwrap_or_else(|| m.to_vec());
        if let Some(r) = self
            .newton(&predicted, to, opts)
            .or_else(|| self.newton(m, to, opts))
        {
            return Some(r);
        }
        if depth == 0 {
            return None;
        }
        let mid: Vec<f64> = from.iter().zip(to).map(|(a, b)| 0.5 * (a + b)).collect();
        let half = self.track(m, from, &mid, opts, depth - 1)?;
        self.track(&half, &mid, to, opts, depth - 1)
    }

    /// Where `𝓕` is defined and Newton may step.
    fn admissible(&self, m: &[f64]) -> bool {
        m.iter().all(|&v| v > 0.0) && self.fluxes(m)[0] > POLE_TOL
    }

    /// Damped Newton on `𝓕(m) − κ` with backtracking.
    fn newton(&self, start: &[f64], kappa: &[f64], opts: &ScalingOpts) -> Option<Vec<f64>> {
        if !self.admissible(start) {
            return None;
        }
        let mut m = start.to_vec();
        let mut res = self.residual(&m, kappa)?;
        for _ in 0..opts.max_iters {
            if res <= opts.tol {
                return Some(m);
            }
            let cf = self.cal_f(&m).ok()?;
            let rhs = DVector::from_fn(m.len(), |i, _| kappa[i] - cf[i]);
            let step = self.jacobian(&m).ok()?.lu().solve(&rhs)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda >= 1.0 / 1024.0 {
                let trial: Vec<f64> = m
                    .iter()
                    .zip(step.iter())
                    .map(|(a, b)| a + lambda * b)
                    .collect();
                if self.admissible(&trial) {
                    if let Some(r) = self.residual(&trial, kappa) {
                        if r < res {
                            m = trial;
                            res = r;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (res <= opts.tol).then_some(m)
    }

    /// `m_j ← F_j(1, m) / (κ_j F₀(1, m))`.
    fn fixed_point(&self, start: &[f64], kappa: &[f64], opts: &ScalingOpts) -> Option<Vec<f64>> {
        let mut m = start.to_vec();
        for _ in 0..opts.max_iters * 10 {
            if !self.admissible(&m) {
                return None;
            }
            if self.residual(&m, kappa)? <= opts.tol {
                return Some(m);
            }
            let f = self.fluxes(&m);
            m = (0..m.len()).map(|j| f[j + 1] / (kappa[j] * f[0])).collect();
        }
        (self.residual(&m, kappa)? <= opts.tol).then_some(m)
    }
}

fn cal_f_from(f: &[f64], m: &[f64]) -> Vec<f64> {
    m.iter()
        .enumerate()
        .map(|(j, mj)| f[j + 1] / (f[0] * mj))
        .collect()
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Orthonormal basis (as columns) of the complement of the unit vector `v`,
/// from the Householder reflection mapping `e₁` to `v`.
fn complement_basis(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = v.clone();
    u[0] += sign;
    let un = u.norm_squared();
    let p = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / un);
    p.columns(1, n - 1).clone_owned()
}

pub fn cal_f(cell: &ElementaryCell, m: &[f64], tol: f64) -> Result<Vec<f64>> {
    ScalingProblem::new(cell, tol)?.cal_f(m)
}

pub fn jacobian_cal_f(cell: &ElementaryCell, m: &[f64], tol: f64) -> Result<DMatrix<f64>> {
    ScalingProblem::new(cell, tol)?.jacobian(m)
}

pub fn energy_s(cell: &ElementaryCell, m: &[f64], tol: f64) -> Result<f64> {
    Ok(ScalingProblem::new(cell, tol)?.energy(m))
}

pub fn check_ttf1s(cell: &ElementaryCell, m: &[f64], tol: f64) -> Result<bool> {
    ScalingProblem::new(cell, tol)?.check_ttf1s(m)
}

pub fn solve_scaling(
    cell: &ElementaryCell,
    factors: &ScalingFactors,
    opts: &ScalingOpts,
) -> Result<ScalingReport> {
    ScalingProblem::new(cell, crate::edge_ode::DEFAULT_TOL)?.solve(&factors.kappa, opts)
}

/// `β(m) = F₀(1, m)`: the Robin coefficient in `F₀(w) = β w(W₀)` at the
/// attachment point of a self-reproducing solution.
pub fn robin_beta(solution: &ScalingSolution) -> f64 {
    solution.beta
}

pub fn critical_surface_ray(
    cell: &ElementaryCell,
    direction: &[f64],
    tol: f64,
) -> Result<Option<f64>> {
    ScalingProblem::new(cell, tol)?.critical_surface_ray(direction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{CoefficientSpec, Edge};
    use crate::fixtures;
    use std::f64::consts::PI;

    fn gamma() -> ScalingProblem {
        ScalingProblem::new(&fixtures::gamma_edge(PI / 3.0), 1e-12).unwrap()
    }

    #[test]
    fn regimes() {
        assert_eq!(
            classify_regime(&fixtures::y_cell(0.0)),
            RegimeClass::Impermeable
        );
        assert_eq!(
            classify_regime(&fixtures::y_cell(0.1)),
            RegimeClass::PermeablePlus
        );
        assert_eq!(
            classify_regime(&fixtures::gamma_edge(PI / 3.0)),
            RegimeClass::PermeableMinus
        );
        let y = fixtures::y_cell(0.1);
        let mixed = y.map_edges(|e| {
            let mut e = e.clone();
            if e.id == "e2" {
                e.b = CoefficientSpec::constant(-0.1);
            }
            e
        });
        assert_eq!(classify_regime(&mixed), RegimeClass::Mixed);
        // a sign-changing polynomial is mixed on its own
        let e = Edge::new(
            "e",
            "a",
            "b",
            1.0,
            CoefficientSpec::constant(1.0),
            CoefficientSpec::polynomial(vec![-0.1, 0.2]),
        );
        let c = fixtures::single_edge(1.0, 0.0, 1.0).map_edges(|_| e.clone());
        assert_eq!(classify_regime(&c), RegimeClass::Mixed);
    }

    #[test]
    fn cal_f_values() {
        let p = ScalingProblem::new(&fixtures::single_edge(1.0, 0.0, 1.0), 1e-10).unwrap();
        assert!((p.cal_f(&[0.5]).unwrap()[0] - 2.0).abs() < 1e-12);
        assert!((p.jacobian(&[0.5]).unwrap()[(0, 0)] + 4.0).abs() < 1e-10);
        assert!((p.energy(&[0.5]) - 0.25).abs() < 1e-12);
        assert!(p.cal_f(&[0.0]).is_err());
        assert!(p.cal_f(&[1.0]).is_err());

        let y = ScalingProblem::new(&fixtures::y_cell(0.0), 1e-10).unwrap();
        for v in y.cal_f(&[0.5, 0.5]).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let g = gamma();
        assert!((g.cal_f(&[0.25]).unwrap()[0] - 14.0).abs() < 1e-9);
        assert!((g.jacobian(&[0.25]).unwrap()[(0, 0)] + 8.0).abs() < 1e-8);
        assert!(g.energy(&[0.25]) > 0.0);
        assert!(g.energy(&[2.0 / 7.0]) < 0.0);
    }

    #[test]
    fn ttf1s_on_fixtures() {
        assert!(gamma().check_ttf1s(&[0.25]).unwrap());
        let y = ScalingProblem::new(&fixtures::y_cell(0.0), 1e-10).unwrap();
        assert!(y.check_ttf1s(&[0.3, 0.6]).unwrap());
        let yp = ScalingProblem::new(&fixtures::y_cell(0.3), 1e-10).unwrap();
        assert!(yp.check_ttf1s(&[0.2, 0.4]).unwrap());
    }

    #[test]
    fn impermeable_roots() {
        let p = ScalingProblem::new(&fixtures::single_edge(1.0, 0.0, 1.0), 1e-10).unwrap();
        let r = p.solve(&[2.0], &ScalingOpts::default()).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].m[0] - 0.5).abs() < 1e-9);
        assert!((robin_beta(&r.roots[0]) - 0.5).abs() < 1e-9);

        let y = ScalingProblem::new(&fixtures::y_cell(0.0), 1e-10).unwrap();
        let r = y.solve(&[1.0, 1.0], &ScalingOpts::default()).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!(r.roots[0].m.iter().all(|m| (m - 0.5).abs() < 1e-9));
        assert!((r.roots[0].beta - 1.0 / 3.0).abs() < 1e-9);
        assert!(r.roots[0].in_omega);

        let r = y.solve(&[0.495, 0.495], &ScalingOpts::default()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.reason, Some(InfeasibleReason::KappaNotInXi));
        let r = y.solve(&[0.505, 0.505], &ScalingOpts::default()).unwrap();
        assert_eq!(r.roots.len(), 1);
    }

    #[test]
    fn permeable_plus_root_for_small_kappa() {
        let p = ScalingProblem::new(&fixtures::y_cell(0.2), 1e-10).unwrap();
        let r = p.solve(&[0.2, 0.3], &ScalingOpts::default()).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!(r.roots[0].in_omega);
    }

    #[test]
    fn gamma_two_roots() {
        let r = gamma().solve(&[14.0], &ScalingOpts::default()).unwrap();
        let ms: Vec<f64> = r.roots.iter().map(|s| s.m[0]).collect();
        assert_eq!(ms.len(), 2, "{ms:?}");
        assert!((ms[0] - 0.25).abs() < 1e-8);
        assert!((ms[1] - 2.0 / 7.0).abs() < 1e-8);
        assert!(r.roots[0].in_omega_hat_plus && !r.roots[1].in_omega_hat_plus);
        assert!((r.roots[0].beta - 0.302_299_894_039_036).abs() < 1e-9);
    }

    #[test]
    fn gamma_below_fold_is_nonconvergent() {
        let r = gamma().solve(&[13.0], &ScalingOpts::default()).unwrap();
        assert!(r.roots.is_empty());
        assert_eq!(r.reason, Some(InfeasibleReason::Nonconvergence));
    }

    #[test]
    fn critical_ray_on_gamma_edge() {
        let t = gamma().critical_surface_ray(&[1.0]).unwrap().unwrap();
        assert!((t - (2.0 - 3f64.sqrt())).abs() < 1e-9, "{t}");
        let y = ScalingProblem::new(&fixtures::y_cell(0.0), 1e-10).unwrap();
        assert!(matches!(
            y.critical_surface_ray(&[1.0, 1.0]),
            Err(Error::Regime(_))
        ));
        assert!(gamma().critical_surface_ray(&[0.0]).is_err());
    }

    #[test]
    fn admissible_interval_off_the_origin() {
        // Strong absorption: F₀(1, 0) < 0, so Ω̂ is bounded away from 0.
        let p = ScalingProblem::new(&fixtures::y_cell(-1.0), 1e-10).unwrap();
        assert!(p.dtn().a[(0, 0)] < 0.0);
        let d = [1.0, 1.0];
        assert_eq!(p.omega_hat_extent(&d), 0.0);
        if let Some((lo, hi)) = p.omega_hat_interval(&d) {
            assert!(lo > 0.0 && lo < hi);
            let mid = [0.5 * (lo + hi); 2];
            assert!(p.membership(&mid).omega_hat);
            let below = [0.5 * lo; 2];
            assert!(!p.membership(&below).omega_hat);
        }
        let q = ScalingProblem::new(&fixtures::y_cell(0.0), 1e-10).unwrap();
        let (lo, hi) = q.omega_hat_interval(&d).unwrap();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, q.omega_hat_extent(&d));
    }

    #[test]
    fn factors() {
        let f = ScalingFactors::new(vec![0.4], vec![0.8]).unwrap();
        assert!((f.kappa[0] - 2.0).abs() < 1e-15);
        assert!(ScalingFactors::new(vec![0.5], vec![1.0]).is_err());
        assert!(ScalingFactors::new(vec![0.5, 0.5], vec![0.5]).is_err());
    }
}
