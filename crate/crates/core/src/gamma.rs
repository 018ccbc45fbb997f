//! The single-edge example `H = 1`, `B = −γ²`, `L = 1`, where the scaling
//! map has the closed form `𝓕(m) = (1 − m cos γ) / ((cos γ − m) m)` on
//! `(0, cos γ)`. It has a single interior minimum, so every `κ` above it has
//! two roots and every `κ` below it has none.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::scaling::{ScalingOpts, ScalingProblem};

pub fn closed_form(gamma: f64, m: f64) -> f64 {
    let c = gamma.cos();
    (1.0 - m * c) / ((c - m) * m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub m: f64,
    pub numeric: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootPair {
    pub kappa: f64,
    pub roots: Vec<f64>,
    /// `S(m) > 0` per root.
    pub positive_energy: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaExample {
    pub gamma: f64,
    pub curve: Vec<CurvePoint>,
    pub f_min: f64,
    pub m_at_min: f64,
    pub root_pairs: Vec<RootPair>,
}

impl GammaExample {
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("m,F_numeric,F_closed_form\n");
        for p in &self.curve {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                p.m, p.numeric, p.closed_form
            ));
        }
        s
    }
}

/// `κ` values sampled by default: one below the minimum and several above.
pub const DEFAULT_KAPPAS: [f64; 6] = [13.0, 14.0, 15.0, 20.0, 30.0, 50.0];

/// Samples `𝓕` on `points` interior points of `(0, cos γ)`, locates its
/// minimum and solves `𝓕(m) = κ` for each `κ`.
pub fn gamma_example(gamma: f64, points: usize, kappas: &[f64], tol: f64) -> Result<GammaExample> {
    if !(gamma > 0.0 && gamma < FRAC_PI_2) {
        return Err(Error::OutOfRange {
            what: "gamma",
            value: gamma,
            lo: 0.0,
            hi: FRAC_PI_2,
        });
    }
    if points < 3 {
        return Err(Error::InvalidInput("need at least 3 curve points".into()));
    }
    let p = ScalingProblem::new(&fixtures::gamma_edge(gamma), tol)?;
    let c = gamma.cos();
    let f = |m: f64| p.cal_f(&[m]).map(|v| v[0]);
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let m = c * (i + 1) as f64 / (points + 1) as f64;
        curve.push(CurvePoint {
            m,
            numeric: f(m)?,
            closed_form: closed_form(gamma, m),
        });
    }
    let k = (0..points)
        .min_by(|&a, &b| curve[a].numeric.total_cmp(&curve[b].numeric))
        .unwrap();
    let (mut a, mut b) = (
        curve[k.saturating_sub(1)].m,
        curve[(k + 1).min(points - 1)].m,
    );
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - r * (b - a), a + r * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-10 * (1.0 + a.abs()) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        }
    }
    let m_at_min = 0.5 * (a + b);
    let f_min = f(m_at_min)?;

    let mut root_pairs = Vec::with_capacity(kappas.len());
    for &kappa in kappas {
        let rep = p.solve(&[kappa], &ScalingOpts::default())?;
        root_pairs.push(RootPair {
            kappa,
            roots: rep.roots.iter().map(|r| r.m[0]).collect(),
            positive_energy: rep.roots.iter().map(|r| r.s > 0.0).collect(),
        });
    }
    Ok(GammaExample {
        gamma,
        curve,
        f_min,
        m_at_min,
        root_pairs,
    })
}
