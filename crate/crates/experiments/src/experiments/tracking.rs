//! LMS versus RLS tracking when `Q` moves between `R^-1` and `R`, and the
//! EMSE reachable by their combination.

use adacomb::theory::{analyze, optimal_params, q_mixture, toeplitz, Component, OptimalParams, TheoryResult, TrackingSpec};
use adacomb::db;
use serde::{Deserialize, Serialize};

use super::Output;
use crate::config::Check;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingParams {
    pub len: usize,
    pub noise_var: f64,
    /// First row of `R` is `(1/len) [1, r, r^2, ...]`.
    pub row_decay: f64,
    /// `Tr{Q}`, the same for every mixture weight.
    pub q_scale: f64,
    pub alpha_points: usize,
}

impl Default for TrackingParams {
    fn default() -> Self {
        TrackingParams { len: 7, noise_var: 1e-2, row_decay: 0.8, q_scale: 1e-5, alpha_points: 21 }
    }
}

impl TrackingParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("noise_var", self.noise_var);
        if !(self.row_decay.abs() < 1.0) {
            c.error(format!("row_decay: must satisfy |r| < 1, got {}", self.row_decay));
        }
        c.positive("q_scale", self.q_scale);
        c.at_least("alpha_points", self.alpha_points, 2);
    }

    pub fn spec(&self, alpha: f64) -> adacomb::Result<TrackingSpec> {
        let n = self.len as f64;
        let row: Vec<f64> = (0..self.len).map(|k| self.row_decay.powi(k as i32) / n).collect();
        let r = toeplitz(&row);
        let q = q_mixture(&r, alpha, self.q_scale)?;
        TrackingSpec::new(self.noise_var, r, q)
    }

    /// Optimally tuned LMS and RLS and their combination at mixture weight `alpha`.
    pub fn point(&self, alpha: f64) -> adacomb::Result<TrackingPoint> {
        let spec = self.spec(alpha)?;
        let optimal = optimal_params(&spec)?;
        let result = analyze(Component::Lms { step: optimal.step }, Component::Rls { beta: optimal.beta }, &spec)?;
        Ok(TrackingPoint { alpha, optimal, result })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingPoint {
    pub alpha: f64,
    pub optimal: OptimalParams,
    pub result: TheoryResult,
}

impl TrackingPoint {
    /// `min(zeta_lms, zeta_rls) / zeta_cvx` in dB.
    pub fn margin_db(&self) -> f64 {
        db(self.result.pair.zeta1.min(self.result.pair.zeta2)) - db(self.result.zeta_cvx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub points: Vec<TrackingPoint>,
}

pub fn run(p: &TrackingParams) -> anyhow::Result<TrackingReport> {
    let n = p.alpha_points;
    let points = (0..n).map(|k| p.point(k as f64 / (n - 1) as f64)).collect::<adacomb::Result<_>>()?;
    Ok(TrackingReport { points })
}

impl TrackingReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut t = Table::new([
            "alpha", "mu_o", "beta_o", "zeta_lms_db", "zeta_rls_db", "zeta12", "lambda_aff", "lambda_cvx",
            "zeta_aff_db", "zeta_cvx_db", "margin_db", "regime",
        ]);
        for pt in &self.points {
            let r = &pt.result;
            t.push(vec![
                pt.alpha.into(),
                pt.optimal.step.into(),
                pt.optimal.beta.into(),
                db(r.pair.zeta1).into(),
                db(r.pair.zeta2).into(),
                r.pair.zeta12.into(),
                r.lambda_aff.value().into(),
                r.lambda_cvx.value().into(),
                db(r.zeta_aff).into(),
                db(r.zeta_cvx).into(),
                pt.margin_db().into(),
                r.regime.name().into(),
            ]);
        }
        vec![Output::new(stem, "", t)]
    }
}
