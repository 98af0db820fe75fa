//! Steady-state NSD of cvx-LMS and cvx-PN-LMS combinations of two NLMS
//! filters over a sweep of `Tr{Q}` at several SNRs.

use adacomb::scenario::{run_ensemble, InputModel, LinearScenario, NoiseLevel, PlantModel, QSpec, WeightSpec};
use adacomb::theory::{optimal_params, TrackingSpec};
use adacomb::{db, from_db, FilterState, MixerState, MixingRule};
use serde::{Deserialize, Serialize};

use super::{ensemble, Output};
use crate::config::Check;
use crate::graphs::{log_grid, TwoFilterGraph};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessParams {
    pub len: usize,
    pub input_var: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub snr_db: Vec<f64>,
    pub trace_q_min: f64,
    pub trace_q_max: f64,
    pub points: usize,
    pub cvx_lms_step: f64,
    pub cvx_pn_step: f64,
    pub eta: f64,
    pub horizon: usize,
    pub tail: usize,
}

impl Default for RobustnessParams {
    fn default() -> Self {
        RobustnessParams {
            len: 30,
            input_var: 1.0 / 30.0,
            mu1: 0.5,
            mu2: 0.01,
            snr_db: vec![5.0, 30.0],
            trace_q_min: 1e-7,
            trace_q_max: 1e-1,
            points: 9,
            cvx_lms_step: 1000.0,
            cvx_pn_step: 1.0,
            eta: adacomb::combo2::DEFAULT_ETA,
            horizon: 70_000,
            tail: 50_000,
        }
    }
}

impl RobustnessParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("input_var", self.input_var);
        c.positive("mu1", self.mu1);
        c.positive("mu2", self.mu2);
        c.nonempty("snr_db", &self.snr_db);
        for &s in &self.snr_db {
            c.finite("snr_db", s);
        }
        c.log_range("trace_q_min", self.trace_q_min, "trace_q_max", self.trace_q_max);
        c.at_least("points", self.points, 1);
        c.positive("cvx_lms_step", self.cvx_lms_step);
        c.positive("cvx_pn_step", self.cvx_pn_step);
        c.eta("eta", self.eta);
        c.tail(self.tail, self.horizon);
    }

    /// Noise variance giving the requested SNR for a unit-norm plant.
    pub fn noise_var(&self, snr_db: f64) -> f64 {
        self.input_var / from_db(snr_db)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessPoint {
    pub snr_db: f64,
    pub trace_q: f64,
    pub nsd1: f64,
    pub nsd2: f64,
    pub nsd_cvx_lms: f64,
    pub nsd_cvx_pn: f64,
    pub lambda_cvx_lms: f64,
    pub lambda_cvx_pn: f64,
}

impl RobustnessPoint {
    pub fn best_component(&self) -> f64 {
        self.nsd1.min(self.nsd2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub points: Vec<RobustnessPoint>,
}

pub fn run(p: &RobustnessParams, runs: usize, seed: u64) -> anyhow::Result<RobustnessReport> {
    let grid = log_grid(p.trace_q_min, p.trace_q_max, p.points);
    let mut points = Vec::new();
    for (i, &snr) in p.snr_db.iter().enumerate() {
        for (k, &tq) in grid.iter().enumerate() {
            let seed = seed.wrapping_add((i * grid.len() + k) as u64);
            points.push(point(p, snr, tq, runs, seed)?);
        }
    }
    Ok(RobustnessReport { points })
}

fn point(p: &RobustnessParams, snr_db: f64, trace_q: f64, runs: usize, seed: u64) -> anyhow::Result<RobustnessPoint> {
    let noise_var = p.noise_var(snr_db);
    let spec = TrackingSpec::white(p.len, noise_var, p.input_var, trace_q)?;
    let zeta_ref = optimal_params(&spec)?.zeta_lms;
    let sc = LinearScenario::new(
        p.len,
        InputModel::white(p.input_var)?,
        PlantModel::fixed(WeightSpec::Gaussian { norm: 1.0 })
            .with_drift(QSpec::ScaledIdentity { variance: trace_q / p.len as f64 }),
        NoiseLevel::Variance(noise_var),
    )?;
    let cfg = ensemble(runs, p.horizon, seed, super::steady::stride(p.horizon), p.tail);
    let m = run_ensemble(&cfg, |_, rng| {
        let g = TwoFilterGraph::new(FilterState::nlms(p.len, p.mu1)?, FilterState::nlms(p.len, p.mu2)?)
            .with_mixer("lms", MixerState::new(MixingRule::CvxLms, p.cvx_lms_step)?)
            .with_mixer("pn", MixerState::new(MixingRule::CvxPnLms, p.cvx_pn_step)?.with_eta(p.eta)?);
        Ok((sc.source(rng)?, g))
    })?;
    let nsd = |c: &str| db(super::steady(&m, c) / zeta_ref);
    Ok(RobustnessPoint {
        snr_db,
        trace_q,
        nsd1: nsd("emse1"),
        nsd2: nsd("emse2"),
        nsd_cvx_lms: nsd("emse_lms"),
        nsd_cvx_pn: nsd("emse_pn"),
        lambda_cvx_lms: super::steady(&m, "lambda_lms"),
        lambda_cvx_pn: super::steady(&m, "lambda_pn"),
    })
}

impl RobustnessReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut t = Table::new([
            "snr_db", "trace_q", "nsd1_db", "nsd2_db", "nsd_cvx_lms_db", "nsd_cvx_pn_db", "lambda_cvx_lms",
            "lambda_cvx_pn",
        ]);
        for p in &self.points {
            t.push(vec![
                p.snr_db.into(),
                p.trace_q.into(),
                p.nsd1.into(),
                p.nsd2.into(),
                p.nsd_cvx_lms.into(),
                p.nsd_cvx_pn.into(),
                p.lambda_cvx_lms.into(),
                p.lambda_cvx_pn.into(),
            ]);
        }
        vec![Output::new(stem, "", t)]
    }
}
