//! Steady-state NSD of two LMS filters and their optimal combinations as a
//! function of `Tr{Q}`, with cvx-PN-LMS simulations at selected points.

use adacomb::scenario::{
    run_ensemble, InputModel, LinearScenario, NoiseLevel, PlantModel, QSpec, WeightSpec,
};
use adacomb::theory::{analyze, Component, TheoryResult, TrackingSpec};
use adacomb::{db, FilterState, MixerState, MixingRule};
use serde::{Deserialize, Serialize};

use super::{ensemble, Output};
use crate::config::Check;
use crate::graphs::{log_grid, TwoFilterGraph};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyParams {
    pub len: usize,
    pub noise_var: f64,
    pub input_var: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub trace_q_min: f64,
    pub trace_q_max: f64,
    pub points: usize,
    /// Number of simulated `Tr{Q}` points; zero for theory only.
    pub sim_points: usize,
    pub sim_trace_q_min: f64,
    pub sim_trace_q_max: f64,
    /// cvx-PN-LMS step.
    pub mixer_step: f64,
    pub eta: f64,
    pub horizon: usize,
    pub tail: usize,
}

impl Default for SteadyParams {
    fn default() -> Self {
        SteadyParams {
            len: 7,
            noise_var: 1e-2,
            input_var: 1.0 / 7.0,
            mu1: 0.1,
            mu2: 0.005,
            trace_q_min: 1e-9,
            trace_q_max: 1.0,
            points: 91,
            sim_points: 7,
            sim_trace_q_min: 1e-7,
            sim_trace_q_max: 1e-2,
            mixer_step: 0.1,
            eta: adacomb::combo2::DEFAULT_ETA,
            horizon: 60_000,
            tail: 30_000,
        }
    }
}

impl SteadyParams {
    /// Nearly equal step sizes, theory only.
    pub fn affine_gain() -> Self {
        SteadyParams { mu1: 0.01, mu2: 0.010001, sim_points: 0, ..Self::default() }
    }

    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("noise_var", self.noise_var);
        c.positive("input_var", self.input_var);
        c.positive("mu1", self.mu1);
        c.positive("mu2", self.mu2);
        c.log_range("trace_q_min", self.trace_q_min, "trace_q_max", self.trace_q_max);
        c.at_least("points", self.points, 1);
        if self.sim_points > 0 {
            c.log_range("sim_trace_q_min", self.sim_trace_q_min, "sim_trace_q_max", self.sim_trace_q_max);
            c.positive("mixer_step", self.mixer_step);
            c.eta("eta", self.eta);
            c.tail(self.tail, self.horizon);
        }
    }

    pub fn spec(&self, trace_q: f64) -> adacomb::Result<TrackingSpec> {
        TrackingSpec::white(self.len, self.noise_var, self.input_var, trace_q)
    }

    pub fn theory(&self, trace_q: f64) -> adacomb::Result<TheoryResult> {
        analyze(Component::Lms { step: self.mu1 }, Component::Lms { step: self.mu2 }, &self.spec(trace_q)?)
    }
}

/// Default record stride: about 2000 records per series.
pub(crate) fn stride(horizon: usize) -> usize {
    horizon.div_ceil(2000).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub trace_q: f64,
    pub nsd1: f64,
    pub nsd2: f64,
    pub nsd_cvx: f64,
    /// Theoretical convex-combination NSD at the same point.
    pub nsd_cvx_theory: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyReport {
    pub theory: Vec<(f64, TheoryResult)>,
    pub simulated: Vec<SimPoint>,
}

pub fn run(p: &SteadyParams, runs: usize, seed: u64) -> anyhow::Result<SteadyReport> {
    let theory = log_grid(p.trace_q_min, p.trace_q_max, p.points)
        .into_iter()
        .map(|tq| Ok((tq, p.theory(tq)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut simulated = Vec::new();
    if p.sim_points > 0 {
        for (k, tq) in log_grid(p.sim_trace_q_min, p.sim_trace_q_max, p.sim_points).into_iter().enumerate() {
            simulated.push(simulate(p, tq, runs, seed.wrapping_add(k as u64))?);
        }
    }
    Ok(SteadyReport { theory, simulated })
}

fn simulate(p: &SteadyParams, trace_q: f64, runs: usize, seed: u64) -> anyhow::Result<SimPoint> {
    let th = p.theory(trace_q)?;
    let zeta_ref = th.zeta_ref.expect("reference EMSE is set for LMS pairs");
    let sc = LinearScenario::new(
        p.len,
        InputModel::white(p.input_var)?,
        PlantModel::fixed(WeightSpec::Gaussian { norm: 1.0 })
            .with_drift(QSpec::ScaledIdentity { variance: trace_q / p.len as f64 }),
        NoiseLevel::Variance(p.noise_var),
    )?;
    let cfg = ensemble(runs, p.horizon, seed, stride(p.horizon), p.tail);
    let m = run_ensemble(&cfg, |_, rng| {
        let mixer = MixerState::new(MixingRule::CvxPnLms, p.mixer_step)?.with_eta(p.eta)?;
        let g = TwoFilterGraph::new(FilterState::lms(p.len, p.mu1)?, FilterState::lms(p.len, p.mu2)?)
            .with_mixer("cvx", mixer);
        Ok((sc.source(rng)?, g))
    })?;
    let nsd = |c: &str| db(super::steady(&m, c) / zeta_ref);
    Ok(SimPoint {
        trace_q,
        nsd1: nsd("emse1"),
        nsd2: nsd("emse2"),
        nsd_cvx: nsd("emse_cvx"),
        nsd_cvx_theory: th.nsd_cvx().expect("reference set"),
        lambda: super::steady(&m, "lambda_cvx"),
    })
}

impl SteadyReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut t = Table::new([
            "trace_q", "nsd1_db", "nsd2_db", "nsd_aff_db", "nsd_cvx_db", "lambda_aff", "lambda_cvx", "regime",
        ]);
        for (tq, r) in &self.theory {
            t.push(vec![
                (*tq).into(),
                r.nsd1().into(),
                r.nsd2().into(),
                r.nsd_aff().into(),
                r.nsd_cvx().into(),
                r.lambda_aff.value().into(),
                r.lambda_cvx.value().into(),
                r.regime.name().into(),
            ]);
        }
        let mut out = vec![Output::new(stem, "", t)];
        if !self.simulated.is_empty() {
            let mut s = Table::new(["trace_q", "nsd1_db", "nsd2_db", "nsd_cvx_db", "nsd_cvx_theory_db", "lambda_mean"]);
            for p in &self.simulated {
                s.push(vec![
                    p.trace_q.into(),
                    p.nsd1.into(),
                    p.nsd2.into(),
                    p.nsd_cvx.into(),
                    p.nsd_cvx_theory.into(),
                    p.lambda.into(),
                ]);
            }
            out.push(Output::new(stem, "_sim", s));
        }
        out
    }
}
