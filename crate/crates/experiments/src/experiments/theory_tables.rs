//! Closed-form steady-state tracking EMSE of LMS and RLS over a sweep of
//! `Tr{Q}`, with optional Monte-Carlo confirmation.

use adacomb::scenario::{
    run_ensemble, FilterGraph, InputModel, LinearScenario, NoiseLevel, PlantModel, QSpec, WeightSpec,
};
use adacomb::theory::{lms_emse, optimal_params, rls_emse, OptimalParams, TrackingSpec};
use adacomb::{db, FilterState};
use serde::{Deserialize, Serialize};

use super::{ensemble, steady, Output};
use crate::config::Check;
use crate::graphs::{log_grid, GraphStack};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryTablesParams {
    pub len: usize,
    pub noise_var: f64,
    /// Per-tap input variance of the white input.
    pub input_var: f64,
    pub steps: Vec<f64>,
    /// RLS `beta = 1 - forgetting factor`.
    pub betas: Vec<f64>,
    pub trace_q_min: f64,
    pub trace_q_max: f64,
    pub points: usize,
    pub simulate: bool,
    pub horizon: usize,
    pub tail: usize,
}

impl Default for TheoryTablesParams {
    fn default() -> Self {
        TheoryTablesParams {
            len: 7,
            noise_var: 1e-2,
            input_var: 1.0 / 7.0,
            steps: vec![0.005, 0.01, 0.1],
            betas: vec![0.005, 0.01],
            trace_q_min: 1e-8,
            trace_q_max: 1e-3,
            points: 11,
            simulate: false,
            horizon: 200_000,
            tail: 20_000,
        }
    }
}

impl TheoryTablesParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("noise_var", self.noise_var);
        c.positive("input_var", self.input_var);
        for &m in &self.steps {
            c.positive("steps", m);
        }
        for &b in &self.betas {
            c.unit_open("betas", b);
        }
        if self.steps.is_empty() && self.betas.is_empty() {
            c.error("steps, betas: at least one filter is required");
        }
        c.log_range("trace_q_min", self.trace_q_min, "trace_q_max", self.trace_q_max);
        c.at_least("points", self.points, 1);
        if self.simulate {
            c.tail(self.tail, self.horizon);
        }
    }

    pub fn spec(&self, trace_q: f64) -> adacomb::Result<TrackingSpec> {
        TrackingSpec::white(self.len, self.noise_var, self.input_var, trace_q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Lms,
    Rls,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lms => "lms",
            Family::Rls => "rls",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmseRow {
    pub trace_q: f64,
    pub family: Family,
    /// Step size (LMS) or `beta` (RLS).
    pub param: f64,
    pub theory: f64,
    pub simulated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryTablesReport {
    pub rows: Vec<EmseRow>,
    pub optimal: Vec<(f64, OptimalParams)>,
}

pub fn run(p: &TheoryTablesParams, runs: usize, seed: u64) -> anyhow::Result<TheoryTablesReport> {
    let mut rows = Vec::new();
    let mut optimal = Vec::new();
    for (k, tq) in log_grid(p.trace_q_min, p.trace_q_max, p.points).into_iter().enumerate() {
        let spec = p.spec(tq)?;
        optimal.push((tq, optimal_params(&spec)?));
        let sim = if p.simulate { Some(simulate(p, tq, runs, seed.wrapping_add(k as u64))?) } else { None };
        for (i, &m) in p.steps.iter().enumerate() {
            let simulated = sim.as_ref().map(|s| s[i]);
            rows.push(EmseRow { trace_q: tq, family: Family::Lms, param: m, theory: lms_emse(m, &spec)?, simulated });
        }
        for (i, &b) in p.betas.iter().enumerate() {
            let simulated = sim.as_ref().map(|s| s[p.steps.len() + i]);
            rows.push(EmseRow { trace_q: tq, family: Family::Rls, param: b, theory: rls_emse(b, &spec)?, simulated });
        }
    }
    Ok(TheoryTablesReport { rows, optimal })
}

/// Steady EMSE of every configured filter at one `Tr{Q}`.
fn simulate(p: &TheoryTablesParams, trace_q: f64, runs: usize, seed: u64) -> anyhow::Result<Vec<f64>> {
    let sc = LinearScenario::new(
        p.len,
        InputModel::white(p.input_var)?,
        PlantModel::fixed(WeightSpec::Gaussian { norm: 1.0 })
            .with_drift(QSpec::ScaledIdentity { variance: trace_q / p.len as f64 }),
        NoiseLevel::Variance(p.noise_var),
    )?;
    let cfg = ensemble(runs, p.horizon, seed, steady::stride(p.horizon), p.tail);
    let m = run_ensemble(&cfg, |_, rng| {
        let mut g = GraphStack::new();
        for (i, &m) in p.steps.iter().enumerate() {
            g = g.with(format!("lms{i}"), FilterGraph::new(FilterState::lms(p.len, m)?));
        }
        for (i, &b) in p.betas.iter().enumerate() {
            g = g.with(format!("rls{i}"), FilterGraph::new(FilterState::rls(p.len, 1.0 - b)?));
        }
        Ok((sc.source(rng)?, g))
    })?;
    let mut out = Vec::new();
    for i in 0..p.steps.len() {
        out.push(super::steady(&m, &format!("lms{i}_emse")));
    }
    for i in 0..p.betas.len() {
        out.push(super::steady(&m, &format!("rls{i}_emse")));
    }
    Ok(out)
}

impl TheoryTablesReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut t = Table::new(["trace_q", "family", "param", "zeta_theory_db", "zeta_sim_db"]);
        for r in &self.rows {
            t.push(vec![
                r.trace_q.into(),
                r.family.name().into(),
                r.param.into(),
                db(r.theory).into(),
                r.simulated.map(db).into(),
            ]);
        }
        let mut o = Table::new(["trace_q", "mu_o", "zeta_o_lms_db", "beta_o", "zeta_o_rls_db"]);
        for (tq, op) in &self.optimal {
            o.push(vec![
                (*tq).into(),
                op.step.into(),
                db(op.zeta_lms).into(),
                op.beta.into(),
                db(op.zeta_rls).into(),
            ]);
        }
        vec![Output::new(stem, "", t), Output::new(stem, "_optimal", o)]
    }
}
