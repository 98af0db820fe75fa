//! Convergence of affine and convex power-normalized combinations of a fast
//! and a slow NLMS filter, against the combination with the optimal mixing
//! parameter computed from the ensemble statistics.

use adacomb::scenario::{run_ensemble, EnsembleMetrics, InputModel, LinearScenario, NoiseLevel, PlantModel, WeightSpec};
use adacomb::{db, FilterState, MixerState, MixingRule};
use serde::{Deserialize, Serialize};

use super::{ensemble, series, Output};
use crate::config::Check;
use crate::graphs::{optimal_reference, settling_time, TwoFilterGraph};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceParams {
    pub len: usize,
    pub input_var: f64,
    pub snr_db: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// cvx-PN-LMS steps; the affine rule uses `mixer_step * affine_ratio`.
    pub mixer_steps: Vec<f64>,
    pub affine_ratio: f64,
    pub eta: f64,
    pub horizon: usize,
    pub stride: usize,
    pub tail: usize,
    /// Level used to compare switching delays.
    pub threshold_db: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams {
            len: 7,
            input_var: 1.0 / 7.0,
            snr_db: 20.0,
            mu1: 0.5,
            mu2: 0.01,
            mixer_steps: vec![0.25, 0.5, 1.0],
            affine_ratio: 1.0 / 800.0,
            eta: adacomb::combo2::DEFAULT_ETA,
            horizon: 20_000,
            stride: 10,
            tail: 2_000,
            threshold_db: -45.0,
        }
    }
}

impl ConvergenceParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("input_var", self.input_var);
        c.finite("snr_db", self.snr_db);
        c.positive("mu1", self.mu1);
        c.positive("mu2", self.mu2);
        c.nonempty("mixer_steps", &self.mixer_steps);
        for &m in &self.mixer_steps {
            c.positive("mixer_steps", m);
        }
        c.positive("affine_ratio", self.affine_ratio);
        c.eta("eta", self.eta);
        c.at_least("stride", self.stride, 1);
        c.tail(self.tail, self.horizon);
        c.finite("threshold_db", self.threshold_db);
    }

    pub fn scenario(&self) -> adacomb::Result<LinearScenario> {
        LinearScenario::new(
            self.len,
            InputModel::white(self.input_var)?,
            PlantModel::fixed(WeightSpec::Gaussian { norm: 1.0 }),
            NoiseLevel::SnrDb(self.snr_db),
        )
    }
}

/// Ensemble curves for one mixer step.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleCurves {
    pub mixer_step: f64,
    pub emse_cvx: Vec<f64>,
    pub emse_aff: Vec<f64>,
    pub lambda_cvx: Vec<f64>,
    pub lambda_aff: Vec<f64>,
    pub lambda_factor: Vec<f64>,
    pub steady_cvx: f64,
    pub steady_aff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub stride: usize,
    pub threshold_db: f64,
    pub emse1: Vec<f64>,
    pub emse2: Vec<f64>,
    pub emse_opt: Vec<f64>,
    pub lambda_opt: Vec<f64>,
    pub steady1: f64,
    pub steady2: f64,
    pub rules: Vec<RuleCurves>,
}

pub fn run(p: &ConvergenceParams, runs: usize, seed: u64) -> anyhow::Result<ConvergenceReport> {
    let sc = p.scenario()?;
    let cfg = ensemble(runs, p.horizon, seed, p.stride, p.tail);
    let m = run_ensemble(&cfg, |_, rng| {
        let mut g = TwoFilterGraph::new(FilterState::nlms(p.len, p.mu1)?, FilterState::nlms(p.len, p.mu2)?);
        for (k, &step) in p.mixer_steps.iter().enumerate() {
            g = g
                .with_mixer(format!("cvx{k}"), MixerState::new(MixingRule::CvxPnLms, step)?.with_eta(p.eta)?)
                .with_mixer(
                    format!("aff{k}"),
                    MixerState::new(MixingRule::AffPnLms, step * p.affine_ratio)?.with_eta(p.eta)?,
                );
        }
        Ok((sc.source(rng)?, g))
    })?;
    Ok(report(p, &m))
}

fn report(p: &ConvergenceParams, m: &EnsembleMetrics) -> ConvergenceReport {
    let (e1, e2, x) = (series(m, "emse1"), series(m, "emse2"), series(m, "cross"));
    let (lambda_opt, emse_opt) = e1.iter().zip(&e2).zip(&x).map(|((a, b), c)| optimal_reference(*a, *b, *c)).unzip();
    let rules = p
        .mixer_steps
        .iter()
        .enumerate()
        .map(|(k, &step)| RuleCurves {
            mixer_step: step,
            emse_cvx: series(m, &format!("emse_cvx{k}")),
            emse_aff: series(m, &format!("emse_aff{k}")),
            lambda_cvx: series(m, &format!("lambda_cvx{k}")),
            lambda_aff: series(m, &format!("lambda_aff{k}")),
            lambda_factor: series(m, &format!("lf_cvx{k}")),
            steady_cvx: super::steady(m, &format!("emse_cvx{k}")),
            steady_aff: super::steady(m, &format!("emse_aff{k}")),
        })
        .collect();
    ConvergenceReport {
        stride: m.stride,
        threshold_db: p.threshold_db,
        emse1: e1,
        emse2: e2,
        emse_opt,
        lambda_opt,
        steady1: super::steady(m, "emse1"),
        steady2: super::steady(m, "emse2"),
        rules,
    }
}

fn to_db(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| db(*x)).collect()
}

impl ConvergenceReport {
    /// Sample after which the curve stays below the threshold.
    pub fn settling(&self, curve: &[f64]) -> Option<usize> {
        settling_time(&to_db(curve), self.stride, self.threshold_db, 0)
    }

    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut t = Table::new([
            "mu_a", "n", "emse1_db", "emse2_db", "emse_cvx_db", "emse_aff_db", "emse_opt_db", "lambda_cvx",
            "lambda_aff", "lambda_opt", "lambda_factor",
        ]);
        for r in &self.rules {
            for k in 0..self.emse1.len() {
                t.push(vec![
                    r.mixer_step.into(),
                    (k * self.stride).into(),
                    db(self.emse1[k]).into(),
                    db(self.emse2[k]).into(),
                    db(r.emse_cvx[k]).into(),
                    db(r.emse_aff[k]).into(),
                    db(self.emse_opt[k]).into(),
                    r.lambda_cvx[k].into(),
                    r.lambda_aff[k].into(),
                    self.lambda_opt[k].into(),
                    r.lambda_factor[k].into(),
                ]);
            }
        }
        let mut s = Table::new(["mu_a", "rule", "steady_emse_db", "excess_db", "settling_n"]);
        for r in &self.rules {
            for (rule, steady, curve) in [("cvx-pn-lms", r.steady_cvx, &r.emse_cvx), ("aff-pn-lms", r.steady_aff, &r.emse_aff)] {
                s.push(vec![
                    r.mixer_step.into(),
                    rule.into(),
                    db(steady).into(),
                    (db(steady) - db(self.steady2)).into(),
                    self.settling(curve).into(),
                ]);
            }
        }
        s.push(vec![Cell::Empty, "optimal".into(), Cell::Empty, Cell::Empty, self.settling(&self.emse_opt).into()]);
        vec![Output::new(stem, "", t), Output::new(stem, "_steady", s)]
    }
}
