//! Reconvergence after an abrupt plant change with and without transfer of
//! coefficients from the fast to the slow filter.

use adacomb::scenario::{run_ensemble, InputModel, LinearScenario, NoiseLevel, PairGraph, PlantModel, WeightSpec};
use adacomb::{db, CombinedPair, FilterState, MixerState, MixingRule, TransferPolicy};
use serde::{Deserialize, Serialize};

use super::{ensemble, series_db, Output};
use crate::config::Check;
use crate::graphs::{first_crossing, GraphStack};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferParams {
    pub len: usize,
    pub input_var: f64,
    pub snr_db: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mixer_step: f64,
    pub eta: f64,
    pub change_at: usize,
    /// `copy`, `gradual` or `feedback`.
    pub policy: String,
    /// Mixing-parameter threshold `lambda_0` of the copy and gradual policies.
    pub threshold: f64,
    /// Period `N_0` of the copy and feedback policies.
    pub period: usize,
    /// Leak factor of the gradual policy.
    pub leak: f64,
    pub horizon: usize,
    pub stride: usize,
    pub tail: usize,
    /// Distance to the final level that counts as reconverged.
    pub within_db: f64,
}

impl Default for TransferParams {
    fn default() -> Self {
        TransferParams {
            len: 7,
            input_var: 1.0,
            snr_db: 20.0,
            mu1: 0.1,
            mu2: 0.01,
            mixer_step: 1.0,
            eta: adacomb::combo2::DEFAULT_ETA,
            change_at: 50_000,
            policy: "copy".into(),
            threshold: 0.982,
            period: 2,
            leak: 0.9,
            horizon: 100_000,
            stride: 100,
            tail: 10_000,
            within_db: 1.0,
        }
    }
}

impl TransferParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("input_var", self.input_var);
        c.finite("snr_db", self.snr_db);
        c.positive("mu1", self.mu1);
        c.positive("mu2", self.mu2);
        c.positive("mixer_step", self.mixer_step);
        c.eta("eta", self.eta);
        c.at_least("stride", self.stride, 1);
        c.tail(self.tail, self.horizon);
        c.positive("within_db", self.within_db);
        if self.change_at == 0 || self.change_at + self.tail >= self.horizon {
            c.error(format!("change_at: must leave the tail after the change, got {}", self.change_at));
        }
        match self.policy.as_str() {
            "copy" | "feedback" => c.at_least("period", self.period, 2),
            "gradual" => c.unit_open("leak", self.leak),
            other => c.error(format!("policy: expected copy, gradual or feedback, got \"{other}\"")),
        }
        if self.policy != "feedback" {
            c.unit_open("threshold", self.threshold);
        }
    }

    pub fn policy(&self) -> TransferPolicy {
        match self.policy.as_str() {
            "gradual" => TransferPolicy::Gradual { leak: self.leak, threshold: self.threshold },
            "feedback" => TransferPolicy::Feedback { period: self.period },
            _ => TransferPolicy::Copy { threshold: self.threshold, period: self.period },
        }
    }
}

/// Curves of one scheme in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCurves {
    pub emse1: Vec<f64>,
    pub emse2: Vec<f64>,
    pub emse: Vec<f64>,
    pub lambda: Vec<f64>,
    pub final_db: f64,
    /// Samples after the change until the combination comes within
    /// `within_db` of its final level.
    pub reconvergence: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferReport {
    pub stride: usize,
    pub plain: SchemeCurves,
    pub transfer: SchemeCurves,
}

impl TransferReport {
    /// Reconvergence time with transfer over the time without.
    pub fn ratio(&self) -> Option<f64> {
        Some(self.transfer.reconvergence? as f64 / self.plain.reconvergence? as f64)
    }
}

pub fn run(p: &TransferParams, runs: usize, seed: u64) -> anyhow::Result<TransferReport> {
    let sc = LinearScenario::new(
        p.len,
        InputModel::white(p.input_var)?,
        PlantModel::fixed(WeightSpec::Gaussian { norm: 1.0 }).with_change(p.change_at, WeightSpec::Gaussian { norm: 1.0 }),
        NoiseLevel::SnrDb(p.snr_db),
    )?;
    let cfg = ensemble(runs, p.horizon, seed, p.stride, p.tail);
    let m = run_ensemble(&cfg, |_, rng| {
        let pair = || -> adacomb::Result<_> {
            Ok(CombinedPair::new(
                FilterState::nlms(p.len, p.mu1)?,
                FilterState::nlms(p.len, p.mu2)?,
                MixerState::new(MixingRule::CvxPnLms, p.mixer_step)?.with_eta(p.eta)?,
            ))
        };
        let g = GraphStack::new()
            .with("plain", PairGraph::new(pair()?).without_msd())
            .with("transfer", PairGraph::new(pair()?.with_transfer(p.policy())?).without_msd());
        Ok((sc.source(rng)?, g))
    })?;
    let curves = |prefix: &str| {
        let emse = series_db(&m, &format!("{prefix}_emse"));
        let final_db = db(super::steady(&m, &format!("{prefix}_emse")));
        let reconvergence =
            first_crossing(&emse, m.stride, final_db + p.within_db, p.change_at).map(|n| n - p.change_at);
        SchemeCurves {
            emse1: series_db(&m, &format!("{prefix}_emse1")),
            emse2: series_db(&m, &format!("{prefix}_emse2")),
            emse,
            lambda: super::series(&m, &format!("{prefix}_lambda")),
            final_db,
            reconvergence,
        }
    };
    Ok(TransferReport { stride: m.stride, plain: curves("plain"), transfer: curves("transfer") })
}

impl TransferReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut t = Table::new([
            "n", "emse1_db", "emse2_db", "emse_comb_db", "lambda", "emse1_tr_db", "emse2_tr_db", "emse_comb_tr_db",
            "lambda_tr",
        ]);
        let (a, b) = (&self.plain, &self.transfer);
        for k in 0..a.emse.len() {
            t.push(vec![
                (k * self.stride).into(),
                a.emse1[k].into(),
                a.emse2[k].into(),
                a.emse[k].into(),
                a.lambda[k].into(),
                b.emse1[k].into(),
                b.emse2[k].into(),
                b.emse[k].into(),
                b.lambda[k].into(),
            ]);
        }
        let mut s = Table::new(["scheme", "final_emse_db", "reconvergence_n"]);
        s.push(vec!["plain".into(), a.final_db.into(), a.reconvergence.into()]);
        s.push(vec!["transfer".into(), b.final_db.into(), b.reconvergence.into()]);
        vec![Output::new(stem, "", t), Output::new(stem, "_summary", s)]
    }
}
