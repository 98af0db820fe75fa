//! Identification of a long plant whose number of active taps changes over
//! time: convex combination of ZA-NLMS and NLMS (scheme A) and block-wise
//! shrinkage of a single NLMS filter (scheme B).

use adacomb::scenario::{
    run_ensemble, InputModel, LinearScenario, NoiseLevel, PairGraph, PlantModel, Window, WeightSpec,
};
use adacomb::sparse::{scheme_a, BlockShrink};
use adacomb::{db, FilterState, MixerState, MixingRule};
use serde::{Deserialize, Serialize};

use super::{series_db, Output};
use crate::config::Check;
use crate::graphs::GraphStack;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparseParams {
    pub len: usize,
    pub snr_db: f64,
    /// Active taps of the plant in each segment.
    pub active: Vec<usize>,
    pub segment_len: usize,
    pub mu: f64,
    pub rho: f64,
    /// Step of the scheme A mixer.
    pub mixer_step: f64,
    /// Step of the scheme B shrinkage mixers.
    pub shrink_step: f64,
    pub eta: f64,
    /// Block counts of the scheme B variants.
    pub blocks: Vec<usize>,
    pub stride: usize,
    /// Fraction of each segment, at its end, used as steady-state window.
    pub tail_fraction: f64,
}

impl Default for SparseParams {
    fn default() -> Self {
        SparseParams {
            len: 1024,
            snr_db: 20.0,
            active: vec![16, 128, 512],
            segment_len: 40_000,
            mu: 0.5,
            rho: 1e-6,
            mixer_step: 1.0,
            shrink_step: 0.02,
            eta: adacomb::combo2::DEFAULT_ETA,
            blocks: vec![128, 256],
            stride: 100,
            tail_fraction: 0.25,
        }
    }
}

impl SparseParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.finite("snr_db", self.snr_db);
        c.nonempty("active", &self.active);
        for &a in &self.active {
            if a == 0 || a > self.len {
                c.error(format!("active: must lie in 1..={}, got {a}", self.len));
            }
        }
        c.at_least("segment_len", self.segment_len, 1);
        c.positive("mu", self.mu);
        c.non_negative("rho", self.rho);
        c.positive("mixer_step", self.mixer_step);
        c.positive("shrink_step", self.shrink_step);
        c.eta("eta", self.eta);
        for &b in &self.blocks {
            if b == 0 || b > self.len {
                c.error(format!("blocks: must lie in 1..={}, got {b}", self.len));
            }
        }
        c.at_least("stride", self.stride, 1);
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            c.error(format!("tail_fraction: must lie in (0,1], got {}", self.tail_fraction));
        }
    }

    pub fn horizon(&self) -> usize {
        self.segment_len * self.active.len()
    }

    fn scenario(&self) -> adacomb::Result<LinearScenario> {
        let sparse = |active| WeightSpec::Sparse { active, norm: 1.0 };
        let mut plant = PlantModel::fixed(sparse(self.active[0]));
        for (k, &a) in self.active.iter().enumerate().skip(1) {
            plant = plant.with_change(k * self.segment_len, sparse(a));
        }
        LinearScenario::new(self.len, InputModel::white(1.0)?, plant, NoiseLevel::SnrDb(self.snr_db))
    }
}

/// MSD curves in dB and per-segment steady values in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCurve {
    pub name: String,
    pub msd: Vec<f64>,
    pub steady: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseReport {
    pub stride: usize,
    pub active: Vec<usize>,
    /// `za`, `nlms`, `scheme_a`, then `scheme_b<Q>` for each block count.
    pub curves: Vec<SparseCurve>,
}

impl SparseReport {
    pub fn curve(&self, name: &str) -> Option<&SparseCurve> {
        self.curves.iter().find(|c| c.name == name)
    }
}

pub fn run(p: &SparseParams, runs: usize, seed: u64) -> anyhow::Result<SparseReport> {
    let sc = p.scenario()?;
    let tail = ((p.segment_len as f64 * p.tail_fraction) as usize).max(1);
    let mut cfg = adacomb::scenario::EnsembleConfig::new(runs, p.horizon(), seed).with_stride(p.stride);
    for k in 0..p.active.len() {
        let end = (k + 1) * p.segment_len;
        cfg = cfg.with_window(Window::new(format!("seg{k}"), end - tail, end));
    }
    let m = run_ensemble(&cfg, |_, rng| {
        let mut a = scheme_a(p.len, p.mu, p.rho, p.mixer_step)?;
        a.mixer = MixerState::new(MixingRule::CvxPnLms, p.mixer_step)?.with_eta(p.eta)?;
        let mut g = GraphStack::new().with("a", PairGraph::new(a));
        let shrink = MixerState::new(MixingRule::CvxPnLms, p.shrink_step)?.with_eta(p.eta)?;
        for &q in &p.blocks {
            let b = BlockShrink::new(FilterState::nlms(p.len, p.mu)?, q, p.shrink_step)?.with_mixer(shrink.clone())?;
            g = g.with(format!("b{q}"), b);
        }
        Ok((sc.source(rng)?, g))
    })?;
    let curve = |name: &str, channel: &str| SparseCurve {
        name: name.to_string(),
        msd: series_db(&m, channel),
        steady: (0..p.active.len()).map(|k| db(m.mean(&format!("seg{k}"), channel).expect("window exists"))).collect(),
    };
    let mut curves = vec![curve("za", "a_msd1"), curve("nlms", "a_msd2"), curve("scheme_a", "a_msd")];
    for &q in &p.blocks {
        curves.push(curve(&format!("scheme_b{q}"), &format!("b{q}_msd")));
    }
    Ok(SparseReport { stride: m.stride, active: p.active.clone(), curves })
}

impl SparseReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut header = vec!["n".to_string()];
        header.extend(self.curves.iter().map(|c| format!("msd_{}_db", c.name)));
        let mut t = Table::new(header.clone());
        for k in 0..self.curves[0].msd.len() {
            let mut row: Vec<Cell> = vec![(k * self.stride).into()];
            row.extend(self.curves.iter().map(|c| Cell::from(c.msd[k])));
            t.push(row);
        }
        header[0] = "active".into();
        header.insert(0, "segment".into());
        let mut s = Table::new(header);
        for (k, &a) in self.active.iter().enumerate() {
            let mut row: Vec<Cell> = vec![k.into(), a.into()];
            row.extend(self.curves.iter().map(|c| Cell::from(c.steady[k])));
            s.push(row);
        }
        vec![Output::new(stem, "", t), Output::new(stem, "_steady", s)]
    }
}
