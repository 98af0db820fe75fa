//! Difference-filter combination with the difference coefficients held on a
//! reduced fixed-point grid.

use adacomb::lowcost::{DiffCombo, Precision, Quantizer};
use adacomb::scenario::run_ensemble;
use adacomb::{db, MixerState, MixingRule};
use serde::{Deserialize, Serialize};

use super::{ensemble, series_db, Output};
use crate::config::Check;
use crate::graphs::GraphStack;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowcostParams {
    pub len: usize,
    pub input_var: f64,
    pub snr_db: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mixer_step: f64,
    pub eta: f64,
    /// Normalize both updates (NLMS components).
    pub normalized: bool,
    /// Fractional bits of each reduced-precision variant.
    pub bits: Vec<u32>,
    /// Saturation level of the difference coefficients.
    pub range: f64,
    pub horizon: usize,
    pub stride: usize,
    pub tail: usize,
}

impl Default for LowcostParams {
    fn default() -> Self {
        LowcostParams {
            len: 7,
            input_var: 1.0 / 7.0,
            snr_db: 20.0,
            mu1: 0.5,
            mu2: 0.01,
            mixer_step: 0.5,
            eta: adacomb::combo2::DEFAULT_ETA,
            normalized: true,
            bits: vec![8, 10, 12, 16, 20, 26],
            range: 1.0,
            horizon: 20_000,
            stride: 10,
            tail: 4_000,
        }
    }
}

impl LowcostParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("len", self.len, 1);
        c.positive("input_var", self.input_var);
        c.finite("snr_db", self.snr_db);
        c.positive("mu1", self.mu1);
        c.positive("mu2", self.mu2);
        c.positive("mixer_step", self.mixer_step);
        c.eta("eta", self.eta);
        for &b in &self.bits {
            if !(1..=60).contains(&b) {
                c.error(format!("bits: must lie in 1..=60, got {b}"));
            }
        }
        c.positive("range", self.range);
        c.at_least("stride", self.stride, 1);
        c.tail(self.tail, self.horizon);
    }

    pub fn combo(&self, precision: Precision) -> adacomb::Result<DiffCombo> {
        let mixer = MixerState::new(MixingRule::CvxPnLms, self.mixer_step)?.with_eta(self.eta)?;
        let c = DiffCombo::new(self.len, self.mu1, self.mu2, mixer)?;
        let c = if self.normalized { c.normalized(adacomb::filters::DEFAULT_NLMS_EPS)? } else { c };
        Ok(c.with_precision(precision))
    }

    /// Same data as the convergence experiment.
    fn scenario(&self) -> adacomb::Result<adacomb::scenario::LinearScenario> {
        super::convergence::ConvergenceParams {
            len: self.len,
            input_var: self.input_var,
            snr_db: self.snr_db,
            ..Default::default()
        }
        .scenario()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    /// `None` for full precision.
    pub bits: Option<u32>,
    pub emse: Vec<f64>,
    pub steady_db: f64,
    /// Mean saturation count per run at the end of the horizon.
    pub saturations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowcostReport {
    pub stride: usize,
    pub variants: Vec<Variant>,
    pub full_width: usize,
    pub reduced_width: usize,
}

impl LowcostReport {
    pub fn full(&self) -> &Variant {
        &self.variants[0]
    }

    pub fn degradation_db(&self, bits: u32) -> Option<f64> {
        let v = self.variants.iter().find(|v| v.bits == Some(bits))?;
        Some(v.steady_db - self.full().steady_db)
    }
}

pub fn run(p: &LowcostParams, runs: usize, seed: u64) -> anyhow::Result<LowcostReport> {
    let sc = p.scenario()?;
    let cfg = ensemble(runs, p.horizon, seed, p.stride, p.tail);
    let m = run_ensemble(&cfg, |_, rng| {
        let mut g = GraphStack::new().with("full", p.combo(Precision::Full)?);
        for &b in &p.bits {
            g = g.with(format!("b{b}"), p.combo(Precision::Reduced(Quantizer::new(b, p.range)?))?);
        }
        Ok((sc.source(rng)?, g))
    })?;
    let variant = |bits: Option<u32>| {
        let prefix = bits.map_or("full".to_string(), |b| format!("b{b}"));
        let sat = super::series(&m, &format!("{prefix}_saturations"));
        Variant {
            bits,
            emse: series_db(&m, &format!("{prefix}_emse")),
            steady_db: db(super::steady(&m, &format!("{prefix}_emse"))),
            saturations: sat.last().copied().unwrap_or(0.0),
        }
    };
    let mut variants = vec![variant(None)];
    variants.extend(p.bits.iter().map(|&b| variant(Some(b))));
    let cost = p.combo(Precision::Full)?.cost();
    Ok(LowcostReport { stride: m.stride, variants, full_width: cost.full_width, reduced_width: cost.reduced_width })
}

impl LowcostReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut header = vec!["n".to_string()];
        header.extend(self.variants.iter().map(|v| match v.bits {
            None => "emse_full_db".to_string(),
            Some(b) => format!("emse_b{b}_db"),
        }));
        let mut t = Table::new(header);
        for k in 0..self.full().emse.len() {
            let mut row: Vec<Cell> = vec![(k * self.stride).into()];
            row.extend(self.variants.iter().map(|v| Cell::from(v.emse[k])));
            t.push(row);
        }
        let mut s = Table::new([
            "precision", "bits", "steady_emse_db", "degradation_db", "saturations", "full_width_mults",
            "reduced_width_mults",
        ]);
        for v in &self.variants {
            let (name, reduced) = match v.bits {
                None => ("full", 0),
                Some(_) => ("reduced", self.reduced_width),
            };
            let full = if v.bits.is_none() { self.full_width + self.reduced_width } else { self.full_width };
            s.push(vec![
                name.into(),
                v.bits.map(|b| b as usize).into(),
                v.steady_db.into(),
                (v.steady_db - self.full().steady_db).into(),
                v.saturations.into(),
                full.into(),
                reduced.into(),
            ]);
        }
        vec![Output::new(stem, "", t), Output::new(stem, "_summary", s)]
    }
}
