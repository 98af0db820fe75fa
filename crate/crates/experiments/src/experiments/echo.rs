//! Nonlinear acoustic echo cancellation with the combination-of-kernels
//! canceller, compared with every filter built from its kernels.

use adacomb::scenario::{erle_db, run_ensemble, EchoScenario, EchoSegment, EnsembleMetrics, Window};
use adacomb::volterra::{EchoGraph, EchoParams as GraphParams};
use serde::{Deserialize, Serialize};

use super::Output;
use crate::config::Check;
use crate::table::{Cell, Table};

/// Cancellers reported by the echo experiment, in column order.
pub const CANCELLERS: [&str; 6] = ["ck", "lin_fast", "lin_slow", "lin_combo", "vf_fast", "vf_slow"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EchoParams {
    pub rir_len: usize,
    /// RIR amplitude decay constant in taps.
    pub decay: f64,
    pub input_rho: f64,
    pub echo_snr_db: f64,
    pub segment_len: usize,
    /// LNLR of each segment in dB; `inf` for a linear loudspeaker.
    pub lnlr_db: Vec<f64>,
    /// Sample of the RIR change; zero for none.
    pub rir_change_at: usize,
    pub pilot: usize,
    pub n1: usize,
    pub n2: usize,
    pub mu_fast: f64,
    pub mu_slow: f64,
    pub mu_quad: f64,
    pub mixer_step: f64,
    pub stride: usize,
    pub tail_fraction: f64,
}

impl Default for EchoParams {
    fn default() -> Self {
        EchoParams {
            rir_len: 64,
            decay: 6.0,
            input_rho: 0.8,
            echo_snr_db: 30.0,
            segment_len: 40_000,
            lnlr_db: vec![f64::INFINITY, 10.0, 0.0],
            rir_change_at: 60_000,
            pilot: 20_000,
            n1: 64,
            n2: 6,
            mu_fast: 0.5,
            mu_slow: 0.05,
            mu_quad: 0.5,
            mixer_step: 1.0,
            stride: 200,
            tail_fraction: 0.25,
        }
    }
}

impl EchoParams {
    pub fn check(&self, c: &mut Check) {
        c.at_least("rir_len", self.rir_len, 1);
        c.positive("decay", self.decay);
        if !(self.input_rho.abs() < 1.0) {
            c.error(format!("input_rho: must satisfy |rho| < 1, got {}", self.input_rho));
        }
        c.finite("echo_snr_db", self.echo_snr_db);
        c.at_least("segment_len", self.segment_len, 1);
        c.nonempty("lnlr_db", &self.lnlr_db);
        for &l in &self.lnlr_db {
            if l.is_nan() || l == f64::NEG_INFINITY {
                c.error(format!("lnlr_db: must be finite or inf, got {l}"));
            }
        }
        let horizon = self.segment_len * self.lnlr_db.len();
        if self.rir_change_at >= horizon {
            c.error(format!("rir_change_at: must be below the horizon {horizon}, got {}", self.rir_change_at));
        }
        c.at_least("pilot", self.pilot, 1);
        if self.n1 == 0 || self.n1 > self.rir_len {
            c.error(format!("n1: must lie in 1..={}, got {}", self.rir_len, self.n1));
        }
        if self.n2 == 0 || self.n2 > self.rir_len {
            c.error(format!("n2: must lie in 1..={}, got {}", self.rir_len, self.n2));
        }
        c.positive("mu_fast", self.mu_fast);
        c.positive("mu_slow", self.mu_slow);
        c.positive("mu_quad", self.mu_quad);
        c.positive("mixer_step", self.mixer_step);
        c.at_least("stride", self.stride, 1);
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            c.error(format!("tail_fraction: must lie in (0,1], got {}", self.tail_fraction));
        }
    }

    pub fn scenario(&self) -> EchoScenario {
        EchoScenario {
            rir_len: self.rir_len,
            decay: self.decay,
            input_rho: self.input_rho,
            echo_snr_db: self.echo_snr_db,
            segments: self
                .lnlr_db
                .iter()
                .map(|&l| EchoSegment { len: self.segment_len, lnlr_db: l.is_finite().then_some(l) })
                .collect(),
            rir_change_at: (self.rir_change_at > 0).then_some(self.rir_change_at),
            pilot: self.pilot,
        }
    }

    pub fn graph(&self) -> GraphParams {
        GraphParams {
            n1: self.n1,
            n2: self.n2,
            fast: self.mu_fast,
            slow: self.mu_slow,
            quad: self.mu_quad,
            mixer_step: self.mixer_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub lnlr_db: f64,
    /// Steady ERLE of each canceller, in [`CANCELLERS`] order.
    pub erle: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SegmentSummary {
    pub fn erle_of(&self, name: &str) -> f64 {
        self.erle[CANCELLERS.iter().position(|c| *c == name).expect("known canceller")]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoReport {
    pub stride: usize,
    /// ERLE curves in dB, in [`CANCELLERS`] order.
    pub erle: Vec<Vec<f64>>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub segments: Vec<SegmentSummary>,
}

pub fn run(p: &EchoParams, runs: usize, seed: u64) -> anyhow::Result<EchoReport> {
    let sc = p.scenario();
    sc.validate()?;
    let horizon = sc.horizon();
    let tail = ((p.segment_len as f64 * p.tail_fraction) as usize).max(1);
    let mut cfg = adacomb::scenario::EnsembleConfig::new(runs, horizon, seed).with_stride(p.stride);
    for (k, (_, end)) in sc.segment_bounds().into_iter().enumerate() {
        cfg = cfg.with_window(Window::new(format!("seg{k}"), end - tail, end));
    }
    let gp = p.graph();
    let m = run_ensemble(&cfg, |_, rng| Ok((sc.source(rng)?, EchoGraph::new(gp)?)))?;
    Ok(report(p, &m))
}

fn report(p: &EchoParams, m: &EnsembleMetrics) -> EchoReport {
    let echo = super::series(m, "echo");
    let erle = CANCELLERS
        .iter()
        .map(|c| echo.iter().zip(super::series(m, c)).map(|(e, r)| erle_db(*e, r)).collect())
        .collect();
    let segments = p
        .lnlr_db
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let w = format!("seg{k}");
            let mean = |c: &str| m.mean(&w, c).expect("window exists");
            SegmentSummary {
                lnlr_db: l,
                erle: CANCELLERS.iter().map(|c| erle_db(mean("echo"), mean(c))).collect(),
                lambda1: mean("lambda1"),
                lambda2: mean("lambda2"),
            }
        })
        .collect();
    EchoReport {
        stride: m.stride,
        erle,
        lambda1: super::series(m, "lambda1"),
        lambda2: super::series(m, "lambda2"),
        segments,
    }
}

impl EchoReport {
    pub fn outputs(&self, stem: &str) -> Vec<Output> {
        let mut header = vec!["n".to_string()];
        header.extend(CANCELLERS.iter().map(|c| format!("erle_{c}_db")));
        header.extend(["lambda1".to_string(), "lambda2".to_string()]);
        let mut t = Table::new(header);
        for k in 0..self.lambda1.len() {
            let mut row: Vec<Cell> = vec![(k * self.stride).into()];
            row.extend(self.erle.iter().map(|c| Cell::from(c[k])));
            row.extend([self.lambda1[k].into(), self.lambda2[k].into()]);
            t.push(row);
        }
        let mut header = vec!["segment".to_string(), "lnlr_db".to_string()];
        header.extend(CANCELLERS.iter().map(|c| format!("erle_{c}_db")));
        header.extend(["lambda1".to_string(), "lambda2".to_string()]);
        let mut s = Table::new(header);
        for (k, seg) in self.segments.iter().enumerate() {
            let mut row: Vec<Cell> = vec![k.into(), seg.lnlr_db.into()];
            row.extend(seg.erle.iter().map(|e| Cell::from(*e)));
            row.extend([seg.lambda1.into(), seg.lambda2.into()]);
            s.push(row);
        }
        vec![Output::new(stem, "", t), Output::new(stem, "_summary", s)]
    }
}
