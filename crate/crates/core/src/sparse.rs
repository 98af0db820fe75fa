//! Adaptive filters for sparse plants.
//!
//! Scheme A is a convex combination of NLMS and ZA-NLMS ([`scheme_a`]).
//! Scheme B ([`BlockShrink`]) splits one filter into blocks whose partial
//! outputs are scaled by shrinkage factors in `[0, 1]`, each learned as a
//! convex combination against a virtual all-zero filter.

use crate::combo2::{MixerState, MixingRule};
use crate::error::{check_len, invalid, Result};
use crate::filters::{AdaptiveFilter, FilterState};
use crate::pair::CombinedPair;
use crate::scenario::{Graph, Sample};

/// ZA-NLMS (first) and NLMS (second) with the same step, mixed by cvx-PN-LMS.
pub fn scheme_a(
    len: usize,
    step: f64,
    rho: f64,
    mixer_step: f64,
) -> Result<CombinedPair<FilterState, FilterState>> {
    Ok(CombinedPair::new(
        FilterState::za_nlms(len, step, rho)?,
        FilterState::nlms(len, step)?,
        MixerState::new(MixingRule::CvxPnLms, mixer_step)?,
    ))
}

/// Per-sample quantities of [`BlockShrink::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkStep {
    /// Shrunk output `sum_q lambda_q y_q`.
    pub output: f64,
    pub error: f64,
    /// Output of the unmodified filter, `sum_q y_q`.
    pub base_output: f64,
}

/// Block-wise biased filter.
#[derive(Debug, Clone)]
pub struct BlockShrink<F> {
    base: F,
    bounds: Vec<(usize, usize)>,
    mixers: Vec<MixerState>,
    partial: Vec<f64>,
    frozen: bool,
}

impl<F: AdaptiveFilter> BlockShrink<F> {
    /// Split `base` into `blocks` contiguous blocks; the last block absorbs
    /// the remainder when the length is not a multiple of `blocks`. Every
    /// block starts at `lambda = 0.5` with a cvx-PN-LMS mixer of step `mixer_step`.
    pub fn new(base: F, blocks: usize, mixer_step: f64) -> Result<Self> {
        let m = base.len();
        if blocks == 0 || blocks > m {
            return Err(invalid(format!("block count {blocks} not in 1..={m}")));
        }
        let size = m / blocks;
        let bounds = (0..blocks)
            .map(|q| (q * size, if q + 1 == blocks { m } else { (q + 1) * size }))
            .collect();
        let mixer = MixerState::new(MixingRule::CvxPnLms, mixer_step)?;
        Ok(BlockShrink {
            base,
            bounds,
            mixers: vec![mixer; blocks],
            partial: vec![0.0; blocks],
            frozen: false,
        })
    }

    /// Use the given mixer (rule, step, constants) for every block.
    pub fn with_mixer(mut self, mixer: MixerState) -> Result<Self> {
        if !mixer.rule().is_convex() {
            return Err(invalid("shrinkage factors need a convex mixing rule"));
        }
        self.mixers.iter_mut().for_each(|m| *m = mixer.clone());
        Ok(self)
    }

    /// Pin every factor to 1 and stop adapting them.
    pub fn pinned(mut self) -> Self {
        self.mixers = self
            .mixers
            .into_iter()
            .map(|m| {
                let a_max = m.a_max();
                m.with_activation(crate::combo2::Activation::ScaledSigmoid).with_a(a_max)
            })
            .collect();
        self.frozen = true;
        self
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.bounds
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.mixers.iter().map(|m| m.lambda()).collect()
    }

    /// Shrunk weights `lambda_q w_q`, the filter actually applied to the input.
    pub fn effective_weights(&self) -> Vec<f64> {
        let w = self.base.weights();
        let mut out = w.to_vec();
        for (&(s, e), m) in self.bounds.iter().zip(&self.mixers) {
            out[s..e].iter_mut().for_each(|x| *x *= m.lambda());
        }
        out
    }

    /// Partial outputs `y_q` of the current weights.
    pub fn partial_outputs(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.base.len(), u.len())?;
        let w = self.base.weights();
        Ok(self.bounds.iter().map(|&(s, e)| crate::dot(&w[s..e], &u[s..e])).collect())
    }

    pub fn output(&self, u: &[f64]) -> Result<f64> {
        let ys = self.partial_outputs(u)?;
        Ok(ys.iter().zip(&self.mixers).map(|(y, m)| m.output(*y, 0.0)).sum())
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<ShrinkStep> {
        check_len(self.base.len(), u.len())?;
        let w = self.base.weights();
        for (y, &(s, e)) in self.partial.iter_mut().zip(&self.bounds) {
            *y = crate::dot(&w[s..e], &u[s..e]);
        }
        let output: f64 = self.partial.iter().zip(&self.mixers).map(|(y, m)| m.output(*y, 0.0)).sum();
        let error = d - output;
        // the base filter sees the unbiased error; shrinkage only acts on the output path
        let base = self.base.adapt(u, d)?;
        if !self.frozen {
            for (m, y) in self.mixers.iter_mut().zip(&self.partial) {
                m.step(error, *y, 0.0)?;
            }
        }
        Ok(ShrinkStep { output, error, base_output: base.output })
    }
}

impl<F: AdaptiveFilter> Graph for BlockShrink<F> {
    /// `mse`, `emse`, `msd` of the shrunk filter and `lambda_mean`.
    fn channels(&self) -> Vec<String> {
        ["mse", "emse", "msd", "lambda_mean"].map(String::from).to_vec()
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let r = BlockShrink::step(self, s.u, s.d)?;
        let ea = s.clean - r.output;
        out[0] = r.error * r.error;
        out[1] = ea * ea;
        out[2] = match s.w_o {
            Some(w_o) => {
                let eff = self.effective_weights();
                w_o.iter().zip(&eff).map(|(a, b)| (a - b) * (a - b)).sum()
            }
            None => 0.0,
        };
        out[3] = self.mixers.iter().map(|m| m.lambda()).sum::<f64>() / self.mixers.len() as f64;
        Ok(())
    }
}
