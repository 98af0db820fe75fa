//! Ready-made graphs for single filters and two-filter combinations.

use super::{Graph, Sample};
use crate::error::{invalid, Result};
use crate::filters::AdaptiveFilter;
use crate::pair::CombinedPair;

fn deviation(w_o: Option<&[f64]>, w: &[f64]) -> Result<f64> {
    let w_o = w_o.ok_or_else(|| invalid("MSD needs a source with known optimal weights"))?;
    let n = w_o.len().max(w.len());
    Ok((0..n)
        .map(|i| {
            let d = w_o.get(i).copied().unwrap_or(0.0) - w.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum())
}

/// A lone filter. Channels: `mse`, `emse`, `msd`.
#[derive(Debug, Clone)]
pub struct FilterGraph<F> {
    pub filter: F,
}

impl<F: AdaptiveFilter> FilterGraph<F> {
    pub fn new(filter: F) -> Self {
        FilterGraph { filter }
    }
}

impl<F: AdaptiveFilter> Graph for FilterGraph<F> {
    fn channels(&self) -> Vec<String> {
        ["mse", "emse", "msd"].map(String::from).to_vec()
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let r = self.filter.adapt(s.u, s.d)?;
        let ea = s.clean - r.output;
        out[0] = r.error * r.error;
        out[1] = ea * ea;
        out[2] = deviation(s.w_o, self.filter.weights())?;
        Ok(())
    }
}

/// A two-filter combination.
///
/// Channels: `mse`, `emse1`, `emse2`, `emse`, `cross`, `lambda`, `msd1`,
/// `msd2`, `msd`. EMSEs are a-priori; `lambda` is the value used for the
/// output; deviations are measured after the update.
#[derive(Debug, Clone)]
pub struct PairGraph<A, B> {
    pub pair: CombinedPair<A, B>,
    track_msd: bool,
}

impl<A: AdaptiveFilter, B: AdaptiveFilter> PairGraph<A, B> {
    pub fn new(pair: CombinedPair<A, B>) -> Self {
        PairGraph { pair, track_msd: true }
    }

    /// Skip the deviation channels (reported as zero), e.g. for long filters.
    pub fn without_msd(mut self) -> Self {
        self.track_msd = false;
        self
    }
}

impl<A: AdaptiveFilter, B: AdaptiveFilter> Graph for PairGraph<A, B> {
    fn channels(&self) -> Vec<String> {
        ["mse", "emse1", "emse2", "emse", "cross", "lambda", "msd1", "msd2", "msd"]
            .map(String::from)
            .to_vec()
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let r = self.pair.step(s.u, s.d)?;
        let (ea1, ea2, ea) = (s.clean - r.y1, s.clean - r.y2, s.clean - r.y);
        out[0] = r.e * r.e;
        out[1] = ea1 * ea1;
        out[2] = ea2 * ea2;
        out[3] = ea * ea;
        out[4] = ea1 * ea2;
        out[5] = r.lambda;
        if self.track_msd {
            out[6] = deviation(s.w_o, self.pair.first.weights())?;
            out[7] = deviation(s.w_o, self.pair.second.weights())?;
            out[8] = deviation(s.w_o, &self.pair.combined_weights())?;
        } else {
            out[6..9].iter_mut().for_each(|x| *x = 0.0);
        }
        Ok(())
    }
}
