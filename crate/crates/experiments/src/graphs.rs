//! Filter graphs shared by several experiments.

use adacomb::scenario::{Graph, Sample};
use adacomb::{AdaptiveFilter, MixerState, Result};

/// Two component filters watched by several independent mixers.
///
/// The components never see the mixers, so any number of mixing rules can be
/// compared on exactly the same component trajectories. Channels: `emse1`,
/// `emse2`, `cross`, then `emse_<label>`, `lambda_<label>` and
/// `lf_<label>` (`lambda (1 - lambda)`) for each mixer.
pub struct TwoFilterGraph<A, B> {
    pub first: A,
    pub second: B,
    mixers: Vec<(String, MixerState)>,
}

impl<A: AdaptiveFilter, B: AdaptiveFilter> TwoFilterGraph<A, B> {
    pub fn new(first: A, second: B) -> Self {
        TwoFilterGraph { first, second, mixers: Vec::new() }
    }

    pub fn with_mixer(mut self, label: impl Into<String>, mixer: MixerState) -> Self {
        self.mixers.push((label.into(), mixer));
        self
    }
}

impl<A: AdaptiveFilter, B: AdaptiveFilter> Graph for TwoFilterGraph<A, B> {
    fn channels(&self) -> Vec<String> {
        let mut c: Vec<String> = ["emse1", "emse2", "cross"].map(String::from).to_vec();
        for (label, _) in &self.mixers {
            c.extend([format!("emse_{label}"), format!("lambda_{label}"), format!("lf_{label}")]);
        }
        c
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let r1 = self.first.adapt(s.u, s.d)?;
        let r2 = self.second.adapt(s.u, s.d)?;
        let (y1, y2) = (r1.output, r2.output);
        let (ea1, ea2) = (s.clean - y1, s.clean - y2);
        out[0] = ea1 * ea1;
        out[1] = ea2 * ea2;
        out[2] = ea1 * ea2;
        for (k, (_, m)) in self.mixers.iter_mut().enumerate() {
            let lambda = m.lambda();
            let y = m.output(y1, y2);
            let ea = s.clean - y;
            m.step(s.d - y, y1, y2)?;
            out[3 + 3 * k] = ea * ea;
            out[4 + 3 * k] = lambda;
            out[5 + 3 * k] = lambda * (1.0 - lambda);
        }
        Ok(())
    }
}

/// Several graphs fed the same samples; channel names get a `<prefix>_` prefix.
#[derive(Default)]
pub struct GraphStack {
    parts: Vec<(String, Box<dyn Graph>, usize)>,
}

impl GraphStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, prefix: impl Into<String>, graph: impl Graph + 'static) -> Self {
        let width = graph.channels().len();
        self.parts.push((prefix.into(), Box::new(graph), width));
        self
    }
}

impl Graph for GraphStack {
    fn channels(&self) -> Vec<String> {
        self.parts
            .iter()
            .flat_map(|(p, g, _)| g.channels().into_iter().map(move |c| format!("{p}_{c}")))
            .collect()
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let mut rest = out;
        for (_, g, width) in &mut self.parts {
            let (head, tail) = rest.split_at_mut(*width);
            g.step(s, head)?;
            rest = tail;
        }
        Ok(())
    }
}

/// Affine optimum of the combination from (possibly noisy) EMSE estimates.
///
/// Returns `(lambda, emse)`. When the estimated `E{(e_a1 - e_a2)^2}` is not
/// positive the better component is selected.
pub fn optimal_reference(z1: f64, z2: f64, z12: f64) -> (f64, f64) {
    let (d1, d2) = (z1 - z12, z2 - z12);
    let den = d1 + d2;
    if den > 0.0 {
        let lambda = d2 / den;
        (lambda, z2 - d2 * d2 / den)
    } else if z1 <= z2 {
        (1.0, z1)
    } else {
        (0.0, z2)
    }
}

/// Log-spaced grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points).map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)).collect()
}

/// First sample after which `series` (block means of `stride` samples, in dB)
/// stays at or below `level_db`. `None` if the last block is above.
pub fn settling_time(series_db: &[f64], stride: usize, level_db: f64, from: usize) -> Option<usize> {
    let start = from / stride;
    let tail = series_db.get(start..)?;
    if tail.last().is_none_or(|v| !(*v <= level_db)) {
        return None;
    }
    let last_above = tail.iter().rposition(|v| !(*v <= level_db));
    Some(match last_above {
        Some(k) => (start + k + 1) * stride,
        None => start * stride,
    })
}

/// First sample at or after `from` whose block is at or below `level_db`.
pub fn first_crossing(series_db: &[f64], stride: usize, level_db: f64, from: usize) -> Option<usize> {
    let start = from / stride;
    series_db.get(start..)?.iter().position(|v| *v <= level_db).map(|k| (start + k) * stride)
}

#[cfg(test)]
mod tests {
    use super::*;
    use adacomb::{FilterState, MixingRule};

    #[test]
    fn reference_examples() {
        let (l, z) = optimal_reference(1.0, 2.0, 0.5);
        assert!((l - 0.75).abs() < 1e-15 && (z - 0.875).abs() < 1e-15);
        assert_eq!(optimal_reference(1.0, 1.0, 1.0), (1.0, 1.0));
        assert_eq!(optimal_reference(2.0, 1.0, 1.5), (0.0, 1.0));
    }

    #[test]
    fn grid_and_times() {
        let g = log_grid(1e-3, 1e1, 5);
        assert_eq!(g.len(), 5);
        assert!((g[2] - 0.1).abs() < 1e-15 && g[4] == 10.0);
        let s = [0.0, -10.0, -50.0, -40.0, -50.0, -51.0];
        assert_eq!(settling_time(&s, 10, -45.0, 0), Some(40));
        assert_eq!(first_crossing(&s, 10, -45.0, 0), Some(20));
        assert_eq!(settling_time(&s[..4], 10, -45.0, 0), None);
        assert_eq!(first_crossing(&s, 10, -45.0, 30), Some(40));
    }

    #[test]
    fn stack_prefixes_and_splits() {
        let g = || TwoFilterGraph::new(FilterState::lms(2, 0.1).unwrap(), FilterState::lms(2, 0.01).unwrap())
            .with_mixer("cvx", MixerState::new(MixingRule::CvxPnLms, 1.0).unwrap());
        let mut st = GraphStack::new().with("a", g()).with("b", g());
        let ch = st.channels();
        assert_eq!(ch.len(), 12);
        assert_eq!(ch[0], "a_emse1");
        assert_eq!(ch[7], "b_emse2");
        let u = [1.0, 0.5];
        let s = Sample { n: 0, u: &u, d: 1.0, clean: 1.0, noise: 0.0, w_o: None };
        let mut out = vec![0.0; 12];
        st.step(&s, &mut out).unwrap();
        assert_eq!(out[..6], out[6..]);
        assert_eq!(out[0], 1.0);
    }
}
