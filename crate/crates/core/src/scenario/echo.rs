//! Synthetic acoustic echo path with a nonlinear loudspeaker.
//!
//! The far-end signal `x` passes through a memoryless polynomial
//! `x + gamma x^2` and a random exponentially decaying room impulse response.
//! The linear-to-nonlinear ratio (LNLR) of echo powers sets `gamma` per segment.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DelayLine, Density, InputModel, Sample, SignalSource};
use crate::error::{invalid, Result};

/// ERLE in dB from echo and residual powers; `+inf` for zero residual.
pub fn erle_db(echo_power: f64, residual_power: f64) -> f64 {
    if residual_power == 0.0 {
        f64::INFINITY
    } else {
        crate::db(echo_power / residual_power)
    }
}

/// Sliding-window ERLE of error `e` against microphone signal `d` and
/// background noise `e0`. Element `k` covers samples `k..k + window`.
pub fn erle(d: &[f64], e: &[f64], e0: &[f64], window: usize) -> Result<Vec<f64>> {
    crate::error::check_len(d.len(), e.len())?;
    crate::error::check_len(d.len(), e0.len())?;
    if window == 0 || window > d.len() {
        return Err(invalid(format!("window {window} must be in 1..={}", d.len())));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let term = |i: usize| ((d[i] - e0[i]).powi(2), (e[i] - e0[i]).powi(2));
    let mut out = Vec::with_capacity(d.len() - window + 1);
    for i in 0..d.len() {
        let (a, b) = term(i);
        num += a;
        den += b;
        if i >= window {
            let (a, b) = term(i - window);
            num -= a;
            den -= b;
        }
        if i + 1 >= window {
            out.push(erle_db(num.max(0.0), den.max(0.0)));
        }
    }
    Ok(out)
}

/// Span of the echo scenario with a fixed nonlinearity strength.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoSegment {
    pub len: usize,
    /// `None` for a purely linear loudspeaker.
    pub lnlr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoScenario {
    pub rir_len: usize,
    /// Amplitude decay constant of the RIR in taps.
    pub decay: f64,
    pub input_rho: f64,
    /// Linear echo to background noise ratio.
    pub echo_snr_db: f64,
    pub segments: Vec<EchoSegment>,
    /// Sample at which a new RIR is drawn.
    pub rir_change_at: Option<usize>,
    /// Samples used to calibrate the nonlinearity gain.
    pub pilot: usize,
}

impl EchoScenario {
    pub fn horizon(&self) -> usize {
        self.segments.iter().map(|s| s.len).sum()
    }

    /// `(start, end)` of each segment.
    pub fn segment_bounds(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.segments
            .iter()
            .map(|s| {
                let b = (start, start + s.len);
                start += s.len;
                b
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rir_len == 0 || !(self.decay > 0.0) {
            return Err(invalid("RIR length and decay must be positive"));
        }
        if !(self.input_rho.abs() < 1.0) {
            return Err(invalid("input AR coefficient must satisfy |rho| < 1"));
        }
        if self.segments.is_empty() || self.segments.iter().any(|s| s.len == 0) {
            return Err(invalid("echo scenario needs non-empty segments"));
        }
        if self.segments.iter().any(|s| s.lnlr_db.is_some_and(|l| !l.is_finite())) {
            return Err(invalid("LNLR must be finite"));
        }
        if self.rir_change_at.is_some_and(|n| n == 0 || n >= self.horizon()) {
            return Err(invalid("RIR change must fall inside the horizon"));
        }
        if self.pilot == 0 {
            return Err(invalid("pilot length must be positive"));
        }
        Ok(())
    }

    fn draw_rir<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut h: Vec<f64> = (0..self.rir_len)
            .map(|k| {
                let z: f64 = StandardNormal.sample(rng);
                z * (-(k as f64) / self.decay).exp()
            })
            .collect();
        let norm = crate::dot(&h, &h).sqrt();
        h.iter_mut().for_each(|x| *x /= norm);
        h
    }

    pub fn source<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EchoSource> {
        self.validate()?;
        let input = InputModel::ar1(1.0, self.input_rho)?.with_innovations(Density::Laplacian);
        let h = self.draw_rir(rng);
        let h_next = self.rir_change_at.map(|_| self.draw_rir(rng));

        // calibrate linear and unit-gain quadratic echo powers on a pilot
        let mut pilot = DelayLine::new(input, self.rir_len, rng)?;
        let (mut p_lin, mut p_nl) = (0.0, 0.0);
        for _ in 0..self.pilot {
            let x = pilot.next(rng);
            let lin = crate::dot(&h, x);
            let nl: f64 = h.iter().zip(x).map(|(h, x)| h * x * x).sum();
            p_lin += lin * lin;
            p_nl += nl * nl;
        }
        let gains = self
            .segments
            .iter()
            .map(|s| s.lnlr_db.map_or(0.0, |l| (p_lin / (p_nl * crate::from_db(l))).sqrt()))
            .collect();
        let noise_std = (p_lin / self.pilot as f64 / crate::from_db(self.echo_snr_db)).sqrt();
        let line = DelayLine::new(input, self.rir_len, rng)?;
        Ok(EchoSource {
            line,
            h,
            h_next,
            change_at: self.rir_change_at,
            bounds: self.segment_bounds(),
            gains,
            noise_std,
            n: 0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EchoSource {
    line: DelayLine,
    h: Vec<f64>,
    h_next: Option<Vec<f64>>,
    change_at: Option<usize>,
    bounds: Vec<(usize, usize)>,
    gains: Vec<f64>,
    noise_std: f64,
    n: usize,
}

impl EchoSource {
    /// Current room impulse response.
    pub fn rir(&self) -> &[f64] {
        &self.h
    }

    /// Loudspeaker gain `gamma` of each segment.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    fn gain(&self, n: usize) -> f64 {
        let seg = self.bounds.iter().position(|&(s, e)| (s..e).contains(&n));
        seg.map_or(0.0, |i| self.gains[i])
    }
}

impl SignalSource for EchoSource {
    fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Sample<'_>> {
        let n = self.n;
        if Some(n) == self.change_at {
            if let Some(h) = self.h_next.take() {
                self.h = h;
            }
        }
        if n > 0 {
            self.line.next(rng);
        }
        let x = self.line.regressor();
        let gamma = self.gain(n);
        let clean: f64 = self.h.iter().zip(x).map(|(h, x)| h * (x + gamma * x * x)).sum();
        let z: f64 = StandardNormal.sample(rng);
        let noise = self.noise_std * z;
        self.n += 1;
        Ok(Sample { n, u: x, d: clean + noise, clean, noise, w_o: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erle_examples() {
        let d = [1.0, -2.0, 0.5, 3.0];
        let e0 = [0.0; 4];
        assert_eq!(erle(&d, &d, &e0, 2).unwrap(), vec![0.0; 3]);
        let e0 = [0.1, 0.2, -0.1, 0.3];
        let v = erle(&d, &e0, &e0, 4).unwrap();
        assert_eq!(v, vec![f64::INFINITY]);
        let e: Vec<f64> = d.iter().map(|x| x / 2f64.sqrt()).collect();
        let v = erle(&d, &e, &[0.0; 4], 4).unwrap();
        assert!((v[0] - 3.0103).abs() < 1e-4);
        assert!(erle(&d, &d, &[0.0; 4], 5).is_err());
    }

    fn scenario(lnlr: Option<f64>) -> EchoScenario {
        EchoScenario {
            rir_len: 16,
            decay: 4.0,
            input_rho: 0.8,
            echo_snr_db: 30.0,
            segments: vec![EchoSegment { len: 100_000, lnlr_db: lnlr }],
            rir_change_at: None,
            pilot: 20_000,
        }
    }

    #[test]
    fn lnlr_calibration() {
        let s = scenario(Some(6.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut src = s.source(&mut rng).unwrap();
        let h = src.rir().to_vec();
        let (mut pl, mut pn) = (0.0, 0.0);
        for _ in 0..s.horizon() {
            let x = src.next_sample(&mut rng).unwrap();
            let lin = crate::dot(&h, x.u);
            pl += lin * lin;
            pn += (x.clean - lin).powi(2);
        }
        let lnlr = crate::db(pl / pn);
        assert!((lnlr - 6.0).abs() < 0.5, "measured LNLR {lnlr}");
    }

    #[test]
    fn linear_segment_has_no_distortion() {
        let s = scenario(None);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut src = s.source(&mut rng).unwrap();
        let h = src.rir().to_vec();
        for _ in 0..1000 {
            let x = src.next_sample(&mut rng).unwrap();
            assert_eq!(x.clean, h.iter().zip(x.u).map(|(h, x)| h * (x + 0.0 * x * x)).sum::<f64>());
        }
    }

    #[test]
    fn rir_changes_once() {
        let mut s = scenario(None);
        s.rir_change_at = Some(500);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut src = s.source(&mut rng).unwrap();
        let h0 = src.rir().to_vec();
        for _ in 0..500 {
            src.next_sample(&mut rng).unwrap();
        }
        assert_eq!(src.rir(), &h0[..]);
        src.next_sample(&mut rng).unwrap();
        assert_ne!(src.rir(), &h0[..]);
    }
}
