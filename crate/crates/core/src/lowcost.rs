//! Reduced-cost combination through a difference filter.
//!
//! Only the fast filter `w1` and the difference `dw2 = w2 - w1` are stored.
//! The difference filter may be kept on a coarse fixed-point grid, emulated in
//! floating point, so that its output and update multiply in reduced width.

use crate::combo2::MixerState;
use crate::error::{check_len, invalid, Error, Result};
use crate::scenario::{Graph, Sample};

/// Round-to-nearest on a grid of step `2^-bits`, saturating at `+-range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    bits: u32,
    range: f64,
    scale: f64,
}

impl Quantizer {
    pub fn new(bits: u32, range: f64) -> Result<Self> {
        if bits == 0 || bits > 1000 {
            return Err(invalid(format!("fractional bits must be in 1..=1000, got {bits}")));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(invalid(format!("saturation range must be positive, got {range}")));
        }
        Ok(Quantizer { bits, range, scale: 2f64.powi(bits as i32) })
    }

    /// Saturation at `+-1`.
    pub fn with_bits(bits: u32) -> Result<Self> {
        Self::new(bits, 1.0)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn step(&self) -> f64 {
        1.0 / self.scale
    }

    /// Quantized value and whether it saturated.
    pub fn apply(&self, x: f64) -> (f64, bool) {
        let q = (x * self.scale).round_ties_even() / self.scale;
        if q > self.range {
            (self.range, true)
        } else if q < -self.range {
            (-self.range, true)
        } else {
            (q, false)
        }
    }
}

/// Quantize a vector with saturation at `+-1`.
pub fn quantize(x: &[f64], bits: u32) -> Result<Vec<f64>> {
    let q = Quantizer::with_bits(bits)?;
    Ok(x.iter().map(|&v| q.apply(v).0).collect())
}

/// Storage of the difference weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    Full,
    Reduced(Quantizer),
}

/// Multiplications per sample split by wordlength.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub full_width: usize,
    pub reduced_width: usize,
}

/// Per-sample quantities of [`DiffCombo::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffStep {
    pub y1: f64,
    pub y2: f64,
    pub e1: f64,
    pub e2: f64,
    /// Combined error `d - y`.
    pub e: f64,
    pub lambda: f64,
}

/// Two LMS (or NLMS) filters run as a fast filter plus a difference filter.
#[derive(Debug, Clone)]
pub struct DiffCombo {
    w1: Vec<f64>,
    dw2: Vec<f64>,
    mu1: f64,
    mu2: f64,
    normalize_eps: Option<f64>,
    precision: Precision,
    pub mixer: MixerState,
    saturations: u64,
}

impl DiffCombo {
    pub fn new(len: usize, mu1: f64, mu2: f64, mixer: MixerState) -> Result<Self> {
        if len == 0 {
            return Err(invalid("filter length must be positive"));
        }
        for (name, mu) in [("mu1", mu1), ("mu2", mu2)] {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {mu}")));
            }
        }
        Ok(DiffCombo {
            w1: vec![0.0; len],
            dw2: vec![0.0; len],
            mu1,
            mu2,
            normalize_eps: None,
            precision: Precision::Full,
            mixer,
            saturations: 0,
        })
    }

    /// Normalize both updates by `eps + |u|^2` (NLMS components).
    pub fn normalized(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(invalid(format!("eps must be positive, got {eps}")));
        }
        self.normalize_eps = Some(eps);
        Ok(self)
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn len(&self) -> usize {
        self.w1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w1.is_empty()
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn dw2(&self) -> &[f64] {
        &self.dw2
    }

    /// `w1 + dw2`; never stored.
    pub fn implied_w2(&self) -> Vec<f64> {
        self.w1.iter().zip(&self.dw2).map(|(a, b)| a + b).collect()
    }

    /// Number of difference coefficients clipped at the saturation range.
    pub fn saturation_count(&self) -> u64 {
        self.saturations
    }

    pub fn cost(&self) -> CostModel {
        let m = self.len();
        CostModel { full_width: 2 * m, reduced_width: 2 * m }
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<DiffStep> {
        check_len(self.len(), u.len())?;
        if !d.is_finite() {
            return Err(Error::NonFinite("desired signal"));
        }
        let y1 = crate::dot(u, &self.w1);
        let e1 = d - y1;
        let dy2 = crate::dot(u, &self.dw2);
        // dw2 = w2 - w1 gives e2 = d - u'w2 = e1 - dy2
        let e2 = e1 - dy2;
        let y2 = y1 + dy2;
        let lambda = self.mixer.lambda();
        let y = self.mixer.output(y1, y2);
        let e = d - y;

        let norm = match self.normalize_eps {
            Some(eps) => 1.0 / (eps + crate::dot(u, u)),
            None => 1.0,
        };
        let g1 = self.mu1 * e1 * norm;
        for (w, x) in self.w1.iter_mut().zip(u) {
            *w += g1 * x;
        }
        let gd = (self.mu2 * e2 - self.mu1 * e1) * norm;
        match self.precision {
            Precision::Full => {
                for (w, x) in self.dw2.iter_mut().zip(u) {
                    *w += gd * x;
                }
            }
            Precision::Reduced(q) => {
                for (w, x) in self.dw2.iter_mut().zip(u) {
                    let (v, sat) = q.apply(*w + gd * x);
                    *w = v;
                    self.saturations += sat as u64;
                }
            }
        }
        if self.w1.iter().chain(&self.dw2).any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("filter weights"));
        }
        self.mixer.step(e, y1, y2)?;
        Ok(DiffStep { y1, y2, e1, e2, e, lambda })
    }
}

impl Graph for DiffCombo {
    /// A-priori error powers of the combination and both components, `lambda`
    /// and the running saturation count.
    fn channels(&self) -> Vec<String> {
        ["emse", "emse1", "emse2", "lambda", "saturations"].map(String::from).to_vec()
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let r = DiffCombo::step(self, s.u, s.d)?;
        let y = crate::combo2::combine_outputs(r.lambda, r.y1, r.y2);
        out[0] = (s.clean - y) * (s.clean - y);
        out[1] = (s.clean - r.y1) * (s.clean - r.y1);
        out[2] = (s.clean - r.y2) * (s.clean - r.y2);
        out[3] = r.lambda;
        out[4] = self.saturations as f64;
        Ok(())
    }
}
