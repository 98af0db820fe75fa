//! Second-order Volterra filters and the combination-of-kernels (CK) echo
//! canceller.
//!
//! Input histories are passed newest first: `x[i] = x(n - i)`.

use crate::combo2::{MixerState, MixingRule};
use crate::error::{invalid, Error, Result};
use crate::filters::{AdaptiveFilter, FilterState};
use crate::scenario::{Graph, Sample};

/// Number of distinct products `x(n-i) x(n-j)`, `i <= j < n2`.
pub fn quadratic_len(n2: usize) -> usize {
    n2 * (n2 + 1) / 2
}

/// Fill `out` with the upper-triangular products of the first `n2` samples,
/// ordered `(0,0), (0,1), .., (0,n2-1), (1,1), ..`.
pub fn quadratic_regressor(x: &[f64], n2: usize, out: &mut Vec<f64>) -> Result<()> {
    if x.len() < n2 {
        return Err(Error::DimensionMismatch { expected: n2, found: x.len() });
    }
    out.clear();
    for i in 0..n2 {
        let xi = x[i];
        out.extend(x[i..n2].iter().map(|xj| xi * xj));
    }
    Ok(())
}

/// Quadratic kernel adapted by NLMS on its product regressor.
#[derive(Debug, Clone)]
pub struct QuadraticKernel {
    n2: usize,
    filter: FilterState,
    regressor: Vec<f64>,
}

impl QuadraticKernel {
    pub fn new(n2: usize, step: f64) -> Result<Self> {
        if n2 == 0 {
            return Err(invalid("quadratic memory must be positive"));
        }
        Ok(QuadraticKernel {
            n2,
            filter: FilterState::nlms(quadratic_len(n2), step)?,
            regressor: Vec::with_capacity(quadratic_len(n2)),
        })
    }

    /// Coefficients in regressor order.
    pub fn with_coefficients(mut self, h: &[f64]) -> Result<Self> {
        self.filter = self.filter.with_weights(h)?;
        Ok(self)
    }

    pub fn memory(&self) -> usize {
        self.n2
    }

    pub fn coefficients(&self) -> &[f64] {
        self.filter.weights()
    }

    /// Build the regressor for `x` and return the kernel output.
    pub fn output(&mut self, x: &[f64]) -> Result<f64> {
        quadratic_regressor(x, self.n2, &mut self.regressor)?;
        self.filter.predict(&self.regressor)
    }

    /// NLMS update on the regressor of the last [`output`](Self::output) call.
    pub fn update(&mut self, error: f64) -> Result<()> {
        self.filter.update(&self.regressor, error)
    }

    /// Energy of the regressor of the last [`output`](Self::output) call.
    pub fn regressor_energy(&self) -> f64 {
        crate::dot(&self.regressor, &self.regressor)
    }
}

/// Virtual kernel with zero coefficients that is never adapted.
#[derive(Debug, Clone, PartialEq)]
pub struct AllZerosKernel {
    coefficients: Vec<f64>,
}

impl AllZerosKernel {
    pub fn new(len: usize) -> Self {
        AllZerosKernel { coefficients: vec![0.0; len] }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn output(&self) -> f64 {
        0.0
    }
}

/// Outputs of one Volterra filter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraStep {
    pub output: f64,
    pub linear: f64,
    pub quadratic: f64,
    pub error: f64,
}

/// `P = 2` Volterra filter adapted on the global error.
///
/// The linear kernel is plain NLMS. The quadratic kernel is normalized by the
/// energy of the stacked regressor (linear plus products): the product
/// regressor is heavy tailed, and normalizing it by its own energy alone lets
/// the step blow up whenever that energy dips, which diverges.
#[derive(Debug, Clone)]
pub struct VolterraFilter {
    pub linear: FilterState,
    pub quadratic: Option<QuadraticKernel>,
}

impl VolterraFilter {
    pub fn new(n1: usize, step1: f64, n2: usize, step2: f64) -> Result<Self> {
        Ok(VolterraFilter {
            linear: FilterState::nlms(n1, step1)?,
            quadratic: Some(QuadraticKernel::new(n2, step2)?),
        })
    }

    /// Linear kernel only.
    pub fn linear_only(n1: usize, step: f64) -> Result<Self> {
        Ok(VolterraFilter { linear: FilterState::nlms(n1, step)?, quadratic: None })
    }

    fn linear_input<'a>(&self, x: &'a [f64]) -> Result<&'a [f64]> {
        x.get(..self.linear.len())
            .ok_or(Error::DimensionMismatch { expected: self.linear.len(), found: x.len() })
    }

    pub fn output(&mut self, x: &[f64]) -> Result<(f64, f64, f64)> {
        let y1 = self.linear.predict(self.linear_input(x)?)?;
        let y2 = match &mut self.quadratic {
            Some(q) => q.output(x)?,
            None => 0.0,
        };
        Ok((y1 + y2, y1, y2))
    }

    pub fn adapt(&mut self, x: &[f64], d: f64) -> Result<VolterraStep> {
        let (y, y1, y2) = self.output(x)?;
        let e = d - y;
        let xl = self.linear_input(x)?;
        let lin_energy = crate::dot(xl, xl);
        let total = lin_energy + self.quadratic.as_ref().map_or(0.0, |q| q.regressor_energy());
        // the quadratic kernel normalizes by its own energy; rescale to the stacked one
        let eps = crate::filters::DEFAULT_NLMS_EPS;
        self.linear.update(xl, e)?;
        if let Some(q) = &mut self.quadratic {
            q.update(e * (eps + q.regressor_energy()) / (eps + total))?;
        }
        Ok(VolterraStep { output: y, linear: y1, quadratic: y2, error: e })
    }
}

/// Outputs of one CK step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkStep {
    pub output: f64,
    pub error: f64,
    pub y_fast: f64,
    pub y_slow: f64,
    pub y_quad: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Two linear kernels mixed by `lambda1` plus a quadratic kernel mixed against
/// the all-zeros kernel by `lambda2`:
/// `y = lambda1 y11 + (1 - lambda1) y12 + lambda2 y21`.
#[derive(Debug, Clone)]
pub struct CkEchoCanceller {
    pub fast: FilterState,
    pub slow: FilterState,
    pub quadratic: QuadraticKernel,
    zeros: AllZerosKernel,
    pub mix_linear: MixerState,
    pub mix_nonlinear: MixerState,
}

impl CkEchoCanceller {
    /// NLMS kernels and cvx-PN-LMS mixers with step `mixer_step`.
    pub fn new(n1: usize, fast: f64, slow: f64, n2: usize, quad: f64, mixer_step: f64) -> Result<Self> {
        Ok(CkEchoCanceller {
            fast: FilterState::nlms(n1, fast)?,
            slow: FilterState::nlms(n1, slow)?,
            quadratic: QuadraticKernel::new(n2, quad)?,
            zeros: AllZerosKernel::new(quadratic_len(n2)),
            mix_linear: MixerState::new(MixingRule::CvxPnLms, mixer_step)?,
            mix_nonlinear: MixerState::new(MixingRule::CvxPnLms, mixer_step)?,
        })
    }

    pub fn zeros(&self) -> &AllZerosKernel {
        &self.zeros
    }

    pub fn step(&mut self, x: &[f64], d: f64) -> Result<CkStep> {
        let n1 = self.fast.len();
        let xl = x.get(..n1).ok_or(Error::DimensionMismatch { expected: n1, found: x.len() })?;
        let y11 = self.fast.predict(xl)?;
        let y12 = self.slow.predict(xl)?;
        let y21 = self.quadratic.output(x)?;
        let (lambda1, lambda2) = (self.mix_linear.lambda(), self.mix_nonlinear.lambda());
        let y_lin = self.mix_linear.output(y11, y12);
        let y_nl = self.mix_nonlinear.output(y21, self.zeros.output());
        let y = y_lin + y_nl;
        let e = d - y;
        // each kernel: its own output plus the combined output of the other order;
        // quadratic step normalized as in VolterraFilter
        let eps = crate::filters::DEFAULT_NLMS_EPS;
        let (lin_energy, quad_energy) = (crate::dot(xl, xl), self.quadratic.regressor_energy());
        let total = eps + lin_energy + quad_energy;
        self.fast.update(xl, d - y11 - y_nl)?;
        self.slow.update(xl, d - y12 - y_nl)?;
        self.quadratic.update((d - y21 - y_lin) * (eps + quad_energy) / total)?;
        self.mix_linear.step(e, y11, y12)?;
        self.mix_nonlinear.step(e, y21, self.zeros.output())?;
        Ok(CkStep { output: y, error: e, y_fast: y11, y_slow: y12, y_quad: y21, lambda1, lambda2 })
    }
}

/// Parameters of [`EchoGraph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoParams {
    pub n1: usize,
    pub n2: usize,
    pub fast: f64,
    pub slow: f64,
    pub quad: f64,
    pub mixer_step: f64,
}

/// The CK canceller next to every filter that can be built from its kernels,
/// all fed the same data.
///
/// Channels: `echo` (squared clean echo) and squared residual echo for `ck`,
/// `lin_fast`, `lin_slow`, `lin_combo`, `vf_fast`, `vf_slow`; then `lambda1`
/// and `lambda2` of the CK.
#[derive(Debug, Clone)]
pub struct EchoGraph {
    pub ck: CkEchoCanceller,
    lin_fast: VolterraFilter,
    lin_slow: VolterraFilter,
    lin_combo: crate::pair::CombinedPair<FilterState, FilterState>,
    vf_fast: VolterraFilter,
    vf_slow: VolterraFilter,
}

impl EchoGraph {
    pub fn new(p: EchoParams) -> Result<Self> {
        Ok(EchoGraph {
            ck: CkEchoCanceller::new(p.n1, p.fast, p.slow, p.n2, p.quad, p.mixer_step)?,
            lin_fast: VolterraFilter::linear_only(p.n1, p.fast)?,
            lin_slow: VolterraFilter::linear_only(p.n1, p.slow)?,
            lin_combo: crate::pair::CombinedPair::new(
                FilterState::nlms(p.n1, p.fast)?,
                FilterState::nlms(p.n1, p.slow)?,
                MixerState::new(MixingRule::CvxPnLms, p.mixer_step)?,
            ),
            vf_fast: VolterraFilter::new(p.n1, p.fast, p.n2, p.quad)?,
            vf_slow: VolterraFilter::new(p.n1, p.slow, p.n2, p.quad)?,
        })
    }
}

impl Graph for EchoGraph {
    fn channels(&self) -> Vec<String> {
        [
            "echo", "ck", "lin_fast", "lin_slow", "lin_combo", "vf_fast", "vf_slow", "lambda1",
            "lambda2",
        ]
        .map(String::from)
        .to_vec()
    }

    fn step(&mut self, s: &Sample<'_>, out: &mut [f64]) -> Result<()> {
        let n1 = self.ck.fast.len();
        let xl = s.u.get(..n1).ok_or(Error::DimensionMismatch { expected: n1, found: s.u.len() })?;
        let ck = self.ck.step(s.u, s.d)?;
        let outputs = [
            ck.output,
            self.lin_fast.adapt(s.u, s.d)?.output,
            self.lin_slow.adapt(s.u, s.d)?.output,
            self.lin_combo.step(xl, s.d)?.y,
            self.vf_fast.adapt(s.u, s.d)?.output,
            self.vf_slow.adapt(s.u, s.d)?.output,
        ];
        out[0] = s.clean * s.clean;
        for (o, y) in out[1..7].iter_mut().zip(outputs) {
            *o = (s.clean - y) * (s.clean - y);
        }
        out[7] = ck.lambda1;
        out[8] = ck.lambda2;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn regressor_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut out = Vec::new();
        for n2 in 1..7 {
            let x: Vec<f64> = (0..n2 + 2).map(|_| rng.random_range(-2.0..2.0)).collect();
            quadratic_regressor(&x, n2, &mut out).unwrap();
            assert_eq!(out.len(), quadratic_len(n2));
            let mut k = 0;
            for i in 0..n2 {
                for j in i..n2 {
                    assert_eq!(out[k], x[i] * x[j]);
                    k += 1;
                }
            }
        }
        assert!(quadratic_regressor(&[1.0], 2, &mut out).is_err());
    }

    #[test]
    fn quadratic_output_example() {
        // h00 = 1, h01 = 2, h11 = 3; x(n) = 1, x(n-1) = 2
        let mut q = QuadraticKernel::new(2, 0.5).unwrap().with_coefficients(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(q.output(&[1.0, 2.0]).unwrap(), 17.0);
    }

    #[test]
    fn homogeneity() {
        let mut vf = VolterraFilter::new(3, 0.5, 2, 0.5).unwrap();
        vf.linear = vf.linear.with_weights(&[0.5, -1.0, 2.0]).unwrap();
        vf.quadratic = Some(QuadraticKernel::new(2, 0.5).unwrap().with_coefficients(&[1.0, -0.5, 0.25]).unwrap());
        let x = [0.3, -0.7, 1.1];
        let c = 3.0;
        let xc: Vec<f64> = x.iter().map(|v| c * v).collect();
        let (_, l1, q1) = vf.output(&x).unwrap();
        let (_, l2, q2) = vf.output(&xc).unwrap();
        assert!((l2 - c * l1).abs() < 1e-12);
        assert!((q2 - c * c * q1).abs() < 1e-12);
        let mut lin = VolterraFilter::linear_only(3, 0.5).unwrap();
        lin.linear = lin.linear.with_weights(&[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(lin.output(&x).unwrap().0, l1);
    }

    #[test]
    fn no_update_cases() {
        let mut vf = VolterraFilter::new(2, 0.5, 2, 0.5).unwrap();
        vf.linear = vf.linear.with_weights(&[1.0, 1.0]).unwrap();
        let x = [0.5, 0.25];
        let (y, _, _) = vf.output(&x).unwrap();
        vf.adapt(&x, y).unwrap();
        assert_eq!(vf.linear.weights(), &[1.0, 1.0]);
        assert_eq!(vf.quadratic.as_ref().unwrap().coefficients(), &[0.0; 3]);
        vf.adapt(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(vf.linear.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn scalar_quadratic_plant_is_learned() {
        let mut q = QuadraticKernel::new(1, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y = q.output(&[x]).unwrap();
            q.update(x * x - y).unwrap();
        }
        assert!((q.coefficients()[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ck_output_endpoints() {
        let mut ck = CkEchoCanceller::new(2, 0.5, 0.05, 2, 0.5, 1.0).unwrap();
        ck.fast = ck.fast.with_weights(&[1.0, 0.0]).unwrap();
        ck.slow = ck.slow.with_weights(&[0.0, 1.0]).unwrap();
        ck.quadratic = QuadraticKernel::new(2, 0.5).unwrap().with_coefficients(&[1.0, 0.0, 0.0]).unwrap();
        let x = [2.0, 3.0];
        let mut c = ck.clone();
        c.mix_nonlinear = c.mix_nonlinear.clone().with_a(-4.0);
        let r = c.step(&x, 0.0).unwrap();
        assert_eq!(r.lambda2, 0.0);
        assert_eq!(r.output, 0.5 * 2.0 + 0.5 * 3.0);

        let mut c = ck.clone();
        c.mix_linear = c.mix_linear.clone().with_a(4.0);
        c.mix_nonlinear = c.mix_nonlinear.clone().with_a(4.0);
        let r = c.step(&x, 0.0).unwrap();
        assert_eq!(r.output, 2.0 + 4.0);
    }

    #[test]
    fn kernel_errors_follow_other_order() {
        let mut ck = CkEchoCanceller::new(1, 1.0, 0.5, 1, 1.0, 1.0).unwrap();
        let mut fast = ck.fast.clone();
        let mut slow = ck.slow.clone();
        let (x, d) = ([2.0], 3.0);
        // all kernels start at zero, so each error equals d
        ck.step(&x, d).unwrap();
        fast.update(&x, d).unwrap();
        slow.update(&x, d).unwrap();
        assert_eq!(ck.fast.weights(), fast.weights());
        assert_eq!(ck.slow.weights(), slow.weights());
        // product regressor [4], stacked energy 4 + 16
        let h = ck.quadratic.coefficients()[0];
        assert!((h - 3.0 * 4.0 / 20.0).abs() < 1e-9, "{h}");
        assert_eq!(ck.zeros().coefficients(), &[0.0]);
    }
}
