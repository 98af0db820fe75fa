//! Component adaptive filters.
//!
//! Every filter exposes the same two-step contract: [`AdaptiveFilter::predict`]
//! computes `y = u'w` without touching the state, and [`AdaptiveFilter::update`]
//! applies one correction for a given error. [`AdaptiveFilter::adapt`] chains the
//! two with the filter's own error `e = d - y`. Combination layers only ever
//! need outputs, so they work with any implementor.
//!
//! ```
//! use adacomb::{AdaptiveFilter, FilterState};
//!
//! let mut f = FilterState::lms(1, 0.5).unwrap();
//! let step = f.adapt(&[1.0], 1.0).unwrap();
//! assert_eq!((step.output, step.error), (0.0, 1.0));
//! assert_eq!(f.weights(), &[0.5]);
//! ```

use crate::error::{check_len, invalid, Error, Result};

/// Default NLMS regularizer.
pub const DEFAULT_NLMS_EPS: f64 = 1e-8;
/// Default RLS initialization, `P(0) = I / delta`.
pub const DEFAULT_RLS_DELTA: f64 = 1e-2;

/// Output and error of one adaptation step. `error == d - output` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub output: f64,
    pub error: f64,
}

/// Shared predict/update contract for everything that can sit under a mixer.
pub trait AdaptiveFilter {
    /// Number of coefficients.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn weights(&self) -> &[f64];

    fn weights_mut(&mut self) -> &mut [f64];

    /// `u'w`. Does not mutate the filter.
    fn predict(&self, u: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        Ok(crate::dot(u, self.weights()))
    }

    /// Apply one correction driven by `error` on regressor `u`.
    fn update(&mut self, u: &[f64], error: f64) -> Result<()>;

    /// Predict, form the filter's own error and update.
    fn adapt(&mut self, u: &[f64], d: f64) -> Result<StepResult> {
        if !d.is_finite() {
            return Err(Error::NonFinite("desired signal"));
        }
        let output = self.predict(u)?;
        let error = d - output;
        self.update(u, error)?;
        Ok(StepResult { output, error })
    }
}

/// Update law and its hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Lms { step: f64 },
    Nlms { step: f64, eps: f64 },
    /// Exponentially weighted RLS with forgetting factor `1 - beta`.
    Rls { forgetting: f64, delta: f64 },
    /// NLMS followed by an l1 zero attractor of weight `rho`.
    ZaNlms { step: f64, eps: f64, rho: f64 },
}

impl Algorithm {
    fn validate(&self) -> Result<()> {
        match *self {
            Algorithm::Lms { step } => positive("step size", step),
            Algorithm::Nlms { step, eps } => {
                positive("step size", step)?;
                non_negative("eps", eps)
            }
            Algorithm::Rls { forgetting, delta } => {
                if !(forgetting > 0.0 && forgetting <= 1.0) {
                    return Err(invalid(format!("forgetting factor {forgetting} not in (0, 1]")));
                }
                positive("delta", delta)
            }
            Algorithm::ZaNlms { step, eps, rho } => {
                positive("step size", step)?;
                non_negative("eps", eps)?;
                non_negative("rho", rho)
            }
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be non-negative and finite, got {x}")))
    }
}

/// One component filter: weights, update law and per-algorithm state.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    weights: Vec<f64>,
    algorithm: Algorithm,
    /// Row-major M x M inverse correlation matrix, RLS only.
    inv_corr: Option<Vec<f64>>,
    /// Scratch for `P u`, RLS only.
    scratch: Vec<f64>,
}

impl FilterState {
    /// Zero-initialized filter of length `len`.
    pub fn new(len: usize, algorithm: Algorithm) -> Result<Self> {
        if len == 0 {
            return Err(invalid("filter length must be at least 1"));
        }
        algorithm.validate()?;
        let (inv_corr, scratch) = match algorithm {
            Algorithm::Rls { delta, .. } => {
                let mut p = vec![0.0; len * len];
                for i in 0..len {
                    p[i * len + i] = 1.0 / delta;
                }
                (Some(p), vec![0.0; len])
            }
            _ => (None, Vec::new()),
        };
        Ok(FilterState { weights: vec![0.0; len], algorithm, inv_corr, scratch })
    }

    pub fn lms(len: usize, step: f64) -> Result<Self> {
        Self::new(len, Algorithm::Lms { step })
    }

    pub fn nlms(len: usize, step: f64) -> Result<Self> {
        Self::new(len, Algorithm::Nlms { step, eps: DEFAULT_NLMS_EPS })
    }

    pub fn rls(len: usize, forgetting: f64) -> Result<Self> {
        Self::new(len, Algorithm::Rls { forgetting, delta: DEFAULT_RLS_DELTA })
    }

    pub fn za_nlms(len: usize, step: f64, rho: f64) -> Result<Self> {
        Self::new(len, Algorithm::ZaNlms { step, eps: DEFAULT_NLMS_EPS, rho })
    }

    /// Replace the initial weights. Length must match.
    pub fn with_weights(mut self, w: &[f64]) -> Result<Self> {
        check_len(self.weights.len(), w.len())?;
        self.weights.copy_from_slice(w);
        Ok(self)
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// RLS inverse correlation matrix (row-major), `None` for other algorithms.
    pub fn inverse_correlation(&self) -> Option<&[f64]> {
        self.inv_corr.as_deref()
    }

    fn update_lms(&mut self, u: &[f64], error: f64, step: f64) {
        let g = step * error;
        for (w, x) in self.weights.iter_mut().zip(u) {
            *w += g * x;
        }
    }

    fn update_nlms(&mut self, u: &[f64], error: f64, step: f64, eps: f64) -> Result<()> {
        let energy = crate::dot(u, u);
        if eps == 0.0 && energy == 0.0 {
            return Err(Error::DegenerateRegressor);
        }
        let g = step * error / (eps + energy);
        for (w, x) in self.weights.iter_mut().zip(u) {
            *w += g * x;
        }
        Ok(())
    }

    fn update_za(&mut self, u: &[f64], error: f64, step: f64, eps: f64, rho: f64) -> Result<()> {
        let energy = crate::dot(u, u);
        if eps == 0.0 && energy == 0.0 {
            return Err(Error::DegenerateRegressor);
        }
        let g = step * error / (eps + energy);
        // the attractor acts on w(n), before the gradient correction
        for (w, x) in self.weights.iter_mut().zip(u) {
            let pull = rho * sign(*w);
            *w += g * x;
            *w -= pull;
        }
        Ok(())
    }

    fn update_rls(&mut self, u: &[f64], error: f64, forgetting: f64) -> Result<()> {
        let m = self.weights.len();
        let p = self.inv_corr.as_mut().expect("RLS state carries P");
        let pu = &mut self.scratch;
        for (i, pu_i) in pu.iter_mut().enumerate() {
            *pu_i = crate::dot(&p[i * m..(i + 1) * m], u);
        }
        let denom = forgetting + crate::dot(u, pu);
        if !(denom > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        // gain k = P u / denom
        for (w, pu_i) in self.weights.iter_mut().zip(pu.iter()) {
            *w += pu_i / denom * error;
        }
        // P <- (P - k (P u)') / forgetting, then symmetrize
        let inv_f = 1.0 / forgetting;
        for i in 0..m {
            let ki = pu[i] / denom;
            for j in 0..m {
                p[i * m + j] = (p[i * m + j] - ki * pu[j]) * inv_f;
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let s = 0.5 * (p[i * m + j] + p[j * m + i]);
                p[i * m + j] = s;
                p[j * m + i] = s;
            }
            let d = p[i * m + i];
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NotPositiveDefinite);
            }
        }
        Ok(())
    }
}

/// `sgn(x)` with `sgn(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl AdaptiveFilter for FilterState {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn update(&mut self, u: &[f64], error: f64) -> Result<()> {
        check_len(self.weights.len(), u.len())?;
        if !error.is_finite() {
            return Err(Error::NonFinite("error signal"));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("regressor"));
        }
        match self.algorithm {
            Algorithm::Lms { step } => self.update_lms(u, error, step),
            Algorithm::Nlms { step, eps } => self.update_nlms(u, error, step, eps)?,
            Algorithm::Rls { forgetting, .. } => self.update_rls(u, error, forgetting)?,
            Algorithm::ZaNlms { step, eps, rho } => {
                if rho == 0.0 {
                    self.update_nlms(u, error, step, eps)?;
                } else {
                    self.update_za(u, error, step, eps, rho)?;
                }
            }
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("filter weights"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn predict_examples() {
        let f = FilterState::lms(3, 0.1).unwrap();
        assert_eq!(f.predict(&[1.0, -2.0, 3.0]).unwrap(), 0.0);

        let f = FilterState::lms(2, 0.1).unwrap().with_weights(&[1.0, 2.0]).unwrap();
        assert_eq!(f.predict(&[3.0, 4.0]).unwrap(), 11.0);

        let f = FilterState::lms(3, 0.1).unwrap().with_weights(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.predict(&[7.0, -5.0, 2.0]).unwrap(), -5.0);

        assert_eq!(
            f.predict(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn lms_examples() {
        let mut f = FilterState::lms(1, 0.5).unwrap();
        let s = f.adapt(&[1.0], 1.0).unwrap();
        assert_eq!(s, StepResult { output: 0.0, error: 1.0 });
        assert_eq!(f.weights(), &[0.5]);

        // zero error
        let mut f = FilterState::lms(2, 0.3).unwrap().with_weights(&[1.0, -1.0]).unwrap();
        f.adapt(&[2.0, 1.0], 1.0).unwrap();
        assert_eq!(f.weights(), &[1.0, -1.0]);

        // zero regressor
        let s = f.adapt(&[0.0, 0.0], 4.0).unwrap();
        assert_eq!(s, StepResult { output: 0.0, error: 4.0 });
        assert_eq!(f.weights(), &[1.0, -1.0]);

        assert_eq!(f.adapt(&[1.0, 0.0], f64::NAN), Err(Error::NonFinite("desired signal")));
    }

    #[test]
    fn nlms_examples() {
        let mut f = FilterState::new(2, Algorithm::Nlms { step: 1.0, eps: 0.0 }).unwrap();
        f.adapt(&[1.0, 1.0], 2.0).unwrap();
        assert_eq!(f.weights(), &[1.0, 1.0]);

        // full projection: a-posteriori residual vanishes
        let mut f = FilterState::new(3, Algorithm::Nlms { step: 1.0, eps: 0.0 })
            .unwrap()
            .with_weights(&[0.2, -0.1, 0.4])
            .unwrap();
        let u = [0.3, -1.2, 0.7];
        f.adapt(&u, 1.5).unwrap();
        assert_abs_diff_eq!(1.5 - f.predict(&u).unwrap(), 0.0, epsilon = 1e-14);

        // d = u'w leaves w unchanged
        let w = [0.5, 0.25];
        let mut f = FilterState::nlms(2, 0.7).unwrap().with_weights(&w).unwrap();
        f.adapt(&[2.0, 4.0], 2.0).unwrap();
        assert_eq!(f.weights(), &w);

        let mut f = FilterState::new(2, Algorithm::Nlms { step: 1.0, eps: 0.0 }).unwrap();
        assert_eq!(f.adapt(&[0.0, 0.0], 1.0), Err(Error::DegenerateRegressor));
    }

    #[test]
    fn rls_examples() {
        let mut f = FilterState::new(1, Algorithm::Rls { forgetting: 1.0, delta: 1.0 }).unwrap();
        f.adapt(&[1.0], 1.0).unwrap();
        assert_eq!(f.weights(), &[0.5]);
        assert_eq!(f.inverse_correlation().unwrap(), &[0.5]);

        // zero regressor: weights fixed, P scaled by 1/forgetting
        let mut f = FilterState::new(2, Algorithm::Rls { forgetting: 0.5, delta: 1.0 }).unwrap();
        f.adapt(&[0.0, 0.0], 3.0).unwrap();
        assert_eq!(f.weights(), &[0.0, 0.0]);
        assert_eq!(f.inverse_correlation().unwrap(), &[2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn rls_interpolates_noiseless_plant() {
        // After M independent regressors the (lightly regularized) LS solution
        // interpolates the plant.
        let wo = [0.7, -0.3, 1.1, 0.05];
        let mut f =
            FilterState::new(4, Algorithm::Rls { forgetting: 1.0, delta: 1e-9 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = crate::dot(&u, &wo);
            f.adapt(&u, d).unwrap();
        }
        for (w, o) in f.weights().iter().zip(wo) {
            assert_abs_diff_eq!(*w, o, epsilon = 1e-6);
        }
    }

    #[test]
    fn rls_matrix_stays_symmetric() {
        let mut f = FilterState::rls(6, 0.99).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let u: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = u[0] - 0.5 * u[3] + 0.01 * rng.random_range(-1.0..1.0);
            f.adapt(&u, d).unwrap();
            let p = f.inverse_correlation().unwrap();
            let mut resid: f64 = 0.0;
            for i in 0..6 {
                assert!(p[i * 6 + i] > 0.0);
                for j in 0..6 {
                    resid = resid.max((p[i * 6 + j] - p[j * 6 + i]).abs());
                }
            }
            assert!(resid < 1e-8);
        }
    }

    #[test]
    fn za_examples() {
        let mut f = FilterState::za_nlms(2, 0.5, 1e-6).unwrap();
        f.adapt(&[0.0, 0.0], 3.0).unwrap();
        assert_eq!(f.weights(), &[0.0, 0.0]);

        let mut f = FilterState::za_nlms(2, 0.5, 0.1).unwrap().with_weights(&[0.5, -0.5]).unwrap();
        f.adapt(&[0.0, 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(f.weights()[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(f.weights()[1], -0.4, epsilon = 1e-15);
    }

    #[test]
    fn za_with_zero_rho_is_nlms() {
        let mut za = FilterState::za_nlms(5, 0.3, 0.0).unwrap();
        let mut nl = FilterState::nlms(5, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let u: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = rng.random_range(-1.0..1.0);
            let a = za.adapt(&u, d).unwrap();
            let b = nl.adapt(&u, d).unwrap();
            assert_eq!(a.output.to_bits(), b.output.to_bits());
        }
        let bits = |f: &FilterState| f.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&za), bits(&nl));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FilterState::lms(0, 0.1).is_err());
        assert!(FilterState::lms(3, 0.0).is_err());
        assert!(FilterState::rls(3, 1.5).is_err());
        assert!(FilterState::za_nlms(3, 0.1, -1.0).is_err());
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign(0.0), 0.0);
        assert_eq!(sign(-0.0), 0.0);
        assert_eq!(sign(-3.0), -1.0);
    }
}
