//! Two-filter convex and affine combinations.
//!
//! The combined output is `y = lambda y1 + (1 - lambda) y2`. The mixing
//! parameter is itself learned by a one-tap "second layer" filter driven by the
//! global error `e = d - y` and the difference signal `y1 - y2`:
//!
//! | rule         | update                                                        |
//! |--------------|---------------------------------------------------------------|
//! | `AffLms`     | `lambda += mu e (y1 - y2)`                                    |
//! | `AffPnLms`   | `lambda += mu / (eps + p) e (y1 - y2)`                        |
//! | `CvxLms`     | `a += mu g e (y1 - y2)`, `lambda = act(a)`                    |
//! | `CvxPnLms`   | `a += mu / (eps + p) g e (y1 - y2)`, `lambda = act(a)`        |
//!
//! with `p = eta p + (1 - eta)(y1 - y2)^2`, `g = sgm(a)(1 - sgm(a))` and `a`
//! saturated to `[-a_max, a_max]`.

use crate::error::{invalid, Error, Result};

pub const DEFAULT_A_MAX: f64 = 4.0;
pub const DEFAULT_ETA: f64 = 0.9;
pub const DEFAULT_EPS: f64 = 1e-8;

/// Learning rule for the mixing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixingRule {
    AffLms,
    AffPnLms,
    CvxLms,
    CvxPnLms,
}

impl MixingRule {
    pub fn is_convex(self) -> bool {
        matches!(self, MixingRule::CvxLms | MixingRule::CvxPnLms)
    }

    pub fn is_power_normalized(self) -> bool {
        matches!(self, MixingRule::AffPnLms | MixingRule::CvxPnLms)
    }

    /// Activation used unless overridden: plain sigmoid for cvx-LMS, the
    /// scaled sigmoid for cvx-PN-LMS.
    pub fn default_activation(self) -> Activation {
        match self {
            MixingRule::CvxPnLms => Activation::ScaledSigmoid,
            _ => Activation::Sigmoid,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MixingRule::AffLms => "aff-LMS",
            MixingRule::AffPnLms => "aff-PN-LMS",
            MixingRule::CvxLms => "cvx-LMS",
            MixingRule::CvxPnLms => "cvx-PN-LMS",
        }
    }
}

/// Map from the auxiliary parameter `a` to `lambda` (convex rules only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Sigmoid,
    /// Sigmoid rescaled so that `a = +-a_max` maps to exactly 1 and 0.
    ScaledSigmoid,
}

/// `lambda y1 + (1 - lambda) y2`, evaluated as `y2 + lambda (y1 - y2)` so that
/// equal inputs are reproduced exactly for any `lambda`.
#[inline]
pub fn combine_outputs(lambda: f64, y1: f64, y2: f64) -> f64 {
    y2 + lambda * (y1 - y2)
}

/// `lambda w1 + (1 - lambda) w2`. The shorter vector is zero-padded.
pub fn combine_weights(lambda: f64, w1: &[f64], w2: &[f64]) -> Vec<f64> {
    let len = w1.len().max(w2.len());
    (0..len)
        .map(|i| {
            let a = w1.get(i).copied().unwrap_or(0.0);
            let b = w2.get(i).copied().unwrap_or(0.0);
            lambda * a + (1.0 - lambda) * b
        })
        .collect()
}

/// Logistic sigmoid `1 / (1 + e^-a)`.
#[inline]
pub fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// Scaled and shifted sigmoid reaching 0 and 1 at `a = -a_max` and `a = a_max`.
///
/// `a` must already be truncated to `[-a_max, a_max]`.
pub fn scaled_sigmoid(a: f64, a_max: f64) -> Result<f64> {
    if !(a_max > 0.0) {
        return Err(invalid(format!("a_max must be positive, got {a_max}")));
    }
    if !(a.abs() <= a_max) {
        return Err(invalid(format!("a = {a} outside [-{a_max}, {a_max}]")));
    }
    let lo = sigmoid(-a_max);
    let hi = sigmoid(a_max);
    Ok((sigmoid(a) - lo) / (hi - lo))
}

/// One step of the low-pass power estimate of `y1 - y2`.
#[inline]
pub fn update_power(p: f64, y1: f64, y2: f64, eta: f64) -> f64 {
    let diff = y1 - y2;
    eta * p + (1.0 - eta) * (diff * diff)
}

/// State of the second-layer filter that learns the mixing parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MixerState {
    lambda: f64,
    a: f64,
    p: f64,
    rule: MixingRule,
    activation: Activation,
    step: f64,
    eta: f64,
    eps: f64,
    a_max: f64,
}

impl MixerState {
    /// Neutral start (`lambda = 0.5`, `a = 0`, `p = 0`) with default constants.
    pub fn new(rule: MixingRule, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("mixer step size must be positive, got {step}")));
        }
        Ok(MixerState {
            lambda: 0.5,
            a: 0.0,
            p: 0.0,
            rule,
            activation: rule.default_activation(),
            step,
            eta: DEFAULT_ETA,
            eps: DEFAULT_EPS,
            a_max: DEFAULT_A_MAX,
        })
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self.refresh_lambda();
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(invalid(format!("eta = {eta} out of [0, 1)")));
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(invalid(format!("eps must be positive, got {eps}")));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_a_max(mut self, a_max: f64) -> Result<Self> {
        if !(a_max > 0.0 && a_max.is_finite()) {
            return Err(invalid(format!("a_max must be positive, got {a_max}")));
        }
        self.a_max = a_max;
        self.a = self.a.clamp(-a_max, a_max);
        self.refresh_lambda();
        Ok(self)
    }

    /// Set the auxiliary parameter (convex rules), clamped to `[-a_max, a_max]`.
    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a.clamp(-self.a_max, self.a_max);
        self.refresh_lambda();
        self
    }

    /// Set `lambda` directly (affine rules).
    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if self.rule.is_convex() {
            return Err(invalid("convex mixers are initialized through `a`"));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn power(&self) -> f64 {
        self.p
    }

    pub fn rule(&self) -> MixingRule {
        self.rule
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// Range `lambda` can take under the current rule and activation.
    pub fn lambda_bounds(&self) -> (f64, f64) {
        match (self.rule.is_convex(), self.activation) {
            (false, _) => (f64::NEG_INFINITY, f64::INFINITY),
            (true, Activation::ScaledSigmoid) => (0.0, 1.0),
            (true, Activation::Sigmoid) => (sigmoid(-self.a_max), sigmoid(self.a_max)),
        }
    }

    /// Combined output with the current mixing parameter.
    #[inline]
    pub fn output(&self, y1: f64, y2: f64) -> f64 {
        combine_outputs(self.lambda, y1, y2)
    }

    /// Advance the mixing parameter with global error `e` and component outputs.
    pub fn step(&mut self, e: f64, y1: f64, y2: f64) -> Result<()> {
        if self.rule.is_convex() {
            self.cvx_step(e, y1, y2)
        } else {
            self.aff_step(e, y1, y2)
        }
    }

    /// aff-LMS / aff-PN-LMS update of `lambda`.
    pub fn aff_step(&mut self, e: f64, y1: f64, y2: f64) -> Result<()> {
        if self.rule.is_convex() {
            return Err(invalid("aff_step called on a convex mixer"));
        }
        let diff = y1 - y2;
        let gain = if self.rule.is_power_normalized() {
            self.p = update_power(self.p, y1, y2, self.eta);
            self.step / (self.eps + self.p)
        } else {
            self.step
        };
        self.lambda += gain * e * diff;
        if !self.lambda.is_finite() {
            return Err(Error::NonFinite("mixing parameter"));
        }
        Ok(())
    }

    /// cvx-LMS / cvx-PN-LMS update of `a`, followed by saturation and the
    /// activation.
    pub fn cvx_step(&mut self, e: f64, y1: f64, y2: f64) -> Result<()> {
        if !self.rule.is_convex() {
            return Err(invalid("cvx_step called on an affine mixer"));
        }
        let diff = y1 - y2;
        let s = sigmoid(self.a);
        let g = match self.activation {
            Activation::Sigmoid => self.lambda * (1.0 - self.lambda),
            Activation::ScaledSigmoid => s * (1.0 - s),
        };
        let gain = if self.rule.is_power_normalized() {
            self.p = update_power(self.p, y1, y2, self.eta);
            self.step / (self.eps + self.p)
        } else {
            self.step
        };
        let a = self.a + gain * g * e * diff;
        if !a.is_finite() {
            return Err(Error::NonFinite("auxiliary mixing parameter"));
        }
        self.a = a.clamp(-self.a_max, self.a_max);
        self.refresh_lambda();
        Ok(())
    }

    fn refresh_lambda(&mut self) {
        if !self.rule.is_convex() {
            return;
        }
        self.lambda = match self.activation {
            Activation::Sigmoid => sigmoid(self.a),
            Activation::ScaledSigmoid => {
                scaled_sigmoid(self.a, self.a_max).expect("a is kept inside [-a_max, a_max]")
            }
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn combine_outputs_examples() {
        assert_eq!(combine_outputs(1.0, 2.0, 4.0), 2.0);
        assert_eq!(combine_outputs(0.0, 2.0, 4.0), 4.0);
        assert_eq!(combine_outputs(0.5, 2.0, 4.0), 3.0);
        assert_eq!(combine_outputs(-0.5, 1.0, 2.0), 2.5);
    }

    #[test]
    fn combine_weights_examples() {
        assert_eq!(combine_weights(1.0, &[1.0, 2.0], &[3.0, 4.0]), vec![1.0, 2.0]);
        assert_eq!(combine_weights(0.5, &[1.0, 0.0], &[0.0, 1.0]), vec![0.5, 0.5]);
        assert_eq!(combine_weights(0.5, &[1.0, 1.0], &[0.0, 0.0, 1.0]), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_abs_diff_eq!(sigmoid(4.0), 0.9820, epsilon = 5e-5);
        assert_abs_diff_eq!(sigmoid(1.3) + sigmoid(-1.3), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn scaled_sigmoid_examples() {
        assert_eq!(scaled_sigmoid(4.0, 4.0).unwrap(), 1.0);
        assert_eq!(scaled_sigmoid(-4.0, 4.0).unwrap(), 0.0);
        assert_abs_diff_eq!(scaled_sigmoid(0.0, 4.0).unwrap(), 0.5, epsilon = 1e-15);
        // (sgm(2) - sgm(-4)) / (sgm(4) - sgm(-4))
        let expected = (0.8807970779778823 - 0.01798620996209156) / (0.9820137900379085 - 0.01798620996209156);
        assert_abs_diff_eq!(scaled_sigmoid(2.0, 4.0).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.8950, epsilon = 5e-5);
        assert!(scaled_sigmoid(4.5, 4.0).is_err());
    }

    #[test]
    fn power_examples() {
        assert_eq!(update_power(2.0, 1.5, 1.5, 0.9), 0.9 * 2.0);
        assert_abs_diff_eq!(update_power(0.0, 1.0, 0.0, 0.9), 0.1, epsilon = 1e-16);
        let mut p = 0.0;
        for _ in 0..500 {
            p = update_power(p, 3.0, 1.0, 0.9);
        }
        assert_abs_diff_eq!(p, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn aff_examples() {
        let mut m = MixerState::new(MixingRule::AffLms, 0.1).unwrap();
        m.step(1.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(m.lambda(), 0.7, epsilon = 1e-15);

        let mut m = MixerState::new(MixingRule::AffPnLms, 0.1).unwrap();
        m.step(3.0, 1.25, 1.25).unwrap();
        assert_eq!(m.lambda(), 0.5);

        // with p >> diff^2 the normalized rule moves less
        let mut plain = MixerState::new(MixingRule::AffLms, 0.1).unwrap();
        let mut pn = MixerState::new(MixingRule::AffPnLms, 0.1).unwrap();
        for _ in 0..50 {
            pn.step(0.0, 10.0, 0.0).unwrap(); // charge p without moving lambda
        }
        assert!(pn.power() > 1.0);
        plain.step(1.0, 0.1, 0.0).unwrap();
        pn.step(1.0, 0.1, 0.0).unwrap();
        assert!((pn.lambda() - 0.5).abs() < (plain.lambda() - 0.5).abs());
    }

    #[test]
    fn cvx_examples() {
        let mut m = MixerState::new(MixingRule::CvxLms, 1.0).unwrap();
        m.step(0.0, 3.0, 1.0).unwrap();
        assert_eq!((m.a(), m.lambda()), (0.0, 0.5));

        assert_eq!(m.lambda() * (1.0 - m.lambda()), 0.25);
        m.step(1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.a(), 0.25);
        assert_abs_diff_eq!(m.lambda(), 0.5622, epsilon = 5e-5);
        assert_eq!(m.lambda(), sigmoid(0.25));
    }

    #[test]
    fn cvx_pn_first_step_uses_eps_floor() {
        let mut m = MixerState::new(MixingRule::CvxPnLms, 1.0).unwrap();
        // both outputs zero: p stays zero, the update is exactly zero
        m.step(1.0, 0.0, 0.0).unwrap();
        assert_eq!(m.a(), 0.0);
        m.step(1.0, 1e-3, 0.0).unwrap();
        assert!(m.a().is_finite());
    }

    #[test]
    fn affine_divergence_is_reported() {
        let mut m = MixerState::new(MixingRule::AffLms, 1e300).unwrap();
        assert_eq!(m.step(1e300, 1e10, 0.0), Err(Error::NonFinite("mixing parameter")));
    }

    #[test]
    fn wrong_rule_calls_are_rejected() {
        let mut m = MixerState::new(MixingRule::AffLms, 1.0).unwrap();
        assert!(m.cvx_step(1.0, 1.0, 0.0).is_err());
        let mut m = MixerState::new(MixingRule::CvxLms, 1.0).unwrap();
        assert!(m.aff_step(1.0, 1.0, 0.0).is_err());
        assert!(MixerState::new(MixingRule::CvxLms, 1.0).unwrap().with_eta(1.2).is_err());
    }

    /// Sample EMSE of the lambda-mixed a-priori error matches the quadratic form
    /// `l^2 z1 + (1-l)^2 z2 + 2 l (1-l) z12` within three standard errors.
    #[test]
    fn mixed_emse_matches_quadratic_form() {
        let (z1, z2, z12) = (1.0_f64, 2.0_f64, 0.5_f64);
        // Cholesky of [[z1, z12], [z12, z2]]
        let l11 = z1.sqrt();
        let l21 = z12 / l11;
        let l22 = (z2 - l21 * l21).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        for &lambda in &[-0.5, 0.0, 0.3, 0.75, 1.4] {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let g1: f64 = StandardNormal.sample(&mut rng);
                let g2: f64 = StandardNormal.sample(&mut rng);
                let ea1 = l11 * g1;
                let ea2 = l21 * g1 + l22 * g2;
                let ea = combine_outputs(lambda, ea1, ea2);
                sum += ea * ea;
                sum_sq += ea.powi(4);
            }
            let mean = sum / n as f64;
            let sd = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
            let theory = lambda * lambda * z1
                + (1.0 - lambda).powi(2) * z2
                + 2.0 * lambda * (1.0 - lambda) * z12;
            assert!((mean - theory).abs() < 3.0 * sd, "lambda {lambda}: {mean} vs {theory}");
        }
    }

    fn rule_strategy() -> impl Strategy<Value = MixingRule> {
        prop_oneof![Just(MixingRule::CvxLms), Just(MixingRule::CvxPnLms)]
    }

    proptest! {
        #[test]
        fn combine_equal_outputs_is_identity(lambda in -10.0..10.0f64, y in -1e6..1e6f64) {
            prop_assert_eq!(combine_outputs(lambda, y, y), y);
        }

        #[test]
        fn convex_rules_keep_lambda_in_range(
            rule in rule_strategy(),
            scaled in any::<bool>(),
            step in 0.01..1e4f64,
            seq in prop::collection::vec((-10.0..10.0f64, -5.0..5.0f64, -5.0..5.0f64), 1..200),
        ) {
            let act = if scaled { Activation::ScaledSigmoid } else { Activation::Sigmoid };
            let mut m = MixerState::new(rule, step).unwrap().with_activation(act);
            let (lo, hi) = m.lambda_bounds();
            for (e, y1, y2) in seq {
                m.step(e, y1, y2).unwrap();
                prop_assert!(m.a().abs() <= m.a_max());
                prop_assert!(m.lambda() >= lo && m.lambda() <= hi);
                prop_assert!((0.0..=1.0).contains(&m.lambda()));
                prop_assert!(m.power() >= 0.0);
            }
        }
    }
}
