//! Two component filters, a mixer and a transfer policy stepped as one unit.

use crate::combo2::MixerState;
use crate::error::{check_len, Result};
use crate::filters::AdaptiveFilter;
use crate::transfer::TransferPolicy;

/// Everything observed during one sample of a [`CombinedPair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStep {
    pub y1: f64,
    pub y2: f64,
    /// Combined output, formed with `lambda`.
    pub y: f64,
    /// Global error `d - y`.
    pub e: f64,
    /// Mixing parameter used for `y` (before this sample's update).
    pub lambda: f64,
    pub transferred: bool,
}

/// Convex or affine combination of two filters.
///
/// Per sample: both filters predict, the combined output is formed, each
/// filter adapts on its own error, the mixer steps on the global error and
/// finally the transfer policy is evaluated with the updated `lambda`.
#[derive(Debug, Clone)]
pub struct CombinedPair<A, B> {
    pub first: A,
    pub second: B,
    pub mixer: MixerState,
    transfer: TransferPolicy,
    n: usize,
    transfers: usize,
}

impl<A: AdaptiveFilter, B: AdaptiveFilter> CombinedPair<A, B> {
    pub fn new(first: A, second: B, mixer: MixerState) -> Self {
        CombinedPair { first, second, mixer, transfer: TransferPolicy::None, n: 0, transfers: 0 }
    }

    /// Attach a transfer policy. Both filters must have the same length.
    pub fn with_transfer(mut self, policy: TransferPolicy) -> Result<Self> {
        policy.validate()?;
        if policy != TransferPolicy::None {
            check_len(self.first.len(), self.second.len())?;
        }
        self.transfer = policy;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.mixer.lambda()
    }

    /// Samples processed so far.
    pub fn samples(&self) -> usize {
        self.n
    }

    /// Number of samples at which the transfer policy fired.
    pub fn transfer_count(&self) -> usize {
        self.transfers
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        Ok(self.mixer.output(self.first.predict(u)?, self.second.predict(u)?))
    }

    /// Combined weight vector `lambda w1 + (1 - lambda) w2` (zero-padded).
    pub fn combined_weights(&self) -> Vec<f64> {
        crate::combo2::combine_weights(self.lambda(), self.first.weights(), self.second.weights())
    }

    pub fn step(&mut self, u: &[f64], d: f64) -> Result<PairStep> {
        let y1 = self.first.predict(u)?;
        let y2 = self.second.predict(u)?;
        let lambda = self.mixer.lambda();
        let y = self.mixer.output(y1, y2);
        let e = d - y;
        self.first.update(u, d - y1)?;
        self.second.update(u, d - y2)?;
        self.mixer.step(e, y1, y2)?;
        let transferred = self.transfer.maybe_transfer(
            self.n,
            self.mixer.lambda(),
            self.first.weights_mut(),
            self.second.weights_mut(),
        )?;
        if transferred {
            self.transfers += 1;
        }
        self.n += 1;
        Ok(PairStep { y1, y2, y, e, lambda, transferred })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combo2::MixingRule;
    use crate::filters::FilterState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair() -> CombinedPair<FilterState, FilterState> {
        CombinedPair::new(
            FilterState::nlms(4, 0.5).unwrap(),
            FilterState::nlms(4, 0.01).unwrap(),
            MixerState::new(MixingRule::CvxPnLms, 0.5).unwrap(),
        )
    }

    #[test]
    fn none_policy_matches_plain_combination() {
        let mut a = pair();
        let mut b = pair().with_transfer(TransferPolicy::None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20_000 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let d = 0.3 * u[0] - u[2] + 0.01 * rng.random_range(-1.0..1.0);
            let sa = a.step(&u, d).unwrap();
            let sb = b.step(&u, d).unwrap();
            assert_eq!(sa.y.to_bits(), sb.y.to_bits());
        }
        assert_eq!(a.first.weights(), b.first.weights());
        assert_eq!(a.second.weights(), b.second.weights());
        assert_eq!(a.lambda().to_bits(), b.lambda().to_bits());
    }

    #[test]
    fn copy_fires_only_above_threshold() {
        let threshold = 0.982;
        let mut p = pair()
            .with_transfer(TransferPolicy::Copy { threshold, period: 2 })
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 0..30_000 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sign = if n < 15_000 { 1.0 } else { -1.0 };
            let d = sign * (u[0] + 0.5 * u[1]) + 0.01 * rng.random_range(-1.0..1.0);
            let s = p.step(&u, d).unwrap();
            if s.transferred {
                assert!(p.lambda() >= threshold);
                assert_eq!(n % 2, 0);
                assert_eq!(p.first.weights(), p.second.weights());
            }
        }
        assert!(p.transfer_count() > 0);
    }

    #[test]
    fn transfer_needs_equal_lengths() {
        let p = CombinedPair::new(
            FilterState::nlms(4, 0.5).unwrap(),
            FilterState::nlms(3, 0.01).unwrap(),
            MixerState::new(MixingRule::CvxPnLms, 0.5).unwrap(),
        );
        assert!(p.with_transfer(TransferPolicy::Feedback { period: 4 }).is_err());
    }
}
