//! Communication between the two component filters of a combination.
//!
//! Filter 1 is the fast filter by convention. All policies are evaluated after
//! the mixer update of the current sample, so `lambda` is the freshly updated
//! value.

use crate::combo2::combine_weights;
use crate::error::{check_len, invalid, Result};

/// Weight transfer policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TransferPolicy {
    #[default]
    None,
    /// `w2 <- leak w2 + (1 - leak) w1` whenever `lambda >= threshold`.
    Gradual { leak: f64, threshold: f64 },
    /// `w2 <- w1` when `lambda >= threshold` and `n` is a multiple of `period`.
    Copy { threshold: f64, period: usize },
    /// `w1, w2 <- lambda w1 + (1 - lambda) w2` every `period` samples.
    Feedback { period: usize },
}

impl TransferPolicy {
    pub fn validate(&self) -> Result<()> {
        let check_threshold = |t: f64| {
            if t > 0.0 && t < 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("transfer threshold {t} not in (0, 1)")))
            }
        };
        let check_period = |p: usize| {
            if p >= 2 {
                Ok(())
            } else {
                Err(invalid(format!("transfer period {p} must be at least 2")))
            }
        };
        match *self {
            TransferPolicy::None => Ok(()),
            TransferPolicy::Gradual { leak, threshold } => {
                if !(leak > 0.0 && leak < 1.0) {
                    return Err(invalid(format!("leak {leak} not in (0, 1)")));
                }
                check_threshold(threshold)
            }
            TransferPolicy::Copy { threshold, period } => {
                check_threshold(threshold)?;
                check_period(period)
            }
            TransferPolicy::Feedback { period } => check_period(period),
        }
    }

    /// Apply the policy at sample `n`. Returns whether weights were modified.
    pub fn maybe_transfer(
        &self,
        n: usize,
        lambda: f64,
        w1: &mut [f64],
        w2: &mut [f64],
    ) -> Result<bool> {
        check_len(w1.len(), w2.len())?;
        match *self {
            TransferPolicy::None => Ok(false),
            TransferPolicy::Gradual { leak, threshold } => {
                if lambda < threshold {
                    return Ok(false);
                }
                for (slow, fast) in w2.iter_mut().zip(w1.iter()) {
                    *slow = leak * *slow + (1.0 - leak) * fast;
                }
                Ok(true)
            }
            TransferPolicy::Copy { threshold, period } => {
                if lambda < threshold || n % period != 0 {
                    return Ok(false);
                }
                w2.copy_from_slice(w1);
                Ok(true)
            }
            TransferPolicy::Feedback { period } => {
                if n % period != 0 {
                    return Ok(false);
                }
                let w = combine_weights(lambda, w1, w2);
                w1.copy_from_slice(&w);
                w2.copy_from_slice(&w);
                Ok(true)
            }
        }
    }
}
