//! Input regressors: white or first-order autoregressive tapped delay lines.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};

/// Distribution of innovations and additive noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Density {
    #[default]
    Gaussian,
    Laplacian,
}

impl Density {
    /// Zero-mean, unit-variance draw.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Density::Gaussian => StandardNormal.sample(rng),
            Density::Laplacian => {
                // inverse CDF with scale 1/sqrt(2)
                let p: f64 = rng.random::<f64>() - 0.5;
                -p.signum() * (1.0 - 2.0 * p.abs()).ln() * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }
}

/// Stationary input process feeding a tapped delay line.
///
/// The covariance of the regressor is `variance * rho^|i-j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputModel {
    pub variance: f64,
    pub rho: f64,
    pub innovations: Density,
}

impl InputModel {
    pub fn white(variance: f64) -> Result<Self> {
        Self::ar1(variance, 0.0)
    }

    pub fn ar1(variance: f64, rho: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(invalid(format!("input variance must be positive, got {variance}")));
        }
        if !(rho.abs() < 1.0) {
            return Err(invalid(format!("AR coefficient must satisfy |rho| < 1, got {rho}")));
        }
        Ok(InputModel { variance, rho, innovations: Density::Gaussian })
    }

    pub fn with_innovations(mut self, d: Density) -> Self {
        self.innovations = d;
        self
    }

    /// Fit an exact AR(1) to a geometric first row `r0 [1, rho, rho^2, ...]`.
    pub fn from_first_row(row: &[f64]) -> Result<Self> {
        let r0 = *row.first().ok_or_else(|| invalid("empty first row"))?;
        if row.len() == 1 {
            return Self::white(r0);
        }
        let rho = row[1] / r0;
        for (k, &r) in row.iter().enumerate() {
            let expected = r0 * rho.powi(k as i32);
            if (r - expected).abs() > 1e-9 * r0.abs() {
                return Err(invalid(format!(
                    "first row is not geometric at lag {k}: {r} vs {expected}"
                )));
            }
        }
        Self::ar1(r0, rho)
    }

    pub fn covariance(&self, len: usize) -> DMatrix<f64> {
        DMatrix::from_fn(len, len, |i, j| self.variance * self.rho.powi(i.abs_diff(j) as i32))
    }

    pub fn trace(&self, len: usize) -> f64 {
        self.variance * len as f64
    }
}

/// Tapped delay line driven by an [`InputModel`]; `u[0]` is the newest sample.
#[derive(Debug, Clone)]
pub struct DelayLine {
    model: InputModel,
    // each sample is written twice so the regressor is always contiguous
    buf: Vec<f64>,
    pos: usize,
    len: usize,
    last: f64,
}

impl DelayLine {
    /// Pre-filled from the stationary distribution, so `u(0)` is already stationary.
    pub fn new<R: Rng + ?Sized>(model: InputModel, len: usize, rng: &mut R) -> Result<Self> {
        if len == 0 {
            return Err(invalid("regressor length must be positive"));
        }
        let mut line = DelayLine { model, buf: vec![0.0; 2 * len], pos: 0, len, last: 0.0 };
        line.last = model.innovations.sample(rng) * model.variance.sqrt();
        line.push(line.last);
        for _ in 1..len {
            line.advance(rng);
        }
        Ok(line)
    }

    fn push(&mut self, x: f64) {
        self.pos = (self.pos + self.len - 1) % self.len;
        self.buf[self.pos] = x;
        self.buf[self.pos + self.len] = x;
    }

    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let m = &self.model;
        let innov = m.innovations.sample(rng) * (m.variance * (1.0 - m.rho * m.rho)).sqrt();
        self.last = m.rho * self.last + innov;
        self.push(self.last);
    }

    /// Shift in one new sample and return the regressor.
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[f64] {
        self.advance(rng);
        self.regressor()
    }

    pub fn regressor(&self) -> &[f64] {
        &self.buf[self.pos..self.pos + self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn regressor_is_a_delay_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut line = DelayLine::new(InputModel::white(1.0).unwrap(), 4, &mut rng).unwrap();
        let mut history = line.regressor().to_vec();
        for _ in 0..11 {
            let u = line.next(&mut rng).to_vec();
            assert_eq!(&u[1..], &history[..3]);
            history = u;
        }
    }

    #[test]
    fn first_row_fit() {
        let row: Vec<f64> = (0..7).map(|k| 0.8f64.powi(k) / 7.0).collect();
        let m = InputModel::from_first_row(&row).unwrap();
        assert!((m.rho - 0.8).abs() < 1e-15);
        assert!((m.variance - 1.0 / 7.0).abs() < 1e-15);
        assert!(InputModel::from_first_row(&[1.0, 0.5, 0.3]).is_err());
        assert_eq!(InputModel::from_first_row(&[2.0]).unwrap().rho, 0.0);
    }

    fn sample_covariance(model: InputModel, dist: Density) -> (DMatrix<f64>, DMatrix<f64>) {
        let m = 7;
        let model = model.with_innovations(dist);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut line = DelayLine::new(model, m, &mut rng).unwrap();
        let n = 100_000;
        let mut acc = DMatrix::<f64>::zeros(m, m);
        for _ in 0..n {
            let u = nalgebra::DVector::from_column_slice(line.next(&mut rng));
            acc += &u * u.transpose();
        }
        (acc / n as f64, model.covariance(m))
    }

    #[test]
    fn sample_covariance_matches_toeplitz() {
        let row: Vec<f64> = (0..7).map(|k| 0.8f64.powi(k) / 7.0).collect();
        let model = InputModel::from_first_row(&row).unwrap();
        for dist in [Density::Gaussian, Density::Laplacian] {
            let (est, r) = sample_covariance(model, dist);
            let rel = (&est - &r).norm() / r.norm();
            assert!(rel < 0.05, "{dist:?}: relative Frobenius error {rel}");
        }
    }

    #[test]
    fn laplacian_has_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = Density::Laplacian.sample(&mut rng);
            s1 += x;
            s2 += x * x;
        }
        assert!((s1 / n as f64).abs() < 0.01);
        assert!((s2 / n as f64 - 1.0).abs() < 0.02);
    }
}
