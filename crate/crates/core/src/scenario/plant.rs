//! Unknown system: initial weights, random-walk drift and abrupt changes.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, invalid, Error, Result};
use crate::theory::q_mixture;

/// How a weight vector is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Fixed(Vec<f64>),
    /// i.i.d. Gaussian entries, rescaled to the given Euclidean norm.
    Gaussian { norm: f64 },
    /// `active` Gaussian entries at random positions, the rest zero.
    Sparse { active: usize, norm: f64 },
    /// Negation of the current weights.
    Negate,
}

impl WeightSpec {
    pub fn draw<R: Rng + ?Sized>(&self, len: usize, current: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let scaled = |mut w: Vec<f64>, norm: f64| {
            let n = crate::dot(&w, &w).sqrt();
            if n > 0.0 {
                w.iter_mut().for_each(|x| *x *= norm / n);
            }
            w
        };
        match self {
            WeightSpec::Fixed(w) => {
                check_len(len, w.len())?;
                Ok(w.clone())
            }
            WeightSpec::Gaussian { norm } => {
                let w = (0..len).map(|_| StandardNormal.sample(rng)).collect();
                Ok(scaled(w, *norm))
            }
            WeightSpec::Sparse { active, norm } => {
                if *active == 0 || *active > len {
                    return Err(invalid(format!("active taps {active} not in 1..={len}")));
                }
                let mut w = vec![0.0; len];
                for i in sample_indices(rng, len, *active) {
                    w[i] = StandardNormal.sample(rng);
                }
                Ok(scaled(w, *norm))
            }
            WeightSpec::Negate => Ok(current.iter().map(|x| -x).collect()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::Gaussian { norm } | WeightSpec::Sparse { norm, .. } if !(*norm > 0.0) => {
                Err(invalid(format!("weight norm must be positive, got {norm}")))
            }
            WeightSpec::Fixed(w) if w.iter().any(|x| !x.is_finite()) => {
                Err(Error::NonFinite("fixed plant weights"))
            }
            _ => Ok(()),
        }
    }
}

/// Covariance of the random-walk increments.
#[derive(Debug, Clone, PartialEq)]
pub enum QSpec {
    /// `variance * I`.
    ScaledIdentity { variance: f64 },
    /// Mixture of `R` and `R^-1` with trace `scale`.
    Mixture { alpha: f64, scale: f64 },
    Explicit(DMatrix<f64>),
}

impl QSpec {
    pub fn matrix(&self, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let m = r.nrows();
        match self {
            QSpec::ScaledIdentity { variance } => {
                if !(*variance >= 0.0) {
                    return Err(invalid(format!("increment variance must be >= 0, got {variance}")));
                }
                Ok(DMatrix::from_diagonal_element(m, m, *variance))
            }
            QSpec::Mixture { alpha, scale } => q_mixture(r, *alpha, *scale),
            QSpec::Explicit(q) => {
                if q.nrows() != m || q.ncols() != m {
                    return Err(Error::DimensionMismatch { expected: m, found: q.nrows() });
                }
                Ok(q.clone())
            }
        }
    }
}

/// Replacement of the weights at sample `at`.
#[derive(Debug, Clone, PartialEq)]
pub struct Change {
    pub at: usize,
    pub weights: WeightSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub initial: WeightSpec,
    pub drift: Option<QSpec>,
    pub schedule: Vec<Change>,
}

impl PlantModel {
    pub fn fixed(initial: WeightSpec) -> Self {
        PlantModel { initial, drift: None, schedule: Vec::new() }
    }

    pub fn with_drift(mut self, q: QSpec) -> Self {
        self.drift = Some(q);
        self
    }

    pub fn with_change(mut self, at: usize, weights: WeightSpec) -> Self {
        self.schedule.push(Change { at, weights });
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        for c in &self.schedule {
            c.weights.validate()?;
        }
        if self.schedule.windows(2).any(|p| p[0].at >= p[1].at) {
            return Err(invalid("change times must be strictly increasing"));
        }
        if self.schedule.first().is_some_and(|c| c.at == 0) {
            return Err(invalid("a change at n = 0 replaces the initial weights; use `initial`"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Increment {
    None,
    Isotropic(f64),
    Factor(DMatrix<f64>),
}

/// Evolving plant state.
#[derive(Debug, Clone)]
pub struct Plant {
    w: Vec<f64>,
    increment: Increment,
    schedule: Vec<Change>,
    next_change: usize,
    z: DVector<f64>,
}

impl Plant {
    /// `r` is the input covariance, needed by the mixture increment model.
    pub fn new<R: Rng + ?Sized>(model: &PlantModel, r: &DMatrix<f64>, rng: &mut R) -> Result<Self> {
        model.validate()?;
        let len = r.nrows();
        let w = model.initial.draw(len, &vec![0.0; len], rng)?;
        let increment = match &model.drift {
            None => Increment::None,
            Some(QSpec::ScaledIdentity { variance }) => {
                QSpec::ScaledIdentity { variance: *variance }.matrix(r)?;
                if *variance == 0.0 {
                    Increment::None
                } else {
                    Increment::Isotropic(variance.sqrt())
                }
            }
            Some(spec) => {
                let q = spec.matrix(r)?;
                // symmetric square root tolerates singular Q
                let eig = q.symmetric_eigen();
                let scale = eig.eigenvalues.amax();
                if eig.eigenvalues.min() < -1e-10 * scale {
                    return Err(Error::NotPositiveDefinite);
                }
                let sqrt_l = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
                Increment::Factor(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt_l))
            }
        };
        Ok(Plant { w, increment, schedule: model.schedule.clone(), next_change: 0, z: DVector::zeros(len) })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Move from sample `n - 1` to sample `n`: add one increment (for
    /// `n > 0`), then apply any change scheduled at `n`.
    pub fn advance<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<()> {
        if n > 0 {
            match &self.increment {
                Increment::None => {}
                Increment::Isotropic(s) => {
                    for w in &mut self.w {
                        let z: f64 = StandardNormal.sample(rng);
                        *w += s * z;
                    }
                }
                Increment::Factor(f) => {
                    for z in self.z.iter_mut() {
                        *z = StandardNormal.sample(rng);
                    }
                    let q = f * &self.z;
                    for (w, dq) in self.w.iter_mut().zip(q.iter()) {
                        *w += dq;
                    }
                }
            }
        }
        while let Some(c) = self.schedule.get(self.next_change) {
            if c.at > n {
                break;
            }
            if c.at == n {
                self.w = c.weights.draw(self.w.len(), &self.w, rng)?;
            }
            self.next_change += 1;
        }
        Ok(())
    }
}
