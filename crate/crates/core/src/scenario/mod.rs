//! Synthetic data, Monte-Carlo ensembles and performance measures.
//!
//! A [`SignalSource`] produces one [`Sample`] per iteration. A [`Graph`]
//! consumes samples, adapts its filters and reports one value per channel.
//! [`run_ensemble`] averages those values over independent runs.

mod echo;
mod ensemble;
mod graphs;
mod input;
mod plant;

pub use echo::{erle, erle_db, EchoScenario, EchoSegment, EchoSource};
pub use ensemble::{
    run_ensemble, run_seed, DivergencePolicy, EnsembleConfig, EnsembleMetrics, Graph, Window,
    WindowStat,
};
pub use graphs::{FilterGraph, PairGraph};
pub use input::{DelayLine, Density, InputModel};
pub use plant::{Change, Plant, PlantModel, QSpec, WeightSpec};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Result};

/// One iteration of a data source.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub n: usize,
    pub u: &'a [f64],
    pub d: f64,
    /// Noise-free part of `d`.
    pub clean: f64,
    pub noise: f64,
    /// Current optimal weights when the source is a linear plant.
    pub w_o: Option<&'a [f64]>,
}

pub trait SignalSource {
    fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Sample<'_>>;
}

/// Additive noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Variance(f64),
    /// `w_o' R w_o / sigma_v^2` in dB, evaluated on the initial plant.
    SnrDb(f64),
}

/// Linear regression data `d = u' w_o + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScenario {
    pub len: usize,
    pub input: InputModel,
    pub plant: PlantModel,
    pub noise: NoiseLevel,
    pub noise_density: Density,
}

impl LinearScenario {
    pub fn new(len: usize, input: InputModel, plant: PlantModel, noise: NoiseLevel) -> Result<Self> {
        if len == 0 {
            return Err(invalid("filter length must be positive"));
        }
        plant.validate()?;
        match noise {
            NoiseLevel::Variance(v) if !(v >= 0.0 && v.is_finite()) => {
                return Err(invalid(format!("noise variance must be >= 0, got {v}")))
            }
            NoiseLevel::SnrDb(s) if !s.is_finite() => return Err(invalid("SNR must be finite")),
            _ => {}
        }
        Ok(LinearScenario { len, input, plant, noise, noise_density: Density::Gaussian })
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.input.covariance(self.len)
    }

    pub fn source<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LinearSource> {
        let r = self.covariance();
        let plant = Plant::new(&self.plant, &r, rng)?;
        let variance = match self.noise {
            NoiseLevel::Variance(v) => v,
            NoiseLevel::SnrDb(snr) => {
                let w = nalgebra::DVector::from_column_slice(plant.weights());
                (w.transpose() * &r * &w)[(0, 0)] / crate::from_db(snr)
            }
        };
        let line = DelayLine::new(self.input, self.len, rng)?;
        Ok(LinearSource {
            line,
            plant,
            noise_std: variance.sqrt(),
            density: self.noise_density,
            n: 0,
        })
    }
}

#[derive(Debug, Clone)]
pub struct LinearSource {
    line: DelayLine,
    plant: Plant,
    noise_std: f64,
    density: Density,
    n: usize,
}

impl LinearSource {
    pub fn noise_variance(&self) -> f64 {
        self.noise_std * self.noise_std
    }
}

impl SignalSource for LinearSource {
    fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Sample<'_>> {
        let n = self.n;
        self.plant.advance(n, rng)?;
        if n > 0 {
            self.line.next(rng);
        }
        let u = self.line.regressor();
        let clean = crate::dot(u, self.plant.weights());
        let noise = if self.noise_std > 0.0 { self.noise_std * self.density.sample(rng) } else { 0.0 };
        self.n += 1;
        Ok(Sample { n, u, d: clean + noise, clean, noise, w_o: Some(self.plant.weights()) })
    }
}
