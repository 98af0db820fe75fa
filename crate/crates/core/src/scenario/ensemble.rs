//! Parallel, order-independent Monte-Carlo ensembles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Sample, SignalSource};
use crate::error::{invalid, Error, Result};

/// Filter structure driven by a [`SignalSource`], reporting one value per
/// channel and sample (for instance a squared a-priori error).
pub trait Graph {
    fn channels(&self) -> Vec<String>;
    fn step(&mut self, sample: &Sample<'_>, out: &mut [f64]) -> Result<()>;
}

/// Sample range `[start, end)` averaged into a steady-state scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn new(name: impl Into<String>, start: usize, end: usize) -> Self {
        Window { name: name.into(), start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// What to do with a run whose filters blow up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergencePolicy {
    #[default]
    Fail,
    Exclude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Samples per recorded point; each point is a block mean.
    pub stride: usize,
    pub windows: Vec<Window>,
    pub divergence: DivergencePolicy,
    /// Runs per parallel work item. Partial sums are merged in chunk order,
    /// so results do not depend on the thread count; changing `chunk` may
    /// change the last bits.
    pub chunk: usize,
}

impl EnsembleConfig {
    /// Defaults: about 2000 recorded points and a `steady` window over the
    /// final 10% of the horizon.
    pub fn new(runs: usize, horizon: usize, seed: u64) -> Self {
        EnsembleConfig {
            runs,
            horizon,
            seed,
            stride: horizon.div_ceil(2000).max(1),
            windows: vec![Window::new("steady", horizon - horizon / 10, horizon)],
            divergence: DivergencePolicy::Fail,
            chunk: 4,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// Replace the `steady` window by the last `len` samples.
    pub fn with_steady_tail(mut self, len: usize) -> Self {
        let w = Window::new("steady", self.horizon.saturating_sub(len), self.horizon);
        match self.windows.iter_mut().find(|w| w.name == "steady") {
            Some(s) => *s = w,
            None => self.windows.push(w),
        }
        self
    }

    pub fn with_window(mut self, w: Window) -> Self {
        self.windows.retain(|x| x.name != w.name);
        self.windows.push(w);
        self
    }

    pub fn with_divergence(mut self, p: DivergencePolicy) -> Self {
        self.divergence = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(invalid("runs must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if self.stride == 0 || self.chunk == 0 {
            return Err(invalid("stride and chunk must be at least 1"));
        }
        for w in &self.windows {
            if w.is_empty() || w.end > self.horizon {
                return Err(invalid(format!(
                    "window {} [{}, {}) not inside horizon {}",
                    w.name, w.start, w.end, self.horizon
                )));
            }
        }
        Ok(())
    }

    fn records(&self) -> usize {
        self.horizon.div_ceil(self.stride)
    }
}

/// Ensemble mean and standard error of a window average.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStat {
    pub window: Window,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMetrics {
    pub channels: Vec<String>,
    pub stride: usize,
    pub horizon: usize,
    /// Runs included in the averages.
    pub runs: usize,
    pub diverged: usize,
    /// Per channel, ensemble mean of each block of `stride` samples.
    pub series: Vec<Vec<f64>>,
    pub windows: Vec<WindowStat>,
}

impl EnsembleMetrics {
    pub fn channel(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.channel(name).map(|i| &self.series[i][..])
    }

    pub fn window(&self, name: &str) -> Option<&WindowStat> {
        self.windows.iter().find(|w| w.window.name == name)
    }

    /// Window mean of a channel.
    pub fn mean(&self, window: &str, channel: &str) -> Option<f64> {
        let c = self.channel(channel)?;
        self.window(window).map(|w| w.mean[c])
    }

    pub fn steady(&self, channel: &str) -> Option<f64> {
        self.mean("steady", channel)
    }

    /// First sample index of recorded point `k`.
    pub fn record_start(&self, k: usize) -> usize {
        k * self.stride
    }
}

/// Random generator of run `run`: one independent stream per run.
pub fn run_seed(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

struct Partial {
    series: Vec<f64>,
    win_sum: Vec<f64>,
    win_sq: Vec<f64>,
    runs: usize,
    diverged: usize,
}

impl Partial {
    fn new(channels: usize, records: usize, windows: usize) -> Self {
        Partial {
            series: vec![0.0; channels * records],
            win_sum: vec![0.0; channels * windows],
            win_sq: vec![0.0; channels * windows],
            runs: 0,
            diverged: 0,
        }
    }

    fn merge(&mut self, other: &Partial) {
        let add = |a: &mut Vec<f64>, b: &Vec<f64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.series, &other.series);
        add(&mut self.win_sum, &other.win_sum);
        add(&mut self.win_sq, &other.win_sq);
        self.runs += other.runs;
        self.diverged += other.diverged;
    }
}

enum RunOutcome {
    Done,
    Diverged(usize),
}

fn is_divergence(e: &Error) -> bool {
    matches!(e, Error::NonFinite(_) | Error::DegenerateRegressor | Error::NotPositiveDefinite)
}

/// Run `cfg.runs` independent realizations and average the graph channels.
///
/// `build` creates the source and graph of one run from that run's generator.
/// Results are bitwise reproducible for a fixed configuration, whatever the
/// number of threads.
pub fn run_ensemble<S, G, F>(cfg: &EnsembleConfig, build: F) -> Result<EnsembleMetrics>
where
    S: SignalSource,
    G: Graph,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<(S, G)> + Sync,
{
    cfg.validate()?;
    let channels = {
        let mut rng = run_seed(cfg.seed, 0);
        build(0, &mut rng)?.1.channels()
    };
    let nc = channels.len();
    let records = cfg.records();
    let nw = cfg.windows.len();

    let run_chunk = |chunk: usize| -> Result<Partial> {
        let mut acc = Partial::new(nc, records, nw);
        let mut run_series = vec![0.0; nc * records];
        let mut win = vec![0.0; nc * nw];
        let mut out = vec![0.0; nc];
        let first = chunk * cfg.chunk;
        for run in first..(first + cfg.chunk).min(cfg.runs) {
            let mut rng = run_seed(cfg.seed, run);
            let (mut src, mut graph) = build(run, &mut rng)?;
            run_series.iter_mut().for_each(|x| *x = 0.0);
            win.iter_mut().for_each(|x| *x = 0.0);
            let mut outcome = RunOutcome::Done;
            for n in 0..cfg.horizon {
                let sample = src.next_sample(&mut rng)?;
                match graph.step(&sample, &mut out) {
                    Ok(()) if out.iter().all(|v| v.is_finite()) => {}
                    Ok(()) => {
                        outcome = RunOutcome::Diverged(n);
                        break;
                    }
                    Err(e) if is_divergence(&e) => {
                        outcome = RunOutcome::Diverged(n);
                        break;
                    }
                    Err(e) => return Err(e),
                }
                let k = n / cfg.stride;
                for (c, v) in out.iter().enumerate() {
                    run_series[c * records + k] += v;
                }
                for (w, window) in cfg.windows.iter().enumerate() {
                    if (window.start..window.end).contains(&n) {
                        for (c, v) in out.iter().enumerate() {
                            win[w * nc + c] += v;
                        }
                    }
                }
            }
            match outcome {
                RunOutcome::Diverged(n) => match cfg.divergence {
                    DivergencePolicy::Fail => return Err(Error::Diverged { run, n }),
                    DivergencePolicy::Exclude => acc.diverged += 1,
                },
                RunOutcome::Done => {
                    acc.runs += 1;
                    acc.series.iter_mut().zip(&run_series).for_each(|(a, v)| *a += v);
                    for (w, window) in cfg.windows.iter().enumerate() {
                        let len = window.len() as f64;
                        for c in 0..nc {
                            let m = win[w * nc + c] / len;
                            acc.win_sum[w * nc + c] += m;
                            acc.win_sq[w * nc + c] += m * m;
                        }
                    }
                }
            }
        }
        Ok(acc)
    };

    let chunks = cfg.runs.div_ceil(cfg.chunk);
    let partials: Vec<Result<Partial>> = (0..chunks).into_par_iter().map(run_chunk).collect();
    let mut total = Partial::new(nc, records, nw);
    for p in partials {
        total.merge(&p?);
    }
    if total.runs == 0 {
        return Err(invalid(format!("all {} runs diverged", total.diverged)));
    }

    let runs = total.runs as f64;
    let series = (0..nc)
        .map(|c| {
            (0..records)
                .map(|k| {
                    let block = (cfg.horizon - k * cfg.stride).min(cfg.stride) as f64;
                    total.series[c * records + k] / (runs * block)
                })
                .collect()
        })
        .collect();
    let windows = cfg
        .windows
        .iter()
        .enumerate()
        .map(|(w, window)| {
            let mean: Vec<f64> = (0..nc).map(|c| total.win_sum[w * nc + c] / runs).collect();
            let std_err = (0..nc)
                .map(|c| {
                    if total.runs < 2 {
                        return f64::NAN;
                    }
                    let m = mean[c];
                    let var = (total.win_sq[w * nc + c] / runs - m * m).max(0.0) * runs / (runs - 1.0);
                    (var / runs).sqrt()
                })
                .collect();
            WindowStat { window: window.clone(), mean, std_err }
        })
        .collect();
    Ok(EnsembleMetrics {
        channels,
        stride: cfg.stride,
        horizon: cfg.horizon,
        runs: total.runs,
        diverged: total.diverged,
        series,
        windows,
    })
}
