//! Random control-pulse trains and their sampled waveforms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PulseConfig {
    pub total_time: f64,
    pub num_steps: usize,
    pub num_pulses: usize,
    pub amp_min: f64,
    pub amp_max: f64,
    /// Shared Gaussian width; `None` means `T/(12·M)`.
    pub gaussian_sigma: Option<f64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            total_time: 1.0,
            num_steps: 1024,
            num_pulses: 5,
            amp_min: -100.0,
            amp_max: 100.0,
            gaussian_sigma: None,
        }
    }
}

impl PulseConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return bad(format!("total time must be positive, got {}", self.total_time));
        }
        if !self.num_steps.is_power_of_two() || self.num_steps < 2 {
            return bad(format!(
                "number of time steps must be a power of two ≥ 2, got {}",
                self.num_steps
            ));
        }
        if self.num_pulses == 0 {
            return bad("at least one pulse is required".into());
        }
        if !(self.amp_min < self.amp_max) {
            return bad(format!(
                "amplitude range [{}, {}] is empty",
                self.amp_min, self.amp_max
            ));
        }
        if !(self.sigma() > 0.0) {
            return bad(format!("Gaussian width must be positive, got {}", self.sigma()));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.gaussian_sigma
            .unwrap_or(self.total_time / (12.0 * self.num_steps as f64))
    }

    /// Time step δ = T/M.
    pub fn dt(&self) -> f64 {
        self.total_time / self.num_steps as f64
    }

    pub fn sample_times(&self) -> Vec<f64> {
        midpoints(self.total_time, self.num_steps)
    }
}

/// Midpoint time grid `t_j = (0.5 + j)·T/M`.
pub fn midpoints(total_time: f64, num_steps: usize) -> Vec<f64> {
    let dt = total_time / num_steps as f64;
    (0..num_steps).map(|j| (0.5 + j as f64) * dt).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseShape {
    Gaussian,
    Square,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquareTrain {
    pub amplitudes: Vec<f64>,
    pub window_starts: Vec<f64>,
    pub window_widths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTrain {
    pub amplitudes: Vec<f64>,
    pub means: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseTrain {
    Square(SquareTrain),
    Gaussian(GaussianTrain),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_times: Vec<f64>,
}

impl Waveform {
    pub fn zeros(cfg: &PulseConfig) -> Self {
        Self {
            samples: vec![0.0; cfg.num_steps],
            sample_times: cfg.sample_times(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn draw_amplitudes<R: Rng + ?Sized>(cfg: &PulseConfig, rng: &mut R) -> Vec<f64> {
    (0..cfg.num_pulses)
        .map(|_| rng.random_range(cfg.amp_min..=cfg.amp_max))
        .collect()
}

/// Square train: `[0, T]` is cut into `n` equal bins and pulse `k` fills the
/// central half of bin `k`.
pub fn random_square<R: Rng + ?Sized>(cfg: &PulseConfig, rng: &mut R) -> SquareTrain {
    let amplitudes = draw_amplitudes(cfg, rng);
    let n = cfg.num_pulses as f64;
    let bin = cfg.total_time / n;
    let window_starts = (0..cfg.num_pulses)
        .map(|k| k as f64 * bin + 0.25 * bin)
        .collect();
    SquareTrain {
        amplitudes,
        window_starts,
        window_widths: vec![0.5 * bin; cfg.num_pulses],
    }
}

/// Gaussian train: means sit at bin centres `(k − ½)·T/n` plus a uniform jitter
/// on `±T/(4n)`.
pub fn random_gaussian<R: Rng + ?Sized>(cfg: &PulseConfig, rng: &mut R) -> GaussianTrain {
    let amplitudes = draw_amplitudes(cfg, rng);
    let jitters: Vec<f64> = (0..cfg.num_pulses)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    gaussian_train(cfg, amplitudes, &jitters)
}

/// `unit_jitters` are scaled by `T/(4n)`.
fn gaussian_train(cfg: &PulseConfig, amplitudes: Vec<f64>, unit_jitters: &[f64]) -> GaussianTrain {
    let bin = cfg.total_time / cfg.num_pulses as f64;
    let means = unit_jitters
        .iter()
        .enumerate()
        .map(|(k, u)| (k as f64 + 0.5) * bin + u * 0.25 * bin)
        .collect();
    GaussianTrain {
        amplitudes,
        means,
        sigma: cfg.sigma(),
    }
}

pub fn random_train<R: Rng + ?Sized>(shape: PulseShape, cfg: &PulseConfig, rng: &mut R) -> PulseTrain {
    match shape {
        PulseShape::Gaussian => PulseTrain::Gaussian(random_gaussian(cfg, rng)),
        PulseShape::Square => PulseTrain::Square(random_square(cfg, rng)),
    }
}

impl SquareTrain {
    pub fn value_at(&self, t: f64) -> f64 {
        self.window_starts
            .iter()
            .zip(&self.window_widths)
            .zip(&self.amplitudes)
            .find(|((&s, &w), _)| t >= s && t < s + w)
            .map_or(0.0, |(_, &a)| a)
    }
}

impl GaussianTrain {
    pub fn value_at(&self, t: f64) -> f64 {
        let two_var = 2.0 * self.sigma * self.sigma;
        self.amplitudes
            .iter()
            .zip(&self.means)
            .map(|(a, mu)| a * (-(t - mu).powi(2) / two_var).exp())
            .sum()
    }
}

impl PulseTrain {
    pub fn shape(&self) -> PulseShape {
        match self {
            PulseTrain::Square(_) => PulseShape::Square,
            PulseTrain::Gaussian(_) => PulseShape::Gaussian,
        }
    }

    pub fn num_pulses(&self) -> usize {
        match self {
            PulseTrain::Square(s) => s.amplitudes.len(),
            PulseTrain::Gaussian(g) => g.amplitudes.len(),
        }
    }

    /// Per-pulse parameter triples: `[A, start, width]` for square trains,
    /// `[A, μ, σ]` for Gaussian trains.
    pub fn parameter_rows(&self) -> Vec<[f64; 3]> {
        match self {
            PulseTrain::Square(s) => s
                .amplitudes
                .iter()
                .zip(&s.window_starts)
                .zip(&s.window_widths)
                .map(|((&a, &st), &w)| [a, st, w])
                .collect(),
            PulseTrain::Gaussian(g) => g
                .amplitudes
                .iter()
                .zip(&g.means)
                .map(|(&a, &mu)| [a, mu, g.sigma])
                .collect(),
        }
    }

    pub fn from_parameter_rows(shape: PulseShape, rows: &[[f64; 3]]) -> Self {
        match shape {
            PulseShape::Square => PulseTrain::Square(SquareTrain {
                amplitudes: rows.iter().map(|r| r[0]).collect(),
                window_starts: rows.iter().map(|r| r[1]).collect(),
                window_widths: rows.iter().map(|r| r[2]).collect(),
            }),
            PulseShape::Gaussian => PulseTrain::Gaussian(GaussianTrain {
                amplitudes: rows.iter().map(|r| r[0]).collect(),
                means: rows.iter().map(|r| r[1]).collect(),
                sigma: rows.first().map_or(0.0, |r| r[2]),
            }),
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            PulseTrain::Square(s) => s.value_at(t),
            PulseTrain::Gaussian(g) => g.value_at(t),
        }
    }
}

/// Evaluates a train on the midpoint grid of `cfg`.
pub fn sample(train: &PulseTrain, cfg: &PulseConfig) -> Waveform {
    let sample_times = cfg.sample_times();
    let samples = sample_times.iter().map(|&t| train.value_at(t)).collect();
    Waveform {
        samples,
        sample_times,
    }
}
