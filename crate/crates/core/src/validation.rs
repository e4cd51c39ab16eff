//! Independent cross-checks: an RK4 propagator, expectation comparison,
//! periodogram-based PSD recovery and distortion delay/attenuation checks.
//!
//! The oracle integrates `dU/dt = −iHU` numerically and never calls the
//! matrix exponential used by the main pipeline.

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetConfig, ExampleRecord};
use crate::error::{Error, Result};
use crate::hamiltonian::{noise_row, system_slices};
use crate::measurement::{expectations_for, initial_states, observables, ExpectationTensor};
use crate::noisegen::fft_forward;
use crate::qlinalg::ComplexMatrix;
use num_complex::Complex64;

pub const DEFAULT_SUBSTEPS: usize = 64;
pub const EXPECTATION_TOL: f64 = 1e-6;
pub const PSD_TOL: f64 = 0.05;
pub const PSD_BAND_BINS: usize = 4;
pub const PSD_MAX_BIN: usize = 50;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: String,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// Mean absolute error over states, one entry per observable.
    pub per_observable: Vec<f64>,
    /// |mean of all simulated expectations − mean of all oracle expectations|.
    pub all_observable_mean_error: f64,
    pub psd_relative_errors: Vec<f64>,
    pub lag: Option<i64>,
    pub peak_ratio: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// One RK4 step matrix for constant `H`: the stages applied to the identity.
fn rk4_step(h: &ComplexMatrix, step: f64) -> ComplexMatrix {
    let minus_i = Complex64::new(0.0, -1.0);
    let a = h.scale_complex(minus_i);
    let id = ComplexMatrix::identity(h.dim());
    let k1 = a;
    let k2 = a * (id + k1.scale(0.5 * step));
    let k3 = a * (id + k2.scale(0.5 * step));
    let k4 = a * (id + k3.scale(step));
    id + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(step / 6.0)
}

/// Nearest unitary via the Newton iteration `X ← (X + X^{−†})/2`.
pub fn polar_unitary(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut x = *x;
    for _ in 0..60 {
        let inv = x.inverse().ok_or(Error::NotInvertible)?;
        let next = (x + inv.adjoint()).scale(0.5);
        let change = next.max_abs_diff(&x);
        x = next;
        if change < 1e-15 {
            break;
        }
    }
    Ok(x)
}

/// Time-ordered propagator by classical RK4 with `substeps` steps per slice,
/// followed by polar re-unitarization.
pub fn oracle_evolve(slices: &[ComplexMatrix], dt: f64, substeps: usize) -> Result<ComplexMatrix> {
    if substeps < 4 {
        return Err(Error::InvalidConfig(format!(
            "oracle needs at least 4 substeps per slice, got {substeps}"
        )));
    }
    let first = slices
        .first()
        .ok_or_else(|| Error::InvalidConfig("oracle needs at least one slice".into()))?;
    let dim = first.dim();
    let step = dt / substeps as f64;
    let mut u = ComplexMatrix::identity(dim);
    for h in slices {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: h.dim(),
            });
        }
        h.ensure_hermitian()?;
        let p = rk4_step(h, step);
        for _ in 0..substeps {
            u = p * u;
        }
    }
    polar_unitary(&u)
}

/// Compares averaged expectation vectors laid out state-major.
pub fn compare_expectations(
    sim: &ExpectationTensor,
    oracle: &ExpectationTensor,
    tolerance: f64,
) -> Result<ValidationReport> {
    if sim.averaged.len() != oracle.averaged.len() || sim.num_observables != oracle.num_observables {
        return Err(Error::DimensionMismatch {
            expected: sim.averaged.len(),
            actual: oracle.averaged.len(),
        });
    }
    let diffs: Vec<f64> = sim
        .averaged
        .iter()
        .zip(&oracle.averaged)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let n = diffs.len() as f64;
    let n_obs = sim.num_observables;
    let per_observable: Vec<f64> = (0..n_obs)
        .map(|o| {
            let col: Vec<f64> = diffs.iter().skip(o).step_by(n_obs).copied().collect();
            col.iter().sum::<f64>() / col.len() as f64
        })
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mean_abs_error = diffs.iter().sum::<f64>() / n;
    let max_abs_error = diffs.iter().copied().fold(0.0, f64::max);
    let passed = mean_abs_error <= tolerance && per_observable.iter().all(|&e| e <= tolerance);
    Ok(ValidationReport {
        mode: "expectations".into(),
        mean_abs_error,
        max_abs_error,
        all_observable_mean_error: (mean(&sim.averaged) - mean(&oracle.averaged)).abs(),
        per_observable,
        tolerance,
        passed,
        ..Default::default()
    })
}

/// Re-simulates a stored example with the oracle, driving it with the stored
/// distorted pulses and noise realizations.
pub fn oracle_expectations(record: &ExampleRecord, substeps: usize) -> Result<ExpectationTensor> {
    let cfg = record_config(record)?;
    let cat = cfg.category();
    let missing = |k: &str| Error::InvalidConfig(format!("record has no {k} array"));
    let drive = record.array("distorted_pulses").ok_or_else(|| missing("distorted_pulses"))?;
    let noise = record.array("noise").ok_or_else(|| missing("noise"))?;
    let (drive_data, noise_data) = match (drive.as_real(), noise.as_real()) {
        (Some(d), Some(n)) => (d, n),
        _ => return Err(Error::InvalidConfig("pulse and noise arrays must be real".into())),
    };
    let (m, n_ctrl) = (drive.shape[0], drive.shape[1]);
    let (n_axes, k) = (noise.shape[0], noise.shape[1]);
    let waveforms: Vec<Vec<f64>> = (0..n_ctrl)
        .map(|c| (0..m).map(|j| drive_data[j * n_ctrl + c]).collect())
        .collect();
    let drive_refs: Vec<&[f64]> = waveforms.iter().map(|w| w.as_slice()).collect();
    let h0 = system_slices(cat, &cfg.gaps, &drive_refs, cfg.interacting_half)?;
    let states = initial_states(cat.nqubits())?;
    let obs = observables(cat.nqubits())?;
    let dt = cfg.pulse.dt();

    use rayon::prelude::*;
    let rows: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|r| {
            let series: Vec<&[f64]> = (0..n_axes)
                .map(|a| &noise_data[(a * k + r) * m..(a * k + r + 1) * m])
                .collect();
            let h1 = noise_row(cat, &series)?;
            let slices: Vec<ComplexMatrix> = h0.iter().zip(&h1).map(|(a, b)| *a + *b).collect();
            let u = oracle_evolve(&slices, dt, substeps)?;
            expectations_for(&states, &obs, &u)
        })
        .collect::<Result<_>>()?;
    Ok(ExpectationTensor::from_rows(
        states.states.len(),
        obs.matrices.len(),
        rows,
    ))
}

pub fn record_config(record: &ExampleRecord) -> Result<DatasetConfig> {
    let params = record
        .simulation_parameters()
        .ok_or_else(|| Error::InvalidConfig("record has no simulation_parameters".into()))?;
    Ok(serde_json::from_value(params.clone())?)
}

/// Stored `E_O` against the oracle re-simulation of the same record.
pub fn validate_record(record: &ExampleRecord, substeps: usize, tolerance: f64) -> Result<ValidationReport> {
    let stored = record
        .real("E_O")
        .ok_or_else(|| Error::InvalidConfig("record has no E_O array".into()))?;
    let oracle = oracle_expectations(record, substeps)?;
    let sim = ExpectationTensor {
        num_states: oracle.num_states,
        num_observables: oracle.num_observables,
        num_realizations: oracle.num_realizations,
        per_realization: Vec::new(),
        averaged: stored.to_vec(),
    };
    compare_expectations(&sim, &oracle, tolerance)
}

/// Averaged periodogram `(T/M²)|X_j|²` of `K × M` realization-major samples,
/// for bins `0..=M/2`.
pub fn averaged_periodogram(samples: &[f64], num_steps: usize, total_time: f64) -> Vec<f64> {
    let k = samples.len() / num_steps;
    let mut acc = vec![0.0; num_steps / 2 + 1];
    let scale = total_time / (num_steps as f64).powi(2);
    for r in samples.chunks_exact(num_steps) {
        let mut x: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_forward(&mut x);
        for (a, z) in acc.iter_mut().zip(&x) {
            *a += scale * z.norm_sqr();
        }
    }
    acc.iter().map(|a| a / k as f64).collect()
}

/// Band-averaged periodogram against the target density over bins
/// `1..=max_bin`, in bands of `band_bins` bins. Where the target band power is
/// zero the absolute band power is reported instead of a relative error.
pub fn verify_psd<S>(
    samples: &[f64],
    num_steps: usize,
    total_time: f64,
    psd: S,
    band_bins: usize,
    max_bin: usize,
    tolerance: f64,
) -> Result<ValidationReport>
where
    S: Fn(f64) -> Result<f64>,
{
    if num_steps < 2 || samples.is_empty() || samples.len() % num_steps != 0 || band_bins == 0 {
        return Err(Error::InvalidConfig("samples must be a non-empty K × M block".into()));
    }
    let max_bin = max_bin.min(num_steps / 2);
    let p = averaged_periodogram(samples, num_steps, total_time);
    let bins: Vec<usize> = (1..=max_bin).collect();
    let mut errors = Vec::new();
    for band in bins.chunks(band_bins) {
        let mut measured = 0.0;
        let mut target = 0.0;
        for &j in band {
            measured += p[j];
            target += psd(2.0 * std::f64::consts::PI * j as f64 / total_time)?;
        }
        errors.push(if target > 0.0 {
            (measured - target).abs() / target
        } else {
            measured.abs()
        });
    }
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(ValidationReport {
        mode: "psd".into(),
        mean_abs_error: errors.iter().sum::<f64>() / errors.len() as f64,
        max_abs_error,
        passed: max_abs_error <= tolerance,
        psd_relative_errors: errors,
        tolerance,
        ..Default::default()
    })
}

/// Lag (in samples) maximizing the cross-correlation `Σ x[n]·y[n+lag]`.
pub fn cross_correlation_lag(x: &[f64], y: &[f64]) -> i64 {
    let n = x.len().min(y.len()) as i64;
    let mut best = (f64::NEG_INFINITY, 0i64);
    for lag in -(n - 1)..n {
        let c: f64 = (0..n)
            .filter(|&i| (0..n).contains(&(i + lag)))
            .map(|i| x[i as usize] * y[(i + lag) as usize])
            .sum();
        if c > best.0 {
            best = (c, lag);
        }
    }
    best.1
}

/// Delay and attenuation of a distorted waveform relative to its source.
pub fn verify_distortion(pulses: &[f64], distorted: &[f64]) -> Result<ValidationReport> {
    if pulses.len() != distorted.len() || pulses.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: pulses.len(),
            actual: distorted.len(),
        });
    }
    let peak = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let lag = cross_correlation_lag(pulses, distorted);
    let source_peak = peak(pulses);
    let ratio = if source_peak > 0.0 {
        peak(distorted) / source_peak
    } else {
        1.0
    };
    Ok(ValidationReport {
        mode: "distortion".into(),
        lag: Some(lag),
        peak_ratio: Some(ratio),
        passed: lag >= 0 && ratio <= 1.0 + 1e-12,
        ..Default::default()
    })
}
