//! Time-domain noise realizations for the N0–N6 profiles.
//!
//! N1 and N5 are synthesized from a power spectral density by assigning each
//! positive-frequency bin a fixed magnitude and a uniform random phase and
//! taking the inverse FFT. N2–N4 are built from white Gaussian noise by
//! colouring (circular convolution), modulation and squaring. N6 is the
//! elementwise square of a paired source realization.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulsegen::midpoints;
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseProfile {
    N0,
    N1,
    N2,
    N3,
    N4,
    N5,
    N6,
}

impl NoiseProfile {
    pub fn tag(self) -> &'static str {
        match self {
            NoiseProfile::N0 => "N0",
            NoiseProfile::N1 => "N1",
            NoiseProfile::N2 => "N2",
            NoiseProfile::N3 => "N3",
            NoiseProfile::N4 => "N4",
            NoiseProfile::N5 => "N5",
            NoiseProfile::N6 => "N6",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "N0" => NoiseProfile::N0,
            "N1" => NoiseProfile::N1,
            "N2" => NoiseProfile::N2,
            "N3" => NoiseProfile::N3,
            "N4" => NoiseProfile::N4,
            "N5" => NoiseProfile::N5,
            "N6" => NoiseProfile::N6,
            _ => return None,
        })
    }
}

/// Which family of spectral density a PSD-specified profile uses on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdFamily {
    /// The z-axis density `S_Z`.
    Z,
    /// The x-axis density `S_X`.
    X,
}

/// Tunables for the profiles whose shaping signal is not pinned down
/// elsewhere. Echoed into every example's metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Gaussian colouring-kernel width for N2–N4, as a fraction of T.
    pub n2_kernel_width: f64,
    /// Bump location (rad/s) of the N5 density.
    pub n5_bump_center: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            n2_kernel_width: 1.0 / 32.0,
            n5_bump_center: 40.0,
        }
    }
}

/// A piecewise power spectral density, in power per rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Psd {
    Zero,
    Z { bump_center: f64 },
    X { bump_center: f64 },
}

impl Psd {
    pub fn for_profile(profile: NoiseProfile, family: PsdFamily, params: &NoiseParams) -> Option<Self> {
        let bump_center = match (profile, family) {
            (NoiseProfile::N1, PsdFamily::Z) => 20.0,
            (NoiseProfile::N1, PsdFamily::X) => 15.0,
            (NoiseProfile::N5, _) => params.n5_bump_center,
            _ => return None,
        };
        Some(match family {
            PsdFamily::Z => Psd::Z { bump_center },
            PsdFamily::X => Psd::X { bump_center },
        })
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 || omega.is_nan() {
            return Err(Error::NegativeFrequency(omega));
        }
        Ok(match *self {
            Psd::Zero => 0.0,
            Psd::Z { bump_center } => {
                let bump = 0.8 * (-(omega - bump_center).powi(2) / 10.0).exp();
                if omega <= 50.0 {
                    1.0 / (omega + 1.0) + bump
                } else {
                    0.25 + bump
                }
            }
            Psd::X { bump_center } => {
                let bump = 0.5 * (-(omega - bump_center).powi(2) / 10.0).exp();
                if omega <= 20.0 {
                    1.0 / (omega + 1.0).powf(1.5) + bump
                } else {
                    5.0 / 48.0 + bump
                }
            }
        })
    }
}

pub fn psd_z(omega: f64) -> Result<f64> {
    Psd::Z { bump_center: 20.0 }.eval(omega)
}

pub fn psd_x(omega: f64) -> Result<f64> {
    Psd::X { bump_center: 15.0 }.eval(omega)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

pub(crate) fn fft_forward(data: &mut [Complex64]) {
    fft_plan(data.len(), false).process(data);
}

/// Inverse FFT including the `1/M` normalization.
pub(crate) fn fft_inverse(data: &mut [Complex64]) {
    fft_plan(data.len(), true).process(data);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|z| *z *= scale);
}

fn check_grid(num_steps: usize) -> Result<()> {
    if num_steps < 2 || !num_steps.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "number of time steps must be a power of two ≥ 2, got {num_steps}"
        )));
    }
    Ok(())
}

/// Builds the Hermitian-symmetric spectrum and returns its (complex) inverse
/// FFT. Bin `j` sits at ω_j = 2πj/T; DC and Nyquist are real, bins
/// `1..N−1` get a uniform phase and are mirrored as conjugates.
fn synthesize<S, R>(psd: S, total_time: f64, num_steps: usize, rng: &mut R) -> Result<Vec<Complex64>>
where
    S: Fn(f64) -> Result<f64>,
    R: Rng + ?Sized,
{
    check_grid(num_steps)?;
    let m = num_steps;
    let n = m / 2;
    let amp = m as f64 / total_time.sqrt();
    let bin = |j: usize| -> Result<f64> {
        let omega = 2.0 * PI * j as f64 / total_time;
        let s = psd(omega)?;
        if s < 0.0 || s.is_nan() {
            return Err(Error::NegativePsd { omega, value: s });
        }
        Ok(amp * s.sqrt())
    };

    let mut spectrum = vec![Complex64::new(0.0, 0.0); m];
    spectrum[0] = Complex64::new(bin(0)?, 0.0);
    for j in 1..n {
        let phi: f64 = rng.random();
        let p = Complex64::from_polar(bin(j)?, 2.0 * PI * phi);
        spectrum[j] = p;
        spectrum[m - j] = p.conj();
    }
    spectrum[n] = Complex64::new(bin(n)?, 0.0);
    fft_inverse(&mut spectrum);
    Ok(spectrum)
}

/// One PSD-shaped realization of length `num_steps`.
pub fn generate_from_psd<S, R>(psd: S, total_time: f64, num_steps: usize, rng: &mut R) -> Result<Vec<f64>>
where
    S: Fn(f64) -> Result<f64>,
    R: Rng + ?Sized,
{
    Ok(synthesize(psd, total_time, num_steps, rng)?
        .into_iter()
        .map(|z| z.re)
        .collect())
}

/// Unit-energy Gaussian kernel on the circular sample grid.
fn colouring_kernel(num_steps: usize, width_fraction: f64) -> Vec<f64> {
    let sigma = width_fraction * num_steps as f64;
    let raw: Vec<f64> = (0..num_steps)
        .map(|i| {
            let d = i.min(num_steps - i) as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let energy = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    raw.into_iter().map(|v| v / energy).collect()
}

/// Circular convolution of `white` with the unit-energy colouring kernel.
/// Unit-variance white input gives unit-variance output.
pub fn colour(white: &[f64], width_fraction: f64) -> Vec<f64> {
    let m = white.len();
    let kernel = colouring_kernel(m, width_fraction);
    let mut x: Vec<Complex64> = white.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut k: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut x);
    fft_forward(&mut k);
    x.iter_mut().zip(&k).for_each(|(a, b)| *a *= b);
    fft_inverse(&mut x);
    x.into_iter().map(|z| z.re).collect()
}

/// N3 modulation envelope `1 + sin(2πt/T)`.
pub fn n3_envelope(t: f64, total_time: f64) -> f64 {
    1.0 + (2.0 * PI * t / total_time).sin()
}

/// The kernel width is a fraction of T, so the samples do not depend on T.
pub fn generate_n2<R: Rng + ?Sized>(
    _total_time: f64,
    num_steps: usize,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_grid(num_steps)?;
    let white: Vec<f64> = (0..num_steps).map(|_| rng.sample(StandardNormal)).collect();
    Ok(colour(&white, params.n2_kernel_width))
}

pub fn generate_n3<R: Rng + ?Sized>(
    total_time: f64,
    num_steps: usize,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let stationary = generate_n2(total_time, num_steps, params, rng)?;
    Ok(stationary
        .into_iter()
        .zip(midpoints(total_time, num_steps))
        .map(|(b, t)| b * n3_envelope(t, total_time))
        .collect())
}

pub fn generate_n4<R: Rng + ?Sized>(
    total_time: f64,
    num_steps: usize,
    params: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let squared = derive_n6(&generate_n3(total_time, num_steps, params, rng)?);
    let mean = squared.iter().sum::<f64>() / squared.len() as f64;
    Ok(squared.into_iter().map(|v| v - mean).collect())
}

/// Elementwise square of the source realization.
pub fn derive_n6(source: &[f64]) -> Vec<f64> {
    source.iter().map(|v| v * v).collect()
}

/// Noise profile assignment for the noisy axes of a system, in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisNoise {
    pub profile: NoiseProfile,
    pub family: PsdFamily,
}

/// `K × M` samples, realization-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealizationBatch {
    pub profile: NoiseProfile,
    pub num_realizations: usize,
    pub num_steps: usize,
    pub samples: Vec<f64>,
}

impl NoiseRealizationBatch {
    pub fn zeros(profile: NoiseProfile, num_realizations: usize, num_steps: usize) -> Self {
        Self {
            profile,
            num_realizations,
            num_steps,
            samples: vec![0.0; num_realizations * num_steps],
        }
    }

    pub fn realization(&self, k: usize) -> &[f64] {
        &self.samples[k * self.num_steps..(k + 1) * self.num_steps]
    }
}

/// Index of the axis an N6 axis squares: the nearest preceding axis with a
/// generative profile.
pub fn n6_sources(axes: &[AxisNoise]) -> Result<Vec<Option<usize>>> {
    axes.iter()
        .enumerate()
        .map(|(i, ax)| {
            if ax.profile != NoiseProfile::N6 {
                return Ok(None);
            }
            match (0..i).rev().find(|&j| axes[j].profile != NoiseProfile::N6) {
                Some(j) if axes[j].profile != NoiseProfile::N0 => Ok(Some(j)),
                _ => Err(Error::InvalidConfig(format!(
                    "N6 on axis {i} needs a preceding N1–N5 source axis"
                ))),
            }
        })
        .collect()
}

/// One realization for every axis, drawn from streams keyed by
/// `(master, example, realization, axis)`.
pub fn realization(
    axes: &[AxisNoise],
    sources: &[Option<usize>],
    total_time: f64,
    num_steps: usize,
    params: &NoiseParams,
    lineage: (u64, u64, u64),
) -> Result<Vec<Vec<f64>>> {
    let (master, example, k) = lineage;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(axes.len());
    for (i, ax) in axes.iter().enumerate() {
        let mut rng = StreamKey::noise(master, example, k, i as u32).rng();
        let samples = match ax.profile {
            NoiseProfile::N0 => vec![0.0; num_steps],
            NoiseProfile::N1 | NoiseProfile::N5 => {
                let psd = Psd::for_profile(ax.profile, ax.family, params)
                    .expect("PSD-specified profile");
                generate_from_psd(|w| psd.eval(w), total_time, num_steps, &mut rng)?
            }
            NoiseProfile::N2 => generate_n2(total_time, num_steps, params, &mut rng)?,
            NoiseProfile::N3 => generate_n3(total_time, num_steps, params, &mut rng)?,
            NoiseProfile::N4 => generate_n4(total_time, num_steps, params, &mut rng)?,
            NoiseProfile::N6 => {
                let src = sources[i].expect("validated N6 source");
                derive_n6(&out[src])
            }
        };
        out.push(samples);
    }
    Ok(out)
}

/// `K` independent realizations per axis, generated in parallel.
pub fn batch(
    axes: &[AxisNoise],
    num_realizations: usize,
    total_time: f64,
    num_steps: usize,
    params: &NoiseParams,
    master: u64,
    example: u64,
) -> Result<Vec<NoiseRealizationBatch>> {
    if num_realizations < 1 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    check_grid(num_steps)?;
    let sources = n6_sources(axes)?;
    let per_k: Vec<Vec<Vec<f64>>> = (0..num_realizations)
        .into_par_iter()
        .map(|k| {
            realization(
                axes,
                &sources,
                total_time,
                num_steps,
                params,
                (master, example, k as u64),
            )
        })
        .collect::<Result<_>>()?;

    Ok(axes
        .iter()
        .enumerate()
        .map(|(i, ax)| {
            let mut samples = Vec::with_capacity(num_realizations * num_steps);
            for r in &per_k {
                samples.extend_from_slice(&r[i]);
            }
            NoiseRealizationBatch {
                profile: ax.profile,
                num_realizations,
                num_steps,
                samples,
            }
        })
        .collect())
}
