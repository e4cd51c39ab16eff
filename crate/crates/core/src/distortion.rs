//! Control-line distortion modelled as a Chebyshev type I low-pass filter.
//!
//! The analog prototype is designed in zero/pole/gain form, mapped to the
//! z-plane with a pre-warped bilinear transform and applied to waveforms as a
//! direct-form II transposed difference equation with zero initial state.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulsegen::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogFilterSpec {
    pub order: usize,
    pub passband_ripple_db: f64,
    pub cutoff_rad_per_s: f64,
}

impl Default for AnalogFilterSpec {
    fn default() -> Self {
        Self {
            order: 4,
            passband_ripple_db: 0.5,
            cutoff_rad_per_s: 2.0 * PI * 20.0,
        }
    }
}

impl AnalogFilterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidConfig("filter order must be at least 1".into()));
        }
        if !(self.passband_ripple_db > 0.0 && self.passband_ripple_db.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "passband ripple must be positive, got {}",
                self.passband_ripple_db
            )));
        }
        if !(self.cutoff_rad_per_s > 0.0 && self.cutoff_rad_per_s.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cutoff must be positive, got {}",
                self.cutoff_rad_per_s
            )));
        }
        Ok(())
    }

    /// ε = √(10^{ripple/10} − 1)
    pub fn epsilon(&self) -> f64 {
        (10f64.powf(self.passband_ripple_db / 10.0) - 1.0).sqrt()
    }
}

/// Analog transfer function `H(s) = k·Π(s − zᵢ)/Π(s − pᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPoleGain {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub gain: f64,
}

impl ZeroPoleGain {
    pub fn unity() -> Self {
        Self {
            zeros: vec![],
            poles: vec![],
            gain: 1.0,
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let num: Complex64 = self.zeros.iter().map(|z| s - z).product();
        let den: Complex64 = self.poles.iter().map(|p| s - p).product();
        num * self.gain / den
    }

    /// |H(jω)|
    pub fn magnitude_at(&self, omega: f64) -> f64 {
        self.eval(Complex64::new(0.0, omega)).norm()
    }
}

/// Chebyshev type I low-pass prototype scaled to the cutoff; the peak
/// passband magnitude is 1.
pub fn design_chebyshev1(spec: &AnalogFilterSpec) -> Result<ZeroPoleGain> {
    spec.validate()?;
    let n = spec.order;
    let eps = spec.epsilon();
    let mu = (1.0 / eps).asinh() / n as f64;
    let wc = spec.cutoff_rad_per_s;

    let poles: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = PI * (2 * k + 1) as f64 / (2 * n) as f64;
            // The middle pole of an odd order is exactly real.
            let im = if 2 * k + 1 == n { 0.0 } else { mu.cosh() * theta.cos() };
            Complex64::new(-mu.sinh() * theta.sin(), im) * wc
        })
        .collect();

    // k = H(0)·Π(−p); the product is real for conjugate-paired poles.
    let dc = if n % 2 == 1 {
        1.0
    } else {
        1.0 / (1.0 + eps * eps).sqrt()
    };
    let prod: Complex64 = poles.iter().map(|p| -p).product();
    Ok(ZeroPoleGain {
        zeros: vec![],
        poles,
        gain: dc * prod.re,
    })
}

/// Bilinear transform `s = 2f_s(z − 1)/(z + 1)`.
///
/// With `prewarp_rad_per_s = Some(ω)` the analog response is first rescaled in
/// frequency so that the digital filter at ω matches the analog filter at ω.
pub fn discretize(
    analog: &ZeroPoleGain,
    sample_rate: f64,
    prewarp_rad_per_s: Option<f64>,
) -> Result<DiscreteFilter> {
    if analog.zeros.len() > analog.poles.len() {
        return Err(Error::InvalidConfig(
            "analog transfer function must be proper".into(),
        ));
    }
    let fs2 = 2.0 * sample_rate;

    let scale = match prewarp_rad_per_s {
        Some(w) => {
            if !(w > 0.0 && w < PI * sample_rate) {
                return Err(Error::InvalidConfig(format!(
                    "pre-warp frequency {w} rad/s must lie below Nyquist ({} rad/s)",
                    PI * sample_rate
                )));
            }
            fs2 * (w / fs2).tan() / w
        }
        None => 1.0,
    };
    let zeros: Vec<Complex64> = analog.zeros.iter().map(|z| z * scale).collect();
    let poles: Vec<Complex64> = analog.poles.iter().map(|p| p * scale).collect();
    let relative_degree = poles.len() - zeros.len();
    let gain = analog.gain * scale.powi(relative_degree as i32);

    let mut zd: Vec<Complex64> = zeros.iter().map(|z| (fs2 + z) / (fs2 - z)).collect();
    zd.extend(std::iter::repeat_n(Complex64::new(-1.0, 0.0), relative_degree));
    let pd: Vec<Complex64> = poles.iter().map(|p| (fs2 + p) / (fs2 - p)).collect();
    let num: Complex64 = zeros.iter().map(|z| fs2 - z).product();
    let den: Complex64 = poles.iter().map(|p| fs2 - p).product();
    let kd = (num / den * gain).re;

    DiscreteFilter::from_zpk(&zd, &pd, kd, sample_rate)
}

/// Monic polynomial coefficients (highest power first) with the given roots.
#[cfg(test)]
fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

/// Roots of a real polynomial (highest power first) by Durand–Kerner iteration.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let lead = coeffs.iter().position(|&c| c != 0.0);
    let Some(lead) = lead else { return vec![] };
    let monic: Vec<f64> = coeffs[lead..].iter().map(|c| c / coeffs[lead]).collect();
    let degree = monic.len() - 1;
    if degree == 0 {
        return vec![];
    }
    let eval = |z: Complex64| monic.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..degree {
            let zi = roots[i];
            let denom: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| zi - roots[j])
                .product();
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

/// One second-order section `(b₀ + b₁z⁻¹ + b₂z⁻²)/(1 + a₁z⁻¹ + a₂z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn eval(&self, zinv: Complex64) -> Complex64 {
        let horner = |c: &[f64; 3]| (Complex64::from(c[2]) * zinv + c[1]) * zinv + c[0];
        horner(&self.b) / horner(&self.a)
    }
}

/// Discrete-time filter stored as a gain and a cascade of second-order
/// sections, which keeps high orders with poles near `z = 1` well conditioned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFilter {
    pub gain: f64,
    pub sections: Vec<Biquad>,
    pub sample_rate: f64,
}

const PAIR_TOL: f64 = 1e-9;

/// Groups roots into conjugate pairs and pairs of real roots. Each group is
/// returned as the real coefficients `[1, c₁, c₂]` of `(1 − r₁z⁻¹)(1 − r₂z⁻¹)`
/// together with the number of roots it holds.
fn root_groups(roots: &[Complex64]) -> Result<Vec<([f64; 3], usize)>> {
    let mut complex: Vec<Complex64> = roots
        .iter()
        .filter(|r| r.im > PAIR_TOL * r.norm().max(1.0))
        .copied()
        .collect();
    let lower = roots
        .iter()
        .filter(|r| r.im < -PAIR_TOL * r.norm().max(1.0))
        .count();
    if lower != complex.len() {
        return Err(Error::InvalidConfig("complex roots must come in conjugate pairs".into()));
    }
    let mut real: Vec<f64> = roots
        .iter()
        .filter(|r| r.im.abs() <= PAIR_TOL * r.norm().max(1.0))
        .map(|r| r.re)
        .collect();
    complex.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    real.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut groups: Vec<([f64; 3], usize)> = complex
        .iter()
        .map(|r| ([1.0, -2.0 * r.re, r.norm_sqr()], 2))
        .collect();
    for pair in real.chunks(2) {
        groups.push(match *pair {
            [r1, r2] => ([1.0, -(r1 + r2), r1 * r2], 2),
            [r] => ([1.0, -r, 0.0], 1),
            _ => unreachable!(),
        });
    }
    Ok(groups)
}

impl DiscreteFilter {
    /// `H(z) = k·Π(z − zᵢ)/Π(z − pᵢ)` with at least as many poles as zeros.
    /// Rejects poles on or outside the unit circle.
    pub fn from_zpk(zeros: &[Complex64], poles: &[Complex64], gain: f64, sample_rate: f64) -> Result<Self> {
        if zeros.len() > poles.len() {
            return Err(Error::InvalidConfig("filter must have at least as many poles as zeros".into()));
        }
        if let Some(p) = poles.iter().map(|p| p.norm()).reduce(f64::max) {
            if p >= 1.0 {
                return Err(Error::UnstableFilter { max_pole_magnitude: p });
            }
        }
        let pole_groups = root_groups(poles)?;
        let mut zero_groups = root_groups(zeros)?.into_iter();
        let mut sections = Vec::with_capacity(pole_groups.len());
        for (a, np) in pole_groups {
            let (b, nz) = zero_groups.next().unwrap_or(([1.0, 0.0, 0.0], 0));
            // Surplus poles in a section become a delay in the z⁻¹ form.
            let mut shifted = [0.0; 3];
            let delay = np.saturating_sub(nz);
            for i in 0..=nz.min(2) {
                if i + delay < 3 {
                    shifted[i + delay] = b[i];
                }
            }
            sections.push(Biquad { b: shifted, a });
        }
        if zero_groups.next().is_some() {
            return Err(Error::InvalidConfig("zeros could not be assigned to sections".into()));
        }
        Ok(Self {
            gain,
            sections,
            sample_rate,
        })
    }

    /// Transfer function from `z⁻¹` polynomial coefficients; `a[0]` must be
    /// non-zero.
    pub fn new(b: Vec<f64>, a: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if b.is_empty() || a.is_empty() || a[0] == 0.0 || b.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidConfig(
                "filter needs non-empty coefficients with a[0] ≠ 0 and b ≠ 0".into(),
            ));
        }
        let len = b.len().max(a.len());
        let pad = |mut v: Vec<f64>| {
            v.resize(len, 0.0);
            v
        };
        let (b, a) = (pad(b), pad(a));
        // Leading zeros of b are pure delay: those roots sit at infinity.
        let lead = b.iter().position(|&c| c != 0.0).expect("b is non-zero");
        let zeros = polynomial_roots(&b[lead..]);
        let poles = polynomial_roots(&a);
        Self::from_zpk(&zeros, &poles, b[lead] / a[0], sample_rate)
    }

    pub fn identity(sample_rate: f64) -> Self {
        Self {
            gain: 1.0,
            sections: Vec::new(),
            sample_rate,
        }
    }

    pub fn order(&self) -> usize {
        self.sections
            .iter()
            .map(|s| if s.a[2] != 0.0 { 2 } else { 1 })
            .sum()
    }

    pub fn max_pole_magnitude(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| polynomial_roots(&s.a))
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }

    /// Expanded numerator in powers of `z⁻¹`.
    pub fn b(&self) -> Vec<f64> {
        let mut p = self
            .sections
            .iter()
            .fold(vec![1.0], |acc, s| poly_mul(&acc, &s.b));
        p.iter_mut().for_each(|c| *c *= self.gain);
        trim_trailing(p)
    }

    /// Expanded denominator in powers of `z⁻¹`.
    pub fn a(&self) -> Vec<f64> {
        trim_trailing(self.sections.iter().fold(vec![1.0], |acc, s| poly_mul(&acc, &s.a)))
    }

    /// Complex response at `f` Hz.
    pub fn eval_hz(&self, f: f64) -> Complex64 {
        let w = 2.0 * PI * f / self.sample_rate;
        let zinv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(Complex64::from(self.gain), |acc, s| acc * s.eval(zinv))
    }

    /// Cascade of direct-form II transposed sections with zero initial state.
    pub fn filter_samples(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().map(|v| v * self.gain).collect();
        for s in &self.sections {
            let (mut s1, mut s2) = (0.0, 0.0);
            for v in y.iter_mut() {
                let xn = *v;
                let yn = s.b[0] * xn + s1;
                s1 = s.b[1] * xn - s.a[1] * yn + s2;
                s2 = s.b[2] * xn - s.a[2] * yn;
                *v = yn;
            }
        }
        y
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn trim_trailing(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && p.last() == Some(&0.0) {
        p.pop();
    }
    p
}

/// Designs the analog prototype and discretizes it with pre-warping at the
/// cutoff.
pub fn design_discrete(spec: &AnalogFilterSpec, sample_rate: f64) -> Result<DiscreteFilter> {
    if !(spec.cutoff_rad_per_s / (2.0 * PI) < 0.5 * sample_rate) {
        return Err(Error::InvalidConfig(format!(
            "cutoff {} Hz is not below Nyquist {} Hz",
            spec.cutoff_rad_per_s / (2.0 * PI),
            0.5 * sample_rate
        )));
    }
    let analog = design_chebyshev1(spec)?;
    discretize(&analog, sample_rate, Some(spec.cutoff_rad_per_s))
}

pub fn apply(filter: &DiscreteFilter, w: &Waveform) -> Waveform {
    Waveform {
        samples: filter.filter_samples(&w.samples),
        sample_times: w.sample_times.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyResponse {
    pub frequencies: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub phase: Vec<f64>,
}

/// Magnitude and unwrapped phase on the unit circle at the given frequencies (Hz).
pub fn response(filter: &DiscreteFilter, frequencies: &[f64]) -> FrequencyResponse {
    let h: Vec<Complex64> = frequencies.iter().map(|&f| filter.eval_hz(f)).collect();
    let magnitude = h.iter().map(|z| z.norm()).collect();
    let mut phase: Vec<f64> = Vec::with_capacity(h.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for z in &h {
        let raw = z.arg();
        if let Some(p) = prev {
            let mut d = raw + offset - p;
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
        }
        let unwrapped = raw + offset;
        phase.push(unwrapped);
        prev = Some(unwrapped);
    }
    FrequencyResponse {
        frequencies: frequencies.to_vec(),
        magnitude,
        phase,
    }
}
