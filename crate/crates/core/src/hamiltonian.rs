//! Drift, control and noise Hamiltonians for the four system categories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noisegen::{NoiseRealizationBatch, PsdFamily};
use crate::qlinalg::{pauli, ComplexMatrix, Pauli, PauliLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemCategory {
    /// One qubit, x control, z noise.
    Cat1,
    /// One qubit, x and y control, x and z noise.
    Cat2,
    /// Two qubits, local x control, local z noise.
    Cat3,
    /// Two qubits, local x control plus interacting xx control, local z noise.
    Cat4,
}

/// One operator term `coefficient · f(t) · operator` of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub label: &'static str,
    pub operator: PauliLabel,
    pub coefficient: f64,
}

const fn one(label: &'static str, p: Pauli) -> Term {
    Term {
        label,
        operator: PauliLabel::One(p),
        coefficient: 0.5,
    }
}

const fn two(label: &'static str, a: Pauli, b: Pauli) -> Term {
    Term {
        label,
        operator: PauliLabel::Two(a, b),
        coefficient: 0.5,
    }
}

impl SystemCategory {
    pub const ALL: [SystemCategory; 4] = [
        SystemCategory::Cat1,
        SystemCategory::Cat2,
        SystemCategory::Cat3,
        SystemCategory::Cat4,
    ];

    pub fn nqubits(self) -> usize {
        match self {
            SystemCategory::Cat1 | SystemCategory::Cat2 => 1,
            SystemCategory::Cat3 | SystemCategory::Cat4 => 2,
        }
    }

    pub fn dim(self) -> usize {
        1 << self.nqubits()
    }

    /// Control terms in waveform order. `interacting_half` puts a ½ on the
    /// `σx⊗σx` term, which otherwise carries coefficient 1.
    pub fn control_terms(self, interacting_half: bool) -> Vec<Term> {
        use Pauli::*;
        match self {
            SystemCategory::Cat1 => vec![one("x", X)],
            SystemCategory::Cat2 => vec![one("x", X), one("y", Y)],
            SystemCategory::Cat3 => vec![two("x1", X, I), two("1x", I, X)],
            SystemCategory::Cat4 => vec![
                two("x1", X, I),
                two("1x", I, X),
                Term {
                    coefficient: if interacting_half { 0.5 } else { 1.0 },
                    ..two("xx", X, X)
                },
            ],
        }
    }

    /// Noise terms in noise-axis order.
    pub fn noise_terms(self) -> Vec<Term> {
        use Pauli::*;
        match self {
            SystemCategory::Cat1 => vec![one("z", Z)],
            SystemCategory::Cat2 => vec![one("x", X), one("z", Z)],
            SystemCategory::Cat3 | SystemCategory::Cat4 => {
                vec![two("z1", Z, I), two("1z", I, Z)]
            }
        }
    }

    /// Spectral-density family for each noisy axis.
    pub fn noise_families(self) -> Vec<PsdFamily> {
        match self {
            SystemCategory::Cat2 => vec![PsdFamily::X, PsdFamily::Z],
            SystemCategory::Cat1 => vec![PsdFamily::Z],
            SystemCategory::Cat3 | SystemCategory::Cat4 => vec![PsdFamily::Z, PsdFamily::Z],
        }
    }

    /// Control part of the canonical dataset name.
    pub fn control_tag(self) -> &'static str {
        match self {
            SystemCategory::Cat1 => "X",
            SystemCategory::Cat2 => "XY",
            SystemCategory::Cat3 => "IX-XI",
            SystemCategory::Cat4 => "IX-XI-XX",
        }
    }

    /// Noise-axis part of the canonical dataset name.
    pub fn noise_axes_tag(self) -> &'static str {
        match self {
            SystemCategory::Cat1 => "Z",
            SystemCategory::Cat2 => "XZ",
            SystemCategory::Cat3 | SystemCategory::Cat4 => "IZ-ZI",
        }
    }

    pub fn from_control_tag(nqubits: usize, tag: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.nqubits() == nqubits && c.control_tag() == tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyGaps {
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl Default for EnergyGaps {
    fn default() -> Self {
        Self {
            omega: 12.0,
            omega1: 12.0,
            omega2: 10.0,
        }
    }
}

/// ½Ωσz for one qubit; ½Ω₁σz⊗σ0 + ½Ω₂σ0⊗σz for two.
pub fn drift(cat: SystemCategory, gaps: &EnergyGaps) -> ComplexMatrix {
    use Pauli::*;
    match cat.nqubits() {
        1 => pauli(PauliLabel::One(Z)).scale(0.5 * gaps.omega),
        _ => {
            pauli(PauliLabel::Two(Z, I)).scale(0.5 * gaps.omega1)
                + pauli(PauliLabel::Two(I, Z)).scale(0.5 * gaps.omega2)
        }
    }
}

fn weighted_sum(dim: usize, terms: &[Term], values: impl Iterator<Item = f64>) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim);
    for (term, v) in terms.iter().zip(values) {
        if v != 0.0 {
            h += pauli(term.operator).scale(term.coefficient * v);
        }
    }
    h
}

fn check_axes(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

fn check_lengths(series: &[&[f64]]) -> Result<usize> {
    let m = series.first().map_or(0, |s| s.len());
    if let Some(bad) = series.iter().find(|s| s.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: bad.len(),
        });
    }
    Ok(m)
}

/// Control Hamiltonian at each time slice; one waveform per control axis.
pub fn control_slices(
    cat: SystemCategory,
    waveforms: &[&[f64]],
    interacting_half: bool,
) -> Result<Vec<ComplexMatrix>> {
    let terms = cat.control_terms(interacting_half);
    check_axes(terms.len(), waveforms.len())?;
    let m = check_lengths(waveforms)?;
    Ok((0..m)
        .map(|j| weighted_sum(cat.dim(), &terms, waveforms.iter().map(|w| w[j])))
        .collect())
}

/// H₀(t_j) = drift + control for every slice.
pub fn system_slices(
    cat: SystemCategory,
    gaps: &EnergyGaps,
    waveforms: &[&[f64]],
    interacting_half: bool,
) -> Result<Vec<ComplexMatrix>> {
    let d = drift(cat, gaps);
    Ok(control_slices(cat, waveforms, interacting_half)?
        .into_iter()
        .map(|c| d + c)
        .collect())
}

/// Noise Hamiltonian for one realization; one series per noisy axis.
pub fn noise_row(cat: SystemCategory, noise: &[&[f64]]) -> Result<Vec<ComplexMatrix>> {
    let terms = cat.noise_terms();
    check_axes(terms.len(), noise.len())?;
    let m = check_lengths(noise)?;
    Ok((0..m)
        .map(|j| weighted_sum(cat.dim(), &terms, noise.iter().map(|b| b[j])))
        .collect())
}

/// Noise Hamiltonians for all `K` realizations, realization-major (`K × M`).
pub fn noise_slices(
    cat: SystemCategory,
    batches: &[NoiseRealizationBatch],
) -> Result<Vec<ComplexMatrix>> {
    let terms = cat.noise_terms();
    check_axes(terms.len(), batches.len())?;
    let k = batches.first().map_or(0, |b| b.num_realizations);
    if let Some(bad) = batches.iter().find(|b| b.num_realizations != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: bad.num_realizations,
        });
    }
    let mut out = Vec::new();
    for r in 0..k {
        let series: Vec<&[f64]> = batches.iter().map(|b| b.realization(r)).collect();
        out.extend(noise_row(cat, &series)?);
    }
    Ok(out)
}

pub fn total(h0: &ComplexMatrix, h1: &ComplexMatrix) -> ComplexMatrix {
    *h0 + *h1
}
