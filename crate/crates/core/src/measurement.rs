//! Pauli state preparation and measurement, Monte Carlo averaging and the
//! `W_O` / `V_O` noise operators.
//!
//! Expectation tensors are flattened state-major, observable-minor. States are
//! ordered x+, x−, y+, y−, z+, z− (two-qubit states are products with the
//! first qubit as the major index); observables follow σx, σy, σz or the
//! 15-element two-qubit Pauli listing without σ0⊗σ0.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qlinalg::{pauli, tensor, trace_of_product, ComplexMatrix, Pauli, PauliLabel};

/// Imaginary magnitude above which a Monte Carlo trace is treated as corrupt.
pub const MC_IMAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct InitialStateSet {
    pub labels: Vec<String>,
    pub states: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone)]
pub struct ObservableSet {
    pub labels: Vec<PauliLabel>,
    pub matrices: Vec<ComplexMatrix>,
}

fn single_qubit_states() -> Vec<(String, ComplexMatrix)> {
    let id = ComplexMatrix::identity(2);
    [Pauli::X, Pauli::Y, Pauli::Z]
        .into_iter()
        .flat_map(|p| {
            let s = p.matrix();
            let name = p.symbol().to_ascii_lowercase();
            [
                (format!("{name}+"), (id + s).scale(0.5)),
                (format!("{name}-"), (id - s).scale(0.5)),
            ]
        })
        .collect()
}

pub fn initial_states(nqubits: usize) -> Result<InitialStateSet> {
    let single = single_qubit_states();
    let pairs: Vec<(String, ComplexMatrix)> = match nqubits {
        1 => single,
        2 => single
            .iter()
            .flat_map(|(la, a)| {
                single
                    .iter()
                    .map(move |(lb, b)| (format!("{la}{lb}"), tensor(a, b).expect("2x2 factors")))
            })
            .collect(),
        n => {
            return Err(Error::InvalidConfig(format!(
                "only one- and two-qubit systems are supported, got {n}"
            )))
        }
    };
    let (labels, states) = pairs.into_iter().unzip();
    Ok(InitialStateSet { labels, states })
}

pub fn observables(nqubits: usize) -> Result<ObservableSet> {
    let labels: Vec<PauliLabel> = match nqubits {
        1 => [Pauli::X, Pauli::Y, Pauli::Z].map(PauliLabel::One).to_vec(),
        2 => Pauli::ALL
            .iter()
            .flat_map(|&a| Pauli::ALL.iter().map(move |&b| PauliLabel::Two(a, b)))
            .filter(|l| !l.is_identity())
            .collect(),
        n => {
            return Err(Error::InvalidConfig(format!(
                "only one- and two-qubit systems are supported, got {n}"
            )))
        }
    };
    let matrices = labels.iter().map(|&l| pauli(l)).collect();
    Ok(ObservableSet { labels, matrices })
}

/// Sum in a fixed binary-tree order, independent of how the input was produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationTensor {
    pub num_states: usize,
    pub num_observables: usize,
    pub num_realizations: usize,
    /// `K × (states · observables)`.
    pub per_realization: Vec<f64>,
    /// Arithmetic mean over realizations.
    pub averaged: Vec<f64>,
}

impl ExpectationTensor {
    pub fn entries_per_realization(&self) -> usize {
        self.num_states * self.num_observables
    }

    pub fn realization(&self, k: usize) -> &[f64] {
        let n = self.entries_per_realization();
        &self.per_realization[k * n..(k + 1) * n]
    }

    pub fn from_rows(num_states: usize, num_observables: usize, rows: Vec<Vec<f64>>) -> Self {
        let n = num_states * num_observables;
        let k = rows.len();
        let per_realization: Vec<f64> = rows.into_iter().flatten().collect();
        let averaged = (0..n)
            .map(|e| {
                let column: Vec<f64> = (0..k).map(|r| per_realization[r * n + e]).collect();
                pairwise_sum(&column) / k as f64
            })
            .collect();
        Self {
            num_states,
            num_observables,
            num_realizations: k,
            per_realization,
            averaged,
        }
    }
}

/// `Re Tr(U ρ U† O)` for every (state, observable), state-major.
pub fn expectations_for(
    states: &InitialStateSet,
    obs: &ObservableSet,
    u: &ComplexMatrix,
) -> Result<Vec<f64>> {
    let ud = u.adjoint();
    let mut row = Vec::with_capacity(states.states.len() * obs.matrices.len());
    for rho in &states.states {
        let evolved = *u * *rho * ud;
        for o in &obs.matrices {
            let t = trace_of_product(&evolved, o);
            if t.im.abs() > MC_IMAG_TOL {
                return Err(Error::ImaginaryLeak { imag: t.im });
            }
            row.push(t.re);
        }
    }
    Ok(row)
}

/// Per-realization expectations and their Monte Carlo mean.
pub fn monte_carlo(
    states: &InitialStateSet,
    obs: &ObservableSet,
    propagators: &[ComplexMatrix],
) -> Result<ExpectationTensor> {
    if propagators.is_empty() {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let rows: Vec<Vec<f64>> = propagators
        .par_iter()
        .map(|u| expectations_for(states, obs, u))
        .collect::<Result<_>>()?;
    Ok(ExpectationTensor::from_rows(
        states.states.len(),
        obs.matrices.len(),
        rows,
    ))
}

fn observable_inverse(o: &ComplexMatrix) -> Result<ComplexMatrix> {
    let sq = *o * *o;
    if sq.max_abs_diff(&ComplexMatrix::identity(o.dim())) <= 1e-14 {
        return Ok(*o);
    }
    o.inverse().ok_or(Error::NotInvertible)
}

/// W_O = O⁻¹·Ũ_I†·O·Ũ_I with Ũ_I = U·U₀⁻¹.
pub fn w_operator(u: &ComplexMatrix, u0: &ComplexMatrix, o: &ComplexMatrix) -> Result<ComplexMatrix> {
    let o_inv = observable_inverse(o)?;
    let ui = crate::evolution::interaction_unitary(u, u0)?;
    Ok(o_inv * ui.adjoint() * *o * ui)
}

/// W_O from a precomputed interaction unitary.
pub fn w_from_interaction(ui: &ComplexMatrix, o: &ComplexMatrix) -> Result<ComplexMatrix> {
    let o_inv = observable_inverse(o)?;
    Ok(o_inv * ui.adjoint() * *o * *ui)
}

/// Entrywise mean of the W_O operators over realizations.
pub fn v_operator(ws: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = ws
        .first()
        .ok_or_else(|| Error::InvalidConfig("V_O needs at least one realization".into()))?;
    let dim = first.dim();
    let n = dim * dim;
    let k = ws.len() as f64;
    let mut entries = Vec::with_capacity(n);
    for e in 0..n {
        let re: Vec<f64> = ws.iter().map(|w| w.entries()[e].re).collect();
        let im: Vec<f64> = ws.iter().map(|w| w.entries()[e].im).collect();
        entries.push(num_complex::Complex64::new(
            pairwise_sum(&re) / k,
            pairwise_sum(&im) / k,
        ));
    }
    ComplexMatrix::from_entries(dim, &entries)
}

/// `Re Tr(W·U₀ρU₀†·O)`, the expectation rebuilt from a noise operator.
pub fn reconstruct_expectation(
    w: &ComplexMatrix,
    u0: &ComplexMatrix,
    rho: &ComplexMatrix,
    o: &ComplexMatrix,
) -> f64 {
    let lambda = *u0 * *rho * u0.adjoint();
    trace_of_product(&(*w * lambda), o).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve;
    use crate::hamiltonian::{drift, system_slices, EnergyGaps, SystemCategory};
    use crate::qlinalg::expm_unitary;

    fn random_unitary(dim: usize, seed: f64) -> ComplexMatrix {
        let ops: Vec<ComplexMatrix> = if dim == 2 {
            vec![Pauli::X.matrix(), Pauli::Y.matrix(), Pauli::Z.matrix()]
        } else {
            observables(2).unwrap().matrices
        };
        let h = ops
            .iter()
            .enumerate()
            .fold(ComplexMatrix::zeros(dim), |acc, (i, o)| {
                acc + o.scale((seed * (i as f64 + 1.3)).sin())
            });
        expm_unitary(&h, 1.7).unwrap()
    }

    #[test]
    fn state_sets() {
        let s1 = initial_states(1).unwrap();
        assert_eq!(s1.states.len(), 6);
        assert_eq!(s1.labels, ["x+", "x-", "y+", "y-", "z+", "z-"]);
        assert_eq!(s1.states[4], ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, 0.0]]));
        let s2 = initial_states(2).unwrap();
        assert_eq!(s2.states.len(), 36);
        assert_eq!(s2.labels[1], "x+x-");
        for rho in s1.states.iter().chain(&s2.states) {
            assert!((rho.trace().re - 1.0).abs() < 1e-15);
            assert!(rho.hermiticity_residual() == 0.0);
            // Pure projector: ρ² = ρ.
            assert!((*rho * *rho).max_abs_diff(rho) < 1e-15);
        }
        assert!(initial_states(3).is_err());
    }

    #[test]
    fn observable_sets() {
        let o1 = observables(1).unwrap();
        assert_eq!(o1.labels, [Pauli::X, Pauli::Y, Pauli::Z].map(PauliLabel::One));
        let o2 = observables(2).unwrap();
        assert_eq!(o2.matrices.len(), 15);
        assert!(!o2.labels.contains(&PauliLabel::Two(Pauli::I, Pauli::I)));
        assert_eq!(o2.labels[0], PauliLabel::Two(Pauli::I, Pauli::X));
        for o in &o2.matrices {
            assert!(o.trace().norm() < 1e-15);
        }
        assert_eq!(initial_states(1).unwrap().states.len() * o1.matrices.len(), 18);
        assert_eq!(initial_states(2).unwrap().states.len() * o2.matrices.len(), 540);
    }

    #[test]
    fn noiseless_zero_control_conserves_sigma_z() {
        let gaps = EnergyGaps::default();
        let zeros = vec![0.0; 256];
        let slices = system_slices(SystemCategory::Cat1, &gaps, &[&zeros], false).unwrap();
        let u = evolve(&slices, 1.0 / 256.0, false).unwrap().final_unitary;
        let t = monte_carlo(&initial_states(1).unwrap(), &observables(1).unwrap(), &[u]).unwrap();
        // state z+ (index 4), observable σz (index 2)
        assert!((t.averaged[4 * 3 + 2] - 1.0).abs() < 1e-12);
        assert_eq!(drift(SystemCategory::Cat1, &gaps), Pauli::Z.matrix().scale(6.0));
    }

    #[test]
    fn single_realization_average_is_exact() {
        let u = random_unitary(2, 0.3);
        let t = monte_carlo(&initial_states(1).unwrap(), &observables(1).unwrap(), &[u]).unwrap();
        assert_eq!(t.averaged, t.per_realization);
        assert!(monte_carlo(&initial_states(1).unwrap(), &observables(1).unwrap(), &[]).is_err());
    }

    #[test]
    fn w_operator_examples() {
        let u0 = random_unitary(2, 0.8);
        let o = Pauli::Y.matrix();
        assert!(w_operator(&u0, &u0, &o).unwrap().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
        let u = random_unitary(2, 2.1);
        let id = ComplexMatrix::identity(2);
        assert!(w_operator(&u, &u0, &id).unwrap().max_abs_diff(&id) < 1e-14);
        assert!(matches!(
            w_operator(&u, &u0, &ComplexMatrix::zeros(2)),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn reconstruction_identity() {
        for dim in [2, 4] {
            let states = initial_states(dim / 2).unwrap();
            let obs = observables(dim / 2).unwrap();
            for seed in 0..5 {
                let u0 = random_unitary(dim, 0.37 + seed as f64);
                let u = random_unitary(dim, 1.91 * seed as f64 + 0.2);
                let direct = expectations_for(&states, &obs, &u).unwrap();
                for (o_idx, o) in obs.matrices.iter().enumerate() {
                    let w = w_operator(&u, &u0, o).unwrap();
                    for (s_idx, rho) in states.states.iter().enumerate() {
                        let rebuilt = reconstruct_expectation(&w, &u0, rho, o);
                        let expected = direct[s_idx * obs.matrices.len() + o_idx];
                        assert!((rebuilt - expected).abs() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn v_operator_examples() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(v_operator(&[id, id, id]).unwrap(), id);
        let w = random_unitary(2, 0.5);
        assert_eq!(v_operator(&[w]).unwrap(), w);
        assert!(v_operator(&[]).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive_sum() {
        let v: Vec<f64> = (0..1001).map(|i| (i as f64).sqrt()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-9);
    }
}
