//! Time-ordered propagation through piecewise-constant Hamiltonians.

use crate::error::{Error, Result};
use crate::qlinalg::{expm_unitary, ComplexMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorTrace {
    pub final_unitary: ComplexMatrix,
    /// `U(t_j) = U_j···U_0` after each slice, when retained.
    pub intermediates: Option<Vec<ComplexMatrix>>,
    pub dt: f64,
}

/// Accumulates `U ← e^{−iH_jδ}·U` over the slices in order.
pub fn evolve_iter<I>(slices: I, dim: usize, dt: f64, keep_intermediates: bool) -> Result<PropagatorTrace>
where
    I: IntoIterator<Item = ComplexMatrix>,
{
    let mut u = ComplexMatrix::identity(dim);
    let mut intermediates = keep_intermediates.then(Vec::new);
    let mut count = 0usize;
    for h in slices {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: h.dim(),
            });
        }
        u = expm_unitary(&h, dt)? * u;
        if let Some(v) = intermediates.as_mut() {
            v.push(u);
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidConfig("evolution needs at least one slice".into()));
    }
    Ok(PropagatorTrace {
        final_unitary: u,
        intermediates,
        dt,
    })
}

pub fn evolve(slices: &[ComplexMatrix], dt: f64, keep_intermediates: bool) -> Result<PropagatorTrace> {
    let dim = slices.first().map_or(2, |h| h.dim());
    evolve_iter(slices.iter().copied(), dim, dt, keep_intermediates)
}

/// Evolves under `H₀(t_j) + H₁(t_j)` without materializing the sums.
pub fn evolve_sum(
    system: &[ComplexMatrix],
    noise: &[ComplexMatrix],
    dt: f64,
    keep_intermediates: bool,
) -> Result<PropagatorTrace> {
    if system.len() != noise.len() {
        return Err(Error::DimensionMismatch {
            expected: system.len(),
            actual: noise.len(),
        });
    }
    let dim = system.first().map_or(2, |h| h.dim());
    evolve_iter(
        system.iter().zip(noise).map(|(a, b)| *a + *b),
        dim,
        dt,
        keep_intermediates,
    )
}

/// Ũ_I solving `U = Ũ_I·U₀`.
///
/// Uses U₀⁻¹ rather than U₀†: after many slices U₀ is unitary only to
/// accumulated rounding, and the inverse keeps Ũ_I = I exactly when U = U₀.
pub fn interaction_unitary(u: &ComplexMatrix, u0: &ComplexMatrix) -> Result<ComplexMatrix> {
    u.ensure_unitary()?;
    u0.ensure_unitary()?;
    Ok(*u * u0.inverse().ok_or(Error::NotInvertible)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{pauli, Pauli, PauliLabel};
    use proptest::prelude::*;

    fn slices_from(values: &[f64], dim: usize) -> Vec<ComplexMatrix> {
        let ops: Vec<ComplexMatrix> = if dim == 2 {
            [Pauli::X, Pauli::Y, Pauli::Z].iter().map(|p| p.matrix()).collect()
        } else {
            [
                PauliLabel::Two(Pauli::Z, Pauli::I),
                PauliLabel::Two(Pauli::I, Pauli::Z),
                PauliLabel::Two(Pauli::X, Pauli::I),
                PauliLabel::Two(Pauli::I, Pauli::X),
                PauliLabel::Two(Pauli::X, Pauli::X),
            ]
            .into_iter()
            .map(pauli)
            .collect()
        };
        values
            .chunks(ops.len())
            .filter(|c| c.len() == ops.len())
            .map(|c| {
                c.iter()
                    .zip(&ops)
                    .fold(ComplexMatrix::zeros(dim), |acc, (v, o)| acc + o.scale(*v))
            })
            .collect()
    }

    #[test]
    fn zero_slices_give_identity() {
        let trace = evolve(&vec![ComplexMatrix::zeros(4); 16], 0.1, false).unwrap();
        assert_eq!(trace.final_unitary, ComplexMatrix::identity(4));
    }

    #[test]
    fn empty_and_mixed_dims_rejected() {
        assert!(evolve(&[], 0.1, false).is_err());
        assert!(evolve(&[ComplexMatrix::zeros(2), ComplexMatrix::zeros(4)], 0.1, false).is_err());
        let mut bad = ComplexMatrix::zeros(2);
        bad[(0, 1)] = num_complex::Complex64::new(1.0, 0.0);
        assert!(evolve(&[bad], 0.1, false).is_err());
    }

    #[test]
    fn constant_slice_matches_single_exponential() {
        let h = Pauli::X.matrix().scale(3.0) + Pauli::Z.matrix().scale(6.0);
        let m = 1024;
        let dt = 1.0 / m as f64;
        let trace = evolve(&vec![h; m], dt, true).unwrap();
        let direct = expm_unitary(&h, 1.0).unwrap();
        assert!(trace.final_unitary.max_abs_diff(&direct) < 1e-12);
        assert_eq!(trace.intermediates.as_ref().unwrap().len(), m);
        assert_eq!(*trace.intermediates.unwrap().last().unwrap(), trace.final_unitary);
    }

    #[test]
    fn substepping_oracle_agrees() {
        let values: Vec<f64> = (0..3 * 64).map(|i| 20.0 * ((i as f64) * 0.37).sin()).collect();
        let slices = slices_from(&values, 2);
        let dt = 1.0 / 64.0;
        let coarse = evolve(&slices, dt, false).unwrap().final_unitary;
        let fine: Vec<ComplexMatrix> = slices.iter().flat_map(|h| std::iter::repeat_n(*h, 16)).collect();
        let fine = evolve(&fine, dt / 16.0, false).unwrap().final_unitary;
        assert!(coarse.max_abs_diff(&fine) < 1e-12);
    }

    #[test]
    fn interaction_unitary_examples() {
        let u0 = expm_unitary(&Pauli::Y.matrix(), 0.4).unwrap();
        let u = expm_unitary(&(Pauli::X.matrix() + Pauli::Z.matrix()), 0.9).unwrap();
        let ui = interaction_unitary(&u0, &u0).unwrap();
        assert!(ui.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        let ui = interaction_unitary(&u, &u0).unwrap();
        assert!((ui * u0).max_abs_diff(&u) < 1e-12);
        assert!(interaction_unitary(&Pauli::X.matrix().scale(2.0), &u0).is_err());
    }

    proptest! {
        #[test]
        fn group_property_and_unitarity(values in prop::collection::vec(-30.0f64..30.0, 5 * 24), split in 1usize..23) {
            let slices = slices_from(&values, 4);
            let dt = 1.0 / 24.0;
            let full = evolve(&slices, dt, true).unwrap();
            let head = evolve(&slices[..split], dt, false).unwrap().final_unitary;
            let tail = evolve(&slices[split..], dt, false).unwrap().final_unitary;
            prop_assert!((tail * head).max_abs_diff(&full.final_unitary) <= 1e-11);
            for u in full.intermediates.unwrap() {
                prop_assert!(u.unitarity_residual() <= 1e-10);
                prop_assert!((u.determinant().norm() - 1.0).abs() <= 1e-10);
            }
        }
    }
}
