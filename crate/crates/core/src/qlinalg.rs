//! Dense complex matrices of dimension 2 and 4.
//!
//! Everything the simulator touches (states, Hamiltonians, propagators and
//! observables) lives in a [`ComplexMatrix`]. The type is `Copy` and stores
//! its entries inline, so slices of thousands of matrices stay contiguous.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;
pub const IMAG_LEAK_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major square complex matrix with `dim` ∈ {2, 4}.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; 16],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "unsupported matrix dimension {dim}");
        Self {
            dim,
            data: [ZERO; 16],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from `dim²` row-major entries.
    pub fn from_entries(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::InvalidConfig(format!(
                "matrix dimension must be 2 or 4, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        let mut m = Self::zeros(dim);
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `dim²` row-major entries.
    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.data.iter_mut().for_each(|z| *z *= s);
        out
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut out = *self;
        out.data.iter_mut().for_each(|z| *z *= s);
        out
    }

    /// ‖A − A†‖_F
    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }

    /// ‖A†A − I‖_F
    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self - Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(())
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(())
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.data;
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
                .unwrap_or(col);
            if a[pivot * n + col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] -= factor * v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.dim;
        let mut a = self.data;
        let mut inv = Self::identity(n).data;
        let scale = self.frobenius_norm();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))?;
            if a[pivot * n + col].norm() <= 1e-14 * scale {
                return None;
            }
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
                inv.swap(col * n + j, pivot * n + j);
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (av, iv) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= f * av;
                    inv[r * n + j] -= f * iv;
                }
            }
        }
        Some(Self { dim: n, data: inv })
    }

    /// Kronecker product `self ⊗ other`; both factors must be 2×2.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        tensor(self, other)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * self.dim + j]
    }
}

impl Add for ComplexMatrix {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexMatrix {
    fn add_assign(&mut self, rhs: Self) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in addition");
        self.data
            .iter_mut()
            .zip(rhs.data.iter())
            .for_each(|(a, b)| *a += b);
    }
}

impl Sub for ComplexMatrix {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in subtraction");
        self.data
            .iter_mut()
            .zip(rhs.data.iter())
            .for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for ComplexMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Mul<ComplexMatrix> for f64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        rhs.scale(self)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let i = Complex64::i();
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => ComplexMatrix::from_real_rows([[0.0, 1.0], [1.0, 0.0]]),
            Pauli::Y => ComplexMatrix::from_rows([[ZERO, -i], [i, ZERO]]),
            Pauli::Z => ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]]),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A Pauli operator on one or two qubits. For two qubits the first factor
/// acts on the first qubit (left Kronecker factor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLabel {
    One(Pauli),
    Two(Pauli, Pauli),
}

impl PauliLabel {
    pub fn nqubits(&self) -> usize {
        match self {
            PauliLabel::One(_) => 1,
            PauliLabel::Two(..) => 2,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(
            self,
            PauliLabel::One(Pauli::I) | PauliLabel::Two(Pauli::I, Pauli::I)
        )
    }

    /// Compact string form, e.g. `"Z"` or `"ZX"`.
    pub fn name(&self) -> String {
        match self {
            PauliLabel::One(p) => p.symbol().to_string(),
            PauliLabel::Two(a, b) => format!("{}{}", a.symbol(), b.symbol()),
        }
    }
}

pub fn pauli(label: PauliLabel) -> ComplexMatrix {
    match label {
        PauliLabel::One(p) => p.matrix(),
        PauliLabel::Two(a, b) => {
            tensor(&a.matrix(), &b.matrix()).expect("Pauli factors are 2x2")
        }
    }
}

/// Kronecker product of two 2×2 matrices: `(a⊗b)[2i+k][2j+l] = a[i][j]·b[k][l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            let aij = a[(i, j)];
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix: `A = V·diag(λ)·V†`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: ComplexMatrix,
}

/// Cyclic complex Jacobi eigensolver. Each rotation first removes the phase
/// of the pivot `a_pq` and then applies a real Givens rotation.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    a.ensure_hermitian()?;
    let n = a.dim;
    let mut m = *a;
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = phase.conj(); // e^{−iφ}
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -e * s;
                let g_qq = e * c;

                // m ← m·G, v ← v·G
                for i in 0..n {
                    let (mip, miq) = (m[(i, p)], m[(i, q)]);
                    m[(i, p)] = mip * g_pp + miq * g_qp;
                    m[(i, q)] = mip * g_pq + miq * g_qq;
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = vip * g_pp + viq * g_qp;
                    v[(i, q)] = vip * g_pq + viq * g_qq;
                }
                // m ← G†·m
                for j in 0..n {
                    let (mpj, mqj) = (m[(p, j)], m[(q, j)]);
                    m[(p, j)] = g_pp.conj() * mpj + g_qp.conj() * mqj;
                    m[(q, j)] = g_pq.conj() * mpj + g_qq.conj() * mqj;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    let values = (0..n).map(|i| m[(i, i)].re).collect();
    Ok(HermitianEigen { values, vectors: v })
}

/// `exp(−i·h·dt)` for Hermitian `h`.
///
/// Uses the Pauli-rotation closed form for 2×2 inputs and a Jacobi
/// eigendecomposition for 4×4 inputs.
pub fn expm_unitary(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    h.ensure_hermitian()?;
    match h.dim {
        2 => Ok(expm_pauli_rotation(h, dt)),
        _ => {
            let eig = hermitian_eigen(h)?;
            let n = h.dim;
            let phases: Vec<Complex64> = eig
                .values
                .iter()
                .map(|&lambda| Complex64::from_polar(1.0, -lambda * dt))
                .collect();
            let v = &eig.vectors;
            let mut out = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = ZERO;
                    for (k, ph) in phases.iter().enumerate() {
                        acc += v[(i, k)] * ph * v[(j, k)].conj();
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// h = a₀·I + n·σ  ⇒  e^{−ih·dt} = e^{−ia₀dt}(cos(|n|dt)·I − i·sin(|n|dt)·n̂·σ)
fn expm_pauli_rotation(h: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = 0.5 * (h[(0, 1)] + h[(1, 0)].conj());
    let a0 = 0.5 * (a + d);
    let nz = 0.5 * (a - d);
    let nx = b.re;
    let ny = -b.im;
    let r = (nx * nx + ny * ny + nz * nz).sqrt();
    let (cos, sinc) = if r > 0.0 {
        ((r * dt).cos(), (r * dt).sin() / r)
    } else {
        (1.0, dt)
    };
    let global = Complex64::from_polar(1.0, -a0 * dt);
    let mi = Complex64::new(0.0, -sinc);
    // cos·I − i·sinc·(nx σx + ny σy + nz σz)
    let m00 = Complex64::new(cos, 0.0) + mi * nz;
    let m11 = Complex64::new(cos, 0.0) - mi * nz;
    let m01 = mi * Complex64::new(nx, -ny);
    let m10 = mi * Complex64::new(nx, ny);
    ComplexMatrix::from_rows([[m00, m01], [m10, m11]]).scale_complex(global)
}

/// Re Tr(ρ·O); the imaginary part must not exceed [`IMAG_LEAK_TOL`].
pub fn expectation(rho: &ComplexMatrix, o: &ComplexMatrix) -> Result<f64> {
    let t = trace_of_product(rho, o);
    if t.im.abs() > IMAG_LEAK_TOL {
        return Err(Error::ImaginaryLeak { imag: t.im });
    }
    Ok(t.re)
}

/// Tr(A·B) without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    assert_eq!(a.dim, b.dim, "dimension mismatch in trace product");
    let n = a.dim;
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a.data[i * n + k] * b.data[k * n + i];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(dim: usize, vals: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        let mut it = vals.iter().copied().cycle();
        for i in 0..dim {
            m[(i, i)] = c(it.next().unwrap(), 0.0);
            for j in i + 1..dim {
                let z = c(it.next().unwrap(), it.next().unwrap());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Taylor series of exp(−i·h·dt), 20 terms.
    fn taylor_expm(h: &ComplexMatrix, dt: f64) -> ComplexMatrix {
        let n = h.dim();
        let gen = h.scale_complex(c(0.0, -dt));
        let mut term = ComplexMatrix::identity(n);
        let mut sum = term;
        for k in 1..=20 {
            term = (term * gen).scale(1.0 / k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn pauli_z_and_identity() {
        assert_eq!(
            pauli(PauliLabel::One(Pauli::Z)),
            ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]])
        );
        assert_eq!(pauli(PauliLabel::One(Pauli::I)), ComplexMatrix::identity(2));
    }

    #[test]
    fn pauli_z_tensor_x_matches_worked_matrix() {
        let expected = ComplexMatrix::from_real_rows([
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]);
        assert_eq!(pauli(PauliLabel::Two(Pauli::Z, Pauli::X)), expected);
        let zx = tensor(&Pauli::Z.matrix(), &Pauli::X.matrix()).unwrap();
        assert_eq!(zx, expected);
    }

    #[test]
    fn tensor_identity_and_dimension_check() {
        let i4 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        assert!(matches!(
            tensor(&ComplexMatrix::identity(4), &ComplexMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tensor_x_x_against_index_formula() {
        let x = Pauli::X.matrix();
        let xx = tensor(&x, &x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(xx[(2 * i + k, 2 * j + l)], x[(i, j)] * x[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn expm_zero_is_identity() {
        for dim in [2, 4] {
            let u = expm_unitary(&ComplexMatrix::zeros(dim), 0.3).unwrap();
            assert!(u.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-15);
        }
    }

    #[test]
    fn expm_half_turn_about_x() {
        let dt = 0.01;
        let h = Pauli::X.matrix().scale(PI / (2.0 * dt));
        let u = expm_unitary(&h, dt).unwrap();
        let expected = Pauli::X.matrix().scale_complex(c(0.0, -1.0));
        assert!(u.max_abs_diff(&expected) < 1e-14, "{u:?}");
    }

    #[test]
    fn expm_4x4_matches_taylor_series() {
        let h = random_hermitian(4, &[0.7, -1.3, 2.1, 0.4, -0.9, 1.7, 0.2, -2.4, 1.1, 0.05]);
        let u = expm_unitary(&h, 0.01).unwrap();
        let oracle = taylor_expm(&h, 0.01);
        assert!(u.max_abs_diff(&oracle) < 1e-12);
        assert!(u.unitarity_residual() < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            expm_unitary(&h, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn jacobi_reconstructs_degenerate_spectrum() {
        // σz⊗σ0 has a doubly degenerate spectrum.
        let h = pauli(PauliLabel::Two(Pauli::Z, Pauli::I))
            + pauli(PauliLabel::Two(Pauli::X, Pauli::X)).scale(1e-3);
        let eig = hermitian_eigen(&h).unwrap();
        let mut recon = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                recon[(i, j)] = (0..4)
                    .map(|k| eig.vectors[(i, k)] * eig.values[k] * eig.vectors[(j, k)].conj())
                    .sum();
            }
        }
        assert!(recon.max_abs_diff(&h) < 1e-14);
        assert!(eig.vectors.unitarity_residual() < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let one = ComplexMatrix::from_real_rows([[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(expectation(&one, &Pauli::Z.matrix()).unwrap(), -1.0);
        let mixed = ComplexMatrix::identity(2).scale(0.5);
        assert_eq!(expectation(&mixed, &Pauli::X.matrix()).unwrap(), 0.0);
        let plus = (ComplexMatrix::identity(2) + Pauli::X.matrix()).scale(0.5);
        assert_eq!(expectation(&plus, &Pauli::X.matrix()).unwrap(), 1.0);
    }

    #[test]
    fn expectation_flags_imaginary_leak() {
        // Non-Hermitian "state" produces a complex trace.
        let mut bad = ComplexMatrix::zeros(2);
        bad[(0, 0)] = c(1.0, 1e-6);
        assert!(matches!(
            expectation(&bad, &Pauli::Z.matrix()),
            Err(Error::ImaginaryLeak { .. })
        ));
    }

    #[test]
    fn inverse_examples() {
        let h = random_hermitian(4, &[0.7, -1.3, 2.1, 0.4, -0.9, 1.7, 0.2, -2.4, 1.1, 0.05]);
        let inv = h.inverse().unwrap();
        assert!((h * inv).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        assert_eq!(Pauli::X.matrix().inverse().unwrap(), Pauli::X.matrix());
        assert!(ComplexMatrix::zeros(2).inverse().is_none());
    }

    #[test]
    fn determinant_of_pauli_is_minus_one() {
        assert!((Pauli::Y.matrix().determinant() - c(-1.0, 0.0)).norm() < 1e-15);
        let zx = pauli(PauliLabel::Two(Pauli::Z, Pauli::X));
        assert!((zx.determinant() - c(1.0, 0.0)).norm() < 1e-15);
    }

    fn hermitian_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-5.0f64..5.0, 16).prop_map(move |v| random_hermitian(dim, &v))
    }

    proptest! {
        #[test]
        fn expm_is_unitary_and_additive_2(h in hermitian_strategy(2), a in 0.0f64..0.5, b in 0.0f64..0.5) {
            let ua = expm_unitary(&h, a).unwrap();
            let ub = expm_unitary(&h, b).unwrap();
            let uab = expm_unitary(&h, a + b).unwrap();
            prop_assert!(ua.unitarity_residual() <= 1e-10);
            prop_assert!((ua * ub).max_abs_diff(&uab) <= 1e-11);
        }

        #[test]
        fn expm_is_unitary_and_additive_4(h in hermitian_strategy(4), a in 0.0f64..0.5, b in 0.0f64..0.5) {
            let ua = expm_unitary(&h, a).unwrap();
            let ub = expm_unitary(&h, b).unwrap();
            let uab = expm_unitary(&h, a + b).unwrap();
            prop_assert!(ua.unitarity_residual() <= 1e-10);
            prop_assert!((ua * ub).max_abs_diff(&uab) <= 1e-11);
        }

        #[test]
        fn expm_matches_taylor_for_small_steps(h in hermitian_strategy(4)) {
            let u = expm_unitary(&h, 0.01).unwrap();
            prop_assert!(u.max_abs_diff(&taylor_expm(&h, 0.01)) <= 1e-12);
        }

        #[test]
        fn tensor_matches_index_formula(av in prop::collection::vec(-3.0f64..3.0, 8),
                                        bv in prop::collection::vec(-3.0f64..3.0, 8)) {
            let to_m = |v: &[f64]| ComplexMatrix::from_entries(
                2, &(0..4).map(|i| c(v[2 * i], v[2 * i + 1])).collect::<Vec<_>>()).unwrap();
            let (a, b) = (to_m(&av), to_m(&bv));
            let ab = tensor(&a, &b).unwrap();
            for i in 0..2 { for j in 0..2 { for k in 0..2 { for l in 0..2 {
                prop_assert_eq!(ab[(2 * i + k, 2 * j + l)], a[(i, j)] * b[(k, l)]);
            }}}}
        }

        #[test]
        fn pauli_expectation_is_bounded(theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), r in 0.0f64..1.0) {
            let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
            let rho = (ComplexMatrix::identity(2)
                + Pauli::X.matrix().scale(x)
                + Pauli::Y.matrix().scale(y)
                + Pauli::Z.matrix().scale(z)).scale(0.5);
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let e = expectation(&rho, &p.matrix()).unwrap();
                prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&e));
            }
        }
    }
}
