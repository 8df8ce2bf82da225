//! Dense complex matrices, pure states and density matrices.
//!
//! Dimensions here are tiny (4 for two qubits, at most a few hundred for the
//! Mermin-star family), so everything is a row-major `Vec<C64>`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

// sqrt and trig resolve to libm unless some dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Structural tolerance (Hermiticity, commutation, involution, trace).
pub const TOL: f64 = 1e-9;
/// Tolerance for the imaginary part of an expectation value that must be real.
pub const REAL_TOL: f64 = 1e-12;
/// Maximum distance from unit norm a ket may have before it is rejected.
pub const RENORM_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from row-major entries.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be nonzero"));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_entries(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// |v⟩⟨v| for a (not necessarily normalized) vector.
    pub fn outer(v: &[C64]) -> Self {
        let d = v.len();
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Square dimension; only meaningful when [`is_square`](Self::is_square).
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max-magnitude entry of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        debug_assert_eq!(self.entries.len(), other.entries.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Matrix product; errors on inner-dimension mismatch.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.entries[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::invalid(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Tr(self · other) in O(d²) without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::invalid(format!(
                "trace of {}x{} times {}x{} is undefined",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self[(i, j)] * other[(j, i)];
            }
        }
        Ok(acc)
    }

    fn same_shape(&self, other: &ComplexMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_shape(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_shape(other)?;
        Ok(self - other)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on shape mismatch; use [`ComplexMatrix::try_add`] for checked addition.
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("inner dimension mismatch")
    }
}

/// Pauli and identity matrices on one qubit.
pub mod pauli {
    use super::*;

    pub fn i2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_entries(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
            .unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }
}

/// Tensor (Kronecker) product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows == 0 || a.cols == 0 || b.rows == 0 || b.cols == 0 {
        return Err(Error::invalid("kron of a zero-dimensional matrix"));
    }
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let s = a[(ai, aj)];
            if s == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = s * b[(bi, bj)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a non-empty list, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::invalid("kron of an empty factor list"))?;
    rest.iter().try_fold(first.clone(), |acc, f| kron(&acc, f))
}

/// Ordered product `factors[0] · factors[1] · …`; identity of dimension `dim` if empty.
pub fn ordered_product(dim: usize, factors: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(dim);
    for f in factors {
        if !f.is_square() || f.dim() != dim {
            return Err(Error::invalid(format!(
                "factor of shape {}x{} in a product of dimension {}",
                f.rows(),
                f.cols(),
                dim
            )));
        }
        acc = acc.matmul(f)?;
    }
    Ok(acc)
}

/// Tr(ρ · Π factors), factors multiplied left to right.
pub fn product_trace(rho: &DensityMatrix, factors: &[&ComplexMatrix]) -> Result<C64> {
    let prod = ordered_product(rho.dim(), factors)?;
    rho.matrix().trace_product(&prod)
}

/// True iff max |ab − ba| ≤ tol.
pub fn commutes(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<bool> {
    if !a.is_square() || !b.is_square() || a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "commutator of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(ab.max_abs_diff(&ba) <= tol)
}

/// Hermitian and squares to the identity.
pub fn is_involution(a: &ComplexMatrix, tol: f64) -> bool {
    if !a.is_square() || !a.is_hermitian(tol) {
        return false;
    }
    let sq = a * a;
    sq.max_abs_diff(&ComplexMatrix::identity(a.dim())) <= tol
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Renormalizes when the norm is within [`RENORM_TOL`] of one, rejects otherwise.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("empty state vector"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > RENORM_TOL {
            return Err(Error::invalid(format!("state vector norm {norm} is not 1")));
        }
        Ok(StateVector { amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || !norm.is_finite() || norm <= 0.0 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(StateVector { amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        StateVector { amplitudes: amps }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { matrix: ComplexMatrix::outer(&self.amplitudes) }
    }
}

/// A Hermitian, unit-trace operator.
///
/// Positivity is not checked on construction; call
/// [`is_positive_semidefinite`](Self::is_positive_semidefinite) when the source is untrusted.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        if !matrix.is_hermitian(TOL) {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} is not 1")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be nonzero"));
        }
        Ok(DensityMatrix { matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)) })
    }

    /// Convex combination `p·a + (1−p)·b`.
    pub fn mix(p: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("mixing weight outside [0, 1]"));
        }
        let m = a
            .matrix
            .scale(C64::new(p, 0.0))
            .try_add(&b.matrix.scale(C64::new(1.0 - p, 0.0)))?;
        Ok(DensityMatrix { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Checks eigenvalues ≥ −tol by attempting a Cholesky factorization of ρ + tol·𝟙.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut a = self.matrix.clone();
        for i in 0..d {
            a[(i, i)] += C64::new(tol, 0.0);
        }
        let mut l = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let mut diag = a[(j, j)].re;
            for k in 0..j {
                diag -= l[(j, k)].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[(j, j)] = C64::new(ljj, 0.0);
            for i in j + 1..d {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        true
    }

    /// Lüders update Π ρ Π / Tr(Π ρ Π); `None` when the branch has probability below `min_prob`.
    pub(crate) fn project(&self, proj: &ComplexMatrix, min_prob: f64) -> Option<(DensityMatrix, f64)> {
        let m = proj * &(&self.matrix * proj);
        let p = m.trace().re;
        if p < min_prob {
            return None;
        }
        Some((DensityMatrix { matrix: m.scale(C64::new(1.0 / p, 0.0)) }, p))
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&i2(), &i2()).unwrap(), ComplexMatrix::identity(4));
        let zz = kron(&z(), &z()).unwrap();
        assert_eq!(zz, ComplexMatrix::diagonal(&[c(1.0), c(-1.0), c(-1.0), c(1.0)]));
    }

    #[test]
    fn kron_z_x_first_row() {
        // Z⊗X = [[X, 0], [0, −X]]
        let zx = kron(&z(), &x()).unwrap();
        let row0: Vec<C64> = (0..4).map(|j| zx[(0, j)]).collect();
        assert_eq!(row0, vec![c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert_eq!(zx[(2, 3)], c(-1.0));
    }

    #[test]
    fn kron_rejects_empty() {
        let empty = ComplexMatrix { rows: 0, cols: 0, entries: Vec::new() };
        assert!(matches!(kron(&empty, &i2()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn product_trace_examples() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let id = ComplexMatrix::identity(4);
        assert!((product_trace(&mixed, &[&id]).unwrap() - c(1.0)).norm() < 1e-15);

        let s = 1.0 / 2f64.sqrt();
        let singlet = StateVector::new(vec![c(0.0), c(s), c(-s), c(0.0)]).unwrap().density();
        let zz = kron(&z(), &z()).unwrap();
        assert!((product_trace(&singlet, &[&zz]).unwrap() - c(-1.0)).norm() < 1e-12);

        let zero = StateVector::new(vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap().density();
        let zi = kron(&z(), &i2()).unwrap();
        let iz = kron(&i2(), &z()).unwrap();
        assert_eq!(product_trace(&zero, &[&zi, &iz]).unwrap(), c(1.0));
    }

    #[test]
    fn product_trace_dimension_mismatch() {
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(matches!(product_trace(&mixed, &[&z()]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn commutation_examples() {
        let zi = kron(&z(), &i2()).unwrap();
        let iz = kron(&i2(), &z()).unwrap();
        assert!(commutes(&zi, &iz, TOL).unwrap());
        assert!(!commutes(&z(), &x(), TOL).unwrap());
        let zz = kron(&z(), &z()).unwrap();
        let xx = kron(&x(), &x()).unwrap();
        assert!(commutes(&zz, &xx, TOL).unwrap());
        assert!(commutes(&zz, &x(), TOL).is_err());
    }

    #[test]
    fn involution_examples() {
        assert!(is_involution(&kron(&z(), &x()).unwrap(), TOL));
        let v = [c(0.6), C64::new(0.0, 0.8)];
        let a = &ComplexMatrix::outer(&v).scale(c(2.0)) - &i2();
        assert!(is_involution(&a, TOL));
        assert!(!is_involution(&(&z() + &x()), TOL));
    }

    #[test]
    fn state_vector_renormalizes_near_unit() {
        let (c3, s3) = (0.3f64.cos(), 0.3f64.sin());
        let rounded = vec![c((c3 * 1e6).round() / 1e6), c((s3 * 1e6).round() / 1e6)];
        let psi = StateVector::new(rounded).unwrap();
        let n: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-15);
        assert!(StateVector::new(vec![c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        let bad = ComplexMatrix::from_entries(2, 2, vec![c(0.5), c(1.0), c(0.0), c(0.5)]).unwrap();
        assert!(DensityMatrix::new(bad).is_err());
        let neg = ComplexMatrix::diagonal(&[c(1.5), c(-0.5)]);
        let rho = DensityMatrix::new(neg).unwrap();
        assert!(!rho.is_positive_semidefinite(TOL));
        assert!(DensityMatrix::maximally_mixed(4).unwrap().is_positive_semidefinite(TOL));
        let pure = StateVector::new(vec![c(0.6), c(0.8)]).unwrap().density();
        assert!(pure.is_positive_semidefinite(TOL));
    }
}
