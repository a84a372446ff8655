//! Dense complex linear algebra.
//!
//! [`CMatrix`] is the single carrier type for algebra elements, module
//! elements and operators. Matrices are stored row-major in double
//! precision; everything here is a pure function of immutable inputs.

mod eig;
mod rank;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eig::{expm_i, herm_eig, herm_eig_with, EigenDecomposition, MAX_SWEEPS};
pub use rank::rank_span;

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Wire form of a matrix: dims plus row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<CMatrix> for RawMatrix {
    fn from(m: CMatrix) -> Self {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<RawMatrix> for CMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let data = raw.data.iter().map(|&[re, im]| c(re, im)).collect();
        CMatrix::new(raw.rows, raw.cols, data)
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries, validating length and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Unchecked constructor for internal use where the invariants hold by construction.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        CMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMatrix::from_parts(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Diagonal matrix from complex entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag_real(entries: &[f64]) -> Self {
        let zs: Vec<Complex64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        CMatrix::diag(&zs)
    }

    /// Matrix unit: a `rows x cols` matrix with a single 1 at `(p, q)`.
    pub fn unit(rows: usize, cols: usize, p: usize, q: usize) -> Self {
        assert!(p < rows && q < cols, "matrix unit index out of range");
        let mut m = CMatrix::zeros(rows, cols);
        m[(p, q)] = ONE;
        m
    }

    /// Builds from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        let data = rows.iter().flatten().copied().collect();
        CMatrix::new(r, cols, data).expect("invalid matrix rows")
    }

    /// Builds from nested real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        CMatrix::from_rows(&rows)
    }

    /// Column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        CMatrix::new(entries.len(), 1, entries.to_vec()).expect("invalid column")
    }

    /// Standard basis vector `e_j` of length `n` as an `n x 1` matrix.
    pub fn basis(n: usize, j: usize) -> Self {
        CMatrix::unit(n, 1, j, 0)
    }

    /// Pauli X.
    pub fn pauli_x() -> Self {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries; this is also the vectorization used throughout.
    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)].conj());
            }
        }
        CMatrix::from_parts(self.cols, self.rows, out)
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> CMatrix {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        CMatrix::from_parts(self.cols, self.rows, out)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> CMatrix {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> CMatrix {
        CMatrix::from_parts(
            self.rows,
            self.cols,
            self.data.iter().map(|&z| f(z)).collect(),
        )
    }

    /// Complex matrix product.
    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(CMatrix::from_parts(n, p, out))
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        self.map(|z| z * s)
    }

    /// `alpha * self + other`.
    pub fn axpy(&self, alpha: Complex64, other: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| alpha * a + b)
            .collect();
        CMatrix::from_parts(self.rows, self.cols, data)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&z| z == ZERO)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Spectral norm: the largest singular value. Exactly 0 for the zero matrix.
    pub fn op_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Gram matrix on the smaller side.
        let gram = if self.rows <= self.cols {
            self * &self.adjoint()
        } else {
            &self.adjoint() * self
        };
        match herm_eig(&gram) {
            Ok(eig) => eig
                .eigenvalues
                .last()
                .copied()
                .unwrap_or(0.0)
                .max(0.0)
                .sqrt(),
            // Gram matrices are Hermitian by construction; a failure here can
            // only be non-convergence, so fall back to the Frobenius bound.
            Err(_) => self.frobenius_norm(),
        }
    }

    /// Spectral norm of `self - other`.
    pub fn dist(&self, other: &CMatrix) -> f64 {
        (self - other).op_norm()
    }

    /// Frobenius norm of `A - A*` relative to the Frobenius norm of `A`.
    /// Zero for the zero matrix; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (self - &self.adjoint()).frobenius_norm() / norm
    }

    /// `‖U*U - I‖` (spectral). Infinite for non-square input.
    pub fn unitary_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&(&self.adjoint() * self) - &CMatrix::identity(self.rows)).op_norm()
    }

    /// Hermitian part `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()).scale(c(0.5, 0.0))
    }

    /// Places `self` as a block at `(row, col)` inside a zero matrix of the given shape.
    pub fn embed(&self, rows: usize, cols: usize, row: usize, col: usize) -> Result<CMatrix> {
        if row + self.rows > rows || col + self.cols > cols {
            return Err(Error::DimensionMismatch {
                context: "block embedding",
                left: (rows, cols),
                right: (row + self.rows, col + self.cols),
            });
        }
        let mut out = CMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(row + i, col + j)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Matrix of `x ↦ self · x` on row-major vectorized `n×cols` matrices.
    pub fn left_action_matrix(&self, cols: usize) -> CMatrix {
        let (m, n) = self.shape();
        let mut out = CMatrix::zeros(m * cols, n * cols);
        for i in 0..m {
            for l in 0..n {
                let v = self[(i, l)];
                if v == ZERO {
                    continue;
                }
                for j in 0..cols {
                    out[(i * cols + j, l * cols + j)] = v;
                }
            }
        }
        out
    }

    /// Matrix of `x ↦ x · self` on row-major vectorized `rows×n` matrices.
    pub fn right_action_matrix(&self, rows: usize) -> CMatrix {
        let (n, p) = self.shape();
        let mut out = CMatrix::zeros(rows * p, rows * n);
        for i in 0..rows {
            for m in 0..n {
                for j in 0..p {
                    let v = self[(m, j)];
                    if v != ZERO {
                        out[(i * p + j, i * n + m)] = v;
                    }
                }
            }
        }
        out
    }

    /// Applies a vectorized linear map to `self` and reshapes to `rows×cols`.
    pub fn apply_vectorized(&self, map: &CMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
        let v = CMatrix::from_parts(self.data.len(), 1, self.data.clone());
        map.matmul(&v)?.reshape(rows, cols)
    }

    /// Reshapes the row-major entries into a new shape with the same size.
    pub fn reshape(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        if rows * cols != self.data.len() {
            return Err(Error::DimensionMismatch {
                context: "reshape",
                left: self.shape(),
                right: (rows, cols),
            });
        }
        CMatrix::new(rows, cols, self.data.clone())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on a dimension mismatch; use [`CMatrix::matmul`] for a fallible product.
impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Mul<Complex64> for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: Complex64) -> CMatrix {
        self.scale(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.axpy(ONE, rhs)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        rhs.axpy(-ONE, self)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale(-ONE)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix {}x{} ", self.rows, self.cols)?;
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_examples() {
        let a = CMatrix::from_rows(&[vec![ZERO, I], vec![ZERO, ZERO]]);
        let expected = CMatrix::from_rows(&[vec![ZERO, ZERO], vec![-I, ZERO]]);
        assert_eq!(a.adjoint(), expected);
        assert_eq!(CMatrix::identity(2).adjoint(), CMatrix::identity(2));
        let z = CMatrix::from_rows(&[vec![c(1.0, 1.0)]]);
        assert_eq!(z.adjoint(), CMatrix::from_rows(&[vec![c(1.0, -1.0)]]));
    }

    #[test]
    fn adjoint_transposes_dimensions() {
        let a = CMatrix::zeros(2, 3);
        assert_eq!(a.adjoint().shape(), (3, 2));
    }

    #[test]
    fn matmul_identity_and_units() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 0.0)], vec![c(-3.0, 1.0), I]]);
        assert_eq!(CMatrix::identity(2).matmul(&a).unwrap(), a);
        let e12 = CMatrix::unit(2, 2, 0, 1);
        let e21 = CMatrix::unit(2, 2, 1, 0);
        assert_eq!(e12.matmul(&e21).unwrap(), CMatrix::unit(2, 2, 0, 0));
    }

    #[test]
    fn matmul_matches_scalar_loop() {
        let a = CMatrix::from_rows(&[
            vec![c(0.3, -1.2), c(2.0, 0.1), c(-0.7, 0.4)],
            vec![c(1.1, 0.0), c(-0.2, 0.9), c(0.5, 0.5)],
        ]);
        let b = CMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(0.0, -2.0)],
            vec![c(-0.4, 0.3), c(1.5, 0.0)],
            vec![c(0.2, -0.6), c(0.8, 0.8)],
        ]);
        let prod = a.matmul(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += a[(i, k)] * b[(k, j)];
                }
                assert!((prod[(i, j)] - acc).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = CMatrix::zeros(2, 3)
            .matmul(&CMatrix::zeros(2, 2))
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(CMatrix::diag_real(&[3.0, -4.0]).op_norm(), 4.0);
        assert_eq!(CMatrix::zeros(3, 2).op_norm(), 0.0);
        // Largest root of λ² - 3λ + 1 for A*A = [[1,1],[1,2]], square-rooted.
        let a = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!((a.op_norm() - 1.618034).abs() < 5e-7);
    }

    #[test]
    fn op_norm_rectangular_matches_column_norm() {
        let x = CMatrix::column(&[c(3.0, 0.0), c(0.0, 4.0)]);
        assert!((x.op_norm() - 5.0).abs() < 1e-14);
        assert!((x.adjoint().op_norm() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(CMatrix::new(0, 1, vec![]).is_err());
        assert!(CMatrix::new(1, 2, vec![ONE]).is_err());
        assert!(CMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn serde_uses_pairs() {
        let m = CMatrix::from_rows(&[vec![c(1.0, -2.0), I]]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"rows":1,"cols":2,"data":[[1.0,-2.0],[0.0,1.0]]}"#);
        let back: CMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn action_matrices_match_products() {
        let g = CMatrix::from_rows(&[vec![c(1.0, 0.5), c(-2.0, 0.0)], vec![I, c(0.3, -0.7)]]);
        let x = CMatrix::from_rows(&[
            vec![c(0.2, 0.1), c(1.0, -1.0), c(0.0, 2.0)],
            vec![c(-1.0, 0.0), c(0.5, 0.5), c(3.0, 0.0)],
        ]);
        let left = x.apply_vectorized(&g.left_action_matrix(3), 2, 3).unwrap();
        assert!(left.dist(&(&g * &x)) < 1e-14);
        let y = x.adjoint();
        let right = y.apply_vectorized(&g.right_action_matrix(3), 3, 2).unwrap();
        assert!(right.dist(&(&y * &g)) < 1e-14);
    }

    #[test]
    fn embed_places_block() {
        let e = CMatrix::identity(2).embed(4, 4, 0, 0).unwrap();
        assert_eq!(e, CMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0]));
        assert!(CMatrix::identity(2).embed(3, 3, 2, 2).is_err());
    }
}
