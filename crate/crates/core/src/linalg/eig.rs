//! Hermitian eigendecomposition by cyclic Jacobi rotations, and the unitary
//! exponential built on it.

use num_complex::Complex64;

use super::{c, CMatrix, ZERO};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Sweep limit for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 30;

/// Convergence threshold: off-diagonal Frobenius mass relative to `‖A‖_F`.
const OFF_DIAGONAL_RTOL: f64 = 1e-13;

/// `A = Q diag(λ) Q*` with ascending eigenvalues and orthonormal columns in `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `Q diag(f(λ)) Q*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let q = &self.eigenvectors;
        let n = q.rows();
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for (k, &w) in weights.iter().enumerate() {
                    acc += q[(i, k)] * w * q[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `Q diag(λ) Q*`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|l| c(l, 0.0))
    }

    /// `‖Q*Q - I‖`.
    pub fn orthonormality_defect(&self) -> f64 {
        self.eigenvectors.unitary_defect()
    }

    /// `e^{itA} = Q diag(e^{itλ}) Q*`.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        if t == 0.0 {
            return CMatrix::identity(self.eigenvectors.rows());
        }
        self.apply_fn(|l| Complex64::from_polar(1.0, t * l))
    }
}

/// Eigendecomposition of a Hermitian matrix with the default Hermitian tolerance.
pub fn herm_eig(a: &CMatrix) -> Result<EigenDecomposition> {
    herm_eig_with(a, Tolerances::default().herm)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input must satisfy `‖A - A*‖_F ≤ herm_tol · ‖A‖_F`; it is symmetrized
/// before iterating so that roundoff-level asymmetry does not leak into the
/// eigenvalues.
pub fn herm_eig_with(a: &CMatrix, herm_tol: f64) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let defect = a.hermitian_defect();
    if defect > herm_tol {
        return Err(Error::NotHermitian {
            defect,
            tolerance: herm_tol,
        });
    }

    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut q = CMatrix::identity(n);
    let threshold = OFF_DIAGONAL_RTOL * m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for r in (p + 1)..n {
                rotate(&mut m, &mut q, p, r);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[(row, col)] = q[(row, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `e^{itT}` for Hermitian `T`, via the eigendecomposition of `T`.
pub fn expm_i(t_gen: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(herm_eig(t_gen)?.exp_i(t))
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One complex Jacobi rotation annihilating `m[(p, r)]`.
///
/// With `m[(p, r)] = |b| e^{iθ}` the rotation block is
/// `[[c, s e^{iθ}], [-s e^{-iθ}, c]]`, and `m <- J* m J`, `q <- q J`.
fn rotate(m: &mut CMatrix, q: &mut CMatrix, p: usize, r: usize) {
    let b = m[(p, r)];
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return;
    }
    let phase = b / abs_b;
    let app = m[(p, p)].re;
    let arr = m[(r, r)].re;
    let tau = (arr - app) / (2.0 * abs_b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;

    // J entries: J_pp = c, J_pr = s·phase, J_rp = -s·conj(phase), J_rr = c.
    let jpp = c(cs, 0.0);
    let jpr = phase * sn;
    let jrp = -phase.conj() * sn;
    let jrr = c(cs, 0.0);

    let n = m.rows();
    // Columns: m <- m J.
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkr = m[(k, r)];
        m[(k, p)] = mkp * jpp + mkr * jrp;
        m[(k, r)] = mkp * jpr + mkr * jrr;
    }
    // Rows: m <- J* m.
    for k in 0..n {
        let mpk = m[(p, k)];
        let mrk = m[(r, k)];
        m[(p, k)] = jpp.conj() * mpk + jrp.conj() * mrk;
        m[(r, k)] = jpr.conj() * mpk + jrr.conj() * mrk;
    }
    m[(p, r)] = ZERO;
    m[(r, p)] = ZERO;
    m[(p, p)] = c(m[(p, p)].re, 0.0);
    m[(r, r)] = c(m[(r, r)].re, 0.0);

    for k in 0..n {
        let qkp = q[(k, p)];
        let qkr = q[(k, r)];
        q[(k, p)] = qkp * jpp + qkr * jrp;
        q[(k, r)] = qkp * jpr + qkr * jrr;
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::linalg::I;

    /// Independent oracle: Taylor series of e^{itA} summed until terms vanish.
    fn taylor_exp_i(a: &CMatrix, t: f64) -> CMatrix {
        let n = a.rows();
        let x = a.scale(c(0.0, t));
        let mut term = CMatrix::identity(n);
        let mut sum = term.clone();
        for k in 1..200 {
            term = (&term * &x).scale(c(1.0 / k as f64, 0.0));
            sum += &term;
            if term.max_abs() < 1e-300 {
                break;
            }
        }
        sum
    }

    #[test]
    fn diagonal_input() {
        let eig = herm_eig(&CMatrix::diag_real(&[2.0, 1.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0]);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let eig = herm_eig(&CMatrix::pauli_x()).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert!(eig.orthonormality_defect() < 1e-14);
        assert!(eig.reconstruct().dist(&CMatrix::pauli_x()) < 1e-14);
    }

    #[test]
    fn permutation_similarity_keeps_spectrum() {
        let a = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5)],
            vec![c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.0)],
            vec![c(0.0, -0.5), c(0.3, 0.0), c(0.7, 0.0)],
        ]);
        let p = CMatrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let pap = &(&p * &a) * &p.adjoint();
        let e1 = herm_eig(&a).unwrap().eigenvalues;
        let e2 = herm_eig(&pap).unwrap().eigenvalues;
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_rows(&[vec![ZERO, I], vec![ZERO, ZERO]]);
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            herm_eig(&CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn zero_matrix_is_trivial() {
        let eig = herm_eig(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0; 3]);
        assert_eq!(eig.eigenvectors, CMatrix::identity(3));
    }

    #[test]
    fn expm_examples() {
        let x = CMatrix::pauli_x();
        assert_eq!(expm_i(&x, 0.0).unwrap(), CMatrix::identity(2));

        let oracle = taylor_exp_i(&x, PI);
        let minus_i = CMatrix::identity(2).scale(c(-1.0, 0.0));
        assert!(oracle.dist(&minus_i) < 1e-13);
        assert!(expm_i(&x, PI).unwrap().dist(&oracle) < 1e-13);

        let d = expm_i(&CMatrix::diag_real(&[1.0, 2.0]), PI / 2.0).unwrap();
        let expected = CMatrix::diag(&[I, c(-1.0, 0.0)]);
        assert!(d.dist(&expected) < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_oracle_on_dense_input() {
        let a = CMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.2, -0.3), c(-0.1, 0.0)],
            vec![c(0.2, 0.3), c(-1.0, 0.0), c(0.0, 0.4)],
            vec![c(-0.1, 0.0), c(0.0, -0.4), c(0.25, 0.0)],
        ]);
        for &t in &[-2.0, 0.3, 1.7] {
            let u = expm_i(&a, t).unwrap();
            assert!(u.dist(&taylor_exp_i(&a, t)) < 1e-12);
            assert!(u.unitary_defect() < 1e-13);
        }
    }
}
