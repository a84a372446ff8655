use super::{CMatrix, ZERO};
use crate::error::{Error, Result};

/// Dimension of the complex linear span of equally shaped matrices.
///
/// Each matrix is vectorized into a row and the stack is reduced by Gaussian
/// elimination with complete pivoting. A pivot counts iff its magnitude
/// exceeds `rank_tol` times the largest entry magnitude of the original stack.
pub fn rank_span(mats: &[CMatrix], rank_tol: f64) -> Result<usize> {
    let first = mats
        .first()
        .ok_or(Error::EmptyInput("rank_span needs at least one matrix"))?;
    let shape = first.shape();
    if let Some((index, m)) = mats.iter().enumerate().find(|(_, m)| m.shape() != shape) {
        return Err(Error::ShapeMismatch {
            expected: shape,
            found: m.shape(),
            index,
        });
    }

    let rows = mats.len();
    let cols = shape.0 * shape.1;
    let mut work: Vec<_> = mats
        .iter()
        .flat_map(|m| m.as_slice().iter().copied())
        .collect();
    let scale = work.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0);
    }
    let threshold = rank_tol * scale;

    let mut rank = 0;
    let mut col_perm: Vec<usize> = (0..cols).collect();
    while rank < rows.min(cols) {
        // Largest remaining entry in the trailing block.
        let mut best = (rank, rank, 0.0);
        for i in rank..rows {
            for j in rank..cols {
                let v = work[i * cols + col_perm[j]].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= threshold {
            break;
        }
        let (pi, pj, _) = best;
        if pi != rank {
            for j in 0..cols {
                work.swap(rank * cols + j, pi * cols + j);
            }
        }
        col_perm.swap(rank, pj);

        let pc = col_perm[rank];
        let pivot = work[rank * cols + pc];
        for i in (rank + 1)..rows {
            let factor = work[i * cols + pc] / pivot;
            if factor == ZERO {
                continue;
            }
            for &cj in &col_perm[rank..cols] {
                let v = work[rank * cols + cj];
                work[i * cols + cj] -= factor * v;
            }
        }
        rank += 1;
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn units(n: usize) -> Vec<CMatrix> {
        let mut out = Vec::new();
        for p in 0..n {
            for q in 0..n {
                out.push(CMatrix::unit(n, n, p, q));
            }
        }
        out
    }

    #[test]
    fn matrix_units_span_everything() {
        assert_eq!(rank_span(&units(2), 1e-8).unwrap(), 4);
    }

    #[test]
    fn colinear_pair() {
        let i = CMatrix::identity(2);
        let two_i = i.scale(c(2.0, 0.0));
        assert_eq!(rank_span(&[i, two_i], 1e-8).unwrap(), 1);
    }

    #[test]
    fn outer_products_of_basis_vectors() {
        let basis = [CMatrix::basis(2, 0), CMatrix::basis(2, 1)];
        let mut prods = Vec::new();
        for x in &basis {
            for y in &basis {
                prods.push(x * &y.adjoint());
            }
        }
        assert_eq!(rank_span(&prods, 1e-8).unwrap(), 4);
    }

    #[test]
    fn zero_list_has_rank_zero() {
        assert_eq!(rank_span(&[CMatrix::zeros(2, 2)], 1e-8).unwrap(), 0);
    }

    #[test]
    fn errors() {
        assert!(matches!(rank_span(&[], 1e-8), Err(Error::EmptyInput(_))));
        let err = rank_span(&[CMatrix::zeros(2, 2), CMatrix::zeros(2, 1)], 1e-8).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { index: 1, .. }));
    }

    #[test]
    fn complex_dependency_is_detected() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)]]);
        let b = a.scale(c(0.0, 1.0));
        let d = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, -1.0)]]);
        assert_eq!(rank_span(&[a.clone(), b], 1e-8).unwrap(), 1);
        assert_eq!(rank_span(&[a, d], 1e-8).unwrap(), 2);
    }
}
