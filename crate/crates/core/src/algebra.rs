//! The matrix C*-algebra `M_n`, positivity, and concrete *-morphisms.

use std::ops::Deref;

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, rank_span, CMatrix};
use crate::random::SeedPath;
use crate::report::{scaled, witness, CheckReport, Tracker};

/// Element of `M_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(CMatrix);

impl AlgebraElement {
    pub fn new(value: CMatrix) -> Result<Self> {
        if !value.is_square() {
            return Err(Error::NotSquare {
                rows: value.rows(),
                cols: value.cols(),
            });
        }
        Ok(AlgebraElement(value))
    }

    pub fn zero(n: usize) -> Self {
        AlgebraElement(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        AlgebraElement(CMatrix::identity(n))
    }

    /// Matrix unit `E_pq` of `M_n`.
    pub fn unit(n: usize, p: usize, q: usize) -> Self {
        AlgebraElement(CMatrix::unit(n, n, p, q))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl Deref for AlgebraElement {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// All matrix units of `M_n`, in row-major order of `(p, q)`.
pub fn matrix_units(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            out.push(CMatrix::unit(n, n, p, q));
        }
    }
    out
}

/// The structural kinds of map `M_n -> M_m` this crate knows about.
#[derive(Debug, Clone, PartialEq)]
pub enum MorphismKind {
    /// `a ↦ U a U*` for a unitary `U`.
    AdUnitary(CMatrix),
    /// `a` placed as the diagonal block starting at `offset`, zeros elsewhere.
    BlockEmbed {
        offset: usize,
    },
    Identity,
    Zero,
    /// `a ↦ aᵀ`. Linear and bijective but anti-multiplicative, so it is *not*
    /// a *-morphism; it exists to exercise failure paths of the checkers.
    Transpose,
    /// `outer ∘ inner`.
    Composite(Box<StarMorphism>, Box<StarMorphism>),
}

/// A map between matrix algebras, represented structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct StarMorphism {
    kind: MorphismKind,
    source_dim: usize,
    target_dim: usize,
}

/// Unitarity threshold for `AdUnitary`.
pub const UNITARY_TOL: f64 = 1e-10;

impl StarMorphism {
    /// `Ad U`; fails if `‖U*U - I‖ > 1e-10`.
    pub fn ad_unitary(u: CMatrix) -> Result<Self> {
        let defect = u.unitary_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary {
                defect,
                tolerance: UNITARY_TOL,
            });
        }
        let n = u.rows();
        Ok(StarMorphism {
            kind: MorphismKind::AdUnitary(u),
            source_dim: n,
            target_dim: n,
        })
    }

    pub fn block_embed(source_dim: usize, target_dim: usize, offset: usize) -> Result<Self> {
        if source_dim == 0 || offset + source_dim > target_dim {
            return Err(Error::InvalidArgument(format!(
                "cannot embed M_{source_dim} into M_{target_dim} at offset {offset}"
            )));
        }
        Ok(StarMorphism {
            kind: MorphismKind::BlockEmbed { offset },
            source_dim,
            target_dim,
        })
    }

    pub fn identity(n: usize) -> Self {
        StarMorphism {
            kind: MorphismKind::Identity,
            source_dim: n,
            target_dim: n,
        }
    }

    pub fn zero(source_dim: usize, target_dim: usize) -> Self {
        StarMorphism {
            kind: MorphismKind::Zero,
            source_dim,
            target_dim,
        }
    }

    /// The transpose map on `M_n`; see [`MorphismKind::Transpose`].
    pub fn transpose(n: usize) -> Self {
        StarMorphism {
            kind: MorphismKind::Transpose,
            source_dim: n,
            target_dim: n,
        }
    }

    pub fn kind(&self) -> &MorphismKind {
        &self.kind
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.dim() != self.source_dim {
            return Err(Error::DimensionMismatch {
                context: "apply_morphism",
                left: (self.source_dim, self.source_dim),
                right: a.shape(),
            });
        }
        Ok(AlgebraElement(self.apply_unchecked(a)))
    }

    fn apply_unchecked(&self, a: &CMatrix) -> CMatrix {
        match &self.kind {
            MorphismKind::AdUnitary(u) => &(u * a) * &u.adjoint(),
            MorphismKind::BlockEmbed { offset } => a
                .embed(self.target_dim, self.target_dim, *offset, *offset)
                .expect("offset validated at construction"),
            MorphismKind::Identity => a.clone(),
            MorphismKind::Zero => CMatrix::zeros(self.target_dim, self.target_dim),
            MorphismKind::Transpose => a.transpose(),
            MorphismKind::Composite(outer, inner) => {
                outer.apply_unchecked(&inner.apply_unchecked(a))
            }
        }
    }

    /// `self ∘ inner`. Collapses the cases that stay inside a simple kind.
    pub fn compose(&self, inner: &StarMorphism) -> Result<StarMorphism> {
        if inner.target_dim != self.source_dim {
            return Err(Error::DimensionMismatch {
                context: "compose morphisms",
                left: (self.source_dim, self.source_dim),
                right: (inner.target_dim, inner.target_dim),
            });
        }
        let kind = match (&self.kind, &inner.kind) {
            (MorphismKind::Identity, _) => return Ok(inner.clone()),
            (_, MorphismKind::Identity) => return Ok(self.clone()),
            (MorphismKind::Zero, _) | (_, MorphismKind::Zero) => MorphismKind::Zero,
            (MorphismKind::AdUnitary(v), MorphismKind::AdUnitary(u)) => {
                MorphismKind::AdUnitary(v * u)
            }
            (MorphismKind::BlockEmbed { offset: o2 }, MorphismKind::BlockEmbed { offset: o1 }) => {
                MorphismKind::BlockEmbed { offset: o1 + o2 }
            }
            _ => MorphismKind::Composite(Box::new(self.clone()), Box::new(inner.clone())),
        };
        Ok(StarMorphism {
            kind,
            source_dim: inner.source_dim,
            target_dim: self.target_dim,
        })
    }

    /// Structural injectivity.
    pub fn is_injective(&self) -> bool {
        match &self.kind {
            MorphismKind::AdUnitary(_)
            | MorphismKind::BlockEmbed { .. }
            | MorphismKind::Identity
            | MorphismKind::Transpose => true,
            MorphismKind::Zero => false,
            MorphismKind::Composite(outer, inner) => outer.is_injective() && inner.is_injective(),
        }
    }

    /// Span rank of the images of the matrix units of the source.
    pub fn image_rank(&self, rank_tol: f64) -> usize {
        let images: Vec<CMatrix> = matrix_units(self.source_dim)
            .iter()
            .map(|e| self.apply_unchecked(e))
            .collect();
        rank_span(&images, rank_tol).expect("images share the target shape")
    }
}

/// Evaluates `φ(a)`.
pub fn apply_morphism(phi: &StarMorphism, a: &AlgebraElement) -> Result<AlgebraElement> {
    phi.apply(a)
}

/// Structural injectivity of `φ`.
pub fn is_injective(phi: &StarMorphism) -> bool {
    phi.is_injective()
}

/// `‖φ(ab) - φ(a)φ(b)‖ / (‖a‖‖b‖)`.
pub fn multiplicativity_residual(phi: &StarMorphism, a: &CMatrix, b: &CMatrix) -> f64 {
    let lhs = phi.apply_unchecked(&(a * b));
    let rhs = &phi.apply_unchecked(a) * &phi.apply_unchecked(b);
    scaled(lhs.dist(&rhs), a.op_norm() * b.op_norm())
}

/// `‖φ(a*) - φ(a)*‖ / ‖a‖`.
pub fn adjoint_residual(phi: &StarMorphism, a: &CMatrix) -> f64 {
    let lhs = phi.apply_unchecked(&a.adjoint());
    let rhs = phi.apply_unchecked(a).adjoint();
    scaled(lhs.dist(&rhs), a.op_norm())
}

/// `‖φ(αa + b) - αφ(a) - φ(b)‖ / (|α|‖a‖ + ‖b‖)`.
pub fn linearity_residual(phi: &StarMorphism, alpha: Complex64, a: &CMatrix, b: &CMatrix) -> f64 {
    let lhs = phi.apply_unchecked(&a.axpy(alpha, b));
    let rhs = phi.apply_unchecked(a).axpy(alpha, &phi.apply_unchecked(b));
    scaled(lhs.dist(&rhs), alpha.norm() * a.op_norm() + b.op_norm())
}

/// Samples random pairs and checks multiplicativity, *-preservation and
/// linearity of `φ`. For `n ≤ 3` every pair of matrix units is probed too.
pub fn check_star_homomorphism(
    phi: &StarMorphism,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let n = phi.source_dim;
    let seed = seed.child("star-homomorphism");
    let mut mult = Tracker::new("multiplicative", tol, &seed).param("n", n);
    let mut star = Tracker::new("adjoint", tol, &seed).param("n", n);
    let mut lin = Tracker::new("linear", tol, &seed).param("n", n);

    if n <= 3 {
        let units = matrix_units(n);
        for a in &units {
            star.observe(adjoint_residual(phi, a), || witness([("a", a)]));
            for b in &units {
                mult.observe(multiplicativity_residual(phi, a, b), || {
                    witness([("a", a), ("b", b)])
                });
            }
        }
    }

    let mut rng = seed.rng();
    for _ in 0..trials {
        let a = rng.gaussian(n, n);
        let b = rng.gaussian(n, n);
        let alpha = rng.complex();
        mult.observe(multiplicativity_residual(phi, &a, &b), || {
            witness([("a", &a), ("b", &b)])
        });
        star.observe(adjoint_residual(phi, &a), || witness([("a", &a)]));
        lin.observe(linearity_residual(phi, alpha, &a, &b), || {
            let alpha_m = CMatrix::diag(&[alpha]);
            witness([("a", &a), ("b", &b), ("alpha", &alpha_m)])
        });
    }

    let mut report = CheckReport::new("star-homomorphism");
    report.config.insert("trials".into(), Value::from(trials));
    report.push(mult.finish());
    report.push(star.finish());
    report.push(lin.finish());
    report
}

/// `max(‖a - a*‖, max(0, -λ_min)) / ‖a‖`; zero for the zero element.
pub fn positivity_defect(a: &CMatrix) -> f64 {
    let norm = a.op_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let asym = a.dist(&a.adjoint());
    let lambda_min = herm_eig(&a.hermitian_part())
        .map(|e| e.eigenvalues[0])
        .unwrap_or(f64::NEG_INFINITY);
    asym.max(-lambda_min).max(0.0) / norm
}

/// True iff `‖a - a*‖ ≤ τ‖a‖` and the smallest eigenvalue is `≥ -τ‖a‖`.
pub fn is_positive(a: &AlgebraElement, tol: f64) -> bool {
    positivity_defect(a) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn e(n: usize, p: usize, q: usize) -> AlgebraElement {
        AlgebraElement::unit(n, p, q)
    }

    #[test]
    fn apply_examples() {
        let a = AlgebraElement::new(CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(apply_morphism(&StarMorphism::identity(2), &a).unwrap(), a);

        let ad_x = StarMorphism::ad_unitary(CMatrix::pauli_x()).unwrap();
        assert_eq!(apply_morphism(&ad_x, &e(2, 0, 0)).unwrap(), e(2, 1, 1));

        let embed = StarMorphism::block_embed(2, 4, 0).unwrap();
        let out = apply_morphism(&embed, &AlgebraElement::identity(2)).unwrap();
        assert_eq!(*out, CMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let err = apply_morphism(&StarMorphism::identity(3), &AlgebraElement::zero(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn constructors_validate() {
        assert!(StarMorphism::ad_unitary(CMatrix::diag_real(&[1.0, 0.0])).is_err());
        assert!(StarMorphism::block_embed(3, 4, 2).is_err());
        assert!(AlgebraElement::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn identity_and_ad_unitary_pass() {
        let seed = SeedPath::new(42, "test");
        let report = check_star_homomorphism(&StarMorphism::identity(3), 20, &seed, 1e-10);
        assert!(report.passed());
        assert_eq!(report.summary.max_residual, 0.0);

        let mut rng = seed.child("u").rng();
        for n in 2..=5 {
            let phi = StarMorphism::ad_unitary(rng.unitary(n)).unwrap();
            assert!(check_star_homomorphism(&phi, 20, &seed, 1e-10).passed());
        }
        let embed = StarMorphism::block_embed(2, 5, 2).unwrap();
        assert!(check_star_homomorphism(&embed, 20, &seed, 1e-10).passed());
        assert!(check_star_homomorphism(&StarMorphism::zero(2, 3), 20, &seed, 1e-10).passed());
    }

    #[test]
    fn transpose_fails_multiplicativity() {
        let phi = StarMorphism::transpose(2);
        // (E12 E21)ᵀ = E11 while E12ᵀ E21ᵀ = E21 E12 = E22.
        let r =
            multiplicativity_residual(&phi, &CMatrix::unit(2, 2, 0, 1), &CMatrix::unit(2, 2, 1, 0));
        assert_eq!(r, 1.0);

        let report = check_star_homomorphism(&phi, 10, &SeedPath::new(1, "t"), 1e-10);
        assert!(!report.passed());
        let mult = report.case("multiplicative").unwrap();
        assert!(!mult.pass && mult.residual >= 1.0);
        let w = mult.witness.as_ref().unwrap();
        assert!(w.contains_key("a") && w.contains_key("b"));
        // Transpose is linear and *-preserving.
        assert!(report.case("adjoint").unwrap().pass);
        assert!(report.case("linear").unwrap().pass);
    }

    #[test]
    fn injectivity_structural_and_by_rank() {
        let mut rng = SeedPath::new(3, "inj").rng();
        let ad = StarMorphism::ad_unitary(rng.unitary(3)).unwrap();
        assert!(is_injective(&ad));
        assert_eq!(ad.image_rank(1e-8), 9);

        assert!(!is_injective(&StarMorphism::zero(2, 2)));
        assert_eq!(StarMorphism::zero(2, 2).image_rank(1e-8), 0);

        let embed = StarMorphism::block_embed(2, 4, 0).unwrap();
        assert!(is_injective(&embed));
        assert_eq!(embed.image_rank(1e-8), 4);
    }

    #[test]
    fn composition_of_ad_maps() {
        let mut rng = SeedPath::new(5, "comp").rng();
        let u = rng.unitary(3);
        let v = rng.unitary(3);
        let ad_u = StarMorphism::ad_unitary(u.clone()).unwrap();
        let ad_v = StarMorphism::ad_unitary(v.clone()).unwrap();
        let composed = ad_v.compose(&ad_u).unwrap();
        assert_eq!(composed.kind(), &MorphismKind::AdUnitary(&v * &u));
        for _ in 0..100 {
            let a = AlgebraElement::new(rng.gaussian(3, 3)).unwrap();
            let twice = ad_v.apply(&ad_u.apply(&a).unwrap()).unwrap();
            let once = composed.apply(&a).unwrap();
            assert!(twice.dist(&once) <= 1e-10 * a.op_norm());
        }
        let id = StarMorphism::identity(3);
        assert_eq!(id.compose(&ad_u).unwrap(), ad_u);
        let mixed = StarMorphism::block_embed(3, 4, 1)
            .unwrap()
            .compose(&ad_u)
            .unwrap();
        assert!(matches!(mixed.kind(), MorphismKind::Composite(..)));
        assert!(mixed.is_injective());
        assert_eq!(mixed.image_rank(1e-8), 9);
    }

    #[test]
    fn ad_unitary_is_isometric() {
        let mut rng = SeedPath::new(9, "iso").rng();
        for _ in 0..50 {
            let phi = StarMorphism::ad_unitary(rng.unitary(4)).unwrap();
            let a = AlgebraElement::new(rng.gaussian(4, 4)).unwrap();
            let image = phi.apply(&a).unwrap();
            assert!((image.op_norm() - a.op_norm()).abs() <= 1e-10 * a.op_norm());
        }
    }

    #[test]
    fn positivity_examples() {
        let x = CMatrix::column(&[c(1.0, 2.0), c(-0.5, 0.3)]);
        let gram = AlgebraElement::new(&x * &x.adjoint()).unwrap();
        assert!(is_positive(&gram, 1e-10));
        assert!(!is_positive(
            &AlgebraElement::new(-&CMatrix::identity(2)).unwrap(),
            1e-10
        ));
        let a = AlgebraElement::new(CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!(is_positive(&a, 1e-10));
        assert!(is_positive(&AlgebraElement::zero(3), 0.0));
        // Not self-adjoint.
        let n = AlgebraElement::unit(2, 0, 1);
        assert!(!is_positive(&n, 1e-10));
    }

    #[test]
    fn gram_elements_are_positive() {
        let mut rng = SeedPath::new(11, "gram").rng();
        for (n, k) in [(2, 1), (3, 2), (4, 3)] {
            for _ in 0..100 {
                let x = rng.gaussian(n, k);
                let g = AlgebraElement::new(&x * &x.adjoint()).unwrap();
                assert!(is_positive(&g, 1e-10));
            }
        }
    }
}
