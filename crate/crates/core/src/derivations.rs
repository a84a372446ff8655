//! Generalized derivations: pairs `(δ, d)` with `δ(ax) = aδ(x) + d(a)x`.
//!
//! Both maps are defined on the whole module and algebra; at finite
//! dimension every linear map is everywhere defined and bounded, so there
//! are no domains to track (and the separating space of `δ` is always
//! `{0}`, which makes closability automatic).

use num_complex::Complex64;
use serde_json::Value;

use crate::algebra::matrix_units;
use crate::error::{Error, Result};
use crate::hilbert::ModuleSpace;
use crate::linalg::{c, CMatrix, I};
use crate::random::SeedPath;
use crate::report::{scaled, witness, CheckReport, Tracker};
use crate::tolerances::Tolerances;

/// Anything that maps module elements (`n×k` matrices) to module elements.
pub trait ModuleMap {
    fn apply(&self, x: &CMatrix) -> CMatrix;
}

impl<F: Fn(&CMatrix) -> CMatrix> ModuleMap for F {
    fn apply(&self, x: &CMatrix) -> CMatrix {
        self(x)
    }
}

/// The module half `δ` of a generalized derivation.
#[derive(Debug, Clone, PartialEq)]
pub enum ModuleOperator {
    /// `x ↦ Gx`.
    LeftMult(CMatrix),
    /// Matrix acting on row-major vectorized elements.
    Linear(CMatrix),
}

impl ModuleOperator {
    fn to_matrix(&self, k: usize) -> CMatrix {
        match self {
            ModuleOperator::LeftMult(g) => g.left_action_matrix(k),
            ModuleOperator::Linear(l) => l.clone(),
        }
    }

    fn eval(&self, x: &CMatrix) -> CMatrix {
        match self {
            ModuleOperator::LeftMult(g) => g * x,
            ModuleOperator::Linear(l) => x
                .apply_vectorized(l, x.rows(), x.cols())
                .expect("validated shape"),
        }
    }
}

impl ModuleMap for ModuleOperator {
    fn apply(&self, x: &CMatrix) -> CMatrix {
        self.eval(x)
    }
}

/// The algebra half `d` of a generalized derivation.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraOperator {
    /// `a ↦ Ga - aG`.
    InnerCommutator(CMatrix),
    /// Matrix acting on row-major vectorized algebra elements.
    Linear(CMatrix),
}

impl AlgebraOperator {
    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        match self {
            AlgebraOperator::InnerCommutator(g) => g.commutator(a),
            AlgebraOperator::Linear(l) => a
                .apply_vectorized(l, a.rows(), a.cols())
                .expect("validated shape"),
        }
    }

    /// Matrix of the operator on row-major vectorized `n×n` matrices.
    pub fn to_matrix(&self, n: usize) -> CMatrix {
        match self {
            AlgebraOperator::InnerCommutator(g) => {
                &g.left_action_matrix(n) - &g.right_action_matrix(n)
            }
            AlgebraOperator::Linear(l) => l.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedDerivation {
    space: ModuleSpace,
    delta: ModuleOperator,
    d: AlgebraOperator,
}

impl GeneralizedDerivation {
    /// Pairs `δ` and `d` after validating shapes only; whether the pair
    /// satisfies the Leibniz rule is for [`check_generalized_leibniz`] to say.
    pub fn new(space: ModuleSpace, delta: ModuleOperator, d: AlgebraOperator) -> Result<Self> {
        let (n, dim) = (space.algebra_dim(), space.dim());
        let delta_ok = match &delta {
            ModuleOperator::LeftMult(g) => g.shape() == (n, n),
            ModuleOperator::Linear(l) => l.shape() == (dim, dim),
        };
        let d_ok = match &d {
            AlgebraOperator::InnerCommutator(g) => g.shape() == (n, n),
            AlgebraOperator::Linear(l) => l.shape() == (n * n, n * n),
        };
        if !delta_ok || !d_ok {
            return Err(Error::InvalidArgument(format!(
                "operator shapes do not match module {space}"
            )));
        }
        Ok(GeneralizedDerivation { space, delta, d })
    }

    /// The zero derivation on `space`.
    pub fn zero(space: ModuleSpace) -> Self {
        let n = space.algebra_dim();
        GeneralizedDerivation {
            space,
            delta: ModuleOperator::LeftMult(CMatrix::zeros(n, n)),
            d: AlgebraOperator::InnerCommutator(CMatrix::zeros(n, n)),
        }
    }

    pub fn space(&self) -> ModuleSpace {
        self.space
    }

    pub fn delta(&self) -> &ModuleOperator {
        &self.delta
    }

    pub fn d(&self) -> &AlgebraOperator {
        &self.d
    }

    pub fn apply_delta(&self, x: &CMatrix) -> CMatrix {
        self.delta.eval(x)
    }

    pub fn apply_d(&self, a: &CMatrix) -> CMatrix {
        self.d.apply(a)
    }

    fn ensure_same_space(&self, other: &GeneralizedDerivation) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.to_string(),
                right: other.space.to_string(),
            });
        }
        Ok(())
    }
}

/// `δ(x) = iTx`, `d(a) = i[T, a]` for Hermitian `T`.
pub fn commutator_derivation(space: ModuleSpace, t: &CMatrix) -> Result<GeneralizedDerivation> {
    let n = space.algebra_dim();
    if t.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "commutator derivation",
            left: t.shape(),
            right: (n, n),
        });
    }
    let tol = Tolerances::default().herm;
    let defect = t.hermitian_defect();
    if defect > tol {
        return Err(Error::NotHermitian {
            defect,
            tolerance: tol,
        });
    }
    let g = t.scale(I);
    Ok(GeneralizedDerivation {
        space,
        delta: ModuleOperator::LeftMult(g.clone()),
        d: AlgebraOperator::InnerCommutator(g),
    })
}

/// `‖δ(ax) - aδ(x) - d(a)x‖ / (1 + ‖a‖‖x‖)`.
pub fn leibniz_residual(gd: &GeneralizedDerivation, a: &CMatrix, x: &CMatrix) -> f64 {
    let lhs = gd.apply_delta(&(a * x));
    let rhs = &(a * &gd.apply_delta(x)) + &(&gd.apply_d(a) * x);
    lhs.dist(&rhs) / (1.0 + a.op_norm() * x.op_norm())
}

/// `‖d(ab) - ad(b) - d(a)b‖ / (1 + ‖a‖‖b‖)`.
pub fn derivation_residual(d: &AlgebraOperator, a: &CMatrix, b: &CMatrix) -> f64 {
    let lhs = d.apply(&(a * b));
    let rhs = &(a * &d.apply(b)) + &(&d.apply(a) * b);
    lhs.dist(&rhs) / (1.0 + a.op_norm() * b.op_norm())
}

/// Relative linearity defect of a map: `‖f(αu + v) - αf(u) - f(v)‖` over the
/// sum of the magnitudes of the three terms.
fn linearity_defect(
    f: impl Fn(&CMatrix) -> CMatrix,
    alpha: Complex64,
    u: &CMatrix,
    v: &CMatrix,
) -> f64 {
    let whole = f(&u.axpy(alpha, v));
    let fu = f(u);
    let fv = f(v);
    let diff = (&whole - &fu.axpy(alpha, &fv)).frobenius_norm();
    let scale = whole.frobenius_norm() + alpha.norm() * fu.frobenius_norm() + fv.frobenius_norm();
    scaled(diff, scale)
}

/// Checks the generalized Leibniz rule on matrix-unit probes (for small
/// spaces) and random samples, along with complex linearity of `δ` and `d`.
pub fn check_generalized_leibniz(
    gd: &GeneralizedDerivation,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let (n, k) = (gd.space.algebra_dim(), gd.space.module_cols());
    let seed = seed.child("generalized-leibniz");
    let mut leibniz = Tracker::new("leibniz", tol, &seed)
        .param("n", n)
        .param("k", k);
    let mut delta_lin = Tracker::new("delta-linear", tol, &seed);
    let mut d_lin = Tracker::new("d-linear", tol, &seed);

    if n * n * gd.space.dim() <= 256 {
        for a in matrix_units(n) {
            for x in gd.space.units() {
                let x = x.into_value();
                leibniz.observe(leibniz_residual(gd, &a, &x), || {
                    witness([("a", &a), ("x", &x)])
                });
            }
        }
    }

    let mut rng = seed.rng();
    for _ in 0..trials {
        let a = rng.gaussian(n, n);
        let b = rng.gaussian(n, n);
        let x = rng.gaussian(n, k);
        let y = rng.gaussian(n, k);
        let alpha = rng.complex();
        leibniz.observe(leibniz_residual(gd, &a, &x), || {
            witness([("a", &a), ("x", &x)])
        });
        delta_lin.observe(
            linearity_defect(|m| gd.apply_delta(m), alpha, &x, &y),
            || witness([("x", &x), ("y", &y)]),
        );
        d_lin.observe(linearity_defect(|m| gd.apply_d(m), alpha, &a, &b), || {
            witness([("a", &a), ("b", &b)])
        });
    }

    let mut report = CheckReport::new("generalized-leibniz");
    report.config.insert("trials".into(), Value::from(trials));
    report.push(leibniz.finish());
    report.push(delta_lin.finish());
    report.push(d_lin.finish());
    report
}

/// Multiplier applied to the Leibniz tolerance when judging `d` itself.
pub const INDUCED_DERIVATION_FACTOR: f64 = 10.0;

/// Verifies that `d` is a derivation, `d(ab) = ad(b) + d(a)b`, at tolerance
/// `10·τ`. Refuses unless the pair first passes the generalized Leibniz
/// check at `τ`: the derivation property is a consequence of that rule on a
/// full module.
pub fn check_induced_d_is_derivation(
    gd: &GeneralizedDerivation,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> Result<CheckReport> {
    let pre = check_generalized_leibniz(gd, trials, seed, tol);
    if !pre.passed() {
        return Err(Error::PreconditionViolated(format!(
            "generalized Leibniz rule fails (max residual {:e})",
            pre.summary.max_residual
        )));
    }
    let n = gd.space.algebra_dim();
    let seed = seed.child("induced-derivation");
    let bound = INDUCED_DERIVATION_FACTOR * tol;
    let mut t = Tracker::new("derivation", bound, &seed).param("n", n);
    let mut rng = seed.rng();
    for _ in 0..trials {
        let a = rng.gaussian(n, n);
        let b = rng.gaussian(n, n);
        t.observe(derivation_residual(&gd.d, &a, &b), || {
            witness([("a", &a), ("b", &b)])
        });
    }
    let mut report = CheckReport::new("induced-derivation");
    report.push(t.finish());
    Ok(report)
}

/// Outcome of [`recover_d`].
#[derive(Debug, Clone, PartialEq)]
pub enum Recovery {
    /// The unique `d` compatible with `δ`, as a vectorized operator.
    Found(AlgebraOperator),
    /// For the basis element `E_pq`, `x ↦ δ(E_pq x) - E_pq δ(x)` is not left
    /// multiplication by any single matrix.
    NoConsistentD {
        basis: (usize, usize),
        residual: f64,
    },
}

/// Reconstructs `d` from `δ` alone via `d(a)x = δ(ax) - aδ(x)`.
///
/// For each matrix unit `a = E_pq` the candidate `d(a)` is read off the
/// first column of the images of the generators `E_j1`, then checked
/// against every module unit. Fullness makes the solution unique. `δ` must
/// be complex linear; that is tested first on seeded samples.
pub fn recover_d(delta: &impl ModuleMap, space: ModuleSpace, tol: f64) -> Result<Recovery> {
    let (n, k) = (space.algebra_dim(), space.module_cols());

    let mut rng = SeedPath::new(0, "recover-d/linearity").rng();
    for _ in 0..8 {
        let x = rng.gaussian(n, k);
        let y = rng.gaussian(n, k);
        let alpha = rng.complex();
        let defect = linearity_defect(|m| delta.apply(m), alpha, &x, &y);
        if defect > tol {
            return Err(Error::PreconditionViolated(format!(
                "module map is not complex linear (defect {defect:e})"
            )));
        }
    }

    let units: Vec<CMatrix> = space.units().into_iter().map(|u| u.into_value()).collect();
    let mut columns = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            let a = CMatrix::unit(n, n, p, q);
            let r = |x: &CMatrix| &delta.apply(&(&a * x)) - &(&a * &delta.apply(x));

            let mut candidate = CMatrix::zeros(n, n);
            for j in 0..n {
                let image = r(&CMatrix::unit(n, k, j, 0));
                for i in 0..n {
                    candidate[(i, j)] = image[(i, 0)];
                }
            }

            let mut worst: f64 = 0.0;
            let mut magnitude: f64 = 0.0;
            for x in &units {
                let image = r(x);
                magnitude = magnitude.max(image.frobenius_norm());
                worst = worst.max((&image - &(&candidate * x)).frobenius_norm());
            }
            let residual = worst / (1.0 + magnitude);
            if residual > tol {
                return Ok(Recovery::NoConsistentD {
                    basis: (p, q),
                    residual,
                });
            }
            columns.push(candidate);
        }
    }

    // Column (p, q) of the vectorized operator is vec(d(E_pq)).
    let mut l = CMatrix::zeros(n * n, n * n);
    for (col, image) in columns.iter().enumerate() {
        for (row, &v) in image.as_slice().iter().enumerate() {
            l[(row, col)] = v;
        }
    }
    Ok(Recovery::Found(AlgebraOperator::Linear(l)))
}

/// `(αδ₁ + βδ₂, αd₁ + βd₂)`.
pub fn linear_combination(
    gd1: &GeneralizedDerivation,
    gd2: &GeneralizedDerivation,
    alpha: Complex64,
    beta: Complex64,
) -> Result<GeneralizedDerivation> {
    gd1.ensure_same_space(gd2)?;
    let (n, k) = (gd1.space.algebra_dim(), gd1.space.module_cols());
    let combine = |x: &CMatrix, y: &CMatrix| &x.scale(alpha) + &y.scale(beta);
    let delta = match (&gd1.delta, &gd2.delta) {
        (ModuleOperator::LeftMult(g1), ModuleOperator::LeftMult(g2)) => {
            ModuleOperator::LeftMult(combine(g1, g2))
        }
        (d1, d2) => ModuleOperator::Linear(combine(&d1.to_matrix(k), &d2.to_matrix(k))),
    };
    let d = match (&gd1.d, &gd2.d) {
        (AlgebraOperator::InnerCommutator(g1), AlgebraOperator::InnerCommutator(g2)) => {
            AlgebraOperator::InnerCommutator(combine(g1, g2))
        }
        (d1, d2) => AlgebraOperator::Linear(combine(&d1.to_matrix(n), &d2.to_matrix(n))),
    };
    Ok(GeneralizedDerivation {
        space: gd1.space,
        delta,
        d,
    })
}

/// `([δ₁, δ₂], [d₁, d₂])`. For inner pairs this is again inner, generated by
/// the commutator of the generators.
pub fn lie_bracket(
    gd1: &GeneralizedDerivation,
    gd2: &GeneralizedDerivation,
) -> Result<GeneralizedDerivation> {
    gd1.ensure_same_space(gd2)?;
    let (n, k) = (gd1.space.algebra_dim(), gd1.space.module_cols());
    let delta = match (&gd1.delta, &gd2.delta) {
        (ModuleOperator::LeftMult(g1), ModuleOperator::LeftMult(g2)) => {
            ModuleOperator::LeftMult(g1.commutator(g2))
        }
        (d1, d2) => ModuleOperator::Linear(d1.to_matrix(k).commutator(&d2.to_matrix(k))),
    };
    let d = match (&gd1.d, &gd2.d) {
        (AlgebraOperator::InnerCommutator(g1), AlgebraOperator::InnerCommutator(g2)) => {
            AlgebraOperator::InnerCommutator(g1.commutator(g2))
        }
        (d1, d2) => AlgebraOperator::Linear(d1.to_matrix(n).commutator(&d2.to_matrix(n))),
    };
    Ok(GeneralizedDerivation {
        space: gd1.space,
        delta,
        d,
    })
}

/// Scalar multiple; convenience over [`linear_combination`] with the zero derivation.
pub fn scale(gd: &GeneralizedDerivation, alpha: Complex64) -> GeneralizedDerivation {
    linear_combination(
        gd,
        &GeneralizedDerivation::zero(gd.space),
        alpha,
        c(0.0, 0.0),
    )
    .expect("same space")
}

/// Pointwise distance between two derivations on given probes:
/// `max(‖δ₁x - δ₂x‖, ‖d₁a - d₂a‖)`.
pub fn pointwise_distance(
    gd1: &GeneralizedDerivation,
    gd2: &GeneralizedDerivation,
    x: &CMatrix,
    a: &CMatrix,
) -> f64 {
    let dx = gd1.apply_delta(x).dist(&gd2.apply_delta(x));
    let da = gd1.apply_d(a).dist(&gd2.apply_d(a));
    dx.max(da)
}
