//! The full Hilbert module `M_{n×k}` over `M_n`: left action `a·x = ax`,
//! inner product `⟨x, y⟩ = xy*`, norm `‖x‖ = ‖⟨x, x⟩‖^{1/2}`.
//!
//! With `k = 1` this is `C^n` as a module over `M_n = K(C^n)`, where the
//! inner product is the rank-one operator `z ↦ (z, y) x`.

use std::fmt;

use serde_json::Value;

use crate::algebra::{positivity_defect, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg::{rank_span, CMatrix};
use crate::random::SeedPath;
use crate::report::{scaled, witness, CheckReport, Tracker};
use crate::tolerances::Tolerances;

/// Largest `n` for which construction re-verifies fullness by a rank computation.
const FULLNESS_CHECK_MAX_DIM: usize = 16;

/// Shape of the module `M_{n×k}` over `M_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModuleSpace {
    algebra_dim: usize,
    module_cols: usize,
}

impl ModuleSpace {
    /// Rejects `n = 0` or `k = 0`, and asserts fullness.
    pub fn new(algebra_dim: usize, module_cols: usize) -> Result<Self> {
        if algebra_dim == 0 || module_cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "module dimensions must be positive, got n={algebra_dim}, k={module_cols}"
            )));
        }
        let space = ModuleSpace {
            algebra_dim,
            module_cols,
        };
        // The products ⟨E_p1, E_r1⟩ = E_pr already exhaust the matrix units,
        // so this smaller generating set decides fullness.
        if algebra_dim <= FULLNESS_CHECK_MAX_DIM {
            let first_column: Vec<CMatrix> = (0..algebra_dim)
                .map(|p| CMatrix::unit(algebra_dim, module_cols, p, 0))
                .collect();
            let rank = fullness_rank_of(&first_column, Tolerances::default().rank);
            if rank != algebra_dim * algebra_dim {
                return Err(Error::PreconditionViolated(format!(
                    "module {space} is not full (rank {rank})"
                )));
            }
        }
        Ok(space)
    }

    pub fn algebra_dim(&self) -> usize {
        self.algebra_dim
    }

    pub fn module_cols(&self) -> usize {
        self.module_cols
    }

    /// Complex dimension `n·k` of the module.
    pub fn dim(&self) -> usize {
        self.algebra_dim * self.module_cols
    }

    pub fn zero(&self) -> ModuleElement {
        ModuleElement {
            space: *self,
            value: CMatrix::zeros(self.algebra_dim, self.module_cols),
        }
    }

    pub fn element(&self, value: CMatrix) -> Result<ModuleElement> {
        if value.shape() != (self.algebra_dim, self.module_cols) {
            return Err(Error::SpaceMismatch {
                left: self.to_string(),
                right: format!("{}x{} matrix", value.rows(), value.cols()),
            });
        }
        Ok(ModuleElement {
            space: *self,
            value,
        })
    }

    /// Module matrix unit `E_pq` (an `n×k` matrix).
    pub fn unit(&self, p: usize, q: usize) -> ModuleElement {
        ModuleElement {
            space: *self,
            value: CMatrix::unit(self.algebra_dim, self.module_cols, p, q),
        }
    }

    /// All module matrix units, row-major in `(p, q)`.
    pub fn units(&self) -> Vec<ModuleElement> {
        let mut out = Vec::with_capacity(self.dim());
        for p in 0..self.algebra_dim {
            for q in 0..self.module_cols {
                out.push(self.unit(p, q));
            }
        }
        out
    }

    fn ensure_same(&self, other: &ModuleSpace) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch {
                left: self.to_string(),
                right: other.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for ModuleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M_{{{}x{}}}", self.algebra_dim, self.module_cols)
    }
}

/// Element of a [`ModuleSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleElement {
    space: ModuleSpace,
    value: CMatrix,
}

impl ModuleElement {
    pub fn space(&self) -> ModuleSpace {
        self.space
    }

    pub fn value(&self) -> &CMatrix {
        &self.value
    }

    pub fn into_value(self) -> CMatrix {
        self.value
    }

    pub fn norm(&self) -> f64 {
        module_norm(self)
    }
}

/// Sesquilinear pairings understood by the axiom checker. Only `Standard` is
/// an inner product; `Unconjugated` (`⟨x, y⟩ = xyᵀ`) is a deliberately broken
/// variant for exercising failure reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    Standard,
    Unconjugated,
}

impl Pairing {
    pub fn eval(self, x: &CMatrix, y: &CMatrix) -> CMatrix {
        match self {
            Pairing::Standard => x * &y.adjoint(),
            Pairing::Unconjugated => x * &y.transpose(),
        }
    }
}

/// `⟨x, y⟩ = xy*`.
pub fn inner_product(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    x.space.ensure_same(&y.space)?;
    AlgebraElement::new(Pairing::Standard.eval(&x.value, &y.value))
}

/// Left action `a·x = ax`.
pub fn module_action(a: &AlgebraElement, x: &ModuleElement) -> Result<ModuleElement> {
    if a.dim() != x.space.algebra_dim {
        return Err(Error::DimensionMismatch {
            context: "module action",
            left: a.shape(),
            right: x.value.shape(),
        });
    }
    Ok(ModuleElement {
        space: x.space,
        value: a.matrix() * &x.value,
    })
}

/// `‖x‖ = ‖xx*‖^{1/2}`, which is the largest singular value of `x`.
pub fn module_norm(x: &ModuleElement) -> f64 {
    (&x.value * &x.value.adjoint()).op_norm().sqrt()
}

fn pairing_norm(pairing: Pairing, x: &CMatrix) -> f64 {
    pairing.eval(x, x).op_norm().sqrt()
}

/// Checks the inner-product axioms on random data with the standard pairing.
pub fn check_module_axioms(
    space: ModuleSpace,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    check_module_axioms_with(space, Pairing::Standard, trials, seed, tol)
}

/// Checks the inner-product axioms for an explicit pairing.
///
/// Cases: linearity in the first slot, conjugate linearity in the second,
/// `⟨ax, y⟩ = a⟨x, y⟩`, conjugate symmetry, positivity of `⟨x, x⟩`, and
/// definiteness (`‖x‖ ≥ ‖x‖_F / √min(n, k)`, so `‖x‖ = 0` forces `x = 0`).
pub fn check_module_axioms_with(
    space: ModuleSpace,
    pairing: Pairing,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let (n, k) = (space.algebra_dim, space.module_cols);
    let seed = seed.child(format!("module-axioms/n={n}/k={k}"));
    let ip = |x: &CMatrix, y: &CMatrix| pairing.eval(x, y);
    let norm = |x: &CMatrix| x.op_norm();

    let mut first = Tracker::new("linear-first", tol, &seed);
    let mut second = Tracker::new("conjugate-linear-second", tol, &seed);
    let mut action = Tracker::new("module-linear", tol, &seed);
    let mut symmetric = Tracker::new("conjugate-symmetric", tol, &seed);
    let mut positive = Tracker::new("positive", tol, &seed);
    let mut definite = Tracker::new("definite", tol, &seed);

    // ‖0‖ = 0.
    let zero = CMatrix::zeros(n, k);
    definite.observe(pairing_norm(pairing, &zero), || witness([("x", &zero)]));

    let mut rng = seed.rng();
    let rank_bound = (n.min(k) as f64).sqrt();
    for _ in 0..trials {
        let x = rng.gaussian(n, k);
        let y = rng.gaussian(n, k);
        let z = rng.gaussian(n, k);
        let a = rng.gaussian(n, n);
        let alpha = rng.complex();
        let (nx, ny, nz) = (norm(&x), norm(&y), norm(&z));

        let lhs = ip(&x.axpy(alpha, &y), &z);
        let rhs = ip(&x, &z).axpy(alpha, &ip(&y, &z));
        first.observe(
            scaled(lhs.dist(&rhs), (alpha.norm() * nx + ny) * nz),
            || witness([("x", &x), ("y", &y), ("z", &z)]),
        );

        let lhs = ip(&x, &y.axpy(alpha, &z));
        let rhs = ip(&x, &y).axpy(alpha.conj(), &ip(&x, &z));
        second.observe(
            scaled(lhs.dist(&rhs), nx * (alpha.norm() * ny + nz)),
            || witness([("x", &x), ("y", &y), ("z", &z)]),
        );

        let lhs = ip(&(&a * &x), &y);
        let rhs = &a * &ip(&x, &y);
        action.observe(scaled(lhs.dist(&rhs), norm(&a) * nx * ny), || {
            witness([("a", &a), ("x", &x), ("y", &y)])
        });

        let lhs = ip(&x, &y).adjoint();
        let rhs = ip(&y, &x);
        symmetric.observe(scaled(lhs.dist(&rhs), nx * ny), || {
            witness([("x", &x), ("y", &y)])
        });

        positive.observe(positivity_defect(&ip(&x, &x)), || witness([("x", &x)]));

        let frob = x.frobenius_norm();
        let deficit = (frob / rank_bound - pairing_norm(pairing, &x)).max(0.0);
        definite.observe(scaled(deficit, frob), || witness([("x", &x)]));
    }

    let mut report = CheckReport::new("module-axioms");
    report.config.insert("n".into(), Value::from(n));
    report.config.insert("k".into(), Value::from(k));
    report.config.insert("trials".into(), Value::from(trials));
    for t in [first, second, action, symmetric, positive, definite] {
        report.push(t.param("n", n).param("k", k).finish());
    }
    report
}

/// Span rank of all inner products `⟨g_i, g_j⟩` over a generating list.
pub fn fullness_rank_of(generators: &[CMatrix], rank_tol: f64) -> usize {
    let mut products = Vec::with_capacity(generators.len() * generators.len());
    for x in generators {
        for y in generators {
            products.push(x * &y.adjoint());
        }
    }
    rank_span(&products, rank_tol).unwrap_or(0)
}

/// Span rank of `{⟨E_pq, E_rs⟩}` over all module matrix units.
pub fn fullness_rank(space: ModuleSpace, rank_tol: f64) -> usize {
    let units: Vec<CMatrix> = space
        .units()
        .into_iter()
        .map(ModuleElement::into_value)
        .collect();
    fullness_rank_of(&units, rank_tol)
}

/// True iff the inner products of the canonical units span `M_n`.
pub fn check_fullness(space: ModuleSpace) -> bool {
    fullness_rank(space, Tolerances::default().rank) == space.algebra_dim * space.algebra_dim
}

/// `max_j ‖a·E_j1‖` over the canonical generators `E_j1`.
///
/// Zero iff `a = 0`, and never below `‖a‖ / √n`.
pub fn annihilator_defect(a: &AlgebraElement, space: ModuleSpace) -> Result<f64> {
    if a.dim() != space.algebra_dim {
        return Err(Error::DimensionMismatch {
            context: "annihilator defect",
            left: a.shape(),
            right: (space.algebra_dim, space.module_cols),
        });
    }
    let mut worst: f64 = 0.0;
    for j in 0..space.algebra_dim {
        let x = space.unit(j, 0);
        worst = worst.max(module_action(a, &x)?.norm());
    }
    Ok(worst)
}

/// Norm inequalities of the module on random data:
/// `‖⟨x, y⟩‖ ≤ ‖x‖‖y‖` and `‖ax‖ ≤ ‖a‖‖x‖`, with absolute `slack`.
pub fn check_norm_inequalities(
    space: ModuleSpace,
    trials: usize,
    seed: &SeedPath,
    slack: f64,
) -> CheckReport {
    let (n, k) = (space.algebra_dim, space.module_cols);
    let seed = seed.child(format!("norm-inequalities/n={n}/k={k}"));
    let mut cs = Tracker::new("cauchy-schwarz", slack, &seed)
        .param("n", n)
        .param("k", k);
    let mut act = Tracker::new("action-bound", slack, &seed)
        .param("n", n)
        .param("k", k);
    let mut rng = seed.rng();
    for _ in 0..trials {
        let x = space.element(rng.gaussian(n, k)).expect("shape");
        let y = space.element(rng.gaussian(n, k)).expect("shape");
        let a = AlgebraElement::new(rng.gaussian(n, n)).expect("square");
        let ip = inner_product(&x, &y).expect("same space");
        let excess = ip.op_norm() - x.norm() * y.norm();
        cs.observe(excess.max(0.0), || {
            witness([("x", x.value()), ("y", y.value())])
        });
        let ax = module_action(&a, &x).expect("dims");
        let excess = ax.norm() - a.op_norm() * x.norm();
        act.observe(excess.max(0.0), || {
            witness([("a", a.matrix()), ("x", x.value())])
        });
    }
    let mut report = CheckReport::new("norm-inequalities");
    report.push(cs.finish());
    report.push(act.finish());
    report
}

/// Quantitative annihilator bound: `defect(a) ≥ ‖a‖/√n` on random nonzero
/// `a`, plus `defect(0) = 0`. Residual is the relative shortfall.
pub fn check_annihilator_bound(
    space: ModuleSpace,
    trials: usize,
    seed: &SeedPath,
    slack: f64,
) -> CheckReport {
    let n = space.algebra_dim;
    let seed = seed.child(format!("annihilator/n={n}"));
    let mut bound = Tracker::new("lower-bound", slack, &seed).param("n", n);
    let mut zero = Tracker::new("zero-element", 0.0, &seed).param("n", n);
    let z = AlgebraElement::zero(n);
    zero.observe(annihilator_defect(&z, space).expect("dims"), || {
        witness([("a", z.matrix())])
    });
    let mut rng = seed.rng();
    let root_n = (n as f64).sqrt();
    for _ in 0..trials {
        let a = AlgebraElement::new(rng.nonzero(n, n)).expect("square");
        let defect = annihilator_defect(&a, space).expect("dims");
        let norm = a.op_norm();
        let shortfall = (norm / root_n - defect).max(0.0);
        bound.observe(scaled(shortfall, norm), || witness([("a", a.matrix())]));
    }
    let mut report = CheckReport::new("annihilator");
    report.push(bound.finish());
    report.push(zero.finish());
    report
}
