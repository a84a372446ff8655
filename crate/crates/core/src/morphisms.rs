//! φ-morphisms between module spaces: maps `Φ` with `⟨Φx, Φy⟩ = φ(⟨x, y⟩)`
//! for a reference *-morphism `φ`, plus checkers for the properties every
//! such map must have (linearity, module map, isometry) and for unitarity.

use serde_json::Value;

use crate::algebra::{matrix_units, AlgebraElement, MorphismKind, StarMorphism, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::hilbert::{ModuleElement, ModuleSpace, Pairing};
use crate::linalg::{rank_span, CMatrix};
use crate::random::SeedPath;
use crate::report::{scaled, witness, CaseResult, CheckReport, Tracker};

/// How `Φ` acts on module elements.
#[derive(Debug, Clone, PartialEq)]
pub enum ModuleMapKind {
    /// `x ↦ Ux` for an `m×n` matrix `U` (target `M_{m×k}`).
    LeftMult(CMatrix),
    /// Arbitrary complex-linear map on row-major vectorized elements.
    Linear(CMatrix),
    Identity,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleMorphism {
    kind: ModuleMapKind,
    source: ModuleSpace,
    target: ModuleSpace,
    reference: StarMorphism,
}

impl ModuleMorphism {
    /// `LeftMult(U)` with reference `Ad U`; `U` must be unitary to 1e-10.
    pub fn unitary(space: ModuleSpace, u: CMatrix) -> Result<Self> {
        if u.rows() != space.algebra_dim() {
            return Err(Error::DimensionMismatch {
                context: "unitary module operator",
                left: u.shape(),
                right: (space.algebra_dim(), space.algebra_dim()),
            });
        }
        let reference = StarMorphism::ad_unitary(u.clone())?;
        Ok(ModuleMorphism {
            kind: ModuleMapKind::LeftMult(u),
            source: space,
            target: space,
            reference,
        })
    }

    /// `x ↦ Px` for any `m×n` matrix `P`, paired with an arbitrary reference.
    /// Nothing is assumed about whether the pair is a φ-morphism.
    pub fn left_mult(source: ModuleSpace, p: CMatrix, reference: StarMorphism) -> Result<Self> {
        if p.cols() != source.algebra_dim() {
            return Err(Error::DimensionMismatch {
                context: "left multiplication",
                left: p.shape(),
                right: (source.algebra_dim(), source.module_cols()),
            });
        }
        let target = ModuleSpace::new(p.rows(), source.module_cols())?;
        Self::build(ModuleMapKind::LeftMult(p), source, target, reference)
    }

    /// Arbitrary linear map given by its matrix on vectorized elements.
    pub fn linear(
        source: ModuleSpace,
        target: ModuleSpace,
        map: CMatrix,
        reference: StarMorphism,
    ) -> Result<Self> {
        if map.shape() != (target.dim(), source.dim()) {
            return Err(Error::DimensionMismatch {
                context: "linear module map",
                left: map.shape(),
                right: (target.dim(), source.dim()),
            });
        }
        Self::build(ModuleMapKind::Linear(map), source, target, reference)
    }

    pub fn identity(space: ModuleSpace) -> Self {
        ModuleMorphism {
            kind: ModuleMapKind::Identity,
            source: space,
            target: space,
            reference: StarMorphism::identity(space.algebra_dim()),
        }
    }

    pub fn zero(source: ModuleSpace, target: ModuleSpace) -> Self {
        ModuleMorphism {
            kind: ModuleMapKind::Zero,
            source,
            target,
            reference: StarMorphism::zero(source.algebra_dim(), target.algebra_dim()),
        }
    }

    /// Rows of `x` placed at `offset` inside `M_{m×k}`, with reference
    /// `BlockEmbed`. Injective, a φ-morphism, but not surjective when `m > n`.
    pub fn block_embed(source: ModuleSpace, target_dim: usize, offset: usize) -> Result<Self> {
        let reference = StarMorphism::block_embed(source.algebra_dim(), target_dim, offset)?;
        let e = CMatrix::identity(source.algebra_dim()).embed(
            target_dim,
            source.algebra_dim(),
            offset,
            0,
        )?;
        Self::left_mult(source, e, reference)
    }

    fn build(
        kind: ModuleMapKind,
        source: ModuleSpace,
        target: ModuleSpace,
        reference: StarMorphism,
    ) -> Result<Self> {
        if reference.source_dim() != source.algebra_dim()
            || reference.target_dim() != target.algebra_dim()
        {
            return Err(Error::DimensionMismatch {
                context: "reference morphism",
                left: (reference.source_dim(), reference.target_dim()),
                right: (source.algebra_dim(), target.algebra_dim()),
            });
        }
        if source.module_cols() != target.module_cols()
            && !matches!(kind, ModuleMapKind::Linear(_) | ModuleMapKind::Zero)
        {
            return Err(Error::SpaceMismatch {
                left: source.to_string(),
                right: target.to_string(),
            });
        }
        Ok(ModuleMorphism {
            kind,
            source,
            target,
            reference,
        })
    }

    pub fn kind(&self) -> &ModuleMapKind {
        &self.kind
    }

    pub fn source(&self) -> ModuleSpace {
        self.source
    }

    pub fn target(&self) -> ModuleSpace {
        self.target
    }

    pub fn reference(&self) -> &StarMorphism {
        &self.reference
    }

    pub fn apply(&self, x: &ModuleElement) -> Result<ModuleElement> {
        if x.space() != self.source {
            return Err(Error::SpaceMismatch {
                left: self.source.to_string(),
                right: x.space().to_string(),
            });
        }
        self.target.element(self.apply_matrix(x.value()))
    }

    fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        match &self.kind {
            ModuleMapKind::LeftMult(u) => u * x,
            ModuleMapKind::Identity => x.clone(),
            ModuleMapKind::Zero => {
                CMatrix::zeros(self.target.algebra_dim(), self.target.module_cols())
            }
            ModuleMapKind::Linear(l) => x
                .apply_vectorized(l, self.target.algebra_dim(), self.target.module_cols())
                .expect("linear map shape validated"),
        }
    }

    /// The matrix of `Φ` acting on row-major vectorized elements.
    pub fn to_matrix(&self) -> CMatrix {
        let (dt, ds) = (self.target.dim(), self.source.dim());
        match &self.kind {
            ModuleMapKind::Linear(l) => l.clone(),
            ModuleMapKind::Zero => CMatrix::zeros(dt, ds),
            ModuleMapKind::Identity => CMatrix::identity(ds),
            ModuleMapKind::LeftMult(u) => u.left_action_matrix(self.source.module_cols()),
        }
    }

    /// Rank of `Φ` as a linear map; surjective iff it equals `target.dim()`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let m = self.to_matrix();
        let rows: Vec<CMatrix> = (0..m.rows())
            .map(|i| {
                CMatrix::new(
                    1,
                    m.cols(),
                    m.as_slice()[i * m.cols()..(i + 1) * m.cols()].to_vec(),
                )
                .expect("row")
            })
            .collect();
        rank_span(&rows, rank_tol).expect("rows share a shape")
    }
}

/// Evaluates `Φ(x)`.
pub fn apply(phi: &ModuleMorphism, x: &ModuleElement) -> Result<ModuleElement> {
    phi.apply(x)
}

/// `Ψ ∘ Φ`, a `ψφ`-morphism whenever both factors are morphisms.
pub fn compose(psi: &ModuleMorphism, phi: &ModuleMorphism) -> Result<ModuleMorphism> {
    if phi.target != psi.source {
        return Err(Error::SpaceMismatch {
            left: phi.target.to_string(),
            right: psi.source.to_string(),
        });
    }
    let reference = psi.reference.compose(&phi.reference)?;
    let kind = match (&psi.kind, &phi.kind) {
        (ModuleMapKind::Identity, k) | (k, ModuleMapKind::Identity) => k.clone(),
        (ModuleMapKind::Zero, _) | (_, ModuleMapKind::Zero) => ModuleMapKind::Zero,
        (ModuleMapKind::LeftMult(v), ModuleMapKind::LeftMult(u)) => ModuleMapKind::LeftMult(v * u),
        _ => ModuleMapKind::Linear(&psi.to_matrix() * &phi.to_matrix()),
    };
    Ok(ModuleMorphism {
        kind,
        source: phi.source,
        target: psi.target,
        reference,
    })
}

fn pair_residual(phi: &ModuleMorphism, x: &CMatrix, y: &CMatrix) -> f64 {
    let lhs = Pairing::Standard.eval(&phi.apply_matrix(x), &phi.apply_matrix(y));
    let rhs = phi
        .reference
        .apply(&AlgebraElement::new(Pairing::Standard.eval(x, y)).expect("square"))
        .expect("reference dims validated");
    scaled(lhs.dist(&rhs), x.op_norm() * y.op_norm())
}

/// Checks `⟨Φx, Φx⟩ = φ(⟨x, x⟩)` on single elements (case `diagonal`) and
/// `⟨Φx, Φy⟩ = φ(⟨x, y⟩)` on pairs (case `two-variable`). By polarization the
/// two pass or fail together. Module units are probed before random samples.
pub fn check_phi_morphism(
    phi: &ModuleMorphism,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let seed = seed.child("phi-morphism");
    let mut diag = Tracker::new("diagonal", tol, &seed);
    let mut pair = Tracker::new("two-variable", tol, &seed);
    let (n, k) = (phi.source.algebra_dim(), phi.source.module_cols());

    let units: Vec<CMatrix> = phi
        .source
        .units()
        .into_iter()
        .map(ModuleElement::into_value)
        .collect();
    for x in &units {
        diag.observe(pair_residual(phi, x, x), || witness([("x", x)]));
    }
    if units.len() <= 16 {
        for x in &units {
            for y in &units {
                pair.observe(pair_residual(phi, x, y), || witness([("x", x), ("y", y)]));
            }
        }
    }

    let mut rng = seed.rng();
    for _ in 0..trials {
        let x = rng.gaussian(n, k);
        let y = rng.gaussian(n, k);
        diag.observe(pair_residual(phi, &x, &x), || witness([("x", &x)]));
        pair.observe(pair_residual(phi, &x, &y), || {
            witness([("x", &x), ("y", &y)])
        });
    }

    let mut report = CheckReport::new("phi-morphism");
    report.config.insert("trials".into(), Value::from(trials));
    report.push(diag.finish());
    report.push(pair.finish());
    report
}

/// Checks the consequences of the morphism identity: additivity and
/// homogeneity `Φ(αx + y) = αΦ(x) + Φ(y)`, and the module-map property
/// `Φ(ax) = φ(a)Φ(x)`.
pub fn check_derived_linearity(
    phi: &ModuleMorphism,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let seed = seed.child("derived-linearity");
    let mut lin = Tracker::new("linear", tol, &seed);
    let mut module = Tracker::new("module-map", tol, &seed);
    let (n, k) = (phi.source.algebra_dim(), phi.source.module_cols());
    let mut rng = seed.rng();
    for _ in 0..trials {
        let x = rng.gaussian(n, k);
        let y = rng.gaussian(n, k);
        let a = rng.gaussian(n, n);
        let alpha = rng.complex();

        let lhs = phi.apply_matrix(&x.axpy(alpha, &y));
        let rhs = phi.apply_matrix(&x).axpy(alpha, &phi.apply_matrix(&y));
        lin.observe(
            scaled(lhs.dist(&rhs), alpha.norm() * x.op_norm() + y.op_norm()),
            || witness([("x", &x), ("y", &y)]),
        );

        let lhs = phi.apply_matrix(&(&a * &x));
        let phi_a = phi
            .reference
            .apply(&AlgebraElement::new(a.clone()).expect("square"))
            .expect("reference dims validated");
        let rhs = phi_a.matrix() * &phi.apply_matrix(&x);
        module.observe(scaled(lhs.dist(&rhs), a.op_norm() * x.op_norm()), || {
            witness([("a", &a), ("x", &x)])
        });
    }
    let mut report = CheckReport::new("derived-linearity");
    report.push(lin.finish());
    report.push(module.finish());
    report
}

/// `|‖Φx‖ - ‖x‖| ≤ τ‖x‖` on the zero element, module units and random samples.
/// Requires an injective reference morphism.
pub fn check_isometry(
    phi: &ModuleMorphism,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> Result<CheckReport> {
    if !phi.reference.is_injective() {
        return Err(Error::PreconditionViolated(
            "isometry needs an injective reference morphism".into(),
        ));
    }
    let seed = seed.child("isometry");
    let mut iso = Tracker::new("isometry", tol, &seed);
    let (n, k) = (phi.source.algebra_dim(), phi.source.module_cols());
    let mut probe = |x: &CMatrix| {
        let before = x.op_norm();
        let after = phi.apply_matrix(x).op_norm();
        iso.observe(scaled((after - before).abs(), before), || {
            witness([("x", x)])
        });
    };
    probe(&CMatrix::zeros(n, k));
    for u in phi.source.units() {
        probe(u.value());
    }
    let mut rng = seed.rng();
    for _ in 0..trials {
        probe(&rng.gaussian(n, k));
    }
    let mut report = CheckReport::new("isometry");
    report.push(iso.finish());
    Ok(report)
}

/// Unitarity: `Φ` is a φ-morphism, `φ` is injective, and `Φ` is surjective
/// (exact rank of the vectorized map). The report also records whether `φ`
/// itself is surjective, which follows for full target modules.
pub fn check_unitary(
    phi: &ModuleMorphism,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
    rank_tol: f64,
) -> CheckReport {
    let seed = seed.child("unitary");
    let mut report = CheckReport::new("unitary");

    let morph = check_phi_morphism(phi, trials, &seed, tol);
    let worst = morph
        .cases
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .cloned();
    let mut params = std::collections::BTreeMap::new();
    params.insert("seed".into(), Value::from(seed.master));
    params.insert("path".into(), Value::from(seed.path.clone()));
    report.push(CaseResult::judged(
        "phi-morphism",
        params.clone(),
        morph.summary.max_residual,
        tol,
        worst.and_then(|c| c.witness),
    ));

    let injective = phi.reference.is_injective();
    report.push(CaseResult::judged(
        "phi-injective",
        params.clone(),
        if injective { 0.0 } else { 1.0 },
        0.0,
        None,
    ));

    let rank = phi.rank(rank_tol);
    let target_dim = phi.target.dim();
    let mut p = params.clone();
    p.insert("rank".into(), Value::from(rank));
    p.insert("target_dim".into(), Value::from(target_dim));
    let map_witness = phi.to_matrix();
    report.push(CaseResult::judged(
        "surjective",
        p,
        (target_dim - rank) as f64,
        0.0,
        Some(witness([("map", &map_witness)])),
    ));

    let m = phi.reference.target_dim();
    let phi_rank = phi.reference.image_rank(rank_tol);
    let mut p = params;
    p.insert("rank".into(), Value::from(phi_rank));
    p.insert("target_dim".into(), Value::from(m * m));
    report.push(CaseResult::judged(
        "phi-surjective",
        p,
        (m * m - phi_rank) as f64,
        0.0,
        None,
    ));
    report
}

/// True when `U*U = I` to the construction tolerance; convenience for callers
/// deciding between [`ModuleMorphism::unitary`] and [`ModuleMorphism::left_mult`].
pub fn is_unitary_matrix(u: &CMatrix) -> bool {
    u.unitary_defect() <= UNITARY_TOL
}

/// Reference morphism of a unitary left multiplication, when it has that form.
pub fn unitary_of(phi: &ModuleMorphism) -> Option<&CMatrix> {
    match (&phi.kind, phi.reference.kind()) {
        (ModuleMapKind::LeftMult(u), MorphismKind::AdUnitary(v)) if u == v => Some(u),
        _ => None,
    }
}

/// All matrix units of the source algebra of `Φ` mapped through `φ`.
pub fn reference_images(phi: &ModuleMorphism) -> Vec<CMatrix> {
    let n = phi.source.algebra_dim();
    matrix_units(n)
        .into_iter()
        .map(|e| {
            phi.reference
                .apply(&AlgebraElement::new(e).expect("square"))
                .expect("dims")
                .into_matrix()
        })
        .collect()
}
