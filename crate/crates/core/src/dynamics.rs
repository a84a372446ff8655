//! One-parameter unitary groups on the module, `α_t(x) = e^{itT}x`, and the
//! induced flow `α'_t(a) = e^{itT} a e^{-itT}` on the algebra.
//!
//! Generators are bounded Hermitian matrices, so both groups are computed
//! exactly (up to roundoff) from one eigendecomposition of `T`. The
//! generator of `α` is `δ = iT·` and that of `α'` is `d = i[T, ·]`.

use serde_json::Value;

use crate::algebra::{check_star_homomorphism, AlgebraElement, StarMorphism};
use crate::derivations::{check_generalized_leibniz, commutator_derivation, GeneralizedDerivation};
use crate::error::{Error, Result};
use crate::hilbert::{ModuleElement, ModuleSpace};
use crate::linalg::{c, herm_eig_with, CMatrix, EigenDecomposition, I};
use crate::morphisms::ModuleMorphism;
use crate::random::SeedPath;
use crate::report::{scaled, witness, CheckReport, Tracker};
use crate::tolerances::Tolerances;

/// Hermitian precondition on the generator, relative Frobenius defect.
pub const GENERATOR_HERM_TOL: f64 = 1e-12;

/// Sampling range for flow times.
pub const TIME_RANGE: f64 = 10.0;

/// Step used by the finite-difference layer of [`check_flow_leibniz`].
pub const LEIBNIZ_STEP: f64 = 1e-4;

/// Smallest admissible time in a strong-continuity schedule.
pub const MIN_SCHEDULE_TIME: f64 = 1e-8;

/// Default strong-continuity schedule: `10^-1, …, 10^-8`.
pub fn default_schedule() -> Vec<f64> {
    (1..=8).map(|e| 10f64.powi(-e)).collect()
}

#[derive(Debug, Clone)]
pub struct DynamicalSystem {
    space: ModuleSpace,
    generator: CMatrix,
    eig: EigenDecomposition,
    generator_norm: f64,
}

impl DynamicalSystem {
    pub fn new(space: ModuleSpace, generator: CMatrix) -> Result<Self> {
        let n = space.algebra_dim();
        if generator.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                context: "flow generator",
                left: generator.shape(),
                right: (n, n),
            });
        }
        let eig = herm_eig_with(&generator, GENERATOR_HERM_TOL)?;
        let generator_norm = eig.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        Ok(DynamicalSystem {
            space,
            generator,
            eig,
            generator_norm,
        })
    }

    pub fn space(&self) -> ModuleSpace {
        self.space
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    /// `‖T‖`, read off the spectrum.
    pub fn generator_norm(&self) -> f64 {
        self.generator_norm
    }

    /// `e^{itT}`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.eig.exp_i(t)
    }

    /// `α_t` as a unitary module operator.
    pub fn module_operator(&self, t: f64) -> Result<ModuleMorphism> {
        ModuleMorphism::unitary(self.space, self.propagator(t))
    }

    /// `α'_t = Ad(e^{itT})`.
    pub fn algebra_automorphism(&self, t: f64) -> Result<StarMorphism> {
        StarMorphism::ad_unitary(self.propagator(t))
    }

    /// The generalized derivation `(iT·, i[T, ·])` generated by the flow.
    pub fn derivation(&self) -> GeneralizedDerivation {
        commutator_derivation(self.space, &self.generator)
            .expect("generator validated at construction")
    }

    fn check_module(&self, x: &CMatrix) -> Result<()> {
        let expected = (self.space.algebra_dim(), self.space.module_cols());
        if x.shape() != expected {
            return Err(Error::DimensionMismatch {
                context: "module element",
                left: x.shape(),
                right: expected,
            });
        }
        Ok(())
    }

    fn check_algebra(&self, a: &CMatrix) -> Result<()> {
        let n = self.space.algebra_dim();
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                context: "algebra element",
                left: a.shape(),
                right: (n, n),
            });
        }
        Ok(())
    }

    fn flow(&self, t: f64, x: &CMatrix) -> CMatrix {
        &self.propagator(t) * x
    }

    fn algebra_flow(&self, t: f64, a: &CMatrix) -> CMatrix {
        let u = self.propagator(t);
        &(&u * a) * &u.adjoint()
    }

    fn central_difference(&self, x: &CMatrix, h: f64) -> CMatrix {
        let diff = &self.flow(h, x) - &self.flow(-h, x);
        diff.scale(c(0.5 / h, 0.0))
    }

    fn algebra_central_difference(&self, a: &CMatrix, h: f64) -> CMatrix {
        let diff = &self.algebra_flow(h, a) - &self.algebra_flow(-h, a);
        diff.scale(c(0.5 / h, 0.0))
    }

    /// `α_t(x) = e^{itT}x`.
    pub fn evolve(&self, t: f64, x: &ModuleElement) -> Result<ModuleElement> {
        self.ensure_space(x)?;
        self.space.element(self.flow(t, x.value()))
    }

    /// `α'_t(a) = e^{itT} a e^{-itT}`.
    pub fn induced_algebra_flow(&self, t: f64, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_algebra(a)?;
        AlgebraElement::new(self.algebra_flow(t, a))
    }

    /// `(α_h(x) - α_{-h}(x)) / 2h`.
    pub fn estimate_generator(&self, x: &ModuleElement, h: f64) -> Result<ModuleElement> {
        self.ensure_space(x)?;
        check_step(h)?;
        self.space.element(self.central_difference(x.value(), h))
    }

    /// `(α'_h(a) - α'_{-h}(a)) / 2h`.
    pub fn estimate_algebra_generator(&self, a: &AlgebraElement, h: f64) -> Result<AlgebraElement> {
        self.check_algebra(a)?;
        check_step(h)?;
        AlgebraElement::new(self.algebra_central_difference(a, h))
    }

    /// `δ(x) = iTx`.
    pub fn generator_exact(&self, x: &ModuleElement) -> Result<ModuleElement> {
        self.ensure_space(x)?;
        self.space.element(&self.generator.scale(I) * x.value())
    }

    /// `d(a) = i(Ta - aT)`.
    pub fn algebra_generator_exact(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_algebra(a)?;
        AlgebraElement::new(self.generator.commutator(a).scale(I))
    }

    fn ensure_space(&self, x: &ModuleElement) -> Result<()> {
        if x.space() != self.space {
            return Err(Error::SpaceMismatch {
                left: self.space.to_string(),
                right: x.space().to_string(),
            });
        }
        Ok(())
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

/// Group law `α_{t+s} = α_t α_s`, inverse `α_t α_{-t} = I` and `α_0 = I` for
/// both flows, on random `t, s ∈ [-10, 10]` and random `x`, `a`. Residuals
/// are relative to `‖x‖` and `‖a‖`.
pub fn check_group_law(
    sys: &DynamicalSystem,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let (n, k) = (sys.space.algebra_dim(), sys.space.module_cols());
    let seed = seed.child("group-law");
    let mut module_law = Tracker::new("module-group-law", tol, &seed)
        .param("n", n)
        .param("k", k);
    let mut algebra_law = Tracker::new("algebra-group-law", tol, &seed).param("n", n);
    let mut module_inv = Tracker::new("module-inverse", tol, &seed)
        .param("n", n)
        .param("k", k);
    let mut algebra_inv = Tracker::new("algebra-inverse", tol, &seed).param("n", n);
    let mut at_zero = Tracker::new("identity-at-zero", 0.0, &seed).param("n", n);

    let mut rng = seed.rng();
    for _ in 0..trials {
        let t = rng.uniform(-TIME_RANGE, TIME_RANGE);
        let s = rng.uniform(-TIME_RANGE, TIME_RANGE);
        let x = rng.gaussian(n, k);
        let a = rng.gaussian(n, n);
        let (xn, an) = (x.op_norm(), a.op_norm());
        let tw = CMatrix::diag_real(&[t, s]);

        let lhs = sys.flow(t + s, &x);
        let rhs = sys.flow(t, &sys.flow(s, &x));
        module_law.observe(scaled(lhs.dist(&rhs), xn), || {
            witness([("x", &x), ("t_s", &tw)])
        });
        let lhs = sys.algebra_flow(t + s, &a);
        let rhs = sys.algebra_flow(t, &sys.algebra_flow(s, &a));
        algebra_law.observe(scaled(lhs.dist(&rhs), an), || {
            witness([("a", &a), ("t_s", &tw)])
        });

        let back = sys.flow(t, &sys.flow(-t, &x));
        module_inv.observe(scaled(back.dist(&x), xn), || {
            witness([("x", &x), ("t_s", &tw)])
        });
        let back = sys.algebra_flow(t, &sys.algebra_flow(-t, &a));
        algebra_inv.observe(scaled(back.dist(&a), an), || {
            witness([("a", &a), ("t_s", &tw)])
        });

        at_zero.observe(
            sys.flow(0.0, &x).dist(&x) + sys.algebra_flow(0.0, &a).dist(&a),
            || witness([("x", &x), ("a", &a)]),
        );
    }

    let mut report = CheckReport::new("group-law");
    report.config.insert("trials".into(), Value::from(trials));
    for t in [module_law, algebra_law, module_inv, algebra_inv, at_zero] {
        report.push(t.finish());
    }
    report
}

/// Properties of each `α_t` as a map: norm conservation, the covariance
/// `⟨α_t x, α_t y⟩ = α'_t(⟨x, y⟩)`, and `α'_t` being a *-homomorphism (checked
/// for a handful of times).
pub fn check_flow_morphism(
    sys: &DynamicalSystem,
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CheckReport {
    let (n, k) = (sys.space.algebra_dim(), sys.space.module_cols());
    let seed = seed.child("flow-morphism");
    let mut norm = Tracker::new("norm-conservation", tol, &seed)
        .param("n", n)
        .param("k", k);
    let mut cov = Tracker::new("inner-product-covariance", tol, &seed)
        .param("n", n)
        .param("k", k);

    let mut rng = seed.rng();
    for _ in 0..trials {
        let t = rng.uniform(-TIME_RANGE, TIME_RANGE);
        let x = rng.gaussian(n, k);
        let y = rng.gaussian(n, k);
        let u = sys.propagator(t);
        let (ux, uy) = (&u * &x, &u * &y);
        let xn = x.op_norm();
        norm.observe(scaled((ux.op_norm() - xn).abs(), xn), || {
            witness([("x", &x), ("u", &u)])
        });
        let lhs = &ux * &uy.adjoint();
        let rhs = &(&u * &(&x * &y.adjoint())) * &u.adjoint();
        cov.observe(scaled(lhs.dist(&rhs), xn * y.op_norm()), || {
            witness([("x", &x), ("y", &y), ("u", &u)])
        });
    }

    let mut report = CheckReport::new("flow-morphism");
    report.push(norm.finish());
    report.push(cov.finish());
    let star_trials = trials.clamp(1, 20);
    for j in 0..star_trials.min(4) {
        let t = rng.uniform(-TIME_RANGE, TIME_RANGE);
        let alpha = sys.algebra_automorphism(t).expect("propagator is unitary");
        let sub = check_star_homomorphism(&alpha, star_trials, &seed.child(format!("t{j}")), tol);
        report.absorb(&format!("algebra-flow-{j}"), sub);
    }
    report
}

fn validate_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::EmptyInput("continuity schedule"));
    }
    if schedule
        .iter()
        .any(|&t| !t.is_finite() || t < MIN_SCHEDULE_TIME)
    {
        return Err(Error::InvalidArgument(format!(
            "continuity schedule values must be at least {MIN_SCHEDULE_TIME:e}"
        )));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "continuity schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Deviations `‖α_t(x) - x‖` and `‖α'_t(a) - a‖` along a decreasing schedule.
///
/// Judged against the exact bounds `|t|‖T‖‖x‖` and `2|t|‖T‖‖a‖`, and for
/// monotone decrease along the schedule. Excesses are measured per unit norm
/// of `x` (resp. `a`) against the absolute slack `slack`.
pub fn check_strong_continuity(
    sys: &DynamicalSystem,
    x: &CMatrix,
    a: &CMatrix,
    schedule: &[f64],
    slack: f64,
) -> Result<CheckReport> {
    sys.check_module(x)?;
    sys.check_algebra(a)?;
    validate_schedule(schedule)?;
    let norm_t = sys.generator_norm;
    let (xn, an) = (x.op_norm(), a.op_norm());
    let module_dev: Vec<f64> = schedule.iter().map(|&t| sys.flow(t, x).dist(x)).collect();
    let algebra_dev: Vec<f64> = schedule
        .iter()
        .map(|&t| sys.algebra_flow(t, a).dist(a))
        .collect();

    let excess = |dev: &[f64], bound: &dyn Fn(f64) -> f64, scale: f64| -> f64 {
        let over = dev
            .iter()
            .zip(schedule)
            .map(|(&d, &t)| (d - bound(t)).max(0.0))
            .fold(0.0, f64::max);
        scaled(over, scale)
    };
    let increase = |dev: &[f64], scale: f64| -> f64 {
        let up = dev
            .windows(2)
            .map(|w| (w[1] - w[0]).max(0.0))
            .fold(0.0, f64::max);
        scaled(up, scale)
    };

    let seed = SeedPath::new(0, "strong-continuity");
    let sched = CMatrix::diag_real(schedule);
    let case = |name: &str, residual: f64, w: crate::report::Witness| {
        let mut t = Tracker::new(name, slack, &seed).param("points", schedule.len());
        t.observe(residual, || w);
        t.finish()
    };

    let mut report = CheckReport::new("strong-continuity");
    report
        .config
        .insert("schedule".into(), Value::from(schedule.to_vec()));
    report
        .config
        .insert("module_deviations".into(), Value::from(module_dev.clone()));
    report.config.insert(
        "algebra_deviations".into(),
        Value::from(algebra_dev.clone()),
    );
    report.push(case(
        "module-bound",
        excess(&module_dev, &|t| t.abs() * norm_t * xn, xn),
        witness([("x", x), ("schedule", &sched)]),
    ));
    report.push(case(
        "module-monotone",
        increase(&module_dev, xn),
        witness([("x", x), ("schedule", &sched)]),
    ));
    report.push(case(
        "algebra-bound",
        excess(&algebra_dev, &|t| 2.0 * t.abs() * norm_t * an, an),
        witness([("a", a), ("schedule", &sched)]),
    ));
    report.push(case(
        "algebra-monotone",
        increase(&algebra_dev, an),
        witness([("a", a), ("schedule", &sched)]),
    ));
    Ok(report)
}

/// Residual of `δ(ax) = aδ(x) + d(a)x` with the exact generators, scaled by
/// `1 + ‖a‖‖x‖‖T‖`.
pub fn flow_leibniz_exact_residual(sys: &DynamicalSystem, a: &CMatrix, x: &CMatrix) -> f64 {
    let g = sys.generator.scale(I);
    let lhs = &g * &(a * x);
    let rhs = &(a * &(&g * x)) + &(&g.commutator(a) * x);
    lhs.dist(&rhs) / (1.0 + a.op_norm() * x.op_norm() * sys.generator_norm)
}

/// The same identity with both generators replaced by central differences of
/// the flows at step `h`.
pub fn flow_leibniz_numerical_residual(
    sys: &DynamicalSystem,
    a: &CMatrix,
    x: &CMatrix,
    h: f64,
) -> f64 {
    let lhs = sys.central_difference(&(a * x), h);
    let rhs = &(a * &sys.central_difference(x, h)) + &(&sys.algebra_central_difference(a, h) * x);
    lhs.dist(&rhs) / (1.0 + a.op_norm() * x.op_norm() * sys.generator_norm)
}

/// The generator of a module flow is a generalized derivation whose algebra
/// part generates the induced flow.
///
/// Two layers: the exact identity `iT(ax) = a(iTx) + i[T, a]x`, and the
/// limit computation itself, with `δ` and `d` replaced by central
/// differences of `α` and `α'` at `h = 1e-4`. The pair
/// `commutator_derivation(T)` is also run through the generalized Leibniz
/// check.
pub fn check_flow_leibniz(
    sys: &DynamicalSystem,
    trials: usize,
    seed: &SeedPath,
    tols: &Tolerances,
) -> CheckReport {
    let (n, k) = (sys.space.algebra_dim(), sys.space.module_cols());
    let seed = seed.child("flow-leibniz");
    let mut exact = Tracker::new("exact", tols.flow_leibniz_exact, &seed)
        .param("n", n)
        .param("k", k);
    let mut numerical = Tracker::new("numerical", tols.flow_leibniz, &seed)
        .param("n", n)
        .param("k", k)
        .param("h", LEIBNIZ_STEP);

    let mut rng = seed.rng();
    for _ in 0..trials {
        let a = rng.gaussian(n, n);
        let x = rng.gaussian(n, k);
        exact.observe(flow_leibniz_exact_residual(sys, &a, &x), || {
            witness([("a", &a), ("x", &x), ("T", &sys.generator)])
        });
        numerical.observe(
            flow_leibniz_numerical_residual(sys, &a, &x, LEIBNIZ_STEP),
            || witness([("a", &a), ("x", &x), ("T", &sys.generator)]),
        );
    }

    let mut report = CheckReport::new("flow-leibniz");
    report.push(exact.finish());
    report.push(numerical.finish());
    let leibniz = check_generalized_leibniz(&sys.derivation(), trials.min(50), &seed, tols.leibniz);
    report.absorb("derivation", leibniz);
    report
}

/// Finite-difference estimates of both generators at a fixed step, against
/// `iTx` and `i[T, a]`. Errors are divided by `‖x‖·max(1, ‖T‖)³` (resp.
/// `‖a‖·max(1, ‖T‖)³`), the size of the Taylor remainder `‖T³x‖h²/6`.
pub fn check_generator_estimates(
    sys: &DynamicalSystem,
    trials: usize,
    seed: &SeedPath,
    h: f64,
    module_tol: f64,
    algebra_tol: f64,
) -> Result<CheckReport> {
    check_step(h)?;
    let (n, k) = (sys.space.algebra_dim(), sys.space.module_cols());
    let seed = seed.child("generator-estimates");
    let mut module = Tracker::new("module-generator", module_tol, &seed)
        .param("h", h)
        .param("n", n);
    let mut algebra = Tracker::new("algebra-generator", algebra_tol, &seed)
        .param("h", h)
        .param("n", n);
    let g = sys.generator.scale(I);
    let cube = sys.generator_norm.max(1.0).powi(3);
    let mut rng = seed.rng();
    for _ in 0..trials {
        let x = rng.gaussian(n, k);
        let a = rng.gaussian(n, n);
        let err = sys.central_difference(&x, h).dist(&(&g * &x));
        module.observe(scaled(err, x.op_norm() * cube), || witness([("x", &x)]));
        let err = sys
            .algebra_central_difference(&a, h)
            .dist(&g.commutator(&a));
        algebra.observe(scaled(err, a.op_norm() * cube), || witness([("a", &a)]));
    }
    let mut report = CheckReport::new("generator-estimates");
    report.push(module.finish());
    report.push(algebra.finish());
    Ok(report)
}

/// Lower window for successive error ratios of a second-order scheme.
pub const RATIO_LOW: f64 = 3.5;
/// Upper window for successive error ratios of a second-order scheme.
pub const RATIO_HIGH: f64 = 4.5;

/// Status of the error ratio between one ladder level and the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    /// Both errors are exactly zero.
    Exact,
    /// The finer error is below the roundoff floor; not judged.
    BelowFloor(f64),
    Measured(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep {
    pub h: f64,
    pub error: f64,
    /// Roundoff floor at this step.
    pub floor: f64,
}

/// Error ladder of a central-difference estimate at `h0 / 2^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub steps: Vec<LadderStep>,
}

impl Ladder {
    pub fn ratios(&self) -> Vec<Ratio> {
        self.steps
            .windows(2)
            .map(|w| {
                let (coarse, fine) = (w[0], w[1]);
                if coarse.error == 0.0 && fine.error == 0.0 {
                    Ratio::Exact
                } else if fine.error <= fine.floor {
                    Ratio::BelowFloor(scaled(coarse.error, fine.error))
                } else {
                    Ratio::Measured(coarse.error / fine.error)
                }
            })
            .collect()
    }

    /// Every measured ratio lies in `[3.5, 4.5]`.
    pub fn is_second_order(&self) -> bool {
        self.ratios().iter().all(|r| match r {
            Ratio::Measured(q) => (RATIO_LOW..=RATIO_HIGH).contains(q),
            _ => true,
        })
    }

    /// Number of ratios that were actually judged.
    pub fn measured(&self) -> usize {
        self.ratios()
            .iter()
            .filter(|r| matches!(r, Ratio::Measured(_)))
            .count()
    }

    /// True when every error is exactly zero.
    pub fn is_exact(&self) -> bool {
        self.steps.iter().all(|s| s.error == 0.0)
    }
}

/// `100 ε ‖v‖ (c·max(1, ‖T‖)² + c/h)`: rounding in the propagators, plus the
/// cancellation in the difference quotient which grows like `1/h`. `c` counts
/// the propagator factors applied (1 for the module flow, 2 for the algebra).
fn roundoff_floor(norm_t: f64, norm_v: f64, h: f64, factors: f64) -> f64 {
    100.0 * f64::EPSILON * norm_v * factors * (norm_t.max(1.0).powi(2) + 1.0 / h)
}

fn ladder(
    h0: f64,
    levels: usize,
    error: impl Fn(f64) -> f64,
    floor: impl Fn(f64) -> f64,
) -> Result<Ladder> {
    check_step(h0)?;
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "a ladder needs at least 2 levels, got {levels}"
        )));
    }
    let steps = (0..levels)
        .map(|j| {
            let h = h0 / 2f64.powi(j as i32);
            LadderStep {
                h,
                error: error(h),
                floor: floor(h),
            }
        })
        .collect();
    Ok(Ladder { steps })
}

/// Errors `‖(α_h x - α_{-h} x)/2h - iTx‖` at `h0 / 2^j`, `j < levels`.
pub fn convergence_order(
    sys: &DynamicalSystem,
    x: &CMatrix,
    h0: f64,
    levels: usize,
) -> Result<Ladder> {
    sys.check_module(x)?;
    let exact = &sys.generator.scale(I) * x;
    let (norm_t, norm_x) = (sys.generator_norm, x.op_norm());
    ladder(
        h0,
        levels,
        |h| sys.central_difference(x, h).dist(&exact),
        |h| roundoff_floor(norm_t, norm_x, h, 1.0),
    )
}

/// Errors `‖(α'_h a - α'_{-h} a)/2h - i[T, a]‖` at `h0 / 2^j`.
pub fn algebra_convergence_order(
    sys: &DynamicalSystem,
    a: &CMatrix,
    h0: f64,
    levels: usize,
) -> Result<Ladder> {
    sys.check_algebra(a)?;
    let exact = sys.generator.commutator(a).scale(I);
    let (norm_t, norm_a) = (sys.generator_norm, a.op_norm());
    ladder(
        h0,
        levels,
        |h| sys.algebra_central_difference(a, h).dist(&exact),
        |h| roundoff_floor(norm_t, norm_a, h, 2.0),
    )
}

/// Default ladder: `h0 = 1e-2`, halved six times.
pub const DEFAULT_H0: f64 = 1e-2;
pub const DEFAULT_LEVELS: usize = 7;
