//! Worked example: the flow `α'_t(V) = e^{itT} V e^{-itT}` on `M_n` and its
//! generator `d(V) = i[T, V]`, estimated by central differences.

use std::fmt::Write as _;

use crate::config::DemoConfig;
use crate::dynamics::{
    algebra_convergence_order, DynamicalSystem, Ladder, Ratio, DEFAULT_H0, DEFAULT_LEVELS,
};
use crate::error::Result;
use crate::hilbert::ModuleSpace;
use crate::linalg::{CMatrix, I};
use crate::random::SeedPath;

/// Steps at which the estimate itself is printed.
pub const DISPLAY_STEPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    /// `i[diag(1,2), E12]` computed by the library equals `-iE12` exactly.
    pub fixed_case_exact: bool,
    /// `i[T, I] = 0` exactly.
    pub center_is_fixed: bool,
    pub generator: CMatrix,
    pub element: CMatrix,
    pub exact: CMatrix,
    /// `(h, estimate)` at [`DISPLAY_STEPS`].
    pub estimates: Vec<(f64, CMatrix)>,
    pub ladder: Ladder,
    pub text: String,
}

impl DemoOutcome {
    /// The fixed case reproduces the hand computation, the centre is fixed,
    /// and every measured ratio is in `[3.5, 4.5]`.
    pub fn passed(&self) -> bool {
        self.fixed_case_exact && self.center_is_fixed && self.ladder.is_second_order()
    }
}

/// `i[T, V]` for `T = diag(1, 2)`, `V = E12`, and the hand value `-iE12`.
pub fn fixed_case() -> Result<(CMatrix, CMatrix)> {
    let space = ModuleSpace::new(2, 1)?;
    let sys = DynamicalSystem::new(space, CMatrix::diag_real(&[1.0, 2.0]))?;
    let v = crate::algebra::AlgebraElement::unit(2, 0, 1);
    let computed = sys.algebra_generator_exact(&v)?.into_matrix();
    let oracle = CMatrix::unit(2, 2, 0, 1).scale(-I);
    Ok((computed, oracle))
}

pub fn run_demo(config: &DemoConfig) -> Result<DemoOutcome> {
    let n = config.algebra_dim;
    let seed = SeedPath::new(config.seed, format!("demo/commutator-flow/n={n}"));
    let mut rng = seed.rng();
    let t = if config.zero_generator {
        CMatrix::zeros(n, n)
    } else {
        rng.hermitian(n)
    };
    let v = rng.gaussian(n, n);
    let sys = DynamicalSystem::new(ModuleSpace::new(n, 1)?, t.clone())?;

    let (computed, oracle) = fixed_case()?;
    let fixed_case_exact = computed == oracle;
    let center = sys.algebra_generator_exact(&crate::algebra::AlgebraElement::identity(n))?;
    let center_is_fixed = center.is_zero();

    let va = crate::algebra::AlgebraElement::new(v.clone())?;
    let exact = sys.algebra_generator_exact(&va)?.into_matrix();
    let estimates = DISPLAY_STEPS
        .iter()
        .map(|&h| {
            sys.estimate_algebra_generator(&va, h)
                .map(|e| (h, e.into_matrix()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ladder = algebra_convergence_order(&sys, &v, DEFAULT_H0, DEFAULT_LEVELS)?;

    let mut text = String::new();
    let _ = writeln!(text, "fixed case: T = diag(1,2), V = E12");
    let _ = writeln!(text, "i[T,V] =\n{computed}");
    let _ = writeln!(
        text,
        "hand value -iE12 reproduced exactly: {}",
        if fixed_case_exact { "yes" } else { "no" }
    );
    let _ = writeln!(text, "\nrandom case: n = {n}, seed = {}", config.seed);
    let _ = writeln!(text, "T =\n{t}");
    let _ = writeln!(text, "V =\n{v}");
    let _ = writeln!(text, "i[T,V] =\n{exact}");
    for (h, est) in &estimates {
        let _ = writeln!(text, "central difference at h = {h:e}:\n{est}");
    }
    let _ = writeln!(
        text,
        "i[T,I] = 0: {}",
        if center_is_fixed { "yes" } else { "no" }
    );
    let _ = writeln!(text, "\nerror ladder");
    let _ = writeln!(text, "{:>12}  {:>12}  {:>10}", "h", "error", "ratio");
    let ratios = ladder.ratios();
    for (j, step) in ladder.steps.iter().enumerate() {
        let ratio = match j.checked_sub(1).map(|i| ratios[i]) {
            None => String::new(),
            Some(Ratio::Exact) => "exact".into(),
            Some(Ratio::Measured(q)) => format!("{q:.4}"),
            Some(Ratio::BelowFloor(q)) => format!("{q:.4}*"),
        };
        let _ = writeln!(
            text,
            "{:>12.4e}  {:>12.4e}  {:>10}",
            step.h, step.error, ratio
        );
    }
    let verdict = if ladder.is_exact() {
        "all errors are zero"
    } else if ladder.is_second_order() {
        "second order"
    } else {
        "NOT second order"
    };
    let _ = writeln!(
        text,
        "(* below the roundoff floor, not judged) -> {verdict}"
    );

    Ok(DemoOutcome {
        fixed_case_exact,
        center_is_fixed,
        generator: t,
        element: v,
        exact,
        estimates,
        ladder,
        text,
    })
}
