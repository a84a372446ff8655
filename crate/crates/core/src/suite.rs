//! Suite runner: dispatches a [`SuiteConfig`] to the checkers and gathers one
//! combined report, plus report emission.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde_json::Value;

use crate::algebra::{check_star_homomorphism, matrix_units};
use crate::config::{CliError, Format, Suite, SuiteConfig};
use crate::derivations::{
    check_generalized_leibniz, check_induced_d_is_derivation, commutator_derivation, lie_bracket,
    linear_combination, pointwise_distance, recover_d, GeneralizedDerivation, Recovery,
};
use crate::dynamics::{
    algebra_convergence_order, check_flow_leibniz, check_flow_morphism, check_generator_estimates,
    check_group_law, check_strong_continuity, convergence_order, default_schedule, DynamicalSystem,
    Ladder, Ratio, DEFAULT_H0, DEFAULT_LEVELS,
};
use crate::hilbert::{
    check_annihilator_bound, check_module_axioms, check_norm_inequalities, ModuleSpace,
};
use crate::linalg::{c, CMatrix};
use crate::morphisms::{
    check_derived_linearity, check_isometry, check_phi_morphism, check_unitary, compose,
    ModuleMorphism,
};
use crate::random::SeedPath;
use crate::report::{witness, CaseResult, CheckReport, Tracker};
use crate::tolerances::Tolerances;

/// Largest `n` for the exhaustive checks: the span rank of `φ`'s image in the
/// unitary suite and the recovery of `d` over all matrix units. Both cost
/// `O(n^6)` or more and would dominate a run at `n = 64`.
pub const EXHAUSTIVE_MAX_DIM: usize = 16;

/// Step of the fixed-step generator estimates.
pub const ESTIMATE_STEP: f64 = 1e-3;

/// Runs every configured suite. Cases are named `suite/check/case` and
/// sorted by name, so the report depends only on the configuration.
pub fn run_suite(config: &SuiteConfig) -> CheckReport {
    let start = Instant::now();
    let mut report = CheckReport::new(config.label());
    report.config = config_json(config);
    let space =
        ModuleSpace::new(config.algebra_dim, config.module_cols).expect("validated dimensions");
    for &suite in &config.suites {
        let seed = SeedPath::new(config.master_seed, suite.name());
        let sub = match suite {
            Suite::ModuleAxioms => module_axioms(space, config.trials, &seed, &config.tolerances),
            Suite::Morphism => morphism(space, config.trials, &seed, &config.tolerances),
            Suite::Unitary => unitary(space, config.trials, &seed, &config.tolerances),
            Suite::Derivation => derivation(space, config.trials, &seed, &config.tolerances),
            Suite::Dynamics => dynamics(space, config.trials, &seed, &config.tolerances),
            Suite::All => unreachable!("expanded by the config"),
        };
        report.absorb(suite.name(), sub);
    }
    report.sort_cases();
    report.set_elapsed(start.elapsed());
    report
}

fn config_json(config: &SuiteConfig) -> std::collections::BTreeMap<String, Value> {
    let mut map = std::collections::BTreeMap::new();
    let suites: Vec<Value> = config
        .suites
        .iter()
        .map(|s| Value::from(s.name()))
        .collect();
    map.insert("suites".into(), Value::from(suites));
    map.insert("dim".into(), Value::from(config.algebra_dim));
    map.insert("cols".into(), Value::from(config.module_cols));
    map.insert("trials".into(), Value::from(config.trials));
    map.insert("seed".into(), Value::from(config.master_seed));
    let tols: serde_json::Map<String, Value> = config
        .tolerances
        .to_map()
        .into_iter()
        .map(|(k, v)| (k, Value::from(v)))
        .collect();
    map.insert("tolerances".into(), Value::Object(tols));
    map
}

/// A single case standing in for a checker that refused to run.
fn refused(name: &str, seed: &SeedPath, message: String) -> CaseResult {
    let mut t = Tracker::new(name, 0.0, seed).param("error", message);
    t.observe(f64::INFINITY, Default::default);
    t.finish()
}

fn module_axioms(
    space: ModuleSpace,
    trials: usize,
    seed: &SeedPath,
    tols: &Tolerances,
) -> CheckReport {
    let mut report = CheckReport::new("module-axioms");
    report.absorb(
        "axioms",
        check_module_axioms(space, trials, seed, tols.axioms),
    );
    report.absorb(
        "norms",
        check_norm_inequalities(space, trials, seed, tols.norm),
    );
    report.absorb(
        "annihilator",
        check_annihilator_bound(space, trials, seed, tols.norm),
    );
    report
}

/// The built-in φ-morphisms on `space`: identity, `Ad U` for a random
/// unitary, block embedding into `M_{(n+1)×k}`, and zero.
fn builtin_morphisms(space: ModuleSpace, seed: &SeedPath) -> Vec<(&'static str, ModuleMorphism)> {
    let n = space.algebra_dim();
    let u = seed.child("unitary").rng().unitary(n);
    let bigger = ModuleSpace::new(n + 1, space.module_cols()).expect("positive dims");
    vec![
        ("identity", ModuleMorphism::identity(space)),
        (
            "ad-unitary",
            ModuleMorphism::unitary(space, u).expect("sampled unitary"),
        ),
        (
            "block-embed",
            ModuleMorphism::block_embed(space, n + 1, 1).expect("fits"),
        ),
        ("zero", ModuleMorphism::zero(space, bigger)),
    ]
}

fn morphism(space: ModuleSpace, trials: usize, seed: &SeedPath, tols: &Tolerances) -> CheckReport {
    let mut report = CheckReport::new("morphism");
    for (name, phi) in builtin_morphisms(space, seed) {
        let seed = seed.child(name);
        report.absorb(
            &format!("{name}/reference"),
            check_star_homomorphism(phi.reference(), trials, &seed, tols.star),
        );
        report.absorb(name, check_phi_morphism(&phi, trials, &seed, tols.morphism));
        report.absorb(
            name,
            check_derived_linearity(&phi, trials, &seed, tols.morphism),
        );
        if phi.reference().is_injective() {
            match check_isometry(&phi, trials, &seed, tols.isometry) {
                Ok(r) => report.absorb(name, r),
                Err(e) => report.push(refused(&format!("{name}/isometry"), &seed, e.to_string())),
            }
        }
    }
    report
}

fn unitary(space: ModuleSpace, trials: usize, seed: &SeedPath, tols: &Tolerances) -> CheckReport {
    let n = space.algebra_dim();
    let mut rng = seed.child("unitaries").rng();
    let first = ModuleMorphism::unitary(space, rng.unitary(n)).expect("sampled unitary");
    let second = ModuleMorphism::unitary(space, rng.unitary(n)).expect("sampled unitary");
    let composed = compose(&second, &first).expect("same space");

    let mut report = CheckReport::new("unitary");
    for (name, phi) in [("single", &first), ("composed", &composed)] {
        let seed = seed.child(name);
        if n <= EXHAUSTIVE_MAX_DIM {
            report.absorb(
                name,
                check_unitary(phi, trials, &seed, tols.morphism, tols.rank),
            );
        } else {
            report.absorb(name, check_phi_morphism(phi, trials, &seed, tols.morphism));
        }
        match check_isometry(phi, trials, &seed, tols.isometry) {
            Ok(r) => report.absorb(name, r),
            Err(e) => report.push(refused(&format!("{name}/isometry"), &seed, e.to_string())),
        }
    }
    report
}

/// `max_{E} ‖d₁(E) - d₂(E)‖` over the matrix units.
fn max_unit_distance(
    n: usize,
    d1: impl Fn(&CMatrix) -> CMatrix,
    d2: impl Fn(&CMatrix) -> CMatrix,
) -> f64 {
    matrix_units(n)
        .iter()
        .map(|e| d1(e).dist(&d2(e)))
        .fold(0.0, f64::max)
}

/// Case comparing `recover_d(δ)` with the known `d`.
fn recovery_case(
    name: &str,
    gd: &GeneralizedDerivation,
    seed: &SeedPath,
    tols: &Tolerances,
) -> CaseResult {
    let space = gd.space();
    let n = space.algebra_dim();
    let mut t = Tracker::new(name, tols.leibniz, seed).param("n", n);
    match recover_d(gd.delta(), space, tols.recover) {
        Ok(Recovery::Found(d)) => {
            let r = max_unit_distance(n, |e| d.apply(e), |e| gd.apply_d(e));
            t.observe(r, Default::default);
        }
        Ok(Recovery::NoConsistentD { basis, residual }) => {
            let e = CMatrix::unit(n, n, basis.0, basis.1);
            t = t.param("no_consistent_d", residual);
            t.observe(f64::INFINITY, || witness([("basis", &e)]));
        }
        Err(e) => return refused(name, seed, e.to_string()),
    }
    t.finish()
}

fn derivation(
    space: ModuleSpace,
    trials: usize,
    seed: &SeedPath,
    tols: &Tolerances,
) -> CheckReport {
    let n = space.algebra_dim();
    let mut rng = seed.child("generators").rng();
    let gds: Vec<GeneralizedDerivation> = (0..3)
        .map(|_| commutator_derivation(space, &rng.hermitian(n)).expect("sampled Hermitian"))
        .collect();
    let (alpha, beta) = (rng.complex(), rng.complex());

    let mut report = CheckReport::new("derivation");
    report.absorb(
        "commutator",
        check_generalized_leibniz(&gds[0], trials, seed, tols.leibniz),
    );
    match check_induced_d_is_derivation(&gds[0], trials, seed, tols.leibniz) {
        Ok(r) => report.absorb("commutator", r),
        Err(e) => report.push(refused(
            "commutator/induced-derivation",
            seed,
            e.to_string(),
        )),
    }
    let combo = linear_combination(&gds[0], &gds[1], alpha, beta).expect("same space");
    report.absorb(
        "linear-combination",
        check_generalized_leibniz(
            &combo,
            trials,
            &seed.child("linear-combination"),
            tols.leibniz,
        ),
    );
    let bracket = lie_bracket(&gds[0], &gds[1]).expect("same space");
    report.absorb(
        "lie-bracket",
        check_generalized_leibniz(&bracket, trials, &seed.child("lie-bracket"), tols.leibniz),
    );
    report.push(jacobi_case(
        &gds,
        trials,
        &seed.child("jacobi"),
        10.0 * tols.leibniz,
    ));
    if n <= EXHAUSTIVE_MAX_DIM {
        report.push(recovery_case("recover-d", &gds[0], seed, tols));
    }
    report
}

/// Nested-bracket sum `[[a,b],c] + [[b,c],a] + [[c,a],b]` evaluated pointwise.
fn jacobi_case(
    gds: &[GeneralizedDerivation],
    trials: usize,
    seed: &SeedPath,
    tol: f64,
) -> CaseResult {
    let space = gds[0].space();
    let (n, k) = (space.algebra_dim(), space.module_cols());
    let br = |x: &GeneralizedDerivation, y: &GeneralizedDerivation| {
        lie_bracket(x, y).expect("same space")
    };
    let terms = [
        br(&br(&gds[0], &gds[1]), &gds[2]),
        br(&br(&gds[1], &gds[2]), &gds[0]),
        br(&br(&gds[2], &gds[0]), &gds[1]),
    ];
    let one = c(1.0, 0.0);
    let sum = linear_combination(
        &linear_combination(&terms[0], &terms[1], one, one).expect("same space"),
        &terms[2],
        one,
        one,
    )
    .expect("same space");
    let zero = GeneralizedDerivation::zero(space);
    let mut t = Tracker::new("jacobi-identity", tol, seed).param("n", n);
    let mut rng = seed.rng();
    for _ in 0..trials.min(100) {
        let x = rng.gaussian(n, k);
        let a = rng.gaussian(n, n);
        let r = pointwise_distance(&sum, &zero, &x, &a) / (x.op_norm() + a.op_norm());
        t.observe(r, || witness([("x", &x), ("a", &a)]));
    }
    t.finish()
}

/// `max |ratio - 4|` over the measured ratios of a ladder; the window
/// `[3.5, 4.5]` is a tolerance of 0.5 around 4.
fn ladder_case(name: &str, ladder: &Ladder, seed: &SeedPath) -> CaseResult {
    let mut t = Tracker::new(name, 0.5, seed)
        .param("measured_ratios", ladder.measured())
        .param("exact", ladder.is_exact());
    let ratios: Vec<f64> = ladder
        .ratios()
        .iter()
        .filter_map(|r| match r {
            Ratio::Measured(q) => Some(*q),
            _ => None,
        })
        .collect();
    t = t.param("ratios", ratios.clone());
    for q in ratios {
        t.observe((q - 4.0).abs(), Default::default);
    }
    t.finish()
}

fn dynamics(space: ModuleSpace, trials: usize, seed: &SeedPath, tols: &Tolerances) -> CheckReport {
    let (n, k) = (space.algebra_dim(), space.module_cols());
    let mut rng = seed.child("generator").rng();
    let sys = DynamicalSystem::new(space, rng.hermitian(n)).expect("sampled Hermitian");
    let x = rng.gaussian(n, k);
    let a = rng.gaussian(n, n);

    let mut report = CheckReport::new("dynamics");
    report.absorb("group-law", check_group_law(&sys, trials, seed, tols.group));
    report.absorb(
        "flow-morphism",
        check_flow_morphism(&sys, trials, seed, tols.isometry),
    );
    match check_strong_continuity(&sys, &x, &a, &default_schedule(), tols.continuity) {
        Ok(r) => report.absorb("strong-continuity", r),
        Err(e) => report.push(refused("strong-continuity", seed, e.to_string())),
    }
    report.absorb("flow-leibniz", check_flow_leibniz(&sys, trials, seed, tols));
    match check_generator_estimates(
        &sys,
        trials,
        seed,
        ESTIMATE_STEP,
        tols.generator_fd,
        tols.algebra_fd,
    ) {
        Ok(r) => report.absorb("generator-estimates", r),
        Err(e) => report.push(refused("generator-estimates", seed, e.to_string())),
    }
    let ladders = seed.child("ladders");
    match convergence_order(&sys, &x, DEFAULT_H0, DEFAULT_LEVELS) {
        Ok(l) => report.push(ladder_case("convergence/module", &l, &ladders)),
        Err(e) => report.push(refused("convergence/module", &ladders, e.to_string())),
    }
    match algebra_convergence_order(&sys, &a, DEFAULT_H0, DEFAULT_LEVELS) {
        Ok(l) => report.push(ladder_case("convergence/algebra", &l, &ladders)),
        Err(e) => report.push(refused("convergence/algebra", &ladders, e.to_string())),
    }
    if n <= EXHAUSTIVE_MAX_DIM {
        report.push(recovery_case(
            "generator-recovery",
            &sys.derivation(),
            seed,
            tols,
        ));
    }
    report
}

/// Renders `report` in `format`.
pub fn render(report: &CheckReport, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    }
}

/// Writes the rendered report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(
    report: &CheckReport,
    format: Format,
    path: Option<&Path>,
) -> Result<(), CliError> {
    let body = render(report, format);
    match path {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Process exit code for a finished report: 0 if every case passed, else 1.
pub fn exit_code(report: &CheckReport) -> i32 {
    if report.passed() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suites: &[Suite], trials: usize) -> SuiteConfig {
        let mut c = SuiteConfig::new(suites);
        c.trials = trials;
        c
    }

    #[test]
    fn default_all_passes() {
        let report = run_suite(&config(&[Suite::All], 50));
        assert!(report.passed(), "{}", report.to_text());
        for s in Suite::CONCRETE {
            assert!(report
                .cases
                .iter()
                .any(|c| c.name.starts_with(&format!("{}/", s.name()))));
        }
        let names: Vec<&str> = report.cases.iter().map(|c| c.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn zero_tolerance_on_flow_leibniz_fails() {
        let mut c = config(&[Suite::Dynamics], 20);
        c.set_tolerance("flow_leibniz", 0.0, "--tol").unwrap();
        let report = run_suite(&c);
        assert_eq!(exit_code(&report), 1);
        let failing: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failing, vec!["dynamics/flow-leibniz/numerical"]);
    }

    #[test]
    fn reports_are_deterministic() {
        let c = config(&[Suite::Morphism, Suite::Derivation], 20);
        let mut a = run_suite(&c);
        let mut b = run_suite(&c);
        a.summary.seconds = 0.0;
        b.summary.seconds = 0.0;
        assert_eq!(a.to_json(), b.to_json());
        let mut other = c.clone();
        other.master_seed += 1;
        let mut d = run_suite(&other);
        d.summary.seconds = 0.0;
        assert_ne!(a.to_json(), d.to_json());
    }

    #[test]
    fn emit_writes_file_and_reports_io_errors() {
        let report = CheckReport::new("empty");
        assert_eq!(exit_code(&report), 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&report, Format::Json, Some(&path)).unwrap();
        let back: CheckReport =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, report);
        let bad = dir.path().join("missing").join("r.json");
        assert!(matches!(
            emit_report(&report, Format::Text, Some(&bad)),
            Err(CliError::Io(_))
        ));
    }
}
