//! Randomized invariants. Inputs are drawn from the crate's own seeded
//! sampler, with the seed and sizes chosen by proptest.

use cstar_flow::derivations::{
    check_generalized_leibniz, check_induced_d_is_derivation, commutator_derivation, lie_bracket,
    linear_combination, pointwise_distance, GeneralizedDerivation,
};
use cstar_flow::dynamics::DynamicalSystem;
use cstar_flow::hilbert::ModuleSpace;
use cstar_flow::linalg::{c, expm_i, herm_eig, rank_span, CMatrix};
use cstar_flow::morphisms::{check_phi_morphism, ModuleMorphism};
use cstar_flow::random::{Sampler, SeedPath};
use proptest::prelude::*;

fn sampler(seed: u64, tag: &str) -> Sampler {
    SeedPath::new(seed, tag).rng()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cstar_identity(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let a = sampler(seed, "cstar").gaussian(n, m);
        let lhs = (&a.adjoint() * &a).op_norm();
        let rhs = a.op_norm().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn op_norm_between_frobenius_bounds(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let a = sampler(seed, "norms").gaussian(n, m);
        let (op, fro) = (a.op_norm(), a.frobenius_norm());
        prop_assert!(op <= fro * (1.0 + 1e-12));
        prop_assert!(fro <= (n.min(m) as f64).sqrt() * op * (1.0 + 1e-12));
    }

    #[test]
    fn eig_invariants(seed in any::<u64>(), n in 2usize..=8) {
        let a = sampler(seed, "eig").hermitian(n);
        let eig = herm_eig(&a).unwrap();
        let scale = a.frobenius_norm();
        prop_assert!(eig.reconstruct().dist(&a) <= 1e-12 * scale);
        prop_assert!(eig.orthonormality_defect() <= 1e-12);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((trace - a.trace().re).abs() <= 1e-12 * scale * n as f64);
    }

    #[test]
    fn expm_group_law_and_adjoint(
        seed in any::<u64>(),
        n in 2usize..=8,
        t in -10.0f64..10.0,
        s in -10.0f64..10.0,
    ) {
        let g = sampler(seed, "expm").hermitian(n);
        let (ut, us) = (expm_i(&g, t).unwrap(), expm_i(&g, s).unwrap());
        prop_assert!(expm_i(&g, t + s).unwrap().dist(&(&ut * &us)) <= 1e-11);
        prop_assert!(ut.adjoint().dist(&expm_i(&g, -t).unwrap()) <= 1e-12);
        prop_assert!(ut.unitary_defect() <= 1e-12);
    }

    #[test]
    fn rank_is_permutation_and_scale_invariant(seed in any::<u64>(), count in 1usize..=6, rank in 1usize..=4) {
        let mut rng = sampler(seed, "rank");
        let basis: Vec<CMatrix> = (0..rank).map(|_| rng.gaussian(3, 3)).collect();
        let mut mats: Vec<CMatrix> = (0..count)
            .map(|_| basis.iter().fold(CMatrix::zeros(3, 3), |acc, b| acc.axpy(c(1.0, 0.0), &b.scale(rng.complex()))))
            .collect();
        let r = rank_span(&mats, 1e-8).unwrap();
        prop_assert_eq!(r, count.min(rank));
        mats.reverse();
        prop_assert_eq!(rank_span(&mats, 1e-8).unwrap(), r);
        let scaled: Vec<CMatrix> = mats.iter().map(|m| m.scale(c(0.0, 3.5))).collect();
        prop_assert_eq!(rank_span(&scaled, 1e-8).unwrap(), r);
    }

    #[test]
    fn inner_product_is_module_linear(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=3) {
        let mut rng = sampler(seed, "module");
        let (a, x, y) = (rng.gaussian(n, n), rng.gaussian(n, k), rng.gaussian(n, k));
        let lhs = &(&a * &x) * &y.adjoint();
        let rhs = &a * &(&x * &y.adjoint());
        prop_assert!(lhs.dist(&rhs) <= 1e-12 * (1.0 + a.op_norm() * x.op_norm() * y.op_norm()));
    }

    #[test]
    fn unitaries_are_phi_morphisms(seed in any::<u64>(), n in 1usize..=5, k in 1usize..=3) {
        let space = ModuleSpace::new(n, k).unwrap();
        let phi = ModuleMorphism::unitary(space, sampler(seed, "u").unitary(n)).unwrap();
        let report = check_phi_morphism(&phi, 10, &SeedPath::new(seed, "phi"), 1e-10);
        prop_assert!(report.passed());
    }

    #[test]
    fn flow_conserves_module_norm(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=3, t in -10.0f64..10.0) {
        let mut rng = sampler(seed, "flow");
        let sys = DynamicalSystem::new(ModuleSpace::new(n, k).unwrap(), rng.hermitian(n)).unwrap();
        let x = sys.space().element(rng.gaussian(n, k)).unwrap();
        let y = sys.evolve(t, &x).unwrap();
        prop_assert!((y.norm() - x.norm()).abs() <= 1e-10 * x.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivations_closed_under_combination_and_bracket(
        seed in any::<u64>(),
        n in 2usize..=5,
        re in -2.0f64..2.0,
        im in -2.0f64..2.0,
    ) {
        let space = ModuleSpace::new(n, 2).unwrap();
        let mut rng = sampler(seed, "closure");
        let g1 = commutator_derivation(space, &rng.hermitian(n)).unwrap();
        let g2 = commutator_derivation(space, &rng.hermitian(n)).unwrap();
        let check_seed = SeedPath::new(seed, "closure-check");
        let combo = linear_combination(&g1, &g2, c(re, im), c(im, -re)).unwrap();
        prop_assert!(check_generalized_leibniz(&combo, 10, &check_seed, 1e-10).passed());
        let bracket = lie_bracket(&g1, &g2).unwrap();
        prop_assert!(check_generalized_leibniz(&bracket, 10, &check_seed, 1e-10).passed());
    }

    #[test]
    fn jacobi_identity(seed in any::<u64>(), n in 2usize..=5) {
        let space = ModuleSpace::new(n, 2).unwrap();
        let mut rng = sampler(seed, "jacobi");
        let g: Vec<GeneralizedDerivation> =
            (0..3).map(|_| commutator_derivation(space, &rng.hermitian(n)).unwrap()).collect();
        let br = |a: &GeneralizedDerivation, b: &GeneralizedDerivation| lie_bracket(a, b).unwrap();
        let one = c(1.0, 0.0);
        let sum = linear_combination(
            &linear_combination(&br(&br(&g[0], &g[1]), &g[2]), &br(&br(&g[1], &g[2]), &g[0]), one, one).unwrap(),
            &br(&br(&g[2], &g[0]), &g[1]),
            one,
            one,
        )
        .unwrap();
        let zero = GeneralizedDerivation::zero(space);
        for _ in 0..5 {
            let x = rng.gaussian(n, 2);
            let a = rng.gaussian(n, n);
            prop_assert!(pointwise_distance(&sum, &zero, &x, &a) <= 1e-9);
        }
    }

    #[test]
    fn leibniz_pass_implies_induced_derivation(seed in any::<u64>(), n in 2usize..=5, k in 1usize..=3) {
        let space = ModuleSpace::new(n, k).unwrap();
        let gd = commutator_derivation(space, &sampler(seed, "implication").hermitian(n)).unwrap();
        let check_seed = SeedPath::new(seed, "implication-check");
        if check_generalized_leibniz(&gd, 10, &check_seed, 1e-10).passed() {
            prop_assert!(check_induced_d_is_derivation(&gd, 10, &check_seed, 1e-10).unwrap().passed());
        }
    }
}
