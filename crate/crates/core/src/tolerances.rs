//! Central tolerance table. Every value is relative unless noted, and every
//! entry can be overridden by name (`--tol name=value` on the command line).

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigendecomposition orthonormality and reconstruction.
    pub eig: f64,
    /// Hermitian precondition for the eigensolver.
    pub herm: f64,
    /// Pivot threshold for span-rank computations.
    pub rank: f64,
    /// Inner-product axioms of the module.
    pub axioms: f64,
    /// *-homomorphism residuals.
    pub star: f64,
    /// Positivity test for algebra elements.
    pub positivity: f64,
    /// Morphism identity, derived linearity and module-map residuals.
    pub morphism: f64,
    /// Norm preservation of morphisms with injective reference map.
    pub isometry: f64,
    /// Norm inequalities (Cauchy–Schwarz, action bound, annihilator bound); absolute slack.
    pub norm: f64,
    /// Generalized Leibniz rule; the induced-derivation check uses ten times this.
    pub leibniz: f64,
    /// Consistency threshold when recovering `d` from `δ`.
    pub recover: f64,
    /// One-parameter group law on module and algebra.
    pub group: f64,
    /// Strong-continuity bound and monotonicity slack (absolute, per unit norm).
    pub continuity: f64,
    /// Exact layer of the generator Leibniz identity.
    pub flow_leibniz_exact: f64,
    /// Finite-difference layer of the generator Leibniz identity (h = 1e-4).
    pub flow_leibniz: f64,
    /// Central-difference generator estimate against `iTx` at h = 1e-3.
    pub generator_fd: f64,
    /// Central-difference algebra generator against `i[T, a]` at h = 1e-3.
    pub algebra_fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: 1e-10,
            herm: 1e-12,
            rank: 1e-8,
            axioms: 1e-10,
            star: 1e-10,
            positivity: 1e-10,
            morphism: 1e-10,
            isometry: 1e-10,
            norm: 1e-10,
            leibniz: 1e-10,
            recover: 1e-8,
            group: 1e-10,
            continuity: 1e-12,
            flow_leibniz_exact: 1e-10,
            flow_leibniz: 1e-6,
            generator_fd: 1e-6,
            algebra_fd: 1e-5,
        }
    }
}

macro_rules! tolerance_names {
    ($($name:ident),* $(,)?) => {
        impl Tolerances {
            /// All tolerance names, in declaration order.
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name)),*];

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $(stringify!($name) => Some(self.$name),)*
                    _ => None,
                }
            }

            fn slot(&mut self, name: &str) -> Option<&mut f64> {
                match name {
                    $(stringify!($name) => Some(&mut self.$name),)*
                    _ => None,
                }
            }
        }
    };
}

tolerance_names!(
    eig,
    herm,
    rank,
    axioms,
    star,
    positivity,
    morphism,
    isometry,
    norm,
    leibniz,
    recover,
    group,
    continuity,
    flow_leibniz_exact,
    flow_leibniz,
    generator_fd,
    algebra_fd,
);

impl Tolerances {
    /// Overrides one entry. Values must be finite and non-negative.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance {name} must be finite and non-negative, got {value}"
            )));
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown tolerance name: {name}")))?;
        *slot = value;
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        Self::NAMES
            .iter()
            .map(|&n| (n.to_string(), self.get(n).expect("listed name")))
            .collect()
    }
}
