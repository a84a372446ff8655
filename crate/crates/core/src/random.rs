//! Deterministic random inputs.
//!
//! Every random stream is derived from a master seed and a derivation path
//! (for example `"dynamics/group-law/n=3"`). The stream key is the SHA-256
//! digest of both, fed to ChaCha8, so sibling cases never share a stream and
//! results do not depend on the order in which cases run.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::linalg::{c, CMatrix};

/// Master seed plus derivation path; recorded in reports so any case can be replayed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPath {
    pub master: u64,
    pub path: String,
}

impl SeedPath {
    pub fn new(master: u64, path: impl Into<String>) -> Self {
        SeedPath {
            master,
            path: path.into(),
        }
    }

    /// Child path `self.path/segment`.
    pub fn child(&self, segment: impl AsRef<str>) -> Self {
        let segment = segment.as_ref();
        let path = if self.path.is_empty() {
            segment.to_string()
        } else {
            format!("{}/{}", self.path, segment)
        };
        SeedPath {
            master: self.master,
            path,
        }
    }

    pub fn rng(&self) -> Sampler {
        let mut hasher = Sha256::new();
        hasher.update(self.master.to_le_bytes());
        hasher.update(self.path.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        Sampler {
            rng: ChaCha8Rng::from_seed(key),
        }
    }
}

/// Random matrices and scalars from a derived stream.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    /// Standard complex Gaussian: real and imaginary parts each N(0, 1/2).
    pub fn complex(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, bound: usize) -> usize {
        self.rng.random_range(0..bound)
    }

    /// Matrix with independent standard complex Gaussian entries.
    pub fn gaussian(&mut self, rows: usize, cols: usize) -> CMatrix {
        let data = (0..rows * cols).map(|_| self.complex()).collect();
        CMatrix::new(rows, cols, data).expect("gaussian entries are finite")
    }

    /// `(G + G*) / 2` for a Gaussian `G`.
    pub fn hermitian(&mut self, n: usize) -> CMatrix {
        self.gaussian(n, n).hermitian_part()
    }

    /// Unitary from the Gram–Schmidt orthonormalization of a Gaussian matrix.
    pub fn unitary(&mut self, n: usize) -> CMatrix {
        loop {
            if let Some(u) = gram_schmidt(&self.gaussian(n, n)) {
                return u;
            }
        }
    }

    /// Non-zero Gaussian matrix.
    pub fn nonzero(&mut self, rows: usize, cols: usize) -> CMatrix {
        loop {
            let m = self.gaussian(rows, cols);
            if m.frobenius_norm() > 1e-3 {
                return m;
            }
        }
    }
}

/// Orthonormalizes the columns (twice, for stability). `None` if rank deficient.
fn gram_schmidt(a: &CMatrix) -> Option<CMatrix> {
    let n = a.rows();
    let mut q = a.clone();
    for j in 0..a.cols() {
        for _ in 0..2 {
            for k in 0..j {
                let mut proj = c(0.0, 0.0);
                for i in 0..n {
                    proj += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..n {
                    let v = q[(i, k)];
                    q[(i, j)] -= proj * v;
                }
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return None;
        }
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    Some(q)
}
