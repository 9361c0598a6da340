//! Deterministic sampling utilities.
//!
//! Every sampled verdict in this crate must be reproducible from a `u64` seed
//! alone, across platforms and dependency upgrades, so the generator is pinned
//! here rather than taken from an external crate: splitmix64 for the stream,
//! Box–Muller for Gaussians, and Ginibre + QR for Haar unitaries.

use crate::linalg::{cplx, CMatrix, CVector, Cplx, Operator};

/// splitmix64 stream generator.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [-1, 1).
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box–Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u = loop {
            let u = self.uniform();
            if u > 0.0 {
                break u;
            }
        };
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    pub fn gaussian_cplx(&mut self) -> Cplx {
        cplx(self.gaussian(), self.gaussian())
    }

    pub fn gaussian_vector(&mut self, dim: usize) -> CVector {
        CVector::from_fn(dim, |_, _| self.gaussian_cplx())
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.gaussian_cplx())
    }

    pub fn gaussian_operator(&mut self, dim: usize) -> Operator {
        Operator::new(self.gaussian_matrix(dim, dim)).expect("gaussian entries are finite")
    }

    pub fn self_adjoint_operator(&mut self, dim: usize) -> Operator {
        let g = self.gaussian_matrix(dim, dim);
        let h = (&g + g.adjoint()) * cplx(0.5, 0.0);
        Operator::new(h).expect("finite")
    }

    /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
    /// phases of the R diagonal absorbed into Q.
    pub fn haar_unitary(&mut self, dim: usize) -> CMatrix {
        let g = self.gaussian_matrix(dim, dim);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / cplx(d.norm(), 0.0)
            } else {
                cplx(1.0, 0.0)
            };
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
        q
    }

    /// Haar-random rank-`r` projection on `C^dim`: the canonical rank-`r`
    /// projection conjugated by a Haar unitary.
    pub fn haar_projection(&mut self, dim: usize, r: usize) -> Operator {
        let u = self.haar_unitary(dim);
        let ur = u.columns(0, r).clone_owned();
        Operator::new(&ur * ur.adjoint()).expect("finite")
    }
}
