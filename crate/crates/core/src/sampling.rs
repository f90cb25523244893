//! Seeded random float instances for tests, benchmarks and the CLI.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{validate_instance, Marginals, PositiveMatrix, ValidatedInstance, DEFAULT_CONSISTENCY_TOL};

/// Entries are uniform on `[0.1, 10]`; marginals uniform on `[0.5, 5]` with
/// the column targets rescaled to the row total.
#[derive(Debug, Clone)]
pub struct InstanceSampler {
    rng: ChaCha8Rng,
}

impl InstanceSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn entry(&mut self) -> f64 {
        self.rng.gen_range(0.1..=10.0)
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Result<PositiveMatrix> {
        let data = (0..rows * cols).map(|_| self.entry()).collect();
        PositiveMatrix::new(rows, cols, data)
    }

    pub fn marginals(&mut self, rows: usize, cols: usize) -> Result<Marginals> {
        let r: Vec<f64> = (0..rows).map(|_| self.rng.gen_range(0.5..=5.0)).collect();
        let mut c: Vec<f64> = (0..cols).map(|_| self.rng.gen_range(0.5..=5.0)).collect();
        let k = r.iter().sum::<f64>() / c.iter().sum::<f64>();
        c.iter_mut().for_each(|x| *x *= k);
        Marginals::new(r, c)
    }

    pub fn instance(&mut self, rows: usize, cols: usize) -> Result<ValidatedInstance> {
        let a = self.matrix(rows, cols)?;
        let m = self.marginals(rows, cols)?;
        validate_instance(a, m, DEFAULT_CONSISTENCY_TOL)
    }

    /// 2×2 matrix with `|det| > 1e-3 * a11 a22`, resampled until it holds.
    pub fn nonsingular_2x2(&mut self) -> Result<PositiveMatrix> {
        loop {
            let a = self.matrix(2, 2)?;
            let alpha = a.get(0, 0) * a.get(1, 1);
            let det = alpha - a.get(0, 1) * a.get(1, 0);
            if det.abs() > 1e-3 * alpha {
                return Ok(a);
            }
        }
    }

    /// `a_ij = u_i v_j`.
    pub fn rank_one(&mut self, rows: usize, cols: usize) -> Result<PositiveMatrix> {
        let u: Vec<f64> = (0..rows).map(|_| self.entry()).collect();
        let v: Vec<f64> = (0..cols).map(|_| self.entry()).collect();
        let data = (0..rows * cols).map(|k| u[k / cols] * v[k % cols]).collect();
        PositiveMatrix::new(rows, cols, data)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }
}
