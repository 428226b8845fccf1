use crate::error::{AdwError, Result};
use crate::par::{self, Execution};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform `n x n` grid on the unit torus with its 2-D discrete Fourier transform.
///
/// Node `(i1, i2)` sits at `x = (i1 / n, i2 / n)` and is stored at `i1 * n + i2`.
/// Coefficients use the normalisation `u(x) = sum_k uhat(k) exp(2 pi i k.x)`, so
/// the forward transform carries the factor `1 / n^2`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    plans: Arc<Plans>,
    exec: Execution,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    /// `n` must be even and at least 16.
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(AdwError::InvalidParameter(format!("grid size {n} must be even and >= 16")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) };
        Ok(Self { n, plans: Arc::new(plans), exec: Execution::default() })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed lattice frequency of FFT index `j`.
    #[inline]
    pub fn freq(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// FFT index of lattice frequency `k` (must satisfy `|k| <= n/2`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of the coefficient of frequency `(k1, k2)`.
    #[inline]
    pub fn mode_index(&self, k1: i64, k2: i64) -> usize {
        self.index_of(k1) * self.n + self.index_of(k2)
    }

    pub fn node(&self, idx: usize) -> [f64; 2] {
        let n = self.n as f64;
        [(idx / self.n) as f64 / n, (idx % self.n) as f64 / n]
    }

    /// Table of `f(k1, k2)` over all FFT indices.
    pub fn multiplier<F: Fn(i64, i64) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        par::for_each_chunk_mut(self.exec, &mut out, n, |j1, row| {
            let k1 = self.freq(j1);
            for (j2, v) in row.iter_mut().enumerate() {
                *v = f(k1, self.freq(j2));
            }
        });
        out
    }

    /// Table of `f(x1, x2)` over grid nodes.
    pub fn sample<F: Fn(f64, f64) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        par::for_each_chunk_mut(self.exec, &mut out, n, |i1, row| {
            let x1 = i1 as f64 / n as f64;
            for (i2, v) in row.iter_mut().enumerate() {
                *v = f(x1, i2 as f64 / n as f64);
            }
        });
        out
    }

    /// `-4 pi^2 |k|^2`.
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        self.multiplier(|k1, k2| -4.0 * PI * PI * ((k1 * k1 + k2 * k2) as f64))
    }

    /// Plane wave `exp(2 pi i k.x)` on the nodes.
    pub fn plane_wave(&self, k1: i64, k2: i64) -> Vec<C64> {
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        par::for_each_chunk_mut(self.exec, &mut out, n, |i1, row| {
            for (i2, v) in row.iter_mut().enumerate() {
                // reduce the phase exactly in integers before scaling
                let m = (k1 * i1 as i64 + k2 * i2 as i64).rem_euclid(n as i64);
                *v = C64::from_polar(1.0, TAU * m as f64 / n as f64);
            }
        });
        out
    }

    fn rows(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.plans.inverse } else { &self.plans.forward };
        let rows_per_task = (n / 8).max(1);
        par::for_each_chunk_mut(self.exec, data, n * rows_per_task, |_, block| {
            let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(block, &mut scratch);
        });
    }

    fn transpose(&self, data: &mut [C64]) {
        let n = self.n;
        const B: usize = 32;
        for ib in (0..n).step_by(B) {
            for jb in (ib..n).step_by(B) {
                for i in ib..(ib + B).min(n) {
                    let j0 = if ib == jb { i + 1 } else { jb };
                    for j in j0..(jb + B).min(n) {
                        data.swap(i * n + j, j * n + i);
                    }
                }
            }
        }
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len());
        self.rows(data, inverse);
        self.transpose(data);
        self.rows(data, inverse);
        self.transpose(data);
    }

    /// Grid values to Fourier coefficients, in place.
    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// Fourier coefficients to grid values, in place.
    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
    }
}
