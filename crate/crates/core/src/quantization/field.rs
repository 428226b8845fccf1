use super::Grid;
use crate::error::{AdwError, Result};
use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Sub};

/// Complex grid function on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    n: usize,
    values: Vec<C64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { n: grid.n(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(AdwError::GridMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { n: grid.n(), values })
    }

    /// Evaluate `f(x1, x2)` at the grid nodes.
    pub fn from_fn<F: FnMut(f64, f64) -> C64>(grid: &Grid, mut f: F) -> Self {
        let n = grid.n();
        let h = 1.0 / n as f64;
        let values = (0..n * n).map(|i| f((i / n) as f64 * h, (i % n) as f64 * h)).collect();
        Self { n, values }
    }

    /// Field with the given Fourier coefficients.
    pub fn from_coefficients(grid: &Grid, mut coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(AdwError::GridMismatch { expected: grid.len(), got: coeffs.len() });
        }
        grid.inverse(&mut coeffs);
        Ok(Self { n: grid.n(), values: coeffs })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.n != grid.n() {
            return Err(AdwError::GridMismatch { expected: grid.n(), got: self.n });
        }
        Ok(())
    }

    pub fn coefficients(&self, grid: &Grid) -> Vec<C64> {
        let mut c = self.values.clone();
        grid.forward(&mut c);
        c
    }

    /// `<u, v> = integral of u conj(v)` over the unit torus (grid quadrature).
    pub fn inner(&self, other: &ComplexField) -> C64 {
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        s / self.values.len() as f64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scale(&self, a: C64) -> ComplexField {
        Self { n: self.n, values: self.values.iter().map(|v| v * a).collect() }
    }

    /// Pointwise product with a real table.
    pub fn mul_real(&self, table: &[f64]) -> ComplexField {
        Self { n: self.n, values: self.values.iter().zip(table).map(|(v, t)| v * t).collect() }
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, rhs: &ComplexField) -> ComplexField {
        ComplexField { n: self.n, values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, rhs: &ComplexField) -> ComplexField {
        ComplexField { n: self.n, values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<C64> for &ComplexField {
    type Output = ComplexField;
    fn mul(self, rhs: C64) -> ComplexField {
        self.scale(rhs)
    }
}
