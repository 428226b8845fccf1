use super::{DampingOperator, Grid};
use crate::error::{AdwError, Result};
use crate::par;
use crate::symbols::DampingDescriptor;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Truncated generator `A_W = [[0, I], [Delta, -2W]]` on the Fourier modes
/// with `|n|_inf <= n_max`, acting on stacked coefficients `(uhat, vhat)`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    n_max: usize,
    modes: Vec<(i64, i64)>,
    lap: Vec<f64>,
    // column-major M x M
    w: Vec<C64>,
}

/// Modes `|n|_inf <= n_max`, ordered by `n1` then `n2`.
pub fn truncated_modes(n_max: usize) -> Vec<(i64, i64)> {
    let r = n_max as i64;
    (-r..=r).flat_map(|a| (-r..=r).map(move |b| (a, b))).collect()
}

/// Assemble `A_W` by applying `W` to each plane wave on `grid` and projecting.
pub fn assemble_generator(desc: &DampingDescriptor, n_max: usize, grid: &Grid) -> Result<GeneratorMatrix> {
    if n_max == 0 {
        return Err(AdwError::InvalidParameter("n_max must be >= 1".into()));
    }
    if grid.n() < 4 * n_max {
        return Err(AdwError::Aliasing { grid: grid.n(), required: 4 * n_max });
    }
    let op = DampingOperator::new(desc, grid);
    let modes = truncated_modes(n_max);
    let m = modes.len();
    let lap = modes.iter().map(|&(a, b)| -4.0 * PI * PI * (a * a + b * b) as f64).collect();
    let mut w = vec![C64::new(0.0, 0.0); m * m];
    if let Some(d) = op.diagonal_symbol() {
        for (j, &(a, b)) in modes.iter().enumerate() {
            w[j * m + j] = C64::new(d[grid.mode_index(a, b)], 0.0);
        }
    } else {
        let targets: Vec<usize> = modes.iter().map(|&(a, b)| grid.mode_index(a, b)).collect();
        let columns = par::map_slice(grid.execution(), &modes, |&(a, b)| {
            let e = grid.plane_wave(a, b);
            let mut out = vec![C64::new(0.0, 0.0); grid.len()];
            op.apply_values(&e, &mut out);
            grid.forward(&mut out);
            targets.iter().map(|&t| out[t]).collect::<Vec<_>>()
        });
        for (j, col) in columns.into_iter().enumerate() {
            w[j * m..(j + 1) * m].copy_from_slice(&col);
        }
    }
    Ok(GeneratorMatrix { n_max, modes, lap, w })
}

impl GeneratorMatrix {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> &[(i64, i64)] {
        &self.modes
    }

    /// Number of retained modes `M`; the matrix has dimension `2M`.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    /// `<W e_n, e_m>` for mode indices `(m, n)`.
    pub fn w_entry(&self, row: usize, col: usize) -> C64 {
        self.w[col * self.modes.len() + row]
    }

    /// Entry `(row, col)` of the full `2M x 2M` matrix.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let m = self.modes.len();
        match (row < m, col < m) {
            (true, true) => C64::new(0.0, 0.0),
            (true, false) => C64::new(if col - m == row { 1.0 } else { 0.0 }, 0.0),
            (false, true) => C64::new(if row - m == col { self.lap[col] } else { 0.0 }, 0.0),
            (false, false) => -2.0 * self.w_entry(row - m, col - m),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let m = self.modes.len() as f64;
        let lap: f64 = self.lap.iter().map(|l| l * l).sum();
        let w: f64 = self.w.iter().map(|z| 4.0 * z.norm_sqr()).sum();
        (m + lap + w).sqrt()
    }

    /// `(uhat, vhat) -> (vhat, Delta uhat - 2 W vhat)`.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let m = self.modes.len();
        assert_eq!(x.len(), 2 * m, "vector length must be 2M");
        let (u, v) = x.split_at(m);
        let mut y = Vec::with_capacity(2 * m);
        y.extend_from_slice(v);
        for r in 0..m {
            let mut acc = u[r] * self.lap[r];
            for (c, vc) in v.iter().enumerate() {
                acc -= 2.0 * self.w_entry(r, c) * vc;
            }
            y.push(acc);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::ComplexField;
    use crate::symbols::Variant;
    use faer::{Mat, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn aliasing_rule() {
        let g = Grid::new(32).unwrap();
        let d = DampingDescriptor::zero();
        assert!(matches!(assemble_generator(&d, 9, &g), Err(AdwError::Aliasing { .. })));
        assert!(assemble_generator(&d, 8, &g).is_ok());
    }

    #[test]
    fn constant_blocks() {
        let g = Grid::new(16).unwrap();
        let d = DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, 0.1).unwrap();
        let a = assemble_generator(&d, 2, &g).unwrap();
        let m = a.mode_count();
        assert_eq!(m, 25);
        for i in 0..m {
            for j in 0..m {
                let (a1, a2) = a.modes()[i];
                let lap = -4.0 * PI * PI * (a1 * a1 + a2 * a2) as f64;
                let expect_w = if i == j { -0.2 } else { 0.0 };
                let expect_lap = if i == j { lap } else { 0.0 };
                let expect_id = if i == j { 1.0 } else { 0.0 };
                assert!((a.entry(m + i, m + j).re - expect_w).abs() < 1e-14);
                assert!((a.entry(m + i, j).re - expect_lap).abs() < 1e-12);
                assert_eq!(a.entry(i, m + j).re, expect_id);
                assert_eq!(a.entry(i, j).re, 0.0);
            }
        }
    }

    #[test]
    fn w_block_is_hermitian_psd() {
        let g = Grid::new(32).unwrap();
        let d = DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.1, 0.0).unwrap();
        let a = assemble_generator(&d, 4, &g).unwrap();
        let m = a.mode_count();
        let herm = Mat::<C64>::from_fn(m, m, |i, j| 0.5 * (a.w_entry(i, j) + a.w_entry(j, i).conj()));
        let ev = herm.self_adjoint_eigenvalues(Side::Lower).unwrap();
        assert!(ev[0] >= -1e-10, "min eigenvalue {}", ev[0]);
        for i in 0..m {
            for j in 0..m {
                assert!((a.w_entry(i, j) - a.w_entry(j, i).conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matvec_matches_grid_operators() {
        let g = Grid::new(32).unwrap();
        let d = DampingDescriptor::build_example(Variant::ThreeStrip, 0.12, 0.1, 0.0).unwrap();
        let a = assemble_generator(&d, 6, &g).unwrap();
        let m = a.mode_count();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<C64> = (0..2 * m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let y = a.matvec(&x);

        let field = |c: &[C64]| {
            let mut coeffs = vec![C64::new(0.0, 0.0); g.len()];
            for (k, &(p, q)) in a.modes().iter().enumerate() {
                coeffs[g.mode_index(p, q)] = c[k];
            }
            ComplexField::from_coefficients(&g, coeffs).unwrap()
        };
        let u = field(&x[..m]);
        let v = field(&x[m..]);
        let op = DampingOperator::new(&d, &g);
        let rhs = &crate::quantization::laplacian(&g, &u).unwrap() - &op.apply(&v).unwrap().scale(C64::new(2.0, 0.0));
        let coeffs = rhs.coefficients(&g);
        let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (k, &(p, q)) in a.modes().iter().enumerate() {
            assert!((y[k] - x[m + k]).norm() == 0.0);
            assert!((y[m + k] - coeffs[g.mode_index(p, q)]).norm() <= 1e-8 * scale);
        }
    }
}
