use super::{ComplexField, Grid};
use crate::error::Result;
use crate::geometry::TorusPoint;
use crate::symbols::{DampingDescriptor, DampingFactor, FiberMultiplier, SpatialCutoff};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
enum Table {
    Const(f64),
    Nodes(Vec<f64>),
}

impl Table {
    fn from_cutoff(grid: &Grid, c: &SpatialCutoff, square: bool) -> Self {
        let p = if square { 2 } else { 1 };
        match c {
            SpatialCutoff::Constant(v) => Table::Const(v.powi(p)),
            SpatialCutoff::Strip { .. } => {
                Table::Nodes(grid.sample(|x1, x2| c.eval(&TorusPoint { x1, x2 }).powi(p)))
            }
        }
    }

    #[inline]
    fn apply(&self, data: &mut [C64]) {
        match self {
            Table::Const(v) => {
                if *v != 1.0 {
                    data.iter_mut().for_each(|z| *z *= *v)
                }
            }
            Table::Nodes(t) => data.iter_mut().zip(t).for_each(|(z, v)| *z *= *v),
        }
    }
}

#[derive(Debug, Clone)]
struct QuantizedFactor {
    inner: Table,
    outer: Table,
    outer_sq: Table,
    mult: Vec<f64>,
    // `B^* B` as a pointwise product when the multiplier is constant.
    pointwise: Option<Vec<f64>>,
}

/// The damping operator `W = sum_j B_j^* B_j` discretised on a grid with the
/// toroidal Kohn-Nirenberg rule: multiply by the inner cutoff, apply the
/// lattice multiplier, multiply by the outer cutoff.
///
/// Factors whose cutoffs are both constant are merged into a single Fourier
/// multiplier.
#[derive(Debug, Clone)]
pub struct DampingOperator {
    grid: Grid,
    factors: Vec<QuantizedFactor>,
    diagonal: Option<Vec<f64>>,
    norm_bound: f64,
    zero: bool,
}

fn multiplier_table(grid: &Grid, f: &DampingFactor) -> Vec<f64> {
    grid.multiplier(|k1, k2| f.multiplier.lattice(k1, k2))
}

impl DampingOperator {
    pub fn new(desc: &DampingDescriptor, grid: &Grid) -> Self {
        let zero = desc.is_zero();
        let mut factors = Vec::new();
        let mut diagonal: Option<Vec<f64>> = None;
        if !zero {
            for f in &desc.factors {
                if f.is_fourier_diagonal() {
                    let scale = f.inner.sup() * f.outer.sup();
                    let m = multiplier_table(grid, f);
                    let d = diagonal.get_or_insert_with(|| vec![0.0; grid.len()]);
                    d.iter_mut().zip(&m).for_each(|(d, m)| *d += (scale * m).powi(2));
                } else {
                    let pointwise = match f.multiplier {
                        FiberMultiplier::Constant(v) => Some(grid.sample(|x1, x2| {
                            let x = TorusPoint { x1, x2 };
                            (v * f.inner.eval(&x) * f.outer.eval(&x)).powi(2)
                        })),
                        FiberMultiplier::Cone { .. } => None,
                    };
                    factors.push(QuantizedFactor {
                        pointwise,
                        inner: Table::from_cutoff(grid, &f.inner, false),
                        outer: Table::from_cutoff(grid, &f.outer, false),
                        outer_sq: Table::from_cutoff(grid, &f.outer, true),
                        mult: multiplier_table(grid, f),
                    });
                }
            }
        }
        Self { grid: grid.clone(), factors, diagonal, norm_bound: desc.norm_bound(), zero }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `W` acts diagonally on Fourier coefficients.
    pub fn is_fourier_diagonal(&self) -> bool {
        self.factors.is_empty()
    }

    /// Diagonal Fourier symbol when [`Self::is_fourier_diagonal`] holds.
    pub fn diagonal_symbol(&self) -> Option<Vec<f64>> {
        if !self.factors.is_empty() {
            return None;
        }
        Some(self.diagonal.clone().unwrap_or_else(|| vec![0.0; self.grid.len()]))
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    fn multiply(data: &mut [C64], m: &[f64]) {
        data.iter_mut().zip(m).for_each(|(z, m)| *z *= *m);
    }

    /// `out = W u` on grid values.
    pub fn apply_values(&self, u: &[C64], out: &mut [C64]) {
        let g = &self.grid;
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        if self.zero {
            return;
        }
        let mut tmp = vec![C64::new(0.0, 0.0); g.len()];
        if let Some(d) = &self.diagonal {
            tmp.copy_from_slice(u);
            g.forward(&mut tmp);
            Self::multiply(&mut tmp, d);
            g.inverse(&mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
        }
        for f in &self.factors {
            if let Some(p) = &f.pointwise {
                out.iter_mut().zip(u).zip(p).for_each(|((o, u), p)| *o += u * p);
                continue;
            }
            tmp.copy_from_slice(u);
            f.inner.apply(&mut tmp);
            g.forward(&mut tmp);
            Self::multiply(&mut tmp, &f.mult);
            g.inverse(&mut tmp);
            f.outer_sq.apply(&mut tmp);
            g.forward(&mut tmp);
            Self::multiply(&mut tmp, &f.mult);
            g.inverse(&mut tmp);
            f.inner.apply(&mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
        }
    }

    /// `W u`.
    pub fn apply(&self, u: &ComplexField) -> Result<ComplexField> {
        u.check_grid(&self.grid)?;
        let mut out = ComplexField::zeros(&self.grid);
        self.apply_values(u.values(), out.values_mut());
        Ok(out)
    }

    /// Number of separable factors (diagonal factors are merged into one slot
    /// that is not addressable through [`Self::apply_b`]).
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// `B_j u` for the `j`-th non-diagonal factor.
    pub fn apply_b(&self, j: usize, u: &ComplexField) -> Result<ComplexField> {
        u.check_grid(&self.grid)?;
        let f = &self.factors[j];
        let mut t = u.values().to_vec();
        f.inner.apply(&mut t);
        self.grid.forward(&mut t);
        Self::multiply(&mut t, &f.mult);
        self.grid.inverse(&mut t);
        f.outer.apply(&mut t);
        ComplexField::from_values(&self.grid, t)
    }

    /// `B_j^* u = inner * Op(m) * (outer u)` (the multiplier is real).
    pub fn apply_b_adjoint(&self, j: usize, u: &ComplexField) -> Result<ComplexField> {
        u.check_grid(&self.grid)?;
        let f = &self.factors[j];
        let mut t = u.values().to_vec();
        f.outer.apply(&mut t);
        self.grid.forward(&mut t);
        Self::multiply(&mut t, &f.mult);
        self.grid.inverse(&mut t);
        f.inner.apply(&mut t);
        ComplexField::from_values(&self.grid, t)
    }

    /// `<W u, u> = sum_j ||B_j u||^2`, computed through the factors.
    pub fn quadratic_form(&self, u: &ComplexField) -> Result<f64> {
        u.check_grid(&self.grid)?;
        if self.zero {
            return Ok(0.0);
        }
        let mut total = 0.0;
        if let Some(d) = &self.diagonal {
            let c = u.coefficients(&self.grid);
            total += c.iter().zip(d).map(|(c, d)| c.norm_sqr() * d).sum::<f64>();
        }
        for j in 0..self.factors.len() {
            total += self.apply_b(j, u)?.norm_sqr();
        }
        Ok(total)
    }

    /// `u <- exp(-tau W) u` on grid values.
    ///
    /// Taylor series on sub-steps of size at most `0.5 / ||W||`.
    pub fn exp_neg_values(&self, u: &mut [C64], tau: f64) {
        if self.zero || tau == 0.0 {
            return;
        }
        let g = &self.grid;
        if self.factors.is_empty() {
            let d = self.diagonal.as_ref().expect("non-zero diagonal operator");
            g.forward(u);
            u.iter_mut().zip(d).for_each(|(z, d)| *z *= (-tau * d).exp());
            g.inverse(u);
            return;
        }
        let substeps = (tau * self.norm_bound / 0.5).ceil().max(1.0) as usize;
        let h = tau / substeps as f64;
        let mut term = vec![C64::new(0.0, 0.0); u.len()];
        let mut next = vec![C64::new(0.0, 0.0); u.len()];
        for _ in 0..substeps {
            term.copy_from_slice(u);
            let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                return;
            }
            for k in 1..=60 {
                self.apply_values(&term, &mut next);
                let c = -h / k as f64;
                let mut tmax = 0.0f64;
                for ((t, n), y) in term.iter_mut().zip(&next).zip(u.iter_mut()) {
                    *t = n * c;
                    *y += *t;
                    tmax = tmax.max(t.norm());
                }
                if tmax <= 1e-17 * scale {
                    break;
                }
            }
        }
    }
}

/// `u -> IDFT(m * DFT(u))` for a lattice multiplier table.
pub fn apply_multiplier(grid: &Grid, m: &[f64], u: &ComplexField) -> Result<ComplexField> {
    u.check_grid(grid)?;
    let mut t = u.values().to_vec();
    grid.forward(&mut t);
    t.iter_mut().zip(m).for_each(|(z, m)| *z *= *m);
    grid.inverse(&mut t);
    ComplexField::from_values(grid, t)
}

/// `B u = outer * IDFT(m * DFT(inner * u))` for a single factor.
pub fn apply_b(grid: &Grid, factor: &DampingFactor, u: &ComplexField) -> Result<ComplexField> {
    u.check_grid(grid)?;
    let inner = Table::from_cutoff(grid, &factor.inner, false);
    let outer = Table::from_cutoff(grid, &factor.outer, false);
    let mut t = u.values().to_vec();
    inner.apply(&mut t);
    grid.forward(&mut t);
    t.iter_mut().zip(multiplier_table(grid, factor)).for_each(|(z, m)| *z *= m);
    grid.inverse(&mut t);
    outer.apply(&mut t);
    ComplexField::from_values(grid, t)
}

/// `W u` for a descriptor (builds the discrete operator on the fly).
pub fn apply_w(grid: &Grid, desc: &DampingDescriptor, u: &ComplexField) -> Result<ComplexField> {
    DampingOperator::new(desc, grid).apply(u)
}

/// Discrete Laplacian `-4 pi^2 |k|^2` applied spectrally.
pub fn laplacian(grid: &Grid, u: &ComplexField) -> Result<ComplexField> {
    apply_multiplier(grid, &grid.laplacian_symbol(), u)
}
