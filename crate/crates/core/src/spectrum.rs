//! Spectrum of the truncated generator: `D0`, `D(R)`, the high-frequency
//! abscissa, and the eigenspace kernel check for `W`.

use crate::error::{AdwError, Result};
use crate::par;
use crate::quantization::{assemble_generator, DampingOperator, GeneratorMatrix, Grid};
use crate::symbols::DampingDescriptor;
use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Dense non-normal eigensolver used for the generator.
pub trait EigenBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// All eigenvalues of `a`.
    fn eigenvalues(&self, a: &GeneratorMatrix) -> Result<Vec<C64>>;

    /// Unit eigenvector for the eigenvalue closest to `lambda`.
    fn eigenvector(&self, a: &GeneratorMatrix, lambda: C64) -> Result<Vec<C64>>;
}

/// Backend built on `faer` (Hessenberg reduction and shifted QR).
#[derive(Debug, Clone, Copy, Default)]
pub struct FaerBackend;

fn to_faer(a: &GeneratorMatrix) -> Mat<C64> {
    let n = a.dim();
    Mat::from_fn(n, n, |i, j| a.entry(i, j))
}

fn dump_matrix(a: &GeneratorMatrix) -> String {
    let path = std::env::temp_dir().join(format!("adw-generator-{}-nmax{}.txt", std::process::id(), a.n_max()));
    let written = std::fs::File::create(&path).and_then(|mut f| {
        let n = a.dim();
        writeln!(f, "{n}")?;
        for i in 0..n {
            for j in 0..n {
                let z = a.entry(i, j);
                if z != C64::new(0.0, 0.0) {
                    writeln!(f, "{i} {j} {:e} {:e}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    });
    match written {
        Ok(()) => path.display().to_string(),
        Err(e) => format!("<dump failed: {e}>"),
    }
}

impl EigenBackend for FaerBackend {
    fn name(&self) -> &'static str {
        "faer"
    }

    fn eigenvalues(&self, a: &GeneratorMatrix) -> Result<Vec<C64>> {
        let m = to_faer(a);
        let ev = m.eigenvalues().map_err(|_| AdwError::Eigensolver { dump: dump_matrix(a) })?;
        if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AdwError::Eigensolver { dump: dump_matrix(a) });
        }
        Ok(ev)
    }

    fn eigenvector(&self, a: &GeneratorMatrix, lambda: C64) -> Result<Vec<C64>> {
        // inverse iteration with a slightly perturbed shift
        let n = a.dim();
        let shift = lambda + C64::new(1e-9, 1e-9) * (1.0 + lambda.norm());
        let m = Mat::from_fn(n, n, |i, j| a.entry(i, j) - if i == j { shift } else { C64::new(0.0, 0.0) });
        let lu = m.partial_piv_lu();
        let mut x = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(1.0 + 0.1 * (i % 7) as f64, 0.01 * (i % 3) as f64));
        for _ in 0..4 {
            lu.solve_in_place(x.as_mut());
            let norm = (0..n).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(AdwError::Eigensolver { dump: dump_matrix(a) });
            }
            for i in 0..n {
                x[(i, 0)] /= norm;
            }
        }
        Ok((0..n).map(|i| x[(i, 0)]).collect())
    }
}

/// Eigenvalues of the truncated generator with the derived abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    pub n_max: usize,
    pub zero_tol: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
    /// Samples `(R, D(R))` with `D(R) = sup{Re lambda : |lambda| > R}`.
    #[serde(rename = "D_of_R")]
    pub d_of_r: Vec<(f64, f64)>,
    #[serde(rename = "D_inf_estimate")]
    pub d_inf_estimate: f64,
    pub r_large: f64,
    pub max_re: f64,
    pub backend: String,
}

impl SpectrumResult {
    /// `sup{Re lambda : |Im lambda| >= im_min}` (`-inf` if empty).
    pub fn max_re_above(&self, im_min: f64) -> f64 {
        self.eigenvalues.iter().filter(|z| z.im.abs() >= im_min).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The nonzero eigenvalue with the largest real part.
    pub fn slowest(&self) -> Option<C64> {
        self.eigenvalues
            .iter()
            .filter(|z| z.norm() > self.zero_tol)
            .copied()
            .fold(None, |best: Option<C64>, z| match best {
                Some(b) if b.re >= z.re => Some(b),
                _ => Some(z),
            })
    }
}

/// Spectral options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Explicit `zero_tol`; default `1e-6 * ||A||_inf`.
    pub zero_tol: Option<f64>,
    /// Number of `R` samples in `D(R)`.
    pub r_samples: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { zero_tol: None, r_samples: 64 }
    }
}

/// `alpha = 2 min(-D0, L_inf)`, with round-off on either branch clamped at zero.
pub fn decay_rate(d0: f64, l_inf: f64) -> f64 {
    2.0 * (-d0).max(0.0).min(l_inf.max(0.0))
}

/// Maximum absolute row sum of the generator.
pub fn generator_norm_inf(a: &GeneratorMatrix) -> f64 {
    let m = a.mode_count();
    (0..a.dim())
        .map(|i| {
            if i < m {
                1.0
            } else {
                let r = i - m;
                let lap = a.entry(i, r).norm();
                lap + (0..m).map(|c| 2.0 * a.w_entry(r, c).norm()).sum::<f64>()
            }
        })
        .fold(0.0, f64::max)
}

/// Derived quantities from a list of eigenvalues.
pub fn analyse(eigenvalues: Vec<C64>, n_max: usize, zero_tol: f64, r_samples: usize, backend: &str) -> SpectrumResult {
    let mut eigenvalues = eigenvalues;
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let d_of = |r: f64| {
        eigenvalues.iter().filter(|z| z.norm() > r).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    };
    let d0 = d_of(zero_tol);
    let r_top = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d_of_r = (0..r_samples.max(2))
        .map(|i| {
            let r = zero_tol + (r_top - zero_tol) * i as f64 / r_samples.max(2) as f64;
            (r, d_of(r))
        })
        .collect();
    let im_top = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let r_large = 0.5 * im_top;
    let d_inf_estimate =
        eigenvalues.iter().filter(|z| z.im.abs() >= r_large).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    SpectrumResult {
        eigenvalues,
        n_max,
        zero_tol,
        d0,
        d_of_r,
        d_inf_estimate,
        r_large,
        max_re,
        backend: backend.to_string(),
    }
}

/// Assemble the truncated generator on `grid` and analyse its spectrum.
pub fn spectrum_with(
    backend: &dyn EigenBackend,
    desc: &DampingDescriptor,
    n_max: usize,
    grid: &Grid,
    options: SpectrumOptions,
) -> Result<(SpectrumResult, GeneratorMatrix)> {
    let a = assemble_generator(desc, n_max, grid)?;
    let zero_tol = options.zero_tol.unwrap_or_else(|| 1e-6 * generator_norm_inf(&a));
    let ev = backend.eigenvalues(&a)?;
    Ok((analyse(ev, n_max, zero_tol, options.r_samples, backend.name()), a))
}

/// [`spectrum_with`] using [`FaerBackend`] and default options.
pub fn spectrum(desc: &DampingDescriptor, n_max: usize, grid: &Grid) -> Result<SpectrumResult> {
    Ok(spectrum_with(&FaerBackend, desc, n_max, grid, SpectrumOptions::default())?.0)
}

/// Per-eigenspace result of the kernel check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellCheck {
    pub mu: i64,
    pub dim: usize,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption2Result {
    pub radius: usize,
    pub min_sigma: f64,
    pub shells: Vec<ShellCheck>,
}

/// Lattice points with `|n|^2 = mu`, grouped by `mu` for `0 < mu <= radius^2`.
pub fn lattice_shells(radius: usize) -> Vec<(i64, Vec<(i64, i64)>)> {
    let r = radius as i64;
    let mut shells: std::collections::BTreeMap<i64, Vec<(i64, i64)>> = Default::default();
    for a in -r..=r {
        for b in -r..=r {
            let mu = a * a + b * b;
            if mu > 0 && mu <= r * r {
                shells.entry(mu).or_default().push((a, b));
            }
        }
    }
    shells.into_iter().collect()
}

/// Smallest singular value of `W` compressed to each Laplacian eigenspace
/// `|n|^2 = mu <= radius^2`, and the minimum over eigenspaces.
pub fn assumption2_check(desc: &DampingDescriptor, radius: usize, grid: &Grid) -> Result<Assumption2Result> {
    if radius == 0 {
        return Err(AdwError::InvalidParameter("radius must be >= 1".into()));
    }
    if grid.n() < 4 * radius {
        return Err(AdwError::Aliasing { grid: grid.n(), required: 4 * radius });
    }
    let op = DampingOperator::new(desc, grid);
    let shells = lattice_shells(radius);
    let checks = par::map_slice(grid.execution(), &shells, |(mu, pts)| {
        let d = pts.len();
        let mut gram = Mat::<C64>::zeros(d, d);
        let mut out = vec![C64::new(0.0, 0.0); grid.len()];
        for (j, &(a, b)) in pts.iter().enumerate() {
            op.apply_values(&grid.plane_wave(a, b), &mut out);
            grid.forward(&mut out);
            for (i, &(p, q)) in pts.iter().enumerate() {
                gram[(i, j)] = out[grid.mode_index(p, q)];
            }
        }
        let sv = gram.singular_values().map_err(|_| AdwError::Eigensolver { dump: format!("gram block mu = {mu}") })?;
        let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(ShellCheck { mu: *mu, dim: d, sigma_min })
    });
    let shells = checks.into_iter().collect::<Result<Vec<_>>>()?;
    let min_sigma = shells.iter().map(|s| s.sigma_min).fold(f64::INFINITY, f64::min);
    Ok(Assumption2Result { radius, min_sigma, shells })
}
