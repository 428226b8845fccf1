//! Coherent states, Gaussian beams on the flat torus, damped beams, and the
//! quasimode / scaling experiments built on them.

use crate::averages::{Averager, Quadrature};
use crate::error::{AdwError, Result};
use crate::evolution::{self, energy, least_squares, FieldState, Recording};
use crate::geometry::{geodesic_flow, nearest_image, CospherePoint, TorusPoint};
use crate::par;
use crate::quantization::{apply_multiplier, laplacian, ComplexField, DampingOperator, Grid};
use crate::symbols::{BumpProfile, DampingDescriptor};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Complex 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2([[a, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), b]])
    }

    /// `re + i im` from real parts.
    pub fn from_parts(re: [[f64; 2]; 2], im: [[f64; 2]; 2]) -> Self {
        let z = |i: usize, j: usize| C64::new(re[i][j], im[i][j]);
        Mat2([[z(0, 0), z(0, 1)], [z(1, 0), z(1, 1)]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    /// `v^T M w` for real vectors.
    pub fn form(&self, v: [f64; 2], w: [f64; 2]) -> C64 {
        let a = &self.0;
        (a[0][0] * w[0] + a[0][1] * w[1]) * v[0] + (a[1][0] * w[0] + a[1][1] * w[1]) * v[1]
    }

    /// `M v` for a real vector.
    pub fn apply(&self, v: [f64; 2]) -> [C64; 2] {
        let a = &self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0[0][1] - self.0[1][0]).norm() <= tol
    }

    /// Smallest eigenvalue of the (symmetrised) imaginary part.
    pub fn im_min_eigenvalue(&self) -> f64 {
        let (a, d) = (self.0[0][0].im, self.0[1][1].im);
        let b = 0.5 * (self.0[0][1].im + self.0[1][0].im);
        0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt()
    }
}

/// Radial amplitude envelope `b(y) = profile(|y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBump {
    pub plateau: f64,
    pub support: f64,
}

impl Default for RadialBump {
    fn default() -> Self {
        Self { plateau: 0.12, support: 0.24 }
    }
}

impl RadialBump {
    fn profile(&self) -> Result<BumpProfile> {
        BumpProfile::centered(0.0, self.plateau, self.support)
    }
}

/// Gaussian-beam / coherent-state data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub x0: TorusPoint,
    pub theta0: f64,
    #[serde(rename = "A0")]
    pub a0: Mat2,
    pub bump: RadialBump,
    pub k: f64,
}

impl BeamSpec {
    pub fn new(x0: TorusPoint, theta0: f64, a0: Mat2, bump: RadialBump, k: f64) -> Result<Self> {
        let s = Self { x0, theta0, a0, bump, k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a0.is_symmetric(1e-12) {
            return Err(AdwError::InvalidParameter("A0 must be symmetric".into()));
        }
        if !(self.a0.im_min_eigenvalue() > 0.0) {
            return Err(AdwError::InvalidParameter("Im A0 must be positive definite".into()));
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(AdwError::InvalidParameter(format!("k = {} must be >= 1", self.k)));
        }
        if !(self.bump.support < 0.25) {
            return Err(AdwError::InvalidParameter("bump support diameter must be < 1/2".into()));
        }
        self.bump.profile()?;
        Ok(())
    }

    pub fn with_k(&self, k: f64) -> Self {
        Self { k, ..self.clone() }
    }

    fn direction(&self) -> [f64; 2] {
        let (s, c) = self.theta0.sin_cos();
        [c, s]
    }
}

/// The centre frequency `k |xi| / (2 pi)` must sit at most halfway to Nyquist.
pub fn check_resolution(grid: &Grid, k: f64, xi_norm: f64) -> Result<()> {
    if k * xi_norm / (2.0 * PI) > grid.n() as f64 / 4.0 {
        return Err(AdwError::Unresolved { k, grid: grid.n() });
    }
    Ok(())
}

/// `A(t) = A0 (I + 2t P A0)^{-1}` with `P` the projector orthogonal to the
/// direction `theta`: the flat wave-equation Riccati flow `A' = -2 A P A`
/// for `|xi| = 1/2`.
pub fn riccati(a0: &Mat2, theta: f64, t: f64) -> Mat2 {
    let m = Mat2::identity().add(&projector(theta).mul(a0).scale(C64::new(2.0 * t, 0.0)));
    let inv = m.inverse().expect("I + 2t P A0 is invertible when Im A0 > 0");
    a0.mul(&inv)
}

fn projector(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let p = [[s * s, -s * c], [-s * c, c * c]];
    Mat2::from_parts(p, [[0.0; 2]; 2])
}

/// `det(I + 2t P A0)^{-1/2}` on the branch continuous from 1 at `t = 0`.
///
/// The determinant is `1 + 2t e^T A0 e` (`e` the unit normal), whose imaginary
/// part is nonnegative, so the principal root is continuous.
pub fn beam_amplitude(a0: &Mat2, theta: f64, t: f64) -> C64 {
    let (s, c) = theta.sin_cos();
    let det = C64::new(1.0, 0.0) + 2.0 * t * a0.form([-s, c], [-s, c]);
    1.0 / det.sqrt()
}

/// `h_k(x) = k^{1/2} exp(ik <y, xi0>) exp(ik/2 <A y, y>) b(y)` with unit `xi0`
/// and `y` the nearest-image displacement from `x0`.
pub fn coherent_state(grid: &Grid, spec: &BeamSpec) -> Result<ComplexField> {
    spec.validate()?;
    check_resolution(grid, spec.k, 1.0)?;
    let bump = spec.bump.profile()?;
    let xi = spec.direction();
    let k = spec.k;
    let amp = k.sqrt();
    Ok(ComplexField::from_fn(grid, |x1, x2| {
        let y = [nearest_image(x1 - spec.x0.x1), nearest_image(x2 - spec.x0.x2)];
        let r = y[0].hypot(y[1]);
        let b = bump.eval(r);
        if b == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let phase = C64::new(0.0, k) * (xi[0] * y[0] + xi[1] * y[1]) + C64::new(0.0, 0.5 * k) * spec.a0.form(y, y);
        amp * b * phase.exp()
    }))
}

/// Beam state at time `t`: `(u_k, d_t u_k)` from the closed forms.
///
/// `u_k = k^{-1/2} a(t) b(y) exp(ik psi)`, `psi = <xi0, y> + <A(t) y, y>/2`,
/// `y = x - x_t`, `|xi0| = 1/2`.
pub fn gaussian_beam(grid: &Grid, spec: &BeamSpec, t: f64) -> Result<FieldState> {
    spec.validate()?;
    check_resolution(grid, spec.k, 0.5)?;
    let bump = spec.bump.profile()?;
    let e = spec.direction();
    let xi = [0.5 * e[0], 0.5 * e[1]];
    let k = spec.k;
    let a = riccati(&spec.a0, spec.theta0, t);
    // A' = -2 A P A
    let adot = a.mul(&projector(spec.theta0)).mul(&a).scale(C64::new(-2.0, 0.0));
    let amp = beam_amplitude(&spec.a0, spec.theta0, t);
    let en = [-e[1], e[0]];
    let adot_amp = -a.form(en, en) * amp;
    let xt = geodesic_flow(&CospherePoint::new(spec.x0, spec.theta0), t).base;
    let pref = 1.0 / k.sqrt();
    let ik = C64::new(0.0, k);
    let n = grid.n();
    let values: Vec<(C64, C64)> = par::map_indexed(grid.execution(), n * n, |idx| {
        let [x1, x2] = grid.node(idx);
        let y = [nearest_image(x1 - xt.x1), nearest_image(x2 - xt.x2)];
        let r = y[0].hypot(y[1]);
        let b = bump.eval(r);
        let db = if r > 0.0 { bump.derivative(r) } else { 0.0 };
        if b == 0.0 && db == 0.0 {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let ay = a.apply(y);
        let psi = xi[0] * y[0] + xi[1] * y[1] + 0.5 * (ay[0] * y[0] + ay[1] * y[1]);
        let wave = (ik * psi).exp();
        let u = pref * amp * b * wave;
        // d_t y = -e
        let dpsi = -0.5 - (ay[0] * e[0] + ay[1] * e[1]) + 0.5 * adot.form(y, y);
        let dbump = if r > 0.0 { -db * (y[0] * e[0] + y[1] * e[1]) / r } else { 0.0 };
        let ut = pref * wave * (adot_amp * b + amp * dbump + ik * amp * b * dpsi);
        (u, ut)
    });
    let (u, ut): (Vec<C64>, Vec<C64>) = values.into_iter().unzip();
    Ok(FieldState { u: ComplexField::from_values(grid, u)?, ut: ComplexField::from_values(grid, ut)? })
}

/// `v_k = exp(-int_0^t w(phi_s(x0, theta0)) ds) u_k` and its time derivative.
///
/// The scalar is `sqrt(G_t^+)`; see [`crate::averages::g_plus`].
pub fn damped_beam(desc: &DampingDescriptor, grid: &Grid, spec: &BeamSpec, t: f64) -> Result<FieldState> {
    let averager = Averager::new(desc);
    damped_beam_with(&averager, grid, spec, t)
}

fn damped_beam_with(averager: &Averager, grid: &Grid, spec: &BeamSpec, t: f64) -> Result<FieldState> {
    let beam = gaussian_beam(grid, spec, t)?;
    let p = CospherePoint::new(spec.x0, spec.theta0);
    let g = (-averager.integral(&p, t, Quadrature::Exact)).exp();
    let w = averager.w(&geodesic_flow(&p, t));
    let ut = &beam.ut.scale(C64::new(g, 0.0)) - &beam.u.scale(C64::new(g * w, 0.0));
    Ok(FieldState { u: beam.u.scale(C64::new(g, 0.0)), ut })
}

/// `||(d_t^2 - Delta) u_k||` at time `t`; `d_t^2` by central differences of the
/// analytic `d_t u_k` with step `1e-4 / k`.
pub fn beam_residual(grid: &Grid, spec: &BeamSpec, t: f64) -> Result<f64> {
    let h = 1e-4 / spec.k;
    let plus = gaussian_beam(grid, spec, t + h)?;
    let minus = gaussian_beam(grid, spec, t - h)?;
    let now = gaussian_beam(grid, spec, t)?;
    let utt = (&plus.ut - &minus.ut).scale(C64::new(0.5 / h, 0.0));
    Ok((&utt - &laplacian(grid, &now.u)?).norm())
}

/// `||(d_t^2 - Delta + 2 W d_t) v_k||` at time `t`.
pub fn damped_beam_residual(desc: &DampingDescriptor, grid: &Grid, spec: &BeamSpec, t: f64) -> Result<f64> {
    let averager = Averager::new(desc);
    let op = DampingOperator::new(desc, grid);
    damped_residual_with(&averager, &op, grid, spec, t)
}

fn damped_residual_with(
    averager: &Averager,
    op: &DampingOperator,
    grid: &Grid,
    spec: &BeamSpec,
    t: f64,
) -> Result<f64> {
    let h = 1e-4 / spec.k;
    let plus = damped_beam_with(averager, grid, spec, t + h)?;
    let minus = damped_beam_with(averager, grid, spec, t - h)?;
    let now = damped_beam_with(averager, grid, spec, t)?;
    let vtt = (&plus.ut - &minus.ut).scale(C64::new(0.5 / h, 0.0));
    let lap = laplacian(grid, &now.u)?;
    let damp = op.apply(&now.ut)?.scale(C64::new(2.0, 0.0));
    Ok((&(&vtt - &lap) + &damp).norm())
}

/// Residual sup over sampled times for each `k`, and the log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSweep {
    pub ks: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
}

fn sweep(ks: &[f64], residuals: Vec<f64>) -> ResidualSweep {
    let lx: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let (slope, _) = least_squares(&lx, &ly);
    ResidualSweep { ks: ks.to_vec(), residuals, slope }
}

/// Sampled `max_t ||(d_t^2 - Delta) u_k||` over `times` for each `k`.
pub fn beam_residual_sweep(grid: &Grid, spec: &BeamSpec, ks: &[f64], times: &[f64]) -> Result<ResidualSweep> {
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let s = spec.with_k(k);
        let mut worst = 0.0f64;
        for &t in times {
            worst = worst.max(beam_residual(grid, &s, t)?);
        }
        out.push(worst);
    }
    Ok(sweep(ks, out))
}

/// Sampled `max_t ||(d_t^2 - Delta + 2 W d_t) v_k||` for each `k`.
pub fn damped_residual_sweep(
    desc: &DampingDescriptor,
    grid: &Grid,
    spec: &BeamSpec,
    ks: &[f64],
    times: &[f64],
) -> Result<ResidualSweep> {
    let averager = Averager::new(desc);
    let op = DampingOperator::new(desc, grid);
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let s = spec.with_k(k);
        let mut worst = 0.0f64;
        for &t in times {
            worst = worst.max(damped_residual_with(&averager, &op, grid, &s, t)?);
        }
        out.push(worst);
    }
    Ok(sweep(ks, out))
}

/// Outcome of evolving damped-beam initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamDecay {
    pub k: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// `E(u, T) / E(u, 0)` of the exact solution.
    pub measured: f64,
    /// `|G_T^+|^2 = exp(-4 int_0^T w)`.
    pub predicted: f64,
    /// `exp(-2 int_0^T w)`.
    pub transport: f64,
}

/// Evolve the solution with data `(v_k(0), d_t v_k(0))` to time `t_end`.
pub fn beam_decay_experiment(
    desc: &DampingDescriptor,
    grid: &Grid,
    spec: &BeamSpec,
    t_end: f64,
    dt: f64,
) -> Result<BeamDecay> {
    let v0 = damped_beam(desc, grid, spec, 0.0)?;
    let ev = evolution::evolve(desc, grid, &v0, t_end, dt, Recording::default())?;
    let e = &ev.trace.energies;
    let measured = e.last().expect("non-empty trace") / e[0];
    let integral = Averager::new(desc).integral(&CospherePoint::new(spec.x0, spec.theta0), t_end, Quadrature::Exact);
    Ok(BeamDecay { k: spec.k, t: t_end, measured, predicted: (-4.0 * integral).exp(), transport: (-2.0 * integral).exp() })
}

/// Test symbols for the coherent-state scaling experiment (all of order 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSymbol {
    /// `a = 1`.
    Identity,
    /// `a = <xi/|xi| - xi0, e_perp>`: vanishes to first order at `xi0`.
    DirectionTransverse,
    /// `a = (x - x0)^gamma` (nearest image), `|gamma| = ell`.
    Position { gamma: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTestSpec {
    pub order: f64,
    pub ell: u32,
    pub symbol: TestSymbol,
    pub ks: Vec<f64>,
}

impl ScalingTestSpec {
    /// The three standard cases `(m, ell) = (0, 0), (0, 1), (0, 2)`.
    pub fn standard(ks: &[f64]) -> Vec<Self> {
        vec![
            Self { order: 0.0, ell: 0, symbol: TestSymbol::Identity, ks: ks.to_vec() },
            Self { order: 0.0, ell: 1, symbol: TestSymbol::DirectionTransverse, ks: ks.to_vec() },
            Self { order: 0.0, ell: 2, symbol: TestSymbol::Position { gamma: [2, 0] }, ks: ks.to_vec() },
        ]
    }

    /// `m - ell / 2`.
    pub fn predicted_exponent(&self) -> f64 {
        self.order - self.ell as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub ks: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub bound: f64,
}

/// `||Op(a) h_k||` for each `k` and the fitted log-log slope.
pub fn scaling_experiment(test: &ScalingTestSpec, grid: &Grid, base: &BeamSpec) -> Result<ScalingResult> {
    match test.symbol {
        TestSymbol::Identity => {}
        TestSymbol::DirectionTransverse if test.ell == 1 => {}
        TestSymbol::Position { gamma } if gamma[0] + gamma[1] == test.ell => {}
        _ => return Err(AdwError::InvalidParameter("test symbol does not vanish to the declared order".into())),
    }
    let mut norms = Vec::with_capacity(test.ks.len());
    for &k in &test.ks {
        let spec = base.with_k(k);
        let h = coherent_state(grid, &spec)?;
        let out = match test.symbol {
            TestSymbol::Identity => h,
            TestSymbol::DirectionTransverse => {
                let (s, c) = spec.theta0.sin_cos();
                let m = grid.multiplier(|a, b| {
                    let r = ((a * a + b * b) as f64).sqrt();
                    if r == 0.0 {
                        0.0
                    } else {
                        // (n/|n| - xi0) . (-sin, cos)
                        (-(a as f64) * s + b as f64 * c) / r
                    }
                });
                apply_multiplier(grid, &m, &h)?
            }
            TestSymbol::Position { gamma } => {
                let table = grid.sample(|x1, x2| {
                    let y1 = nearest_image(x1 - spec.x0.x1);
                    let y2 = nearest_image(x2 - spec.x0.x2);
                    y1.powi(gamma[0] as i32) * y2.powi(gamma[1] as i32)
                });
                h.mul_real(&table)
            }
        };
        norms.push(out.norm());
    }
    let s = sweep(&test.ks, norms);
    Ok(ScalingResult { ks: s.ks, norms: s.residuals, slope: s.slope, bound: test.predicted_exponent() + 0.1 })
}

/// Energy of the free beam at time `t`.
pub fn beam_energy(grid: &Grid, spec: &BeamSpec, t: f64) -> Result<f64> {
    energy(grid, &gaussian_beam(grid, spec, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Variant;
    use proptest::prelude::*;

    fn spec(k: f64, a0: Mat2) -> BeamSpec {
        BeamSpec::new(TorusPoint::new(0.3, 0.6), 0.4, a0, RadialBump::default(), k).unwrap()
    }

    fn i_times(s: f64) -> Mat2 {
        Mat2::diag(C64::new(0.0, s), C64::new(0.0, s))
    }

    #[test]
    fn riccati_examples() {
        for theta in [0.0, 0.7, 2.0] {
            let a0 = i_times(1.0);
            assert_eq!(riccati(&a0, theta, 0.0), a0);
            for t in [0.3, 1.0, 4.0] {
                let a = riccati(&a0, theta, t);
                let en = [-theta.sin(), theta.cos()];
                let e = [theta.cos(), theta.sin()];
                let expect = C64::new(2.0 * t, 1.0) / (1.0 + 4.0 * t * t);
                assert!((a.form(en, en) - expect).norm() < 1e-14);
                assert!((a.form(e, e) - C64::new(0.0, 1.0)).norm() < 1e-14);
                assert!(a.form(e, en).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn riccati_solves_the_flow() {
        let a0 = Mat2::from_parts([[0.3, -0.2], [-0.2, 0.1]], [[2.0, 0.5], [0.5, 1.0]]);
        let th = 1.1;
        let t = 0.8;
        let h = 1e-5;
        let fd = riccati(&a0, th, t + h).add(&riccati(&a0, th, t - h).scale(C64::new(-1.0, 0.0))).scale(C64::new(0.5 / h, 0.0));
        let a = riccati(&a0, th, t);
        let rhs = a.mul(&projector(th)).mul(&a).scale(C64::new(-2.0, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                assert!((fd.0[i][j] - rhs.0[i][j]).norm() < 1e-7);
            }
        }
        // amplitude obeys a' = -(e_perp^T A e_perp) a
        let en = [-th.sin(), th.cos()];
        let da = (beam_amplitude(&a0, th, t + h) - beam_amplitude(&a0, th, t - h)) / (2.0 * h);
        assert!((da + a.form(en, en) * beam_amplitude(&a0, th, t)).norm() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn riccati_keeps_im_positive(r00 in -2.0..2.0f64, r01 in -2.0..2.0f64, r11 in -2.0..2.0f64,
                                     l0 in 0.1..3.0f64, l1 in 0.1..3.0f64, rot in 0.0..PI, th in 0.0..std::f64::consts::TAU) {
            let (s, c) = rot.sin_cos();
            let im = [[l0 * c * c + l1 * s * s, (l0 - l1) * c * s], [(l0 - l1) * c * s, l0 * s * s + l1 * c * c]];
            let a0 = Mat2::from_parts([[r00, r01], [r01, r11]], im);
            let mut prev = C64::new(1.0, 0.0);
            for i in 0..=200 {
                let t = i as f64 * 0.05;
                let a = riccati(&a0, th, t);
                prop_assert!(a.is_symmetric(1e-10));
                prop_assert!(a.im_min_eigenvalue() > 0.0);
                let amp = beam_amplitude(&a0, th, t);
                prop_assert!((amp.arg() - prev.arg()).abs() < PI);
                prev = amp;
            }
        }
    }

    #[test]
    fn coherent_state_examples() {
        let g = Grid::new(256).unwrap();
        let a0 = i_times(10.0);
        let s = BeamSpec::new(TorusPoint::new(0.5, 0.5), 0.4, a0, RadialBump::default(), 64.0).unwrap();
        let h = coherent_state(&g, &s).unwrap();
        let centre = h.values()[g.mode_index(0, 0) + 128 * 256 + 128];
        assert!((centre - C64::new(8.0, 0.0)).norm() < 1e-12);
        // norm^2 -> pi b(0)^2 / sqrt(det Im A)
        let oracle = PI / 10.0;
        let big = coherent_state(&g, &s.with_k(256.0)).unwrap();
        assert!((big.norm_sqr() - oracle).abs() < 1e-3 * oracle);
        // spectral concentration near k xi0 / (2 pi)
        for k in [64.0, 128.0, 256.0] {
            let c = coherent_state(&g, &s.with_k(k)).unwrap().coefficients(&g);
            let centre = [k * 0.4f64.cos() / (2.0 * PI), k * 0.4f64.sin() / (2.0 * PI)];
            let mut inside = 0.0;
            let mut total = 0.0;
            for (idx, z) in c.iter().enumerate() {
                let n1 = g.freq(idx / 256) as f64;
                let n2 = g.freq(idx % 256) as f64;
                total += z.norm_sqr();
                if (n1 - centre[0]).hypot(n2 - centre[1]) <= k.powf(0.6) {
                    inside += z.norm_sqr();
                }
            }
            assert!(inside / total >= 0.99);
        }
        assert!(matches!(coherent_state(&g, &s.with_k(2000.0)), Err(AdwError::Unresolved { .. })));
    }

    #[test]
    fn beam_at_time_zero_is_scaled_coherent_state() {
        let g = Grid::new(128).unwrap();
        let s = spec(64.0, i_times(2.0));
        let beam = gaussian_beam(&g, &s, 0.0).unwrap();
        // coherent state with xi0/2 and k: same phase with k' = k/2 on the linear term only
        let bump = s.bump.profile().unwrap();
        let e = s.direction();
        let expect = ComplexField::from_fn(&g, |x1, x2| {
            let y = [nearest_image(x1 - 0.3), nearest_image(x2 - 0.6)];
            let b = bump.eval(y[0].hypot(y[1]));
            let ph = C64::new(0.0, 64.0) * (0.5 * (e[0] * y[0] + e[1] * y[1])) + C64::new(0.0, 32.0) * s.a0.form(y, y);
            b * ph.exp() / 8.0
        });
        assert!((&beam.u - &expect).max_abs() < 1e-13);
    }

    #[test]
    fn time_derivative_matches_finite_difference() {
        let g = Grid::new(128).unwrap();
        let s = spec(64.0, Mat2::from_parts([[0.2, 0.1], [0.1, -0.3]], [[3.0, 0.4], [0.4, 2.0]]));
        let t = 0.7;
        let h = 1e-6;
        let fd = (&gaussian_beam(&g, &s, t + h).unwrap().u - &gaussian_beam(&g, &s, t - h).unwrap().u)
            .scale(C64::new(0.5 / h, 0.0));
        let ut = gaussian_beam(&g, &s, t).unwrap().ut;
        assert!((&fd - &ut).max_abs() < 1e-6 * ut.max_abs());
    }

    #[test]
    fn undamped_and_constant_damped_beams() {
        let g = Grid::new(64).unwrap();
        let s = spec(32.0, i_times(2.0));
        let u = gaussian_beam(&g, &s, 0.5).unwrap();
        let v = damped_beam(&DampingDescriptor::zero(), &g, &s, 0.5).unwrap();
        assert_eq!(u, v);
        let c = DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, 0.1).unwrap();
        let v = damped_beam(&c, &g, &s, 2.0).unwrap();
        assert!((&v.u - &u_at(&g, &s, 2.0).scale(C64::new((-0.2f64).exp(), 0.0))).max_abs() < 1e-14);
    }

    fn u_at(g: &Grid, s: &BeamSpec, t: f64) -> ComplexField {
        gaussian_beam(g, s, t).unwrap().u
    }

    #[test]
    fn scaling_examples() {
        let g = Grid::new(256).unwrap();
        let base = BeamSpec::new(TorusPoint::new(0.4, 0.3), 0.4, i_times(10.0), RadialBump::default(), 32.0).unwrap();
        let ks = [32.0, 64.0, 128.0, 256.0];
        let res: Vec<ScalingResult> =
            ScalingTestSpec::standard(&ks).iter().map(|t| scaling_experiment(t, &g, &base).unwrap()).collect();
        assert!(res[0].slope.abs() < 0.05);
        assert!(res[1].slope <= -0.4);
        assert!(res[2].slope <= -0.9);
        let bad = ScalingTestSpec { order: 0.0, ell: 2, symbol: TestSymbol::DirectionTransverse, ks: ks.to_vec() };
        assert!(scaling_experiment(&bad, &g, &base).is_err());
    }

    #[test]
    fn free_beam_energy_ratio_tends_to_one() {
        let g = Grid::new(256).unwrap();
        let s = spec(32.0, i_times(1.0));
        let gap = |k: f64| {
            let s = s.with_k(k);
            (beam_energy(&g, &s, 0.5).unwrap() / beam_energy(&g, &s, 0.0).unwrap() - 1.0).abs()
        };
        let gaps: Vec<f64> = [32.0, 64.0, 128.0, 256.0].into_iter().map(gap).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 0.05, "{gaps:?}");
    }

    #[test]
    fn beam_decay_examples() {
        let g = Grid::new(128).unwrap();
        let s = BeamSpec::new(TorusPoint::new(0.0, 0.5), 0.0, i_times(1.0), RadialBump::default(), 128.0).unwrap();
        let free = beam_decay_experiment(&DampingDescriptor::zero(), &g, &s, 2.0, 0.05).unwrap();
        assert!((free.measured - 1.0).abs() < 1e-10 && free.predicted == 1.0);

        let c = DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, 0.1).unwrap();
        let r = beam_decay_experiment(&c, &g, &s, 2.0, 0.05).unwrap();
        assert!((r.predicted - (-0.8f64).exp()).abs() < 1e-12);
        assert!((r.measured - r.transport).abs() < 0.05);

        // E(T)/E(0) <= 1.1 exp(-2 T L(T)) + 0.1 for high-frequency data
        let d = DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.1, 1.0).unwrap();
        let r = beam_decay_experiment(&d, &g, &s, 2.0, 0.01).unwrap();
        let l = crate::averages::l_of_t(&d, 2.0, &crate::averages::Sampling::default()).unwrap();
        assert!(r.measured <= 1.1 * (-4.0 * l).exp() + 0.1);
        assert!((r.measured - r.transport).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = Mat2::from_parts([[0.0; 2]; 2], [[1.0, 0.0], [0.0, -1.0]]);
        assert!(BeamSpec::new(TorusPoint::new(0.0, 0.0), 0.0, bad, RadialBump::default(), 32.0).is_err());
        let asym = Mat2::from_parts([[0.0, 1.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]);
        assert!(BeamSpec::new(TorusPoint::new(0.0, 0.0), 0.0, asym, RadialBump::default(), 32.0).is_err());
        let wide = RadialBump { plateau: 0.1, support: 0.3 };
        assert!(BeamSpec::new(TorusPoint::new(0.0, 0.0), 0.0, i_times(1.0), wide, 32.0).is_err());
    }
}
