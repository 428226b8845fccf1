//! Geodesic time-averages of the principal symbol: `L(t)`, `L_inf`, the
//! anisotropic geometric control check, and the transport cocycle `G_t^+`.

use crate::error::{AdwError, Result};
use crate::geometry::{geodesic_flow, CospherePoint, TorusPoint};
use crate::par::{self, Execution};
use crate::symbols::{DampingDescriptor, FiberMultiplier, SpatialCutoff};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

/// How `int_0^t w(phi_s p) ds` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Quadrature {
    /// Tabulated antiderivatives of the strip profiles (cubic Hermite, exact
    /// derivative data). Accurate to ~1e-12 independently of `t`.
    Exact,
    /// Composite midpoint rule with step at most `h`.
    Midpoint { h: f64 },
}

impl Quadrature {
    /// Step reported in result metadata (0 for the tabulated rule).
    pub fn step(&self) -> f64 {
        match self {
            Quadrature::Exact => 0.0,
            Quadrature::Midpoint { h } => *h,
        }
    }
}

/// Sample lattice on `S^*T^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub n_x: usize,
    pub n_theta: usize,
    pub quadrature: Quadrature,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { n_x: 64, n_theta: 256, quadrature: Quadrature::Exact }
    }
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        if self.n_x < 8 || self.n_theta < 8 {
            return Err(AdwError::InvalidParameter(format!(
                "sampling resolutions must be >= 8 (n_x = {}, n_theta = {})",
                self.n_x, self.n_theta
            )));
        }
        if let Quadrature::Midpoint { h } = self.quadrature {
            if !(h > 0.0 && h.is_finite()) {
                return Err(AdwError::InvalidParameter(format!("quadrature step {h} must be positive")));
            }
        }
        Ok(())
    }
}

const RATIONAL_DIRECTIONS: [f64; 8] =
    [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 7.0 * FRAC_PI_4];

/// Direction samples: the eight rational directions first, then the uniform
/// grid `2 pi j / n_theta` without duplicates.
pub fn theta_samples(n_theta: usize) -> Vec<f64> {
    let mut out = RATIONAL_DIRECTIONS.to_vec();
    for j in 0..n_theta {
        let th = TAU * j as f64 / n_theta as f64;
        if !RATIONAL_DIRECTIONS.iter().any(|r| (r - th).abs() < 1e-12) {
            out.push(th);
        }
    }
    out
}

const TABLE_NODES: usize = 4096;
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

/// `F(y) = int_0^y g` for a 1-periodic `g`, on a uniform table with exact
/// derivative values.
#[derive(Debug, Clone)]
struct Antiderivative {
    f: Vec<f64>,
    g: Vec<f64>,
    period_integral: f64,
}

impl Antiderivative {
    fn new(g: impl Fn(f64) -> f64) -> Self {
        let n = TABLE_NODES;
        let h = 1.0 / n as f64;
        let gv: Vec<f64> = (0..=n).map(|i| g(i as f64 * h)).collect();
        let mut f = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        f.push(0.0);
        for i in 0..n {
            let mid = (i as f64 + 0.5) * h;
            acc += GAUSS4.iter().map(|(x, w)| w * g(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
            f.push(acc);
        }
        Self { f, g: gv, period_integral: acc }
    }

    fn eval(&self, y: f64) -> f64 {
        let n = TABLE_NODES;
        let fl = y.floor();
        let r = (y - fl) * n as f64;
        let i = (r as usize).min(n - 1);
        let s = r - i as f64;
        let h = 1.0 / n as f64;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        fl * self.period_integral
            + h00 * self.f[i]
            + h10 * h * self.g[i]
            + h01 * self.f[i + 1]
            + h11 * h * self.g[i + 1]
    }
}

#[derive(Debug, Clone)]
enum SpatialPart {
    Constant(f64),
    Strip { axis: usize, cutoff: SpatialCutoff, table: Antiderivative, slope: f64 },
}

#[derive(Debug, Clone)]
struct FactorAverager {
    spatial: SpatialPart,
    multiplier: FiberMultiplier,
}

impl FactorAverager {
    /// `chi^2` as a function of the strip coordinate.
    fn g(&self, y: f64) -> f64 {
        match &self.spatial {
            SpatialPart::Constant(v) => v * v,
            SpatialPart::Strip { cutoff, .. } => cutoff.eval_coord(y).powi(2),
        }
    }

    /// `int_0^t chi^2(y + s d) ds` for the strip coordinate `y`, speed `d`.
    fn integral(&self, y: f64, d: f64, t: f64, quad: Quadrature) -> f64 {
        match (&self.spatial, quad) {
            (SpatialPart::Constant(v), _) => v * v * t,
            (SpatialPart::Strip { table, .. }, Quadrature::Exact) => {
                if (t * d).abs() < 1e-6 {
                    t * self.g(y + 0.5 * t * d)
                } else {
                    (table.eval(y + t * d) - table.eval(y)) / d
                }
            }
            (SpatialPart::Strip { .. }, Quadrature::Midpoint { h }) => {
                let cells = (t / h).ceil().max(1.0) as usize;
                let hh = t / cells as f64;
                (0..cells).map(|i| self.g(y + (i as f64 + 0.5) * hh * d)).sum::<f64>() * hh
            }
        }
    }

    fn coord_and_speed(&self, p: &CospherePoint) -> (f64, f64) {
        match &self.spatial {
            SpatialPart::Constant(_) => (0.0, 0.0),
            SpatialPart::Strip { axis, .. } => (p.base.coord(*axis), p.direction()[*axis]),
        }
    }
}

/// Precomputed evaluator for geodesic integrals of `w`.
#[derive(Debug, Clone)]
pub struct Averager {
    factors: Vec<FactorAverager>,
    exec: Execution,
}

impl Averager {
    pub fn new(desc: &DampingDescriptor) -> Self {
        let factors = desc
            .factors
            .iter()
            .map(|f| {
                let spatial = match &f.inner {
                    SpatialCutoff::Constant(v) => SpatialPart::Constant(*v),
                    c @ SpatialCutoff::Strip { axis, .. } => {
                        let cc = c.clone();
                        SpatialPart::Strip {
                            axis: *axis,
                            table: Antiderivative::new(move |y| cc.eval_coord(y).powi(2)),
                            slope: 2.0 * c.slope_bound(),
                            cutoff: c.clone(),
                        }
                    }
                };
                FactorAverager { spatial, multiplier: f.multiplier.clone() }
            })
            .collect();
        Self { factors, exec: Execution::default() }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Principal symbol at `p`.
    pub fn w(&self, p: &CospherePoint) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let psi = f.multiplier.principal(p.theta);
                let (y, _) = f.coord_and_speed(p);
                psi * psi * f.g(y)
            })
            .sum()
    }

    /// `int_0^t w(phi_s p) ds`.
    pub fn integral(&self, p: &CospherePoint, t: f64, quad: Quadrature) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let psi = f.multiplier.principal(p.theta);
                if psi == 0.0 {
                    return 0.0;
                }
                let (y, d) = f.coord_and_speed(p);
                psi * psi * f.integral(y, d, t, quad)
            })
            .sum()
    }

    /// `(1/t) int_0^t w(phi_s p) ds`.
    pub fn time_average(&self, p: &CospherePoint, t: f64, quad: Quadrature) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(AdwError::InvalidParameter(format!("averaging time {t} must be positive")));
        }
        if let Quadrature::Midpoint { h } = quad {
            if !(h > 0.0 && h <= t) {
                return Err(AdwError::InvalidParameter(format!("quadrature step {h} must lie in (0, t]")));
            }
        }
        Ok(self.integral(p, t, quad) / t)
    }

    /// `inf_x (1/t) int_0^t w` for a fixed direction. For fixed `theta` the
    /// integral splits as `A(x1) + B(x2)`, so each axis is minimised on its own:
    /// `n_x` samples followed by golden-section refinement around the best one.
    fn direction_infimum(&self, theta: f64, t: f64, sampling: &Sampling) -> (f64, [f64; 2]) {
        let mut constant = 0.0;
        let mut axes: [Vec<(&FactorAverager, f64, f64)>; 2] = [Vec::new(), Vec::new()];
        for f in &self.factors {
            let psi = f.multiplier.principal(theta);
            if psi == 0.0 {
                continue;
            }
            match &f.spatial {
                SpatialPart::Constant(_) => constant += psi * psi * f.integral(0.0, 0.0, t, sampling.quadrature),
                SpatialPart::Strip { axis, .. } => {
                    let d = if *axis == 0 { theta.cos() } else { theta.sin() };
                    axes[*axis].push((f, psi * psi, d));
                }
            }
        }
        let mut total = constant;
        let mut x = [0.0; 2];
        for (a, terms) in axes.iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            let line = |y: f64| -> f64 {
                terms.iter().map(|(f, psi2, d)| psi2 * f.integral(y, *d, t, sampling.quadrature)).sum()
            };
            let (v, y) = minimize_periodic(&line, sampling.n_x);
            total += v;
            x[a] = y;
        }
        (total, x)
    }

    /// Sampled infimum of the `t`-average and a point attaining it.
    ///
    /// Every value considered is the average along an actual geodesic, so the
    /// result is an upper bound for the true infimum.
    pub fn l_of_t(&self, t: f64, sampling: &Sampling) -> Result<(f64, CospherePoint)> {
        sampling.validate()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(AdwError::InvalidParameter(format!("averaging time {t} must be positive")));
        }
        let thetas = theta_samples(sampling.n_theta);
        let per_theta = par::map_slice(self.exec, &thetas, |&theta| self.direction_infimum(theta, t, sampling));
        let mut best = (f64::INFINITY, [0.0; 2], 0.0);
        for (th, (v, x)) in thetas.iter().zip(&per_theta) {
            if *v < best.0 {
                best = (*v, *x, *th);
            }
        }
        let h = TAU / sampling.n_theta as f64;
        let g = |th: f64| self.direction_infimum(th, t, sampling).0;
        let (v, th) = golden_section(&g, best.2 - h, best.2 + h, 40);
        if v < best.0 {
            best = (v, self.direction_infimum(th, t, sampling).1, th);
        }
        let (v, x, th) = best;
        Ok(((v / t).max(0.0), CospherePoint::new(TorusPoint::new(x[0], x[1]), th)))
    }

    /// `L(t)` on each of `times` together with the running sup.
    pub fn l_infinity(&self, t_max: f64, sampling: &Sampling) -> Result<LInfinity> {
        if !(t_max >= 1.0 && t_max.is_finite()) {
            return Err(AdwError::InvalidParameter(format!("t_max = {t_max} must be >= 1")));
        }
        let times = fekete_times(t_max);
        let mut values = Vec::with_capacity(times.len());
        for &t in &times {
            values.push(self.l_of_t(t, sampling)?.0);
        }
        let sup = values.iter().cloned().fold(0.0, f64::max);
        let terminal = *values.last().expect("non-empty time grid");
        Ok(LInfinity { times, values, terminal, sup })
    }

    /// First time `w(phi_s p) >= c`, resolved to `h`, or `None` before `t_max`.
    fn hitting_time(&self, p: &CospherePoint, c: f64, t_max: f64, h: f64, lip: f64) -> Option<f64> {
        let mut s = 0.0;
        loop {
            let q = geodesic_flow(p, s);
            let w = self.w(&q);
            if w >= c {
                return Some(s);
            }
            if s >= t_max {
                return None;
            }
            let skip = if lip > 0.0 { ((c - w) / lip).max(h) } else { t_max };
            s = (s + skip).min(t_max);
        }
    }

    /// Lipschitz bound of `s -> w(phi_s p)` for fixed direction.
    fn direction_lipschitz(&self, theta: f64) -> f64 {
        self.factors
            .iter()
            .map(|f| match &f.spatial {
                SpatialPart::Constant(_) => 0.0,
                SpatialPart::Strip { axis, slope, .. } => {
                    let psi = f.multiplier.principal(theta);
                    let d = if *axis == 0 { theta.cos() } else { theta.sin() };
                    psi * psi * d.abs() * slope
                }
            })
            .sum()
    }

    /// Anisotropic control check: does every sampled geodesic reach
    /// `{w >= c_floor}` before `t_max`?
    pub fn agcc(&self, c_floor: f64, t_max: f64, h: f64, sampling: &Sampling) -> Result<AgccVerdict> {
        sampling.validate()?;
        if !(c_floor > 0.0) {
            return Err(AdwError::InvalidParameter(format!("c_floor = {c_floor} must be positive")));
        }
        if !(t_max > 0.0 && h > 0.0) {
            return Err(AdwError::InvalidParameter("t_max and h must be positive".into()));
        }
        let n = sampling.n_x;
        let thetas = theta_samples(sampling.n_theta);
        let per_theta = par::map_slice(self.exec, &thetas, |&theta| {
            let lip = self.direction_lipschitz(theta) * 1.01;
            let mut worst = Some(0.0f64);
            let mut witness: Option<(f64, usize)> = None;
            for k in 0..n * n {
                let p = CospherePoint::new(TorusPoint::new((k / n) as f64 / n as f64, (k % n) as f64 / n as f64), theta);
                match self.hitting_time(&p, c_floor, t_max, h, lip) {
                    Some(s) => {
                        if let Some(wo) = worst.as_mut() {
                            *wo = wo.max(s);
                        }
                    }
                    None => {
                        worst = None;
                        let integral = self.integral(&p, t_max, Quadrature::Exact);
                        if witness.is_none_or(|(v, _)| integral < v - WITNESS_TIE) {
                            witness = Some((integral, k));
                        }
                    }
                }
            }
            (worst, witness)
        });
        let mut t0 = Some(0.0f64);
        let mut witness: Option<(f64, CospherePoint)> = None;
        for (ti, (worst, wit)) in per_theta.into_iter().enumerate() {
            match (worst, t0) {
                (Some(a), Some(b)) => t0 = Some(a.max(b)),
                _ => t0 = None,
            }
            if let Some((v, k)) = wit {
                if witness.as_ref().is_none_or(|(bv, _)| v < *bv - WITNESS_TIE) {
                    let p = CospherePoint::new(
                        TorusPoint::new((k / n) as f64 / n as f64, (k % n) as f64 / n as f64),
                        thetas[ti],
                    );
                    witness = Some((v, p));
                }
            }
        }
        Ok(AgccVerdict {
            satisfied: t0.is_some(),
            t0,
            c: c_floor,
            t_max,
            witness: witness.map(|(_, p)| p),
            witness_integral: witness.map(|(v, _)| v),
            sampling: *sampling,
        })
    }
}

/// Integrals closer than this count as ties; ties keep the earlier sample.
const WITNESS_TIE: f64 = 1e-12;

/// Minimum of `f` on `[a, b]` by golden-section search (also checks the ends).
fn golden_section(f: &dyn Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut best = [(f(a), a), (f(b), b)].into_iter().fold((f64::INFINITY, a), |m, p| if p.0 < m.0 { p } else { m });
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < best.0 {
            best = (fc, c);
        }
        if fd < best.0 {
            best = (fd, d);
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    for p in [(fc, c), (fd, d)] {
        if p.0 < best.0 {
            best = p;
        }
    }
    best
}

/// Minimum of a 1-periodic `f`: `n` samples, then refinement around the best.
fn minimize_periodic(f: &dyn Fn(f64) -> f64, n: usize) -> (f64, f64) {
    let h = 1.0 / n as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let y = i as f64 * h;
        let v = f(y);
        if v < best.0 {
            best = (v, y);
        }
    }
    let (v, y) = golden_section(f, best.1 - h, best.1 + h, 40);
    if v < best.0 {
        best = (v, crate::geometry::wrap_unit(y));
    }
    best
}

/// Times `k / 8` up to `t_max` (and `t_max` itself).
pub fn fekete_times(t_max: f64) -> Vec<f64> {
    let mut times: Vec<f64> = (1..).map(|k| k as f64 / 8.0).take_while(|t| *t <= t_max + 1e-12).collect();
    if times.last().is_none_or(|t| (t - t_max).abs() > 1e-12) {
        times.push(t_max);
    }
    times
}

/// Sampled `L(t)` curve with its terminal value and running sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LInfinity {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub terminal: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgccVerdict {
    pub satisfied: bool,
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    pub c: f64,
    pub t_max: f64,
    pub witness: Option<CospherePoint>,
    pub witness_integral: Option<f64>,
    pub sampling: Sampling,
}

/// Everything the averaging side reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageResult {
    pub t_samples: Vec<f64>,
    #[serde(rename = "L_values")]
    pub l_values: Vec<f64>,
    #[serde(rename = "L_inf_estimate")]
    pub l_inf_estimate: f64,
    #[serde(rename = "L_terminal")]
    pub l_terminal: f64,
    pub agcc: Option<AgccVerdict>,
    pub quadrature_step: f64,
    pub sampling: Sampling,
}

impl AverageResult {
    pub fn from_curve(curve: LInfinity, agcc: Option<AgccVerdict>, sampling: Sampling) -> Self {
        Self {
            t_samples: curve.times,
            l_values: curve.values,
            l_inf_estimate: curve.sup,
            l_terminal: curve.terminal,
            agcc,
            quadrature_step: sampling.quadrature.step(),
            sampling,
        }
    }
}

/// `(1/t) int_0^t w(phi_s p) ds` by the composite midpoint rule with step `h`.
pub fn time_average(desc: &DampingDescriptor, p: &CospherePoint, t: f64, h: f64) -> Result<f64> {
    Averager::new(desc).time_average(p, t, Quadrature::Midpoint { h })
}

/// Sampled `L(t)`.
pub fn l_of_t(desc: &DampingDescriptor, t: f64, sampling: &Sampling) -> Result<f64> {
    Ok(Averager::new(desc).l_of_t(t, sampling)?.0)
}

/// `(L(t_max), sup_t L(t))` over the grid [`fekete_times`].
pub fn l_infinity_estimate(desc: &DampingDescriptor, t_max: f64, sampling: &Sampling) -> Result<LInfinity> {
    Averager::new(desc).l_infinity(t_max, sampling)
}

pub fn agcc_check(
    desc: &DampingDescriptor,
    c_floor: f64,
    t_max: f64,
    h: f64,
    sampling: &Sampling,
) -> Result<AgccVerdict> {
    Averager::new(desc).agcc(c_floor, t_max, h, sampling)
}

/// `G_t^+(p) = exp(-2 int_0^t w(phi_s p) ds)`.
pub fn g_plus(desc: &DampingDescriptor, p: &CospherePoint, t: f64, quad: Quadrature) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(AdwError::InvalidParameter(format!("time {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok((-2.0 * Averager::new(desc).integral(p, t, quad)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{strip_cutoff, Variant};
    use proptest::prelude::*;

    fn two_strip() -> DampingDescriptor {
        DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.1, 0.0).unwrap()
    }

    fn small() -> Sampling {
        Sampling { n_x: 16, n_theta: 32, quadrature: Quadrature::Exact }
    }

    /// Adaptive Simpson oracle for a 1-D integral.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn theta_samples_contain_rational_directions() {
        let th = theta_samples(256);
        assert_eq!(th.len(), 256);
        assert_eq!(&th[..8], &RATIONAL_DIRECTIONS);
        assert_eq!(theta_samples(10).len(), 10 + 8 - 2);
    }

    #[test]
    fn constant_and_zero_averages() {
        let c = DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, 0.1).unwrap();
        let p = CospherePoint::from_coords(0.3, 0.7, 1.0);
        assert!((time_average(&c, &p, 2.0, 1e-3).unwrap() - 0.1).abs() < 1e-14);
        assert!((l_of_t(&c, 3.0, &small()).unwrap() - 0.1).abs() < 1e-14);
        let est = l_infinity_estimate(&c, 2.0, &small()).unwrap();
        assert!((est.terminal - 0.1).abs() < 1e-14 && (est.sup - 0.1).abs() < 1e-14);
        let z = DampingDescriptor::zero();
        assert_eq!(time_average(&z, &p, 2.0, 1e-3).unwrap(), 0.0);
        assert_eq!(g_plus(&z, &p, 5.0, Quadrature::Exact).unwrap(), 1.0);
        let g = g_plus(&c, &p, 3.0, Quadrature::Exact).unwrap();
        assert!((g - (-0.6f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn horizontal_average_matches_strip_oracle() {
        let d = two_strip();
        let chi = strip_cutoff(0, 0.5, 0.1).unwrap();
        for x1 in [0.0, 0.37, 0.45, 0.9] {
            let p = CospherePoint::from_coords(x1, 0.0, 0.0);
            let oracle = simpson(&|s| chi.eval_coord(s + x1).powi(2), 0.0, 1.0, 20_000);
            let mid = time_average(&d, &p, 1.0, 1e-3).unwrap();
            let exact = Averager::new(&d).time_average(&p, 1.0, Quadrature::Exact).unwrap();
            assert!((mid - oracle).abs() < 1e-6, "midpoint {mid} vs {oracle}");
            assert!((exact - oracle).abs() < 1e-11, "exact {exact} vs {oracle}");
        }
    }

    #[test]
    fn exact_and_midpoint_agree_to_second_order() {
        let d = DampingDescriptor::build_example(Variant::ThreeStrip, 0.12, 0.1, 0.0).unwrap();
        let a = Averager::new(&d);
        for (i, th) in [0.3, 1.1, 2.0, 4.4, 5.9].iter().enumerate() {
            let p = CospherePoint::from_coords(0.1 * i as f64, 0.77, *th);
            let exact = a.integral(&p, 3.7, Quadrature::Exact);
            let e1 = (a.integral(&p, 3.7, Quadrature::Midpoint { h: 2e-3 }) - exact).abs();
            let e2 = (a.integral(&p, 3.7, Quadrature::Midpoint { h: 1e-3 }) - exact).abs();
            assert!(e1 < 1e-4);
            assert!(e2 <= 0.3 * e1 + 1e-11, "{e1} {e2}");
        }
    }

    #[test]
    fn short_time_two_strip_infimum_is_zero() {
        let d = two_strip();
        assert_eq!(l_of_t(&d, 0.05, &small()).unwrap(), 0.0);
        let p = CospherePoint::from_coords(0.0, 0.0, 0.0);
        assert_eq!(time_average(&d, &p, 0.05, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn two_strip_long_time_average_positive_and_below_sup() {
        let d = two_strip();
        let est = l_infinity_estimate(&d, 8.0, &small()).unwrap();
        assert!(est.sup > 0.0);
        assert!(est.values.iter().all(|v| *v <= est.sup && *v >= 0.0));
        let chi = strip_cutoff(0, 0.5, 0.1).unwrap();
        let one_period = simpson(&|s| chi.eval_coord(s).powi(2), 0.0, 1.0, 20_000);
        // the horizontal periodic geodesic caps the infimum
        assert!(est.sup <= one_period + 1e-9);
        // L(t) approaches its limit like 1/t
        assert!(est.sup > 0.8 * one_period, "{} vs {one_period}", est.sup);
    }

    #[test]
    fn agcc_examples() {
        let c = DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, 0.6).unwrap();
        let v = agcc_check(&c, 0.5, 5.0, 1e-3, &small()).unwrap();
        assert!(v.satisfied);
        assert_eq!(v.t0, Some(0.0));

        let eps = 0.1;
        let v = agcc_check(&two_strip(), 0.5, 5.0, 1e-3, &small()).unwrap();
        assert!(v.satisfied);
        let bound = (1.0 / (FRAC_PI_4 + eps).cos()).max(1.0 / (FRAC_PI_4 - eps).sin()) + 0.2;
        assert!(v.t0.unwrap() <= bound, "T0 = {:?}", v.t0);

        let single = DampingDescriptor::build_example(Variant::Multiplicative, 0.1, 0.1, 0.0).unwrap();
        let v = agcc_check(&single, 0.5, 5.0, 1e-3, &small()).unwrap();
        assert!(!v.satisfied);
        let w = v.witness.unwrap();
        assert_eq!(w.theta, FRAC_PI_2);
        assert_eq!(w.base.x1, 0.0);
        assert_eq!(v.witness_integral, Some(0.0));
    }

    #[test]
    fn multiplicative_agcc_matches_classical_gcc() {
        // classical sampler: does the straight line meet {chi^2 >= c}?
        let single = DampingDescriptor::build_example(Variant::Multiplicative, 0.1, 0.1, 0.0).unwrap();
        let s = small();
        let chi = &single.factors[0].inner;
        let mut classical = true;
        for th in theta_samples(s.n_theta) {
            for k in 0..s.n_x * s.n_x {
                let x1 = (k / s.n_x) as f64 / s.n_x as f64;
                let hit = (0..=5000).any(|i| {
                    let y = x1 + i as f64 * 1e-3 * th.cos();
                    chi.eval_coord(y).powi(2) >= 0.5
                });
                classical &= hit;
            }
        }
        let v = agcc_check(&single, 0.5, 5.0, 1e-3, &s).unwrap();
        assert_eq!(v.satisfied, classical);
        // w does not depend on the direction
        let a = Averager::new(&single);
        for th in [0.0, 1.0, 2.0, 3.0] {
            let p = CospherePoint::from_coords(0.46, 0.2, th);
            assert_eq!(a.w(&p), a.w(&CospherePoint::from_coords(0.46, 0.2, 0.0)));
        }
    }

    #[test]
    fn superadditivity_on_grid() {
        let d = two_strip();
        let a = Averager::new(&d);
        let s = small();
        let ts: Vec<f64> = (0..6).map(|i| 0.5 + 1.5 * i as f64).collect();
        let tl = |t: f64| t * a.l_of_t(t, &s).unwrap().0;
        for &t in &ts {
            for &r in &ts {
                assert!(tl(t + r) >= tl(t) + tl(r) - 1e-3, "t = {t}, r = {r}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn g_plus_cocycle(x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, th in 0.0..TAU, s in 0.0..3.0f64, r in 0.0..3.0f64) {
            let d = two_strip();
            let p = CospherePoint::from_coords(x1, x2, th);
            let whole = g_plus(&d, &p, s + r, Quadrature::Exact).unwrap();
            let split = g_plus(&d, &geodesic_flow(&p, s), r, Quadrature::Exact).unwrap()
                * g_plus(&d, &p, s, Quadrature::Exact).unwrap();
            prop_assert!((whole - split).abs() <= 1e-6 * whole);
        }

        #[test]
        fn g_plus_nonincreasing(x1 in 0.0..1.0f64, th in 0.0..TAU, s in 0.0..4.0f64, ds in 0.0..1.0f64) {
            let d = two_strip();
            let p = CospherePoint::from_coords(x1, 0.3, th);
            let a = g_plus(&d, &p, s, Quadrature::Exact).unwrap();
            let b = g_plus(&d, &p, s + ds, Quadrature::Exact).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-12));
            prop_assert!(b > 0.0 && a <= 1.0);
        }

        #[test]
        fn averages_nonnegative(x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, th in 0.0..TAU, t in 0.01..5.0f64) {
            let d = DampingDescriptor::build_example(Variant::ThreeStrip, 0.1, 0.1, 0.0).unwrap();
            let p = CospherePoint::from_coords(x1, x2, th);
            prop_assert!(Averager::new(&d).time_average(&p, t, Quadrature::Exact).unwrap() >= -1e-15);
        }
    }
}
