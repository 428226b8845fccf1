//! Damping descriptors: smooth cutoffs, the torus example families, and the
//! principal symbol `w(x, theta) = sum_j chi_j(x)^2 psi_j(theta)^2`.
//!
//! A descriptor represents `W = sum_j B_j^* B_j` with
//! `B_j = outer_j * Op(m_j) * inner_j`, where the fiber multiplier
//! `m_j(n) = psi_j(arg n) * beta(|n|)` acts on lattice frequencies.

use crate::error::{AdwError, Result};
use crate::geometry::{wrap_angle, TorusPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::sync::OnceLock;

#[inline]
fn ramp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

#[inline]
fn ramp_prime(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() / (s * s)
    }
}

/// C-infinity step: 0 for `s <= 0`, 1 for `s >= 1`.
#[inline]
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = ramp(s);
    a / (a + ramp(1.0 - s))
}

/// Derivative of [`smooth_step`].
#[inline]
pub fn smooth_step_prime(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let a = ramp(s);
    let b = ramp(1.0 - s);
    let d = a + b;
    (ramp_prime(s) * b + a * ramp_prime(1.0 - s)) / (d * d)
}

/// Upper bound for `|smooth_step'|`.
fn smooth_step_slope_bound() -> f64 {
    static BOUND: OnceLock<f64> = OnceLock::new();
    *BOUND.get_or_init(|| {
        let n = 20_000;
        let m = (1..n)
            .map(|i| smooth_step_prime(i as f64 / n as f64))
            .fold(0.0f64, f64::max);
        m * 1.01
    })
}

/// Smooth compactly supported profile: 0 outside `support`, 1 on `plateau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BumpProfileRepr", into = "BumpProfileRepr")]
pub struct BumpProfile {
    support: (f64, f64),
    plateau: (f64, f64),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpProfileRepr {
    support: [f64; 2],
    plateau: [f64; 2],
}

impl TryFrom<BumpProfileRepr> for BumpProfile {
    type Error = AdwError;
    fn try_from(r: BumpProfileRepr) -> Result<Self> {
        BumpProfile::new(r.support, r.plateau)
    }
}

impl From<BumpProfile> for BumpProfileRepr {
    fn from(b: BumpProfile) -> Self {
        Self { support: [b.support.0, b.support.1], plateau: [b.plateau.0, b.plateau.1] }
    }
}

impl BumpProfile {
    /// Requires `a < a' <= b' < b`, all finite.
    pub fn new(support: [f64; 2], plateau: [f64; 2]) -> Result<Self> {
        let [a, b] = support;
        let [pa, pb] = plateau;
        if ![a, b, pa, pb].iter().all(|v| v.is_finite()) {
            return Err(AdwError::Profile("non-finite interval endpoint".into()));
        }
        if !(a < pa && pa <= pb && pb < b) {
            return Err(AdwError::Profile(format!(
                "plateau [{pa}, {pb}] must lie strictly inside support [{a}, {b}]"
            )));
        }
        Ok(Self { support: (a, b), plateau: (pa, pb) })
    }

    /// Profile centred at `center`: plateau half-width `inner`, support half-width `outer`.
    pub fn centered(center: f64, inner: f64, outer: f64) -> Result<Self> {
        Self::new([center - outer, center + outer], [center - inner, center + inner])
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn plateau(&self) -> (f64, f64) {
        self.plateau
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.support;
        let (pa, pb) = self.plateau;
        if t <= a || t >= b {
            0.0
        } else if t < pa {
            smooth_step((t - a) / (pa - a))
        } else if t <= pb {
            1.0
        } else {
            smooth_step((b - t) / (b - pb))
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (a, b) = self.support;
        let (pa, pb) = self.plateau;
        if t <= a || t >= b || (pa..=pb).contains(&t) {
            0.0
        } else if t < pa {
            smooth_step_prime((t - a) / (pa - a)) / (pa - a)
        } else {
            -smooth_step_prime((b - t) / (b - pb)) / (b - pb)
        }
    }

    /// Upper bound for `|d/dt eval|`.
    pub fn slope_bound(&self) -> f64 {
        let w = (self.plateau.0 - self.support.0).min(self.support.1 - self.plateau.1);
        smooth_step_slope_bound() / w
    }

    /// Evaluate as a periodic function (max over neighbouring images).
    fn eval_periodic(&self, t: f64, period: f64) -> f64 {
        let t = t - period * ((t - self.support.0) / period).floor();
        self.eval(t).max(self.eval(t - period)).max(self.eval(t + period))
    }
}

/// Spatial cutoff on the torus: constant, or a strip depending on one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialCutoff {
    Constant(f64),
    Strip { axis: usize, profile: BumpProfile },
}

impl SpatialCutoff {
    pub fn eval(&self, x: &TorusPoint) -> f64 {
        match self {
            SpatialCutoff::Constant(v) => *v,
            SpatialCutoff::Strip { axis, profile } => profile.eval_periodic(x.coord(*axis), 1.0),
        }
    }

    /// Value as a function of the strip coordinate (or the constant).
    pub fn eval_coord(&self, t: f64) -> f64 {
        match self {
            SpatialCutoff::Constant(v) => *v,
            SpatialCutoff::Strip { profile, .. } => profile.eval_periodic(t, 1.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SpatialCutoff::Constant(_))
    }

    pub fn sup(&self) -> f64 {
        match self {
            SpatialCutoff::Constant(v) => v.abs(),
            SpatialCutoff::Strip { .. } => 1.0,
        }
    }

    pub fn slope_bound(&self) -> f64 {
        match self {
            SpatialCutoff::Constant(_) => 0.0,
            SpatialCutoff::Strip { profile, .. } => profile.slope_bound(),
        }
    }
}

/// Angular cutoff on the circle: union of arcs, each a bump profile in angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularCutoff {
    pub arcs: Vec<BumpProfile>,
}

impl AngularCutoff {
    /// Arcs centred at `centers` with half-width `half_width`: equal to one on
    /// `(c - half_width - margin, c + half_width + margin)` and supported in
    /// `(c - half_width - 2 margin, c + half_width + 2 margin)`.
    pub fn cones(centers: &[f64], half_width: f64, margin: f64) -> Result<Self> {
        let arcs = centers
            .iter()
            .map(|&c| BumpProfile::centered(c, half_width + margin, half_width + 2.0 * margin))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { arcs })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let t = wrap_angle(theta);
        self.arcs.iter().map(|a| a.eval_periodic(t, TAU)).fold(0.0, f64::max)
    }
}

/// Low-frequency cutoff `beta(r)`: 0 for `r <= r0`, 1 for `r >= r1`, on lattice radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoff {
    pub r0: f64,
    pub r1: f64,
}

impl Default for RadialCutoff {
    fn default() -> Self {
        Self { r0: 1.0, r1: 2.0 }
    }
}

impl RadialCutoff {
    pub fn eval(&self, r: f64) -> f64 {
        smooth_step((r - self.r0) / (self.r1 - self.r0))
    }
}

/// Fiber multiplier on lattice frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberMultiplier {
    /// The same value on every mode, including `n = 0`.
    Constant(f64),
    /// `psi(arg n) * beta(|n|)`.
    Cone { angular: AngularCutoff, radial: RadialCutoff },
}

impl FiberMultiplier {
    /// Value on the lattice frequency `n`.
    pub fn lattice(&self, n1: i64, n2: i64) -> f64 {
        match self {
            FiberMultiplier::Constant(v) => *v,
            FiberMultiplier::Cone { angular, radial } => {
                if n1 == 0 && n2 == 0 {
                    return 0.0;
                }
                let (x, y) = (n1 as f64, n2 as f64);
                angular.eval(y.atan2(x)) * radial.eval(x.hypot(y))
            }
        }
    }

    /// Homogeneous (high-frequency) value in direction `theta`.
    pub fn principal(&self, theta: f64) -> f64 {
        match self {
            FiberMultiplier::Constant(v) => *v,
            FiberMultiplier::Cone { angular, .. } => angular.eval(theta),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            FiberMultiplier::Constant(v) => v.abs(),
            FiberMultiplier::Cone { .. } => 1.0,
        }
    }
}

/// One separable factor `B = outer * Op(m) * inner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingFactor {
    pub inner: SpatialCutoff,
    pub outer: SpatialCutoff,
    pub multiplier: FiberMultiplier,
}

impl DampingFactor {
    /// Checks that `outer == 1` on a neighbourhood of the support of `inner`.
    pub fn validate(&self) -> Result<()> {
        match (&self.inner, &self.outer) {
            (SpatialCutoff::Constant(v), _) if *v == 0.0 => Ok(()),
            (SpatialCutoff::Constant(_), SpatialCutoff::Constant(o)) if *o == 1.0 => Ok(()),
            (SpatialCutoff::Strip { axis: ai, profile: pi }, SpatialCutoff::Strip { axis: ao, profile: po })
                if ai == ao =>
            {
                let (a, b) = pi.support();
                let (pa, pb) = po.plateau();
                if pa < a && b < pb {
                    Ok(())
                } else {
                    Err(AdwError::Profile(format!(
                        "outer plateau [{pa}, {pb}] must contain a neighbourhood of inner support [{a}, {b}]"
                    )))
                }
            }
            (SpatialCutoff::Strip { .. }, SpatialCutoff::Constant(o)) if *o == 1.0 => Ok(()),
            _ => Err(AdwError::Profile("outer cutoff is not identically one on the inner support".into())),
        }
    }

    /// Principal symbol contribution `chi(x)^2 psi(theta)^2`.
    pub fn symbol(&self, x: &TorusPoint, theta: f64) -> f64 {
        let chi = self.inner.eval(x);
        let psi = self.multiplier.principal(theta);
        chi * chi * psi * psi
    }

    /// Fourier-diagonal when both cutoffs are constant.
    pub fn is_fourier_diagonal(&self) -> bool {
        self.inner.is_constant() && self.outer.is_constant()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Constant,
    Multiplicative,
    TwoStrip,
    ThreeStrip,
    Custom,
}

impl std::str::FromStr for Variant {
    type Err = AdwError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Variant::Constant),
            "multiplicative" => Ok(Variant::Multiplicative),
            "two_strip" => Ok(Variant::TwoStrip),
            "three_strip" => Ok(Variant::ThreeStrip),
            "custom" => Ok(Variant::Custom),
            other => Err(AdwError::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

/// `W = sum_j B_j^* B_j` as a list of separable factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingDescriptor {
    pub variant: Variant,
    pub factors: Vec<DampingFactor>,
    pub delta: f64,
    pub epsilon: f64,
    pub c: f64,
}

/// Vertical (`axis = 0`) or horizontal (`axis = 1`) strip of half-width `delta`
/// around `center`, with plateau half-width `delta / 2`.
pub fn strip_cutoff(axis: usize, center: f64, delta: f64) -> Result<SpatialCutoff> {
    Ok(SpatialCutoff::Strip { axis, profile: BumpProfile::centered(center, 0.5 * delta, delta)? })
}

/// Companion of [`strip_cutoff`] equal to one on a neighbourhood of its support.
pub fn strip_outer_cutoff(axis: usize, center: f64, delta: f64) -> Result<SpatialCutoff> {
    Ok(SpatialCutoff::Strip { axis, profile: BumpProfile::centered(center, 1.25 * delta, 1.75 * delta)? })
}

fn strip_factor(axis: usize, center: f64, delta: f64, angular: AngularCutoff) -> Result<DampingFactor> {
    Ok(DampingFactor {
        inner: strip_cutoff(axis, center, delta)?,
        outer: strip_outer_cutoff(axis, center, delta)?,
        multiplier: FiberMultiplier::Cone { angular, radial: RadialCutoff::default() },
    })
}

impl DampingDescriptor {
    pub fn new(variant: Variant, factors: Vec<DampingFactor>, delta: f64, epsilon: f64, c: f64) -> Result<Self> {
        if factors.is_empty() {
            return Err(AdwError::InvalidParameter("factor list must be non-empty".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self { variant, factors, delta, epsilon, c })
    }

    /// One of the named torus examples.
    pub fn build_example(variant: Variant, delta: f64, epsilon: f64, c: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.25) {
            return Err(AdwError::InvalidParameter(format!("delta = {delta} outside (0, 1/4)")));
        }
        if !(epsilon > 0.0 && epsilon < PI / 8.0) {
            return Err(AdwError::InvalidParameter(format!("epsilon = {epsilon} outside (0, pi/8)")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(AdwError::InvalidParameter(format!("c = {c} must be >= 0")));
        }
        let factors = match variant {
            Variant::Constant => vec![DampingFactor {
                inner: SpatialCutoff::Constant(1.0),
                outer: SpatialCutoff::Constant(1.0),
                multiplier: FiberMultiplier::Constant(c.sqrt()),
            }],
            Variant::Multiplicative => vec![DampingFactor {
                inner: strip_cutoff(0, 0.5, delta)?,
                outer: strip_outer_cutoff(0, 0.5, delta)?,
                multiplier: FiberMultiplier::Constant(1.0),
            }],
            Variant::TwoStrip => vec![
                strip_factor(0, 0.5, delta, AngularCutoff::cones(&[0.0, PI], FRAC_PI_4, epsilon)?)?,
                strip_factor(1, 0.5, delta, AngularCutoff::cones(&[FRAC_PI_2, 3.0 * FRAC_PI_2], FRAC_PI_4, epsilon)?)?,
            ],
            Variant::ThreeStrip => vec![
                strip_factor(0, 0.5, delta, AngularCutoff::cones(&[0.0, PI], FRAC_PI_4, epsilon)?)?,
                strip_factor(1, 0.25, delta, AngularCutoff::cones(&[FRAC_PI_2], FRAC_PI_4, epsilon)?)?,
                strip_factor(1, 0.75, delta, AngularCutoff::cones(&[3.0 * FRAC_PI_2], FRAC_PI_4, epsilon)?)?,
            ],
            Variant::Custom => {
                return Err(AdwError::InvalidParameter("custom descriptors are built from a factor list".into()))
            }
        };
        Self::new(variant, factors, delta, epsilon, c)
    }

    /// Multiplicative damping `W = chi^2`.
    pub fn multiplicative(chi: SpatialCutoff) -> Result<Self> {
        let outer = match &chi {
            SpatialCutoff::Constant(_) => SpatialCutoff::Constant(1.0),
            SpatialCutoff::Strip { axis, profile } => {
                let (a, b) = profile.support();
                let pad = 0.25 * (b - a);
                SpatialCutoff::Strip {
                    axis: *axis,
                    profile: BumpProfile::new([a - 2.0 * pad, b + 2.0 * pad], [a - pad, b + pad])?,
                }
            }
        };
        Self::new(
            Variant::Multiplicative,
            vec![DampingFactor { inner: chi, outer, multiplier: FiberMultiplier::Constant(1.0) }],
            0.0,
            0.0,
            0.0,
        )
    }

    /// `W = 0`.
    pub fn zero() -> Self {
        Self::build_example(Variant::Constant, 0.1, 0.1, 0.0).expect("valid constant descriptor")
    }

    /// `true` when every factor vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.factors.iter().all(|f| {
            f.multiplier.sup() == 0.0
                || matches!(f.inner, SpatialCutoff::Constant(v) if v == 0.0)
                || matches!(f.outer, SpatialCutoff::Constant(v) if v == 0.0)
        })
    }

    pub fn is_fourier_diagonal(&self) -> bool {
        self.factors.iter().all(DampingFactor::is_fourier_diagonal)
    }

    /// Principal symbol `w(x, theta)`.
    pub fn eval_w(&self, x: &TorusPoint, theta: f64) -> f64 {
        self.factors.iter().map(|f| f.symbol(x, theta)).sum()
    }

    /// Upper bound for the operator norm of `W` (and for `w`).
    pub fn norm_bound(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let s = f.inner.sup() * f.outer.sup() * f.multiplier.sup();
                s * s
            })
            .sum()
    }

    /// Lipschitz bound of `s -> w(geodesic_flow(p, s))` (unit speed).
    pub fn flow_lipschitz_bound(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let psi = f.multiplier.sup();
                2.0 * f.inner.sup() * f.inner.slope_bound() * psi * psi
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn profile() -> BumpProfile {
        BumpProfile::new([0.4, 0.6], [0.45, 0.55]).unwrap()
    }

    #[test]
    fn bump_values() {
        let b = profile();
        assert_eq!(b.eval(0.3), 0.0);
        assert_eq!(b.eval(0.5), 1.0);
        // midpoint of the ramp is exactly 1/2 by symmetry of the construction
        assert_abs_diff_eq!(b.eval(0.425), 0.5, epsilon = 1e-14);
        // regression constant: e^{-5} / (e^{-5} + e^{-1.25})
        let expect = (-5.0f64).exp() / ((-5.0f64).exp() + (-1.25f64).exp());
        assert_abs_diff_eq!(b.eval(0.41), expect, epsilon = 1e-15);
        assert_abs_diff_eq!(b.eval(0.41), 0.022_977_369_910_025_615, epsilon = 1e-12);
    }

    #[test]
    fn bump_derivative_matches_finite_difference() {
        let b = profile();
        for &t in &[0.41, 0.425, 0.44, 0.56, 0.58] {
            let h = 1e-6;
            let fd = (b.eval(t + h) - b.eval(t - h)) / (2.0 * h);
            assert_abs_diff_eq!(b.derivative(t), fd, epsilon = 1e-5);
            assert!(b.derivative(t).abs() <= b.slope_bound());
        }
    }

    #[test]
    fn malformed_profiles_rejected() {
        assert!(BumpProfile::new([0.4, 0.6], [0.3, 0.55]).is_err());
        assert!(BumpProfile::new([0.4, 0.6], [0.55, 0.45]).is_err());
        assert!(BumpProfile::new([0.4, 0.6], [0.4, 0.6]).is_err());
    }

    #[test]
    fn example_parameter_ranges() {
        assert!(DampingDescriptor::build_example(Variant::TwoStrip, 0.3, 0.1, 0.0).is_err());
        assert!(DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.5, 0.0).is_err());
        assert!(DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, -1.0).is_err());
        assert!(DampingDescriptor::build_example(Variant::Custom, 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn two_strip_structure() {
        let d = DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.1, 0.0).unwrap();
        assert_eq!(d.factors.len(), 2);
        match &d.factors[0].inner {
            SpatialCutoff::Strip { axis, profile } => {
                assert_eq!(*axis, 0);
                let (a, b) = profile.support();
                assert_abs_diff_eq!(a, 0.4, epsilon = 1e-15);
                assert_abs_diff_eq!(b, 0.6, epsilon = 1e-15);
            }
            other => panic!("unexpected cutoff {other:?}"),
        }
        assert_eq!(d.eval_w(&TorusPoint::new(0.0, 0.0), 0.3), 0.0);
        assert_abs_diff_eq!(d.eval_w(&TorusPoint::new(0.5, 0.0), 0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_strip_angular_covering() {
        let d = DampingDescriptor::build_example(Variant::TwoStrip, 0.1, 0.1, 0.0).unwrap();
        for i in 0..10_000 {
            let th = TAU * i as f64 / 10_000.0;
            let m = d.factors.iter().map(|f| f.multiplier.principal(th)).fold(0.0, f64::max);
            assert_eq!(m, 1.0, "theta = {th}");
        }
    }

    #[test]
    fn three_strip_covering_and_supports() {
        let eps = 0.1;
        let d = DampingDescriptor::build_example(Variant::ThreeStrip, 0.1, eps, 0.0).unwrap();
        assert_eq!(d.factors.len(), 3);
        for i in 0..10_000 {
            let th = TAU * i as f64 / 10_000.0;
            let m = d.factors.iter().map(|f| f.multiplier.principal(th)).fold(0.0, f64::max);
            assert_eq!(m, 1.0, "theta = {th}");
        }
        // psi_2 supported in (pi/4 - 2 eps, 3 pi/4 + 2 eps); psi_3 in (5pi/4 - 2eps, 7pi/4 + 2eps)
        let psi2 = |t: f64| d.factors[1].multiplier.principal(t);
        let psi3 = |t: f64| d.factors[2].multiplier.principal(t);
        assert_eq!(psi2(FRAC_PI_4 - 2.0 * eps - 1e-9), 0.0);
        assert_eq!(psi2(3.0 * FRAC_PI_4 + 2.0 * eps + 1e-9), 0.0);
        assert_eq!(psi2(3.0 * FRAC_PI_2), 0.0);
        assert_eq!(psi3(5.0 * FRAC_PI_4 - 2.0 * eps - 1e-9), 0.0);
        assert_eq!(psi3(FRAC_PI_2), 0.0);
        // no point has full microsupport: at every x some direction has w = 0
        for &(x1, x2) in &[(0.5, 0.25), (0.5, 0.75), (0.0, 0.0), (0.5, 0.5)] {
            let x = TorusPoint::new(x1, x2);
            let min_w = (0..3600).map(|i| d.eval_w(&x, TAU * i as f64 / 3600.0)).fold(f64::INFINITY, f64::min);
            assert_eq!(min_w, 0.0, "full microsupport at {x:?}");
        }
    }

    #[test]
    fn outer_cutoff_is_one_on_inner_support() {
        for v in [Variant::TwoStrip, Variant::ThreeStrip, Variant::Multiplicative] {
            let d = DampingDescriptor::build_example(v, 0.2, 0.1, 0.0).unwrap();
            for f in &d.factors {
                for i in 0..4096 {
                    let t = i as f64 / 4096.0;
                    let x = TorusPoint::new(t, t);
                    let chi = f.inner.eval(&x);
                    assert_eq!(f.outer.eval(&x) * chi, chi);
                }
            }
        }
    }

    #[test]
    fn constant_variant_symbol() {
        let d = DampingDescriptor::build_example(Variant::Constant, 0.1, 0.1, 0.1).unwrap();
        for i in 0..50 {
            let x = TorusPoint::new(i as f64 * 0.037, i as f64 * 0.011);
            assert_abs_diff_eq!(d.eval_w(&x, i as f64 * 0.3), 0.1, epsilon = 1e-15);
        }
        assert!(DampingDescriptor::zero().is_zero());
        assert!(!d.is_zero());
        assert!(d.is_fourier_diagonal());
    }

    #[test]
    fn symbol_bounds() {
        for v in [Variant::TwoStrip, Variant::ThreeStrip] {
            let d = DampingDescriptor::build_example(v, 0.15, 0.12, 0.0).unwrap();
            for i in 0..2000 {
                let x = TorusPoint::new((i as f64 * 0.618_034).fract(), (i as f64 * 0.414_213).fract());
                let w = d.eval_w(&x, i as f64 * 0.731);
                assert!(w >= 0.0 && w <= d.factors.len() as f64);
            }
        }
    }

    #[test]
    fn beta_cutoff() {
        let b = RadialCutoff::default();
        assert_eq!(b.eval(1.0), 0.0);
        assert_eq!(b.eval(2.0), 1.0);
        assert!(b.eval(2f64.sqrt()) > 0.0 && b.eval(2f64.sqrt()) < 1.0);
        let m = FiberMultiplier::Cone { angular: AngularCutoff::cones(&[0.0], FRAC_PI_4, 0.1).unwrap(), radial: b };
        assert_eq!(m.lattice(0, 0), 0.0);
        assert_eq!(m.lattice(5, 0), 1.0);
        assert_eq!(m.lattice(0, 5), 0.0);
    }

    #[test]
    fn descriptor_serde_round_trip() {
        let d = DampingDescriptor::build_example(Variant::ThreeStrip, 0.1, 0.1, 0.0).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: DampingDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
    }
}
