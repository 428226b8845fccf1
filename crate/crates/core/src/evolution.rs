//! Time stepping for `d_t^2 u - Delta u + 2 W d_t u = 0`, energy traces,
//! the dissipation identity, and decay-rate fits.

use crate::error::{AdwError, Result};
use crate::quantization::{ComplexField, DampingOperator, Grid};
use crate::symbols::DampingDescriptor;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

/// `(u, d_t u)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: ComplexField,
    pub ut: ComplexField,
}

impl FieldState {
    pub fn zeros(grid: &Grid) -> Self {
        Self { u: ComplexField::zeros(grid), ut: ComplexField::zeros(grid) }
    }

    pub fn combine(&self, a: C64, other: &FieldState, b: C64) -> FieldState {
        FieldState { u: &self.u.scale(a) + &other.u.scale(b), ut: &self.ut.scale(a) + &other.ut.scale(b) }
    }

    /// Largest pointwise difference over both components.
    pub fn max_diff(&self, other: &FieldState) -> f64 {
        (&self.u - &other.u).max_abs().max((&self.ut - &other.ut).max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.ut.max_abs())
    }
}

/// `E = 1/2 (||grad u||^2 + ||d_t u||^2)` via Parseval.
pub fn energy(grid: &Grid, state: &FieldState) -> Result<f64> {
    state.u.check_grid(grid)?;
    state.ut.check_grid(grid)?;
    let u = state.u.coefficients(grid);
    let v = state.ut.coefficients(grid);
    Ok(spectral_energy(grid, &u, &v))
}

fn spectral_energy(grid: &Grid, u: &[C64], v: &[C64]) -> f64 {
    let lap = grid.laplacian_symbol();
    let grad: f64 = u.iter().zip(&lap).map(|(z, l)| -l * z.norm_sqr()).sum();
    let kin: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    0.5 * (grad + kin)
}

/// Energies at recorded times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub dt: f64,
    pub scheme: String,
    /// `<W d_t u, d_t u>` at the recorded times, when tracked.
    pub dissipation: Option<Vec<f64>>,
}

/// Strang splitting: exact free flight for `dt/2`, `d_t u <- exp(-2 dt W) d_t u`,
/// free flight for `dt/2`.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    op: DampingOperator,
    dt: f64,
    // half-step free propagator per mode: (cos, sin / omega, -omega sin)
    half: Vec<(f64, f64, f64)>,
    damping: Damping,
}

#[derive(Debug, Clone)]
enum Damping {
    None,
    Diagonal(Vec<f64>),
    General,
}

impl Stepper {
    pub fn new(desc: &DampingDescriptor, grid: &Grid, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(AdwError::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        let op = DampingOperator::new(desc, grid);
        let h = 0.5 * dt;
        let half = grid
            .laplacian_symbol()
            .iter()
            .map(|l| {
                let w = (-l).sqrt();
                if w == 0.0 {
                    (1.0, h, 0.0)
                } else {
                    let (s, c) = (w * h).sin_cos();
                    (c, s / w, -w * s)
                }
            })
            .collect();
        let damping = if op.is_zero() {
            Damping::None
        } else if let Some(d) = op.diagonal_symbol() {
            Damping::Diagonal(d.iter().map(|d| (-2.0 * dt * d).exp()).collect())
        } else {
            Damping::General
        };
        Ok(Self { grid: grid.clone(), op, dt, half, damping })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn operator(&self) -> &DampingOperator {
        &self.op
    }

    fn free_half(&self, u: &mut [C64], v: &mut [C64]) {
        for ((a, b), &(c, s_w, ws)) in u.iter_mut().zip(v.iter_mut()).zip(&self.half) {
            let (u0, v0) = (*a, *b);
            *a = u0 * c + v0 * s_w;
            *b = u0 * ws + v0 * c;
        }
    }

    fn damp(&self, v: &mut [C64]) {
        match &self.damping {
            Damping::None => {}
            Damping::Diagonal(e) => v.iter_mut().zip(e).for_each(|(z, e)| *z *= *e),
            Damping::General => {
                self.grid.inverse(v);
                self.op.exp_neg_values(v, 2.0 * self.dt);
                self.grid.forward(v);
            }
        }
    }

    /// One step on Fourier coefficients.
    pub fn step_coefficients(&self, u: &mut [C64], v: &mut [C64]) {
        self.free_half(u, v);
        self.damp(v);
        self.free_half(u, v);
    }

    /// One step on a grid state.
    pub fn step(&self, state: &FieldState) -> Result<FieldState> {
        let mut u = state.u.coefficients(&self.grid);
        let mut v = state.ut.coefficients(&self.grid);
        self.step_coefficients(&mut u, &mut v);
        Ok(FieldState {
            u: ComplexField::from_coefficients(&self.grid, u)?,
            ut: ComplexField::from_coefficients(&self.grid, v)?,
        })
    }
}

/// One Strang step.
pub fn step(desc: &DampingDescriptor, grid: &Grid, state: &FieldState, dt: f64) -> Result<FieldState> {
    Stepper::new(desc, grid, dt)?.step(state)
}

/// What [`evolve`] records besides energies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Recording {
    pub record_every: usize,
    pub snapshots: bool,
    pub dissipation: bool,
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub trace: EnergyTrace,
    pub snapshots: Vec<FieldState>,
    pub final_state: FieldState,
}

/// Integrate to time `t_end` (rounded to a whole number of steps).
pub fn evolve(
    desc: &DampingDescriptor,
    grid: &Grid,
    initial: &FieldState,
    t_end: f64,
    dt: f64,
    recording: Recording,
) -> Result<Evolution> {
    let stepper = Stepper::new(desc, grid, dt)?;
    evolve_with(&stepper, initial, t_end, recording)
}

pub fn evolve_with(stepper: &Stepper, initial: &FieldState, t_end: f64, recording: Recording) -> Result<Evolution> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(AdwError::InvalidParameter(format!("T = {t_end} must be positive")));
    }
    let grid = stepper.grid();
    initial.u.check_grid(grid)?;
    initial.ut.check_grid(grid)?;
    let dt = stepper.dt();
    let steps = (t_end / dt).round().max(1.0) as usize;
    let every = recording.record_every.max(1);
    let mut u = initial.u.coefficients(grid);
    let mut v = initial.ut.coefficients(grid);

    let mut times = Vec::new();
    let mut energies = Vec::new();
    let mut dissipation = recording.dissipation.then(Vec::new);
    let mut snapshots = Vec::new();
    let mut record = |k: usize, u: &[C64], v: &[C64]| -> Result<()> {
        let t = k as f64 * dt;
        let e = spectral_energy(grid, u, v);
        if !e.is_finite() {
            return Err(AdwError::NonFinite { time: t, what: "energy".into() });
        }
        times.push(t);
        energies.push(e);
        if recording.snapshots || dissipation.is_some() {
            let ut = ComplexField::from_coefficients(grid, v.to_vec())?;
            if let Some(d) = dissipation.as_mut() {
                d.push(stepper.operator().quadratic_form(&ut)?);
            }
            if recording.snapshots {
                snapshots.push(FieldState { u: ComplexField::from_coefficients(grid, u.to_vec())?, ut });
            }
        }
        Ok(())
    };
    record(0, &u, &v)?;
    for k in 1..=steps {
        stepper.step_coefficients(&mut u, &mut v);
        if k % every == 0 || k == steps {
            record(k, &u, &v)?;
        }
    }
    let final_state =
        FieldState { u: ComplexField::from_coefficients(grid, u)?, ut: ComplexField::from_coefficients(grid, v)? };
    Ok(Evolution {
        trace: EnergyTrace {
            times,
            energies,
            dt,
            scheme: "strang: exact free flight / taylor exp(-2 dt W)".into(),
            dissipation,
        },
        snapshots,
        final_state,
    })
}

/// `max_i |dE/dt(t_i) + 2 <W d_t u, d_t u>(t_i)| / E(0)` with central differences
/// over uniformly recorded times.
pub fn dissipation_residual(trace: &EnergyTrace) -> Result<f64> {
    let q = trace
        .dissipation
        .as_ref()
        .ok_or_else(|| AdwError::InvalidParameter("trace was recorded without dissipation".into()))?;
    let n = trace.times.len();
    if n < 3 {
        return Err(AdwError::InvalidParameter("need at least three recorded times".into()));
    }
    let e0 = trace.energies[0];
    if e0 <= 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let h = trace.times[i + 1] - trace.times[i - 1];
        let de = (trace.energies[i + 1] - trace.energies[i - 1]) / h;
        worst = worst.max((de + 2.0 * q[i]).abs() / e0);
    }
    Ok(worst)
}

/// Exponential fit `E ~ C exp(-rate t)` on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub window: (f64, f64),
    /// RMS of the residuals of `ln E`.
    pub residual: f64,
    pub samples: usize,
}

pub fn fit_decay(trace: &EnergyTrace, window: (f64, f64)) -> Result<DecayFit> {
    let (a, b) = window;
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.energies)
        .filter(|(t, _)| **t >= a - 1e-12 && **t <= b + 1e-12)
        .map(|(t, e)| (*t, *e))
        .collect();
    if pts.len() < 10 {
        return Err(AdwError::Fit(format!("window [{a}, {b}] holds {} samples, need >= 10", pts.len())));
    }
    if let Some((t, e)) = pts.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(AdwError::Fit(format!("nonpositive energy {e} at t = {t}")));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(DecayFit { rate: -slope, window, residual, samples: xs.len() })
}

/// Ordinary least-squares line `y = slope x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Random data supported on the modes `0 < |n|_inf <= band` (plus `n = 0` when
/// `include_constant`), uniform coefficients in the unit square.
pub fn random_state(grid: &Grid, band: usize, seed: u64, include_constant: bool) -> Result<FieldState> {
    if 2 * band >= grid.n() {
        return Err(AdwError::InvalidParameter(format!("band {band} does not fit grid {}", grid.n())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![C64::new(0.0, 0.0); grid.len()];
    let mut v = vec![C64::new(0.0, 0.0); grid.len()];
    let b = band as i64;
    for k1 in -b..=b {
        for k2 in -b..=b {
            let idx = grid.mode_index(k1, k2);
            let mut draw = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (a, c) = (draw(), draw());
            if k1 == 0 && k2 == 0 && !include_constant {
                continue;
            }
            let w = 2.0 * PI * ((k1 * k1 + k2 * k2) as f64).sqrt();
            u[idx] = a / w.max(1.0);
            v[idx] = c;
        }
    }
    Ok(FieldState { u: ComplexField::from_coefficients(grid, u)?, ut: ComplexField::from_coefficients(grid, v)? })
}

/// State with the given stacked Fourier coefficients on the modes `modes`.
pub fn state_from_modes(grid: &Grid, modes: &[(i64, i64)], stacked: &[C64]) -> Result<FieldState> {
    let m = modes.len();
    if stacked.len() != 2 * m {
        return Err(AdwError::GridMismatch { expected: 2 * m, got: stacked.len() });
    }
    let mut u = vec![C64::new(0.0, 0.0); grid.len()];
    let mut v = vec![C64::new(0.0, 0.0); grid.len()];
    for (k, &(a, b)) in modes.iter().enumerate() {
        u[grid.mode_index(a, b)] = stacked[k];
        v[grid.mode_index(a, b)] = stacked[m + k];
    }
    Ok(FieldState { u: ComplexField::from_coefficients(grid, u)?, ut: ComplexField::from_coefficients(grid, v)? })
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"ADWF";

/// Binary snapshot: 16-byte header (`ADWF`, u32 n, u32 record index,
/// u32 reserved), then per node `u.re, u.im, ut.re, ut.im` as little-endian f32,
/// nodes in row-major order.
pub fn write_snapshot<W: Write>(mut w: W, grid: &Grid, state: &FieldState, record: u32) -> Result<()> {
    state.u.check_grid(grid)?;
    state.ut.check_grid(grid)?;
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    w.write_all(&record.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * grid.len());
    for (a, b) in state.u.values().iter().zip(state.ut.values()) {
        for x in [a.re, a.im, b.re, b.im] {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Inverse of [`write_snapshot`]; returns the state and the record index.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(Grid, FieldState, u32)> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != SNAPSHOT_MAGIC {
        return Err(AdwError::InvalidParameter("bad snapshot magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes"));
    let n = word(4) as usize;
    let record = word(8);
    let grid = Grid::new(n)?;
    let mut body = vec![0u8; 16 * n * n];
    r.read_exact(&mut body)?;
    let f = |k: usize| f32::from_le_bytes(body[4 * k..4 * k + 4].try_into().expect("4 bytes")) as f64;
    let u = (0..n * n).map(|i| C64::new(f(4 * i), f(4 * i + 1))).collect();
    let ut = (0..n * n).map(|i| C64::new(f(4 * i + 2), f(4 * i + 3))).collect();
    let state = FieldState { u: ComplexField::from_values(&grid, u)?, ut: ComplexField::from_values(&grid, ut)? };
    Ok((grid, state, record))
}
