//! Run configuration: one JSON document with per-module sections.
//!
//! Every section has defaults and rejects unknown keys. `--set`-style
//! overrides are applied on the JSON value before deserialisation.

use crate::averages::{Quadrature, Sampling};
use crate::beams::{BeamSpec, Mat2, RadialBump};
use crate::error::{AdwError, Result};
use crate::geometry::TorusPoint;
use crate::quantization::Grid;
use crate::symbols::{DampingDescriptor, DampingFactor, Variant};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DampingConfig {
    pub variant: Variant,
    pub delta: f64,
    pub epsilon: f64,
    pub c: f64,
    /// Factor list for `variant = "custom"`.
    pub factors: Option<Vec<DampingFactor>>,
}

impl Default for DampingConfig {
    fn default() -> Self {
        Self { variant: Variant::TwoStrip, delta: 0.1, epsilon: 0.1, c: 0.1, factors: None }
    }
}

impl DampingConfig {
    pub fn descriptor(&self) -> Result<DampingDescriptor> {
        match (self.variant, &self.factors) {
            (Variant::Custom, Some(f)) => {
                DampingDescriptor::new(Variant::Custom, f.clone(), self.delta, self.epsilon, self.c)
            }
            (Variant::Custom, None) => Err(AdwError::Config("variant 'custom' needs damping.factors".into())),
            (_, Some(_)) => Err(AdwError::Config("damping.factors is only valid with variant 'custom'".into())),
            (v, None) => DampingDescriptor::build_example(v, self.delta, self.epsilon, self.c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64 }
    }
}

/// Initial data of the `evolve` command.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    #[default]
    Random,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub initial: InitialData,
    pub dt: f64,
    pub t_max: f64,
    /// Record the energy every this many steps.
    pub record_every: usize,
    pub seed: u64,
    /// Random data live on `|n|_inf <= band`.
    pub band: usize,
    /// Fit window; `None` means `[t_max / 3, t_max]`.
    pub window: Option<(f64, f64)>,
    pub snapshots: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { initial: InitialData::Random, dt: 0.05, t_max: 40.0, record_every: 4, seed: 1, band: 6, window: None, snapshots: false }
    }
}

impl EvolutionConfig {
    pub fn fit_window(&self) -> (f64, f64) {
        self.window.unwrap_or((self.t_max / 3.0, self.t_max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n_max: usize,
    pub zero_tol: Option<f64>,
    /// Quadrature grid for assembling the truncated generator (>= 4 n_max).
    pub grid: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { n_max: 12, zero_tol: None, grid: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AveragesConfig {
    pub t_max: f64,
    pub n_x: usize,
    pub n_theta: usize,
    /// Midpoint step; `None` integrates exactly.
    pub quad_step: Option<f64>,
    pub c_floor: f64,
    /// Horizon and time step of the AGCC hitting search.
    pub agcc_t_max: f64,
    pub agcc_h: f64,
}

impl Default for AveragesConfig {
    fn default() -> Self {
        Self { t_max: 16.0, n_x: 64, n_theta: 256, quad_step: None, c_floor: 0.5, agcc_t_max: 8.0, agcc_h: 0.01 }
    }
}

impl AveragesConfig {
    pub fn sampling(&self) -> Result<Sampling> {
        let quadrature = match self.quad_step {
            None => Quadrature::Exact,
            Some(h) => Quadrature::Midpoint { h },
        };
        let s = Sampling { n_x: self.n_x, n_theta: self.n_theta, quadrature };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixParts {
    pub re: [[f64; 2]; 2],
    pub im: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamsConfig {
    pub x0: [f64; 2],
    pub theta0: f64,
    #[serde(rename = "A0")]
    pub a0: MatrixParts,
    pub plateau: f64,
    pub support: f64,
    pub k_list: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub dt: f64,
    /// Residuals are sampled at multiples of this step in `[0, T]`.
    pub residual_step: f64,
    pub grid: usize,
    /// `A0` of the coherent states used by the scaling experiment.
    #[serde(rename = "A_coherent")]
    pub a_coherent: MatrixParts,
}

impl Default for BeamsConfig {
    fn default() -> Self {
        Self {
            x0: [0.0, 0.5],
            theta0: 0.0,
            a0: MatrixParts { re: [[0.0; 2]; 2], im: [[1.0, 0.0], [0.0, 1.0]] },
            plateau: 0.12,
            support: 0.24,
            k_list: vec![32.0, 64.0, 128.0, 256.0],
            t: 2.0,
            dt: 0.01,
            residual_step: 0.1,
            grid: 256,
            a_coherent: MatrixParts { re: [[0.0; 2]; 2], im: [[10.0, 0.0], [0.0, 10.0]] },
        }
    }
}

impl BeamsConfig {
    fn build(&self, a: &MatrixParts, k: f64) -> Result<BeamSpec> {
        BeamSpec::new(
            TorusPoint::new(self.x0[0], self.x0[1]),
            self.theta0,
            Mat2::from_parts(a.re, a.im),
            RadialBump { plateau: self.plateau, support: self.support },
            k,
        )
    }

    /// Beam spec at the largest listed `k`.
    pub fn beam(&self) -> Result<BeamSpec> {
        self.build(&self.a0, self.k_max())
    }

    pub fn coherent(&self) -> Result<BeamSpec> {
        self.build(&self.a_coherent, self.k_max())
    }

    pub fn k_max(&self) -> f64 {
        self.k_list.iter().cloned().fold(1.0, f64::max)
    }

    pub fn residual_times(&self) -> Vec<f64> {
        let n = (self.t / self.residual_step).round() as usize;
        (0..=n).map(|i| i as f64 * self.t / n.max(1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub damping: DampingConfig,
    pub grid: GridConfig,
    pub evolution: EvolutionConfig,
    pub spectrum: SpectrumConfig,
    pub averages: AveragesConfig,
    pub beams: BeamsConfig,
    pub output: OutputConfig,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text).map_err(|e| AdwError::Config(e.to_string()))?)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: Config = serde_json::from_value(v).map_err(|e| AdwError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read `path` (or start from defaults) and apply `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut v = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| AdwError::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| AdwError::Config(format!("{}: {e}", p.display())))?
            }
            None => serde_json::to_value(Config::default())?,
        };
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        Self::from_value(v)
    }

    pub fn validate(&self) -> Result<()> {
        self.damping.descriptor().map_err(|e| AdwError::Config(format!("damping: {e}")))?;
        Grid::new(self.grid.n).map_err(|e| AdwError::Config(format!("grid: {e}")))?;
        let ev = &self.evolution;
        if !(ev.dt > 0.0 && ev.t_max > 0.0 && ev.dt <= ev.t_max) {
            return Err(AdwError::Config("evolution: need 0 < dt <= t_max".into()));
        }
        if 2 * ev.band >= self.grid.n {
            return Err(AdwError::Config("evolution.band must be < grid.n / 2".into()));
        }
        if self.spectrum.n_max == 0 || self.spectrum.grid < 4 * self.spectrum.n_max {
            return Err(AdwError::Config("spectrum: need n_max >= 1 and grid >= 4 n_max".into()));
        }
        self.averages.sampling().map_err(|e| AdwError::Config(format!("averages: {e}")))?;
        if !(self.averages.t_max >= 1.0 && self.averages.c_floor > 0.0 && self.averages.agcc_h > 0.0) {
            return Err(AdwError::Config("averages: need t_max >= 1, c_floor > 0, agcc_h > 0".into()));
        }
        let b = &self.beams;
        if b.k_list.is_empty() {
            return Err(AdwError::Config("beams.k_list must be non-empty".into()));
        }
        b.beam().map_err(|e| AdwError::Config(format!("beams: {e}")))?;
        b.coherent().map_err(|e| AdwError::Config(format!("beams: {e}")))?;
        if !(b.t > 0.0 && b.dt > 0.0 && b.residual_step > 0.0) {
            return Err(AdwError::Config("beams: T, dt, residual_step must be positive".into()));
        }
        Ok(())
    }

    /// Stable JSON form (keys in declaration order).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

/// `a.b.c=value`; the value is parsed as JSON, falling back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| AdwError::Config(format!("override '{assignment}' is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| AdwError::Config(format!("override '{key}': '{part}' is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(AdwError::Config("empty override key".into()))
}
