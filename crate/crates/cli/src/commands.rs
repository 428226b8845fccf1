use crate::output::Output;
use adw_core::acceptance::{CriterionReport, Suite};
use adw_core::averages::Averager;
use adw_core::beams::{self, BeamDecay, ResidualSweep, ScalingTestSpec, TestSymbol};
use adw_core::config::{Config, InitialData};
use adw_core::evolution::{self, dissipation_residual, fit_decay, random_state, write_snapshot, FieldState, Recording};
use adw_core::quantization::Grid;
use adw_core::spectrum::{assumption2_check, decay_rate, spectrum_with, FaerBackend, SpectrumOptions, SpectrumResult};
use adw_core::Result;
use serde::Serialize;
use serde_json::json;

fn spectrum_of(config: &Config) -> Result<SpectrumResult> {
    let desc = config.damping.descriptor()?;
    let grid = Grid::new(config.spectrum.grid)?;
    let opts = SpectrumOptions { zero_tol: config.spectrum.zero_tol, ..Default::default() };
    Ok(spectrum_with(&FaerBackend, &desc, config.spectrum.n_max, &grid, opts)?.0)
}

fn write_spectrum(out: &mut Output, s: &SpectrumResult) -> Result<()> {
    out.csv("spectrum.csv", &["re", "im"], s.eigenvalues.iter().map(|z| vec![z.re, z.im]))
}

/// Summary without the eigenvalue list (that goes to `spectrum.csv`).
fn spectrum_summary(s: &SpectrumResult) -> serde_json::Value {
    json!({
        "n_max": s.n_max,
        "zero_tol": s.zero_tol,
        "D0": s.d0,
        "D_of_R": s.d_of_r,
        "D_inf_estimate": s.d_inf_estimate,
        "r_large": s.r_large,
        "max_re": s.max_re,
        "backend": s.backend,
        "eigenvalue_count": s.eigenvalues.len(),
    })
}

pub fn rate(config: &Config) -> Result<bool> {
    let desc = config.damping.descriptor()?;
    let sampling = config.averages.sampling()?;
    let mut out = Output::create(&config.output.directory)?;
    let curve = Averager::new(&desc).l_infinity(config.averages.t_max, &sampling)?;
    out.csv("Lt.csv", &["t", "L"], curve.times.iter().zip(&curve.values).map(|(t, l)| vec![*t, *l]))?;
    let s = spectrum_of(config)?;
    write_spectrum(&mut out, &s)?;
    let l_inf = curve.sup;
    let alpha = decay_rate(s.d0, l_inf);
    let branch = if -s.d0 <= l_inf { "spectral" } else { "geodesic" };
    let summary = json!({
        "L_inf": l_inf,
        "L_terminal": curve.terminal,
        "D0": s.d0,
        "alpha": alpha,
        "branch": branch,
        "spectrum": spectrum_summary(&s),
        "sampling": sampling,
        "t_max": config.averages.t_max,
    });
    out.json("rate.json", &summary)?;
    println!("L_inf = {l_inf}\nD0 = {}\nalpha = {alpha} ({branch} branch)", s.d0);
    out.finish("rate", config)?;
    Ok(true)
}

pub fn agcc(config: &Config) -> Result<bool> {
    let desc = config.damping.descriptor()?;
    let a = &config.averages;
    let verdict = Averager::new(&desc).agcc(a.c_floor, a.agcc_t_max, a.agcc_h, &a.sampling()?)?;
    let mut out = Output::create(&config.output.directory)?;
    out.json("agcc.json", &verdict)?;
    match (verdict.satisfied, verdict.t0, verdict.witness) {
        (true, Some(t0), _) => println!("satisfied: T0 = {t0}"),
        (_, _, Some(w)) => println!(
            "not satisfied: witness x = ({}, {}), theta = {}, integral = {}",
            w.base.x1,
            w.base.x2,
            w.theta,
            verdict.witness_integral.unwrap_or(f64::NAN)
        ),
        _ => println!("not satisfied"),
    }
    out.finish("agcc", config)?;
    Ok(true)
}

pub fn spectrum(config: &Config) -> Result<bool> {
    let s = spectrum_of(config)?;
    let mut out = Output::create(&config.output.directory)?;
    write_spectrum(&mut out, &s)?;
    let grid = Grid::new(config.spectrum.grid)?;
    let radius = 5.min(config.spectrum.grid / 4);
    let kernel = assumption2_check(&config.damping.descriptor()?, radius, &grid)?;
    let mut summary = spectrum_summary(&s);
    summary["kernel_check"] = serde_json::to_value(&kernel)?;
    out.json("spectrum.json", &summary)?;
    println!("D0 = {}\nmax Re = {}\nkernel min sigma (|n| <= {radius}) = {}", s.d0, s.max_re, kernel.min_sigma);
    out.finish("spectrum", config)?;
    Ok(true)
}

pub fn evolve(config: &Config) -> Result<bool> {
    let desc = config.damping.descriptor()?;
    let ev = &config.evolution;
    let grid = Grid::new(config.grid.n)?;
    let initial = match ev.initial {
        InitialData::Random => random_state(&grid, ev.band, ev.seed, false)?,
        InitialData::Zero => FieldState::zeros(&grid),
    };
    let recording = Recording { record_every: ev.record_every, snapshots: ev.snapshots, dissipation: true };
    let result = evolution::evolve(&desc, &grid, &initial, ev.t_max, ev.dt, recording)?;
    let mut out = Output::create(&config.output.directory)?;
    let trace = &result.trace;
    out.csv("energies.csv", &["t", "E"], trace.times.iter().zip(&trace.energies).map(|(t, e)| vec![*t, *e]))?;
    if ev.snapshots {
        let dir = out.dir().join("snapshots");
        std::fs::create_dir_all(&dir)?;
        for (i, s) in result.snapshots.iter().enumerate() {
            let name = format!("snapshots/snap_{i:05}.adwf");
            let file = std::io::BufWriter::new(std::fs::File::create(out.dir().join(&name))?);
            write_snapshot(file, &grid, s, i as u32)?;
            out.track(name);
        }
    }
    let window = ev.fit_window();
    let fit = fit_decay(trace, window);
    let e0 = trace.energies[0];
    let summary = json!({
        "E0": e0,
        "E_final": trace.energies.last(),
        "dt": trace.dt,
        "scheme": trace.scheme,
        "window": window,
        "fit": fit.as_ref().ok(),
        "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        "dissipation_residual": dissipation_residual(trace).ok(),
    });
    out.json("evolve.json", &summary)?;
    match &fit {
        Ok(f) => println!("fitted rate {} on [{}, {}]", f.rate, window.0, window.1),
        Err(e) => println!("no fit: {e}"),
    }
    out.finish("evolve", config)?;
    Ok(true)
}

#[derive(Serialize)]
struct BeamSummary {
    free: ResidualSweep,
    damped: ResidualSweep,
    decay: Vec<BeamDecay>,
}

pub fn beam(config: &Config) -> Result<bool> {
    let desc = config.damping.descriptor()?;
    let b = &config.beams;
    let grid = Grid::new(b.grid)?;
    let spec = b.beam()?;
    let times = b.residual_times();
    let free = beams::beam_residual_sweep(&grid, &spec, &b.k_list, &times)?;
    let damped = beams::damped_residual_sweep(&desc, &grid, &spec, &b.k_list, &times)?;
    let decay = b
        .k_list
        .iter()
        .map(|&k| beams::beam_decay_experiment(&desc, &grid, &spec.with_k(k), b.t, b.dt))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::create(&config.output.directory)?;
    out.csv("beam_decay.csv", &["k", "T", "measured", "predicted"], decay.iter().map(|d| vec![d.k, d.t, d.measured, d.predicted]))?;
    println!("free residual slope {}\ndamped residual slope {}", free.slope, damped.slope);
    for d in &decay {
        println!("k = {}: E(T)/E(0) = {}, exp(-4 int w) = {}, exp(-2 int w) = {}", d.k, d.measured, d.predicted, d.transport);
    }
    out.json("beam.json", &BeamSummary { free, damped, decay })?;
    out.finish("beam", config)?;
    Ok(true)
}

#[derive(Serialize)]
struct ScalingCase {
    order: f64,
    ell: u32,
    symbol: TestSymbol,
    ks: Vec<f64>,
    norms: Vec<f64>,
    slope: f64,
    bound: f64,
    within_bound: bool,
}

pub fn coherent_scaling(config: &Config) -> Result<bool> {
    let b = &config.beams;
    let grid = Grid::new(b.grid)?;
    let base = b.coherent()?;
    let mut cases = Vec::new();
    for test in ScalingTestSpec::standard(&b.k_list) {
        let r = beams::scaling_experiment(&test, &grid, &base)?;
        println!("(m, l) = ({}, {}): slope {} (bound {})", test.order, test.ell, r.slope, r.bound);
        cases.push(ScalingCase {
            order: test.order,
            ell: test.ell,
            symbol: test.symbol,
            ks: r.ks,
            norms: r.norms,
            within_bound: r.slope <= r.bound,
            slope: r.slope,
            bound: r.bound,
        });
    }
    let mut out = Output::create(&config.output.directory)?;
    let rows: Vec<Vec<f64>> = cases
        .iter()
        .flat_map(|c| c.ks.iter().zip(&c.norms).map(move |(k, n)| vec![*k, *n, c.ell as f64]))
        .collect();
    out.csv("scaling.csv", &["k", "norm", "ell"], rows)?;
    out.json("scaling.json", &json!({ "cases": cases }))?;
    out.finish("coherent-scaling", config)?;
    Ok(true)
}

pub fn verify(config: &Config, only: &[u8]) -> Result<bool> {
    let ids: Vec<u8> = if only.is_empty() { (1..=12).collect() } else { only.to_vec() };
    let suite = Suite::new();
    let mut reports: Vec<CriterionReport> = Vec::new();
    for id in ids {
        let r = suite.run(id);
        println!("{}", r.line());
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{}", if passed { "all criteria passed".to_string() } else { format!("failed: {failed:?}") });
    let mut out = Output::create(&config.output.directory)?;
    out.json("verify.json", &json!({ "passed": passed, "failed": failed, "criteria": reports }))?;
    out.finish("verify", config)?;
    Ok(passed)
}
