//! Batch front end: flat `key = value` configuration, subcommands, sweeps and
//! deterministic CSV/JSON output.

use crate::beam::{
    cold_profile, gaussian_profile, BeamParameters, GaussianScales, OccupationProfile, ProfileKind,
};
use crate::dispersion::{
    gamma_r, pierce_cubic, solve_threshold, SelfEnergyModel, ThresholdSolution,
};
use crate::langevin::{simulate, stationary_stats, LangevinConfig, Scheme};
use crate::lgk::{extract_lgk, stationary_amplitude, to_canonical, CanonicalLaserParams};
use crate::meanfield::{integrate, MeanFieldConfig};
use crate::selfenergy::{
    sigma_k_discrete, sigma_k_gaussian, sigma_r_discrete, sigma_r_gaussian, Broadening,
    Regularization,
};
use crate::Error;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SelfEnergy,
    Dispersion,
    Pierce,
    Lgk,
    Langevin,
    MeanField,
    Sweep,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::SelfEnergy => "selfenergy",
            Subcommand::Dispersion => "dispersion",
            Subcommand::Pierce => "pierce",
            Subcommand::Lgk => "lgk",
            Subcommand::Langevin => "langevin",
            Subcommand::MeanField => "meanfield",
            Subcommand::Sweep => "sweep",
        }
    }
}

impl FromStr for Subcommand {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "selfenergy" => Subcommand::SelfEnergy,
            "dispersion" => Subcommand::Dispersion,
            "pierce" => Subcommand::Pierce,
            "lgk" => Subcommand::Lgk,
            "langevin" => Subcommand::Langevin,
            "meanfield" => Subcommand::MeanField,
            "sweep" => Subcommand::Sweep,
            other => return Err(CliError::Config(format!("unknown subcommand '{other}'"))),
        })
    }
}

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "beam.eta",
    "beam.n_electrons",
    "beam.omega_eta",
    "beam.profile",
    "beam.m0",
    "beam.sigma_m",
    "beam.window_halfwidth",
    "selfenergy.epsilon",
    "selfenergy.regularization",
    "selfenergy.omega_min",
    "selfenergy.omega_max",
    "selfenergy.n_points",
    "dispersion.bracket_lo",
    "dispersion.bracket_hi",
    "dispersion.omega_min",
    "dispersion.omega_max",
    "dispersion.n_points",
    "lgk.expansion_point",
    "lgk.fd_step",
    "lgk.lambda_re",
    "lgk.lambda_im",
    "langevin.alpha",
    "langevin.beta",
    "langevin.d_las",
    "langevin.dt",
    "langevin.n_steps",
    "langevin.n_traj",
    "langevin.burn_in_fraction",
    "langevin.scheme",
    "langevin.initial_re",
    "langevin.initial_im",
    "langevin.record_stride",
    "langevin.write_trajectories",
    "meanfield.dt",
    "meanfield.n_steps",
    "meanfield.m_min",
    "meanfield.m_max",
    "meanfield.b0_re",
    "meanfield.b0_im",
    "meanfield.seed_bunching_re",
    "meanfield.seed_bunching_im",
    "meanfield.record_stride",
    "meanfield.coupling",
    "sweep.command",
];

/// Flat key-value configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            check_key(&k)?;
            if v.is_empty() {
                return Err(CliError::Config(format!("key '{k}' has an empty value")));
            }
            if entries.insert(k.clone(), v).is_some() {
                return Err(CliError::Config(format!("key '{k}' given twice")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    /// Short SHA-256 over the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                CliError::Config(format!("key '{key}': cannot parse value '{v}'"))
            }),
        }
    }

    fn req<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.or("seed", 0)
    }

    fn sweep_axes(&self) -> Vec<(String, Vec<String>)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                let key = k.strip_prefix("sweep.")?;
                (key != "command").then(|| {
                    (key.to_string(), v.split(',').map(|s| s.trim().to_string()).collect())
                })
            })
            .collect()
    }
}

fn check_key(k: &str) -> CliResult<()> {
    if KNOWN_KEYS.contains(&k) {
        return Ok(());
    }
    if let Some(inner) = k.strip_prefix("sweep.") {
        if KNOWN_KEYS.contains(&inner) && !inner.starts_with("sweep.") && inner != "seed" {
            return Ok(());
        }
    }
    Err(CliError::Config(format!("unknown key '{k}'")))
}

/// Stable 64-bit stream id for a labeled component.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Shortest string that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

struct Output {
    dir: PathBuf,
    hash: String,
    seed: u64,
    command: &'static str,
    files: Vec<String>,
}

impl Output {
    fn header_line(&self) -> String {
        format!("# config_hash={} seed={} command={}\n", self.hash, self.seed, self.command)
    }

    fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut s = self.header_line();
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn json(&mut self, name: &str, body: Value) -> CliResult<()> {
        let mut obj = serde_json::Map::new();
        obj.insert(
            "header".into(),
            json!({"config_hash": self.hash, "seed": self.seed, "command": self.command}),
        );
        if let Value::Object(m) = body {
            obj.extend(m);
        } else {
            obj.insert("data".into(), body);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj))
            .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
        s.push('\n');
        self.write(name, &s)
    }

    fn write(&mut self, name: &str, content: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| io_err(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn beam_params(cfg: &RunConfig, need_omega_eta: bool) -> CliResult<BeamParameters> {
    let eta: f64 = cfg.req("beam.eta")?;
    let n: f64 = cfg.req("beam.n_electrons")?;
    let w: f64 = if need_omega_eta { cfg.req("beam.omega_eta")? } else { cfg.or("beam.omega_eta", 0.0)? };
    BeamParameters::new(eta, n, w).map_err(|e| keyed(e, "beam"))
}

fn keyed(e: Error, section: &str) -> CliError {
    match e {
        Error::Config(m) | Error::Domain(m) => CliError::Config(format!("{section}: {m}")),
        other => other.into(),
    }
}

fn profile(cfg: &RunConfig) -> CliResult<OccupationProfile> {
    let kind: String = cfg.or("beam.profile", "gaussian".to_string())?;
    let m0: i64 = cfg.req("beam.m0")?;
    match kind.as_str() {
        "gaussian" => {
            let sigma_m: f64 = cfg.req("beam.sigma_m")?;
            let w: i64 = cfg.or("beam.window_halfwidth", (8.0 * sigma_m).ceil() as i64)?;
            gaussian_profile(m0, sigma_m, w).map_err(|e| keyed(e, "beam.window_halfwidth"))
        }
        "cold" => Ok(cold_profile(m0)),
        other => Err(CliError::Config(format!("key 'beam.profile': unknown profile '{other}'"))),
    }
}

fn gaussian_scales(cfg: &RunConfig, params: &BeamParameters) -> CliResult<GaussianScales> {
    let m0: i64 = cfg.req("beam.m0")?;
    let sigma_m: f64 = cfg.req("beam.sigma_m")?;
    GaussianScales::from_mode_width(m0, sigma_m, params).map_err(|e| keyed(e, "beam.sigma_m"))
}

fn grid(cfg: &RunConfig, section: &str, scales: Option<&GaussianScales>) -> CliResult<Vec<f64>> {
    let key = |s: &str| format!("{section}.{s}");
    let (lo_d, hi_d) = match scales {
        Some(s) => (s.omega_0 - 4.0 * s.sigma_omega, s.omega_0 + 4.0 * s.sigma_omega),
        None => (f64::NAN, f64::NAN),
    };
    let lo: f64 = match cfg.get(&key("omega_min"))? {
        Some(v) => v,
        None if scales.is_some() => lo_d,
        None => return Err(CliError::Config(format!("missing required key '{}'", key("omega_min")))),
    };
    let hi: f64 = match cfg.get(&key("omega_max"))? {
        Some(v) => v,
        None if scales.is_some() => hi_d,
        None => return Err(CliError::Config(format!("missing required key '{}'", key("omega_max")))),
    };
    let n: usize = cfg.or(&key("n_points"), 161)?;
    if n < 2 || !(hi > lo) {
        return Err(CliError::Config(format!(
            "key '{}': need omega_max > omega_min and at least 2 points",
            key("n_points")
        )));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

fn threshold(cfg: &RunConfig, scales: &GaussianScales, params: &BeamParameters) -> CliResult<ThresholdSolution> {
    let lo: f64 = cfg.req("dispersion.bracket_lo")?;
    let hi: f64 = cfg.req("dispersion.bracket_hi")?;
    if !(hi > lo) {
        return Err(CliError::Config("key 'dispersion.bracket_hi' must exceed dispersion.bracket_lo".into()));
    }
    Ok(solve_threshold(scales, params, (lo, hi))?)
}

fn threshold_json(t: &ThresholdSolution) -> Value {
    json!({
        "omega_res": t.omega_res,
        "y_res": t.y_res,
        "im_gamma_at_res": t.im_gamma_at_res,
        "growing": t.growing,
        "residual": t.residual,
        "iterations": t.iterations,
        "sign_changes": t.sign_changes,
    })
}

fn c_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn run_selfenergy(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let params = beam_params(cfg, false)?;
    let prof = profile(cfg)?;
    let eps: f64 = cfg.or("selfenergy.epsilon", 2.0 / params.eta)?;
    let kind = match cfg.or("selfenergy.regularization", "lorentzian".to_string())?.as_str() {
        "lorentzian" => Regularization::Lorentzian,
        "extrapolated" => Regularization::Extrapolated,
        other => {
            return Err(CliError::Config(format!(
                "key 'selfenergy.regularization': unknown value '{other}'"
            )))
        }
    };
    let broadening =
        Broadening::with_kind(eps, kind).map_err(|e| keyed(e, "selfenergy.epsilon"))?;
    let scales = match prof.kind() {
        ProfileKind::Gaussian { .. } => Some(gaussian_scales(cfg, &params)?),
        _ => None,
    };
    for w in broadening.warnings(&params, scales.map(|s| s.sigma_omega)) {
        eprintln!("warning: {w}");
    }
    let omegas = match &scales {
        Some(s) => grid(cfg, "selfenergy", Some(s))?,
        None => grid(cfg, "selfenergy", None)?,
    };
    let y_of = |w: f64| scales.map_or(f64::NAN, |s| s.y(w));
    let mut rows: Vec<Vec<String>> = omegas
        .par_iter()
        .map(|&w| {
            let r = sigma_r_discrete(&prof, &params, w, &broadening);
            let k = sigma_k_discrete(&prof, &params, w, &broadening);
            vec![fmt_f64(w), fmt_f64(y_of(w)), fmt_f64(r.re), fmt_f64(r.im), fmt_f64(k.im), "discrete".into()]
        })
        .collect();
    if let Some(s) = scales {
        let g: Vec<Vec<String>> = omegas
            .par_iter()
            .map(|&w| -> CliResult<Vec<String>> {
                let r = sigma_r_gaussian(&params, &s, w)?;
                let k = sigma_k_gaussian(&params, &s, w);
                Ok(vec![fmt_f64(w), fmt_f64(s.y(w)), fmt_f64(r.re), fmt_f64(r.im), fmt_f64(k.im), "gaussian".into()])
            })
            .collect::<CliResult<_>>()?;
        rows.extend(g);
    }
    out.csv(
        "selfenergy.csv",
        &["omega", "y", "re_sigma_r", "im_sigma_r", "im_sigma_k", "method"],
        &rows,
    )?;
    let prof_rows: Vec<Vec<String>> = (prof.m_min()..=prof.m_max())
        .map(|m| vec![m.to_string(), fmt_f64(prof.n(m))])
        .collect();
    out.csv("profile.csv", &["m", "n_m"], &prof_rows)
}

fn run_dispersion(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let params = beam_params(cfg, true)?;
    let scales = gaussian_scales(cfg, &params)?;
    let model = SelfEnergyModel::Gaussian(scales);
    let omegas = grid(cfg, "dispersion", Some(&scales))?;
    let rows = omegas
        .par_iter()
        .map(|&w| -> CliResult<Vec<String>> {
            let g = gamma_r(&model, &params, w)?;
            Ok(vec![fmt_f64(w), fmt_f64(g.re), fmt_f64(g.im), (g.im < 0.0).to_string()])
        })
        .collect::<CliResult<Vec<_>>>()?;
    out.csv("dispersion.csv", &["omega", "re_gamma", "im_gamma", "growing"], &rows)?;
    let t = threshold(cfg, &scales, &params)?;
    out.json("threshold.json", threshold_json(&t))
}

fn run_pierce(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let params = beam_params(cfg, true)?;
    let m0: i64 = cfg.req("beam.m0")?;
    let c = pierce_cubic(m0, &params);
    out.json(
        "pierce.json",
        json!({
            "roots": c.roots.iter().map(|&r| c_json(r)).collect::<Vec<_>>(),
            "unstable_root": c.unstable_root.map(c_json),
            "growth_rate": c.growth_rate(),
            "rho_eff": c.rho_eff,
            "centers": c.centers,
            "coupling": c.coupling,
            "max_residual": c.max_residual(),
        }),
    )
}

fn run_lgk(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let params = beam_params(cfg, true)?;
    let scales = gaussian_scales(cfg, &params)?;
    let pt = match cfg.get::<f64>("lgk.expansion_point")? {
        Some(p) => p,
        None => threshold(cfg, &scales, &params)?.omega_res,
    };
    let lambda = Complex64::new(cfg.or("lgk.lambda_re", 1.0)?, cfg.or("lgk.lambda_im", 0.0)?);
    let fd: Option<f64> = cfg.get("lgk.fd_step")?;
    let l = extract_lgk(&SelfEnergyModel::Gaussian(scales), &params, pt, fd, lambda)
        .map_err(|e| keyed(e, "lgk.fd_step"))?;
    let amp = stationary_amplitude(&l).ok();
    let (canonical, canonical_error) = match to_canonical(&l) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    out.json(
        "lgk.json",
        json!({
            "z_inv": c_json(l.z_inv),
            "z": c_json(l.z),
            "z_phase": l.z_phase,
            "delta_omega": l.delta_omega,
            "kappa": l.kappa,
            "r": l.r,
            "d_noise": l.d_noise,
            "lambda": c_json(l.lambda_c),
            "stationary_amplitude": amp,
            "canonical": canonical,
            "canonical_error": canonical_error,
            "provenance": {
                "expansion_point": l.expansion_point,
                "fd_step": l.fd_step,
                "method": l.method,
            },
        }),
    )
}

fn langevin_inputs(cfg: &RunConfig, seed: u64) -> CliResult<(CanonicalLaserParams, LangevinConfig)> {
    let p = CanonicalLaserParams::new(
        cfg.req("langevin.alpha")?,
        cfg.req("langevin.beta")?,
        cfg.req("langevin.d_las")?,
    )
    .map_err(|e| keyed(e, "langevin"))?;
    let scheme: String = cfg.or("langevin.scheme", "heun".to_string())?;
    let scheme = Scheme::from_str(&scheme).map_err(|e| keyed(e, "langevin.scheme"))?;
    let lc = LangevinConfig {
        dt: cfg.req("langevin.dt")?,
        n_steps: cfg.req("langevin.n_steps")?,
        n_traj: cfg.req("langevin.n_traj")?,
        seed: derive_seed(seed, "langevin"),
        initial_amplitude: Complex64::new(
            cfg.or("langevin.initial_re", 0.0)?,
            cfg.or("langevin.initial_im", 0.0)?,
        ),
        burn_in_fraction: cfg.or("langevin.burn_in_fraction", 0.2)?,
        scheme,
        record_stride: cfg.or("langevin.record_stride", 1)?,
    };
    lc.validate(&p).map_err(|e| keyed(e, "langevin.dt"))?;
    Ok((p, lc))
}

fn run_langevin(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let (p, lc) = langevin_inputs(cfg, out.seed)?;
    let set = simulate(&p, &lc)?;
    let n_write: usize = cfg.or("langevin.write_trajectories", 1)?;
    for (k, traj) in set.trajectories.iter().take(n_write).enumerate() {
        let rows: Vec<Vec<String>> = traj
            .iter()
            .enumerate()
            .map(|(i, a)| vec![fmt_f64(i as f64 * set.dt_sample), fmt_f64(a.re), fmt_f64(a.im)])
            .collect();
        out.csv(&format!("trajectory_{k:04}.csv"), &["t", "re_a", "im_a"], &rows)?;
    }
    let stats = stationary_stats(&set, lc.burn_in_fraction)?;
    out.json(
        "stats.json",
        json!({
            "mean_mod2": stats.mean_mod2,
            "stderr_mod2": stats.stderr_mod2,
            "autocorr_time": stats.autocorr_time,
            "mean_field": c_json(stats.mean_field),
            "stderr_field_re": stats.stderr_field_re,
            "stderr_field_im": stats.stderr_field_im,
            "degenerate": stats.degenerate,
            "n_samples": stats.n_samples,
            "n_batches": stats.n_batches,
            "config": {
                "alpha": p.alpha, "beta": p.beta, "d_las": p.d_las,
                "dt": lc.dt, "n_steps": lc.n_steps, "n_traj": lc.n_traj,
                "burn_in_fraction": lc.burn_in_fraction, "scheme": lc.scheme,
                "record_stride": lc.record_stride,
                "initial_amplitude": c_json(lc.initial_amplitude),
                "stream_seed": lc.seed,
            },
        }),
    )
}

fn run_meanfield(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let params = beam_params(cfg, true)?;
    let m0: i64 = cfg.req("beam.m0")?;
    let mc = MeanFieldConfig {
        dt: cfg.req("meanfield.dt")?,
        n_steps: cfg.req("meanfield.n_steps")?,
        window: (cfg.or("meanfield.m_min", m0 - 12)?, cfg.or("meanfield.m_max", m0 + 12)?),
        seed_bunching: Complex64::new(
            cfg.or("meanfield.seed_bunching_re", 0.0)?,
            cfg.or("meanfield.seed_bunching_im", 0.0)?,
        ),
        record_stride: cfg.or("meanfield.record_stride", 1)?,
        coupling: cfg.or("meanfield.coupling", 1.0)?,
    };
    let b0 = Complex64::new(cfg.or("meanfield.b0_re", 1e-8)?, cfg.or("meanfield.b0_im", 0.0)?);
    let init = mc.initial_state(m0, b0).map_err(|e| keyed(e, "meanfield"))?;
    let recs = integrate(&init, &mc, &params)?;
    let rows: Vec<Vec<String>> = recs
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.t),
                fmt_f64(r.b.re),
                fmt_f64(r.b.im),
                fmt_f64(r.b.norm()),
                fmt_f64(r.j.re),
                fmt_f64(r.j.im),
                fmt_f64(r.norm),
            ]
        })
        .collect();
    out.csv("meanfield.csv", &["t", "re_b", "im_b", "abs_b", "re_J", "im_J", "norm"], &rows)
}

fn run_single(cmd: Subcommand, cfg: &RunConfig, dir: &Path, seed: u64) -> CliResult<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut out = Output { dir: dir.to_path_buf(), hash: cfg.hash(), seed, command: cmd.name(), files: vec![] };
    match cmd {
        Subcommand::SelfEnergy => run_selfenergy(cfg, &mut out)?,
        Subcommand::Dispersion => run_dispersion(cfg, &mut out)?,
        Subcommand::Pierce => run_pierce(cfg, &mut out)?,
        Subcommand::Lgk => run_lgk(cfg, &mut out)?,
        Subcommand::Langevin => run_langevin(cfg, &mut out)?,
        Subcommand::MeanField => run_meanfield(cfg, &mut out)?,
        Subcommand::Sweep => return Err(CliError::Config("sweep cannot be nested".into())),
    }
    Ok(out.files)
}

fn run_sweep(cfg: &RunConfig, dir: &Path, seed: u64, resume: bool) -> CliResult<()> {
    let cmd: String = cfg.req("sweep.command")?;
    let cmd = Subcommand::from_str(&cmd)
        .map_err(|_| CliError::Config(format!("key 'sweep.command': unknown subcommand '{cmd}'")))?;
    if cmd == Subcommand::Sweep {
        return Err(CliError::Config("key 'sweep.command' cannot be 'sweep'".into()));
    }
    let axes = cfg.sweep_axes();
    if axes.is_empty() {
        return Err(CliError::Config("sweep needs at least one 'sweep.<key> = v1, v2' axis".into()));
    }
    let mut base = cfg.clone();
    base.entries.retain(|k, _| !k.starts_with("sweep."));
    let mut points: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for (key, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let hash = cfg.hash();
    let results: Vec<(Value, Option<CliError>)> = points
        .par_iter()
        .enumerate()
        .map(|(i, coords)| {
            let name = format!("point_{i:04}");
            let pdir = dir.join(&name);
            let mut pcfg = base.clone();
            for (k, v) in coords {
                pcfg.set(k, v.clone());
            }
            let marker = pdir.join("point.json");
            if resume {
                if let Some(done) = completed_point(&marker, coords) {
                    return (done, None);
                }
            }
            match run_single(cmd, &pcfg, &pdir, seed) {
                Ok(files) => {
                    let entry = json!({
                        "index": i,
                        "dir": name,
                        "coordinates": coords,
                        "files": files,
                        "status": "ok",
                    });
                    let mut o = Output { dir: pdir.clone(), hash: pcfg.hash(), seed, command: cmd.name(), files: vec![] };
                    match o.json("point.json", entry.clone()) {
                        Ok(()) => (entry, None),
                        Err(e) => (entry, Some(e)),
                    }
                }
                Err(e) => (
                    json!({
                        "index": i,
                        "dir": name,
                        "coordinates": coords,
                        "files": [],
                        "status": "failed",
                        "error": e.to_string(),
                    }),
                    Some(e),
                ),
            }
        })
        .collect();
    let mut first_err = None;
    let mut entries = Vec::new();
    for (v, e) in results {
        entries.push(v);
        if first_err.is_none() {
            first_err = e;
        }
    }
    let mut out = Output { dir: dir.to_path_buf(), hash, seed, command: "sweep", files: vec![] };
    out.json(
        "manifest.json",
        json!({"sweep_command": cmd.name(), "points": entries}),
    )?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn completed_point(marker: &Path, coords: &BTreeMap<String, String>) -> Option<Value> {
    let text = std::fs::read_to_string(marker).ok()?;
    let mut v: Value = serde_json::from_str(&text).ok()?;
    let obj = v.as_object_mut()?;
    obj.remove("header");
    let same = obj.get("coordinates")? == &json!(coords) && obj.get("status")? == "ok";
    same.then_some(v)
}

/// Run one subcommand; returns the process exit code and reports errors on
/// stderr.
pub fn run(
    cmd: Subcommand,
    config_path: &Path,
    output_dir: &Path,
    seed_override: Option<u64>,
    resume: bool,
) -> i32 {
    match try_run(cmd, config_path, output_dir, seed_override, resume) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn try_run(
    cmd: Subcommand,
    config_path: &Path,
    output_dir: &Path,
    seed_override: Option<u64>,
    resume: bool,
) -> CliResult<()> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(s) = seed_override {
        cfg.set("seed", s.to_string());
    }
    let seed = cfg.seed()?;
    match cmd {
        Subcommand::Sweep => run_sweep(&cfg, output_dir, seed, resume),
        other => run_single(other, &cfg, output_dir, seed).map(|_| ()),
    }
}
