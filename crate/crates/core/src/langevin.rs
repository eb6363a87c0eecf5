//! Stochastic laser equation da/dt = alpha a - beta |a|^2 a + zeta and its
//! ensemble statistics.
//!
//! Noise: <zeta*(t) zeta(t')> = 2 D delta(t - t'), i.e. each step adds
//! independent real and imaginary Gaussian increments of variance D dt.

use crate::error::{Error, Result};
use crate::lgk::CanonicalLaserParams;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMaruyama,
    #[default]
    Heun,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_maruyama" | "euler" => Ok(Scheme::EulerMaruyama),
            "heun" => Ok(Scheme::Heun),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub initial_amplitude: Complex64,
    pub burn_in_fraction: f64,
    pub scheme: Scheme,
    /// Keep every `record_stride`-th step.
    pub record_stride: usize,
}

impl LangevinConfig {
    pub fn validate(&self, p: &CanonicalLaserParams) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 || self.n_traj == 0 || self.record_stride == 0 {
            return Err(Error::Config("n_steps, n_traj and record_stride must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.dt * p.alpha.abs() > 0.05 {
            return Err(Error::Config(format!(
                "dt |alpha| = {} exceeds the stability guard 0.05",
                self.dt * p.alpha.abs()
            )));
        }
        if !(p.d_las >= 0.0) || !(p.beta >= 0.0) {
            return Err(Error::Config("d_las and beta must be non-negative".into()));
        }
        Ok(())
    }
}

/// Recorded trajectories, all sampled at t = k dt_sample from t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub dt_sample: f64,
    pub trajectories: Vec<Vec<Complex64>>,
}

/// Independent stream for one trajectory: ChaCha8 keyed by the seed, with the
/// trajectory index as the stream id.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
fn drift(p: &CanonicalLaserParams, a: Complex64) -> Complex64 {
    a * (p.alpha - p.beta * a.norm_sqr())
}

/// One trajectory, with the noise stream and initial value rotated by `phase`
/// (a unit complex number; pass 1 for the plain run).
pub fn simulate_trajectory(
    p: &CanonicalLaserParams,
    cfg: &LangevinConfig,
    index: u64,
    phase: Complex64,
) -> Result<Vec<Complex64>> {
    let mut rng = trajectory_rng(cfg.seed, index);
    let dt = cfg.dt;
    let sd = (p.d_las * dt).sqrt();
    let mut a = cfg.initial_amplitude * phase;
    let mut out = Vec::with_capacity(cfg.n_steps / cfg.record_stride + 1);
    out.push(a);
    for step in 1..=cfg.n_steps {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let xi = Complex64::new(sd * re, sd * im) * phase;
        let f0 = drift(p, a);
        a = match cfg.scheme {
            Scheme::EulerMaruyama => a + f0 * dt + xi,
            Scheme::Heun => {
                let pred = a + f0 * dt + xi;
                a + (f0 + drift(p, pred)) * (0.5 * dt) + xi
            }
        };
        if !a.is_finite() || a.norm_sqr() > 1e300 {
            return Err(Error::Divergence {
                step,
                detail: format!("trajectory {index} left the finite range"),
            });
        }
        if step % cfg.record_stride == 0 {
            out.push(a);
        }
    }
    Ok(out)
}

/// Ensemble of `cfg.n_traj` trajectories; the result does not depend on how
/// rayon schedules them.
pub fn simulate(p: &CanonicalLaserParams, cfg: &LangevinConfig) -> Result<TrajectorySet> {
    cfg.validate(p)?;
    let one = Complex64::new(1.0, 0.0);
    let trajectories = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|k| simulate_trajectory(p, cfg, k, one))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectorySet { dt_sample: cfg.dt * cfg.record_stride as f64, trajectories })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean_mod2: f64,
    pub stderr_mod2: f64,
    pub autocorr_time: f64,
    pub mean_field: Complex64,
    pub stderr_field_re: f64,
    pub stderr_field_im: f64,
    /// Re a has no variance; autocorr_time is then just the sample spacing.
    pub degenerate: bool,
    pub n_samples: usize,
    pub n_batches: usize,
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn mean_of(xs: impl IntoIterator<Item = f64>) -> (f64, usize) {
    let mut s = NeumaierSum::default();
    let mut n = 0;
    for x in xs {
        s.add(x);
        n += 1;
    }
    (s.value() / n as f64, n)
}

/// Mean and batch-means standard error of a set of series.
///
/// With ten or more series each one is a batch; otherwise every series is cut
/// into equal pieces so that there are at least twenty batches.
pub fn batch_means(series: &[Vec<f64>]) -> Result<(f64, f64, usize)> {
    let per = if series.len() >= 10 { 1 } else { 20usize.div_ceil(series.len().max(1)) };
    let mut means = Vec::new();
    for s in series {
        let len = s.len() / per;
        if len == 0 {
            return Err(Error::Statistics(format!(
                "series of length {} cannot be split into {per} batches",
                s.len()
            )));
        }
        for b in 0..per {
            means.push(mean_of(s[b * len..(b + 1) * len].iter().cloned()).0);
        }
    }
    if means.len() < 2 {
        return Err(Error::Statistics("need at least two batches".into()));
    }
    let (mean, n) = mean_of(means.iter().cloned());
    let (var, _) = mean_of(means.iter().map(|m| (m - mean) * (m - mean)));
    let var = var * n as f64 / (n as f64 - 1.0);
    Ok((mean, (var / n as f64).sqrt(), n))
}

// Self-consistent window: stop summing once the lag exceeds this many
// current estimates of tau.
const SOKAL_WINDOW: f64 = 6.0;

/// Integrated autocorrelation time of the pooled series, trapezoid rule up to
/// the first non-positive lag or the self-consistent window, whichever comes
/// first. `None` when the series has no variance.
pub fn autocorrelation_time(series: &[&[f64]], dt: f64) -> Option<f64> {
    let (mu, n) = mean_of(series.iter().flat_map(|s| s.iter().cloned()));
    if n == 0 {
        return None;
    }
    let cov = |lag: usize| -> f64 {
        let mut s = NeumaierSum::default();
        let mut count = 0usize;
        for x in series {
            if x.len() > lag {
                for t in 0..x.len() - lag {
                    s.add((x[t] - mu) * (x[t + lag] - mu));
                }
                count += x.len() - lag;
            }
        }
        if count == 0 {
            0.0
        } else {
            s.value() / count as f64
        }
    };
    let c0 = cov(0);
    if !(c0 > 0.0) || c0 <= 1e-300 {
        return None;
    }
    let max_lag = series.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut tau = 0.5;
    for lag in 1..max_lag {
        let rho = cov(lag) / c0;
        if rho <= 0.0 {
            break;
        }
        tau += rho;
        if lag as f64 >= SOKAL_WINDOW * tau {
            break;
        }
    }
    Some(tau * dt)
}

/// <|a|^2>, <a> and the autocorrelation time of Re a after burn-in.
pub fn stationary_stats(set: &TrajectorySet, burn_in_fraction: f64) -> Result<EnsembleStats> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::Config(format!("burn_in_fraction {burn_in_fraction} outside [0, 1)")));
    }
    let kept: Vec<&[Complex64]> = set
        .trajectories
        .iter()
        .map(|t| &t[(burn_in_fraction * t.len() as f64).floor() as usize..])
        .collect();
    let len = kept.iter().map(|t| t.len()).min().unwrap_or(0);
    if len < 2 {
        return Err(Error::Statistics("no samples left after burn-in".into()));
    }
    let mod2: Vec<Vec<f64>> = kept.iter().map(|t| t.iter().map(|a| a.norm_sqr()).collect()).collect();
    let re: Vec<Vec<f64>> = kept.iter().map(|t| t.iter().map(|a| a.re).collect()).collect();
    let im: Vec<Vec<f64>> = kept.iter().map(|t| t.iter().map(|a| a.im).collect()).collect();

    let re_refs: Vec<&[f64]> = re.iter().map(|v| v.as_slice()).collect();
    let tau = autocorrelation_time(&re_refs, set.dt_sample);
    let degenerate = tau.is_none();
    let autocorr_time = tau.unwrap_or(set.dt_sample);
    let span = (len - 1) as f64 * set.dt_sample;
    if !degenerate && span < 20.0 * autocorr_time {
        let need = (20.0 * autocorr_time / set.dt_sample).ceil() as usize + 1;
        return Err(Error::Statistics(format!(
            "post-burn-in span {span} is shorter than 20 autocorrelation times ({autocorr_time}); \
             need at least {need} samples per trajectory after burn-in"
        )));
    }

    let (mean_mod2, stderr_mod2, n_batches) = batch_means(&mod2)?;
    let (mre, sre, _) = batch_means(&re)?;
    let (mim, sim, _) = batch_means(&im)?;
    Ok(EnsembleStats {
        mean_mod2,
        stderr_mod2,
        autocorr_time,
        mean_field: Complex64::new(mre, mim),
        stderr_field_re: sre,
        stderr_field_im: sim,
        degenerate,
        n_samples: kept.iter().map(|t| t.len()).sum(),
        n_batches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub alpha: f64,
    pub mean_abs: f64,
    pub stderr_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<ScalingPoint>,
}

/// Least-squares line through (log alpha, log <|a|>).
pub fn fit_power_law(points: &[ScalingPoint]) -> Result<(f64, f64)> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 sweep points, got {}", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.alpha.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_abs.ln()).collect();
    if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("alpha and <|a|> must be positive".into()));
    }
    let (slope, intercept) = least_squares_line(&xs, &ys)?;
    Ok((slope, intercept))
}

/// Ordinary least squares y = slope x + intercept.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let (mx, n) = mean_of(xs.iter().cloned());
    let (my, _) = mean_of(ys.iter().cloned());
    let mut sxy = NeumaierSum::default();
    let mut sxx = NeumaierSum::default();
    for (x, y) in xs.iter().zip(ys) {
        sxy.add((x - mx) * (y - my));
        sxx.add((x - mx) * (x - mx));
    }
    if n < 2 || sxx.value() == 0.0 {
        return Err(Error::Fit("abscissae are degenerate".into()));
    }
    let slope = sxy.value() / sxx.value();
    Ok((slope, my - slope * mx))
}

/// <|a|> above threshold for each alpha, and the fitted exponent.
pub fn scaling_sweep(
    beta: f64,
    d_las: f64,
    alphas: &[f64],
    cfg: &LangevinConfig,
) -> Result<ScalingFit> {
    if alphas.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 sweep points, got {}", alphas.len())));
    }
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(alpha > 0.0) {
            return Err(Error::Config(format!("sweep alphas must be positive, got {alpha}")));
        }
        let p = CanonicalLaserParams::new(alpha, beta, d_las)?;
        let set = simulate(&p, cfg)?;
        let abs: Vec<Vec<f64>> = set
            .trajectories
            .iter()
            .map(|t| {
                let skip = (cfg.burn_in_fraction * t.len() as f64).floor() as usize;
                t[skip..].iter().map(|a| a.norm()).collect()
            })
            .collect();
        let (mean_abs, stderr_abs) = if d_las == 0.0 {
            // deterministic: every trajectory sits on the same curve
            (mean_of(abs.iter().map(|v| *v.last().unwrap())).0, 0.0)
        } else {
            let (m, s, _) = batch_means(&abs)?;
            (m, s)
        };
        points.push(ScalingPoint { alpha, mean_abs, stderr_abs });
    }
    let (slope, intercept) = fit_power_law(&points)?;
    Ok(ScalingFit { slope, intercept, points })
}
