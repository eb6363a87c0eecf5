//! Classical saddle-point dynamics of the beam and the field in mode space.
//!
//!   dc_m/dt = -i eps_m c_m + sqrt(eta) (b* c_{m+1} - b c_{m-1})
//!   db/dt   =  i omega_eta b + 2 pi sqrt(eta) J,    J = sum_m c_m* c_{m+1}
//!
//! The 2 pi comes from the N/(2 pi) normalization of the field action and
//! makes d/dt (|b|^2 / 2 pi) = 2 sqrt(eta) Re(b* J). The field rotates as
//! exp(+i omega_eta t), so the small-signal dynamics around a cold beam at m0
//! obey (w + omega_eta)(w - Omega_{m0})(w - Omega_{m0-1}) = 2 pi in the
//! exp(-i w t) convention: the propagator cubic with omega_eta -> -omega_eta.
//!
//! Integration is classical RK4 in the interaction picture: the diagonal
//! rotations are applied exactly and RK4 only sees the coupling.

use crate::beam::{mode_energy, BeamParameters};
use crate::error::{Error, Result};
use crate::langevin::least_squares_line;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub time: f64,
    pub m_min: i64,
    pub coeffs: Vec<Complex64>,
    pub field: Complex64,
}

impl MeanFieldState {
    pub fn new(time: f64, m_min: i64, coeffs: Vec<Complex64>, field: Complex64) -> Result<Self> {
        if coeffs.len() < 3 {
            return Err(Error::Config("mean-field window needs at least 3 modes".into()));
        }
        let s = Self { time, m_min, coeffs, field };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!("mode amplitudes have norm {norm}, expected 1")));
        }
        Ok(s)
    }

    /// All population in m0 apart from a coherence c_{m0}* c_{m0+1} =
    /// `seed_bunching`, plus a field b0.
    pub fn cold_beam(
        m0: i64,
        window: (i64, i64),
        field: Complex64,
        seed_bunching: Complex64,
    ) -> Result<Self> {
        let (m_min, m_max) = window;
        if !(m_min < m0 && m0 + 1 < m_max) {
            return Err(Error::Config(format!(
                "window [{m_min}, {m_max}] must contain m0 - 1 ..= m0 + 2 for m0 = {m0}"
            )));
        }
        let s2 = seed_bunching.norm_sqr();
        if s2 > 0.25 {
            return Err(Error::Config(format!(
                "seed_bunching |J| = {} exceeds 1/2",
                seed_bunching.norm()
            )));
        }
        let p0 = 0.5 * (1.0 + (1.0 - 4.0 * s2).sqrt());
        let c0 = p0.sqrt();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (m_max - m_min + 1) as usize];
        coeffs[(m0 - m_min) as usize] = Complex64::new(c0, 0.0);
        coeffs[(m0 + 1 - m_min) as usize] = seed_bunching / c0;
        Self::new(0.0, m_min, coeffs, field)
    }

    pub fn m_max(&self) -> i64 {
        self.m_min + self.coeffs.len() as i64 - 1
    }

    pub fn c(&self, m: i64) -> Complex64 {
        if m < self.m_min || m > self.m_max() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m - self.m_min) as usize]
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// J = sum_m c_m* c_{m+1}.
    pub fn current(&self) -> Complex64 {
        current_of(&self.coeffs)
    }

    /// c_m -> c_m e^{i m theta}, b -> b e^{i theta}.
    pub fn gauge_shifted(&self, theta: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * Complex64::from_polar(1.0, (self.m_min + k as i64) as f64 * theta))
            .collect();
        Self { coeffs, field: self.field * Complex64::from_polar(1.0, theta), ..*self }
    }
}

fn current_of(c: &[Complex64]) -> Complex64 {
    c.windows(2).map(|w| w[0].conj() * w[1]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub window: (i64, i64),
    pub seed_bunching: Complex64,
    pub record_stride: usize,
    /// Multiplies every sqrt(eta) coupling term; 0 switches the beam-field
    /// interaction off.
    pub coupling: f64,
}

impl MeanFieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 || self.record_stride == 0 {
            return Err(Error::Config("n_steps and record_stride must be positive".into()));
        }
        if self.window.1 - self.window.0 < 2 {
            return Err(Error::Config("window must hold at least 3 modes".into()));
        }
        Ok(())
    }

    pub fn initial_state(&self, m0: i64, field: Complex64) -> Result<MeanFieldState> {
        MeanFieldState::cold_beam(m0, self.window, field, self.seed_bunching)
    }
}

/// Time derivative (dc_m/dt, db/dt) at the given state, with the coupling
/// scaled by `coupling`.
pub fn derivative_scaled(
    state: &MeanFieldState,
    params: &BeamParameters,
    coupling: f64,
) -> (Vec<Complex64>, Complex64) {
    let i = Complex64::i();
    let mut dc: Vec<Complex64> = (0..state.coeffs.len())
        .map(|k| -i * mode_energy(state.m_min + k as i64, params) * state.coeffs[k])
        .collect();
    let (cc, db) = coupling_terms(&state.coeffs, state.field, params.eta.sqrt() * coupling);
    for (d, c) in dc.iter_mut().zip(cc) {
        *d += c;
    }
    (dc, i * params.omega_eta * state.field + db)
}

/// The saddle-point equations at full coupling.
pub fn derivative(state: &MeanFieldState, params: &BeamParameters) -> (Vec<Complex64>, Complex64) {
    derivative_scaled(state, params, 1.0)
}

// Off-diagonal part: g (b* c_{m+1} - b c_{m-1}) and 2 pi g J.
fn coupling_terms(c: &[Complex64], b: Complex64, g: f64) -> (Vec<Complex64>, Complex64) {
    let n = c.len();
    let zero = Complex64::new(0.0, 0.0);
    let bc = b.conj();
    let dc = (0..n)
        .map(|k| {
            let up = if k + 1 < n { c[k + 1] } else { zero };
            let down = if k > 0 { c[k - 1] } else { zero };
            g * (bc * up - b * down)
        })
        .collect();
    (dc, 2.0 * PI * g * current_of(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldRecord {
    pub t: f64,
    pub b: Complex64,
    pub j: Complex64,
    pub norm: f64,
    /// |b|^2/(2 pi) - |b_0|^2/(2 pi) - int 2 g sqrt(eta) Re(b* J) dt; zero up
    /// to integrator error.
    pub energy_balance: f64,
}

/// Fixed-step interaction-picture RK4.
///
/// Aborts when the norm drifts by more than 1e-6 or a boundary mode of the
/// window exceeds 1e-8 in modulus.
pub fn integrate(
    initial: &MeanFieldState,
    cfg: &MeanFieldConfig,
    params: &BeamParameters,
) -> Result<Vec<MeanFieldRecord>> {
    cfg.validate()?;
    if (initial.m_min, initial.m_max()) != cfg.window {
        return Err(Error::Config(format!(
            "state window [{}, {}] differs from configured window {:?}",
            initial.m_min,
            initial.m_max(),
            cfg.window
        )));
    }
    let h = cfg.dt;
    let g = params.eta.sqrt() * cfg.coupling;
    let n = initial.coeffs.len();
    let half: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -mode_energy(initial.m_min + k as i64, params) * 0.5 * h))
        .collect();
    let half_b = Complex64::from_polar(1.0, params.omega_eta * 0.5 * h);

    let mut c = initial.coeffs.clone();
    let mut b = initial.field;
    let norm0 = initial.norm();
    let energy0 = b.norm_sqr() / (2.0 * PI);
    let work_rate = |c: &[Complex64], b: Complex64| 2.0 * g * (b.conj() * current_of(c)).re;
    let mut work = 0.0;
    let mut rate = work_rate(&c, b);

    let record = |t: f64, c: &[Complex64], b: Complex64, work: f64| MeanFieldRecord {
        t,
        b,
        j: current_of(c),
        norm: c.iter().map(|x| x.norm_sqr()).sum(),
        energy_balance: b.norm_sqr() / (2.0 * PI) - energy0 - work,
    };
    let mut out = vec![record(initial.time, &c, b, 0.0)];

    let rot = |v: &[Complex64], e: &[Complex64]| -> Vec<Complex64> {
        v.iter().zip(e).map(|(x, y)| x * y).collect()
    };
    let axpy = |x: &[Complex64], a: f64, y: &[Complex64]| -> Vec<Complex64> {
        x.iter().zip(y).map(|(p, q)| p + a * q).collect()
    };

    for step in 1..=cfg.n_steps {
        let (k1c, k1b) = coupling_terms(&c, b, g);
        let ec = rot(&c, &half);
        let eb = b * half_b;
        let ek1c = rot(&k1c, &half);
        let ek1b = k1b * half_b;

        let ac = axpy(&ec, 0.5 * h, &ek1c);
        let ab = eb + 0.5 * h * ek1b;
        let (k2c, k2b) = coupling_terms(&ac, ab, g);

        let bc = axpy(&ec, 0.5 * h, &k2c);
        let bb = eb + 0.5 * h * k2b;
        let (k3c, k3b) = coupling_terms(&bc, bb, g);

        let cc = axpy(&rot(&ec, &half), h, &rot(&k3c, &half));
        let cb = eb * half_b + h * k3b * half_b;
        let (k4c, k4b) = coupling_terms(&cc, cb, g);

        let e2c = rot(&rot(&c, &half), &half);
        let e2k1 = rot(&ek1c, &half);
        let mid: Vec<Complex64> =
            k2c.iter().zip(&k3c).map(|(x, y)| (x + y) * 2.0).collect();
        let mid = rot(&mid, &half);
        c = (0..n)
            .map(|k| e2c[k] + h / 6.0 * (e2k1[k] + mid[k] + k4c[k]))
            .collect();
        b = eb * half_b + h / 6.0 * (ek1b * half_b + 2.0 * (k2b + k3b) * half_b + k4b);

        let t = initial.time + h * step as f64;
        let new_rate = work_rate(&c, b);
        work += 0.5 * h * (rate + new_rate);
        rate = new_rate;

        let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        if !norm.is_finite() || !b.is_finite() {
            return Err(Error::NormDrift { drift: f64::INFINITY, t });
        }
        if (norm - norm0).abs() > 1e-6 {
            return Err(Error::NormDrift { drift: (norm - norm0).abs(), t });
        }
        for (k, m) in [(0, initial.m_min), (n - 1, initial.m_min + n as i64 - 1)] {
            if c[k].norm() > 1e-8 {
                return Err(Error::WindowLeak { m, value: c[k].norm(), t });
            }
        }
        if step % cfg.record_stride == 0 {
            out.push(record(t, &c, b, work));
        }
    }
    Ok(out)
}

/// Least-squares slope of ln|b| against t over [t0, t1].
///
/// With `saturation` given, a window reaching 1% of it is rejected as no
/// longer exponential.
pub fn measure_growth(
    series: &[(f64, f64)],
    fit_window: (f64, f64),
    saturation: Option<f64>,
) -> Result<f64> {
    let (t0, t1) = fit_window;
    let pts: Vec<(f64, f64)> =
        series.iter().cloned().filter(|&(t, _)| t >= t0 && t <= t1).collect();
    if pts.len() < 2 {
        return Err(Error::Fit(format!("fewer than 2 samples in [{t0}, {t1}]")));
    }
    if let Some(&(t, v)) = pts.iter().find(|&&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Fit(format!("|b| = {v} at t = {t} is not positive")));
    }
    if let Some(sat) = saturation {
        if let Some(&(t, v)) = pts.iter().find(|&&(_, v)| v > 0.01 * sat) {
            return Err(Error::Fit(format!(
                "|b| = {v} at t = {t} is above 1% of saturation {sat}"
            )));
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    least_squares_line(&xs, &ys).map(|(s, _)| s)
}
