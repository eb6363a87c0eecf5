//! Dressed inverse propagator, threshold solver and classical-limit
//! comparators (Pierce cubic, continuum dispersion).

use crate::beam::{transition_frequency, BeamParameters, GaussianScales, OccupationProfile};
use crate::error::{Error, Result};
use crate::selfenergy::{
    sigma_k_discrete, sigma_k_gaussian, sigma_r_discrete, sigma_r_gaussian, Broadening,
};
use crate::specfun::{lagrange4, pv_integral_uniform};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Where Sigma^R comes from.
#[derive(Debug, Clone, Copy)]
pub enum SelfEnergyModel<'a> {
    /// No beam.
    Vacuum,
    /// Continuum closed forms.
    Gaussian(GaussianScales),
    /// Spectral sum over a profile.
    Discrete { profile: &'a OccupationProfile, broadening: Broadening },
}

impl SelfEnergyModel<'_> {
    pub fn method(&self) -> &'static str {
        match self {
            SelfEnergyModel::Vacuum => "vacuum",
            SelfEnergyModel::Gaussian(_) => "gaussian",
            SelfEnergyModel::Discrete { .. } => "discrete",
        }
    }

    pub fn sigma_r(&self, params: &BeamParameters, omega: f64) -> Result<Complex64> {
        match self {
            SelfEnergyModel::Vacuum => Ok(Complex64::new(0.0, 0.0)),
            SelfEnergyModel::Gaussian(s) => sigma_r_gaussian(params, s, omega),
            SelfEnergyModel::Discrete { profile, broadening } => {
                Ok(sigma_r_discrete(profile, params, omega, broadening))
            }
        }
    }

    pub fn sigma_k(&self, params: &BeamParameters, omega: f64) -> Complex64 {
        match self {
            SelfEnergyModel::Vacuum => Complex64::new(0.0, 0.0),
            SelfEnergyModel::Gaussian(s) => sigma_k_gaussian(params, s, omega),
            SelfEnergyModel::Discrete { profile, broadening } => {
                sigma_k_discrete(profile, params, omega, broadening)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedPropagatorSample {
    pub omega: f64,
    pub gamma_r: Complex64,
}

/// Gamma^R(omega) = (N / 2 pi)(omega - omega_eta) - Sigma^R(omega).
pub fn gamma_r(model: &SelfEnergyModel, params: &BeamParameters, omega: f64) -> Result<Complex64> {
    let free = params.n_electrons / (2.0 * PI) * (omega - params.omega_eta);
    Ok(Complex64::new(free, 0.0) - model.sigma_r(params, omega)?)
}

/// A zero of Re Gamma^R and what the solver went through to find it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub omega: f64,
    pub gamma_r: Complex64,
    /// |Re Gamma^R| at the returned root.
    pub residual: f64,
    pub iterations: usize,
    /// Sign changes seen while scanning the bracket; more than one means
    /// several roots and the one nearest the bracket midpoint was taken.
    pub sign_changes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSolution {
    pub omega_res: f64,
    pub y_res: f64,
    pub im_gamma_at_res: f64,
    pub growing: bool,
    pub residual: f64,
    pub iterations: usize,
    pub sign_changes: usize,
}

const SCAN_CELLS: usize = 512;
const BISECT_WIDTH: f64 = 1e-3;
const MAX_POLISH: usize = 200;

/// Root of Re Gamma^R(omega) = 0 in the bracket for any self-energy model.
pub fn solve_dispersion(
    model: &SelfEnergyModel,
    params: &BeamParameters,
    bracket: (f64, f64),
) -> Result<RootReport> {
    let f = |w: f64| gamma_r(model, params, w).map(|g| g.re);
    let tol = 1e-10 * params.n_electrons;
    let (omega, iterations, sign_changes) = find_root(f, bracket, tol)?;
    let g = gamma_r(model, params, omega)?;
    Ok(RootReport { omega, gamma_r: g, residual: g.re.abs(), iterations, sign_changes })
}

/// Threshold of the Gaussian beam: Re Gamma^R(omega_res) = 0 and the sign of
/// Im Gamma^R there.
pub fn solve_threshold(
    scales: &GaussianScales,
    params: &BeamParameters,
    bracket: (f64, f64),
) -> Result<ThresholdSolution> {
    let root = solve_dispersion(&SelfEnergyModel::Gaussian(*scales), params, bracket)?;
    let y = scales.y(root.omega);
    let s2 = scales.sigma_omega * scales.sigma_omega;
    let im = params.n_electrons * PI.sqrt() * y * (-y * y).exp() / s2;
    Ok(ThresholdSolution {
        omega_res: root.omega,
        y_res: y,
        im_gamma_at_res: im,
        growing: im < 0.0,
        residual: root.residual,
        iterations: root.iterations,
        sign_changes: root.sign_changes,
    })
}

// Scan, bisect the cell nearest the midpoint down to BISECT_WIDTH, then a
// safeguarded secant until |f| <= tol.
fn find_root(
    f: impl Fn(f64) -> Result<f64>,
    bracket: (f64, f64),
    tol: f64,
) -> Result<(f64, usize, usize)> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("invalid bracket ({lo}, {hi})")));
    }
    let step = (hi - lo) / SCAN_CELLS as f64;
    let xs: Vec<f64> = (0..=SCAN_CELLS)
        .map(|k| if k == SCAN_CELLS { hi } else { lo + step * k as f64 })
        .collect();
    let fs = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    for (x, v) in xs.iter().zip(&fs) {
        if !v.is_finite() {
            return Err(Error::RootNotFound(format!("dispersion function not finite at {x}")));
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut cells = Vec::new();
    for k in 0..SCAN_CELLS {
        if fs[k] == 0.0 {
            cells.push((xs[k], xs[k]));
        } else if fs[k] * fs[k + 1] < 0.0 {
            cells.push((xs[k], xs[k + 1]));
        }
    }
    if fs[SCAN_CELLS] == 0.0 {
        cells.push((hi, hi));
    }
    if cells.is_empty() {
        return Err(Error::RootNotFound(format!(
            "Re Gamma^R has no sign change on [{lo}, {hi}]"
        )));
    }
    let sign_changes = cells.len();
    let (mut a, mut b) = cells
        .iter()
        .cloned()
        .min_by(|p, q| {
            let dp = (0.5 * (p.0 + p.1) - mid).abs();
            let dq = (0.5 * (q.0 + q.1) - mid).abs();
            dp.partial_cmp(&dq).unwrap()
        })
        .unwrap();
    if a == b {
        return Ok((a, 0, sign_changes));
    }
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut iterations = 0;
    while b - a > BISECT_WIDTH {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        iterations += 1;
        if fm == 0.0 {
            return Ok((m, iterations, sign_changes));
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    let (mut best, mut fbest) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    // Illinois variant of regula falsi: halve the stale end's value when the
    // same end survives twice.
    let mut last_side = 0i8;
    while fbest.abs() > tol {
        if iterations >= MAX_POLISH {
            return Err(Error::RootNotFound(format!(
                "secant polish stalled at omega = {best} with residual {}",
                fbest.abs()
            )));
        }
        iterations += 1;
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() < fbest.abs() {
            best = x;
            fbest = fx;
        }
        if fx == 0.0 {
            break;
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
            if last_side == -1 {
                fa *= 0.5;
            }
            last_side = -1;
        } else {
            a = x;
            fa = fx;
            if last_side == 1 {
                fb *= 0.5;
            }
            last_side = 1;
        }
        if b - a <= f64::EPSILON * best.abs().max(1.0) {
            break;
        }
    }
    if fbest.abs() > tol {
        return Err(Error::RootNotFound(format!(
            "residual {} above tolerance {tol} at omega = {best}",
            fbest.abs()
        )));
    }
    Ok((best, iterations, sign_changes))
}

/// Growth flag Im Gamma^R < 0 on a frequency grid, Gaussian closed forms.
pub fn gain_sign_map(
    scales: &GaussianScales,
    params: &BeamParameters,
    omega_grid: &[f64],
) -> Result<Vec<(f64, bool)>> {
    let model = SelfEnergyModel::Gaussian(*scales);
    omega_grid
        .iter()
        .map(|&w| Ok((w, gamma_r(&model, params, w)?.im < 0.0)))
        .collect()
}

/// Roots of (omega - c1)(omega - c2)(omega - c3) = coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PierceCubic {
    pub roots: [Complex64; 3],
    pub unstable_root: Option<Complex64>,
    /// (N eta / m0)^(1/3); absent for m0 = 0.
    pub rho_eff: Option<f64>,
    pub centers: [f64; 3],
    pub coupling: f64,
}

impl PierceCubic {
    pub fn from_centers(centers: [f64; 3], coupling: f64, rho_eff: Option<f64>) -> Self {
        let roots = solve_shifted_cubic(centers, coupling);
        let unstable_root = roots
            .iter()
            .cloned()
            .filter(|r| r.im > 1e-12 * r.norm().max(1.0))
            .max_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        Self { roots, unstable_root, rho_eff, centers, coupling }
    }

    /// Im of the unstable root, 0 if every root is real or decaying.
    pub fn growth_rate(&self) -> f64 {
        self.unstable_root.map_or(0.0, |r| r.im)
    }

    /// |(omega - c1)(omega - c2)(omega - c3) - coupling| at a root.
    pub fn residual(&self, omega: Complex64) -> f64 {
        let [c1, c2, c3] = self.centers;
        ((omega - c1) * (omega - c2) * (omega - c3) - self.coupling).norm()
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|&r| self.residual(r)).fold(0.0, f64::max)
    }
}

/// Gamma^R = 0 for the cold beam at m0:
/// (omega - omega_eta)(omega - Omega_{m0})(omega - Omega_{m0-1}) = 2 pi.
///
/// The coupling is built from the propagator coefficients,
/// N eta (Omega_{m0} - Omega_{m0-1}) / (N / 2 pi), so N and eta cancel
/// numerically rather than by fiat.
pub fn pierce_cubic(m0: i64, params: &BeamParameters) -> PierceCubic {
    let upper = transition_frequency(m0, params);
    let lower = transition_frequency(m0 - 1, params);
    PierceCubic::from_centers(
        [params.omega_eta, upper, lower],
        cold_coupling(upper, lower, params),
        rho_eff(m0, params),
    )
}

/// The degenerate surrogate: all three centers at Omega_bar = Omega_{m0}.
pub fn pierce_degenerate(m0: i64, params: &BeamParameters) -> PierceCubic {
    let upper = transition_frequency(m0, params);
    let lower = transition_frequency(m0 - 1, params);
    PierceCubic::from_centers(
        [upper; 3],
        cold_coupling(upper, lower, params),
        rho_eff(m0, params),
    )
}

fn cold_coupling(upper: f64, lower: f64, params: &BeamParameters) -> f64 {
    let n = params.n_electrons;
    n * params.eta * (upper - lower) / (n / (2.0 * PI))
}

fn rho_eff(m0: i64, params: &BeamParameters) -> Option<f64> {
    (m0 != 0).then(|| (params.n_electrons * params.eta / (m0.unsigned_abs() as f64)).cbrt())
}

// Cardano on the cubic shifted to the mean of its centers, then Newton on the
// factored form.
fn solve_shifted_cubic(centers: [f64; 3], coupling: f64) -> [Complex64; 3] {
    let s = (centers[0] + centers[1] + centers[2]) / 3.0;
    let d = [centers[0] - s, centers[1] - s, centers[2] - s];
    let a = -(d[0] + d[1] + d[2]);
    let b = d[0] * d[1] + d[0] * d[2] + d[1] * d[2];
    let c = -d[0] * d[1] * d[2] - coupling;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0).sqrt();
    let mut u3 = Complex64::new(-q / 2.0, 0.0) + disc;
    let alt = Complex64::new(-q / 2.0, 0.0) - disc;
    if alt.norm() > u3.norm() {
        u3 = alt;
    }
    let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = if u3.norm() == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else {
        let u = u3.cbrt();
        let v = Complex64::new(-p / 3.0, 0.0) / u;
        [u + v, w * u + w.conj() * v, w.conj() * u + w * v]
    };
    for r in roots.iter_mut() {
        *r -= a / 3.0;
        for _ in 0..8 {
            let (f, df) = factored(*r, d, coupling);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            *r -= step;
            if step.norm() <= 1e-17 * r.norm().max(1.0) {
                break;
            }
        }
    }
    let mut out = roots.map(|r| r + s);
    out.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    out
}

fn factored(x: Complex64, d: [f64; 3], k: f64) -> (Complex64, Complex64) {
    let (a, b, c) = (x - d[0], x - d[1], x - d[2]);
    (a * b * c - k, a * b + a * c + b * c)
}

/// Momentum distribution f(p) sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumDistribution {
    pub p_first: f64,
    pub dp: f64,
    pub values: Vec<f64>,
}

impl MomentumDistribution {
    pub fn new(p_first: f64, dp: f64, values: Vec<f64>) -> Result<Self> {
        if !(dp > 0.0) || values.len() < 4 {
            return Err(Error::Config("momentum grid needs dp > 0 and at least 4 points".into()));
        }
        Ok(Self { p_first, dp, values })
    }

    /// f(p) = n(m)/sqrt(eta) with p = m/sqrt(eta) for a Gaussian beam.
    ///
    /// Centered at p0 = sqrt(eta) Omega_0, so p/sqrt(eta) lines up with the
    /// transition frequencies; the grid covers +-`half_width` standard
    /// deviations with `n_points` samples.
    pub fn gaussian(
        scales: &GaussianScales,
        params: &BeamParameters,
        n_points: usize,
        half_width: f64,
    ) -> Result<Self> {
        let se = params.eta.sqrt();
        let sigma_m = params.eta * scales.sigma_omega;
        let sigma_p = sigma_m / se;
        let p0 = se * scales.omega_0;
        let p_first = p0 - half_width * sigma_p;
        let dp = 2.0 * half_width * sigma_p / (n_points as f64 - 1.0);
        let norm = 1.0 / ((2.0 * PI).sqrt() * sigma_m);
        let values = (0..n_points)
            .map(|k| {
                let x = (p_first + dp * k as f64 - p0) / sigma_p;
                norm * (-0.5 * x * x).exp() / se
            })
            .collect();
        Self::new(p_first, dp, values)
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p_first + self.dp * k as f64
    }

    /// Midpoint of the grid.
    pub fn center(&self) -> f64 {
        self.p_first + 0.5 * self.dp * (self.values.len() - 1) as f64
    }

    /// f(p) -> f(2 p_bar - p) about the grid center.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { values, ..*self }
    }

    fn derivative(&self) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        let h = self.dp;
        (0..n)
            .map(|k| {
                if k == 0 {
                    (v[1] - v[0]) / h
                } else if k == n - 1 {
                    (v[n - 1] - v[n - 2]) / h
                } else {
                    (v[k + 1] - v[k - 1]) / (2.0 * h)
                }
            })
            .collect()
    }
}

/// eta^(3/2) int dp f'(p) / (omega - p/sqrt(eta) + i0+): real part by
/// principal value, imaginary part from the pole.
pub fn continuum_integral_term(
    f_spec: &MomentumDistribution,
    params: &BeamParameters,
    omega: f64,
) -> Result<Complex64> {
    let se = params.eta.sqrt();
    let p_star = se * omega;
    let g = f_spec.derivative();
    let pv = pv_integral_uniform(f_spec.p_first, f_spec.dp, &g, p_star)?;
    let g_star = lagrange4(&g, (p_star - f_spec.p_first) / f_spec.dp);
    let e32 = params.eta * se;
    Ok(Complex64::new(-e32 * se * pv, -PI * e32 * se * g_star))
}

/// (omega - omega_eta)/(2 pi) plus the continuum integral term; the
/// classical dispersion root is a zero of its real part.
pub fn continuum_dispersion_residual(
    f_spec: &MomentumDistribution,
    params: &BeamParameters,
    omega: f64,
) -> Result<Complex64> {
    let free = (omega - params.omega_eta) / (2.0 * PI);
    Ok(free + continuum_integral_term(f_spec, params, omega)?)
}

/// Zero of Re of the continuum residual in the bracket.
pub fn solve_continuum_dispersion(
    f_spec: &MomentumDistribution,
    params: &BeamParameters,
    bracket: (f64, f64),
) -> Result<f64> {
    let f = |w: f64| continuum_dispersion_residual(f_spec, params, w).map(|r| r.re);
    find_root(f, bracket, 1e-12).map(|(w, _, _)| w)
}
