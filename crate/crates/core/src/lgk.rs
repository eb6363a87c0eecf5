//! Low-frequency Landau-Ginzburg-Keldysh parameters and the map to the
//! canonical laser equation.
//!
//! Expanding around a frame frequency pt,
//! Gamma^R(pt + nu) ~ z_inv (nu + delta_omega + i kappa), so kappa < 0 is gain.
//! The effective equation of motion is
//! Z i db/dt = (r - i kappa) b + lambda |b|^2 b + xi, with Z = 1/z_inv and
//! r = Re(Z) delta_omega.

use crate::beam::BeamParameters;
use crate::dispersion::{gamma_r, SelfEnergyModel};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LGKParameters {
    pub z_inv: Complex64,
    pub z: Complex64,
    pub delta_omega: f64,
    pub kappa: f64,
    pub r: f64,
    pub d_noise: f64,
    pub lambda_c: Complex64,
    /// arg(Z), radians.
    pub z_phase: f64,
    pub expansion_point: f64,
    pub fd_step: f64,
    pub method: String,
}

impl LGKParameters {
    /// Assemble from Z and the rates directly, r derived.
    pub fn from_parts(
        z: Complex64,
        delta_omega: f64,
        kappa: f64,
        d_noise: f64,
        lambda_c: Complex64,
    ) -> Result<Self> {
        if z.norm() == 0.0 || !z.is_finite() {
            return Err(Error::DegenerateExpansion(format!("Z = {z} is not invertible")));
        }
        if !(d_noise >= 0.0) {
            return Err(Error::Config(format!("noise strength must be non-negative, got {d_noise}")));
        }
        Ok(Self {
            z_inv: z.inv(),
            z,
            delta_omega,
            kappa,
            r: z.re * delta_omega,
            d_noise,
            lambda_c,
            z_phase: z.arg(),
            expansion_point: f64::NAN,
            fd_step: f64::NAN,
            method: "manual".into(),
        })
    }
}

/// alpha a - beta |a|^2 a + noise of strength d_las, in a frame rotating at
/// frame_shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalLaserParams {
    pub alpha: f64,
    pub beta: f64,
    pub d_las: f64,
    pub frame_shift: f64,
}

impl CanonicalLaserParams {
    /// beta = 0 is allowed here (linear runs); only the LGK map insists on
    /// saturation.
    pub fn new(alpha: f64, beta: f64, d_las: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be finite, got {alpha}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be non-negative, got {beta}")));
        }
        if !(d_las >= 0.0) || !d_las.is_finite() {
            return Err(Error::Config(format!("d_las must be non-negative, got {d_las}")));
        }
        Ok(Self { alpha, beta, d_las, frame_shift: 0.0 })
    }
}

/// Expand Gamma^R around `expansion_point`.
///
/// z_inv is the central difference of Gamma^R, Richardson-extrapolated from
/// steps h and h/2. `fd_step` defaults to 1e-3 sigma_Omega for the Gaussian
/// model and 1e-3 otherwise.
pub fn extract_lgk(
    model: &SelfEnergyModel,
    params: &BeamParameters,
    expansion_point: f64,
    fd_step: Option<f64>,
    lambda_c: Complex64,
) -> Result<LGKParameters> {
    let h = match (fd_step, model) {
        (Some(h), _) => h,
        (None, SelfEnergyModel::Gaussian(s)) => 1e-3 * s.sigma_omega,
        (None, _) => 1e-3,
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(format!("fd_step must be positive, got {h}")));
    }
    if let SelfEnergyModel::Gaussian(s) = model {
        if h > 0.01 * s.sigma_omega {
            return Err(Error::Config(format!(
                "fd_step {h} exceeds 0.01 sigma_omega = {}",
                0.01 * s.sigma_omega
            )));
        }
    }
    let g = |w: f64| gamma_r(model, params, w);
    let pt = expansion_point;
    let central = |h: f64| -> Result<Complex64> { Ok((g(pt + h)? - g(pt - h)?) / (2.0 * h)) };
    let z_inv = (4.0 * central(0.5 * h)? - central(h)?) / 3.0;
    if !(z_inv.norm() >= 1e-12 * params.n_electrons) {
        return Err(Error::DegenerateExpansion(format!(
            "|dGamma/domega| = {} at omega = {pt}",
            z_inv.norm()
        )));
    }
    let q = g(pt)? / z_inv;
    let z = z_inv.inv();
    let d_noise = 0.5 * model.sigma_k(params, pt).norm();
    Ok(LGKParameters {
        z_inv,
        z,
        delta_omega: q.re,
        kappa: q.im,
        r: z.re * q.re,
        d_noise,
        lambda_c,
        z_phase: z.arg(),
        expansion_point: pt,
        fd_step: h,
        method: model.method().into(),
    })
}

/// |b| = sqrt(max(0, -r / Re lambda)).
pub fn stationary_amplitude(p: &LGKParameters) -> Result<f64> {
    if p.lambda_c.re == 0.0 {
        return Err(Error::UndefinedSaturation("Re lambda = 0".into()));
    }
    Ok((-p.r / p.lambda_c.re).max(0.0).sqrt())
}

/// Read off alpha, beta, D_las and the frame rotation from
/// db/dt = (-i r/Z - kappa/Z) b - (i lambda/Z)|b|^2 b - i xi/Z.
pub fn to_canonical(p: &LGKParameters) -> Result<CanonicalLaserParams> {
    let z = p.z;
    if z.re == 0.0 {
        return Err(Error::DegenerateExpansion("Re Z = 0".into()));
    }
    let i = Complex64::i();
    let alpha = -(p.kappa / z).re;
    let frame_shift = (p.r / z).re;
    let beta = (i * p.lambda_c / z).re;
    let d_las = p.d_noise / z.norm_sqr();
    if !(beta > 0.0) {
        return Err(Error::NonSaturating(format!(
            "cubic coefficient Re(i lambda / Z) = {beta} does not saturate"
        )));
    }
    Ok(CanonicalLaserParams { alpha, beta, d_las, frame_shift })
}
