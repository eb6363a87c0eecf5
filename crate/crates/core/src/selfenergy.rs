//! Retarded, advanced and Keldysh self-energies of the beam.
//!
//! Discrete spectral sums over the occupied transitions, and the Gaussian
//! continuum closed forms they converge to.

use crate::beam::{transition_frequency, BeamParameters, GaussianScales, OccupationProfile};
use crate::error::{Error, Result};
use crate::specfun::dawson;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Regularization {
    /// 1/(x + i eps).
    #[default]
    Lorentzian,
    /// 2/(x + i eps) - 1/(x + 2i eps): cancels the O(eps) smearing of a
    /// single Lorentzian while staying analytic in the upper half plane.
    Extrapolated,
}

/// Finite replacement for i0+ in the spectral denominators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Broadening {
    pub epsilon: f64,
    pub kind: Regularization,
}

impl Broadening {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_kind(epsilon, Regularization::Lorentzian)
    }

    pub fn extrapolated(epsilon: f64) -> Result<Self> {
        Self::with_kind(epsilon, Regularization::Extrapolated)
    }

    pub fn with_kind(epsilon: f64, kind: Regularization) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("broadening epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon, kind })
    }

    /// eps = 2/eta, two level spacings.
    pub fn default_for(params: &BeamParameters) -> Self {
        Self { epsilon: 2.0 / params.eta, kind: Regularization::Lorentzian }
    }

    /// Regularized resolvent 1/(x + i0+).
    pub fn resolvent(&self, x: f64) -> Complex64 {
        let e = self.epsilon;
        match self.kind {
            Regularization::Lorentzian => Complex64::new(x, e).inv(),
            Regularization::Extrapolated => {
                2.0 * Complex64::new(x, e).inv() - Complex64::new(x, 2.0 * e).inv()
            }
        }
    }

    /// The matching stand-in for pi delta(x): -Im of the resolvent.
    pub fn lorentzian(&self, x: f64) -> f64 {
        let e = self.epsilon;
        match self.kind {
            Regularization::Lorentzian => e / (x * x + e * e),
            Regularization::Extrapolated => {
                2.0 * e / (x * x + e * e) - 2.0 * e / (x * x + 4.0 * e * e)
            }
        }
    }

    /// Warnings for a broadening that does not sit between the level
    /// spacing and the beam width.
    pub fn warnings(&self, params: &BeamParameters, sigma_omega: Option<f64>) -> Vec<String> {
        let mut out = Vec::new();
        if self.epsilon * params.eta < 3.0 {
            out.push(format!(
                "broadening {} is less than 3 level spacings (1/eta = {})",
                self.epsilon,
                1.0 / params.eta
            ));
        }
        if let Some(s) = sigma_omega {
            if s / self.epsilon < 5.0 {
                out.push(format!(
                    "beam width sigma_omega = {s} is less than 5 broadenings ({})",
                    self.epsilon
                ));
            }
        }
        out
    }
}

/// Sigma^R, Sigma^A, Sigma^K at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergySample {
    pub omega: f64,
    pub sigma_r: Complex64,
    pub sigma_a: Complex64,
    pub sigma_k: Complex64,
}

impl SelfEnergySample {
    pub fn discrete(
        profile: &OccupationProfile,
        params: &BeamParameters,
        omega: f64,
        broadening: &Broadening,
    ) -> Self {
        let sigma_r = sigma_r_discrete(profile, params, omega, broadening);
        Self {
            omega,
            sigma_r,
            sigma_a: sigma_r.conj(),
            sigma_k: sigma_k_discrete(profile, params, omega, broadening),
        }
    }

    pub fn gaussian(params: &BeamParameters, scales: &GaussianScales, omega: f64) -> Result<Self> {
        let sigma_r = sigma_r_gaussian(params, scales, omega)?;
        Ok(Self {
            omega,
            sigma_r,
            sigma_a: sigma_r.conj(),
            sigma_k: sigma_k_gaussian(params, scales, omega),
        })
    }
}

/// N eta sum_m (n_m - n_{m+1}) / (omega - Omega_m + i0+).
pub fn sigma_r_discrete(
    profile: &OccupationProfile,
    params: &BeamParameters,
    omega: f64,
    broadening: &Broadening,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for m in profile.transition_range() {
        let d = profile.n(m) - profile.n(m + 1);
        if d != 0.0 {
            acc += d * broadening.resolvent(omega - transition_frequency(m, params));
        }
    }
    params.n_electrons * params.eta * acc
}

/// Complex conjugate of the retarded self-energy.
pub fn sigma_a_discrete(
    profile: &OccupationProfile,
    params: &BeamParameters,
    omega: f64,
    broadening: &Broadening,
) -> Complex64 {
    sigma_r_discrete(profile, params, omega, broadening).conj()
}

/// -i N eta sum_m S_m 2 L(omega - Omega_m) with
/// S_m = n_m + n_{m+1} - 2 n_m n_{m+1}.
pub fn sigma_k_discrete(
    profile: &OccupationProfile,
    params: &BeamParameters,
    omega: f64,
    broadening: &Broadening,
) -> Complex64 {
    keldysh_sum(profile, params, omega, broadening, |a, b| a + b - 2.0 * a * b)
}

/// Dilute limit of the Keldysh sum: S_m ~ n_m + n_{m+1}.
pub fn sigma_k_dilute(
    profile: &OccupationProfile,
    params: &BeamParameters,
    omega: f64,
    broadening: &Broadening,
) -> Complex64 {
    keldysh_sum(profile, params, omega, broadening, |a, b| a + b)
}

fn keldysh_sum(
    profile: &OccupationProfile,
    params: &BeamParameters,
    omega: f64,
    broadening: &Broadening,
    weight: impl Fn(f64, f64) -> f64,
) -> Complex64 {
    let mut acc = 0.0;
    for m in profile.transition_range() {
        let s = weight(profile.n(m), profile.n(m + 1));
        if s != 0.0 {
            acc += s * 2.0 * broadening.lorentzian(omega - transition_frequency(m, params));
        }
    }
    Complex64::new(0.0, -params.n_electrons * params.eta * acc)
}

/// (N/sigma^2)(2yF(y) - 1) - i N sqrt(pi) y exp(-y^2) / sigma^2.
pub fn sigma_r_gaussian(
    params: &BeamParameters,
    scales: &GaussianScales,
    omega: f64,
) -> Result<Complex64> {
    let y = scales.y(omega);
    let s2 = scales.sigma_omega * scales.sigma_omega;
    let n = params.n_electrons;
    let re = n / s2 * (2.0 * y * dawson(y)? - 1.0);
    let im = -n * PI.sqrt() * y * (-y * y).exp() / s2;
    Ok(Complex64::new(re, im))
}

/// -i 4 sqrt(2 pi) N eta exp(-y^2) / sigma.
pub fn sigma_k_gaussian(params: &BeamParameters, scales: &GaussianScales, omega: f64) -> Complex64 {
    let y = scales.y(omega);
    let peak = 4.0 * (2.0 * PI).sqrt() * params.n_electrons * params.eta / scales.sigma_omega;
    Complex64::new(0.0, -peak * (-y * y).exp())
}

/// Sigma^K / (2i Im Sigma^R) = 2 sqrt2 eta sigma / y.
pub fn effective_occupation(
    params: &BeamParameters,
    scales: &GaussianScales,
    omega: f64,
) -> Result<f64> {
    let y = scales.y(omega);
    if !y.is_finite() {
        return Err(Error::Domain(format!("effective_occupation: non-finite y at omega = {omega}")));
    }
    if y.abs() <= 1e-8 {
        return Err(Error::Singularity(format!(
            "effective occupation diverges at the distribution center (y = {y})"
        )));
    }
    Ok(2.0 * std::f64::consts::SQRT_2 * params.eta * scales.sigma_omega / y)
}
