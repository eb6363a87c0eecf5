//! Beam constants, level structure and mode-occupation profiles.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimensionless beam constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParameters {
    /// Mass parameter of the matter field on the circle.
    pub eta: f64,
    /// Scale factor N in front of the action.
    pub n_electrons: f64,
    /// Free frequency of the radiation mode.
    pub omega_eta: f64,
}

impl BeamParameters {
    pub fn new(eta: f64, n_electrons: f64, omega_eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::Config(format!("eta must be positive, got {eta}")));
        }
        if !(n_electrons > 0.0) || !n_electrons.is_finite() {
            return Err(Error::Config(format!(
                "n_electrons must be positive, got {n_electrons}"
            )));
        }
        if !omega_eta.is_finite() {
            return Err(Error::Config(format!("omega_eta must be finite, got {omega_eta}")));
        }
        Ok(Self { eta, n_electrons, omega_eta })
    }
}

/// SI inputs for the Pierce-type coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalBeamInputs {
    /// Beam current, A.
    pub current: f64,
    /// Undulator period, m.
    pub undulator_wavelength: f64,
    pub lorentz_factor: f64,
    /// Radiation angular frequency, rad/s.
    pub radiation_frequency: f64,
}

/// How the sums over n_m - n_{m+1} treat the ends of the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EdgeMode {
    /// Empty modes outside the window; the edge transitions contribute.
    #[default]
    Vacuum,
    /// The window is a cut through a flat occupation; only interior
    /// transitions contribute.
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    Gaussian { m0: i64, sigma_m: f64 },
    Cold { m0: i64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationProfile {
    m_min: i64,
    m_max: i64,
    values: Vec<f64>,
    kind: ProfileKind,
    edges: EdgeMode,
}

impl OccupationProfile {
    /// Validated profile over [m_min, m_min + values.len() - 1].
    ///
    /// An all-zero profile (no beam) is accepted; anything else must be a
    /// probability distribution.
    pub fn custom(m_min: i64, values: Vec<f64>, edges: EdgeMode) -> Result<Self> {
        Self::build(m_min, values, ProfileKind::Custom, edges)
    }

    fn build(m_min: i64, values: Vec<f64>, kind: ProfileKind, edges: EdgeMode) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Config("profile needs m_min < m_max".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(-1e-15..=1.0 + 1e-15).contains(&v) {
                return Err(Error::Config(format!(
                    "occupation n_{} = {v} outside [0, 1]",
                    m_min + i as i64
                )));
            }
        }
        let total: f64 = values.iter().sum();
        let empty = values.iter().all(|&v| v == 0.0);
        if !empty && (total - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("occupations sum to {total}, expected 1")));
        }
        let m_max = m_min + values.len() as i64 - 1;
        Ok(Self { m_min, m_max, values, kind, edges })
    }

    /// No beam at all: every self-energy vanishes.
    pub fn empty(m_min: i64, m_max: i64) -> Result<Self> {
        if m_max <= m_min {
            return Err(Error::Config("profile needs m_min < m_max".into()));
        }
        Self::custom(m_min, vec![0.0; (m_max - m_min + 1) as usize], EdgeMode::Vacuum)
    }

    /// Flat occupations on [m_min, m_max], read as a cut through a plateau.
    pub fn uniform(m_min: i64, m_max: i64) -> Result<Self> {
        if m_max <= m_min {
            return Err(Error::Config("profile needs m_min < m_max".into()));
        }
        let len = (m_max - m_min + 1) as usize;
        Self::custom(m_min, vec![1.0 / len as f64; len], EdgeMode::Plateau)
    }

    pub fn m_min(&self) -> i64 {
        self.m_min
    }

    pub fn m_max(&self) -> i64 {
        self.m_max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn edges(&self) -> EdgeMode {
        self.edges
    }

    /// n_m, zero outside the window.
    pub fn n(&self, m: i64) -> f64 {
        if m < self.m_min || m > self.m_max {
            0.0
        } else {
            self.values[(m - self.m_min) as usize]
        }
    }

    /// Range of m for which the transition m -> m+1 enters the sums.
    pub fn transition_range(&self) -> std::ops::RangeInclusive<i64> {
        match self.edges {
            EdgeMode::Vacuum => (self.m_min - 1)..=self.m_max,
            EdgeMode::Plateau => self.m_min..=(self.m_max - 1),
        }
    }

    pub fn max_occupation(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// CSV body with columns m, n_m.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n_m\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.m_min + i as i64, v));
        }
        out
    }
}

/// Center and width of a Gaussian beam in transition-frequency space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianScales {
    pub omega_0: f64,
    pub sigma_omega: f64,
}

impl GaussianScales {
    pub fn new(omega_0: f64, sigma_omega: f64) -> Result<Self> {
        if !(sigma_omega > 0.0) || !sigma_omega.is_finite() || !omega_0.is_finite() {
            return Err(Error::Config(format!(
                "gaussian scales need finite omega_0 and sigma_omega > 0, got ({omega_0}, {sigma_omega})"
            )));
        }
        Ok(Self { omega_0, sigma_omega })
    }

    /// Omega_0 = Omega_{m0}, sigma_Omega = sigma_m / eta.
    pub fn from_mode_width(m0: i64, sigma_m: f64, params: &BeamParameters) -> Result<Self> {
        Self::new(transition_frequency(m0, params), sigma_m / params.eta)
    }

    /// y = (omega - Omega_0) / (sqrt2 sigma_Omega).
    pub fn y(&self, omega: f64) -> f64 {
        (omega - self.omega_0) / (std::f64::consts::SQRT_2 * self.sigma_omega)
    }

    pub fn omega_at(&self, y: f64) -> f64 {
        self.omega_0 + std::f64::consts::SQRT_2 * self.sigma_omega * y
    }
}

/// epsilon_m = m^2 / (2 eta).
pub fn mode_energy(m: i64, params: &BeamParameters) -> f64 {
    let m = m as f64;
    m * m / (2.0 * params.eta)
}

/// Omega_m = epsilon_{m+1} - epsilon_m = (2m+1) / (2 eta).
pub fn transition_frequency(m: i64, params: &BeamParameters) -> f64 {
    (2 * m + 1) as f64 / (2.0 * params.eta)
}

/// Normalized Gaussian occupations on [m0 - W, m0 + W].
pub fn gaussian_profile(m0: i64, sigma_m: f64, window_halfwidth: i64) -> Result<OccupationProfile> {
    if !(sigma_m > 0.0) || !sigma_m.is_finite() {
        return Err(Error::Config(format!("sigma_m must be positive, got {sigma_m}")));
    }
    if (window_halfwidth as f64) < 8.0 * sigma_m || window_halfwidth < 1 {
        return Err(Error::Config(format!(
            "window half-width {window_halfwidth} is below 8 sigma_m = {}",
            8.0 * sigma_m
        )));
    }
    let w = window_halfwidth;
    let mut values: Vec<f64> = (-w..=w)
        .map(|k| {
            let x = k as f64 / sigma_m;
            (-0.5 * x * x).exp()
        })
        .collect();
    let total: f64 = values.iter().sum();
    for v in &mut values {
        *v /= total;
    }
    OccupationProfile::build(m0 - w, values, ProfileKind::Gaussian { m0, sigma_m }, EdgeMode::Vacuum)
}

/// A single occupied mode m0 on the window [m0 - 2, m0 + 2].
pub fn cold_profile(m0: i64) -> OccupationProfile {
    let values = vec![0.0, 0.0, 1.0, 0.0, 0.0];
    OccupationProfile::build(m0 - 2, values, ProfileKind::Cold { m0 }, EdgeMode::Vacuum)
        .expect("cold profile is valid by construction")
}

const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
const VACUUM_PERMITTIVITY: f64 = 8.854187813e-12;
const ELECTRON_MASS: f64 = 9.109383702e-31;
const SPEED_OF_LIGHT: f64 = 299792458.0;

/// rho = e I lambda_u / (2 pi eps0 m_e c^2 gamma0 omega0).
pub fn rho_from_physical(inputs: &PhysicalBeamInputs) -> Result<f64> {
    let PhysicalBeamInputs { current, undulator_wavelength, lorentz_factor, radiation_frequency } =
        *inputs;
    for (name, v) in [
        ("current", current),
        ("undulator_wavelength", undulator_wavelength),
        ("lorentz_factor", lorentz_factor),
        ("radiation_frequency", radiation_frequency),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let num = ELEMENTARY_CHARGE * current * undulator_wavelength;
    let den = 2.0
        * std::f64::consts::PI
        * VACUUM_PERMITTIVITY
        * ELECTRON_MASS
        * SPEED_OF_LIGHT
        * SPEED_OF_LIGHT
        * lorentz_factor
        * radiation_frequency;
    Ok(num / den)
}
