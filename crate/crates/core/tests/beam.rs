use fel_keldysh::beam::{
    cold_profile, gaussian_profile, mode_energy, rho_from_physical, transition_frequency,
    BeamParameters, OccupationProfile, PhysicalBeamInputs,
};
use proptest::prelude::*;

fn inputs(current: f64) -> PhysicalBeamInputs {
    PhysicalBeamInputs {
        current,
        undulator_wavelength: 0.01,
        lorentz_factor: 100.0,
        radiation_frequency: 1e15,
    }
}

#[test]
fn rho_regression() {
    // independent route: 2 r_e I lambda_u / (e gamma0 omega0) with the
    // classical electron radius r_e = e^2 / (4 pi eps0 m_e c^2)
    let (e, eps0, me, c) = (1.602176634e-19, 8.854187813e-12, 9.109383702e-31, 299792458.0);
    let r_e = e * e / (4.0 * std::f64::consts::PI * eps0 * me * c * c);
    let oracle = 2.0 * r_e * 1.0 * 0.01 / (e * 100.0 * 1e15);
    let rho = rho_from_physical(&inputs(1.0)).unwrap();
    assert!((rho / oracle - 1.0).abs() < 1e-12);
    assert!((rho / 3.517640023e-15 - 1.0).abs() < 1e-9);
}

#[test]
fn rho_linear_in_current() {
    let a = rho_from_physical(&inputs(1.0)).unwrap();
    let b = rho_from_physical(&inputs(2.0)).unwrap();
    assert!((b / a - 2.0).abs() < 1e-15);
    assert!(rho_from_physical(&inputs(1e-300)).unwrap() < 1e-310);
    assert!(rho_from_physical(&inputs(0.0)).is_err());
}

#[test]
fn level_examples() {
    let p1 = BeamParameters::new(1.0, 1.0, 0.0).unwrap();
    let p15 = BeamParameters::new(1.5, 1.0, 0.0).unwrap();
    let p05 = BeamParameters::new(0.5, 1.0, 0.0).unwrap();
    assert_eq!(mode_energy(0, &p1), 0.0);
    assert_eq!(mode_energy(3, &p15), 3.0);
    assert_eq!(transition_frequency(0, &p1), 0.5);
    assert_eq!(transition_frequency(2, &p05), 5.0);
}

#[test]
fn gaussian_examples() {
    let g = gaussian_profile(100, 10.0, 80).unwrap();
    let total: f64 = g.values().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!((g.n(110) / g.n(100) - (-0.5f64).exp()).abs() < 1e-12);
    for k in 0..=80 {
        assert_eq!(g.n(100 + k), g.n(100 - k));
    }
    assert!(gaussian_profile(100, 10.0, 79).is_err());
}

#[test]
fn cold_examples() {
    let c = cold_profile(5);
    assert_eq!(c.n(5), 1.0);
    assert_eq!(c.n(4), 0.0);
    assert_eq!(c.n(6), 0.0);
    assert_eq!(c.values().iter().sum::<f64>(), 1.0);
}

#[test]
fn narrow_gaussian_becomes_cold() {
    let g = gaussian_profile(7, 0.1, 1).unwrap();
    let c = cold_profile(7);
    for m in 3..=11 {
        assert!((g.n(m) - c.n(m)).abs() < 1e-3, "m = {m}");
    }
}

#[test]
fn invalid_profiles_rejected() {
    assert!(OccupationProfile::custom(0, vec![0.5, 0.6], Default::default()).is_err());
    assert!(OccupationProfile::custom(0, vec![-0.1, 1.1], Default::default()).is_err());
    assert!(BeamParameters::new(0.0, 1.0, 0.0).is_err());
    assert!(BeamParameters::new(1.0, -1.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn gaussian_profile_is_normalized(m0 in -500i64..500, sigma in 0.05f64..30.0, extra in 0i64..20) {
        let w = (8.0 * sigma).ceil() as i64 + extra;
        let g = gaussian_profile(m0, sigma, w).unwrap();
        let total: f64 = g.values().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(g.values().iter().all(|&n| (0.0..=1.0).contains(&n)));
    }

    #[test]
    fn transition_frequency_increases(m in -10_000i64..10_000, eta in 1e-3f64..1e3) {
        let p = BeamParameters::new(eta, 1.0, 0.0).unwrap();
        let (a, b) = (transition_frequency(m, &p), transition_frequency(m + 1, &p));
        prop_assert!(b > a);
        prop_assert!(((b - a) * eta - 1.0).abs() < 1e-9);
        prop_assert_eq!(mode_energy(-m, &p), mode_energy(m, &p));
    }
}
