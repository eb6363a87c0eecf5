use fel_keldysh::langevin::{
    autocorrelation_time, batch_means, scaling_sweep, simulate, simulate_trajectory,
    stationary_stats, LangevinConfig, Scheme,
};
use fel_keldysh::lgk::CanonicalLaserParams;
use fel_keldysh::{Complex64, Error};
use proptest::prelude::*;

fn config(dt: f64, n_steps: usize, n_traj: usize, seed: u64) -> LangevinConfig {
    LangevinConfig {
        dt,
        n_steps,
        n_traj,
        seed,
        initial_amplitude: Complex64::new(0.0, 0.0),
        burn_in_fraction: 0.2,
        scheme: Scheme::Heun,
        record_stride: 10,
    }
}

#[test]
fn ornstein_uhlenbeck_statistics() {
    let p = CanonicalLaserParams::new(-0.5, 0.0, 0.1).unwrap();
    let cfg = config(0.01, 10_000, 200, 11);
    let s = stationary_stats(&simulate(&p, &cfg).unwrap(), cfg.burn_in_fraction).unwrap();
    assert!((s.mean_mod2 - 0.2).abs() <= 3.0 * s.stderr_mod2, "{} +- {}", s.mean_mod2, s.stderr_mod2);
    assert!((s.autocorr_time - 2.0).abs() <= 0.15 * 2.0, "tau = {}", s.autocorr_time);
    assert!(!s.degenerate);
    assert_eq!(s.n_batches, 200);
}

#[test]
fn short_run_is_rejected() {
    let p = CanonicalLaserParams::new(-0.5, 0.0, 0.1).unwrap();
    let cfg = config(0.01, 2_000, 20, 1);
    let e = stationary_stats(&simulate(&p, &cfg).unwrap(), 0.2);
    assert!(matches!(e, Err(Error::Statistics(_))), "{e:?}");
}

#[test]
fn deterministic_limits() {
    let decay = CanonicalLaserParams::new(-1.0, 0.0, 0.0).unwrap();
    let mut cfg = config(1e-3, 5000, 1, 0);
    cfg.initial_amplitude = Complex64::new(1.0, 0.0);
    cfg.record_stride = 1;
    let a = *simulate(&decay, &cfg).unwrap().trajectories[0].last().unwrap();
    assert!((a.norm() - (-5.0f64).exp()).abs() < 1e-4);
    let laser = CanonicalLaserParams::new(1.0, 1.0, 0.0).unwrap();
    cfg.initial_amplitude = Complex64::new(0.1, 0.0);
    cfg.n_steps = 20_000;
    let a = *simulate(&laser, &cfg).unwrap().trajectories[0].last().unwrap();
    assert!((a.norm_sqr() - 1.0).abs() < 1e-6);
}

// |a(t)|^2 for da/dt = alpha a - beta |a|^2 a
fn logistic(alpha: f64, beta: f64, r0: f64, t: f64) -> f64 {
    let e = (2.0 * alpha * t).exp();
    alpha * r0 * e / (alpha + beta * r0 * (e - 1.0))
}

fn final_error(scheme: Scheme, dt: f64) -> f64 {
    let p = CanonicalLaserParams::new(1.0, 1.0, 0.0).unwrap();
    let t_end = 2.0;
    let mut cfg = config(dt, (t_end / dt).round() as usize, 1, 0);
    cfg.scheme = scheme;
    cfg.initial_amplitude = Complex64::new(0.1, 0.0);
    cfg.record_stride = 1;
    let a = *simulate(&p, &cfg).unwrap().trajectories[0].last().unwrap();
    (a.norm() - logistic(1.0, 1.0, 0.01, t_end).sqrt()).abs()
}

#[test]
fn convergence_order() {
    let heun = final_error(Scheme::Heun, 0.01) / final_error(Scheme::Heun, 0.005);
    let euler = final_error(Scheme::EulerMaruyama, 0.01) / final_error(Scheme::EulerMaruyama, 0.005);
    assert!((heun - 4.0).abs() < 0.4, "heun ratio {heun}");
    assert!((euler - 2.0).abs() < 0.2, "euler ratio {euler}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn phase_equivariance(theta in 0.0f64..std::f64::consts::TAU, seed in any::<u64>(), heun in any::<bool>()) {
        let p = CanonicalLaserParams::new(0.3, 0.7, 0.05).unwrap();
        let mut cfg = config(0.01, 500, 1, seed);
        cfg.initial_amplitude = Complex64::new(0.4, -0.2);
        cfg.record_stride = 1;
        cfg.scheme = if heun { Scheme::Heun } else { Scheme::EulerMaruyama };
        let u = Complex64::from_polar(1.0, theta);
        let plain = simulate_trajectory(&p, &cfg, 3, Complex64::new(1.0, 0.0)).unwrap();
        let rotated = simulate_trajectory(&p, &cfg, 3, u).unwrap();
        for (a, b) in plain.iter().zip(&rotated) {
            prop_assert!((a * u - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }
}

fn run_with_threads(threads: usize, p: &CanonicalLaserParams, cfg: &LangevinConfig) -> Vec<Vec<Complex64>> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| simulate(p, cfg).unwrap().trajectories)
}

#[test]
fn worker_count_does_not_matter() {
    let p = CanonicalLaserParams::new(0.5, 1.0, 0.02).unwrap();
    let cfg = config(0.01, 3000, 40, 99);
    let one = run_with_threads(1, &p, &cfg);
    let four = run_with_threads(4, &p, &cfg);
    let seven = run_with_threads(7, &p, &cfg);
    assert!(one == four && four == seven);
    let mut other = cfg;
    other.seed = 100;
    assert!(run_with_threads(2, &p, &other) != one);
}

#[test]
fn below_threshold_field_vanishes() {
    let p = CanonicalLaserParams::new(-0.5, 1.0, 0.1).unwrap();
    let mut cfg = config(0.01, 10_000, 100, 5);
    cfg.initial_amplitude = Complex64::new(0.3, 0.3);
    let s = stationary_stats(&simulate(&p, &cfg).unwrap(), 0.2).unwrap();
    assert!(s.mean_field.re.abs() <= 3.0 * s.stderr_field_re);
    assert!(s.mean_field.im.abs() <= 3.0 * s.stderr_field_im);
}

#[test]
fn above_threshold_intensity() {
    // Re a decorrelates by phase diffusion, tau ~ 2 (alpha/beta)/d
    let (alpha, beta, d) = (1.0, 1.0, 0.1);
    let p = CanonicalLaserParams::new(alpha, beta, d).unwrap();
    let mut cfg = config(0.01, 60_000, 50, 8);
    cfg.initial_amplitude = Complex64::new(1.0, 0.0);
    let s = stationary_stats(&simulate(&p, &cfg).unwrap(), 0.2).unwrap();
    let bias = 2.0 * d / alpha;
    assert!((s.mean_mod2 - alpha / beta).abs() <= 3.0 * s.stderr_mod2 + bias, "{}", s.mean_mod2);
}

#[test]
fn order_parameter_exponent() {
    let alphas: Vec<f64> = (0..8).map(|k| 0.01 * 100f64.powf(k as f64 / 7.0)).collect();
    let mut cfg = config(0.02, 50_000, 20, 3);
    cfg.initial_amplitude = Complex64::new(1.0, 0.0);
    cfg.burn_in_fraction = 0.5;
    let fit = scaling_sweep(1.0, 1e-6, &alphas, &cfg).unwrap();
    assert!((fit.slope - 0.5).abs() <= 0.03, "slope {}", fit.slope);
}

#[test]
fn batch_means_splits_few_series() {
    let series = vec![(0..400).map(|k| (k % 2) as f64).collect::<Vec<_>>()];
    let (m, _, n) = batch_means(&series).unwrap();
    assert_eq!(n, 20);
    assert!((m - 0.5).abs() < 1e-15);
    let flat = vec![vec![1.0; 100]; 3];
    assert_eq!(autocorrelation_time(&flat.iter().map(|v| v.as_slice()).collect::<Vec<_>>(), 0.1), None);
}

#[test]
fn invalid_configs() {
    let p = CanonicalLaserParams::new(2.0, 1.0, 0.0).unwrap();
    assert!(matches!(simulate(&p, &config(0.05, 10, 1, 0)), Err(Error::Config(_))));
    assert!(matches!(simulate(&p, &config(0.01, 0, 1, 0)), Err(Error::Config(_))));
    assert!(CanonicalLaserParams::new(1.0, -1.0, 0.0).is_err());
    assert!(CanonicalLaserParams::new(1.0, 1.0, -0.1).is_err());
}

#[test]
fn disjoint_seeds_agree() {
    let p = CanonicalLaserParams::new(-1.0, 0.0, 0.5).unwrap();
    let a = config(0.01, 5_000, 100, 1);
    let b = config(0.01, 5_000, 100, 2);
    let sa = stationary_stats(&simulate(&p, &a).unwrap(), 0.2).unwrap();
    let sb = stationary_stats(&simulate(&p, &b).unwrap(), 0.2).unwrap();
    let combined = (sa.stderr_mod2.powi(2) + sb.stderr_mod2.powi(2)).sqrt();
    assert!((sa.mean_mod2 - sb.mean_mod2).abs() <= 3.0 * combined);
    assert!((sa.autocorr_time - 1.0).abs() <= 0.15);
    assert!((sb.autocorr_time - 1.0).abs() <= 0.15);
}

#[test]
fn constant_trajectory_is_degenerate() {
    let p = CanonicalLaserParams::new(0.0, 0.0, 0.0).unwrap();
    let mut cfg = config(0.01, 1000, 3, 0);
    cfg.initial_amplitude = Complex64::new(0.6, 0.8);
    let s = stationary_stats(&simulate(&p, &cfg).unwrap(), 0.2).unwrap();
    assert!(s.degenerate);
    assert_eq!(s.mean_mod2, 1.0);
    assert!(s.autocorr_time > 0.0);
}

#[test]
fn noiseless_sweep_is_exact() {
    let alphas = [0.1, 0.2, 0.4, 0.7, 1.0];
    let mut cfg = config(0.01, 20_000, 1, 0);
    cfg.initial_amplitude = Complex64::new(1.0, 0.0);
    let fit = scaling_sweep(2.0, 0.0, &alphas, &cfg).unwrap();
    assert!((fit.slope - 0.5).abs() < 1e-6);
    assert!((fit.intercept - (0.5f64).sqrt().ln()).abs() < 1e-6);
    assert!(matches!(scaling_sweep(1.0, 0.0, &alphas[..3], &cfg), Err(Error::Fit(_))));
}

#[test]
fn variance_diverges_toward_threshold() {
    let d = 0.05;
    for alpha in [-1.0, -0.5, -0.25] {
        let p = CanonicalLaserParams::new(alpha, 0.0, d).unwrap();
        let cfg = config(0.01, 20_000, 50, 4);
        let s = stationary_stats(&simulate(&p, &cfg).unwrap(), 0.2).unwrap();
        let want = d / -alpha;
        assert!((s.mean_mod2 - want).abs() <= 3.0 * s.stderr_mod2, "alpha {alpha}: {}", s.mean_mod2);
    }
}
