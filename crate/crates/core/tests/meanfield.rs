use fel_keldysh::beam::{mode_energy, BeamParameters};
use fel_keldysh::dispersion::pierce_cubic;
use fel_keldysh::meanfield::{
    derivative, derivative_scaled, integrate, measure_growth, MeanFieldConfig, MeanFieldRecord,
    MeanFieldState,
};
use fel_keldysh::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn random_state(rng: &mut ChaCha8Rng, m_min: i64, n: usize) -> MeanFieldState {
    let mut c: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|x| *x /= norm);
    let b = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    MeanFieldState::new(0.0, m_min, c, b).unwrap()
}

#[test]
fn norm_derivative_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = BeamParameters::new(1.7, 100.0, 0.4).unwrap();
    for _ in 0..10 {
        let s = random_state(&mut rng, -6, 13);
        let (dc, _) = derivative(&s, &p);
        let rate: f64 = s.coeffs.iter().zip(&dc).map(|(c, d)| 2.0 * (c.conj() * d).re).sum();
        assert!(rate.abs() < 1e-13, "{rate}");
    }
}

#[test]
fn derivative_examples() {
    let p = BeamParameters::new(2.0, 1.0, 0.0).unwrap();
    let one = MeanFieldState::cold_beam(3, (0, 8), ZERO, ZERO).unwrap();
    let (dc, db) = derivative(&one, &p);
    assert_eq!(db, ZERO);
    for (k, d) in dc.iter().enumerate() {
        assert_eq!(*d, -Complex64::i() * mode_energy(k as i64, &p) * one.coeffs[k]);
    }
    let h = Complex64::new(0.5f64.sqrt(), 0.0);
    let mut c = vec![ZERO; 9];
    c[3] = h;
    c[4] = h;
    let two = MeanFieldState::new(0.0, 0, c, ZERO).unwrap();
    let (_, db) = derivative(&two, &p);
    // 2 pi sqrt(eta) J with J = 1/2
    assert!((db - Complex64::new(PI * 2f64.sqrt(), 0.0)).norm() < 1e-14);
}

fn run(init: &MeanFieldState, cfg: &MeanFieldConfig, p: &BeamParameters) -> Vec<MeanFieldRecord> {
    integrate(init, cfg, p).unwrap()
}

fn config(dt: f64, n_steps: usize, window: (i64, i64)) -> MeanFieldConfig {
    MeanFieldConfig { dt, n_steps, window, seed_bunching: ZERO, record_stride: 1, coupling: 1.0 }
}

#[test]
fn unbunched_beam_stays_dark() {
    let p = BeamParameters::new(1.0, 1.0, 0.3).unwrap();
    let cfg = config(1e-3, 2000, (-10, 10));
    let recs = run(&cfg.initial_state(0, ZERO).unwrap(), &cfg, &p);
    assert!(recs.iter().all(|r| r.b == ZERO && r.j == ZERO));
}

#[test]
fn norm_conserved_over_ten_thousand_steps() {
    let p = BeamParameters::new(1.0, 1.0, 0.25).unwrap();
    let window = (-14, 14);
    let dt = 1e-3;
    assert!(dt * mode_energy(14, &p) <= 0.1);
    let cfg = MeanFieldConfig { record_stride: 100, ..config(dt, 10_000, window) };
    let recs = run(&cfg.initial_state(0, Complex64::new(1e-8, 0.0)).unwrap(), &cfg, &p);
    let drift = recs.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-9, "{drift}");
    // the run goes well past the linear regime
    assert!(recs.last().unwrap().b.norm() > 1e-2);
}

#[test]
fn gauge_covariance() {
    let p = BeamParameters::new(1.3, 1.0, 0.2).unwrap();
    let cfg = MeanFieldConfig { seed_bunching: Complex64::new(1e-4, 2e-5), ..config(1e-3, 3000, (-12, 12)) };
    let init = cfg.initial_state(0, Complex64::new(1e-5, -3e-6)).unwrap();
    let theta = 0.73;
    let a = run(&init, &cfg, &p);
    let b = run(&init.gauge_shifted(theta), &cfg, &p);
    let u = Complex64::from_polar(1.0, theta);
    for (x, y) in a.iter().zip(&b) {
        assert!((x.b * u - y.b).norm() <= 1e-10 * x.b.norm().max(1e-300));
        assert!((x.j * u - y.j).norm() <= 1e-10 * x.j.norm().max(1e-300));
    }
}

#[test]
fn zero_coupling_freezes_moduli() {
    let p = BeamParameters::new(1.0, 1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut init = random_state(&mut rng, -5, 11);
    // empty boundary modes so the leak guard stays quiet
    init.coeffs[0] = ZERO;
    init.coeffs[10] = ZERO;
    let norm = init.norm().sqrt();
    init.coeffs.iter_mut().for_each(|c| *c /= norm);
    let cfg = MeanFieldConfig { coupling: 0.0, ..config(1e-3, 1000, (-5, 5)) };
    let recs = run(&init, &cfg, &p);
    let last = recs.last().unwrap();
    assert!((last.b.norm() - init.field.norm()).abs() < 1e-13);
    let (dc, _) = derivative_scaled(&init, &p, 0.0);
    for (c, d) in init.coeffs.iter().zip(&dc) {
        assert!((c.conj() * d).re.abs() < 1e-15);
    }
}

#[test]
fn energy_balance_holds() {
    let p = BeamParameters::new(1.0, 1.0, 0.0).unwrap();
    let cfg = config(1e-3, 8000, (-12, 12));
    let recs = run(&cfg.initial_state(0, Complex64::new(1e-6, 0.0)).unwrap(), &cfg, &p);
    let scale = recs.iter().map(|r| r.b.norm_sqr() / (2.0 * PI)).fold(0.0, f64::max);
    assert!(scale > 1e-9);
    for r in &recs {
        assert!(r.energy_balance.abs() < 1e-6 * scale, "{} vs {scale}", r.energy_balance);
    }
}

#[test]
fn growth_matches_cubic() {
    let (rate, want) = growth_vs_cubic();
    assert!((rate / want - 1.0).abs() < 0.1, "{rate} vs {want}");
}

// Small-signal rate from the integrator and |Im| of the unstable cubic root.
fn growth_vs_cubic() -> (f64, f64) {
    let eta = 1.0;
    let w_mf = 0.25;
    let mf = BeamParameters::new(eta, 1.0, w_mf).unwrap();
    let keldysh = BeamParameters::new(eta, 1.0, -w_mf).unwrap();
    let want = pierce_cubic(0, &keldysh).growth_rate();
    let cfg = MeanFieldConfig { record_stride: 10, ..config(1e-3, 12_000, (-14, 14)) };
    let recs = run(&cfg.initial_state(0, Complex64::new(1e-8, 0.0)).unwrap(), &cfg, &mf);
    let series: Vec<(f64, f64)> = recs.iter().map(|r| (r.t, r.b.norm())).collect();
    let t0 = series.iter().find(|s| s.1 > 1e-6).unwrap().0;
    let t1 = series.iter().find(|s| s.1 > 1e-4).unwrap().0;
    (measure_growth(&series, (t0, t1), None).unwrap(), want)
}

#[test]
fn measure_growth_examples() {
    let exp: Vec<(f64, f64)> = (0..100).map(|k| (0.1 * k as f64, (0.03 * k as f64).exp())).collect();
    assert!((measure_growth(&exp, (0.0, 10.0), None).unwrap() - 0.3).abs() < 1e-12);
    let flat: Vec<(f64, f64)> = (0..100).map(|k| (0.1 * k as f64, 2.5)).collect();
    assert!(measure_growth(&flat, (0.0, 10.0), None).unwrap().abs() < 1e-15);
    assert!(matches!(measure_growth(&exp, (0.0, 10.0), Some(10.0)), Err(Error::Fit(_))));
    let mut bad = exp.clone();
    bad[5].1 = 0.0;
    assert!(matches!(measure_growth(&bad, (0.0, 10.0), None), Err(Error::Fit(_))));
}

#[test]
fn narrow_window_leaks() {
    let p = BeamParameters::new(1.0, 1.0, 0.0).unwrap();
    let cfg = config(1e-3, 20_000, (-2, 3));
    let e = integrate(&cfg.initial_state(0, Complex64::new(1e-3, 0.0)).unwrap(), &cfg, &p);
    assert!(matches!(e, Err(Error::WindowLeak { .. })), "{e:?}");
}
