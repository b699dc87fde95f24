use geolorenz_core::stats::correlation_curve;
use geolorenz_core::stats::lil_diagnostic;
use geolorenz_core::stats::TimeSeries;
use geolorenz_core::stats::{green_kubo_sigma2, Window};
use geolorenz_core::stats::{ks_p_value, ks_statistic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn white_noise_is_uncorrelated() {
    let v = TimeSeries::from_values(1.0, white_noise(50_000, 1)).unwrap();
    let c = correlation_curve(&v, &v, 50).unwrap();
    let outside = (1..=50)
        .filter(|&k| c.values[k].abs() > 4.0 * c.stderr[k])
        .count();
    assert!(outside <= 1, "{outside} lags outside 4 standard errors");
}

#[test]
fn lag_zero_is_the_variance() {
    let x: Vec<f64> = white_noise(10_000, 2)
        .iter()
        .map(|v| 3.0 * v + 1.0)
        .collect();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
    let s = TimeSeries::from_values(0.5, x).unwrap();
    let c = correlation_curve(&s, &s, 5).unwrap();
    assert!((c.values[0] - var).abs() <= 1e-10 * var);
    assert_eq!(c.lags[1], 0.5);
}

#[test]
fn green_kubo_recovers_iid_variance() {
    let s = TimeSeries::from_values(1.0, white_noise(200_000, 3)).unwrap();
    let est = green_kubo_sigma2(&s, Window::Bartlett, 1000).unwrap();
    assert!((est.sigma2 - 1.0).abs() < 0.1, "{}", est.sigma2);
}

#[test]
fn green_kubo_sees_ar1_memory() {
    // AR(1) with φ = 0.5 and unit innovations: σ² = 1 / (1 − φ)² = 4.
    let e = white_noise(400_000, 4);
    let mut x = vec![0.0; e.len()];
    for i in 1..e.len() {
        x[i] = 0.5 * x[i - 1] + e[i];
    }
    let est = green_kubo_sigma2(
        &TimeSeries::from_values(1.0, x).unwrap(),
        Window::Bartlett,
        1000,
    )
    .unwrap();
    assert!((est.sigma2 - 4.0).abs() < 0.4, "{}", est.sigma2);
}

#[test]
fn ks_is_calibrated_on_uniform_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reps = 400;
    let n = 500;
    let mut rejections = 0;
    for _ in 0..reps {
        let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&u, |x| x.clamp(0.0, 1.0));
        if ks_p_value(d, n) < 0.05 {
            rejections += 1;
        }
    }
    // Binomial(400, 0.05) has mean 20 and standard deviation 4.4.
    assert!((5..=40).contains(&rejections), "{rejections}");
}

#[test]
fn ks_rejects_a_shifted_sample() {
    let u: Vec<f64> = white_noise(2000, 6).iter().map(|v| v + 0.3).collect();
    let d = ks_statistic(&u, |x| geolorenz_core::stats::normal_cdf(x, 1.0));
    assert!(ks_p_value(d, u.len()) < 1e-6);
}

#[test]
fn lil_is_sign_invariant() {
    let x = white_noise(100_000, 7);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let a = lil_diagnostic(&x, 0.0, 1.0).unwrap();
    let b = lil_diagnostic(&neg, 0.0, 1.0).unwrap();
    assert_eq!(a, b);
    assert!(a.sup_last_two_decades < 2.0);
}

#[test]
fn lil_rejects_zero_variance() {
    assert!(lil_diagnostic(&vec![0.0; 100_000], 0.0, 0.0).is_err());
}
