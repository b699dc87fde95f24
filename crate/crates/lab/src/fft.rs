//! FFT cross-correlation for long series.

use geolorenz_core::stats::LagSums;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// `Σ_i a_i b_{i+k}` by overlap-save: `a` is cut into chunks and each chunk
/// is correlated with the matching stretch of `b` through zero-padded FFTs,
/// so memory stays proportional to the chunk rather than the series.
#[derive(Debug, Clone, Copy, Default)]
pub struct FftSums;

const MIN_CHUNK: usize = 2048;

impl LagSums for FftSums {
    fn lag_sums(&self, a: &[f64], b: &[f64], max_lag: usize) -> Vec<f64> {
        let chunk = MIN_CHUNK.max(2 * max_lag);
        let size = (2 * chunk + max_lag).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let zero = Complex64::new(0.0, 0.0);
        let mut fa = vec![zero; size];
        let mut fb = vec![zero; size];
        let mut out = vec![0.0; max_lag + 1];
        let mut start = 0;
        while start < a.len() {
            let sa = &a[start..(start + chunk).min(a.len())];
            let sb = &b[start.min(b.len())..(start + chunk + max_lag).min(b.len())];
            fill(&mut fa, sa);
            fill(&mut fb, sb);
            fwd.process(&mut fa);
            fwd.process(&mut fb);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = x.conj() * y;
            }
            inv.process(&mut fa);
            for (k, o) in out.iter_mut().enumerate() {
                *o += fa[k].re / size as f64;
            }
            start += chunk;
        }
        out
    }
}

fn fill(buf: &mut [Complex64], x: &[f64]) {
    for (i, c) in buf.iter_mut().enumerate() {
        *c = Complex64::new(x.get(i).copied().unwrap_or(0.0), 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use geolorenz_core::stats::DirectSums;

    #[test]
    fn matches_direct_sums() {
        let a: Vec<f64> = (0..500)
            .map(|i| ((i * 37 % 101) as f64 - 50.0) / 17.0)
            .collect();
        let b: Vec<f64> = (0..530)
            .map(|i| ((i * 53 % 97) as f64 - 48.0) / 13.0)
            .collect();
        let d = DirectSums.lag_sums(&a, &b, 60);
        let f = FftSums.lag_sums(&a, &b, 60);
        for (x, y) in d.iter().zip(&f) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn chunked_matches_direct_sums() {
        let a: Vec<f64> = (0..9000)
            .map(|i| ((i * 37 % 101) as f64 - 50.0) / 17.0)
            .collect();
        let b = a.clone();
        let d = DirectSums.lag_sums(&a, &b, 300);
        let f = FftSums.lag_sums(&a, &b, 300);
        for (x, y) in d.iter().zip(&f) {
            assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }
}
