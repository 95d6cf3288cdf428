//! McLeod pitch method.
//!
//! The normalized square difference function is evaluated with the direct
//! quadratic-time sum over every lag up to `n / 2`, so this detector's cost
//! grows with the square of the buffer size.

use super::interp::refine;
use super::{Band, DetectorConfig, DetectorResult, Estimator};

/// `nsdf(τ) = 2 Σ x[j] x[j+τ] / Σ (x[j]² + x[j+τ]²)` over `j < n - τ`, for
/// `τ` in `0..n/2`. An all-zero frame yields all zeros.
pub fn nsdf(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let lags = (n / 2).max(1);
    let mut m: f64 = 2.0 * x.iter().map(|v| v * v).sum::<f64>();
    let mut out = Vec::with_capacity(lags);
    for tau in 0..lags {
        if tau > 0 {
            m -= x[tau - 1] * x[tau - 1] + x[n - tau] * x[n - tau];
        }
        let acf: f64 = x[..n - tau].iter().zip(&x[tau..]).map(|(a, b)| a * b).sum();
        out.push(if m > 0.0 { (2.0 * acf / m).clamp(-1.0, 1.0) } else { 0.0 });
    }
    out
}

/// Highest point of each positive lobe after the first negative-going
/// zero crossing.
fn key_maxima(values: &[f64]) -> Vec<usize> {
    let len = values.len();
    let mut maxima = Vec::new();
    if len < 3 {
        return maxima;
    }
    let mut pos = 0;
    while pos < len - 1 && values[pos] > 0.0 {
        pos += 1;
    }
    while pos < len - 1 && values[pos] <= 0.0 {
        pos += 1;
    }
    pos = pos.max(1);

    let mut current: Option<usize> = None;
    while pos < len - 1 {
        if values[pos] > values[pos - 1] && values[pos] >= values[pos + 1] {
            match current {
                Some(c) if values[c] >= values[pos] => {}
                _ => current = Some(pos),
            }
        }
        pos += 1;
        if pos < len - 1 && values[pos] <= 0.0 {
            if let Some(c) = current.take() {
                maxima.push(c);
            }
            while pos < len - 1 && values[pos] <= 0.0 {
                pos += 1;
            }
        }
    }
    if let Some(c) = current {
        maxima.push(c);
    }
    maxima
}

#[derive(Default)]
pub(crate) struct Mpm;

impl Estimator for Mpm {
    fn estimate(&mut self, x: &[f64], band: &Band, cfg: &DetectorConfig) -> DetectorResult {
        let values = nsdf(x);
        let candidates: Vec<usize> = key_maxima(&values)
            .into_iter()
            .filter(|&lag| lag >= band.lag_lo && lag <= band.lag_hi)
            .collect();
        let Some(highest) = candidates.iter().map(|&l| values[l]).reduce(f64::max) else {
            return DetectorResult::unpitched(0.0);
        };
        let cutoff = cfg.mpm_cutoff * highest;
        let chosen = *candidates
            .iter()
            .find(|&&l| values[l] >= cutoff)
            .expect("the highest key maximum passes its own cutoff");
        let clarity = values[chosen];
        if clarity < cfg.mpm_clarity_min {
            return DetectorResult::unpitched(clarity);
        }
        let (lag, _) = refine(&values, chosen);
        DetectorResult::pitched(band.freq_at_lag(lag), clarity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn test_nsdf_at_zero_lag() {
        let x: Vec<f64> = (0..256).map(|i| ((i * 7 % 13) as f64 - 6.0) / 10.0).collect();
        let v = nsdf(&x);
        assert_eq!(v.len(), 128);
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|&y| (-1.0..=1.0).contains(&y)));
    }

    #[test]
    fn test_nsdf_peak_at_period() {
        let period = 100.0;
        let x: Vec<f64> = (0..2048).map(|i| 0.6 * (2.0 * PI * i as f64 / period).sin()).collect();
        let v = nsdf(&x);
        assert!(v[100] > 0.97, "{}", v[100]);
    }

    #[test]
    fn test_nsdf_silence() {
        assert!(nsdf(&[0.0; 512]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn test_nsdf_matches_definition() {
        let x: Vec<f64> = (0..64).map(|i| ((i as f64) * 0.37).sin() * 0.5).collect();
        let v = nsdf(&x);
        for (tau, &got) in v.iter().enumerate() {
            let mut acf = 0.0;
            let mut m = 0.0;
            for j in 0..x.len() - tau {
                acf += x[j] * x[j + tau];
                m += x[j] * x[j] + x[j + tau] * x[j + tau];
            }
            assert!((got - 2.0 * acf / m).abs() < 1e-12, "lag {tau}");
        }
    }

    #[test]
    fn test_key_maxima_one_per_lobe() {
        let values = [1.0, 0.5, -0.2, -0.1, 0.3, 0.8, 0.6, 0.7, -0.1, 0.2, 0.9, 0.4, 0.0];
        assert_eq!(key_maxima(&values), vec![5, 10]);
    }
}
