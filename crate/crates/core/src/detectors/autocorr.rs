//! Time-domain autocorrelation detectors.
//!
//! Both evaluate lags only up to the band's longest period, so their cost is
//! `O(n * lag_hi)` rather than quadratic in the frame length.

use super::interp::refine;
use super::{Band, DetectorConfig, DetectorResult, Estimator};

/// Fraction of the best normalized score a shorter-lag peak needs to win
/// the octave check.
const OCTAVE_PREFERENCE: f64 = 0.9;

/// `r[τ] = Σ_{j < n-τ} x[j] x[j+τ]` for `τ` in `0..=max_lag`.
pub(crate) fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let max_lag = max_lag.min(x.len().saturating_sub(1));
    (0..=max_lag)
        .map(|lag| x[..x.len() - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum())
        .collect()
}

fn first_non_positive(values: &[f64]) -> Option<usize> {
    values.iter().skip(1).position(|&v| v <= 0.0).map(|p| p + 1)
}

/// Raw autocorrelation; reports the global-maximum lag after the first
/// zero crossing, unrefined. Any frame with energy is pitched.
pub(crate) struct Classic;

impl Estimator for Classic {
    fn estimate(&mut self, x: &[f64], band: &Band, _cfg: &DetectorConfig) -> DetectorResult {
        let acf = autocorrelation(x, band.lag_hi);
        let energy = acf[0];
        if energy <= 0.0 {
            return DetectorResult::unpitched(0.0);
        }
        let hi = band.lag_hi.min(acf.len() - 1);
        let start = match first_non_positive(&acf) {
            Some(zc) if zc <= hi => zc.max(band.lag_lo),
            _ => band.lag_lo,
        };
        let best = (start..=hi).fold(start, |best, lag| if acf[lag] > acf[best] { lag } else { best });
        DetectorResult::pitched(band.freq_at_lag(best as f64), acf[best] / energy)
    }
}

/// Normalized autocorrelation with parabolic refinement and a preference
/// for the shortest lag scoring within 90% of the best peak.
#[derive(Default)]
pub(crate) struct Advanced {
    prefix: Vec<f64>,
}

impl Advanced {
    fn normalized(&mut self, x: &[f64], max_lag: usize) -> Vec<f64> {
        self.prefix.clear();
        self.prefix.push(0.0);
        let mut acc = 0.0;
        for v in x {
            acc += v * v;
            self.prefix.push(acc);
        }
        let n = x.len();
        let total = self.prefix[n];
        autocorrelation(x, max_lag)
            .into_iter()
            .enumerate()
            .map(|(lag, r)| {
                let head = self.prefix[n - lag];
                let tail = total - self.prefix[lag];
                let denom = (head * tail).sqrt();
                if denom > 0.0 {
                    r / denom
                } else {
                    0.0
                }
            })
            .collect()
    }
}

impl Estimator for Advanced {
    fn estimate(&mut self, x: &[f64], band: &Band, cfg: &DetectorConfig) -> DetectorResult {
        if x.iter().all(|&v| v == 0.0) {
            return DetectorResult::unpitched(0.0);
        }
        let nacf = self.normalized(x, band.lag_hi + 1);
        let hi = band.lag_hi.min(nacf.len() - 2);
        let start = match first_non_positive(&nacf) {
            Some(zc) if zc <= hi => zc.max(band.lag_lo),
            _ => band.lag_lo,
        };
        if start > hi {
            return DetectorResult::unpitched(0.0);
        }

        let peaks: Vec<usize> = (start..=hi)
            .filter(|&lag| {
                lag > start && nacf[lag] > nacf[lag - 1] && nacf[lag] >= nacf[lag + 1]
            })
            .collect();
        let best_score = peaks.iter().map(|&l| nacf[l]).fold(f64::NEG_INFINITY, f64::max);
        let chosen = if peaks.is_empty() {
            (start..=hi).fold(start, |b, lag| if nacf[lag] > nacf[b] { lag } else { b })
        } else {
            // The octave check: a shorter-lag peak nearly as strong as the best
            // is the fundamental; the best is one of its multiples.
            *peaks
                .iter()
                .find(|&&l| nacf[l] >= OCTAVE_PREFERENCE * best_score)
                .expect("the best peak satisfies its own threshold")
        };

        let score = nacf[chosen];
        let (lag, _) = refine(&nacf[..=hi + 1], chosen);
        if score >= cfg.acf_clarity_min {
            DetectorResult::pitched(band.freq_at_lag(lag), score)
        } else {
            DetectorResult::unpitched(score)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_autocorrelation_small() {
        let r = autocorrelation(&[1.0, 2.0, 3.0], 5);
        assert_eq!(r, vec![14.0, 8.0, 3.0]);
    }

    #[test]
    fn test_first_non_positive() {
        assert_eq!(first_non_positive(&[5.0, 3.0, 0.0, -1.0]), Some(2));
        assert_eq!(first_non_positive(&[5.0, 3.0, 1.0]), None);
        // lag 0 is never a crossing
        assert_eq!(first_non_positive(&[0.0, 1.0, -1.0]), Some(2));
    }
}
