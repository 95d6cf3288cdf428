//! Dynamic wavelet pitch tracking (Larson & Maddox, as packaged by
//! Schmitt's dywapitchtrack).
//!
//! At each level the signal is halved with a Haar approximation step. The
//! first extremum after each zero crossing is kept when it exceeds 75% of
//! the peak amplitude; distances between nearby maxima (and minima) vote in
//! a histogram, and the mode is the period estimate at that level. Two
//! consecutive levels agreeing on the mode (after doubling) yield the pitch.

use super::{Band, DetectorConfig, DetectorResult, Estimator};

const MAX_LEVELS: usize = 6;
/// Highest frequency the level spacing is tuned for.
const MAX_TRACKED_HZ: f64 = 3000.0;
/// Extremum `i` is paired with the next `DIFFERENCE_LEVELS - 1` extrema.
const DIFFERENCE_LEVELS: usize = 3;
const MAXIMA_THRESHOLD_RATIO: f64 = 0.75;

#[derive(Default)]
pub(crate) struct DynamicWavelet {
    signal: Vec<f64>,
    distances: Vec<u32>,
    mins: Vec<usize>,
    maxs: Vec<usize>,
}

impl DynamicWavelet {
    /// Returns `(frequency, clarity)` or `None` when no two levels agree.
    fn track(&mut self, x: &[f64], sample_rate: f64) -> Option<(f64, f64)> {
        let count = floor_power_of_two(x.len());
        if count < 4 {
            return None;
        }
        self.signal.clear();
        self.signal.extend_from_slice(&x[..count]);
        self.distances.clear();
        self.distances.resize(count, 0);

        let dc = self.signal.iter().sum::<f64>() / count as f64;
        let (lo, hi) = self
            .signal
            .iter()
            .fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let amplitude = (hi - dc).max(dc - lo);
        let threshold = amplitude * MAXIMA_THRESHOLD_RATIO;
        if amplitude <= 0.0 {
            return None;
        }

        let mut len = count;
        let mut previous_mode: Option<(f64, f64)> = None;
        for level in 0..MAX_LEVELS {
            if len < 2 {
                return None;
            }
            let delta = (sample_rate / ((1usize << level) as f64 * MAX_TRACKED_HZ)) as usize;
            self.find_extrema(len, dc, threshold, delta);
            if self.mins.is_empty() && self.maxs.is_empty() {
                return None;
            }

            self.distances[..len].fill(0);
            let mut votes = 0u32;
            for extrema in [&self.mins, &self.maxs] {
                for i in 0..extrema.len() {
                    for j in 1..DIFFERENCE_LEVELS {
                        if i + j < extrema.len() {
                            let d = extrema[i + j].abs_diff(extrema[i]);
                            self.distances[d] += 1;
                            votes += 1;
                        }
                    }
                }
            }
            if votes == 0 {
                return None;
            }

            // best summed distance over a ±delta window; on a tie the double
            // of the current best wins
            let mut best_distance = 0usize;
            let mut best_value: i64 = -1;
            for i in 0..len {
                let lo = i.saturating_sub(delta);
                let hi = (i + delta).min(len - 1);
                let summed: i64 = self.distances[lo..=hi].iter().map(|&c| c as i64).sum();
                if summed == best_value {
                    if i == 2 * best_distance {
                        best_distance = i;
                    }
                } else if summed > best_value {
                    best_value = summed;
                    best_distance = i;
                }
            }

            let lo = best_distance.saturating_sub(delta);
            let hi = (best_distance + delta).min(len - 1);
            let (weighted, total) = (lo..=hi).fold((0.0, 0.0), |(w, t), d| {
                let c = self.distances[d] as f64;
                (w + d as f64 * c, t + c)
            });
            if total == 0.0 {
                return None;
            }
            let mode = weighted / total;
            let clarity = total / votes as f64;

            if let Some((prev, prev_clarity)) = previous_mode {
                if (2.0 * mode - prev).abs() <= 2.0 * delta as f64 {
                    let scale = (1usize << (level - 1)) as f64;
                    return Some((sample_rate / (scale * prev), prev_clarity));
                }
            }
            previous_mode = Some((mode, clarity));

            for i in 0..len / 2 {
                self.signal[i] = 0.5 * (self.signal[2 * i] + self.signal[2 * i + 1]);
            }
            len /= 2;
        }
        None
    }

    fn find_extrema(&mut self, len: usize, dc: f64, threshold: f64, delta: usize) {
        self.mins.clear();
        self.maxs.clear();
        let mut previous_dv: Option<f64> = None;
        let mut last_min: Option<usize> = None;
        let mut last_max: Option<usize> = None;
        let mut find_max = false;
        let mut find_min = false;
        for i in 2..len {
            let si = self.signal[i] - dc;
            let si1 = self.signal[i - 1] - dc;
            if si1 <= 0.0 && si > 0.0 {
                find_max = true;
            }
            if si1 >= 0.0 && si < 0.0 {
                find_min = true;
            }
            let dv = si - si1;
            if let Some(pdv) = previous_dv {
                let far_enough = |last: Option<usize>| last.is_none_or(|l| i > l + delta);
                if find_min && pdv < 0.0 && dv >= 0.0 && si.abs() >= threshold && far_enough(last_min)
                {
                    self.mins.push(i);
                    last_min = Some(i);
                    find_min = false;
                }
                if find_max && pdv > 0.0 && dv <= 0.0 && si.abs() >= threshold && far_enough(last_max)
                {
                    self.maxs.push(i);
                    last_max = Some(i);
                    find_max = false;
                }
            }
            previous_dv = Some(dv);
        }
    }
}

impl Estimator for DynamicWavelet {
    fn estimate(&mut self, x: &[f64], band: &Band, _cfg: &DetectorConfig) -> DetectorResult {
        match self.track(x, band.sample_rate) {
            Some((freq, clarity)) if freq.is_finite() => DetectorResult::pitched(freq, clarity),
            _ => DetectorResult::unpitched(0.0),
        }
    }
}

fn floor_power_of_two(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn test_floor_power_of_two() {
        assert_eq!(floor_power_of_two(1), 1);
        assert_eq!(floor_power_of_two(4096), 4096);
        assert_eq!(floor_power_of_two(5000), 4096);
        assert_eq!(floor_power_of_two(0), 0);
    }

    #[test]
    fn test_tracks_sine() {
        let sr = 44100.0;
        let freq = 196.0;
        let x: Vec<f64> = (0..4096).map(|i| 0.8 * (2.0 * PI * freq * i as f64 / sr).sin()).collect();
        let (f, clarity) = DynamicWavelet::default().track(&x, sr).unwrap();
        assert!((f - freq).abs() < 1.0, "{f}");
        assert!(clarity > 0.0 && clarity <= 1.0);
    }

    #[test]
    fn test_flat_signal_has_no_pitch() {
        assert!(DynamicWavelet::default().track(&[0.25; 2048], 44100.0).is_none());
    }
}
