use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Band, DetectorConfig, DetectorResult, Estimator};

/// Strongest in-band bin of the rectangular-window magnitude spectrum.
/// No window, no interpolation: the estimate moves in whole-bin steps of
/// `sample_rate / n`.
pub(crate) struct FftPeak {
    planner: FftPlanner<f64>,
    plan: Option<(usize, Arc<dyn Fft<f64>>)>,
    buffer: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Default for FftPeak {
    fn default() -> Self {
        Self {
            planner: FftPlanner::new(),
            plan: None,
            buffer: Vec::new(),
            scratch: Vec::new(),
        }
    }
}

impl FftPeak {
    fn plan(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        match &self.plan {
            Some((size, fft)) if *size == n => fft.clone(),
            _ => {
                let fft = self.planner.plan_fft_forward(n);
                self.plan = Some((n, fft.clone()));
                fft
            }
        }
    }
}

impl Estimator for FftPeak {
    fn estimate(&mut self, x: &[f64], band: &Band, _cfg: &DetectorConfig) -> DetectorResult {
        if x.iter().all(|&v| v == 0.0) {
            return DetectorResult::unpitched(0.0);
        }
        let n = x.len();
        let fft = self.plan(n);
        self.buffer.clear();
        self.buffer.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
        self.scratch
            .resize(fft.get_inplace_scratch_len(), Complex::new(0.0, 0.0));
        fft.process_with_scratch(&mut self.buffer, &mut self.scratch);

        let bin_hz = band.sample_rate / n as f64;
        let half = n / 2;
        let lo = ((band.min_freq_hz / bin_hz).ceil() as usize).max(1);
        let hi = ((band.max_freq_hz / bin_hz).floor() as usize).min(half);
        let magnitudes = &self.buffer[..=half];
        let total: f64 = magnitudes.iter().map(|c| c.norm()).sum();
        if lo > hi {
            return DetectorResult::unpitched(0.0);
        }
        let peak = (lo..=hi).fold(lo, |best, k| {
            if magnitudes[k].norm() > magnitudes[best].norm() {
                k
            } else {
                best
            }
        });
        let clarity = if total > 0.0 { magnitudes[peak].norm() / total } else { 0.0 };
        DetectorResult::pitched(peak as f64 * bin_hz, clarity)
    }
}
