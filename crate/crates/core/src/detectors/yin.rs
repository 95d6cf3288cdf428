//! YIN and its spectral twin.
//!
//! Both compare a window of `n / 2` samples against its lagged copy. `Yin`
//! sums the squared differences directly; `FastYin` expands the square into
//! two energy terms (prefix sums) and a cross-correlation (FFT), which is
//! `O(n log n)` instead of `O(n * lag)`. Everything after the difference
//! function is shared.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::interp::refine;
use super::{Band, DetectorConfig, DetectorResult, Estimator};

/// `d(τ) = Σ_{j < n/2} (x[j] - x[j+τ])²` for `τ` in `0..=max_lag`.
///
/// `max_lag` is capped at `n / 2`.
pub fn difference_direct(x: &[f64], max_lag: usize) -> Vec<f64> {
    let window = x.len() / 2;
    let max_lag = max_lag.min(window);
    (0..=max_lag)
        .map(|lag| {
            x[..window]
                .iter()
                .zip(&x[lag..lag + window])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .collect()
}

/// Cumulative-mean-normalized difference: `d'(0) = 1`,
/// `d'(τ) = d(τ) τ / Σ_{1≤j≤τ} d(j)`. Where the running sum is zero
/// (silence, DC) the value is defined as 1.
pub fn cmndf(x: &[f64], max_lag: usize) -> Vec<f64> {
    normalize(difference_direct(x, max_lag))
}

fn normalize(mut d: Vec<f64>) -> Vec<f64> {
    let mut running = 0.0;
    d[0] = 1.0;
    for (tau, v) in d.iter_mut().enumerate().skip(1) {
        running += *v;
        *v = if running > 0.0 { *v * tau as f64 / running } else { 1.0 };
    }
    d
}

/// Absolute-threshold search over the band: the first lag under the
/// threshold, followed down to its local minimum; otherwise the band's
/// global minimum, reported unpitched.
fn pick(cmnd: &[f64], band: &Band, threshold: f64) -> DetectorResult {
    let hi = band.lag_hi.min(cmnd.len() - 1);
    let lo = band.lag_lo.min(hi);
    let tau = match (lo..=hi).find(|&t| cmnd[t] < threshold) {
        Some(mut t) => {
            while t < hi && cmnd[t + 1] < cmnd[t] {
                t += 1;
            }
            t
        }
        None => (lo..=hi).fold(lo, |best, t| if cmnd[t] < cmnd[best] { t } else { best }),
    };
    let value = cmnd[tau];
    if value < threshold {
        let (lag, _) = refine(&cmnd[..(hi + 2).min(cmnd.len())], tau);
        DetectorResult::pitched(band.freq_at_lag(lag), 1.0 - value)
    } else {
        DetectorResult::unpitched(1.0 - value)
    }
}

#[derive(Default)]
pub(crate) struct Yin;

impl Estimator for Yin {
    fn estimate(&mut self, x: &[f64], band: &Band, cfg: &DetectorConfig) -> DetectorResult {
        let cmnd = cmndf(x, band.lag_hi + 1);
        pick(&cmnd, band, cfg.yin_threshold)
    }
}

type Plans = (usize, Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

pub(crate) struct FastYin {
    planner: FftPlanner<f64>,
    plans: Option<Plans>,
    signal: Vec<Complex<f64>>,
    window: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    prefix: Vec<f64>,
}

impl Default for FastYin {
    fn default() -> Self {
        Self {
            planner: FftPlanner::new(),
            plans: None,
            signal: Vec::new(),
            window: Vec::new(),
            scratch: Vec::new(),
            prefix: Vec::new(),
        }
    }
}

impl FastYin {
    fn plans(&mut self, size: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        match &self.plans {
            Some((s, fwd, inv)) if *s == size => (fwd.clone(), inv.clone()),
            _ => {
                let fwd = self.planner.plan_fft_forward(size);
                let inv = self.planner.plan_fft_inverse(size);
                self.plans = Some((size, fwd.clone(), inv.clone()));
                (fwd, inv)
            }
        }
    }

    /// Same values as [`difference_direct`], via `e(0) + e(τ) - 2 c(τ)`.
    pub(crate) fn difference(&mut self, x: &[f64], max_lag: usize) -> Vec<f64> {
        let n = x.len();
        let w = n / 2;
        let max_lag = max_lag.min(w);
        // j + τ < n for every term, so an n-point circular correlation does not wrap
        let size = n;
        let (fwd, inv) = self.plans(size);

        self.signal.clear();
        self.signal.extend(x.iter().map(|&v| Complex::new(v, 0.0)));
        self.window.clear();
        self.window.extend(x[..w].iter().map(|&v| Complex::new(v, 0.0)));
        self.window.resize(size, Complex::new(0.0, 0.0));

        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        self.scratch.resize(scratch_len, Complex::new(0.0, 0.0));
        fwd.process_with_scratch(&mut self.signal, &mut self.scratch);
        fwd.process_with_scratch(&mut self.window, &mut self.scratch);
        for (s, w) in self.signal.iter_mut().zip(&self.window) {
            *s *= w.conj();
        }
        inv.process_with_scratch(&mut self.signal, &mut self.scratch);
        let norm = 1.0 / size as f64;

        self.prefix.clear();
        self.prefix.push(0.0);
        let mut acc = 0.0;
        for v in x {
            acc += v * v;
            self.prefix.push(acc);
        }
        let head = self.prefix[w];
        (0..=max_lag)
            .map(|lag| {
                let lagged = self.prefix[lag + w] - self.prefix[lag];
                let cross = self.signal[lag].re * norm;
                (head + lagged - 2.0 * cross).max(0.0)
            })
            .collect()
    }
}

impl Estimator for FastYin {
    fn estimate(&mut self, x: &[f64], band: &Band, cfg: &DetectorConfig) -> DetectorResult {
        let d = self.difference(x, band.lag_hi + 1);
        pick(&normalize(d), band, cfg.yin_threshold)
    }
}
