//! Frequency, MIDI note number and mel conversions.
//!
//! Equal temperament around a configurable A4 reference (440 Hz by default),
//! and the 2595 / 700 mel formula. Every threshold in the rest of the crate
//! (mel ceilings, critical pitches, the midi-60 voice limit) goes through
//! these functions.

use super::SignalError;

pub const A4_HZ: f64 = 440.0;
pub const A4_MIDI: f64 = 69.0;
pub const MEL_SCALE: f64 = 2595.0;
pub const MEL_BREAK_HZ: f64 = 700.0;

const NOTE_NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

/// Equal-tempered note scale with an adjustable reference pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoteScale {
    pub a4_hz: f64,
}

impl Default for NoteScale {
    fn default() -> Self {
        Self { a4_hz: A4_HZ }
    }
}

impl NoteScale {
    pub fn new(a4_hz: f64) -> Result<Self, SignalError> {
        if !(a4_hz.is_finite() && a4_hz > 0.0) {
            return Err(SignalError::Domain(format!(
                "reference pitch must be positive and finite, got {a4_hz}"
            )));
        }
        Ok(Self { a4_hz })
    }

    pub fn midi_from_freq(&self, freq_hz: f64) -> Result<f64, SignalError> {
        if !(freq_hz.is_finite() && freq_hz > 0.0) {
            return Err(SignalError::Domain(format!(
                "frequency must be positive and finite, got {freq_hz}"
            )));
        }
        Ok(A4_MIDI + 12.0 * (freq_hz / self.a4_hz).log2())
    }

    pub fn freq_from_midi(&self, midi: f64) -> Result<f64, SignalError> {
        if !midi.is_finite() {
            return Err(SignalError::Domain(format!(
                "midi note number must be finite, got {midi}"
            )));
        }
        Ok(self.a4_hz * ((midi - A4_MIDI) / 12.0).exp2())
    }
}

/// MIDI note number of `freq_hz` at A4 = 440 Hz.
pub fn midi_from_freq(freq_hz: f64) -> Result<f64, SignalError> {
    NoteScale::default().midi_from_freq(freq_hz)
}

/// Frequency in Hz of a (possibly fractional) MIDI note at A4 = 440 Hz.
pub fn freq_from_midi(midi: f64) -> Result<f64, SignalError> {
    NoteScale::default().freq_from_midi(midi)
}

pub fn mel_from_freq(freq_hz: f64) -> Result<f64, SignalError> {
    if !(freq_hz.is_finite() && freq_hz >= 0.0) {
        return Err(SignalError::Domain(format!(
            "frequency must be non-negative and finite, got {freq_hz}"
        )));
    }
    Ok(MEL_SCALE * (1.0 + freq_hz / MEL_BREAK_HZ).log10())
}

pub fn freq_from_mel(mel: f64) -> Result<f64, SignalError> {
    if !(mel.is_finite() && mel >= 0.0) {
        return Err(SignalError::Domain(format!(
            "mel value must be non-negative and finite, got {mel}"
        )));
    }
    Ok(MEL_BREAK_HZ * (10f64.powf(mel / MEL_SCALE) - 1.0))
}

/// Scientific pitch notation of the nearest integer MIDI note, e.g. 69 -> "A4".
pub fn note_name(midi: f64) -> String {
    let nearest = midi.round() as i64;
    let pitch_class = nearest.rem_euclid(12) as usize;
    let octave = nearest.div_euclid(12) - 1;
    format!("{}{}", NOTE_NAMES[pitch_class], octave)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn test_reference_points() {
        assert_eq!(midi_from_freq(440.0).unwrap(), 69.0);
        assert_eq!(midi_from_freq(220.0).unwrap(), 57.0);
        assert_eq!(freq_from_midi(69.0).unwrap(), 440.0);
        assert_eq!(freq_from_midi(57.0).unwrap(), 220.0);
    }

    #[test]
    fn test_middle_c() {
        // 440 * 2^(-9/12) = 261.6255653...
        let c4 = 440.0 * 2f64.powf(-0.75);
        assert!((freq_from_midi(60.0).unwrap() - 261.6256).abs() < 1e-4);
        assert!((midi_from_freq(c4).unwrap() - 60.0).abs() < 1e-9);
        // 261.6256 is c4 rounded to 4 decimals, 2.3e-6 semitones away
        assert!((midi_from_freq(261.6256).unwrap() - 60.0).abs() < 1e-5);
    }

    #[test]
    fn test_mel_landmarks() {
        assert_eq!(mel_from_freq(0.0).unwrap(), 0.0);
        assert_relative_eq!(mel_from_freq(700.0).unwrap(), 2595.0 * 2f64.log10());
        assert!((mel_from_freq(700.0).unwrap() - 781.17).abs() < 0.01);
        assert_eq!(freq_from_mel(0.0).unwrap(), 0.0);
        assert!((freq_from_mel(781.17).unwrap() - 700.0).abs() < 0.01);

        // 700 * (10^(400/2595) - 1), evaluated through exp/ln
        let closed = 700.0 * ((400.0 / 2595.0) * std::f64::consts::LN_10).exp_m1();
        let f400 = freq_from_mel(400.0).unwrap();
        assert_relative_eq!(f400, closed, max_relative = 1e-12);
        assert!((f400 - 298.2).abs() < 0.1, "{f400}");
        assert!((mel_from_freq(298.2).unwrap() - 400.0).abs() < 0.1);

        let closed = 700.0 * ((50.0 / 2595.0) * std::f64::consts::LN_10).exp_m1();
        let f50 = freq_from_mel(50.0).unwrap();
        assert_relative_eq!(f50, closed, max_relative = 1e-12);
        assert!((f50 - 31.76).abs() < 0.01, "{f50}");
        assert_relative_eq!(mel_from_freq(f50).unwrap(), 50.0, max_relative = 1e-12);
    }

    #[test]
    fn test_domain_errors() {
        assert!(midi_from_freq(0.0).is_err());
        assert!(midi_from_freq(-1.0).is_err());
        assert!(midi_from_freq(f64::NAN).is_err());
        assert!(freq_from_midi(f64::INFINITY).is_err());
        assert!(mel_from_freq(-0.5).is_err());
        assert!(freq_from_mel(-5.0).is_err());
        assert!(NoteScale::new(0.0).is_err());
    }

    #[test]
    fn test_note_names() {
        assert_eq!(note_name(69.0), "A4");
        assert_eq!(note_name(60.0), "C4");
        assert_eq!(note_name(59.6), "C4");
        assert_eq!(note_name(61.0), "C#4");
        assert_eq!(note_name(36.0), "C2");
        assert_eq!(note_name(11.0), "B-1");
    }

    #[test]
    fn test_custom_reference() {
        let scale = NoteScale::new(442.0).unwrap();
        assert_eq!(scale.midi_from_freq(442.0).unwrap(), 69.0);
    }

    proptest! {
        #[test]
        fn prop_round_trips(f in 20.0f64..20000.0) {
            let back = freq_from_midi(midi_from_freq(f).unwrap()).unwrap();
            prop_assert!(((back - f) / f).abs() < 1e-9);
            let back = freq_from_mel(mel_from_freq(f).unwrap()).unwrap();
            prop_assert!(((back - f) / f).abs() < 1e-9);
        }

        #[test]
        fn prop_strictly_increasing(f in 20.0f64..19999.0, step in 1e-3f64..1.0) {
            prop_assert!(midi_from_freq(f + step).unwrap() > midi_from_freq(f).unwrap());
            prop_assert!(mel_from_freq(f + step).unwrap() > mel_from_freq(f).unwrap());
        }
    }
}
