use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{BenchError, BenchmarkRecord, SensitivityRecord, TimingRecord};
use crate::pipeline::PitchSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

impl FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" | "json-lines" => Ok(ReportFormat::Jsonl),
            other => Err(BenchError::Precondition(format!("unknown report format `{other}`"))),
        }
    }
}

/// A record with a fixed CSV column order. Missing values are empty cells;
/// floats use the shortest representation that parses back exactly.
pub trait ReportRow: Serialize + DeserializeOwned {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ReportRow for BenchmarkRecord {
    const COLUMNS: &'static [&'static str] = &[
        "algorithm",
        "buffer_size",
        "true_midi",
        "estimated_midi",
        "abs_error_midi",
        "pitched",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.algorithm.to_string(),
            self.buffer_size.to_string(),
            self.true_midi.to_string(),
            opt(self.estimated_midi),
            opt(self.abs_error_midi),
            self.pitched.to_string(),
        ]
    }
}

impl ReportRow for TimingRecord {
    const COLUMNS: &'static [&'static str] =
        &["algorithm", "buffer_size", "mean_ns_per_buffer", "frames_measured"];

    fn cells(&self) -> Vec<String> {
        vec![
            self.algorithm.to_string(),
            self.buffer_size.to_string(),
            self.mean_ns_per_buffer.to_string(),
            self.frames_measured.to_string(),
        ]
    }
}

impl ReportRow for SensitivityRecord {
    const COLUMNS: &'static [&'static str] = &[
        "algorithm",
        "buffer_size",
        "source",
        "frames_total",
        "frames_silent",
        "frames_pitched",
        "detection_rate",
        "pitched_midi_values",
    ];

    /// The pitched values go in one cell, separated by `;`.
    fn cells(&self) -> Vec<String> {
        let values: Vec<String> = self.pitched_midi_values.iter().map(f64::to_string).collect();
        vec![
            self.algorithm.to_string(),
            self.buffer_size.to_string(),
            self.source.clone(),
            self.frames_total.to_string(),
            self.frames_silent.to_string(),
            self.frames_pitched.to_string(),
            self.detection_rate.to_string(),
            values.join(";"),
        ]
    }
}

impl ReportRow for PitchSample {
    const COLUMNS: &'static [&'static str] = &[
        "sample_index",
        "duration_ms",
        "frequency_hz",
        "mel",
        "note_name",
        "midi_number",
        "amplitude_rms",
        "pitched",
    ];

    fn cells(&self) -> Vec<String> {
        vec![
            self.sample_index.to_string(),
            self.duration_ms.to_string(),
            opt(self.frequency_hz),
            opt(self.mel),
            self.note_name.clone().unwrap_or_default(),
            self.midi_number.map(|m| m.to_string()).unwrap_or_default(),
            self.amplitude_rms.to_string(),
            self.pitched.to_string(),
        ]
    }
}

/// Writes one row per record to `path`, replacing any existing file.
pub fn emit_report<R: ReportRow>(records: &[R], format: ReportFormat, path: &Path) -> Result<(), BenchError> {
    let io = |source: std::io::Error| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            w.write_record(R::COLUMNS).map_err(|e| io(e.into()))?;
            for r in records {
                w.write_record(r.cells()).map_err(|e| io(e.into()))?;
            }
            w.flush().map_err(io)
        }
        ReportFormat::Jsonl => {
            let mut w = BufWriter::new(file);
            for r in records {
                serde_json::to_writer(&mut w, r).map_err(|e| io(e.into()))?;
                w.write_all(b"\n").map_err(io)?;
            }
            w.flush().map_err(io)
        }
    }
}

/// Reads back a JSON-lines report.
pub fn read_jsonl<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, BenchError> {
    let file = File::open(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| BenchError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::AlgorithmId;

    fn records() -> Vec<BenchmarkRecord> {
        vec![
            BenchmarkRecord {
                algorithm: AlgorithmId::Yin,
                buffer_size: 4096,
                true_midi: 48.0,
                estimated_midi: Some(48.01234567890123),
                abs_error_midi: Some(0.01234567890123),
                pitched: true,
            },
            BenchmarkRecord {
                algorithm: AlgorithmId::Mpm,
                buffer_size: 1024,
                true_midi: 36.0,
                estimated_midi: None,
                abs_error_midi: None,
                pitched: false,
            },
            BenchmarkRecord {
                algorithm: AlgorithmId::FftPeak,
                buffer_size: 16384,
                true_midi: 84.0,
                estimated_midi: Some(84.1),
                abs_error_midi: Some(0.1 + 1e-15),
                pitched: true,
            },
        ]
    }

    #[test]
    fn test_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&records(), ReportFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "algorithm,buffer_size,true_midi,estimated_midi,abs_error_midi,pitched");
        assert_eq!(lines[2], "mpm,1024,36,,,false");

        let mut rd = csv::Reader::from_path(&path).unwrap();
        for (row, rec) in rd.records().zip(records()) {
            let row = row.unwrap();
            assert_eq!(row.get(3).unwrap().parse::<f64>().ok(), rec.estimated_midi);
        }
    }

    #[test]
    fn test_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        emit_report(&records(), ReportFormat::Jsonl, &path).unwrap();
        let back: Vec<BenchmarkRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back, records());
    }

    #[test]
    fn test_sensitivity_csv_joins_values() {
        let rec = SensitivityRecord {
            algorithm: AlgorithmId::ClassicAutocorrelator,
            buffer_size: 4096,
            source: "synth:midi=50,noise=0.3".into(),
            frames_total: 3,
            frames_silent: 1,
            frames_pitched: 2,
            detection_rate: 2.0 / 3.0,
            pitched_midi_values: vec![50.5, 49.75],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        emit_report(std::slice::from_ref(&rec), ReportFormat::Csv, &path).unwrap();
        let mut rd = csv::Reader::from_path(&path).unwrap();
        let row = rd.records().next().unwrap().unwrap();
        assert_eq!(row.get(2), Some("synth:midi=50,noise=0.3"));
        assert_eq!(row.get(7), Some("50.5;49.75"));
        assert_eq!(row.get(6).unwrap().parse::<f64>().unwrap(), rec.detection_rate);
    }

    #[test]
    fn test_pitch_track_csv() {
        let rows = [
            PitchSample::pitched(440.0, 0.5, 0, 92.88),
            PitchSample::unpitched(0.01, 4096, 92.88),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_report(&rows, ReportFormat::Csv, &path).unwrap();
        let mut rd = csv::Reader::from_path(&path).unwrap();
        let got: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(got[0].get(4), Some("A4"));
        assert_eq!(got[0].get(5), Some("69"));
        assert_eq!(got[1].get(2), Some(""));
        assert_eq!(got[1].get(7), Some("false"));
    }

    #[test]
    fn test_unwritable_path() {
        let err = emit_report(&records(), ReportFormat::Csv, Path::new("/no/such/dir/r.csv")).unwrap_err();
        match err {
            BenchError::Io { path, .. } => assert_eq!(path, Path::new("/no/such/dir/r.csv")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn test_format_parse() {
        assert_eq!("CSV".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!("jsonl".parse::<ReportFormat>().unwrap(), ReportFormat::Jsonl);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
