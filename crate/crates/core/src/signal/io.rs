//! Recording and event-table file formats.
//!
//! * Recording CSV: a header row of channel names, then one row per sample.
//!   The sampling rate is not stored and must be supplied by the caller.
//! * `raw_f64`: a 16-byte header (`b"TFR1"`, then little-endian u32 channel
//!   count, u32 sampling rate in Hz, u32 samples per channel) followed by
//!   channel-major little-endian f64 samples.
//! * Events CSV: `onset_sample,duration_samples,label`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{ClassLabel, Event, EventTable, MultichannelRecording};
use crate::error::{Error, Result};

const RAW_MAGIC: &[u8; 4] = b"TFR1";
const RAW_HEADER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordingFormat {
    Csv { sampling_rate: f64 },
    RawF64,
}

pub fn load_recording(path: &Path, format: RecordingFormat) -> Result<MultichannelRecording> {
    match format {
        RecordingFormat::Csv { sampling_rate } => load_csv(path, sampling_rate),
        RecordingFormat::RawF64 => load_raw(path),
    }
}

fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value `{field}`"),
        });
    }
    Ok(v)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn load_csv(path: &Path, sampling_rate: f64) -> Result<MultichannelRecording> {
    let mut reader = csv_reader(path)?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            message: "missing channel-name header".into(),
        });
    }
    let mut channels = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = row + 2;
        if record.len() != names.len() {
            return Err(Error::InconsistentChannelCount {
                line,
                expected: names.len(),
                found: record.len(),
            });
        }
        for (ch, field) in channels.iter_mut().zip(record.iter()) {
            ch.push(parse_value(field, line)?);
        }
    }
    MultichannelRecording::new(channels, sampling_rate, names)
}

fn load_raw(path: &Path) -> Result<MultichannelRecording> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |message: &str| Error::Parse {
        line: 0,
        message: message.to_string(),
    };
    if bytes.len() < RAW_HEADER || &bytes[..4] != RAW_MAGIC {
        return Err(bad("missing TFR1 header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (n_ch, fs, n) = (word(4), word(8), word(12));
    if n_ch == 0 || n == 0 {
        return Err(bad("raw file declares no channels or no samples"));
    }
    let body = &bytes[RAW_HEADER..];
    if body.len() != n_ch * n * 8 {
        return Err(bad(&format!(
            "payload of {} bytes does not match {n_ch} channels x {n} samples",
            body.len()
        )));
    }
    let mut values = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    let mut channels = Vec::with_capacity(n_ch);
    for c in 0..n_ch {
        let ch: Vec<f64> = values.by_ref().take(n).collect();
        if let Some(t) = ch.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: 0,
                message: format!("non-finite sample at channel {c}, index {t}"),
            });
        }
        channels.push(ch);
    }
    MultichannelRecording::with_default_names(channels, fs as f64)
}

pub fn write_recording_raw(rec: &MultichannelRecording, path: &Path) -> Result<()> {
    let fs = rec.sampling_rate();
    if fs.fract() != 0.0 || fs > u32::MAX as f64 {
        return Err(Error::InvalidParam(format!(
            "raw format needs an integral sampling rate, got {fs}"
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        w.write_all(RAW_MAGIC)?;
        w.write_all(&(rec.n_channels() as u32).to_le_bytes())?;
        w.write_all(&(fs as u32).to_le_bytes())?;
        w.write_all(&(rec.len() as u32).to_le_bytes())?;
        for ch in rec.channels() {
            for v in ch {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn write_recording_csv(rec: &MultichannelRecording, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "{}", rec.channel_names().join(","))?;
        for t in 0..rec.len() {
            for c in 0..rec.n_channels() {
                if c > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{}", rec.channel(c)[t])?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn load_events(path: &Path) -> Result<EventTable> {
    let mut reader = csv_reader(path)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header != ["onset_sample", "duration_samples", "label"] {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header onset_sample,duration_samples,label, found {}",
                header.join(",")
            ),
        });
    }
    let mut events = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = row + 2;
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let int = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("`{s}` is not a sample index"),
            })
        };
        let label: ClassLabel = record[2].parse().map_err(|message| Error::Parse { line, message })?;
        events.push(Event {
            onset: int(&record[0])?,
            duration: int(&record[1])?,
            label,
        });
    }
    EventTable::new(events)
}

pub fn write_events(events: &EventTable, path: &Path) -> Result<()> {
    let mut out = String::from("onset_sample,duration_samples,label\n");
    for e in events.events() {
        out.push_str(&format!("{},{},{}\n", e.onset, e.duration, e.label));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
