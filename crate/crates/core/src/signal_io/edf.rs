//! Reader and writer for plain EDF (16-bit) files.
//!
//! Layout: a 256-byte ASCII fixed header, then `ns` per-signal headers of
//! 256 bytes stored field-by-field across signals, then data records of
//! little-endian two's-complement `i16` samples, channel-major within a
//! record.

use std::collections::HashMap;
use std::ops::Range;

use ndarray::Array2;
use thiserror::Error;

use super::recording::{ChannelLabel, Recording};

const FIXED_HEADER: usize = 256;
const SIGNAL_HEADER: usize = 256;
const ANNOTATION_LABEL: &str = "EDF Annotations";

#[derive(Debug, Error, PartialEq)]
pub enum EdfError {
    #[error("truncated header: need {needed} bytes at offset {offset}, file has {len}")]
    Truncated { offset: usize, needed: usize, len: usize },
    #[error("invalid {field} at offset {offset}: {value:?}")]
    InvalidField {
        field: &'static str,
        offset: usize,
        value: String,
    },
    #[error("data region of {declared} bytes starting at offset {offset} exceeds file length {len}")]
    DataRegion { offset: usize, declared: usize, len: usize },
    #[error("signal {signal} ({label}) has digital max {dig_max} <= digital min {dig_min} (header offset {offset})")]
    DigitalRange {
        signal: usize,
        label: String,
        dig_min: i64,
        dig_max: i64,
        offset: usize,
    },
    #[error("signals have different sampling rates ({0:?}); mixed-rate files are not supported")]
    MixedRates(Vec<usize>),
    #[error("file contains no EEG signals")]
    NoSignals,
    #[error("recording cannot be written as EDF: {0}")]
    Unrepresentable(String),
}

#[derive(Debug, Clone)]
struct SignalHeader {
    label: String,
    phys_min: f64,
    phys_max: f64,
    dig_min: i64,
    dig_max: i64,
    samples_per_record: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<(usize, &'a str), EdfError> {
        let offset = self.pos;
        let end = offset + n;
        if end > self.bytes.len() {
            return Err(EdfError::Truncated {
                offset,
                needed: n,
                len: self.bytes.len(),
            });
        }
        self.pos = end;
        let raw = &self.bytes[offset..end];
        // EDF headers are ASCII; anything else is reported as an invalid field
        let text = std::str::from_utf8(raw).map_err(|_| EdfError::InvalidField {
            field: "ascii text",
            offset,
            value: String::from_utf8_lossy(raw).into_owned(),
        })?;
        Ok((offset, text.trim()))
    }

    fn parse<T: std::str::FromStr>(&mut self, n: usize, field: &'static str) -> Result<T, EdfError> {
        let (offset, text) = self.take(n)?;
        text.parse().map_err(|_| EdfError::InvalidField {
            field,
            offset,
            value: text.to_string(),
        })
    }
}

/// Parses an EDF file into a [`Recording`].
///
/// Annotation pseudo-signals are skipped, as are signals whose label is not
/// a bipolar derivation (CHB-MIT pads some montages with `-` placeholders).
/// Repeated labels get `-0`, `-1`, ... suffixes in file order.
pub fn parse_edf(bytes: &[u8]) -> Result<Recording, EdfError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < FIXED_HEADER {
        return Err(EdfError::Truncated {
            offset: 0,
            needed: FIXED_HEADER,
            len: bytes.len(),
        });
    }
    cur.take(8 + 80 + 80 + 8 + 8)?;
    let header_bytes: usize = cur.parse(8, "header byte count")?;
    cur.take(44)?;
    let n_records_offset = cur.pos;
    let n_records: i64 = cur.parse(8, "number of data records")?;
    let record_duration: f64 = cur.parse(8, "data record duration")?;
    let ns_offset = cur.pos;
    let ns: usize = cur.parse(4, "number of signals")?;
    if ns == 0 {
        return Err(EdfError::NoSignals);
    }
    if !(record_duration.is_finite() && record_duration > 0.0) {
        return Err(EdfError::InvalidField {
            field: "data record duration",
            offset: n_records_offset + 8,
            value: record_duration.to_string(),
        });
    }
    let expected_header = FIXED_HEADER + ns * SIGNAL_HEADER;
    if header_bytes != expected_header {
        return Err(EdfError::InvalidField {
            field: "header byte count",
            offset: 184,
            value: format!("{header_bytes} (expected {expected_header} for {ns} signals at offset {ns_offset})"),
        });
    }
    if bytes.len() < expected_header {
        return Err(EdfError::Truncated {
            offset: FIXED_HEADER,
            needed: ns * SIGNAL_HEADER,
            len: bytes.len(),
        });
    }

    let mut signals: Vec<SignalHeader> = Vec::with_capacity(ns);
    let mut labels = Vec::with_capacity(ns);
    for _ in 0..ns {
        labels.push(cur.take(16)?.1.to_string());
    }
    cur.take(ns * 80)?; // transducer
    cur.take(ns * 8)?; // physical dimension
    let mut phys_min = Vec::with_capacity(ns);
    for _ in 0..ns {
        phys_min.push(cur.parse::<f64>(8, "physical minimum")?);
    }
    let mut phys_max = Vec::with_capacity(ns);
    for _ in 0..ns {
        phys_max.push(cur.parse::<f64>(8, "physical maximum")?);
    }
    let mut dig_min = Vec::with_capacity(ns);
    for _ in 0..ns {
        dig_min.push(cur.parse::<i64>(8, "digital minimum")?);
    }
    let dig_max_offset = cur.pos;
    let mut dig_max = Vec::with_capacity(ns);
    for _ in 0..ns {
        dig_max.push(cur.parse::<i64>(8, "digital maximum")?);
    }
    cur.take(ns * 80)?; // prefiltering
    let mut spr = Vec::with_capacity(ns);
    for _ in 0..ns {
        spr.push(cur.parse::<usize>(8, "samples per record")?);
    }
    cur.take(ns * 32)?;
    debug_assert_eq!(cur.pos, expected_header);

    for i in 0..ns {
        signals.push(SignalHeader {
            label: labels[i].clone(),
            phys_min: phys_min[i],
            phys_max: phys_max[i],
            dig_min: dig_min[i],
            dig_max: dig_max[i],
            samples_per_record: spr[i],
        });
    }

    let record_samples: usize = signals.iter().map(|s| s.samples_per_record).sum();
    let record_bytes = record_samples * 2;
    let available = bytes.len() - expected_header;
    let n_records = if n_records < 0 {
        // -1 marks an unfinished recording; use the complete records present
        available.checked_div(record_bytes).unwrap_or(0)
    } else {
        n_records as usize
    };
    let declared = n_records
        .checked_mul(record_bytes)
        .ok_or(EdfError::DataRegion {
            offset: expected_header,
            declared: usize::MAX,
            len: bytes.len(),
        })?;
    if declared > available {
        return Err(EdfError::DataRegion {
            offset: expected_header,
            declared,
            len: bytes.len(),
        });
    }

    // signal index -> byte range within one record
    let mut offsets: Vec<Range<usize>> = Vec::with_capacity(ns);
    let mut acc = 0;
    for s in &signals {
        offsets.push(acc..acc + s.samples_per_record * 2);
        acc += s.samples_per_record * 2;
    }

    let keep: Vec<usize> = (0..ns)
        .filter(|&i| {
            let label = signals[i].label.as_str();
            if label == ANNOTATION_LABEL {
                return false;
            }
            if ChannelLabel::parse(label).is_err() {
                log::warn!("skipping non-bipolar signal {i} ({label:?})");
                return false;
            }
            true
        })
        .collect();
    if keep.is_empty() {
        return Err(EdfError::NoSignals);
    }
    for &i in &keep {
        let s = &signals[i];
        if s.dig_max <= s.dig_min {
            return Err(EdfError::DigitalRange {
                signal: i,
                label: s.label.clone(),
                dig_min: s.dig_min,
                dig_max: s.dig_max,
                offset: dig_max_offset + 8 * i,
            });
        }
    }
    let rates: Vec<usize> = keep.iter().map(|&i| signals[i].samples_per_record).collect();
    if rates.iter().any(|&r| r != rates[0]) {
        return Err(EdfError::MixedRates(rates));
    }
    let spr = rates[0];
    let fs = spr as f64 / record_duration;

    let n_samples = n_records * spr;
    let mut data = Array2::<f64>::zeros((keep.len(), n_samples));
    let region = &bytes[expected_header..expected_header + declared];
    for (row, &i) in keep.iter().enumerate() {
        let s = &signals[i];
        let gain = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min) as f64;
        let mut out = data.row_mut(row);
        for r in 0..n_records {
            let rec = &region[r * record_bytes..(r + 1) * record_bytes];
            let chunk = &rec[offsets[i].clone()];
            for (j, pair) in chunk.chunks_exact(2).enumerate() {
                let dig = i16::from_le_bytes([pair[0], pair[1]]) as i64;
                out[r * spr + j] = s.phys_min + (dig - s.dig_min) as f64 * gain;
            }
        }
    }

    let raw_labels: Vec<&str> = keep.iter().map(|&i| signals[i].label.as_str()).collect();
    let channels = disambiguate(&raw_labels);
    Ok(Recording::new(channels, fs, data).expect("shape is consistent by construction"))
}

fn disambiguate(raw: &[&str]) -> Vec<ChannelLabel> {
    let upper: Vec<String> = raw.iter().map(|l| l.trim().to_uppercase()).collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in &upper {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    upper
        .iter()
        .map(|l| {
            let label = if counts[l.as_str()] > 1 {
                let n = seen.entry(l.as_str()).or_default();
                let tagged = format!("{l}-{n}");
                *n += 1;
                tagged
            } else {
                l.clone()
            };
            ChannelLabel::parse(&label).expect("labels were validated before disambiguation")
        })
        .collect()
}

fn field(out: &mut Vec<u8>, text: &str, width: usize) -> Result<(), EdfError> {
    if text.len() > width || !text.is_ascii() {
        return Err(EdfError::Unrepresentable(format!(
            "{text:?} does not fit a {width}-byte ASCII field"
        )));
    }
    out.extend_from_slice(text.as_bytes());
    out.extend(std::iter::repeat_n(b' ', width - text.len()));
    Ok(())
}

/// Formats `value` into at most 8 characters, rounding away from the data
/// (down for a minimum, up for a maximum). Returns the text and the exact
/// value a reader will parse back.
fn bound_text(value: f64, round_up: bool) -> Result<(String, f64), EdfError> {
    for decimals in (0..=6).rev() {
        let scale = 10f64.powi(decimals);
        let scaled = value * scale;
        let rounded = if round_up { scaled.ceil() } else { scaled.floor() } / scale;
        let text = format!("{rounded:.prec$}", prec = decimals as usize);
        if text.len() <= 8 {
            let parsed: f64 = text.parse().expect("formatted float parses");
            return Ok((text, parsed));
        }
    }
    Err(EdfError::Unrepresentable(format!(
        "physical bound {value} does not fit 8 characters"
    )))
}

/// Serializes a recording as EDF with one-second data records.
///
/// Each channel gets its own physical range spanning its data, quantized to
/// the full 16-bit digital range.
pub fn write_edf(recording: &Recording) -> Result<Vec<u8>, EdfError> {
    let fs = recording.fs();
    if fs.fract() != 0.0 || fs > 99_999_999.0 {
        return Err(EdfError::Unrepresentable(format!(
            "sampling rate {fs} Hz is not an integer"
        )));
    }
    let spr = fs as usize;
    let n = recording.n_samples();
    if !n.is_multiple_of(spr) {
        return Err(EdfError::Unrepresentable(format!(
            "{n} samples is not a whole number of one-second records at {fs} Hz"
        )));
    }
    let ns = recording.n_channels();
    if ns > 9999 {
        return Err(EdfError::Unrepresentable("more than 9999 signals".into()));
    }
    let n_records = n / spr;
    let (dig_min, dig_max) = (i16::MIN as i64, i16::MAX as i64);

    let mut bounds = Vec::with_capacity(ns);
    for row in recording.data().rows() {
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(EdfError::Unrepresentable("non-finite samples".into()));
        }
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let (lo_text, lo_val) = bound_text(lo, false)?;
        let (hi_text, hi_val) = bound_text(hi, true)?;
        bounds.push((lo_text, lo_val, hi_text, hi_val));
    }

    let mut out = Vec::with_capacity(FIXED_HEADER * (ns + 1) + n * ns * 2);
    field(&mut out, "0", 8)?;
    field(&mut out, "X X X X", 80)?;
    field(&mut out, "Startdate X X X X", 80)?;
    field(&mut out, "01.01.00", 8)?;
    field(&mut out, "00.00.00", 8)?;
    field(&mut out, &(FIXED_HEADER * (ns + 1)).to_string(), 8)?;
    field(&mut out, "", 44)?;
    field(&mut out, &n_records.to_string(), 8)?;
    field(&mut out, "1", 8)?;
    field(&mut out, &ns.to_string(), 4)?;
    for ch in recording.channels() {
        field(&mut out, &ch.raw, 16)?;
    }
    for _ in 0..ns {
        field(&mut out, "", 80)?;
    }
    for _ in 0..ns {
        field(&mut out, "uV", 8)?;
    }
    for b in &bounds {
        field(&mut out, &b.0, 8)?;
    }
    for b in &bounds {
        field(&mut out, &b.2, 8)?;
    }
    for _ in 0..ns {
        field(&mut out, &dig_min.to_string(), 8)?;
    }
    for _ in 0..ns {
        field(&mut out, &dig_max.to_string(), 8)?;
    }
    for _ in 0..ns {
        field(&mut out, "", 80)?;
    }
    for _ in 0..ns {
        field(&mut out, &spr.to_string(), 8)?;
    }
    for _ in 0..ns {
        field(&mut out, "", 32)?;
    }

    let data = recording.data();
    for r in 0..n_records {
        for (c, b) in bounds.iter().enumerate() {
            let (lo, hi) = (b.1, b.3);
            let step = (hi - lo) / (dig_max - dig_min) as f64;
            for j in r * spr..(r + 1) * spr {
                let dig = ((data[[c, j]] - lo) / step).round() as i64 + dig_min;
                let dig = dig.clamp(dig_min, dig_max) as i16;
                out.extend_from_slice(&dig.to_le_bytes());
            }
        }
    }
    Ok(out)
}
