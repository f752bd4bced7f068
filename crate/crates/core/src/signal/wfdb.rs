//! WFDB records stored in format 212: pairs of 12-bit two's-complement
//! samples packed into three bytes.
//!
//! ```text
//! byte0 = A[7:0]
//! byte1 = B[11:8] << 4 | A[11:8]
//! byte2 = B[7:0]
//! ```
//!
//! Signals sharing a data file are interleaved frame by frame, and the
//! packing runs over that interleaved stream.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Provenance, SignalBuffer, SourceFormat};
use crate::{Error, Result};

pub const FORMAT_212: u32 = 212;
const DEFAULT_GAIN: f64 = 200.0;
const DEFAULT_FREQUENCY: f64 = 250.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub file_name: String,
    pub format: u32,
    pub byte_offset: usize,
    /// ADC units per physical unit.
    pub gain: f64,
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: u32,
    pub adc_zero: i32,
    pub initial_value: Option<i32>,
    pub checksum: Option<i32>,
    pub description: String,
}

impl SignalSpec {
    /// A format 212 signal with explicit gain and baseline (ADC zero equal
    /// to the baseline, 12-bit resolution, units mV).
    pub fn new_212(file_name: &str, gain: f64, baseline: i32, description: &str) -> Self {
        SignalSpec {
            file_name: file_name.into(),
            format: FORMAT_212,
            byte_offset: 0,
            gain,
            baseline,
            units: "mV".into(),
            adc_resolution: 12,
            adc_zero: baseline,
            initial_value: None,
            checksum: None,
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WfdbHeader {
    pub record_name: String,
    pub n_signals: usize,
    pub sampling_frequency: f64,
    /// Samples per signal; 0 when the header leaves it unspecified.
    pub n_samples: usize,
    pub signals: Vec<SignalSpec>,
}

fn parse_err(name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: name.into(),
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(tok: &str, what: &str, name: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(name, line, format!("bad {what} {tok:?}")))
}

/// Splits a leading run of characters accepted by `keep` from the rest.
fn split_prefix(s: &str, keep: impl Fn(char) -> bool) -> (&str, &str) {
    let end = s.find(|c: char| !keep(c)).unwrap_or(s.len());
    s.split_at(end)
}

impl WfdbHeader {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        WfdbHeader::parse(&text, &path.display().to_string())
    }

    /// Parses the record line and one line per signal. Only format 212 is
    /// accepted; multi-segment records are rejected.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (ln, record) = lines
            .next()
            .ok_or_else(|| parse_err(name, 0, "missing record line"))?;
        let mut toks = record.split_whitespace();
        let record_name = toks.next().unwrap_or_default().to_string();
        if record_name.contains('/') {
            return Err(parse_err(
                name,
                ln,
                "multi-segment records are not supported",
            ));
        }
        let n_signals: usize = match toks.next() {
            Some(t) => number(t, "signal count", name, ln)?,
            None => return Err(parse_err(name, ln, "missing signal count")),
        };
        let sampling_frequency = match toks.next() {
            Some(t) => {
                let (freq, _) = split_prefix(t, |c| c.is_ascii_digit() || c == '.' || c == 'e');
                number::<f64>(freq, "sampling frequency", name, ln)?
            }
            None => DEFAULT_FREQUENCY,
        };
        if !(sampling_frequency.is_finite() && sampling_frequency > 0.0) {
            return Err(parse_err(name, ln, "sampling frequency must be positive"));
        }
        let n_samples = match toks.next() {
            Some(t) => number(t, "sample count", name, ln)?,
            None => 0,
        };

        let mut signals = Vec::with_capacity(n_signals);
        for _ in 0..n_signals {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| parse_err(name, 0, format!("expected {n_signals} signal lines")))?;
            signals.push(parse_signal(line, name, ln)?);
        }
        Ok(WfdbHeader {
            record_name,
            n_signals,
            sampling_frequency,
            n_samples,
            signals,
        })
    }

    /// Header text in the same grammar [`WfdbHeader::parse`] reads.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.record_name, self.n_signals, self.sampling_frequency, self.n_samples
        );
        for s in &self.signals {
            let mut format = s.format.to_string();
            if s.byte_offset > 0 {
                format.push_str(&format!("+{}", s.byte_offset));
            }
            out.push_str(&format!(
                "{} {} {}({})/{} {} {}",
                s.file_name, format, s.gain, s.baseline, s.units, s.adc_resolution, s.adc_zero
            ));
            // The trailing fields are positional, so a missing checksum
            // ends the line.
            if let Some(sum) = s.checksum {
                out.push_str(&format!(
                    " {} {} 0 {}",
                    s.initial_value.unwrap_or(0),
                    sum,
                    s.description
                ));
            }
            out.push('\n');
        }
        out
    }
}

fn parse_signal(line: &str, name: &str, ln: usize) -> Result<SignalSpec> {
    let mut toks = line
        .splitn(9, char::is_whitespace)
        .filter(|t| !t.is_empty());
    let file_name = toks
        .next()
        .ok_or_else(|| parse_err(name, ln, "missing file name"))?
        .to_string();
    let fmt_tok = toks
        .next()
        .ok_or_else(|| parse_err(name, ln, "missing format"))?;
    let (code, mut rest) = split_prefix(fmt_tok, |c| c.is_ascii_digit());
    let format: u32 = number(code, "format", name, ln)?;
    if format != FORMAT_212 {
        return Err(Error::UnsupportedFormat(format));
    }
    let mut byte_offset = 0;
    while !rest.is_empty() {
        let (tag, tail) = rest.split_at(1);
        let (value, tail) = split_prefix(tail, |c| c.is_ascii_digit());
        let v: usize = number(value, "format modifier", name, ln)?;
        match tag {
            "x" if v == 1 => {}
            "x" => {
                return Err(parse_err(
                    name,
                    ln,
                    "multiple samples per frame are not supported",
                ))
            }
            ":" if v == 0 => {}
            ":" => return Err(parse_err(name, ln, "skewed signals are not supported")),
            "+" => byte_offset = v,
            _ => return Err(parse_err(name, ln, format!("bad format field {fmt_tok:?}"))),
        }
        rest = tail;
    }

    let mut gain = DEFAULT_GAIN;
    let mut baseline = None;
    let mut units = "mV".to_string();
    if let Some(tok) = toks.next() {
        let (g, mut tail) = split_prefix(tok, |c| {
            c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')
        });
        gain = number(g, "gain", name, ln)?;
        if gain == 0.0 {
            gain = DEFAULT_GAIN;
        }
        if let Some(t) = tail.strip_prefix('(') {
            let close = t
                .find(')')
                .ok_or_else(|| parse_err(name, ln, "unclosed baseline"))?;
            baseline = Some(number(&t[..close], "baseline", name, ln)?);
            tail = &t[close + 1..];
        }
        if let Some(u) = tail.strip_prefix('/') {
            units = u.to_string();
        } else if !tail.is_empty() {
            return Err(parse_err(name, ln, format!("bad gain field {tok:?}")));
        }
    }
    if !(gain.is_finite() && gain > 0.0) {
        return Err(parse_err(
            name,
            ln,
            format!("gain must be positive, got {gain}"),
        ));
    }
    let adc_resolution = match toks.next() {
        Some(t) => number(t, "ADC resolution", name, ln)?,
        None => 12,
    };
    let adc_zero = match toks.next() {
        Some(t) => number(t, "ADC zero", name, ln)?,
        None => 0,
    };
    let initial_value = toks
        .next()
        .map(|t| number(t, "initial value", name, ln))
        .transpose()?;
    let checksum = toks
        .next()
        .map(|t| number(t, "checksum", name, ln))
        .transpose()?;
    let _block_size = toks.next();
    let description = toks.next().unwrap_or_default().trim().to_string();
    Ok(SignalSpec {
        file_name,
        format,
        byte_offset,
        gain,
        baseline: baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        initial_value,
        checksum,
        description,
    })
}

/// Bytes occupied by `count` samples.
pub fn packed_len(count: usize) -> usize {
    count / 2 * 3 + (count % 2) * 2
}

fn sign_extend(raw: u16) -> i16 {
    ((raw << 4) as i16) >> 4
}

/// Unpacks `count` samples. An odd final sample occupies two bytes.
pub fn decode_212(bytes: &[u8], count: usize) -> Result<Vec<i16>> {
    let needed = packed_len(count);
    if bytes.len() < needed {
        return Err(Error::Truncated {
            needed,
            found: bytes.len(),
        });
    }
    let mut out = Vec::with_capacity(count);
    for chunk in bytes[..needed].chunks(3) {
        let a = chunk[0] as u16 | ((chunk[1] as u16 & 0x0F) << 8);
        out.push(sign_extend(a));
        if out.len() < count {
            let b = chunk[2] as u16 | ((chunk[1] as u16 & 0xF0) << 4);
            out.push(sign_extend(b));
        }
    }
    Ok(out)
}

/// Packs samples into format 212. Only the low 12 bits of each value are
/// kept, so callers must stay within `-2048..=2047`. Used to write test
/// fixtures; embedded output is never re-quantized to the ADC grid.
pub fn encode_212(samples: &[i16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(packed_len(samples.len()));
    for pair in samples.chunks(2) {
        let a = pair[0] as u16 & 0x0FFF;
        out.push((a & 0xFF) as u8);
        match pair.get(1) {
            Some(&b) => {
                let b = b as u16 & 0x0FFF;
                out.push((((b >> 8) << 4) | (a >> 8)) as u8);
                out.push((b & 0xFF) as u8);
            }
            None => out.push((a >> 8) as u8),
        }
    }
    out
}

/// 16-bit wrapping sum used by WFDB header checksums.
pub fn checksum(samples: &[i16]) -> i16 {
    samples.iter().fold(0i16, |acc, &v| acc.wrapping_add(v))
}

/// Reads one channel from a header and its data file, converting to
/// physical units as `(adc − baseline) / gain`.
pub fn read_wfdb_212(
    header_path: impl AsRef<Path>,
    dat_path: impl AsRef<Path>,
    channel: usize,
) -> Result<SignalBuffer> {
    let header_path = header_path.as_ref();
    let dat_path = dat_path.as_ref();
    let header = WfdbHeader::read(header_path)?;
    let bytes = fs::read(dat_path).map_err(|e| Error::io(dat_path, e))?;
    let adc = decode_channel(&header, &bytes, channel)?;
    let spec = &header.signals[channel];
    if let Some(expected) = spec.checksum {
        if header.n_samples > 0 && checksum(&adc) != expected as i16 {
            return Err(parse_err(
                &header_path.display().to_string(),
                0,
                format!("checksum mismatch on signal {channel}"),
            ));
        }
    }
    let samples = adc
        .iter()
        .map(|&v| (v as f64 - spec.baseline as f64) / spec.gain)
        .collect();
    let label = if spec.description.is_empty() {
        format!("{}:{}", header.record_name, channel)
    } else {
        spec.description.clone()
    };
    SignalBuffer::new(
        samples,
        header.sampling_frequency,
        label,
        Provenance {
            file: Some(header_path.display().to_string()),
            format: SourceFormat::Wfdb212,
            channel: Some(channel),
        },
    )
}

/// Raw ADC values of `channel` from the bytes of its data file.
pub fn decode_channel(header: &WfdbHeader, bytes: &[u8], channel: usize) -> Result<Vec<i16>> {
    if channel >= header.n_signals {
        return Err(Error::ChannelOutOfRange {
            channel,
            available: header.n_signals,
        });
    }
    let spec = &header.signals[channel];
    let group: Vec<usize> = (0..header.n_signals)
        .filter(|&i| header.signals[i].file_name == spec.file_name)
        .collect();
    let width = group.len();
    let position = group
        .iter()
        .position(|&i| i == channel)
        .expect("channel in its group");
    let data = bytes.get(spec.byte_offset..).ok_or(Error::Truncated {
        needed: spec.byte_offset,
        found: bytes.len(),
    })?;
    let frames = if header.n_samples > 0 {
        header.n_samples
    } else {
        data.len() * 2 / 3 / width
    };
    let stream = decode_212(data, frames * width)?;
    Ok(stream
        .iter()
        .skip(position)
        .step_by(width)
        .copied()
        .collect())
}

/// Reads `channel` of the record whose header is `path` (the `.hea` suffix
/// may be omitted). The data file is resolved next to the header.
pub fn read_wfdb_record(path: impl AsRef<Path>, channel: usize) -> Result<SignalBuffer> {
    let header_path = header_path(path.as_ref());
    let header = WfdbHeader::read(&header_path)?;
    let spec = header
        .signals
        .get(channel)
        .ok_or(Error::ChannelOutOfRange {
            channel,
            available: header.n_signals,
        })?;
    let dir = header_path.parent().unwrap_or(Path::new(""));
    read_wfdb_212(&header_path, dir.join(&spec.file_name), channel)
}

fn header_path(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "hea") {
        path.to_path_buf()
    } else {
        let mut s = path.as_os_str().to_owned();
        s.push(".hea");
        PathBuf::from(s)
    }
}
