use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Provenance, SignalBuffer, SourceFormat, CSV_SAMPLE_RATE};
use crate::{Error, Result};

/// Reads samples from text: one per line or comma-separated. A single header
/// line is allowed as the first non-blank line; blank lines are skipped.
pub fn read_csv(path: impl AsRef<Path>) -> Result<SignalBuffer> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (samples, header) = parse(&text, &path.display().to_string())?;
    SignalBuffer::new(
        samples,
        CSV_SAMPLE_RATE,
        header.unwrap_or_default(),
        Provenance {
            file: Some(path.display().to_string()),
            format: SourceFormat::Csv,
            channel: None,
        },
    )
}

fn parse(text: &str, name: &str) -> Result<(Vec<f64>, Option<String>)> {
    let mut samples = Vec::new();
    let mut header = None;
    let mut seen_content = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let first = !seen_content;
        seen_content = true;
        let parsed: std::result::Result<Vec<f64>, String> = line
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| t.to_string()))
            .collect();
        match parsed {
            Ok(values) => {
                if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        path: name.into(),
                        line: i + 1,
                        message: format!("non-finite sample {bad}"),
                    });
                }
                samples.extend(values);
            }
            Err(_) if first => header = Some(line.to_string()),
            Err(token) => {
                return Err(Error::Parse {
                    path: name.into(),
                    line: i + 1,
                    message: format!("cannot parse {token:?} as a number"),
                })
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            path: name.into(),
            line: 0,
            message: "no samples".into(),
        });
    }
    Ok((samples, header))
}

/// One sample per line in shortest round-trip decimal form.
pub fn write_csv(buffer: &SignalBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(buffer.samples.len() * 20);
    for v in &buffer.samples {
        writeln!(out, "{v}").expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
