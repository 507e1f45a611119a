//! Plain-text signal files: one real number per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads one finite real per line; blank lines and `#` comments are skipped.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_signal(&text).map_err(|(line, msg)| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    })
}

fn parse_signal(text: &str) -> std::result::Result<Vec<f64>, (usize, String)> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| (i + 1, format!("{line:?}: {e}")))?;
        if !v.is_finite() {
            return Err((i + 1, format!("non-finite value {line:?}")));
        }
        values.push(v);
    }
    Ok(values)
}

/// Writes one value per line with 17 significant digits.
pub fn write_signal(path: &Path, values: &[f64]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = Vec::with_capacity(values.len() * 25);
    for v in values {
        writeln!(out, "{}", format_f64(*v)).expect("writing to a Vec cannot fail");
    }
    fs::write(path, out).map_err(io_err)
}

/// Fixed 17-significant-digit scientific rendering used in every text output.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}
