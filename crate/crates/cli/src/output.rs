//! CSV formatting. Floats are written as C's `%.12e` so that files are
//! byte-stable across platforms and thread counts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// `%.12e`: twelve fraction digits, signed exponent of at least two digits.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Temperature tag used in per-temperature file names.
pub fn temperature_tag(t: f64) -> String {
    format!("{t:.4}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Starts a file with the config hash comment and a column header.
    pub fn new(hash: &str, comments: &[String], columns: &[&str]) -> Self {
        let mut text = format!("# config_sha256={hash}\n");
        for c in comments {
            writeln!(text, "# {c}").unwrap();
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        write_file(dir, name, &self.text)
    }
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Free-text CSV field: commas and newlines would break the row.
pub fn text_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(1043.27), "1.043270000000e+03");
        assert_eq!(sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(sci(1e100), "1.000000000000e+100");
        assert_eq!(sci(f64::NAN), "nan");
    }

    #[test]
    fn header() {
        let mut c = Csv::new("ab", &["command=x".into()], &["a", "b"]);
        c.row(&[sci(1.0), "y".into()]);
        assert_eq!(c.as_str(), "# config_sha256=ab\n# command=x\na,b\n1.000000000000e+00,y\n");
        assert_eq!(text_field("a,b\nc"), "a;b;c");
        assert_eq!(temperature_tag(10.5), "10.5000");
    }
}
