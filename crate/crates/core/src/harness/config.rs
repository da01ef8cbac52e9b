//! `key = value` configuration files. Blank lines and `#` comments are
//! ignored; keys are command-line flag names without the leading dashes.

use std::path::Path;

use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') || k.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("config line {}: bad key {k:?}", n + 1)));
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<(String, String)>> {
    parse(&std::fs::read_to_string(path)?)
}

/// Flag form, e.g. `[("eps", "0.01")]` becomes `["--eps", "0.01"]`.
/// Boolean keys with value `true` become bare flags.
pub fn to_args(pairs: &[(String, String)]) -> Vec<String> {
    let mut v = Vec::new();
    for (k, val) in pairs {
        match val.as_str() {
            "true" => v.push(format!("--{k}")),
            "false" => {}
            _ => {
                v.push(format!("--{k}"));
                v.push(val.clone());
            }
        }
    }
    v
}
