use crate::CliError;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::Path;

/// Bumped whenever a record layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Parsed `--config` file: one table per command, keyed by the command name.
#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))?;
        Ok(Self { table })
    }

    fn section(&self, name: &str) -> Result<Map<String, Value>, CliError> {
        match self.table.get(name) {
            None => Ok(Map::new()),
            Some(toml::Value::Table(t)) => match serde_json::to_value(t) {
                Ok(Value::Object(m)) => Ok(m),
                _ => Err(CliError::Validation(format!(
                    "config section [{name}] is not a table"
                ))),
            },
            Some(_) => Err(CliError::Validation(format!(
                "config key '{name}' must be a table"
            ))),
        }
    }

    /// Layer compiled defaults, then the `[name]` section, then the flags
    /// that were given on the command line.
    pub fn resolve<P, F>(&self, name: &str, defaults: P, flags: &F) -> Result<P, CliError>
    where
        P: Serialize + DeserializeOwned,
        F: Serialize,
    {
        let mut merged = match serde_json::to_value(defaults) {
            Ok(Value::Object(m)) => m,
            _ => unreachable!("parameter structs serialize to objects"),
        };
        merged.extend(self.section(name)?);
        if let Ok(Value::Object(m)) = serde_json::to_value(flags) {
            merged.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
        }
        serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::Validation(format!("[{name}]: {e}")))
    }
}

/// Accepts `a`, `bi`, `a+bi` and `a-bi`.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Validation(format!("cannot parse complex number '{text}'"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => Ok(Complex64::new(
            body[..k].parse().map_err(|_| bad())?,
            imag(&body[k..])?,
        )),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{name} must be positive (got {v})"
        )))
    }
}
