//! Output formatting shared by the writers.

use std::fmt::Display;
use std::io::Write;

use crate::error::Result;
use crate::scalar::Real;

/// Full-precision scientific notation, `{:.16e}`.
pub fn fmt_num<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueReport {
    entries: Vec<(String, String)>,
}

impl KeyValueReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn push_num<T: Real>(&mut self, key: impl Into<String>, value: T) -> &mut Self {
        self.push(key, fmt_num(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}")?;
        }
        Ok(())
    }
}
