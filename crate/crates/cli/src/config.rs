//! Layered configuration: command-line flag, then config file, then default.
//!
//! Every problem found while resolving is collected so the user sees one
//! report instead of fixing errors one at a time.

use std::path::Path;

use crate::expr::{parse_expr, parse_grid, parse_list};
use crate::output::num;

pub struct Resolver {
    file: toml::Table,
    used: Vec<&'static str>,
    errors: Vec<String>,
    /// `(key, rendered value)` in resolution order, for output headers.
    pub resolved: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self, Vec<String>> {
        let file = match config {
            None => toml::Table::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| vec![format!("cannot read config file {}: {e}", path.display())])?;
                text.parse::<toml::Table>()
                    .map_err(|e| vec![format!("config file {}: {}", path.display(), e.message())])?
            }
        };
        Ok(Resolver {
            file,
            used: Vec::new(),
            errors: Vec::new(),
            resolved: Vec::new(),
        })
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    /// Raw text for `key`: the flag if given, else the file value (strings
    /// verbatim, numbers via their TOML rendering).
    fn raw(&mut self, key: &'static str, flag: Option<&str>) -> Option<String> {
        self.used.push(key);
        if let Some(v) = flag {
            return Some(v.to_string());
        }
        match self.file.get(key)? {
            toml::Value::String(s) => Some(s.clone()),
            toml::Value::Integer(i) => Some(i.to_string()),
            toml::Value::Float(f) => Some(format!("{f:e}")),
            toml::Value::Array(items) => {
                let parts: Option<Vec<String>> = items
                    .iter()
                    .map(|v| match v {
                        toml::Value::Integer(i) => Some(i.to_string()),
                        toml::Value::Float(f) => Some(format!("{f:e}")),
                        toml::Value::String(s) => Some(s.clone()),
                        _ => None,
                    })
                    .collect();
                match parts {
                    Some(p) => Some(p.join(",")),
                    None => {
                        self.errors.push(format!("{key}: array entries must be numbers or strings"));
                        None
                    }
                }
            }
            other => {
                self.errors.push(format!("{key}: unsupported value {other}"));
                None
            }
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((key.to_string(), value));
    }

    fn missing(&mut self, key: &str) {
        self.errors.push(format!("{key} is required (flag --{key} or config key '{key}')"));
    }

    pub fn integer(&mut self, key: &'static str, flag: Option<&str>, default: Option<usize>) -> Option<usize> {
        let v = match self.raw(key, flag) {
            Some(text) => match text.trim().parse::<usize>() {
                Ok(v) => Some(v),
                Err(_) => {
                    self.errors.push(format!("{key}: '{text}' is not a non-negative integer"));
                    None
                }
            },
            None => {
                if default.is_none() {
                    self.missing(key);
                }
                default
            }
        };
        if let Some(x) = v {
            self.record(key, x.to_string());
        }
        v
    }

    /// A number, written as any phase expression.
    pub fn number(&mut self, key: &'static str, flag: Option<&str>, default: Option<f64>) -> Option<f64> {
        let v = match self.raw(key, flag) {
            Some(text) => match parse_expr(&text) {
                Ok(v) => Some(v),
                Err(e) => {
                    self.errors.push(format!("{key}: {e}"));
                    None
                }
            },
            None => {
                if default.is_none() {
                    self.missing(key);
                }
                default
            }
        };
        if let Some(x) = v {
            self.record(key, num(x));
        }
        v
    }

    /// A phase; the header shows radians and the original expression.
    pub fn phase(&mut self, key: &'static str, flag: Option<&str>, default: &str) -> Option<f64> {
        let text = self.raw(key, flag).unwrap_or_else(|| default.to_string());
        match parse_expr(&text) {
            Ok(v) => {
                self.record(key, format!("{} ({})", num(v), text.trim()));
                Some(v)
            }
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    pub fn grid(&mut self, key: &'static str, flag: Option<&str>, default: &str) -> Option<Vec<f64>> {
        let text = self.raw(key, flag).unwrap_or_else(|| default.to_string());
        match parse_grid(&text) {
            Ok(g) => {
                self.record(key, text.trim().to_string());
                Some(g)
            }
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    pub fn list(&mut self, key: &'static str, flag: Option<&str>) -> Option<Vec<f64>> {
        let text = self.raw(key, flag)?;
        match parse_list(&text) {
            Ok(l) => {
                self.record(key, l.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
                Some(l)
            }
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    /// Free text, recorded verbatim.
    pub fn text(&mut self, key: &'static str, flag: Option<&str>, default: &str) -> String {
        let text = self.raw(key, flag).unwrap_or_else(|| default.to_string());
        let text = text.trim().to_string();
        self.record(key, text.clone());
        text
    }

    pub fn choice(
        &mut self,
        key: &'static str,
        flag: Option<&str>,
        default: &str,
        allowed: &[&str],
    ) -> Option<String> {
        let text = self.raw(key, flag).unwrap_or_else(|| default.to_string());
        let t = text.trim().to_ascii_lowercase();
        if allowed.contains(&t.as_str()) {
            self.record(key, t.clone());
            Some(t)
        } else {
            self.errors.push(format!("{key}: '{text}' is not one of {}", allowed.join(", ")));
            None
        }
    }

    /// Like [`Resolver::integer`] but kept out of the output header, for
    /// settings that cannot change results (worker count).
    pub fn quiet_integer(&mut self, key: &'static str, flag: Option<&str>) -> Option<usize> {
        let text = self.raw(key, flag)?;
        match text.trim().parse::<usize>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{key}: '{text}' is not a non-negative integer"));
                None
            }
        }
    }

    /// Finishes resolution: unknown file keys are errors too.
    pub fn finish(mut self) -> Result<Vec<(String, String)>, Vec<String>> {
        let mut unknown: Vec<&String> = self
            .file
            .keys()
            .filter(|k| !self.used.contains(&k.as_str()))
            .collect();
        unknown.sort();
        let extra: Vec<String> = unknown
            .into_iter()
            .map(|k| format!("config key '{k}' is not used by this command"))
            .collect();
        self.errors.extend(extra);
        if self.errors.is_empty() {
            Ok(self.resolved)
        } else {
            Err(self.errors)
        }
    }
}
