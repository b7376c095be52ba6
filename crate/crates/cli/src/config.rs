//! `--config <file.json>` support. The file holds a flat JSON object whose keys
//! are long flag names (plus an optional `command`); it is expanded into
//! command-line arguments so clap stays the single source of validation.

use std::fmt;
use std::path::Path;

use serde_json::Value;

/// A malformed invocation or configuration file.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn scalar(key: &str, v: &Value) -> Result<String, anyhow::Error> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(bad(format!(
            "config key `{key}`: arrays may only hold numbers, strings or booleans"
        ))),
    }
}

/// Flag list for one config object, sorted by key.
pub fn flags_from_json(obj: &serde_json::Map<String, Value>) -> Result<Vec<String>, anyhow::Error> {
    let mut out = Vec::new();
    for (key, v) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag),
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|x| scalar(key, x))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(format!("{flag}={}", parts.join(",")));
            }
            Value::Object(_) => {
                return Err(bad(format!("config key `{key}` must not be an object")))
            }
            other => out.push(format!("{flag}={}", scalar(key, other)?)),
        }
    }
    Ok(out)
}

/// Pulls `--config` out of `args` and splices the file's flags in right after
/// the subcommand, so flags given on the command line still win.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, anyhow::Error> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    if let Some(prog) = it.next() {
        rest.push(prog);
    }
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| bad("--config needs a file path"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let obj = load(Path::new(&path))?;

    let sub_pos = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 1);
    let named = match obj.get("command") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(bad("config key `command` must be a string")),
    };
    let insert_at = match (sub_pos, named) {
        (Some(p), Some(n)) if rest[p] != n => {
            return Err(bad(format!(
                "config names command `{n}` but `{}` was given",
                rest[p]
            )))
        }
        (Some(p), _) => p + 1,
        (None, Some(n)) => {
            rest.push(n);
            rest.len()
        }
        (None, None) => {
            return Err(bad(
                "no subcommand given on the command line or in the config",
            ))
        }
    };
    let flags = flags_from_json(&obj)?;
    rest.splice(insert_at..insert_at, flags);
    Ok(rest)
}

fn load(path: &Path) -> Result<serde_json::Map<String, Value>, anyhow::Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(bad(format!(
            "config {} must be a JSON object",
            path.display()
        ))),
        Err(e) => Err(bad(format!(
            "config {} is not valid JSON: {e}",
            path.display()
        ))),
    }
}
