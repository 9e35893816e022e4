//! `--config FILE` support: a JSON object whose keys are long flag names.
//!
//! The object is expanded into flags inserted right after the subcommand, so
//! anything given on the command line later overrides it.

use serde_json::Value;

use crate::error::{read_text, CliError, Result};

/// Returns `argv` with every `--config FILE` replaced by the flags it holds.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(argv.len());
    let mut injected = Vec::new();
    let mut it = argv.into_iter().enumerate();
    let mut sub_at = None;
    while let Some((i, arg)) = it.next() {
        let path = if arg == "--config" {
            Some(
                it.next()
                    .map(|(_, p)| p)
                    .ok_or_else(|| CliError::input("--config needs a file path"))?,
            )
        } else {
            arg.strip_prefix("--config=").map(str::to_string)
        };
        match path {
            Some(p) => injected.extend(flags_from_file(&p)?),
            None => {
                if sub_at.is_none() && i > 0 && !arg.starts_with('-') {
                    sub_at = Some(out.len() + 1);
                }
                out.push(arg);
            }
        }
    }
    let at = sub_at.unwrap_or(out.len());
    out.splice(at..at, injected);
    Ok(out)
}

fn flags_from_file(path: &str) -> Result<Vec<String>> {
    let text = read_text(std::path::Path::new(path))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("config {path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::input(format!("config {path} must be a JSON object")));
    };
    let mut flags = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    flags.push(flag.clone());
                    flags.push(scalar(&key, &item)?);
                }
            }
            other => {
                flags.push(flag);
                flags.push(scalar(&key, &other)?);
            }
        }
    }
    Ok(flags)
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(CliError::input(format!("config key {key:?} must hold a string, number or boolean"))),
    }
}
