//! `--params <file>`: a flat JSON object whose keys are flag names.
//!
//! The object is turned into `--key value` pairs inserted right after the
//! subcommand, so flags given on the command line take precedence.

use std::ffi::OsString;

use serde_json::Value;

const SUBCOMMANDS: [&str; 6] = ["fixed-point", "iterate", "sweep", "packet", "contraction", "resistive"];

fn params_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--params" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--params=") {
            return Some(rest.into());
        }
    }
    None
}

fn render(value: &Value) -> Result<Option<String>, String> {
    Ok(match value {
        Value::Bool(true) => Some(String::new()),
        Value::Bool(false) | Value::Null => None,
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    other => Err(format!("unsupported list element {other}")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(parts.join(","))
        }
        Value::Object(_) => return Err("nested objects are not supported".into()),
    })
}

pub fn to_flags(text: &str) -> Result<Vec<OsString>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("--params: {e}"))?;
    let Value::Object(map) = value else {
        return Err("--params file must contain a JSON object".into());
    };
    let mut flags = Vec::new();
    for (key, v) in &map {
        let name = format!("--{}", key.replace('_', "-"));
        match render(v).map_err(|e| format!("--params key {key}: {e}"))? {
            Some(s) if s.is_empty() => flags.push(name.into()),
            Some(s) => flags.push(format!("{name}={s}").into()),
            None => {}
        }
    }
    Ok(flags)
}

pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = params_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("--params {}: {e}", path.to_string_lossy()))?;
    let flags = to_flags(&text)?;
    let pos = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .ok_or("--params needs a subcommand")?;
    let mut out = args[..=pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
