//! `key=value` configuration files.
//!
//! Keys are long flag names without the leading dashes. Values are spliced
//! into the argument list right after the subcommand, so flags given on the
//! command line take precedence.

use std::fs;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

/// Parse a configuration file body into `--key=value` arguments.
pub fn parse(text: &str) -> Result<Vec<String>, ConfigError> {
    let mut args = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
        let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
        if key.is_empty() || key == "config" {
            return Err(ConfigError(format!("line {}: invalid key {key:?}", n + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => args.push(format!("--{key}={value}")),
        }
    }
    Ok(args)
}

/// Remove `--config PATH` (or `--config=PATH`) from `argv` and splice the
/// file's arguments in after the subcommand name.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| ConfigError("--config needs a path".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| ConfigError(format!("{path}: {e}")))?;
    let extra = parse(&text)?;
    // first non-flag argument after the program name is the subcommand
    let pos = rest.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 2).unwrap_or(rest.len());
    rest.splice(pos..pos, extra);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_flags_and_comments() {
        let args = parse("# base point\nkx = 1\nky=0.25\n\nlog=true\nno-header=false\n").unwrap();
        assert_eq!(args, ["--kx=1", "--ky=0.25", "--log"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse("kx 1").is_err());
        assert!(parse("=1").is_err());
        assert!(parse("config=other").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("gaussmode-config-{}", std::process::id()));
        fs::write(&dir, "kx=2\nomega=0.5\n").unwrap();
        let argv: Vec<String> = ["gaussmode", "--config", dir.to_str().unwrap(), "point", "--kx", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = expand(argv).unwrap();
        assert_eq!(out, ["gaussmode", "point", "--kx=2", "--omega=0.5", "--kx", "3"]);
        fs::remove_file(dir).unwrap();
    }
}
