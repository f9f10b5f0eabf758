//! `--config` files: `key=value` lines turned into flags placed before the
//! user's own, skipping keys the user passed explicitly.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use crate::CliError;

const COMMANDS: [&str; 5] = ["validate", "gen", "solve", "compare", "deblur"];

/// Value of `--config` if present anywhere in `args`.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", k + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::usage(format!("config line {}: invalid key {key:?}", k + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// `args` with the config entries spliced in right after the subcommand name.
pub fn merge(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::no_input(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text)?;
    let Some(pos) = args.iter().position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let given: HashSet<String> = args[pos + 1..]
        .iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            s.strip_prefix("--").map(|f| f.split('=').next().unwrap_or("").to_string())
        })
        .collect();

    let mut injected = Vec::new();
    for (key, value) in entries {
        if given.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                for v in value.split(',') {
                    injected.push(OsString::from(format!("--{key}={}", v.trim())));
                }
            }
        }
    }
    let mut merged = args[..=pos].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(xs: &[&str]) -> Vec<OsString> {
        xs.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let got = parse_config("# c\n\ntheta = 0.3\nmax_iters=5\n").unwrap();
        assert_eq!(got, vec![("theta".into(), "0.3".into()), ("max-iters".into(), "5".into())]);
        assert!(parse_config("theta 0.3").is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        fs::write(&path, "theta=0.3\neps=1e-6\nledger=true\n").unwrap();
        let p = path.to_string_lossy().to_string();
        let args = os(&["tsplit", "--config", &p, "solve", "--theta", "0.1"]);
        let merged = merge(args).unwrap();
        let merged: Vec<String> = merged.iter().map(|s| s.to_string_lossy().into()).collect();
        assert_eq!(merged, ["tsplit", "--config", &p, "solve", "--eps=1e-6", "--ledger", "--theta", "0.1"]);
    }
}
