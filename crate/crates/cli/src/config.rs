//! Flat `key = value` configuration files.
//!
//! Each key names a long flag of the chosen subcommand (`lambda_min` and
//! `lambda-min` are equivalent). File entries are spliced in front of the
//! command-line flags so that explicit flags win; unknown keys are rejected
//! by the argument parser exactly like unknown flags.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// One `(key, value)` per non-blank, non-comment line.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, found `{raw}`", n + 1);
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            bail!("line {}: invalid key `{key}`", n + 1);
        }
        if key == "config" {
            bail!("line {}: configuration files cannot include other files", n + 1);
        }
        entries.push((normalize_key(key), value.trim().trim_matches('"').to_string()));
    }
    Ok(entries)
}

fn normalize_key(key: &str) -> String {
    match key {
        "L" | "V" => key.to_string(),
        other => other.replace('_', "-"),
    }
}

/// Flags equivalent to the file entries; `true`/`false` toggle switches.
pub fn to_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => flags.push(format!("--{key}={value}").into()),
        }
    }
    flags
}

/// The value of `--config` in raw arguments, if any.
pub fn find_config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(path));
        }
    }
    None
}

/// Raw arguments with the configuration file's flags inserted right after
/// the subcommand name.
pub fn expand_args(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = find_config_path(&args) else {
        return Ok(args);
    };
    let flags = to_flags(&read(&path)?);
    let position = args
        .iter()
        .position(|a| subcommands.iter().any(|s| a == s))
        .context("a subcommand is required when --config is given")?;
    let mut out = args[..=position].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let entries = parse("# comment\nL = 10\nlambda_min=0.5  # inline\n\nwindow = \"-0.2,0.2\"\nverbose = true\n").unwrap();
        assert_eq!(
            entries,
            vec![
                ("L".into(), "10".into()),
                ("lambda-min".into(), "0.5".into()),
                ("window".into(), "-0.2,0.2".into()),
                ("verbose".into(), "true".into()),
            ]
        );
        let flags: Vec<String> = to_flags(&entries).into_iter().map(|f| f.into_string().unwrap()).collect();
        assert_eq!(flags, vec!["--L=10", "--lambda-min=0.5", "--window=-0.2,0.2", "--verbose"]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse("L 10").is_err());
        assert!(parse("= 3").is_err());
        assert!(parse("--L = 3").is_err());
        assert!(parse("config = other.cfg").is_err());
    }

    #[test]
    fn finds_config_flag() {
        let args: Vec<OsString> = ["gaa", "rstat", "--config", "a.cfg"].iter().map(Into::into).collect();
        assert_eq!(find_config_path(&args), Some(PathBuf::from("a.cfg")));
        let args: Vec<OsString> = ["gaa", "--config=b.cfg", "sff"].iter().map(Into::into).collect();
        assert_eq!(find_config_path(&args), Some(PathBuf::from("b.cfg")));
    }
}
