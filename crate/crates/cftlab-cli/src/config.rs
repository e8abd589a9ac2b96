//! Flat `key = value` config files. Keys are long flag names; a flag given on
//! the command line wins over the same key in the file.

use std::ffi::OsString;
use std::path::Path;

use clap::Command;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(path: &Path, text: &str) -> Result<Vec<Entry>, CliError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |key: &str, message: &str| CliError::Config {
            path: path.to_path_buf(),
            line,
            key: key.to_string(),
            message: message.to_string(),
        };
        let Some((key, value)) = body.split_once('=') else {
            return Err(err(body, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err("", "empty key"));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(err(key, &format!("duplicate key (first set on line {})", prev.line)));
        }
        entries.push(Entry { line, key: key.to_string(), value: value.to_string() });
    }
    Ok(entries)
}

fn explicit(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| a.to_str().is_some_and(|s| s == flag || s.starts_with(&prefix)))
}

/// Appends config entries to `args` as flags. Every entry is first parsed on
/// its own so that bad keys and values are reported with their line.
pub fn merge(
    root: &Command,
    subcommand: &str,
    args: Vec<OsString>,
    path: &Path,
    entries: &[Entry],
) -> Result<Vec<OsString>, CliError> {
    let sub = root.find_subcommand(subcommand).expect("subcommand was parsed");
    let mut out = args;
    for e in entries {
        let err = |message: String| CliError::Config {
            path: path.to_path_buf(),
            line: e.line,
            key: e.key.clone(),
            message,
        };
        if e.key == "config" {
            return Err(err("config files cannot include other config files".into()));
        }
        let arg = root
            .get_arguments()
            .chain(sub.get_arguments())
            .find(|a| a.get_long() == Some(e.key.as_str()))
            .ok_or_else(|| err(format!("unknown key for `{subcommand}`")))?;
        let token = if arg.get_action().takes_values() {
            format!("--{}={}", e.key, e.value)
        } else {
            match e.value.as_str() {
                "true" | "yes" | "1" => format!("--{}", e.key),
                "false" | "no" | "0" => continue,
                _ => return Err(err(format!("expected true or false, got `{}`", e.value))),
            }
        };
        let probe = [OsString::from("cftlab"), OsString::from(subcommand), OsString::from(&token)];
        if let Err(ce) = root.clone().try_get_matches_from(probe) {
            let msg = ce.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Err(err(first));
        }
        if !explicit(&out, &e.key) {
            out.push(token.into());
        }
    }
    Ok(out)
}
