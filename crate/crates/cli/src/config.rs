//! Flat `key = value` config files.
//!
//! Keys are flag names without the leading dashes. Entries are spliced into
//! argv right after the subcommand, so flags given on the command line are
//! parsed later and win.

use std::ffi::OsString;
use std::path::Path;

use imbalearn::{Error, Result};

/// Parse config text into `--key value` argument pairs.
///
/// `true` turns into a bare switch and `false` drops the key. Repeating a key
/// repeats the flag (useful for `fault`).
pub fn parse_config(text: &str) -> Result<Vec<OsString>> {
    let mut args = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", n + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(Error::Config(format!("config line {}: invalid key `{key}`", n + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

/// Remove `--config PATH` / `--config=PATH` from `argv` and splice the
/// file's entries in after the subcommand name.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        match arg.to_str() {
            Some("--config") => {
                let p = it
                    .next()
                    .ok_or_else(|| Error::Config("--config needs a path".into()))?;
                path = Some(p);
            }
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(arg),
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let injected = parse_config(&text)?;
    // rest[0] is the program, rest[1] the subcommand.
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}
