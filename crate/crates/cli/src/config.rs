//! `--config` files and sweep syntax.

use std::ffi::OsString;
use std::fs;

/// Parses a flat `key = value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value, got '{line}'", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn takes_value(next: Option<&OsString>) -> bool {
    next.is_some_and(|n| !n.to_string_lossy().starts_with("--"))
}

/// Drops every occurrence of `--key` (with its value, if any) from `args`.
fn remove_flag(args: &mut Vec<OsString>, key: &str) {
    let long = format!("--{key}");
    let prefixed = format!("--{key}=");
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == long {
            let n = if takes_value(args.get(i + 1)) { 2 } else { 1 };
            args.drain(i..i + n);
        } else if a.starts_with(&prefixed) {
            args.remove(i);
        } else {
            i += 1;
        }
    }
}

/// Expands `--config <path>` in `args`: the file's entries replace flags of the same name.
///
/// `key = true` becomes a bare `--key`; `key = false` removes it.
pub fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" {
            let p = args.get(i + 1).ok_or("--config requires a path")?.clone();
            path = Some(p);
            args.drain(i..i + 2);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(OsString::from(p));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    for (key, value) in parse_config(&text)? {
        remove_flag(&mut args, &key);
        match value.as_str() {
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

/// Integer sweep: `a,b,c` lists values; `lo:hi` doubles from `lo` up to `hi`;
/// `lo:hi:+s` steps by `s`; `lo:hi:*f` multiplies by `f`.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let int = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad integer '{t}' in sweep '{s}'"));
    if !s.contains(':') {
        return s.split(',').map(int).collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    let (lo, hi) = match parts.as_slice() {
        [lo, hi] | [lo, hi, _] => (int(lo)?, int(hi)?),
        _ => return Err(format!("bad sweep '{s}'")),
    };
    if lo > hi {
        return Err(format!("sweep '{s}' is empty"));
    }
    let step = parts.get(2).copied().unwrap_or("*2");
    let mut out = Vec::new();
    if let Some(add) = step.strip_prefix('+') {
        let add = int(add)?;
        if add == 0 {
            return Err(format!("sweep '{s}' has zero step"));
        }
        out.extend((lo..=hi).step_by(add));
    } else if let Some(mul) = step.strip_prefix('*') {
        let mul = int(mul)?;
        if mul < 2 || lo == 0 {
            return Err(format!("geometric sweep '{s}' needs lo >= 1 and factor >= 2"));
        }
        let mut v = lo;
        while v <= hi {
            out.push(v);
            v *= mul;
        }
    } else {
        return Err(format!("sweep step must start with + or *, got '{step}'"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("8:64").unwrap(), vec![8, 16, 32, 64]);
        assert_eq!(parse_sweep("0:6:+2").unwrap(), vec![0, 2, 4, 6]);
        assert_eq!(parse_sweep("2:60:*3").unwrap(), vec![2, 6, 18, 54]);
        assert_eq!(parse_sweep("5, 9,11").unwrap(), vec![5, 9, 11]);
        assert!(parse_sweep("0:8").is_err());
        assert!(parse_sweep("9:8").is_err());
    }

    #[test]
    fn config_overrides_flags() {
        let cfg = "# comment\nsamples = 500\n\nverbose=true\n";
        assert_eq!(parse_config(cfg).unwrap().len(), 2);
        let dir = std::env::temp_dir().join(format!("sew-config-{}", std::process::id()));
        fs::write(&dir, cfg).unwrap();
        let args = os(&["sew", "levy-mean", "--samples", "10", "--config", dir.to_str().unwrap(), "--p", "4"]);
        let out = expand_config(args).unwrap();
        assert_eq!(out, os(&["sew", "levy-mean", "--p", "4", "--samples", "500", "--verbose"]));
        fs::remove_file(dir).unwrap();
        assert!(parse_config("no equals sign").is_err());
    }
}
