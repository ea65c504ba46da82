//! `key = value` run files. Each key is a long flag name; values are
//! spliced in ahead of the command-line flags so the latter win.

use std::fs;
use std::path::Path;

pub fn expand(path: &Path) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{key}`", i + 1));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            v => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
        }
    }
    Ok(args)
}

/// Splices the file named by `--config` (if any) right after the
/// subcommand name.
pub fn splice(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let (path, drop) = match argv[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (
            argv.get(pos + 1).cloned().ok_or("--config needs a file")?,
            2,
        ),
    };
    let file_args = expand(Path::new(&path))?;
    let mut rest = argv;
    rest.drain(pos..pos + drop);
    let at = 2.min(rest.len());
    rest.splice(at..at, file_args);
    Ok(rest)
}
