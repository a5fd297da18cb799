//! The `--config` file: flat `key = value` lines naming long flags.

use std::ffi::OsString;
use std::path::Path;

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; a bare `key` stands for a switch.
pub fn parse(text: &str) -> Result<Vec<(String, Option<String>)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim().to_string())),
            None => (line, None),
        };
        let k = k.trim_start_matches("--");
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(format!("config line {}: malformed key in {line:?}", i + 1));
        }
        out.push((k.replace('_', "-"), v));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, Option<String>)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text)
}

/// Whether `argv` already sets `--key`.
fn given(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("{flag}=");
    argv.iter().filter_map(|a| a.to_str()).any(|a| a == flag || a.starts_with(&with_eq))
}

/// Splices config entries into `argv` right after the subcommand token at
/// `sub_at`, skipping keys the command line already sets.
pub fn splice(argv: &[OsString], sub_at: usize, entries: &[(String, Option<String>)]) -> Vec<OsString> {
    let mut out: Vec<OsString> = argv[..=sub_at].to_vec();
    for (k, v) in entries {
        if k == "config" || given(argv, k) {
            continue;
        }
        out.push(match v {
            Some(v) => format!("--{k}={v}").into(),
            None => format!("--{k}").into(),
        });
    }
    out.extend_from_slice(&argv[sub_at + 1..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let e = parse("# comment\n\nn = 1000\nmodel=fair_coin\n--seed = 7\nverbose\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("n".into(), Some("1000".into())),
                ("model".into(), Some("fair_coin".into())),
                ("seed".into(), Some("7".into())),
                ("verbose".into(), None),
            ]
        );
        assert!(parse("bad key = 1").is_err());
    }

    #[test]
    fn flags_win() {
        let argv: Vec<OsString> = ["cramer", "moments", "--n", "5"].iter().map(OsString::from).collect();
        let e = vec![("n".to_string(), Some("9".to_string())), ("model".to_string(), Some("fair_coin".to_string()))];
        let out = splice(&argv, 1, &e);
        let s: Vec<&str> = out.iter().map(|a| a.to_str().unwrap()).collect();
        assert_eq!(s, ["cramer", "moments", "--model=fair_coin", "--n", "5"]);
    }
}
