//! Plain-text set files: one element per line, either a signed decimal
//! integer or `p/q` with `q > 0`. Lines starting with `#` are comments and
//! blank lines are ignored. Elements may appear in any order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational};
use crate::{Rational, Set};

pub fn parse_set(text: &str) -> Result<Set> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = parse_rational(t).map_err(|e| Error::input(format!("line {}: {e}", lineno + 1)))?;
        values.push(v);
    }
    Set::new(values)
}

pub fn render_set(set: &Set, header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        for l in h.lines() {
            out.push_str("# ");
            out.push_str(l);
            out.push('\n');
        }
    }
    for v in set {
        out.push_str(&format_rational(v));
        out.push('\n');
    }
    out
}

pub fn read_set(path: &Path) -> Result<Set> {
    let text = fs::read_to_string(path)?;
    parse_set(&text).map_err(|e| match e {
        Error::Input(m) => Error::input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_set(path: &Path, set: &Set, header: Option<&str>) -> Result<()> {
    fs::write(path, render_set(set, header))?;
    Ok(())
}

pub fn rational_list(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_ratio;

    #[test]
    fn parses_comments_and_unsorted() {
        let s = parse_set("# header\n3\n\n1/2\n-4\n3\n").unwrap();
        let want = [
            rational_from_ratio(-4, 1),
            rational_from_ratio(1, 2),
            rational_from_ratio(3, 1),
        ];
        assert_eq!(s.as_slice(), &want[..]);
    }

    #[test]
    fn reports_bad_line() {
        let err = parse_set("1\n2\nx\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(parse_set("# only comments\n").is_err());
    }

    #[test]
    fn render_then_parse() {
        let s = parse_set("5/3\n-2\n7").unwrap();
        assert_eq!(parse_set(&render_set(&s, Some("n=3"))).unwrap(), s);
    }
}
