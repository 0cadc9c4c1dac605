//! Shared helpers for the plain-text file formats.
//!
//! All formats are line oriented: `#` starts a comment, blank lines are
//! ignored, and parse errors carry 1-based line numbers.

use crate::error::{Error, Result};

/// Non-blank lines of `text` with comments stripped, as (line number, line).
pub(crate) fn numbered_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                None
            } else {
                Some((i + 1, line.to_string()))
            }
        })
        .collect()
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Expects `line` to read `<key> <value>` and returns the value part.
pub(crate) fn keyword_value<'a>(line_no: usize, line: &'a str, key: &str) -> Result<&'a str> {
    match line.strip_prefix(key) {
        Some(rest) if rest.starts_with(char::is_whitespace) => Ok(rest.trim()),
        _ => Err(parse_err(
            line_no,
            format!("expected `{key} <value>`, found `{line}`"),
        )),
    }
}

/// Parses the mandatory `base <p>` header from the first line.
pub(crate) fn parse_base_header(lines: &[(usize, String)]) -> Result<u32> {
    let (no, line) = lines
        .first()
        .ok_or_else(|| parse_err(1, "empty input; expected a `base <p>` line"))?;
    let value = keyword_value(*no, line, "base")?;
    let base: u32 = value
        .parse()
        .map_err(|_| parse_err(*no, format!("invalid base `{value}`")))?;
    crate::clopen::check_base(base).map_err(|e| parse_err(*no, e.to_string()))?;
    Ok(base)
}

/// Splits `lines` into `[name]`-headed sections, preserving line numbers.
/// Lines before the first header are rejected.
pub(crate) fn split_sections(
    lines: &[(usize, String)],
) -> Result<Vec<(String, Vec<(usize, String)>)>> {
    let mut sections: Vec<(String, Vec<(usize, String)>)> = Vec::new();
    for (no, line) in lines {
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(*no, "unterminated section header"))?;
            sections.push((name.to_string(), Vec::new()));
        } else {
            match sections.last_mut() {
                Some((_, body)) => body.push((*no, line.clone())),
                None => {
                    return Err(parse_err(
                        *no,
                        "expected a `[section]` header before content",
                    ))
                }
            }
        }
    }
    Ok(sections)
}

/// Finds a mandatory section by name.
pub(crate) fn expect_section<'a>(
    sections: &'a [(String, Vec<(usize, String)>)],
    name: &str,
) -> Result<&'a [(usize, String)]> {
    sections
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, body)| body.as_slice())
        .ok_or_else(|| parse_err(1, format!("missing section [{name}]")))
}
