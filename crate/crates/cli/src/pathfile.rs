//! Reading paths from disk.
//!
//! Three layouts are accepted:
//!
//! - a JSON array of positive integers,
//! - a JSON object with a `path` (or `values`) array and an optional
//!   `origin_included` flag, which is what `simulate --format json` writes,
//! - plain text with one positive integer per line. Blank lines and lines
//!   starting with `#` are skipped; a comment of the form
//!   `# origin_included=false` sets the origin flag.
//!
//! Without any marker the first value is taken to be the origin `x_0`.

use std::path::Path as FsPath;

use branch_bayes::branching::Path;
use branch_bayes::Error as CoreError;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Deserialize)]
struct PathObject {
    #[serde(alias = "values")]
    path: Vec<u64>,
    origin_included: Option<bool>,
}

struct Parsed {
    values: Vec<u64>,
    /// Source line of each value, when known.
    lines: Option<Vec<usize>>,
    origin_included: Option<bool>,
}

/// Reads and validates a path. `origin_override` wins over any marker in the file.
pub fn read_path(file: &FsPath, origin_override: Option<bool>) -> Result<Path> {
    let name = file.display().to_string();
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Usage(format!("cannot read path file {name}: {e}")))?;
    parse_path(&text, &name, origin_override)
}

pub fn parse_path(text: &str, name: &str, origin_override: Option<bool>) -> Result<Path> {
    let trimmed = text.trim_start();
    let parsed = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        parse_json(text, name)?
    } else {
        parse_lines(text, name)?
    };
    if parsed.values.is_empty() {
        return Err(CliError::PathFile {
            file: name.to_string(),
            message: "no values".into(),
        });
    }
    let origin = origin_override.or(parsed.origin_included).unwrap_or(true);
    Path::new(parsed.values, origin).map_err(|e| match (e, &parsed.lines) {
        (CoreError::Inadmissible { index, prev, next }, Some(lines)) => CliError::PathLine {
            file: name.to_string(),
            line: lines[index],
            message: inadmissible_message(prev, next),
        },
        (CoreError::Inadmissible { index, prev, next }, None) => CliError::PathFile {
            file: name.to_string(),
            message: format!("entry {index}: {}", inadmissible_message(prev, next)),
        },
        (e, _) => e.into(),
    })
}

fn inadmissible_message(prev: u64, next: u64) -> String {
    if next == 0 {
        "values must be positive".into()
    } else {
        format!("{prev} -> {next} is not an admissible step (need x <= y <= 2x)")
    }
}

fn parse_json(text: &str, name: &str) -> Result<Parsed> {
    let json_err = |e: serde_json::Error| CliError::PathLine {
        file: name.to_string(),
        line: e.line(),
        message: e.to_string(),
    };
    let (values, origin_included) = if text.trim_start().starts_with('[') {
        (
            serde_json::from_str::<Vec<u64>>(text).map_err(json_err)?,
            None,
        )
    } else {
        let obj: PathObject = serde_json::from_str(text).map_err(json_err)?;
        (obj.path, obj.origin_included)
    };
    Ok(Parsed {
        values,
        lines: None,
        origin_included,
    })
}

fn parse_lines(text: &str, name: &str) -> Result<Parsed> {
    let mut values = Vec::new();
    let mut lines = Vec::new();
    let mut origin_included = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "origin_included" {
                    let flag = value
                        .trim()
                        .parse::<bool>()
                        .map_err(|_| CliError::PathLine {
                            file: name.to_string(),
                            line: line_no,
                            message: format!(
                                "origin_included must be true or false, got {:?}",
                                value.trim()
                            ),
                        })?;
                    origin_included = Some(flag);
                }
            }
            continue;
        }
        match line.parse::<u64>() {
            Ok(v) if v > 0 => {
                values.push(v);
                lines.push(line_no);
            }
            _ => {
                return Err(CliError::PathLine {
                    file: name.to_string(),
                    line: line_no,
                    message: format!("expected a positive integer, got {line:?}"),
                })
            }
        }
    }
    Ok(Parsed {
        values,
        lines: Some(lines),
        origin_included,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: CliError) -> usize {
        match err {
            CliError::PathLine { line, .. } => line,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn text_with_comments() {
        let p = parse_path("# seed=3\n# origin_included=false\n2\n\n3\n5\n", "t", None).unwrap();
        assert_eq!(p.values(), &[2, 3, 5]);
        assert!(!p.origin_included());
        let p = parse_path("2\n3\n", "t", None).unwrap();
        assert!(p.origin_included());
        let p = parse_path("# origin_included=false\n2\n3\n", "t", Some(true)).unwrap();
        assert!(p.origin_included());
    }

    #[test]
    fn json_layouts() {
        assert_eq!(
            parse_path("[1, 2, 4]", "j", None).unwrap().values(),
            &[1, 2, 4]
        );
        let p = parse_path(
            r#"{"path": [3, 4], "origin_included": false, "extra": 1}"#,
            "j",
            None,
        )
        .unwrap();
        assert_eq!(p.values(), &[3, 4]);
        assert!(!p.origin_included());
        let p = parse_path(r#"{"values": [3, 4]}"#, "j", None).unwrap();
        assert!(p.origin_included());
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(
            line_of(parse_path("1\n2\nabc\n", "t", None).unwrap_err()),
            3
        );
        assert_eq!(line_of(parse_path("1\n-2\n", "t", None).unwrap_err()), 2);
        assert_eq!(
            line_of(parse_path("# c\n1\n\n2\n5\n", "t", None).unwrap_err()),
            5
        );
        assert_eq!(line_of(parse_path("1\n0\n", "t", None).unwrap_err()), 2);
        assert_eq!(
            line_of(parse_path("[1,\n2,\nx]", "j", None).unwrap_err()),
            3
        );
        assert_eq!(
            line_of(parse_path("#origin_included=maybe\n1\n", "t", None).unwrap_err()),
            1
        );
    }

    #[test]
    fn empty_and_json_inadmissible() {
        assert!(matches!(
            parse_path("# nothing\n", "t", None),
            Err(CliError::PathFile { .. })
        ));
        let e = parse_path("[2, 5]", "j", None).unwrap_err().to_string();
        assert!(e.contains("entry 1"), "{e}");
    }
}
