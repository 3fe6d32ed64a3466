//! Plain-text pattern files.
//!
//! Layout: one header line `# dim=2 n=<half_side> count=<points>`, then one
//! `x y` pair per line. Coordinates are written with 17 significant digits,
//! which round-trips `f64` exactly, so files are diff-able and lossless.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{PointPattern, Window};

/// Render a pattern to the text format.
pub fn pattern_to_string(pattern: &PointPattern<2>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# dim=2 n={} count={}",
        pattern.window().half_side(),
        pattern.len()
    );
    for p in pattern.points() {
        let _ = writeln!(out, "{:.16e} {:.16e}", p[0], p[1]);
    }
    out
}

/// Parse the text format back into a pattern.
pub fn pattern_from_str(text: &str) -> Result<PointPattern<2>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::PatternFormat { line: 1, message: "empty file".into() })?;
    let header = header.trim();
    let bad_header = |msg: &str| Error::PatternFormat { line: 1, message: msg.into() };
    let rest = header
        .strip_prefix('#')
        .ok_or_else(|| bad_header("header must start with '#'"))?
        .trim();
    let mut dim: Option<usize> = None;
    let mut half_side: Option<f64> = None;
    let mut count: Option<usize> = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad_header(&format!("malformed header field '{field}'")))?;
        match key {
            "dim" => {
                dim = Some(value.parse().map_err(|_| bad_header("dim not an integer"))?)
            }
            "n" => {
                half_side =
                    Some(value.parse().map_err(|_| bad_header("n not a number"))?)
            }
            "count" => {
                count =
                    Some(value.parse().map_err(|_| bad_header("count not an integer"))?)
            }
            other => return Err(bad_header(&format!("unknown header field '{other}'"))),
        }
    }
    let dim = dim.ok_or_else(|| bad_header("missing dim"))?;
    if dim != 2 {
        return Err(bad_header(&format!("only dim=2 supported, got {dim}")));
    }
    let half_side = half_side.ok_or_else(|| bad_header("missing n"))?;
    let count = count.ok_or_else(|| bad_header("missing count"))?;

    let window = Window::new(half_side)?;
    let mut points = Vec::with_capacity(count);
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>, idx: usize| -> Result<f64> {
            tok.ok_or_else(|| Error::PatternFormat {
                line: idx + 1,
                message: "expected two coordinates".into(),
            })?
            .parse()
            .map_err(|_| Error::PatternFormat {
                line: idx + 1,
                message: "coordinate not a number".into(),
            })
        };
        let x = parse(it.next(), idx)?;
        let y = parse(it.next(), idx)?;
        if it.next().is_some() {
            return Err(Error::PatternFormat {
                line: idx + 1,
                message: "more than two coordinates".into(),
            });
        }
        points.push([x, y]);
    }
    if points.len() != count {
        return Err(Error::PatternFormat {
            line: 1,
            message: format!("header count {} but {} points", count, points.len()),
        });
    }
    PointPattern::new(window, points)
}

pub fn write_pattern_file<P: AsRef<Path>>(path: P, pattern: &PointPattern<2>) -> Result<()> {
    std::fs::write(path, pattern_to_string(pattern))?;
    Ok(())
}

pub fn read_pattern_file<P: AsRef<Path>>(path: P) -> Result<PointPattern<2>> {
    pattern_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_pattern() -> PointPattern<2> {
        let w = Window::new(1.5).unwrap();
        PointPattern::new(
            w,
            vec![
                [0.1234567890123456, -1.5],
                [1.5, 1.0 / 3.0],
                [-0.000123, 0.25],
            ],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let p = sample_pattern();
        let text = pattern_to_string(&p);
        let q = pattern_from_str(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn header_shape() {
        let text = pattern_to_string(&sample_pattern());
        let first = text.lines().next().unwrap();
        assert_eq!(first, "# dim=2 n=1.5 count=3");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn empty_pattern_round_trips() {
        let w = Window::new(2.0).unwrap();
        let p = PointPattern::new(w, vec![]).unwrap();
        let q = pattern_from_str(&pattern_to_string(&p)).unwrap();
        assert_eq!(q.len(), 0);
        assert_eq!(q.window().half_side(), 2.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(pattern_from_str("").is_err());
        assert!(pattern_from_str("no header\n0 0\n").is_err());
        assert!(pattern_from_str("# dim=3 n=1 count=0\n").is_err());
        assert!(pattern_from_str("# dim=2 n=1 count=2\n0 0\n").is_err());
        assert!(pattern_from_str("# dim=2 n=1 count=1\n0 0 0\n").is_err());
        assert!(pattern_from_str("# dim=2 n=1 count=1\n0 zebra\n").is_err());
        // Point outside the declared window.
        assert!(pattern_from_str("# dim=2 n=1 count=1\n2 0\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pat.txt");
        let p = sample_pattern();
        write_pattern_file(&path, &p).unwrap();
        assert_eq!(read_pattern_file(&path).unwrap(), p);
    }
}
