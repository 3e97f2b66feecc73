use std::fmt::Write as _;
use std::path::Path;

use super::{check_finite, C64, ComplexMatrix};
use crate::error::{Error, Result};

/// Text form: `"rows cols"` then one line per row of `re,im` entries.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    writeln!(s, "{} {}", m.nrows(), m.ncols()).unwrap();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                s.push(' ');
            }
            let z = m[(r, c)];
            write!(s, "{:.16e},{:.16e}", z.re, z.im).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse { line: hline + 1, msg: format!("bad header: {e}") })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse { line: hline + 1, msg: "header must be `n_rows n_cols`".into() });
    };
    if rows == 0 || cols == 0 {
        return Err(Error::Parse { line: hline + 1, msg: "dimensions must be positive".into() });
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        let (ln, line) = lines.next().ok_or(Error::Parse { line: hline + 2 + r, msg: format!("expected {rows} rows") })?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected {cols} entries, found {}", toks.len()) });
        }
        for (c, t) in toks.iter().enumerate() {
            m[(r, c)] = parse_entry(t).ok_or_else(|| Error::Parse { line: ln + 1, msg: format!("bad entry `{t}`") })?;
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln + 1, msg: "trailing data after matrix".into() });
    }
    check_finite(&m)?;
    Ok(m)
}

fn parse_entry(t: &str) -> Option<C64> {
    let (re, im) = t.split_once(',')?;
    Some(C64::new(re.parse().ok()?, im.parse().ok()?))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{sample_cue, RngStream};
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let u = sample_cue(6, &mut RngStream::new(9, 2));
        let back = parse_matrix(&format_matrix(&u)).unwrap();
        assert_eq!(u, back);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1,0 0,0\n").is_err());
        assert!(parse_matrix("1 2\n1,0 x\n").is_err());
        assert!(parse_matrix("1 1\n1,0\n2,0\n").is_err());
        assert!(parse_matrix("1 1\nNaN,0\n").is_err());
    }
}
