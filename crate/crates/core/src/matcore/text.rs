//! Plain-text matrix format: a `rows cols` header line followed by `rows`
//! lines of `cols` whitespace-separated entries written `RE±IMi`.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

pub fn write_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|z| format_entry(*z)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Shortest round-trip representation, e.g. `1.5-0.25i`.
pub fn format_entry(z: Complex64) -> String {
    // -0.0 would print as "+-0", so normalize the sign of zero first.
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    if im.is_sign_negative() {
        format!("{re:?}{im:?}i")
    } else {
        format!("{re:?}+{im:?}i")
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty input, expected `rows cols` header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Parse {
                line: hline,
                message: format!("invalid dimension `{s}`"),
            })
    };
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            message: format!("header must be `rows cols`, got `{header}`"),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);

    let mut data = Vec::with_capacity(rows * cols);
    let mut last_line = hline;
    for _ in 0..rows {
        let (lno, line) = lines.next().ok_or(Error::Parse {
            line: last_line + 1,
            message: format!("expected {rows} matrix rows"),
        })?;
        last_line = lno;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != cols {
            return Err(Error::Parse {
                line: lno,
                message: format!("expected {cols} entries, found {}", entries.len()),
            });
        }
        for tok in entries {
            let z = parse_entry(tok).ok_or_else(|| Error::Parse {
                line: lno,
                message: format!("invalid complex entry `{tok}`"),
            })?;
            data.push(z);
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(Error::Parse {
            line: lno,
            message: "unexpected trailing content".into(),
        });
    }
    ComplexMatrix::from_vec(rows, cols, data).map_err(|e| Error::Parse {
        line: hline,
        message: e.to_string(),
    })
}

/// Parses `RE±IMi`, a bare real `RE`, or a bare imaginary `IMi`.
pub fn parse_entry(tok: &str) -> Option<Complex64> {
    let finite = |x: f64| x.is_finite().then_some(x);
    let Some(body) = tok.strip_suffix('i') else {
        return finite(tok.parse().ok()?).map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not the leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = finite(body[..k].parse().ok()?)?;
            let im = finite(body[k..].parse().ok()?)?;
            Some(Complex64::new(re, im))
        }
        None => finite(body.parse().ok()?).map(|im| Complex64::new(0.0, im)),
    }
}
