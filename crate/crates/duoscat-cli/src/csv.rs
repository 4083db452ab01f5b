//! CSV emission.  Column counts are sized to the largest channel count in
//! the row set; channels closed at a given row are written as 0.  All floats
//! carry full double precision so identical runs produce byte-identical
//! files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::run::{BornRow, SweepRow};

/// Full-precision, locale-free float formatting (17 significant digits).
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A channel coefficient, or 0 for channels the row does not reach.
fn channel(values: &[f64], n: usize) -> f64 {
    values.get(n).copied().unwrap_or(0.0)
}

/// Header `param,j_re_0..j_re_nc,j_tr_0..j_tr_nc,j_total,residual,n_c,status`
/// with nc = the maximum cutoff across the rows.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::usage(
            "nothing to write: the sweep produced no rows",
        ));
    }
    let max_nc = rows.iter().map(|r| r.n_c).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str("param");
    for n in 0..=max_nc {
        let _ = write!(out, ",j_re_{n}");
    }
    for n in 0..=max_nc {
        let _ = write!(out, ",j_tr_{n}");
    }
    out.push_str(",j_total,residual,n_c,status\n");
    for row in rows {
        out.push_str(&fmt_f64(row.value));
        for n in 0..=max_nc {
            let _ = write!(out, ",{}", fmt_f64(channel(&row.j_re, n)));
        }
        for n in 0..=max_nc {
            let _ = write!(out, ",{}", fmt_f64(channel(&row.j_tr, n)));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            fmt_f64(row.j_total),
            fmt_f64(row.residual),
            row.n_c,
            row.status.as_str()
        );
    }
    Ok(out)
}

/// Header `param,born_re_0..,born_tr_0..,match_re_0..,match_tr_0..,n_c`.
pub fn born_csv(rows: &[BornRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::usage(
            "nothing to write: the comparison produced no rows",
        ));
    }
    let max_nc = rows.iter().map(|r| r.n_c).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str("param");
    for group in ["born_re", "born_tr", "match_re", "match_tr"] {
        for n in 0..=max_nc {
            let _ = write!(out, ",{group}_{n}");
        }
    }
    out.push_str(",n_c\n");
    for row in rows {
        out.push_str(&fmt_f64(row.value));
        for values in [&row.born_re, &row.born_tr, &row.match_re, &row.match_tr] {
            for n in 0..=max_nc {
                let _ = write!(out, ",{}", fmt_f64(channel(values, n)));
            }
        }
        let _ = writeln!(out, ",{}", row.n_c);
    }
    Ok(out)
}

/// Writes the rendered text, mapping filesystem errors to exit code 3.
pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)?;
    Ok(())
}
