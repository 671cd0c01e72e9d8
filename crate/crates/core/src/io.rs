//! CSV persistence of branches and node fields.
//!
//! Floats are written with 17 significant digits, so every `f64` survives a
//! write/read cycle bit for bit. Lines end in `\n`; booleans are `0`/`1`.

use crate::continuation::Branch;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::norm_inf;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const BRANCH_HEADER: &str = "s,lambda,norm_w_inf,norm_v_inf,morse_index,is_coexistence,is_fold";

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of a branch file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRow {
    pub s: f64,
    pub lambda: f64,
    pub norm_w_inf: f64,
    pub norm_v_inf: f64,
    /// `-1` in the file when not computed.
    pub morse_index: Option<usize>,
    pub is_coexistence: bool,
    pub is_fold: bool,
}

/// Rows in increasing `s`; the `s < 0` part is never flagged as a fold.
pub fn branch_rows(branch: &Branch) -> Vec<BranchRow> {
    let flags = branch.fold_flags();
    let row = |p: &crate::continuation::BranchPoint, fold: bool| BranchRow {
        s: p.s,
        lambda: p.state.lambda,
        norm_w_inf: norm_inf(&p.state.w),
        norm_v_inf: norm_inf(&p.state.v),
        morse_index: p.state.morse_index,
        is_coexistence: p.state.is_coexistence,
        is_fold: fold,
    };
    let mut rows: Vec<BranchRow> = branch.negative.iter().rev().map(|p| row(p, false)).collect();
    rows.extend(branch.points.iter().zip(flags).map(|(p, f)| row(p, f)));
    rows
}

pub fn branch_csv(rows: &[BranchRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(BRANCH_HEADER);
    out.push('\n');
    for r in rows {
        let morse = r.morse_index.map_or(-1, |k| k as i64);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.s),
            fmt_f64(r.lambda),
            fmt_f64(r.norm_w_inf),
            fmt_f64(r.norm_v_inf),
            morse,
            r.is_coexistence as u8,
            r.is_fold as u8
        );
    }
    out
}

fn parse_bool(field: &str, line: usize) -> Result<bool> {
    match field {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Io(format!("line {line}: expected 0 or 1, found `{field}`"))),
    }
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Io(format!("line {line}: invalid number `{field}`")))
}

pub fn parse_branch_csv(text: &str) -> Result<Vec<BranchRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == BRANCH_HEADER => {}
        other => return Err(Error::Io(format!("unexpected branch header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Io(format!("line {ln}: expected 7 fields, found {}", f.len())));
        }
        let morse: i64 = f[4]
            .parse()
            .map_err(|_| Error::Io(format!("line {ln}: invalid morse index `{}`", f[4])))?;
        rows.push(BranchRow {
            s: parse_f64(f[0], ln)?,
            lambda: parse_f64(f[1], ln)?,
            norm_w_inf: parse_f64(f[2], ln)?,
            norm_v_inf: parse_f64(f[3], ln)?,
            morse_index: usize::try_from(morse).ok(),
            is_coexistence: parse_bool(f[5], ln)?,
            is_fold: parse_bool(f[6], ln)?,
        });
    }
    Ok(rows)
}

pub fn write_branch(path: &Path, branch: &Branch) -> Result<()> {
    fs::write(path, branch_csv(&branch_rows(branch)))?;
    Ok(())
}

pub fn read_branch(path: &Path) -> Result<Vec<BranchRow>> {
    parse_branch_csv(&fs::read_to_string(path)?)
}

/// Table with an `x` column followed by one column per field.
pub fn node_table(grid: &Grid, names: &[&str], columns: &[&[f64]]) -> String {
    let mut out = String::new();
    out.push('x');
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for i in 0..grid.len() {
        out.push_str(&fmt_f64(grid.x(i)));
        for c in columns {
            out.push(',');
            out.push_str(&fmt_f64(c[i]));
        }
        out.push('\n');
    }
    out
}

/// Writes `x,w,v` for every branch point in increasing `s` as
/// `<prefix>_<k>.csv` inside `dir`.
pub fn write_branch_states(dir: &Path, prefix: &str, branch: &Branch, grid: &Grid) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (k, p) in branch.ordered_points().into_iter().enumerate() {
        let text = node_table(grid, &["w", "v"], &[&p.state.w, &p.state.v]);
        fs::write(dir.join(format!("{prefix}_{k:05}.csv")), text)?;
    }
    Ok(())
}

/// Parses a table written by [`node_table`] into its columns, `x` first.
pub fn parse_node_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Io("empty table".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(Error::Io(format!("line {}: expected {} fields", k + 2, header.len())));
        }
        for (c, v) in cols.iter_mut().zip(f) {
            c.push(parse_f64(v, k + 2)?);
        }
    }
    Ok((header, cols))
}
