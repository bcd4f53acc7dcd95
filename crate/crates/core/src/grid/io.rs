//! Plain-text field files.
//!
//! ```text
//! dim h n1 [n2] origin_1 [origin_2]
//! v_0 v_1 v_2 ...
//! ```
//!
//! Values follow in row-major order (last axis fastest), separated by any
//! whitespace. Numbers use `.` as the decimal separator.

use std::fmt::Write as _;
use std::path::Path;

use super::{Grid, GridField};
use crate::error::{Error, Result};

pub fn write_field_string(field: &GridField) -> String {
    let g = field.grid();
    let mut out = String::new();
    write!(out, "{} {}", g.dim(), g.h()).unwrap();
    for n in g.extents() {
        write!(out, " {n}").unwrap();
    }
    for o in g.origin() {
        write!(out, " {o}").unwrap();
    }
    out.push('\n');
    let row = *g.extents().last().unwrap();
    for (i, v) in field.values().iter().enumerate() {
        write!(out, "{v}").unwrap();
        out.push(if (i + 1) % row == 0 { '\n' } else { ' ' });
    }
    out
}

pub fn read_field_str(text: &str) -> Result<GridField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Format("empty field file".into()))?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    let dim: usize = nums
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad dimension in header {header:?}")))?;
    if !(1..=2).contains(&dim) {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    if nums.len() != 2 + 2 * dim {
        return Err(Error::Format(format!(
            "header {header:?} should have {} entries for dimension {dim}",
            2 + 2 * dim
        )));
    }
    let parse_f = |s: &str| s.parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?} in header")));
    let h = parse_f(nums[1])?;
    let extents = nums[2..2 + dim]
        .iter()
        .map(|s| s.parse::<usize>().map_err(|_| Error::Format(format!("bad extent {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let origin = nums[2 + dim..].iter().map(|s| parse_f(s)).collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(origin, h, extents).map_err(|e| Error::Format(e.to_string()))?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(|s| s.parse::<f64>().map_err(|_| Error::Format(format!("bad value {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != grid.len() {
        return Err(Error::Format(format!(
            "shape mismatch: header declares {} nodes, file has {} values",
            grid.len(),
            values.len()
        )));
    }
    GridField::new(grid, values)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<GridField> {
    read_field_str(&std::fs::read_to_string(path)?)
}

pub fn write_field(field: &GridField, path: impl AsRef<Path>) -> Result<()> {
    crate::report::write_atomic(path.as_ref(), write_field_string(field).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_round_trip_is_exact() {
        let grid = Grid::new(vec![-1.0, 0.5], 0.1, vec![3, 4]).unwrap();
        let f = GridField::from_fn(grid, |x| x[0].sin() + x[1] / 3.0).unwrap();
        let text = write_field_string(&f);
        assert!(text.starts_with("2 0.1 3 4 -1 0.5\n"));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_field_str(&text).unwrap(), f);
    }

    #[test]
    fn shape_mismatch_is_a_format_error() {
        let err = read_field_str("1 0.5 4 0\n1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
        assert!(read_field_str("3 0.5 2 2 2 0 0 0\n").is_err());
        assert!(read_field_str("1 0.5 3 0\n1 x 3\n").is_err());
    }
}
