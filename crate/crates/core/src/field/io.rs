//! Plain-text field format and grayscale heatmap export.
//!
//! ```text
//! dim 2; axis 0: -1 1 129; axis 1: 0 4 65;
//! <one value per line, row-major, last axis fastest>
//! ```
//!
//! The per-axis count is the number of nodes. Values are written with the
//! shortest representation that parses back to the same `f64`.

use std::io::{BufRead, Write};

use super::{GridSpec, ScalarField};
use crate::error::{Error, Result};

pub fn write_field<W: Write>(mut w: W, field: &ScalarField) -> std::io::Result<()> {
    let g = field.grid();
    write!(w, "dim {};", g.dim())?;
    for (a, &(lo, hi)) in g.bounds().iter().enumerate() {
        write!(w, " axis {a}: {lo} {hi} {};", g.nodes(a))?;
    }
    writeln!(w)?;
    for v in field.values() {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<GridSpec> {
    let bad = |m: &str| Error::Format(format!("field header: {m}"));
    let mut parts = line.split(';').map(str::trim).filter(|s| !s.is_empty());
    let dim: usize = parts
        .next()
        .and_then(|p| p.strip_prefix("dim "))
        .and_then(|p| p.trim().parse().ok())
        .ok_or_else(|| bad("missing 'dim k'"))?;
    let mut bounds = Vec::with_capacity(dim);
    let mut cells = Vec::with_capacity(dim);
    for a in 0..dim {
        let part = parts
            .next()
            .ok_or_else(|| bad(&format!("missing axis {a}")))?;
        let rest = part
            .strip_prefix(&format!("axis {a}:"))
            .ok_or_else(|| bad(&format!("expected 'axis {a}:'")))?;
        let nums: Vec<&str> = rest.split_whitespace().collect();
        if nums.len() != 3 {
            return Err(bad(&format!("axis {a} needs 'min max nodes'")));
        }
        let lo: f64 = nums[0].parse().map_err(|_| bad("bad axis minimum"))?;
        let hi: f64 = nums[1].parse().map_err(|_| bad("bad axis maximum"))?;
        let n: usize = nums[2].parse().map_err(|_| bad("bad node count"))?;
        if n < 2 {
            return Err(bad("an axis needs at least two nodes"));
        }
        bounds.push((lo, hi));
        cells.push(n - 1);
    }
    if parts.next().is_some() {
        return Err(bad("more axes than 'dim' declares"));
    }
    GridSpec::new(bounds, cells).map_err(|e| Error::Format(e.to_string()))
}

/// Reads one field (header plus values) and leaves `r` just past it.
pub fn read_field<R: BufRead>(r: &mut R) -> Result<ScalarField> {
    let mut line = String::new();
    let io_err = |e: std::io::Error| Error::Format(format!("read failed: {e}"));
    if r.read_line(&mut line).map_err(io_err)? == 0 {
        return Err(Error::Format("missing field header".into()));
    }
    let grid = parse_header(line.trim())?;
    let n = grid.node_count();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        line.clear();
        if r.read_line(&mut line).map_err(io_err)? == 0 {
            return Err(Error::Format(format!(
                "field truncated after {i} of {n} values"
            )));
        }
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad field value '{}'", line.trim())))?;
        values.push(v);
    }
    ScalarField::new(grid, values).map_err(|e| Error::Format(e.to_string()))
}

/// Binary PGM (P5) of a 2-D field. Columns follow axis 0, rows follow axis 1
/// with the largest coordinate on top; grey levels map [min, max] to [0, 255].
pub fn write_pgm<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    if g.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: g.dim(),
        });
    }
    let (nx, ny) = (g.nodes(0), g.nodes(1));
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    let mut pixels = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = ny - 1 - row;
        for i in 0..nx {
            let v = field.values()[g.flat_index(&[i, j])];
            let level = if span > 0.0 {
                ((v - lo) / span * 255.0).round()
            } else {
                0.0
            };
            pixels.push(level as u8);
        }
    }
    let io = |e| Error::io("<pgm>", e);
    write!(w, "P5\n{nx} {ny}\n255\n").map_err(io)?;
    w.write_all(&pixels).map_err(io)?;
    Ok(())
}
