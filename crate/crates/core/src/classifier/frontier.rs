//! Zero-level-set extraction: thresholds in 1-D, marching squares in 2-D,
//! sign-change edge midpoints above that.
//!
//! A node counts as positive when its value is ≥ 0, matching the prediction
//! tie-break, so every extracted crossing separates the two predicted classes.

use std::collections::BTreeMap;
use std::io::Write;

use crate::density::DensityPair;
use crate::error::{Error, Result};
use crate::field::{GridSpec, OutOfBounds, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    /// The last point connects back to the first.
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frontier {
    Thresholds(Vec<f64>),
    Polylines(Vec<Polyline>),
    EdgeMidpoints(Vec<Vec<f64>>),
}

impl Frontier {
    /// Number of thresholds, polylines or midpoints.
    pub fn len(&self) -> usize {
        match self {
            Frontier::Thresholds(t) => t.len(),
            Frontier::Polylines(p) => p.len(),
            Frontier::EdgeMidpoints(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Header row, then one block per component separated by blank lines.
    /// Closed polylines repeat their first vertex at the end.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match self {
            Frontier::Thresholds(ts) => {
                writeln!(w, "x")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        writeln!(w)?;
                    }
                    writeln!(w, "{t}")?;
                }
            }
            Frontier::Polylines(lines) => {
                writeln!(w, "x,y")?;
                for (i, line) in lines.iter().enumerate() {
                    if i > 0 {
                        writeln!(w)?;
                    }
                    for p in &line.points {
                        writeln!(w, "{},{}", p[0], p[1])?;
                    }
                    if line.closed {
                        if let Some(p) = line.points.first() {
                            writeln!(w, "{},{}", p[0], p[1])?;
                        }
                    }
                }
            }
            Frontier::EdgeMidpoints(points) => {
                let dim = points.first().map_or(0, Vec::len);
                let header: Vec<String> = (0..dim).map(|a| format!("x{a}")).collect();
                writeln!(w, "{}", header.join(","))?;
                for p in points {
                    let row: Vec<String> = p.iter().map(f64::to_string).collect();
                    writeln!(w, "{}", row.join(","))?;
                }
            }
        }
        Ok(())
    }
}

fn positive(v: f64) -> bool {
    v >= 0.0
}

/// Fraction along the edge from `a` to `b` where the linear interpolant
/// changes class.
fn crossing(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a - b)
    }
}

/// Decision frontier of `u`. Fails with a degenerate-model error when the
/// field predicts a single class everywhere.
pub fn zero_set(u: &ScalarField) -> Result<Frontier> {
    let grid = u.grid();
    let v = u.values();
    if v.iter().all(|&x| positive(x)) || v.iter().all(|&x| !positive(x)) {
        return Err(Error::DegenerateModel);
    }
    Ok(match grid.dim() {
        1 => Frontier::Thresholds(thresholds(grid, v)),
        2 => Frontier::Polylines(marching_squares(grid, v)),
        _ => Frontier::EdgeMidpoints(edge_midpoints(grid, v)),
    })
}

fn thresholds(grid: &GridSpec, v: &[f64]) -> Vec<f64> {
    let h = grid.spacing(0);
    v.windows(2)
        .enumerate()
        .filter(|(_, w)| positive(w[0]) != positive(w[1]))
        .map(|(i, w)| grid.coord(0, i) + crossing(w[0], w[1]) * h)
        .collect()
}

fn edge_midpoints(grid: &GridSpec, v: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..v.len() {
        for a in 0..grid.dim() {
            if grid.axis_index(i, a) == grid.cells()[a] {
                continue;
            }
            let j = i + grid.stride(a);
            if positive(v[i]) != positive(v[j]) {
                let mut p = grid.node_point(i);
                p[a] += 0.5 * grid.spacing(a);
                out.push(p);
            }
        }
    }
    out
}

/// Edge ids: `2·node + axis` for the edge leaving `node` along `axis`.
fn marching_squares(grid: &GridSpec, v: &[f64]) -> Vec<Polyline> {
    let (sx, sy) = (grid.stride(0), grid.stride(1));
    let (cx, cy) = (grid.cells()[0], grid.cells()[1]);
    let mut points: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
    let mut segments: Vec<[usize; 2]> = Vec::new();

    let edge_point = |node: usize, axis: usize, points: &mut BTreeMap<usize, [f64; 2]>| -> usize {
        let id = 2 * node + axis;
        points.entry(id).or_insert_with(|| {
            let other = node + grid.stride(axis);
            let t = crossing(v[node], v[other]);
            let (i, j) = (grid.axis_index(node, 0), grid.axis_index(node, 1));
            let mut p = [grid.coord(0, i), grid.coord(1, j)];
            p[axis] += t * grid.spacing(axis);
            p
        });
        id
    };

    for j in 0..cy {
        for i in 0..cx {
            let n0 = i * sx + j * sy;
            let (n1, n2, n3) = (n0 + sx, n0 + sx + sy, n0 + sy);
            let c = [v[n0], v[n1], v[n2], v[n3]].map(positive);
            // bottom, right, top, left
            let edges = [
                (n0, 0, c[0] != c[1]),
                (n1, 1, c[1] != c[2]),
                (n3, 0, c[3] != c[2]),
                (n0, 1, c[0] != c[3]),
            ];
            let crossed: Vec<usize> = (0..4).filter(|&e| edges[e].2).collect();
            let mut id = |e: usize| edge_point(edges[e].0, edges[e].1, &mut points);
            match crossed.len() {
                2 => segments.push([id(crossed[0]), id(crossed[1])]),
                4 => {
                    let centre = positive(0.25 * (v[n0] + v[n1] + v[n2] + v[n3]));
                    if centre == c[0] {
                        // corners 0 and 2 join through the centre; cut off 1 and 3
                        segments.push([id(0), id(1)]);
                        segments.push([id(2), id(3)]);
                    } else {
                        segments.push([id(0), id(3)]);
                        segments.push([id(1), id(2)]);
                    }
                }
                _ => {}
            }
        }
    }
    chain(&points, &segments)
}

fn chain(points: &BTreeMap<usize, [f64; 2]>, segments: &[[usize; 2]]) -> Vec<Polyline> {
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            incident.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    let walk = |start: usize, used: &mut [bool]| -> Option<Polyline> {
        let mut ids = vec![start];
        let mut at = start;
        while let Some(&s) = incident[&at].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let seg = segments[s];
            at = if seg[0] == at { seg[1] } else { seg[0] };
            ids.push(at);
        }
        if ids.len() < 2 {
            return None;
        }
        let closed = ids.len() > 2 && ids.first() == ids.last();
        if closed {
            ids.pop();
        }
        Some(Polyline {
            points: ids.iter().map(|id| points[id]).collect(),
            closed,
        })
    };

    // open chains start at their ends (edges on the domain boundary)
    for (&e, segs) in &incident {
        if segs.len() == 1 && !used[segs[0]] {
            lines.extend(walk(e, &mut used));
        }
    }
    for (&e, segs) in &incident {
        if segs.iter().any(|&s| !used[s]) {
            lines.extend(walk(e, &mut used));
        }
    }
    lines
}

/// In 1-D, the zero crossing of `u` where the class-weighted density
/// P·f₊ + N·f₋ is largest. Crossings in regions the data never reaches are
/// thereby ignored in favour of the one that actually separates samples.
pub fn principal_threshold(u: &ScalarField, d: &DensityPair) -> Result<f64> {
    if u.grid().dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: u.grid().dim(),
        });
    }
    u.same_grid(&d.f_pos)?;
    let Frontier::Thresholds(ts) = zero_set(u)? else {
        unreachable!("1-D frontier is a threshold list")
    };
    let (p, n) = (d.p_count as f64, d.n_count as f64);
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for t in ts {
        let fp = d.f_pos.interpolate(&[t], OutOfBounds::Clamp)?.value;
        let fn_ = d.f_neg.interpolate(&[t], OutOfBounds::Clamp)?.value;
        let mass = p * fp + n * fn_;
        if mass > best.0 {
            best = (mass, t);
        }
    }
    Ok(best.1)
}
