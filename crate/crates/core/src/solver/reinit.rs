//! Signed-distance reconstruction that keeps the sign of every node.
//!
//! Zero crossings are located on grid edges by linear interpolation. Each node
//! then takes the nearest crossing point known to itself or a neighbour,
//! sweeping the grid in all 2^d axis orderings until nothing improves. Nodes
//! keep exact Euclidean distances to the crossing set, so the result has unit
//! slope away from medial ridges.

use crate::field::{GridSpec, ScalarField};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Reinitialized {
    pub field: ScalarField,
    /// The input had no sign change and was returned unchanged.
    pub single_sign: bool,
}

pub fn reinitialize(u: &ScalarField) -> Reinitialized {
    match distance_values(u.grid(), u.values()) {
        Some(values) => Reinitialized {
            field: ScalarField::from_parts_unchecked(u.grid().clone(), values),
            single_sign: false,
        },
        None => Reinitialized {
            field: u.clone(),
            single_sign: true,
        },
    }
}

/// Signed distances for raw node values, or `None` without any zero crossing.
pub(crate) fn distance_values(grid: &GridSpec, u: &[f64]) -> Option<Vec<f64>> {
    let d = grid.dim();
    let n = grid.node_count();
    let mut seeds: Vec<f64> = Vec::new();
    let mut nearest = vec![NONE; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut point = vec![0.0; d];
    let mut idx = vec![0usize; d];

    let offer = |node: usize, seed: u32, seeds: &[f64], nearest: &mut [u32], dist: &mut [f64]| {
        let dd = distance_to(grid, node, &seeds[seed as usize * d..][..d]);
        if dd < dist[node] {
            dist[node] = dd;
            nearest[node] = seed;
        }
    };

    for i in 0..n {
        grid.multi_index(i, &mut idx);
        if u[i] == 0.0 {
            fill_point(grid, &idx, &mut point);
            let s = push_seed(&mut seeds, &point, d);
            offer(i, s, &seeds, &mut nearest, &mut dist);
            continue;
        }
        for a in 0..d {
            if idx[a] == grid.cells()[a] {
                continue;
            }
            let j = i + grid.stride(a);
            if u[i] * u[j] < 0.0 {
                let t = u[i] / (u[i] - u[j]);
                fill_point(grid, &idx, &mut point);
                point[a] += t * grid.spacing(a);
                let s = push_seed(&mut seeds, &point, d);
                offer(i, s, &seeds, &mut nearest, &mut dist);
                offer(j, s, &seeds, &mut nearest, &mut dist);
            }
        }
    }
    if seeds.is_empty() {
        return None;
    }

    let cells = grid.cells();
    loop {
        let mut changed = false;
        for mask in 0..(1usize << d) {
            for k in 0..n {
                // k's digits in row-major order, each axis optionally reversed
                let mut rem = k;
                let mut node = 0;
                for a in (0..d).rev() {
                    let m = cells[a] + 1;
                    let mut i_a = rem % m;
                    rem /= m;
                    if mask >> a & 1 == 1 {
                        i_a = m - 1 - i_a;
                    }
                    idx[a] = i_a;
                    node += i_a * grid.stride(a);
                }
                for a in 0..d {
                    for (ok, nb) in [
                        (idx[a] > 0, node.wrapping_sub(grid.stride(a))),
                        (idx[a] < cells[a], node + grid.stride(a)),
                    ] {
                        if !ok || nearest[nb] == NONE || nearest[nb] == nearest[node] {
                            continue;
                        }
                        let s = nearest[nb];
                        let dd = distance_to(grid, node, &seeds[s as usize * d..][..d]);
                        if dd < dist[node] {
                            dist[node] = dd;
                            nearest[node] = s;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    Some(
        u.iter()
            .zip(&dist)
            .map(|(&v, &r)| {
                if v == 0.0 {
                    0.0
                } else if r == 0.0 {
                    // crossing coincides with the node to rounding; keep the sign
                    v
                } else {
                    r.copysign(v)
                }
            })
            .collect(),
    )
}

fn push_seed(seeds: &mut Vec<f64>, p: &[f64], d: usize) -> u32 {
    seeds.extend_from_slice(p);
    (seeds.len() / d - 1) as u32
}

fn fill_point(grid: &GridSpec, idx: &[usize], out: &mut [f64]) {
    for (a, (&i, o)) in idx.iter().zip(out.iter_mut()).enumerate() {
        *o = grid.coord(a, i);
    }
}

fn distance_to(grid: &GridSpec, node: usize, p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(a, &c)| {
            let x = grid.coord(a, grid.axis_index(node, a));
            (x - c) * (x - c)
        })
        .sum::<f64>()
        .sqrt()
}
