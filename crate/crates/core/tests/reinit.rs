use levelset_fbeta::field::{GridSpec, ScalarField};
use levelset_fbeta::solver::reinitialize;
use proptest::prelude::*;

const CELLS: usize = 96;
/// Oracle contour resolution relative to the test grid.
const REFINE: usize = 4;

fn grid() -> GridSpec {
    GridSpec::new(vec![(-1.0, 1.0), (-1.0, 1.5)], vec![CELLS, CELLS]).unwrap()
}

type Blob = (f64, f64, f64, f64);

fn blob_value(params: &[Blob], level: f64, x: &[f64]) -> f64 {
    let s: f64 = params
        .iter()
        .map(|&(cx, cy, w, a)| {
            a * (-((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (2.0 * w * w)).exp()
        })
        .sum();
    s - level
}

/// Scaled sum of Gaussian blobs minus a level, so the zero set is a union of
/// smooth closed curves and |∇u| is far from one.
fn blobs(params: &[Blob], level: f64, scale: f64) -> ScalarField {
    ScalarField::from_fn(grid(), |x| scale * blob_value(params, level, x))
}

/// Brute-force signed distance to zero crossings found on a finer grid.
fn oracle_distance(params: &[Blob], level: f64) -> ScalarField {
    let g = grid();
    let fine = GridSpec::new(g.bounds().to_vec(), vec![CELLS * REFINE; 2]).unwrap();
    let f = ScalarField::from_fn(fine.clone(), |x| blob_value(params, level, x));
    let (n, v) = (fine.nodes(1), f.values());
    let mut crossings = Vec::new();
    for k in 0..fine.node_count() {
        for (ok, q, axis) in [(k % n + 1 < n, k + 1, 1), (k + n < v.len(), k + n, 0)] {
            if ok && v[k] * v[q] < 0.0 {
                let t = v[k] / (v[k] - v[q]);
                let mut p = fine.node_point(k);
                p[axis] += t * fine.spacing(axis);
                crossings.push(p);
            }
        }
    }
    ScalarField::from_fn(g, |x| {
        let d2 = crossings
            .iter()
            .map(|p| (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2))
            .fold(f64::INFINITY, f64::min);
        d2.sqrt().copysign(blob_value(params, level, x))
    })
}

/// Nodes at least `margin` cells from the grid boundary whose index box of
/// that radius holds only one sign of `u`.
fn far_nodes(u: &ScalarField, margin: usize) -> Vec<usize> {
    let g = u.grid();
    let n = g.nodes(1);
    let v = u.values();
    let m = margin as isize;
    (0..g.node_count())
        .filter(|&k| {
            let (i, j) = ((k / n) as isize, (k % n) as isize);
            if i < m || j < m || i > CELLS as isize - m || j > CELLS as isize - m {
                return false;
            }
            (-m..=m).all(|di| {
                (-m..=m).all(|dj| {
                    let q = ((i + di) * n as isize + j + dj) as usize;
                    v[q] * v[k] > 0.0
                })
            })
        })
        .collect()
}

fn blob_strategy() -> impl Strategy<Value = Vec<Blob>> {
    prop::collection::vec(
        (-0.7..0.7f64, -0.6..1.1f64, 0.15..0.5f64, 0.5..2.0f64),
        1..5,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distance_has_unit_slope_and_keeps_signs(
        params in blob_strategy(),
        level in 0.2..0.8f64,
        scale in prop_oneof![0.05..0.5f64, 2.0..30.0f64],
    ) {
        let u = blobs(&params, level, scale);
        prop_assume!(u.has_sign_change());
        let r = reinitialize(&u);
        prop_assert!(!r.single_sign);

        for (a, b) in u.values().iter().zip(r.field.values()) {
            if *a != 0.0 {
                prop_assert_eq!(a.signum(), b.signum());
            }
        }

        // the exact distance has no unit slope on medial ridges either
        let exact = oracle_distance(&params, level).gradient_magnitude().unwrap();
        let unit = |v: f64| (0.9..=1.1).contains(&v);
        let far: Vec<usize> = far_nodes(&u, 2)
            .into_iter()
            .filter(|&k| unit(exact.values()[k]))
            .collect();
        prop_assume!(far.len() > 400);
        let grad = r.field.gradient_magnitude().unwrap();
        let good = far.iter().filter(|&&k| unit(grad.values()[k])).count();
        let frac = good as f64 / far.len() as f64;
        prop_assert!(frac >= 0.95, "unit slope on {:.3} of {} nodes", frac, far.len());
    }
}
