use levelset_fbeta::classifier::training_grid;
use levelset_fbeta::data::{gen_db, gen_toy1d};
use levelset_fbeta::density::{estimate_pair, BandwidthRule, DensityPair};
use levelset_fbeta::energy::{Measure, MeasureEnergy};
use levelset_fbeta::field::{init_shape, InitShape, ScalarField};
use levelset_fbeta::heaviside::dirac;
use levelset_fbeta::solver::TrainConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUMPS: usize = 24;
const FD_STEP: f64 = 1e-5;

/// Gaussian bump of width two cells centred on a node.
fn bump(u: &ScalarField, center: usize) -> Vec<f64> {
    let g = u.grid();
    let c = g.node_point(center);
    let w = 2.0 * g.max_spacing();
    (0..g.node_count())
        .map(|i| {
            let p = g.node_point(i);
            let r2: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            (-r2 / (2.0 * w * w)).exp()
        })
        .collect()
}

fn shifted(u: &ScalarField, v: &[f64], t: f64) -> ScalarField {
    let values = u.values().iter().zip(v).map(|(a, b)| a + t * b).collect();
    ScalarField::new(u.grid().clone(), values).unwrap()
}

/// Worst relative error between Σ wᵢE'ᵢvᵢ and the central difference of E
/// along bumps centred on random nodes of the active band.
fn worst_error(u: &ScalarField, d: &DensityPair, measure: Measure, seed: u64) -> f64 {
    let e = MeasureEnergy::new(measure, d).unwrap();
    let eps = u.grid().max_spacing();
    let grad = e.gradient(u, d, eps).unwrap();
    let w = u.grid().quadrature_weights();
    let peak = dirac(0.0, eps);
    let active: Vec<usize> = (0..u.values().len())
        .filter(|&i| dirac(u.values()[i], eps) > 0.01 * peak)
        .filter(|&i| d.f_pos.values()[i] + d.f_neg.values()[i] > 1e-6)
        .collect();
    assert!(active.len() >= BUMPS, "only {} active nodes", active.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..BUMPS {
        let v = bump(u, active[rng.random_range(0..active.len())]);
        let analytic: f64 = (0..v.len()).map(|i| w[i] * grad.values()[i] * v[i]).sum();
        let plus = e.evaluate(&shifted(u, &v, FD_STEP), d, eps).unwrap();
        let minus = e.evaluate(&shifted(u, &v, -FD_STEP), d, eps).unwrap();
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let rel = (analytic - numeric).abs() / numeric.abs().max(analytic.abs());
        worst = worst.max(rel);
    }
    worst
}

#[test]
fn toy_gradient_matches_central_differences() {
    let data = gen_toy1d(3);
    let cfg = TrainConfig::default();
    let grid = training_grid(&data, &cfg).unwrap();
    let d = estimate_pair(&data, &grid, &BandwidthRule::Scott).unwrap();
    let u = ScalarField::from_fn(grid, |x| (2.1 * x[0]).sin() + 0.2);
    for measure in [
        Measure::f1(),
        Measure::FBeta { beta: 3.0 },
        Measure::Accuracy,
    ] {
        let err = worst_error(&u, &d, measure, 11);
        assert!(err <= 1e-3, "{measure}: {err:e}");
    }
}

#[test]
fn planar_gradient_matches_central_differences() {
    let data = gen_db(2, 5).unwrap();
    let cfg = TrainConfig {
        resolution: Some(vec![64]),
        ..Default::default()
    };
    let grid = training_grid(&data, &cfg).unwrap();
    let d = estimate_pair(&data, &grid, &BandwidthRule::Scott).unwrap();
    let u = init_shape(&grid, &InitShape::default()).unwrap();
    for (measure, seed) in [
        (Measure::f1(), 1),
        (Measure::FBeta { beta: 0.5 }, 2),
        (Measure::Accuracy, 3),
    ] {
        let err = worst_error(&u, &d, measure, seed);
        assert!(err <= 1e-3, "{measure}: {err:e}");
    }
}
