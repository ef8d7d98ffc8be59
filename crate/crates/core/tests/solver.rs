use levelset_fbeta::classifier::{fit, fit_detailed, principal_threshold, training_grid};
use levelset_fbeta::data::{gen_db, gen_toy1d};
use levelset_fbeta::density::{estimate_pair, BandwidthRule, DensityPair};
use levelset_fbeta::energy::{Measure, MeasureEnergy};
use levelset_fbeta::field::{init_shape, GridSpec, InitShape, ScalarField};
use levelset_fbeta::metrics::{confusion_from_predictions, metrics_from_counts};
use levelset_fbeta::par::Execution;
use levelset_fbeta::solver::{reinitialize, step, train, TrainConfig, TrainStatus};
use levelset_fbeta::Error;

fn db_pair(which: u32, cells: usize) -> (DensityPair, TrainConfig) {
    let data = gen_db(which, 42).unwrap();
    let cfg = TrainConfig {
        resolution: Some(vec![cells]),
        ..Default::default()
    };
    let grid = training_grid(&data, &cfg).unwrap();
    (
        estimate_pair(&data, &grid, &BandwidthRule::Scott).unwrap(),
        cfg,
    )
}

#[test]
fn energy_descends_without_regularization_on_every_database() {
    for which in 1..=4 {
        let (d, mut cfg) = db_pair(which, 64);
        cfg.lambda = Some(0.0);
        cfg.max_iter = 1500;
        let e = MeasureEnergy::new(cfg.measure, &d).unwrap();
        let (_, trace) = train(&d, &e, &cfg).unwrap();
        let steps: Vec<_> = trace.records.windows(2).filter(|w| !w[1].reinit).collect();
        let down = steps
            .iter()
            .filter(|w| w[1].energy <= w[0].energy + 1e-9)
            .count();
        let frac = down as f64 / steps.len() as f64;
        assert!(
            frac >= 0.95,
            "db{which}: E decreased on {frac:.3} of {} steps",
            steps.len()
        );
    }
}

#[test]
fn traces_are_bit_identical_across_runs_and_execution_modes() {
    let (d, mut cfg) = db_pair(3, 48);
    cfg.max_iter = 300;
    let e = MeasureEnergy::new(cfg.measure, &d).unwrap();
    let (m1, t1) = train(&d, &e, &cfg).unwrap();
    let (m2, t2) = train(&d, &e, &cfg).unwrap();
    cfg.exec = Execution::Sequential;
    let (m3, t3) = train(&d, &e, &cfg).unwrap();
    let bits = |t: &levelset_fbeta::solver::EvolutionTrace| -> Vec<(u64, u64)> {
        t.records
            .iter()
            .map(|r| (r.energy.to_bits(), r.max_update.to_bits()))
            .collect()
    };
    assert_eq!(bits(&t1), bits(&t2));
    assert_eq!(bits(&t1), bits(&t3));
    assert_eq!(m1.field(), m2.field());
    assert_eq!(m1.field(), m3.field());
}

#[test]
fn converged_front_balances_the_densities() {
    let data = gen_toy1d(42);
    let cfg = TrainConfig {
        max_iter: 40_000,
        ..Default::default()
    };
    let fitted = fit_detailed(&data, &cfg).unwrap();
    assert_eq!(fitted.trace.status, TrainStatus::Converged);
    let d = &fitted.densities;
    let u = fitted.model.field();
    let e = fitted.model.energy();
    let energy = e.evaluate(u, d, fitted.model.params().eps_h).unwrap();
    let balance: Vec<f64> = d
        .f_pos
        .values()
        .iter()
        .zip(d.f_neg.values())
        .map(|(p, n)| n - (e.k() + energy) * p)
        .collect();
    let tau = principal_threshold(u, d).unwrap();
    let h = u.grid().spacing(0);
    let i = ((tau - u.grid().bounds()[0].0) / h).floor() as usize;
    let slope = ((balance[i + 2] - balance[i - 1]) / (3.0 * h)).abs();
    let scale = d.f_pos.values()[i].max(d.f_neg.values()[i]);
    for k in [i, i + 1] {
        // a crossing sits within one cell of each bracketing node
        assert!(
            balance[k].abs() <= slope * h + cfg.tol * scale,
            "node {k}: {}",
            balance[k]
        );
    }
}

#[test]
fn reinitialization_keeps_the_sharp_energy() {
    let (d, _) = db_pair(1, 64);
    let e = MeasureEnergy::new(Measure::f1(), &d).unwrap();
    let u = ScalarField::from_fn(d.grid().clone(), |x| {
        0.3 * (x[0] * x[0] + 2.0 * x[1] * x[1] - 4.0).tanh()
    });
    let r = reinitialize(&u).field;
    let sharp = 1e-9 * d.grid().max_spacing();
    let (a, b) = (
        e.evaluate(&u, &d, sharp).unwrap(),
        e.evaluate(&r, &d, sharp).unwrap(),
    );
    assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} vs {b}");
}

#[test]
fn reinitializing_a_distance_keeps_the_smoothed_energy() {
    let data = gen_toy1d(42);
    let grid = training_grid(&data, &TrainConfig::default()).unwrap();
    let d = estimate_pair(&data, &grid, &BandwidthRule::Scott).unwrap();
    let e = MeasureEnergy::new(Measure::f1(), &d).unwrap();
    let eps = grid.max_spacing();
    let u = ScalarField::from_fn(grid, |x| 0.8 - (x[0] - 3.1).abs());
    let r = reinitialize(&u).field;
    let (a, b) = (
        e.evaluate(&u, &d, eps).unwrap(),
        e.evaluate(&r, &d, eps).unwrap(),
    );
    assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} vs {b}");
}

#[test]
fn lattice_offsets_reach_the_same_f1_on_database_one() {
    let data = gen_db(1, 42).unwrap();
    let scores: Vec<f64> = [0.0, 0.2, 0.4, 0.6, 0.8]
        .iter()
        .map(|&phase| {
            let cfg = TrainConfig {
                init: InitShape::Lattice {
                    per_axis: None,
                    radius_frac: 0.3,
                    phase,
                },
                ..Default::default()
            };
            let (model, _) = fit(&data, &cfg).unwrap();
            let pred = model.predict_dataset(&data).unwrap();
            let c = confusion_from_predictions(data.labels(), &pred).unwrap();
            metrics_from_counts(&c, 1.0).unwrap().f_beta
        })
        .collect();
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo <= 0.01, "{scores:?}");
}

#[test]
fn oversized_steps_are_rejected() {
    let (d, mut cfg) = db_pair(2, 32);
    cfg.dt = Some(1e6);
    let e = MeasureEnergy::new(cfg.measure, &d).unwrap();
    let u = init_shape(d.grid(), &InitShape::default()).unwrap();
    assert!(matches!(
        step(&u, &e, &d, &cfg),
        Err(Error::StepRejected { .. })
    ));
    // training halves dt until the guard accepts
    cfg.max_iter = 20;
    let (_, trace) = train(&d, &e, &cfg).unwrap();
    assert!(trace.rejected_steps > 0);
    assert!(trace.params.dt < 1e6);
}

#[test]
fn empty_start_restarts_from_the_lattice() {
    // positives near 5, negatives near 1; the start region holds no positive mass
    let g = GridSpec::new(vec![(-2.0, 10.0)], vec![480]).unwrap();
    let gauss =
        |mu: f64| ScalarField::from_fn(g.clone(), move |x| (-(x[0] - mu).powi(2) / 0.02).exp());
    let norm = |f: ScalarField| {
        let m = f.integrate();
        f.map(|v| v / m)
    };
    let d = DensityPair::new(norm(gauss(5.0)), norm(gauss(1.0)), 50, 500).unwrap();
    let e = MeasureEnergy::new(Measure::f1(), &d).unwrap();
    let cfg = TrainConfig {
        init: InitShape::Sphere {
            center: vec![-1.5],
            radius: 0.2,
        },
        // arctan tails alone keep about ε·f₊ of positive mass
        eps_h: Some(1e-13),
        max_iter: 200,
        ..Default::default()
    };
    let (model, trace) = train(&d, &e, &cfg).unwrap();
    assert!(trace.restarted);
    assert!(model.predict(&[5.0]).unwrap().label.is_positive());
}
