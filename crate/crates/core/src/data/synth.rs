//! Seeded synthetic datasets.
//!
//! Class counts follow the reference experiments. The shapes are only known
//! qualitatively, so the numeric geometry below is fixed here: the ring and
//! horseshoe sit at radius 2 with radial noise 0.45 around a unit Gaussian,
//! which makes the classes overlap heavily (F1-optimal boundaries reach
//! roughly 0.37 on the imbalanced ring data).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{Label, LabeledDataset};
use crate::error::{Error, Result};

pub const TOY_POSITIVES: usize = 1000;
pub const TOY_NEGATIVES: usize = 50000;
pub const TOY_POSITIVE_MEAN: f64 = 3.0;
pub const TOY_NEGATIVE_MEAN: f64 = 1.0;

pub const RING_RADIUS: f64 = 2.0;
pub const RING_RADIAL_SD: f64 = 0.45;
const MODE_SD: f64 = 0.6;
const POSITIVE_MODES: [[f64; 2]; 3] = [[-2.0, 1.0], [0.0, -1.0], [2.0, 1.0]];
const NEGATIVE_MODES: [[f64; 2]; 3] = [[-2.0, -1.0], [0.0, 1.0], [2.0, -1.0]];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn build(dim: usize, features: Vec<f64>, labels: Vec<Label>) -> LabeledDataset {
    LabeledDataset::new(dim, features, labels).expect("generators emit finite, consistent data")
}

/// 1-D toy problem: positives ~ N(3, 1), negatives ~ N(1, 1).
pub fn gen_toy1d(seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let pos = Normal::new(TOY_POSITIVE_MEAN, 1.0).unwrap();
    let neg = Normal::new(TOY_NEGATIVE_MEAN, 1.0).unwrap();
    let mut features = Vec::with_capacity(TOY_POSITIVES + TOY_NEGATIVES);
    let mut labels = Vec::with_capacity(TOY_POSITIVES + TOY_NEGATIVES);
    for _ in 0..TOY_POSITIVES {
        features.push(pos.sample(&mut r));
        labels.push(Label::Positive);
    }
    for _ in 0..TOY_NEGATIVES {
        features.push(neg.sample(&mut r));
        labels.push(Label::Negative);
    }
    build(1, features, labels)
}

/// Separable 1-D data: positives uniform on [0, 1], negatives on [4, 5].
pub fn gen_disjoint_1d(positives: usize, negatives: usize, seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let mut features = Vec::with_capacity(positives + negatives);
    let mut labels = Vec::with_capacity(positives + negatives);
    for _ in 0..positives {
        features.push(r.random::<f64>());
        labels.push(Label::Positive);
    }
    for _ in 0..negatives {
        features.push(4.0 + r.random::<f64>());
        labels.push(Label::Negative);
    }
    build(1, features, labels)
}

fn gaussian(r: &mut ChaCha8Rng, center: [f64; 2], sd: f64) -> [f64; 2] {
    let a: f64 = r.sample(StandardNormal);
    let b: f64 = r.sample(StandardNormal);
    [center[0] + sd * a, center[1] + sd * b]
}

fn arc(r: &mut ChaCha8Rng, from: f64, to: f64) -> [f64; 2] {
    let theta = from + (to - from) * r.random::<f64>();
    let z: f64 = r.sample(StandardNormal);
    let rad = RING_RADIUS + RING_RADIAL_SD * z;
    [rad * theta.cos(), rad * theta.sin()]
}

/// The four 2-D benchmark databases.
///
/// | id | positives | negatives | geometry |
/// |----|-----------|-----------|----------|
/// | 1  | 5000 | 5000  | ring vs. unit Gaussian at the origin |
/// | 2  | 1000 | 10000 | three Gaussian modes per class on interleaved lattice sites |
/// | 3  | 1000 | 10000 | upper half-annulus (horseshoe) around a unit Gaussian |
/// | 4  | 1000 | 10000 | as database 1 |
pub fn gen_db(which: u32, seed: u64) -> Result<LabeledDataset> {
    let (p, n) = match which {
        1 => (5000, 5000),
        2..=4 => (1000, 10000),
        other => return Err(Error::InvalidDatabase(other)),
    };
    let mut r = rng(seed.wrapping_add(which as u64 * 0x9e37_79b9));
    let mut features = Vec::with_capacity(2 * (p + n));
    let mut labels = Vec::with_capacity(p + n);
    for i in 0..p {
        let x = match which {
            1 | 4 => arc(&mut r, 0.0, 2.0 * PI),
            2 => gaussian(&mut r, POSITIVE_MODES[i % 3], MODE_SD),
            _ => arc(&mut r, 0.0, PI),
        };
        features.extend_from_slice(&x);
        labels.push(Label::Positive);
    }
    for i in 0..n {
        let x = match which {
            2 => gaussian(&mut r, NEGATIVE_MODES[i % 3], MODE_SD),
            _ => gaussian(&mut r, [0.0, 0.0], 1.0),
        };
        features.extend_from_slice(&x);
        labels.push(Label::Negative);
    }
    Ok(build(2, features, labels))
}
