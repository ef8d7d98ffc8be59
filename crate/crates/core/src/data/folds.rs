use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Label, LabeledDataset};
use crate::error::{ClassTag, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded k-fold split. Test folds are disjoint and cover every index once.
/// Stratified splits deal each class round-robin, so every fold holds
/// ⌊n_c/k⌋ or ⌈n_c/k⌉ samples of class c.
pub fn kfold(data: &LabeledDataset, k: usize, seed: u64, stratified: bool) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; data.len()];
    if stratified {
        let mut offset = 0;
        for (label, tag) in [
            (Label::Positive, ClassTag::Positive),
            (Label::Negative, ClassTag::Negative),
        ] {
            let mut idx: Vec<usize> = (0..data.len())
                .filter(|&i| data.labels()[i] == label)
                .collect();
            if idx.len() < k {
                return Err(Error::InsufficientClassSamples {
                    class: tag,
                    have: idx.len(),
                    need: k,
                });
            }
            idx.shuffle(&mut rng);
            for (j, &i) in idx.iter().enumerate() {
                assignment[i] = (offset + j) % k;
            }
            // keep total fold sizes balanced across classes
            offset = (offset + idx.len()) % k;
        }
    } else {
        if data.len() < k {
            return Err(Error::Config(format!(
                "{} samples cannot fill {k} folds",
                data.len()
            )));
        }
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            assignment[i] = j % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..data.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}
