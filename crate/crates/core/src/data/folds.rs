use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DataError, DataSet, Task};

/// Splits example indices into `k` disjoint folds. Classification data is
/// stratified so each class is spread over the folds with counts differing by
/// at most one; other tasks get a plain shuffled partition.
pub fn stratified_folds(ds: &DataSet, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, DataError> {
    let n = ds.len();
    if k < 2 || k > n {
        return Err(DataError::FoldCount { k, n });
    }
    if ds.task() != Some(Task::Classification) {
        return shuffled_folds(n, k, seed);
    }
    let labels = ds.labels().ok_or(DataError::NoTask)?;
    let levels = ds
        .label_index()
        .and_then(|i| ds.attribute(i).levels())
        .map_or(0, <[String]>::len);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for level in 0..levels {
        let mut members: Vec<usize> = (0..n).filter(|&r| labels[r] == level as f64).collect();
        members.shuffle(&mut rng);
        for r in members {
            folds[next].push(r);
            next = (next + 1) % k;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

pub fn shuffled_folds(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, DataError> {
    if k < 2 || k > n {
        return Err(DataError::FoldCount { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, r) in order.into_iter().enumerate() {
        folds[i % k].push(r);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}
