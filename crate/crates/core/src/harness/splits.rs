use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `i mod 3 == 0` goes to training (0-based), everything else to testing.
pub fn split_mod3(n: usize) -> (Vec<usize>, Vec<usize>) {
    (0..n).partition(|i| i % 3 == 0)
}

/// Seeded shuffle followed by `k` contiguous folds whose sizes differ by at
/// most one. Returns `(train, test)` index sets, each sorted ascending.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!("cannot split {n} cases into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut test: Vec<usize> = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        train.sort_unstable();
        folds.push((train, test));
        start += size;
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod3_examples() {
        assert_eq!(split_mod3(6), (vec![0, 3], vec![1, 2, 4, 5]));
        assert_eq!(split_mod3(1), (vec![0], vec![]));
        let (tr, te) = split_mod3(42);
        assert_eq!((tr.len(), te.len()), (14, 28));
    }

    #[test]
    fn kfold_shapes() {
        let folds = kfold(5, 5, 3).unwrap();
        assert!(folds.iter().all(|(tr, te)| te.len() == 1 && tr.len() == 4));
        let folds = kfold(10, 5, 3).unwrap();
        assert!(folds.iter().all(|(_, te)| te.len() == 2));
        assert!(kfold(3, 5, 0).is_err());
    }
}
