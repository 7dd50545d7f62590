//! Fold assignment for k-fold cross-validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FoldError {
    #[error("class {class} has {count} samples, need at least {folds} for {folds}-fold cross-validation")]
    InsufficientDataForFolds { class: usize, count: usize, folds: usize },
    #[error("{groups} groups cannot fill {folds} folds")]
    TooFewGroups { groups: usize, folds: usize },
    #[error("need at least 2 folds, got {0}")]
    InvalidFoldCount(usize),
}

/// Splits sample indices into `k` folds so every fold holds every class.
///
/// Within each class the indices are shuffled with a seeded generator and
/// dealt round-robin; the dealing offset carries over between classes so fold
/// sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, FoldError> {
    if k < 2 {
        return Err(FoldError::InvalidFoldCount(k));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((&class, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(FoldError::InsufficientDataForFolds {
            class,
            count: members.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[offset % k].push(i);
            offset += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Splits by group (e.g. subject): all samples of a group share a fold.
pub fn grouped_folds(groups: &[String], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, FoldError> {
    if k < 2 {
        return Err(FoldError::InvalidFoldCount(k));
    }
    let mut names: Vec<&String> = groups.iter().collect();
    names.sort();
    names.dedup();
    if names.len() < k {
        return Err(FoldError::TooFewGroups {
            groups: names.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    names.shuffle(&mut rng);
    let fold_of: BTreeMap<&String, usize> = names.iter().enumerate().map(|(i, g)| (*g, i % k)).collect();
    let mut folds = vec![Vec::new(); k];
    for (i, g) in groups.iter().enumerate() {
        folds[fold_of[g]].push(i);
    }
    Ok(folds)
}

/// Indices outside fold `held_out`.
pub fn training_indices(folds: &[Vec<usize>], held_out: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(f, _)| *f != held_out)
        .flat_map(|(_, members)| members.iter().copied())
        .collect();
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insufficient_class() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1];
        assert_eq!(
            stratified_folds(&labels, 5, 0),
            Err(FoldError::InsufficientDataForFolds { class: 1, count: 3, folds: 5 })
        );
        assert_eq!(stratified_folds(&labels, 1, 0), Err(FoldError::InvalidFoldCount(1)));
    }

    #[test]
    fn grouped_keeps_groups_together() {
        let groups: Vec<String> = (0..30).map(|i| format!("s{}", i % 6)).collect();
        let folds = grouped_folds(&groups, 3, 1).unwrap();
        for f in &folds {
            let mut g: Vec<&String> = f.iter().map(|&i| &groups[i]).collect();
            g.sort();
            g.dedup();
            assert_eq!(g.len(), 2);
        }
        assert!(grouped_folds(&groups, 7, 1).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(
            labels in prop::collection::vec(0usize..5, 25..200),
            seed in any::<u64>(),
        ) {
            let counts: Vec<usize> = (0..5).map(|c| labels.iter().filter(|&&l| l == c).count()).collect();
            match stratified_folds(&labels, 5, seed) {
                Err(FoldError::InsufficientDataForFolds { .. }) => {
                    prop_assert!(counts.iter().any(|&c| c > 0 && c < 5));
                }
                Err(e) => prop_assert!(false, "{e}"),
                Ok(folds) => {
                    let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
                    let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
                    prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                    for f in &folds {
                        for (c, &count) in counts.iter().enumerate() {
                            if count > 0 {
                                prop_assert!(f.iter().any(|&i| labels[i] == c));
                            }
                        }
                    }
                    prop_assert_eq!(folds, stratified_folds(&labels, 5, seed).unwrap());
                }
            }
        }
    }
}
