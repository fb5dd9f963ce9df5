use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{evaluate, DetectionRecord, EvalReport, GroundTruthRecord};
use crate::error::{Error, Result};

/// Identity-disjoint folds over the distinct identities in `identities`.
///
/// Identities are sorted, shuffled with `seed` and dealt round-robin, so fold
/// sizes differ by at most one. Each fold lists its identities sorted.
pub fn kfold_identities<S: AsRef<str>>(identities: &[S], k: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k}, need at least 2")));
    }
    let distinct: BTreeSet<&str> = identities.iter().map(AsRef::as_ref).collect();
    if distinct.len() < k {
        return Err(Error::TooFewIdentities {
            found: distinct.len(),
            k,
        });
    }
    let mut ids: Vec<&str> = distinct.into_iter().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, id) in ids.into_iter().enumerate() {
        folds[i % k].push(id.to_string());
    }
    for f in &mut folds {
        f.sort();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub identities: Vec<String>,
    /// Indices of the ground-truth records belonging to this fold.
    pub records: Vec<usize>,
}

/// Splits ground-truth records into `k` identity-disjoint folds.
pub fn kfold_split(records: &[GroundTruthRecord], k: usize, seed: u64) -> Result<Vec<Fold>> {
    let ids: Vec<&str> = records.iter().map(|r| r.identity.as_str()).collect();
    let folds = kfold_identities(&ids, k, seed)?;
    let mut fold_of: BTreeMap<String, usize> = BTreeMap::new();
    for (i, f) in folds.iter().enumerate() {
        for id in f {
            fold_of.insert(id.clone(), i);
        }
    }
    let mut out: Vec<Fold> = folds
        .into_iter()
        .map(|identities| Fold {
            identities,
            records: Vec::new(),
        })
        .collect();
    for (j, r) in records.iter().enumerate() {
        out[fold_of[&r.identity]].records.push(j);
    }
    Ok(out)
}

/// Scores each fold on its own ground truth and the detections on its images.
pub fn evaluate_folds(
    dets: &[DetectionRecord],
    gts: &[GroundTruthRecord],
    k: usize,
    seed: u64,
    threshold: f64,
) -> Result<Vec<EvalReport>> {
    kfold_split(gts, k, seed)?
        .iter()
        .map(|fold| {
            let g: Vec<GroundTruthRecord> = fold.records.iter().map(|&j| gts[j].clone()).collect();
            let images: BTreeSet<&str> = g.iter().map(|r| r.image_id.as_str()).collect();
            let d: Vec<DetectionRecord> = dets
                .iter()
                .filter(|r| images.contains(r.image_id.as_str()))
                .cloned()
                .collect();
            evaluate(&d, &g, threshold)
        })
        .collect()
}
