use std::collections::BTreeMap;

use rand::seq::index::sample;

use super::{DatasetError, ExperimentRecord, Result};
use crate::rng::substream;

/// Record counts of one path-length bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinSummary {
    pub length: usize,
    pub total: usize,
    pub train: usize,
    pub validation: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<ExperimentRecord>,
    pub validation: Vec<ExperimentRecord>,
    pub bins: Vec<BinSummary>,
    /// Records drawn from every bin into the training set.
    pub per_bin: usize,
}

/// Length-balanced train/validation split.
///
/// Records are binned by path length; `m = floor(2/3 * smallest bin)` records
/// are drawn without replacement from every bin for training, and everything
/// else is validation. Both sets keep the input order.
pub fn bin_and_sample(records: &[ExperimentRecord], seed: u64) -> Result<DatasetSplit> {
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut bins: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        bins.entry(r.path_length()).or_default().push(i);
    }
    let (&smallest_len, smallest) = bins
        .iter()
        .min_by_key(|(_, members)| members.len())
        .expect("non-empty");
    let per_bin = 2 * smallest.len() / 3;
    if per_bin == 0 {
        return Err(DatasetError::TooSmall {
            length: smallest_len,
            size: smallest.len(),
        });
    }

    let mut in_train = vec![false; records.len()];
    let mut summaries = Vec::with_capacity(bins.len());
    for (&length, members) in &bins {
        let mut rng = substream(seed, "bin", length as u64);
        for k in sample(&mut rng, members.len(), per_bin) {
            in_train[members[k]] = true;
        }
        summaries.push(BinSummary {
            length,
            total: members.len(),
            train: per_bin,
            validation: members.len() - per_bin,
        });
    }
    let (train, validation): (Vec<_>, Vec<_>) =
        records.iter().zip(&in_train).partition(|(_, &t)| t);
    Ok(DatasetSplit {
        train: train.into_iter().map(|(r, _)| r.clone()).collect(),
        validation: validation.into_iter().map(|(r, _)| r.clone()).collect(),
        bins: summaries,
        per_bin,
    })
}
