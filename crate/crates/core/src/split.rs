//! Per-cell stratified train / left-out splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{Cell, Dataset, PerCell};

/// Stream offset for per-cell shuffles; other consumers of the same seed use
/// different streams.
const SPLIT_STREAM_BASE: u64 = 0x5711_0000;

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub left_out: Dataset,
    /// Left-out size of each cell.
    pub left_out_counts: PerCell<usize>,
}

/// Number of training samples taken from a cell of size `n`.
///
/// `floor(fraction * n)`, clamped so both sides keep at least one sample
/// when `n >= 2`.
pub fn train_size(n: usize, fraction: f64) -> usize {
    let raw = (fraction * n as f64).floor() as usize;
    if n >= 2 {
        raw.clamp(1, n - 1)
    } else {
        raw.min(n)
    }
}

/// Splits every `(label, group)` cell independently, sending
/// [`train_size`] samples of each cell to the training side.
///
/// Each cell is shuffled by its own ChaCha stream derived from `seed`, so
/// the result is a pure function of `(dataset, fraction, seed)`.
pub fn stratified_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    dataset.require_all_cells()?;

    let mut train = Vec::new();
    let mut left_out = Vec::new();
    let mut left_out_counts = PerCell::<usize>::default();

    for cell in Cell::ALL {
        let mut members: Vec<usize> = dataset
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.cell() == cell)
            .map(|(i, _)| i)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SPLIT_STREAM_BASE + cell.index() as u64);
        members.shuffle(&mut rng);

        let n_train = train_size(members.len(), fraction);
        let (tr, lo) = members.split_at(n_train);
        // keep dataset order inside each side
        let mut tr = tr.to_vec();
        let mut lo = lo.to_vec();
        tr.sort_unstable();
        lo.sort_unstable();
        left_out_counts[cell] = lo.len();
        train.extend(tr.into_iter().map(|i| dataset.samples()[i].clone()));
        left_out.extend(lo.into_iter().map(|i| dataset.samples()[i].clone()));
    }

    Ok(SplitPair {
        train: Dataset::new(train)?,
        left_out: Dataset::new(left_out)?,
        left_out_counts,
    })
}
