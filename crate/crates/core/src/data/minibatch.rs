use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Dataset;

/// Shuffles `0..n` with `epoch_seed` and cuts it into consecutive batches of
/// `batch_size`; the last batch may be short. `batch_size` of 0 is treated
/// as 1.
pub fn epoch_batches(n: usize, batch_size: usize, epoch_seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed));
    order
        .chunks(batch_size.max(1))
        .map(<[usize]>::to_vec)
        .collect()
}

/// Example-index batches covering `dataset` once.
pub fn minibatch_iter(
    dataset: &Dataset,
    batch_size: usize,
    epoch_seed: u64,
) -> impl Iterator<Item = Vec<usize>> {
    epoch_batches(dataset.len(), batch_size, epoch_seed).into_iter()
}
