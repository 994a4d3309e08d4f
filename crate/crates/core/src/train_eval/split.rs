use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Result, TrainError};
use crate::audio_io::EmotionLabel;

/// Disjoint train/test partition of sample indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    /// Ascending.
    pub train_indices: Vec<usize>,
    /// Ascending.
    pub test_indices: Vec<usize>,
    pub ratio_permille: u32,
    pub seed: u64,
    pub stratified: bool,
}

/// `round(ratio · n)`, kept below `n` for ratios under 1 so every group of two
/// or more keeps a test sample.
fn train_count(ratio: f64, n: usize) -> usize {
    let k = ((ratio * n as f64).round() as usize).clamp(1.min(n), n);
    if ratio < 1.0 && n >= 2 {
        k.min(n - 1)
    } else {
        k
    }
}

/// Seeded train/test split.
///
/// When stratified, each class is shuffled on its own and its first
/// `round(ratio · n_c)` members (at most `n_c − 1`) go to training. Otherwise the whole index set is
/// shuffled once. Every present class needs at least two samples, and both
/// sides of the split must end up non-empty.
pub fn split(labels: &[EmotionLabel], ratio: f64, seed: u64, stratified: bool) -> Result<SplitPlan> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(TrainError::Config(format!("split ratio {ratio} outside (0, 1]")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); EmotionLabel::COUNT];
    for (i, l) in labels.iter().enumerate() {
        by_class[l.code()].push(i);
    }
    if let Some((code, members)) = by_class.iter().enumerate().find(|(_, m)| m.len() == 1) {
        return Err(TrainError::InsufficientClassSamples(format!(
            "class {} has {} sample(s)",
            EmotionLabel::ALL[code],
            members.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    let groups: Vec<Vec<usize>> = if stratified {
        by_class
    } else {
        vec![(0..labels.len()).collect()]
    };
    for mut members in groups {
        members.shuffle(&mut rng);
        let k = train_count(ratio, members.len());
        test.extend_from_slice(&members[k..]);
        members.truncate(k);
        train.extend(members);
    }
    if test.is_empty() || train.is_empty() {
        return Err(TrainError::InsufficientClassSamples(format!(
            "ratio {ratio} leaves {} training and {} test samples",
            train.len(),
            test.len()
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train_indices: train,
        test_indices: test,
        ratio_permille: (ratio * 1000.0).round() as u32,
        seed,
        stratified,
    })
}
