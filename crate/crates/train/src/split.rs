use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::TrainError;

/// Fractions of the train and validation partitions; test takes the rest.
pub const TRAIN_FRACTION: f64 = 0.70;
pub const VAL_FRACTION: f64 = 0.15;

/// Disjoint index lists, each ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.train, &self.val, &self.test]
    }

    /// Train and validation together, ascending.
    pub fn train_val(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.train.iter().chain(&self.val).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Stratified 70/15/15 split. Every class contributes the floor of its share
/// to each partition; its leftover instances go to distinct partitions,
/// preferring those furthest below their overall target.
pub fn split_dataset(labels: &[usize], seed: u64) -> Result<Split, TrainError> {
    let n = labels.len();
    if n < 3 {
        return Err(TrainError::Split(format!("{n} instances, need at least 3")));
    }
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    if by_class.iter().filter(|c| !c.is_empty()).count() < 2 {
        return Err(TrainError::Split("only one class present".into()));
    }
    let fractions = [TRAIN_FRACTION, VAL_FRACTION, 1.0 - TRAIN_FRACTION - VAL_FRACTION];
    let t_train = (TRAIN_FRACTION * n as f64).round() as usize;
    let t_val = (VAL_FRACTION * n as f64).round() as usize;
    let targets = [t_train, t_val, n - t_train - t_val];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: Vec<[usize; 3]> = Vec::with_capacity(classes);
    let mut totals = [0usize; 3];
    for members in &by_class {
        let share: Vec<f64> = fractions.iter().map(|f| f * members.len() as f64).collect();
        let mut c = [0usize; 3];
        for p in 0..3 {
            c[p] = (share[p] + 1e-9).floor() as usize;
            totals[p] += c[p];
        }
        counts.push(c);
    }
    for (k, members) in by_class.iter().enumerate() {
        let share: Vec<f64> = fractions.iter().map(|f| f * members.len() as f64).collect();
        let leftover = members.len() - counts[k].iter().sum::<usize>();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let deficit = |p: usize| targets[p] as i64 - totals[p] as i64;
            let frac = |p: usize| share[p] - counts[k][p] as f64;
            deficit(b).cmp(&deficit(a)).then(frac(b).total_cmp(&frac(a))).then(a.cmp(&b))
        });
        for &p in &order[..leftover] {
            counts[k][p] += 1;
            totals[p] += 1;
        }
    }

    let mut parts: [Vec<usize>; 3] = Default::default();
    for (k, members) in by_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let mut it = shuffled.into_iter();
        for (p, part) in parts.iter_mut().enumerate() {
            part.extend(it.by_ref().take(counts[k][p]));
        }
    }
    for (part, name) in parts.iter_mut().zip(["train", "validation", "test"]) {
        if part.is_empty() {
            return Err(TrainError::EmptyPartition(name));
        }
        part.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(Split { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_balanced() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let s = split_dataset(&labels, 3).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (70, 15, 15));
        assert_eq!(s, split_dataset(&labels, 3).unwrap());
        assert_ne!(s, split_dataset(&labels, 4).unwrap());
    }

    #[test]
    fn errors() {
        assert!(split_dataset(&[0, 1], 0).is_err());
        assert!(split_dataset(&[1, 1, 1, 1], 0).is_err());
        // Three instances of two classes cannot fill every partition.
        assert!(matches!(split_dataset(&[0, 1, 1], 0), Err(TrainError::EmptyPartition(_))));
    }
}
