//! Stratified k-fold assignment for binary labels.

use crate::error::{Error, Result};
use crate::rng::{mix_seed, RngStream};

/// A deterministic stratified fold assignment.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    /// Fold index per unit, in `0..k`.
    pub assignment: Vec<usize>,
    /// Number of folds actually used.
    pub k: usize,
    /// True when `k` had to be reduced to the minority-class count.
    pub reduced: bool,
}

impl FoldPlan {
    /// Stratify `labels` into at most `k` folds, shuffling within each class
    /// with a stream derived from `seed`. If a class has fewer than `k`
    /// members, `k` is reduced to that count; a singleton class is an error.
    pub fn stratified(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
        if k < 2 {
            return Err(Error::InvalidInput(format!("need k >= 2 folds, got {k}")));
        }
        let mut class_rows: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &y) in labels.iter().enumerate() {
            if y > 1 {
                return Err(Error::InvalidInput(format!("label {y} not in {{0, 1}}")));
            }
            class_rows[y as usize].push(i);
        }
        let minority = class_rows.iter().map(Vec::len).min().unwrap_or(0);
        if minority < 2 {
            return Err(Error::DegenerateLabels(format!(
                "minority class has {minority} member(s); cannot stratify"
            )));
        }
        let k_eff = k.min(minority);
        let mut assignment = vec![0usize; labels.len()];
        for (class, rows) in class_rows.iter_mut().enumerate() {
            let mut rng = RngStream::new(mix_seed(seed, class as u64));
            rng.shuffle(rows);
            for (pos, &row) in rows.iter().enumerate() {
                assignment[row] = pos % k_eff;
            }
        }
        Ok(FoldPlan {
            assignment,
            k: k_eff,
            reduced: k_eff < k,
        })
    }

    /// Row indices inside / outside fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let mut held = Vec::new();
        let mut train = Vec::new();
        for (i, &fold) in self.assignment.iter().enumerate() {
            if fold == f {
                held.push(i);
            } else {
                train.push(i);
            }
        }
        (held, train)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_folds_cover_and_balance() {
        let labels: Vec<u8> = (0..40).map(|i| (i % 4 == 0) as u8).collect(); // 10 ones
        let plan = FoldPlan::stratified(&labels, 5, 7).unwrap();
        assert_eq!(plan.k, 5);
        assert!(!plan.reduced);
        for f in 0..5 {
            let (held, train) = plan.split(f);
            assert_eq!(held.len() + train.len(), 40);
            // every fold holds both classes
            assert!(held.iter().any(|&i| labels[i] == 1));
            assert!(held.iter().any(|&i| labels[i] == 0));
        }
    }

    #[test]
    fn reduces_k_for_small_minority() {
        let labels = vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let plan = FoldPlan::stratified(&labels, 5, 0).unwrap();
        assert_eq!(plan.k, 3);
        assert!(plan.reduced);
    }

    #[test]
    fn singleton_minority_is_degenerate() {
        let labels = vec![1, 0, 0, 0, 0];
        assert!(matches!(
            FoldPlan::stratified(&labels, 5, 0),
            Err(Error::DegenerateLabels(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let labels: Vec<u8> = (0..30).map(|i| (i % 3 == 0) as u8).collect();
        let a = FoldPlan::stratified(&labels, 5, 42).unwrap();
        let b = FoldPlan::stratified(&labels, 5, 42).unwrap();
        assert_eq!(a.assignment, b.assignment);
        let c = FoldPlan::stratified(&labels, 5, 43).unwrap();
        assert_ne!(a.assignment, c.assignment);
    }
}
