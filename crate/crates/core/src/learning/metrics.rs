//! Evaluation metrics: F1 from a confusion matrix, Spearman rank
//! correlation, RMSE.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square count matrix indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Confusion(pub Vec<Vec<u64>>);

impl Confusion {
    pub fn new(n_classes: usize) -> Self {
        Confusion(vec![vec![0; n_classes]; n_classes])
    }

    pub fn from_pairs(n_classes: usize, truth: &[usize], pred: &[usize]) -> Self {
        let mut c = Confusion::new(n_classes);
        for (&t, &p) in truth.iter().zip(pred) {
            c.0[t][p] += 1;
        }
        c
    }

    pub fn n_classes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.0[class].iter().sum()
    }

    pub fn add(&mut self, other: &Confusion) {
        for (row, orow) in self.0.iter_mut().zip(&other.0) {
            for (a, b) in row.iter_mut().zip(orow) {
                *a += b;
            }
        }
    }
}

/// Per-class F1 (harmonic mean of precision and recall, 0 when either is
/// undefined).
pub fn classwise_f1(c: &Confusion) -> Vec<f64> {
    let n = c.n_classes();
    (0..n)
        .map(|k| {
            let tp = c.0[k][k] as f64;
            let actual = c.support(k) as f64;
            let predicted: f64 = (0..n).map(|t| c.0[t][k] as f64).sum();
            if tp == 0.0 {
                0.0
            } else {
                2.0 * tp / (actual + predicted)
            }
        })
        .collect()
}

/// Support-weighted mean of the per-class F1 scores.
pub fn weighted_f1(c: &Confusion) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::validation("confusion matrix is empty"));
    }
    let f1 = classwise_f1(c);
    Ok((0..c.n_classes()).map(|k| f1[k] * c.support(k) as f64).sum::<f64>() / total as f64)
}

/// 1-based ranks with ties replaced by their average rank.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of the mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::validation(format!(
            "spearman needs two equal-length series of at least 2 values, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&midranks(x), &midranks(y)).ok_or_else(|| Error::Undefined("rank correlation of a constant series".into()))
}

pub fn rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::validation(format!(
            "rmse needs two equal-length non-empty series, got {} and {}",
            pred.len(),
            target.len()
        )));
    }
    let s: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((s / pred.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f1_hand_example() {
        // A = 0, C = 1; true [A,A,C,C,C], pred [A,C,C,C,C]
        let c = Confusion::from_pairs(2, &[0, 0, 1, 1, 1], &[0, 1, 1, 1, 1]);
        assert_eq!(c.0, vec![vec![1, 1], vec![0, 3]]);
        let f = classwise_f1(&c);
        assert!((f[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((f[1] - 6.0 / 7.0).abs() < 1e-15);
        assert!((weighted_f1(&c).unwrap() - 82.0 / 105.0).abs() < 1e-15);
    }

    #[test]
    fn f1_edge_cases() {
        let perfect = Confusion::from_pairs(2, &[0, 1, 1], &[0, 1, 1]);
        assert_eq!(classwise_f1(&perfect), vec![1.0, 1.0]);
        let always_c = Confusion::from_pairs(2, &[0, 0, 1, 1], &[1, 1, 1, 1]);
        assert_eq!(classwise_f1(&always_c)[0], 0.0);
        assert!(weighted_f1(&Confusion::new(2)).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap() + 0.5).abs() < 1e-15);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::Undefined(_))));
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 2.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn spearman_ignores_monotone_transforms(v in proptest::collection::vec((-100i32..100, -100i32..100), 3..30)) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            if let Ok(r) = spearman(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|a| (a / 50.0).exp() * 3.0 + 1.0).collect();
                let r2 = spearman(&tx, &y).unwrap();
                prop_assert!((r - r2).abs() < 1e-12);
            }
        }

        #[test]
        fn rmse_translation_invariant(v in proptest::collection::vec((-100i32..100, -100i32..100), 1..30), c in -1000i32..1000) {
            let p: Vec<f64> = v.iter().map(|a| a.0 as f64).collect();
            let t: Vec<f64> = v.iter().map(|a| a.1 as f64).collect();
            let ps: Vec<f64> = p.iter().map(|a| a + c as f64).collect();
            let ts: Vec<f64> = t.iter().map(|a| a + c as f64).collect();
            prop_assert!((rmse(&p, &t).unwrap() - rmse(&ps, &ts).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn weighted_f1_within_unit(t in proptest::collection::vec((0usize..2, 0usize..2), 1..40)) {
            let truth: Vec<usize> = t.iter().map(|p| p.0).collect();
            let pred: Vec<usize> = t.iter().map(|p| p.1).collect();
            let f = weighted_f1(&Confusion::from_pairs(2, &truth, &pred)).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
