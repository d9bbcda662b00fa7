use std::collections::BTreeMap;

use rayon::prelude::*;

use super::EconError;
use crate::numeric::CompensatedSum;

/// Dense group ids `0..G` assigned in sorted key order.
pub fn dense_labels<K: Ord + Clone>(keys: &[K]) -> (Vec<u32>, usize) {
    let mut ids: BTreeMap<K, u32> = keys.iter().map(|k| (k.clone(), 0)).collect();
    for (i, v) in ids.values_mut().enumerate() {
        *v = i as u32;
    }
    (keys.iter().map(|k| ids[k]).collect(), ids.len())
}

fn n_groups(labels: &[u32]) -> usize {
    labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
}

/// Rows kept after repeatedly dropping observations alone in some group.
pub fn drop_singletons(fe: &[Vec<u32>]) -> Vec<bool> {
    let n = fe.first().map_or(0, Vec::len);
    let mut keep = vec![true; n];
    loop {
        let mut changed = false;
        for labels in fe {
            let mut counts = vec![0usize; n_groups(labels)];
            for (i, &l) in labels.iter().enumerate() {
                if keep[i] {
                    counts[l as usize] += 1;
                }
            }
            for (i, &l) in labels.iter().enumerate() {
                if keep[i] && counts[l as usize] == 1 {
                    keep[i] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return keep;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demeaned {
    pub columns: Vec<Vec<f64>>,
    /// Largest sweep count over columns.
    pub iterations: usize,
}

/// Subtracts group means of each FE dimension in turn until a full sweep
/// moves no entry by more than `tol`. One dimension needs a single pass.
pub fn demean_hdfe(columns: &[Vec<f64>], fe: &[Vec<u32>], tol: f64, max_iter: usize) -> Result<Demeaned, EconError> {
    if fe.is_empty() {
        return Err(EconError::Spec("demeaning needs at least one fixed-effect dimension".into()));
    }
    let n = fe[0].len();
    if fe.iter().any(|l| l.len() != n) || columns.iter().any(|c| c.len() != n) {
        return Err(EconError::Spec("fixed-effect labels and columns differ in length".into()));
    }
    let counts: Vec<Vec<f64>> = fe
        .iter()
        .map(|labels| {
            let mut c = vec![0.0; n_groups(labels)];
            for &l in labels {
                c[l as usize] += 1.0;
            }
            c
        })
        .collect();

    let out: Vec<Result<(Vec<f64>, usize), EconError>> = columns
        .par_iter()
        .map(|col| {
            let mut x = col.clone();
            for iter in 1..=max_iter.max(1) {
                let mut change: f64 = 0.0;
                for (labels, cnt) in fe.iter().zip(&counts) {
                    let mut sums = vec![CompensatedSum::new(); cnt.len()];
                    for (v, &l) in x.iter().zip(labels) {
                        sums[l as usize].add(*v);
                    }
                    let means: Vec<f64> = sums.iter().zip(cnt).map(|(s, c)| s.value() / c).collect();
                    for (v, &l) in x.iter_mut().zip(labels) {
                        let m = means[l as usize];
                        *v -= m;
                        change = change.max(m.abs());
                    }
                }
                if fe.len() == 1 || change <= tol {
                    return Ok((x, iter));
                }
                if iter == max_iter {
                    return Err(EconError::NoConvergence {
                        iterations: iter,
                        max_change: change,
                    });
                }
            }
            unreachable!("loop returns")
        })
        .collect();
    let mut columns = Vec::with_capacity(out.len());
    let mut iterations = 0;
    for r in out {
        let (c, it) = r?;
        iterations = iterations.max(it);
        columns.push(c);
    }
    Ok(Demeaned { columns, iterations })
}
