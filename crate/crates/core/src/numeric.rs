//! Small numeric helpers shared by the data pipeline.

use std::iter::Sum;

use num_traits::Float;

/// Neumaier compensated accumulator.
///
/// Aggregations in the shock builder and the regression engine go through this
/// so that results do not depend on how rows were grouped or ordered.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T = f64> {
    sum: T,
    comp: T,
}

impl<T: Float> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Float> Extend<T> for CompensatedSum<T> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl<T: Float> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}

impl<T: Float> Sum<T> for CompensatedSum<T> {
    fn sum<I: Iterator<Item = T>>(iter: I) -> Self {
        iter.collect()
    }
}

/// Compensated sum of an iterator.
pub fn csum<T: Float, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// Quantile by linear interpolation between order statistics (Hyndman-Fan type 7).
///
/// `sorted` must be ascending and non-empty; `q` is clamped to `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let q = q.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    csum(xs.iter().copied()) / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two points.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = csum(xs.iter().map(|x| (x - m) * (x - m)));
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Pearson correlation; NaN when either side has zero variance.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let sxy = csum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = csum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let syy = csum(ys.iter().map(|y| (y - my) * (y - my)));
    sxy / (sxx * syy).sqrt()
}

/// Stable 64-bit FNV-1a hash, used to derive per-entity RNG streams from labels.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
