//! Gauss–Legendre quadrature.

use crate::Scalar;

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`.
///
/// Nodes are found by Newton iteration on the Legendre recurrence, seeded with
/// the Tricomi approximation, and computed in `f64` regardless of `T`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let two = T::lit(2.0);
        let half_len = (b - a) / two;
        let mid = (a + b) / two;
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(mid + half_len * *x);
        }
        acc * half_len
    }

    /// Integrates over `[a, b]` applying the rule separately on each panel
    /// delimited by `breaks`. Breakpoints outside `(a, b)` are ignored.
    pub fn integrate_panels<F: FnMut(T) -> T>(&self, a: T, b: T, breaks: &[T], mut f: F) -> T {
        let mut cuts: Vec<T> = breaks.iter().copied().filter(|c| *c > a && *c < b).collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
        let mut lo = a;
        let mut acc = T::zero();
        for c in cuts.into_iter().chain(std::iter::once(b)) {
            if c > lo {
                acc = acc + self.integrate(lo, c, &mut f);
                lo = c;
            }
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite trapezoid rule with `n` intervals.
pub fn trapezoid<T: Scalar, F: FnMut(T) -> T>(a: T, b: T, n: usize, mut f: F) -> T {
    let h = (b - a) / T::lit(n as f64);
    let mut acc = (f(a) + f(b)) / T::lit(2.0);
    for i in 1..n {
        acc = acc + f(a + h * T::lit(i as f64));
    }
    acc * h
}
