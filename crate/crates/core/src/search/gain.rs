use super::{SearchError, SupplierMarket};
use crate::model::{interior_solution, profit_elasticity, solve_line_at, Firm, ValidParams};
use crate::quadrature::GaussLegendre;
use crate::Scalar;

/// Sum over every destination, domestic included, of optimal line profit at
/// supplier efficiency `c`. Inactive lines contribute zero.
pub fn total_profit<T: Scalar>(params: &ValidParams<T>, firm: &Firm<T>, c: T) -> Result<T, SearchError> {
    let mut acc = T::zero();
    for d in &params.destinations {
        acc = acc + solve_line_at(params, d, firm, c)?.profit;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy)]
struct Line<T> {
    gross_ref: T,
    gamma: T,
    fixed_cost: T,
}

/// Total profit of one firm as a function of supplier efficiency.
///
/// Gross line profit is a power of `c`, so the curve is stored as one
/// `(level, exponent, fixed cost)` triple per destination and evaluated
/// without re-solving the line problem.
#[derive(Debug, Clone)]
pub struct ProfitCurve<T> {
    c_ref: T,
    lines: Vec<Line<T>>,
    cutoffs: Vec<T>,
}

impl<T: Scalar> ProfitCurve<T> {
    pub fn new(params: &ValidParams<T>, firm: &Firm<T>) -> Result<Self, SearchError> {
        let c_ref = T::one();
        let mut lines = Vec::with_capacity(params.destinations.len());
        let mut cutoffs = Vec::new();
        for d in &params.destinations {
            let s = interior_solution(params, d, firm, c_ref)?;
            let gamma = profit_elasticity(params, d);
            if d.fixed_cost > T::zero() {
                let cut = c_ref * ((d.fixed_cost / s.gross_profit).ln() / gamma).exp();
                if cut.is_finite() {
                    cutoffs.push(cut);
                }
            }
            lines.push(Line {
                gross_ref: s.gross_profit,
                gamma,
                fixed_cost: d.fixed_cost,
            });
        }
        Ok(Self { c_ref, lines, cutoffs })
    }

    /// Efficiencies at which some line switches between active and inactive.
    pub fn cutoffs(&self) -> &[T] {
        &self.cutoffs
    }

    fn line_profit(&self, line: &Line<T>, log_ratio: T) -> Option<T> {
        let p = line.gross_ref * (line.gamma * log_ratio).exp() - line.fixed_cost;
        (p >= T::zero()).then_some(p)
    }

    pub fn total(&self, c: T) -> T {
        let lr = (c / self.c_ref).ln();
        self.lines
            .iter()
            .filter_map(|l| self.line_profit(l, lr))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Bit `i` set when destination `i` is served at `c`.
    pub fn scope_mask(&self, c: T) -> u64 {
        let lr = (c / self.c_ref).ln();
        let mut mask = 0;
        for (i, l) in self.lines.iter().enumerate().take(64) {
            if self.line_profit(l, lr).is_some() {
                mask |= 1 << i;
            }
        }
        mask
    }
}

/// Efficiency at which a firm is indifferent between searching and not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<T> {
    /// Search is optimal for every current efficiency at or above `c`.
    At { c: T, residual: T },
    /// Not worth searching even when matched with the worst supplier.
    NeverSearches,
}

impl<T: Scalar> Threshold<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Threshold::At { c, .. } => Some(*c),
            Threshold::NeverSearches => None,
        }
    }

    /// Search rule implied by the threshold.
    pub fn searches_at(&self, c: T) -> bool {
        match self {
            Threshold::At { c: t, .. } => c >= *t,
            Threshold::NeverSearches => false,
        }
    }
}

/// Search problem for a parameter set and supplier market, with the
/// quadrature rule set up once.
#[derive(Debug, Clone)]
pub struct SearchProblem<'a, T> {
    pub params: &'a ValidParams<T>,
    pub market: &'a SupplierMarket<T>,
    rule: GaussLegendre<T>,
    scan_points: usize,
}

impl<'a, T: Scalar> SearchProblem<'a, T> {
    pub fn new(params: &'a ValidParams<T>, market: &'a SupplierMarket<T>) -> Self {
        Self::with_nodes(params, market, 64)
    }

    pub fn with_nodes(params: &'a ValidParams<T>, market: &'a SupplierMarket<T>, nodes: usize) -> Self {
        Self {
            params,
            market,
            rule: GaussLegendre::new(nodes.max(1)),
            scan_points: 33,
        }
    }

    /// Number of evenly spaced points used to check that the gain rises in `c`.
    pub fn scan_points(mut self, n: usize) -> Self {
        self.scan_points = n.max(2);
        self
    }

    fn check_support(&self, c: T) -> Result<(), SearchError> {
        if self.market.contains(c) {
            Ok(())
        } else {
            Err(SearchError::OutsideSupport {
                c: c.to_f64_lossy(),
                low: self.market.c_low.to_f64_lossy(),
                high: self.market.c_high.to_f64_lossy(),
            })
        }
    }

    pub fn curve(&self, firm: &Firm<T>) -> Result<ProfitCurve<T>, SearchError> {
        ProfitCurve::new(self.params, firm)
    }

    /// `∫_{c_low}^{c̃} [Π(c) − Π(c̃)] g(c) dc`, integrated panel by panel
    /// between participation cutoffs.
    pub fn gain_on_curve(&self, curve: &ProfitCurve<T>, c_tilde: T) -> T {
        let m = self.market;
        if c_tilde <= m.c_low {
            return T::zero();
        }
        let base = curve.total(c_tilde);
        let density = m.density_fn();
        self.rule
            .integrate_panels(m.c_low, c_tilde, curve.cutoffs(), |c| (curve.total(c) - base) * density(c))
    }

    pub fn expected_gain(&self, firm: &Firm<T>, c_tilde: T) -> Result<T, SearchError> {
        self.check_support(c_tilde)?;
        Ok(self.gain_on_curve(&self.curve(firm)?, c_tilde))
    }

    /// Left side minus right side of the search condition:
    /// `gain / (1 - beta) - F`.
    pub fn residual_on_curve(&self, curve: &ProfitCurve<T>, c_tilde: T) -> T {
        self.gain_on_curve(curve, c_tilde) / (T::one() - self.params.discount) - self.market.search_cost
    }

    pub fn indifference_residual(&self, firm: &Firm<T>, c_tilde: T) -> Result<T, SearchError> {
        self.check_support(c_tilde)?;
        Ok(self.residual_on_curve(&self.curve(firm)?, c_tilde))
    }

    pub fn should_search(&self, firm: &Firm<T>, c_tilde: T) -> Result<bool, SearchError> {
        Ok(self.indifference_residual(firm, c_tilde)? >= T::zero())
    }

    pub fn search_threshold(&self, firm: &Firm<T>) -> Result<Threshold<T>, SearchError> {
        let curve = self.curve(firm)?;
        self.threshold_on_curve(&curve)
    }

    /// Bisection on the indifference condition after a scan confirming that
    /// the gain does not fall as `c̃` rises.
    pub fn threshold_on_curve(&self, curve: &ProfitCurve<T>) -> Result<Threshold<T>, SearchError> {
        let (lo0, hi0) = (self.market.c_low, self.market.c_high);
        let n = self.scan_points;
        let step = (hi0 - lo0) / T::lit((n - 1) as f64);
        let gains: Vec<T> = (0..n)
            .map(|i| {
                let c = if i + 1 == n { hi0 } else { lo0 + step * T::lit(i as f64) };
                self.gain_on_curve(curve, c)
            })
            .collect();
        let scale = gains.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        let slack = scale * T::lit(1e-9) + T::min_positive_value();
        for (i, w) in gains.windows(2).enumerate() {
            if w[1] < w[0] - slack {
                let at = lo0 + step * T::lit((i + 1) as f64);
                return Err(SearchError::NonMonotoneGain { at: at.to_f64_lossy() });
            }
        }

        let h = |c: T| self.residual_on_curve(curve, c);
        let h_hi = h(hi0);
        if h_hi < T::zero() {
            return Ok(Threshold::NeverSearches);
        }
        let h_lo = h(lo0);
        if h_lo >= T::zero() {
            return Ok(Threshold::At { c: lo0, residual: h_lo });
        }
        let (mut lo, mut hi, mut h_at_hi) = (lo0, hi0, h_hi);
        let two = T::lit(2.0);
        for _ in 0..200 {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            let hm = h(mid);
            if hm >= T::zero() {
                hi = mid;
                h_at_hi = hm;
            } else {
                lo = mid;
            }
        }
        Ok(Threshold::At { c: hi, residual: h_at_hi })
    }
}

pub fn expected_gain<T: Scalar>(
    params: &ValidParams<T>,
    market: &SupplierMarket<T>,
    firm: &Firm<T>,
    c_tilde: T,
) -> Result<T, SearchError> {
    SearchProblem::new(params, market).expected_gain(firm, c_tilde)
}

pub fn should_search<T: Scalar>(
    params: &ValidParams<T>,
    market: &SupplierMarket<T>,
    firm: &Firm<T>,
    c_tilde: T,
) -> Result<bool, SearchError> {
    SearchProblem::new(params, market).should_search(firm, c_tilde)
}

pub fn search_threshold<T: Scalar>(
    params: &ValidParams<T>,
    market: &SupplierMarket<T>,
    firm: &Firm<T>,
) -> Result<Threshold<T>, SearchError> {
    SearchProblem::new(params, market).search_threshold(firm)
}
