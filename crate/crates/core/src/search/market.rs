use rand::Rng;
use statrs::function::erf::{erf, erf_inv};

use super::SearchError;
use crate::Scalar;

/// Distribution family of supplier efficiencies on `[c_low, c_high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    Uniform,
    /// Log-normal with log-mean `mu` and log-s.d. `sigma`, truncated to the support.
    TruncatedLogNormal { mu: T, sigma: T },
}

/// Pool of potential foreign suppliers and the fixed cost of a search.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplierMarket<T> {
    pub family: Family<T>,
    pub c_low: T,
    pub c_high: T,
    pub search_cost: T,
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

impl<T: Scalar> SupplierMarket<T> {
    pub fn new(family: Family<T>, c_low: T, c_high: T, search_cost: T) -> Result<Self, SearchError> {
        let m = Self {
            family,
            c_low,
            c_high,
            search_cost,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(c_low: T, c_high: T, search_cost: T) -> Result<Self, SearchError> {
        Self::new(Family::Uniform, c_low, c_high, search_cost)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let zero = T::zero();
        if !(self.c_low.is_finite() && self.c_low > zero) {
            return Err(SearchError::InvalidMarket(format!("c_low = {} must be positive", self.c_low)));
        }
        if !(self.c_high.is_finite() && self.c_high > self.c_low) {
            return Err(SearchError::InvalidMarket(format!(
                "c_high = {} must exceed c_low = {}",
                self.c_high, self.c_low
            )));
        }
        if !(self.search_cost.is_finite() && self.search_cost >= zero) {
            return Err(SearchError::InvalidMarket(format!(
                "search cost {} must be non-negative",
                self.search_cost
            )));
        }
        if let Family::TruncatedLogNormal { mu, sigma } = self.family {
            if !(mu.is_finite() && sigma.is_finite() && sigma > zero) {
                return Err(SearchError::InvalidMarket(format!("log-normal needs sigma > 0, got {sigma}")));
            }
            let (a, b) = self.lognormal_mass(mu, sigma);
            if !(b - a > 0.0) {
                return Err(SearchError::InvalidMarket("support carries no log-normal mass".into()));
            }
        }
        Ok(())
    }

    fn lognormal_mass(&self, mu: T, sigma: T) -> (f64, f64) {
        let (mu, sigma) = (mu.to_f64_lossy(), sigma.to_f64_lossy());
        let a = std_normal_cdf((self.c_low.to_f64_lossy().ln() - mu) / sigma);
        let b = std_normal_cdf((self.c_high.to_f64_lossy().ln() - mu) / sigma);
        (a, b)
    }

    pub fn contains(&self, c: T) -> bool {
        c >= self.c_low && c <= self.c_high
    }

    /// Density `g(c)`; zero outside the support.
    pub fn density(&self, c: T) -> T {
        self.density_fn()(c)
    }

    /// Density with the truncation constant computed once, for repeated
    /// evaluation inside quadrature loops.
    pub fn density_fn(&self) -> impl Fn(T) -> T + '_ {
        let norm = match self.family {
            Family::Uniform => (0.0, 1.0),
            Family::TruncatedLogNormal { mu, sigma } => self.lognormal_mass(mu, sigma),
        };
        move |c: T| {
            if !self.contains(c) {
                return T::zero();
            }
            match self.family {
                Family::Uniform => T::one() / (self.c_high - self.c_low),
                Family::TruncatedLogNormal { mu, sigma } => {
                    let (mu, sigma, x) = (mu.to_f64_lossy(), sigma.to_f64_lossy(), c.to_f64_lossy());
                    let z = (x.ln() - mu) / sigma;
                    let pdf = (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt());
                    T::lit(pdf / (norm.1 - norm.0))
                }
            }
        }
    }

    /// `G(c)`, clamped to `[0, 1]` outside the support.
    pub fn cdf(&self, c: T) -> T {
        if c <= self.c_low {
            return T::zero();
        }
        if c >= self.c_high {
            return T::one();
        }
        match self.family {
            Family::Uniform => (c - self.c_low) / (self.c_high - self.c_low),
            Family::TruncatedLogNormal { mu, sigma } => {
                let (a, b) = self.lognormal_mass(mu, sigma);
                let z = (c.to_f64_lossy().ln() - mu.to_f64_lossy()) / sigma.to_f64_lossy();
                T::lit(((std_normal_cdf(z) - a) / (b - a)).clamp(0.0, 1.0))
            }
        }
    }

    /// Inverse-CDF draw of a supplier efficiency.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.random();
        let c = match self.family {
            Family::Uniform => self.c_low + (self.c_high - self.c_low) * T::lit(u),
            Family::TruncatedLogNormal { mu, sigma } => {
                let (a, b) = self.lognormal_mass(mu, sigma);
                let p = a + u * (b - a);
                let z = std::f64::consts::SQRT_2 * erf_inv((2.0 * p - 1.0).clamp(-1.0, 1.0));
                T::lit((mu.to_f64_lossy() + sigma.to_f64_lossy() * z).exp())
            }
        };
        c.max(self.c_low).min(self.c_high)
    }
}

/// Probability that a fresh draw beats `c_tilde`.
pub fn match_probability<T: Scalar>(market: &SupplierMarket<T>, c_tilde: T) -> Result<T, SearchError> {
    if !market.contains(c_tilde) {
        return Err(SearchError::OutsideSupport {
            c: c_tilde.to_f64_lossy(),
            low: market.c_low.to_f64_lossy(),
            high: market.c_high.to_f64_lossy(),
        });
    }
    Ok(market.cdf(c_tilde))
}
