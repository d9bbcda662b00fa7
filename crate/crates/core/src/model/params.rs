use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncomeGroup {
    Advanced,
    Emerging,
    Domestic,
}

impl IncomeGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            IncomeGroup::Advanced => "advanced",
            IncomeGroup::Emerging => "emerging",
            IncomeGroup::Domestic => "domestic",
        }
    }
}

impl fmt::Display for IncomeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IncomeGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "advanced" => Ok(IncomeGroup::Advanced),
            "emerging" => Ok(IncomeGroup::Emerging),
            "domestic" => Ok(IncomeGroup::Domestic),
            other => Err(format!("unknown income group `{other}`")),
        }
    }
}

/// A market served by its own production line.
#[derive(Debug, Clone, PartialEq)]
pub struct Destination<T> {
    pub id: String,
    /// Love for quality.
    pub zeta: T,
    pub income: T,
    /// Exogenous quality-adjusted price index.
    pub price_index: T,
    /// Per-period fixed cost of serving the market.
    pub fixed_cost: T,
    pub income_group: IncomeGroup,
}

impl<T: Scalar> Destination<T> {
    pub fn new(id: impl Into<String>, zeta: T, income: T, price_index: T, fixed_cost: T, income_group: IncomeGroup) -> Self {
        Self {
            id: id.into(),
            zeta,
            income,
            price_index,
            fixed_cost,
            income_group,
        }
    }

    pub fn domestic(id: impl Into<String>, zeta: T, income: T, price_index: T) -> Self {
        Self::new(id, zeta, income, price_index, T::zero(), IncomeGroup::Domestic)
    }
}

/// Structural parameters shared by every firm and line.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// Elasticity of substitution, > 1.
    pub rho: T,
    /// Labor share in the Cobb-Douglas technology.
    pub alpha: T,
    pub wage: T,
    /// Quality cost scale `f`; a firm pays `f / xi` per unit of quality.
    pub quality_cost: T,
    /// Per-period discount factor.
    pub discount: T,
    pub destinations: Vec<Destination<T>>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn destination(&self, id: &str) -> Option<&Destination<T>> {
        self.destinations.iter().find(|d| d.id == id)
    }

    /// Every violated constraint, in declaration order.
    pub fn violations(&self) -> Vec<ModelError> {
        let mut out = Vec::new();
        let mut check = |ok: bool, name: String, value: T, constraint: &'static str| {
            if !ok {
                out.push(ModelError::InvalidParameter {
                    name,
                    value: value.to_f64_lossy(),
                    constraint,
                });
            }
        };
        let one = T::one();
        let zero = T::zero();
        check(self.rho.is_finite() && self.rho > one, "rho".into(), self.rho, "rho > 1");
        check(self.alpha > zero && self.alpha < one, "alpha".into(), self.alpha, "0 < alpha < 1");
        check(self.wage.is_finite() && self.wage > zero, "wage".into(), self.wage, "wage > 0");
        check(
            self.quality_cost.is_finite() && self.quality_cost > zero,
            "quality_cost".into(),
            self.quality_cost,
            "f > 0",
        );
        check(self.discount > zero && self.discount < one, "discount".into(), self.discount, "0 < discount < 1");

        let mut seen = BTreeSet::new();
        for d in &self.destinations {
            if !seen.insert(d.id.as_str()) {
                check(false, format!("dest.{}.id", d.id), T::nan(), "destination ids are unique");
            }
            let name = |field: &str| format!("dest.{}.{field}", d.id);
            check(d.zeta.is_finite() && d.zeta >= zero, name("zeta"), d.zeta, "zeta >= 0");
            if self.rho > one {
                check(
                    (self.rho - one) * d.zeta < one,
                    name("zeta"),
                    d.zeta,
                    "(rho - 1) * zeta < 1",
                );
            }
            check(d.income.is_finite() && d.income > zero, name("income"), d.income, "income > 0");
            check(
                d.price_index.is_finite() && d.price_index > zero,
                name("price_index"),
                d.price_index,
                "price_index > 0",
            );
            check(
                d.fixed_cost.is_finite() && d.fixed_cost >= zero,
                name("fixed_cost"),
                d.fixed_cost,
                "fixed_cost >= 0",
            );
            if d.income_group == IncomeGroup::Domestic {
                check(
                    d.fixed_cost == zero,
                    name("fixed_cost"),
                    d.fixed_cost,
                    "domestic market has no fixed cost",
                );
            }
        }
        out
    }

    /// Largest admissible love for quality, `1 / (rho - 1)` (exclusive).
    pub fn zeta_bound(&self) -> T {
        T::one() / (self.rho - T::one())
    }

    /// Three-market calibration used by the scope and search exercises: a
    /// domestic market `D` with no fixed cost, a rich destination `R` with
    /// strong quality demand and a high entry cost, and a poor destination
    /// `P` with weak quality demand and a low entry cost.
    pub fn two_destination_example() -> Self {
        let l = T::lit;
        Self {
            rho: l(3.0),
            alpha: l(0.5),
            wage: l(1.0),
            quality_cost: l(1.0),
            discount: l(0.9),
            destinations: vec![
                Destination::domestic("D", l(0.1), l(20.0), l(1.0)),
                Destination::new("R", l(0.4), l(20.0), l(1.0), l(5.0), IncomeGroup::Advanced),
                Destination::new("P", l(0.05), l(20.0), l(1.0), l(2.0), IncomeGroup::Emerging),
            ],
        }
    }
}

/// Parameters that passed [`validate_params`]. Derefs to the inner value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidParams<T>(ModelParams<T>);

impl<T> ValidParams<T> {
    pub fn into_inner(self) -> ModelParams<T> {
        self.0
    }
}

impl<T> Deref for ValidParams<T> {
    type Target = ModelParams<T>;

    fn deref(&self) -> &ModelParams<T> {
        &self.0
    }
}

impl<T: Scalar> TryFrom<ModelParams<T>> for ValidParams<T> {
    type Error = ModelError;

    fn try_from(p: ModelParams<T>) -> Result<Self, ModelError> {
        validate_params(p)
    }
}

/// Checks every parameter constraint, including the strict second-order
/// condition `(rho - 1) * zeta < 1` for each destination.
///
/// Returns the first violation; [`ModelParams::violations`] lists them all.
pub fn validate_params<T: Scalar>(params: ModelParams<T>) -> Result<ValidParams<T>, ModelError> {
    match params.violations().into_iter().next() {
        Some(err) => Err(err),
        None => Ok(ValidParams(params)),
    }
}

/// A domestic producer with process productivity `z`, product productivity
/// `xi`, and the efficiency of its current foreign supplier.
#[derive(Debug, Clone, PartialEq)]
pub struct Firm<T> {
    pub id: String,
    pub z: T,
    pub xi: T,
    pub c_current: T,
}

impl<T: Scalar> Firm<T> {
    pub fn new(id: impl Into<String>, z: T, xi: T, c_current: T) -> Self {
        Self {
            id: id.into(),
            z,
            xi,
            c_current,
        }
    }

    pub fn with_supplier(&self, c: T) -> Self {
        Self {
            c_current: c,
            ..self.clone()
        }
    }
}
