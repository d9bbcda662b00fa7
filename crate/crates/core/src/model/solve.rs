use std::collections::BTreeSet;

use super::{Destination, Firm, ModelError, ModelParams, ValidParams};
use crate::Scalar;

/// Optimal choices on one production line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSolution<T> {
    pub quality: T,
    pub quantity: T,
    pub price: T,
    /// Operating profit net of the destination fixed cost.
    pub profit: T,
    pub active: bool,
}

impl<T: Scalar> LineSolution<T> {
    pub fn inactive() -> Self {
        Self {
            quality: T::zero(),
            quantity: T::zero(),
            price: T::zero(),
            profit: T::zero(),
            active: false,
        }
    }
}

/// Interior optimum before the participation decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorSolution<T> {
    pub quality: T,
    pub quantity: T,
    pub price: T,
    /// Revenue minus variable and quality costs; the fixed cost is not deducted.
    pub gross_profit: T,
    pub marginal_cost: T,
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<T, ModelError> {
    if v.is_finite() && v > T::zero() {
        Ok(v)
    } else {
        Err(ModelError::Domain {
            name,
            value: v.to_f64_lossy(),
        })
    }
}

/// Unit cost of a firm with productivity `z` matched to a supplier of efficiency `c`.
pub fn marginal_cost<T: Scalar>(params: &ModelParams<T>, z: T, c: T) -> Result<T, ModelError> {
    let z = positive("z", z)?;
    let c = positive("c", c)?;
    let a = params.alpha;
    let one = T::one();
    let scale = a.powf(a) * (one - a).powf(one - a);
    Ok(params.wage.powf(a) * c.powf(one - a) / (z * scale))
}

fn check_destination<T: Scalar>(params: &ModelParams<T>, dest: &Destination<T>) -> Result<(), ModelError> {
    let one = T::one();
    if !(dest.zeta >= T::zero() && (params.rho - one) * dest.zeta < one) {
        return Err(ModelError::InvalidParameter {
            name: format!("dest.{}.zeta", dest.id),
            value: dest.zeta.to_f64_lossy(),
            constraint: "(rho - 1) * zeta < 1",
        });
    }
    Ok(())
}

/// Solves both first-order conditions of the line problem at supplier efficiency `c`.
///
/// With `x` the quantity and `q` the quality, the conditions
/// `theta * A * x^(theta-1) * q^a = C` and `a * A * x^theta * q^(a-1) = f/xi`
/// (with `theta = (rho-1)/rho`, `a = (rho-1) zeta / rho`, `A = y^(1/rho) P`)
/// give `q = zeta * C * x * xi / f` and a log-linear equation for `x`.
/// When `zeta = 0` quality has no value and sits at the corner `q = 0`.
pub fn interior_solution<T: Scalar>(
    params: &ModelParams<T>,
    dest: &Destination<T>,
    firm: &Firm<T>,
    c: T,
) -> Result<InteriorSolution<T>, ModelError> {
    check_destination(params, dest)?;
    let xi = positive("xi", firm.xi)?;
    let cost = marginal_cost(params, firm.z, c)?;
    let one = T::one();
    let rho = params.rho;
    let theta = (rho - one) / rho;
    let share = (rho - one) * dest.zeta;
    let a = share / rho;
    let k = params.quality_cost / xi;
    let ln_scale = dest.income.ln() / rho + dest.price_index.ln();

    let (ln_x, quality) = if dest.zeta == T::zero() {
        (rho * (ln_scale + theta.ln() - cost.ln()), T::zero())
    } else {
        let e = share - one;
        let ln_x = rho / e * ((one - a) * cost.ln() + a * k.ln() - ln_scale - theta.ln() - a * dest.zeta.ln());
        let x = ln_x.exp();
        (ln_x, dest.zeta * cost * x / k)
    };
    let quantity = ln_x.exp();
    let ln_price = if dest.zeta == T::zero() {
        -ln_x / rho + ln_scale
    } else {
        -ln_x / rho + ln_scale + a * quality.ln()
    };
    let price = ln_price.exp();
    let gross_profit = (price - cost) * quantity - k * quality;
    Ok(InteriorSolution {
        quality,
        quantity,
        price,
        gross_profit,
        marginal_cost: cost,
    })
}

/// Solves line `dest` for `firm` at its current supplier efficiency.
pub fn solve_line<T: Scalar>(
    params: &ValidParams<T>,
    dest: &Destination<T>,
    firm: &Firm<T>,
) -> Result<LineSolution<T>, ModelError> {
    solve_line_at(params, dest, firm, firm.c_current)
}

/// [`solve_line`] with an explicit supplier efficiency.
pub fn solve_line_at<T: Scalar>(
    params: &ValidParams<T>,
    dest: &Destination<T>,
    firm: &Firm<T>,
    c: T,
) -> Result<LineSolution<T>, ModelError> {
    let s = interior_solution(params, dest, firm, c)?;
    let profit = s.gross_profit - dest.fixed_cost;
    if profit >= T::zero() {
        Ok(LineSolution {
            quality: s.quality,
            quantity: s.quantity,
            price: s.price,
            profit,
            active: true,
        })
    } else {
        Ok(LineSolution::inactive())
    }
}

/// Elasticity of line quantity with respect to supplier efficiency,
/// `((rho-1)/((rho-1) zeta - 1) - 1) (1 - alpha)`.
pub fn cost_elasticity<T: Scalar>(params: &ModelParams<T>, dest: &Destination<T>) -> T {
    let one = T::one();
    let rm1 = params.rho - one;
    (rm1 / (rm1 * dest.zeta - one) - one) * (one - params.alpha)
}

/// Elasticity of interior gross profit with respect to supplier efficiency.
///
/// Gross profit equals `C x (1 - (rho-1) zeta) / (rho - 1)`, so it scales as
/// `C^((rho-1)/((rho-1) zeta - 1))` and `C` scales as `c^(1-alpha)`.
pub fn profit_elasticity<T: Scalar>(params: &ModelParams<T>, dest: &Destination<T>) -> T {
    let one = T::one();
    let rm1 = params.rho - one;
    rm1 / (rm1 * dest.zeta - one) * (one - params.alpha)
}

/// Supplier efficiency at which line profit is exactly zero.
///
/// Lines are active for every `c` at or below the cutoff. `None` when the
/// fixed cost is zero (the line is active at every efficiency).
pub fn participation_cutoff<T: Scalar>(
    params: &ValidParams<T>,
    dest: &Destination<T>,
    firm: &Firm<T>,
) -> Result<Option<T>, ModelError> {
    if dest.fixed_cost == T::zero() {
        return Ok(None);
    }
    let reference = interior_solution(params, dest, firm, firm.c_current)?;
    let gamma = profit_elasticity(params, dest);
    let ratio = dest.fixed_cost / reference.gross_profit;
    Ok(Some(firm.c_current * (ratio.ln() / gamma).exp()))
}

/// Ids of the destinations served by `firm` at its current supplier efficiency.
pub fn export_scope<T: Scalar>(params: &ValidParams<T>, firm: &Firm<T>) -> Result<BTreeSet<String>, ModelError> {
    let mut scope = BTreeSet::new();
    for d in &params.destinations {
        if solve_line(params, d, firm)?.active {
            scope.insert(d.id.clone());
        }
    }
    Ok(scope)
}

/// Bit `i` is set when destination `i` (declaration order) is served.
pub fn scope_mask<T: Scalar>(params: &ValidParams<T>, firm: &Firm<T>, c: T) -> Result<u64, ModelError> {
    let mut mask = 0u64;
    for (i, d) in params.destinations.iter().enumerate().take(64) {
        if solve_line_at(params, d, firm, c)?.active {
            mask |= 1 << i;
        }
    }
    Ok(mask)
}
