//! Static line problem: CES demand with endogenous quality, Cobb-Douglas
//! technology with an imported input, and per-destination participation.

mod oracle;
mod params;
mod solve;

pub use oracle::{brute_force_profit_max, brute_force_profit_max_with, OracleSettings};
pub use params::{validate_params, Destination, Firm, IncomeGroup, ModelParams, ValidParams};
pub use solve::{
    cost_elasticity, export_scope, interior_solution, marginal_cost, participation_cutoff, profit_elasticity,
    scope_mask, solve_line, solve_line_at, InteriorSolution, LineSolution,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: requires {constraint}")]
    InvalidParameter {
        name: String,
        value: f64,
        constraint: &'static str,
    },
    #[error("{name} = {value} is outside its domain (must be positive and finite)")]
    Domain { name: &'static str, value: f64 },
    #[error("profit on line {destination} is unbounded above")]
    Unbounded { destination: String },
}
