//! Heterogeneous-firm quality choice with search frictions in the market for
//! foreign suppliers, plus the empirical toolkit that goes with it: a seeded
//! customs-data generator, shift-share import cost shocks, a fixed-effects
//! panel regression engine with two-way clustered errors, and supplier-name
//! cleaning.
//!
//! The model and search code is generic over [`Scalar`] (`f32` / `f64`);
//! the aliases at the crate root fix it to `f64`.

pub mod config;
pub mod corpus;
pub mod datagen;
pub mod econo;
pub mod model;
pub mod namematch;
pub mod numeric;
pub mod quadrature;
mod scalar;
pub mod search;
pub mod shocks;

pub use scalar::Scalar;

pub type ModelParams = model::ModelParams<f64>;
pub type Destination = model::Destination<f64>;
pub type Firm = model::Firm<f64>;
pub type ValidParams = model::ValidParams<f64>;
pub type LineSolution = model::LineSolution<f64>;
pub type GaussLegendre = quadrature::GaussLegendre<f64>;
pub type SupplierMarket = search::SupplierMarket<f64>;
pub type SimConfig = search::SimConfig<f64>;
pub type Panel = search::Panel<f64>;
