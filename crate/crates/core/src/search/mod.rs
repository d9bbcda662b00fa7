//! Sequential search for foreign suppliers: the search condition, the
//! indifference threshold, period-by-period transitions and panel
//! simulation, plus export-scope and threshold heatmaps over `(z, xi)`.

mod gain;
mod heatmap;
mod market;
mod sim;

pub use gain::{expected_gain, search_threshold, should_search, total_profit, ProfitCurve, SearchProblem, Threshold};
pub use heatmap::{scope_heatmap, threshold_heatmap, HeatmapGrid, ScopeCategory, ScopeHeatmap, ThresholdHeatmap};
pub use market::{match_probability, Family, SupplierMarket};
pub use sim::{firm_rng, simulate_firms, simulate_panel, step_period, Panel, PanelRow, SearchEvent, SimConfig};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("supplier efficiency {c} is outside the support [{low}, {high}]")]
    OutsideSupport { c: f64, low: f64, high: f64 },
    #[error("invalid supplier market: {0}")]
    InvalidMarket(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("expected gain decreases in the current efficiency near c = {at}")]
    NonMonotoneGain { at: f64 },
    #[error("heatmap needs exactly one advanced and one emerging export destination: {0}")]
    Destinations(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
