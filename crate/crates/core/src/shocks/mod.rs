//! Firm-year shift-share import cost shocks: lagged import shares times
//! price growth, in four price definitions.

mod build;
mod stats;

pub use build::{
    build_shocks, firm_shock, lagged_shares, share_table, FirmShares, price_shifts, read_shocks, read_world_prices, shift_share, unit_values,
    write_shocks, PriceRow, ShareBase, ShiftRow, ShockConfig, ShockKey, ShiftShare,
};
pub use stats::{shock_stats, ShockStats, VariantSummary};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShockVariant {
    /// Price of the firm's own link (firm, supplier, product, source).
    SupplierFirm,
    /// Average price the supplier charges all buyers of a product.
    SupplierAverage,
    /// As `SupplierAverage` but excluding the focal firm's purchases.
    SupplierLeaveOneOut,
    /// Average price of a product from a source country.
    CountryProduct,
}

impl ShockVariant {
    pub const ALL: [ShockVariant; 4] = [
        ShockVariant::SupplierFirm,
        ShockVariant::SupplierAverage,
        ShockVariant::SupplierLeaveOneOut,
        ShockVariant::CountryProduct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ShockVariant::SupplierFirm => "supplier_firm",
            ShockVariant::SupplierAverage => "supplier_average",
            ShockVariant::SupplierLeaveOneOut => "supplier_loo",
            ShockVariant::CountryProduct => "country_product",
        }
    }
}

impl fmt::Display for ShockVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShockVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ShockVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.trim())
            .ok_or_else(|| format!("unknown shock variant `{s}` (expected supplier_firm, supplier_average, supplier_loo or country_product)"))
    }
}

impl crate::config::KvValue for ShockVariant {
    fn parse_kv(s: &str) -> Result<Self, String> {
        s.parse()
    }

    fn render_kv(&self) -> String {
        self.to_string()
    }
}

/// One firm-year shock.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmShock {
    pub firm_id: String,
    pub year: i32,
    pub variant: ShockVariant,
    /// Log points.
    pub value: f64,
    /// Keys with an observed price shift.
    pub n_links: usize,
    /// Share of base-year weight on keys whose shift was missing and set to zero.
    pub imputed_share: f64,
}

#[derive(Debug, Error)]
pub enum ShockError {
    #[error("firm {firm} has no imports in base year {year}")]
    NoBaseYear { firm: String, year: i32 },
    #[error("unit values need import records")]
    NotImports,
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {message}")]
    Invalid { path: String, line: u64, message: String },
}
