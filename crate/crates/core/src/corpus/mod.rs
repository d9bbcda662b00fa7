//! Customs-style trade records and the CSV files they live in.

mod io;

pub use io::{read_corpus, read_exports, read_imports, write_corpus, CorpusFiles};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::IncomeGroup;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path} line {line}: {message}")]
    Invalid { path: String, line: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Import,
    Export,
}

/// One shipment aggregate: a firm-year flow of one product with one
/// counterparty country (and, for imports, one foreign supplier).
#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub year: i32,
    pub firm_id: String,
    /// Supplier id for imports; `None` for exports.
    pub counterparty: Option<String>,
    /// Six-digit product code.
    pub product: String,
    /// Source country for imports, destination for exports.
    pub country: String,
    pub value: f64,
    pub quantity: f64,
    pub direction: Direction,
}

impl TradeRecord {
    pub fn unit_value(&self) -> f64 {
        self.value / self.quantity
    }

    /// Checks `value > 0`, `quantity > 0`, a finite unit value and a six-digit
    /// product code.
    pub fn check(&self) -> Result<(), String> {
        if !(self.value.is_finite() && self.value > 0.0) {
            return Err(format!("value must be positive, got {}", self.value));
        }
        if !(self.quantity.is_finite() && self.quantity > 0.0) {
            return Err(format!("quantity must be positive, got {}", self.quantity));
        }
        if !self.unit_value().is_finite() {
            return Err("unit value is not finite".into());
        }
        if self.product.len() != 6 || !self.product.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("product code `{}` is not six digits", self.product));
        }
        match (self.direction, &self.counterparty) {
            (Direction::Import, None) => Err("import record without supplier".into()),
            (Direction::Export, Some(_)) => Err("export record with a supplier".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    RauchLib,
    RauchCon,
    Bernini,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::RauchLib, Scheme::RauchCon, Scheme::Bernini];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::RauchLib => "rauch_lib",
            Scheme::RauchCon => "rauch_con",
            Scheme::Bernini => "bernini",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| format!("unknown classification scheme `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProductClass {
    Differentiated,
    Reference,
    Homogeneous,
}

impl ProductClass {
    pub const ALL: [ProductClass; 3] = [ProductClass::Differentiated, ProductClass::Reference, ProductClass::Homogeneous];

    pub fn as_str(self) -> &'static str {
        match self {
            ProductClass::Differentiated => "differentiated",
            ProductClass::Reference => "reference",
            ProductClass::Homogeneous => "homogeneous",
        }
    }
}

impl fmt::Display for ProductClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProductClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ProductClass::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| format!("unknown product class `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub product: String,
    pub scheme: Scheme,
    pub class: ProductClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryInfo {
    pub country: String,
    pub income_group: IncomeGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Employment {
    pub year: i32,
    pub firm_id: String,
    pub sector: String,
    pub employment: f64,
}

/// Everything the shock builder and the regression engine read.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub imports: Vec<TradeRecord>,
    pub exports: Vec<TradeRecord>,
    pub countries: Vec<CountryInfo>,
    pub classifications: Vec<Classification>,
    pub employment: Option<Vec<Employment>>,
}

impl Corpus {
    pub fn income_group(&self, country: &str) -> Option<IncomeGroup> {
        self.countries.iter().find(|c| c.country == country).map(|c| c.income_group)
    }

    pub fn years(&self) -> Option<(i32, i32)> {
        let mut it = self.imports.iter().chain(&self.exports).map(|r| r.year);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), y| (lo.min(y), hi.max(y))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec() -> TradeRecord {
        TradeRecord {
            year: 2005,
            firm_id: "F1".into(),
            counterparty: Some("S1".into()),
            product: "847130".into(),
            country: "CHN".into(),
            value: 10.0,
            quantity: 2.0,
            direction: Direction::Import,
        }
    }

    #[test]
    fn record_checks() {
        assert!(rec().check().is_ok());
        assert_eq!(rec().unit_value(), 5.0);
        let mut r = rec();
        r.quantity = 0.0;
        assert!(r.check().is_err());
        let mut r = rec();
        r.product = "8471".into();
        assert!(r.check().is_err());
        let mut r = rec();
        r.direction = Direction::Export;
        assert!(r.check().is_err());
    }

    #[test]
    fn labels_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        for c in ProductClass::ALL {
            assert_eq!(c.to_string().parse::<ProductClass>().unwrap(), c);
        }
        assert!("rauch".parse::<Scheme>().is_err());
    }
}
