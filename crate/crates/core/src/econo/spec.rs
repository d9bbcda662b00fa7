use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::EconError;
use crate::config::KvValue;
use crate::corpus::{Corpus, ProductClass, Scheme, TradeRecord};
use crate::kv_config;
use crate::model::IncomeGroup;
use crate::shocks::ShockVariant;

macro_rules! kv_from_display {
    ($($t:ty),*) => {$(
        impl KvValue for $t {
            fn parse_kv(s: &str) -> Result<Self, String> {
                s.trim().parse::<$t>().map_err(|e| e.to_string())
            }
            fn render_kv(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

/// What the regression explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Log quantity imported by (firm, product, source) at `t + j`.
    ImportQuantity,
    /// Log quantity exported by (firm, product, destination) at `t + j`.
    ExportQuantity,
    /// Whether an export cell active at `t` is still active at `t + j`.
    ExportSurvival,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::ImportQuantity => "import_quantity",
            Outcome::ExportQuantity => "export_quantity",
            Outcome::ExportSurvival => "export_survival",
        }
    }

    pub fn is_import(self) -> bool {
        self == Outcome::ImportQuantity
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "import_quantity" => Ok(Outcome::ImportQuantity),
            "export_quantity" => Ok(Outcome::ExportQuantity),
            "export_survival" => Ok(Outcome::ExportSurvival),
            _ => Err(format!("unknown outcome `{s}` (import_quantity, export_quantity, export_survival)")),
        }
    }
}

/// Clustering dimensions: any non-empty subset of `firm` and `country`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterDims {
    pub firm: bool,
    pub country: bool,
}

impl Default for ClusterDims {
    fn default() -> Self {
        Self { firm: true, country: true }
    }
}

impl fmt::Display for ClusterDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.firm {
            parts.push("firm");
        }
        if self.country {
            parts.push("country");
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for ClusterDims {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut d = ClusterDims {
            firm: false,
            country: false,
        };
        for p in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match p {
                "firm" => d.firm = true,
                "country" => d.country = true,
                _ => return Err(format!("unknown cluster dimension `{p}` (firm, country)")),
            }
        }
        if !d.firm && !d.country {
            return Err("at least one cluster dimension is required".into());
        }
        Ok(d)
    }
}

/// Set of product classes, written `differentiated` or `reference,homogeneous`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSet(pub Vec<ProductClass>);

impl fmt::Display for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<&str> = self.0.iter().map(|c| c.as_str()).collect();
        f.write_str(&v.join(","))
    }
}

impl FromStr for ClassSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut v: Vec<ProductClass> = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<ProductClass>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        v.sort_by_key(|c| c.as_str());
        v.dedup();
        if v.is_empty() {
            return Err("empty class set".into());
        }
        Ok(ClassSet(v))
    }
}

/// Firms above or below the mean employment of their sector-year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeSide {
    Above,
    Below,
}

impl fmt::Display for SizeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeSide::Above => "above",
            SizeSide::Below => "below",
        })
    }
}

impl FromStr for SizeSide {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "above" => Ok(SizeSide::Above),
            "below" => Ok(SizeSide::Below),
            _ => Err(format!("expected `above` or `below`, got `{s}`")),
        }
    }
}

kv_from_display!(Outcome, ClusterDims, ClassSet, SizeSide, Scheme, ProductClass, IncomeGroup);

/// Sample restriction; every set field must hold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartitionRule {
    pub scheme: Option<Scheme>,
    pub classes: Option<ClassSet>,
    pub income_group: Option<IncomeGroup>,
    pub firm_size: Option<SizeSide>,
}

kv_config!(PartitionRule {
    scheme,
    classes,
    income_group,
    firm_size
});

impl PartitionRule {
    pub fn is_empty(&self) -> bool {
        self.classes.is_none() && self.income_group.is_none() && self.firm_size.is_none()
    }
}

/// One regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    pub outcome: Outcome,
    pub horizon: usize,
    pub variant: ShockVariant,
    /// Lags `t-1, ..., t-L` of the log quantity.
    pub outcome_lags: usize,
    pub shock_lags: usize,
    pub cluster: ClusterDims,
    pub partition: PartitionRule,
    /// Lags of each extra control, on top of its current value.
    pub control_lags: usize,
    pub drop_singletons: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        Self {
            outcome: Outcome::ImportQuantity,
            horizon: 0,
            variant: ShockVariant::SupplierAverage,
            outcome_lags: 2,
            shock_lags: 0,
            cluster: ClusterDims::default(),
            partition: PartitionRule::default(),
            control_lags: 2,
            drop_singletons: true,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl crate::config::KvConfig for RegressionSpec {
    fn apply_kv(&mut self, kv: &mut crate::config::KvMap, prefix: &str) -> Result<(), crate::config::ConfigError> {
        use crate::config::dotted;
        kv.take_into(&dotted(prefix, "outcome"), &mut self.outcome)?;
        kv.take_into(&dotted(prefix, "horizon"), &mut self.horizon)?;
        kv.take_into(&dotted(prefix, "variant"), &mut self.variant)?;
        kv.take_into(&dotted(prefix, "outcome_lags"), &mut self.outcome_lags)?;
        kv.take_into(&dotted(prefix, "shock_lags"), &mut self.shock_lags)?;
        kv.take_into(&dotted(prefix, "cluster"), &mut self.cluster)?;
        self.partition.apply_kv(kv, &dotted(prefix, "partition"))?;
        kv.take_into(&dotted(prefix, "control_lags"), &mut self.control_lags)?;
        kv.take_into(&dotted(prefix, "drop_singletons"), &mut self.drop_singletons)?;
        kv.take_into(&dotted(prefix, "tol"), &mut self.tol)?;
        kv.take_into(&dotted(prefix, "max_iter"), &mut self.max_iter)?;
        Ok(())
    }

    fn kv_entries(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        use crate::config::dotted;
        let mut put = |k: &str, v: String| out.push((dotted(prefix, k), v));
        put("outcome", self.outcome.render_kv());
        put("horizon", self.horizon.render_kv());
        put("variant", self.variant.render_kv());
        put("outcome_lags", self.outcome_lags.render_kv());
        put("shock_lags", self.shock_lags.render_kv());
        put("cluster", self.cluster.render_kv());
        let mut part = Vec::new();
        self.partition.kv_entries(&dotted(prefix, "partition"), &mut part);
        out.extend(part);
        let mut put = |k: &str, v: String| out.push((dotted(prefix, k), v));
        put("control_lags", self.control_lags.render_kv());
        put("drop_singletons", self.drop_singletons.render_kv());
        put("tol", self.tol.render_kv());
        put("max_iter", self.max_iter.render_kv());
    }
}

impl RegressionSpec {
    pub fn validate(&self) -> Result<(), EconError> {
        if self.outcome == Outcome::ExportSurvival && self.horizon == 0 {
            return Err(EconError::Spec("survival needs horizon >= 1".into()));
        }
        if self.partition.classes.is_some() != self.partition.scheme.is_some() {
            return Err(EconError::Spec("partition.classes and partition.scheme go together".into()));
        }
        if !(self.tol >= 0.0) || self.max_iter == 0 {
            return Err(EconError::Spec("tol must be >= 0 and max_iter > 0".into()));
        }
        Ok(())
    }
}

/// A partition rule resolved against the lookup tables.
#[derive(Debug, Clone)]
pub struct CompiledRule {
    rule: PartitionRule,
    classes: HashMap<String, ProductClass>,
    income: HashMap<String, IncomeGroup>,
    /// `(firm, year)` to above-mean flag.
    size: HashMap<(String, i32), bool>,
}

/// Why a record or row fell outside a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Keep,
    Excluded,
    /// No lookup entry for the product, country or firm-year.
    Unknown,
}

impl CompiledRule {
    pub fn new(corpus: &Corpus, rule: &PartitionRule) -> Result<Self, EconError> {
        let mut classes = HashMap::new();
        if let (Some(scheme), Some(_)) = (rule.scheme, &rule.classes) {
            if !corpus.classifications.iter().any(|c| c.scheme == scheme) {
                return Err(EconError::MissingLookup(format!("classifications for scheme {scheme}")));
            }
            for c in corpus.classifications.iter().filter(|c| c.scheme == scheme) {
                classes.insert(c.product.clone(), c.class);
            }
        }
        let mut income = HashMap::new();
        if rule.income_group.is_some() {
            if corpus.countries.is_empty() {
                return Err(EconError::MissingLookup("countries".into()));
            }
            income = corpus.countries.iter().map(|c| (c.country.clone(), c.income_group)).collect();
        }
        let mut size = HashMap::new();
        if rule.firm_size.is_some() {
            let emp = corpus
                .employment
                .as_ref()
                .ok_or_else(|| EconError::MissingLookup("employment".into()))?;
            // Mean over firms importing that year, by sector-year.
            let active: std::collections::HashSet<(&str, i32)> = corpus
                .imports
                .iter()
                .map(|r| (r.firm_id.as_str(), r.year))
                .collect();
            let mut by: BTreeMap<(&str, i32), (f64, usize)> = BTreeMap::new();
            for e in emp.iter().filter(|e| active.contains(&(e.firm_id.as_str(), e.year))) {
                let s = by.entry((&e.sector, e.year)).or_default();
                s.0 += e.employment;
                s.1 += 1;
            }
            for e in emp {
                if let Some((sum, n)) = by.get(&(e.sector.as_str(), e.year)) {
                    size.insert((e.firm_id.clone(), e.year), e.employment > sum / *n as f64);
                }
            }
        }
        Ok(Self {
            rule: rule.clone(),
            classes,
            income,
            size,
        })
    }

    pub fn verdict(&self, firm: &str, product: &str, country: &str, year: i32) -> Verdict {
        if let Some(set) = &self.rule.classes {
            match self.classes.get(product) {
                None => return Verdict::Unknown,
                Some(c) if !set.0.contains(c) => return Verdict::Excluded,
                _ => {}
            }
        }
        if let Some(g) = self.rule.income_group {
            match self.income.get(country) {
                None => return Verdict::Unknown,
                Some(c) if *c != g => return Verdict::Excluded,
                _ => {}
            }
        }
        if let Some(side) = self.rule.firm_size {
            match self.size.get(&(firm.to_string(), year)) {
                None => return Verdict::Unknown,
                Some(&above) if above != (side == SizeSide::Above) => return Verdict::Excluded,
                _ => {}
            }
        }
        Verdict::Keep
    }
}

/// Records of a corpus that satisfy a rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOutcome {
    pub corpus: Corpus,
    pub excluded: usize,
    /// Records without a lookup entry, also left out.
    pub unknown: usize,
}

/// Restricts imports and exports to records that satisfy `rule`.
pub fn partition(corpus: &Corpus, rule: &PartitionRule) -> Result<PartitionOutcome, EconError> {
    let compiled = CompiledRule::new(corpus, rule)?;
    let mut excluded = 0;
    let mut unknown = 0;
    let mut keep = |r: &TradeRecord| match compiled.verdict(&r.firm_id, &r.product, &r.country, r.year) {
        Verdict::Keep => true,
        Verdict::Excluded => {
            excluded += 1;
            false
        }
        Verdict::Unknown => {
            unknown += 1;
            false
        }
    };
    let imports: Vec<TradeRecord> = corpus.imports.iter().filter(|r| keep(r)).cloned().collect();
    let exports: Vec<TradeRecord> = corpus.exports.iter().filter(|r| keep(r)).cloned().collect();
    Ok(PartitionOutcome {
        corpus: Corpus {
            imports,
            exports,
            ..corpus.clone()
        },
        excluded,
        unknown,
    })
}
