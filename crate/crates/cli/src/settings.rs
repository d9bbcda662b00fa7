//! Config structs for the subcommands that have no library-side one.

use tradelab::config::{dotted, ConfigError, KvConfig, KvMap, KvValue};
use tradelab::kv_config;
use tradelab::model::{Destination, IncomeGroup, ModelParams};
use tradelab::search::{Family, SimConfig, SupplierMarket};
use tradelab::shocks::{ShareBase, ShockVariant};

/// Comma-separated values.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: KvValue> KvValue for List<T> {
    fn parse_kv(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(T::parse_kv)
            .collect::<Result<_, _>>()
            .map(List)
    }

    fn render_kv(&self) -> String {
        self.0.iter().map(KvValue::render_kv).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Group(IncomeGroup);

impl KvValue for Group {
    fn parse_kv(s: &str) -> Result<Self, String> {
        s.parse().map(Group)
    }

    fn render_kv(&self) -> String {
        self.0.to_string()
    }
}

/// Structural parameters under `model.*`. Destinations are listed in
/// `model.destinations`; each has `model.<id>.zeta`, `.income`,
/// `.price_index`, `.fixed_cost` and `.income_group`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSettings(pub ModelParams<f64>);

impl Default for ModelSettings {
    fn default() -> Self {
        Self(ModelParams::two_destination_example())
    }
}

impl KvConfig for ModelSettings {
    fn apply_kv(&mut self, kv: &mut KvMap, prefix: &str) -> Result<(), ConfigError> {
        let p = &mut self.0;
        kv.take_into(&dotted(prefix, "rho"), &mut p.rho)?;
        kv.take_into(&dotted(prefix, "alpha"), &mut p.alpha)?;
        kv.take_into(&dotted(prefix, "wage"), &mut p.wage)?;
        kv.take_into(&dotted(prefix, "quality_cost"), &mut p.quality_cost)?;
        kv.take_into(&dotted(prefix, "discount"), &mut p.discount)?;
        if let Some(List(ids)) = kv.take::<List<String>>(&dotted(prefix, "destinations"))? {
            let old = std::mem::take(&mut p.destinations);
            p.destinations = ids
                .into_iter()
                .map(|id| {
                    old.iter()
                        .find(|d| d.id == id)
                        .cloned()
                        .unwrap_or_else(|| Destination::new(id, 0.1, 1.0, 1.0, 0.0, IncomeGroup::Emerging))
                })
                .collect();
        }
        for d in &mut p.destinations {
            let key = |f: &str| dotted(prefix, &format!("{}.{f}", d.id));
            kv.take_into(&key("zeta"), &mut d.zeta)?;
            kv.take_into(&key("income"), &mut d.income)?;
            kv.take_into(&key("price_index"), &mut d.price_index)?;
            kv.take_into(&key("fixed_cost"), &mut d.fixed_cost)?;
            if let Some(Group(g)) = kv.take(&key("income_group"))? {
                d.income_group = g;
            }
        }
        Ok(())
    }

    fn kv_entries(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        let p = &self.0;
        for (k, v) in [
            ("rho", p.rho),
            ("alpha", p.alpha),
            ("wage", p.wage),
            ("quality_cost", p.quality_cost),
            ("discount", p.discount),
        ] {
            out.push((dotted(prefix, k), v.render_kv()));
        }
        let ids: Vec<String> = p.destinations.iter().map(|d| d.id.clone()).collect();
        out.push((dotted(prefix, "destinations"), List(ids).render_kv()));
        for d in &p.destinations {
            let key = |f: &str| dotted(prefix, &format!("{}.{f}", d.id));
            out.push((key("zeta"), d.zeta.render_kv()));
            out.push((key("income"), d.income.render_kv()));
            out.push((key("price_index"), d.price_index.render_kv()));
            out.push((key("fixed_cost"), d.fixed_cost.render_kv()));
            out.push((key("income_group"), d.income_group.to_string()));
        }
    }
}

/// Supplier pool under `market.*`; `family` is `uniform` or `lognormal`
/// (then `mu` and `sigma` apply).
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSettings {
    pub family: String,
    pub mu: f64,
    pub sigma: f64,
    pub c_low: f64,
    pub c_high: f64,
    pub search_cost: f64,
}

impl Default for MarketSettings {
    fn default() -> Self {
        Self {
            family: "uniform".into(),
            mu: 0.0,
            sigma: 0.5,
            c_low: 0.5,
            c_high: 2.0,
            search_cost: 1.0,
        }
    }
}

kv_config!(MarketSettings {
    family,
    mu,
    sigma,
    c_low,
    c_high,
    search_cost
});

impl MarketSettings {
    pub fn build(&self) -> Result<SupplierMarket<f64>, String> {
        let family = match self.family.as_str() {
            "uniform" => Family::Uniform,
            "lognormal" => Family::TruncatedLogNormal {
                mu: self.mu,
                sigma: self.sigma,
            },
            f => return Err(format!("market.family must be `uniform` or `lognormal`, got `{f}`")),
        };
        SupplierMarket::new(family, self.c_low, self.c_high, self.search_cost).map_err(|e| e.to_string())
    }
}

/// Cohort under `sim.*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub n_firms: usize,
    pub horizon: u32,
    pub seed: u64,
    pub z_low: f64,
    pub z_high: f64,
    pub xi_low: f64,
    pub xi_high: f64,
    pub quad_nodes: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        let d = SimConfig::<f64>::default();
        Self {
            n_firms: d.n_firms,
            horizon: d.horizon,
            seed: d.seed,
            z_low: d.z_range.0,
            z_high: d.z_range.1,
            xi_low: d.xi_range.0,
            xi_high: d.xi_range.1,
            quad_nodes: d.quad_nodes,
        }
    }
}

kv_config!(SimSettings {
    n_firms,
    horizon,
    seed,
    z_low,
    z_high,
    xi_low,
    xi_high,
    quad_nodes
});

impl SimSettings {
    pub fn build(&self) -> SimConfig<f64> {
        SimConfig {
            n_firms: self.n_firms,
            horizon: self.horizon,
            seed: self.seed,
            z_range: (self.z_low, self.z_high),
            xi_range: (self.xi_low, self.xi_high),
            quad_nodes: self.quad_nodes,
            ..SimConfig::default()
        }
    }
}

/// Grid under `heatmap.*`. The scope map is drawn at `c` and again at
/// `c * (1 + c_shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSettings {
    pub nz: usize,
    pub nxi: usize,
    pub z_low: f64,
    pub z_high: f64,
    pub xi_low: f64,
    pub xi_high: f64,
    pub c: f64,
    pub c_shift: f64,
    /// Also solve the search threshold in every cell.
    pub thresholds: bool,
    pub quad_nodes: usize,
}

impl Default for HeatmapSettings {
    fn default() -> Self {
        Self {
            nz: 100,
            nxi: 100,
            z_low: 0.2,
            z_high: 5.0,
            xi_low: 0.2,
            xi_high: 5.0,
            c: 1.0,
            c_shift: 0.5,
            thresholds: true,
            quad_nodes: 64,
        }
    }
}

kv_config!(HeatmapSettings {
    nz,
    nxi,
    z_low,
    z_high,
    xi_low,
    xi_high,
    c,
    c_shift,
    thresholds,
    quad_nodes
});

/// Points for `model-eval` under `eval.*`: every combination is solved.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub z: List<f64>,
    pub xi: List<f64>,
    pub c: List<f64>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            z: List(vec![0.5, 1.0, 2.0]),
            xi: List(vec![0.5, 1.0, 2.0]),
            c: List(vec![0.5, 1.0, 2.0]),
        }
    }
}

kv_config!(EvalSettings { z, xi, c });

/// Shock construction under `shocks.*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockSettings {
    pub variants: List<ShockVariant>,
    pub base: ShareBase,
    /// Leave imputed leave-one-out zeros out of the summary statistics.
    pub drop_zero_loo: bool,
}

impl Default for ShockSettings {
    fn default() -> Self {
        Self {
            variants: List(ShockVariant::ALL.to_vec()),
            base: ShareBase::Lagged,
            drop_zero_loo: false,
        }
    }
}

kv_config!(ShockSettings {
    variants,
    base,
    drop_zero_loo
});
