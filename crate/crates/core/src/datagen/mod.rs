//! Seeded synthetic customs corpus with a known data-generating process.
//!
//! Supplier prices follow log random walks at the (supplier, product,
//! source) level. Each firm buys through a handful of supplier links with
//! Dirichlet quantity weights. The firm's import cost index is chained with
//! lagged realized value shares and own-link unit-value growth, and feeds
//! both import demand (log-linear in the index) and the firm's supplier
//! efficiency in the quality model, which produces its exports.

pub mod names;
mod transactions;
mod world;

pub use transactions::{
    generate_transactions, write_costs, write_generated, write_names, CostPoint, Generated, NameRow,
};
pub use world::{generate_world, LinkSlot, PriceKey, Supplier, World, WorldFirm};

use crate::config::ConfigError;
use crate::kv_config;

/// Everything that shapes a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub seed: u64,
    pub n_firms: usize,
    pub n_suppliers: usize,
    pub n_products: usize,
    pub n_sources: usize,
    pub n_advanced: usize,
    pub n_emerging: usize,
    pub n_years: usize,
    pub first_year: i32,
    pub n_sectors: usize,
    /// Links per firm are drawn uniformly from `1..=max_links`.
    pub max_links: usize,
    pub max_products_per_supplier: usize,
    pub max_export_products: usize,
    pub z_log_sd: f64,
    pub xi_log_sd: f64,
    /// S.d. of yearly log-price innovations per (supplier, product, source).
    pub price_innovation_sd: f64,
    /// Share of the innovation variance common to all suppliers of a
    /// (product, source) pair.
    pub common_price_share: f64,
    /// S.d. of the time-invariant log-price premium of a firm-supplier link.
    pub link_premium_sd: f64,
    /// S.d. of transitory link-level log-price noise.
    pub link_price_sd: f64,
    pub dirichlet_alpha: f64,
    /// Import quantity semi-elasticity to the cost index; `auto` derives it
    /// from the domestic line.
    pub import_elasticity: Option<f64>,
    pub noise_firm_year_sd: f64,
    pub noise_country_year_sd: f64,
    pub noise_idiosyncratic_sd: f64,
    /// AR(1) coefficient of the quantity noise components: 0 draws them
    /// afresh each year, 1 makes them random walks.
    pub noise_persistence: f64,
    /// Yearly probability that a link is replaced by a different supplier.
    pub attrition_hazard: f64,
    pub rho: f64,
    pub alpha: f64,
    pub wage: f64,
    pub quality_cost: f64,
    pub zeta_domestic: f64,
    pub zeta_advanced: f64,
    pub zeta_emerging: f64,
    pub income_domestic: f64,
    pub income_advanced: f64,
    pub income_emerging: f64,
    pub fixed_cost_advanced: f64,
    pub fixed_cost_emerging: f64,
    /// Share of firm-supplier pairs that also appear under a corrupted name.
    pub name_variant_share: f64,
    pub name_drop_char: f64,
    pub name_add_suffix: f64,
    pub name_add_country: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_firms: 400,
            n_suppliers: 250,
            n_products: 30,
            n_sources: 10,
            n_advanced: 3,
            n_emerging: 3,
            n_years: 8,
            first_year: 2003,
            n_sectors: 5,
            max_links: 4,
            max_products_per_supplier: 3,
            max_export_products: 2,
            z_log_sd: 0.4,
            xi_log_sd: 0.4,
            price_innovation_sd: 0.1,
            common_price_share: 0.5,
            link_premium_sd: 0.1,
            link_price_sd: 0.03,
            dirichlet_alpha: 1.0,
            import_elasticity: None,
            noise_firm_year_sd: 0.1,
            noise_country_year_sd: 0.05,
            noise_idiosyncratic_sd: 0.1,
            noise_persistence: 0.0,
            attrition_hazard: 0.05,
            rho: 3.0,
            alpha: 0.5,
            wage: 1.0,
            quality_cost: 1.0,
            zeta_domestic: 0.1,
            zeta_advanced: 0.4,
            zeta_emerging: 0.05,
            income_domestic: 20.0,
            income_advanced: 30.0,
            income_emerging: 15.0,
            fixed_cost_advanced: 0.02,
            fixed_cost_emerging: 0.05,
            name_variant_share: 0.3,
            name_drop_char: 0.5,
            name_add_suffix: 0.4,
            name_add_country: 0.4,
        }
    }
}

kv_config!(WorldConfig {
    seed,
    n_firms,
    n_suppliers,
    n_products,
    n_sources,
    n_advanced,
    n_emerging,
    n_years,
    first_year,
    n_sectors,
    max_links,
    max_products_per_supplier,
    max_export_products,
    z_log_sd,
    xi_log_sd,
    price_innovation_sd,
    common_price_share,
    link_premium_sd,
    link_price_sd,
    dirichlet_alpha,
    import_elasticity,
    noise_firm_year_sd,
    noise_country_year_sd,
    noise_idiosyncratic_sd,
    noise_persistence,
    attrition_hazard,
    rho,
    alpha,
    wage,
    quality_cost,
    zeta_domestic,
    zeta_advanced,
    zeta_emerging,
    income_domestic,
    income_advanced,
    income_emerging,
    fixed_cost_advanced,
    fixed_cost_emerging,
    name_variant_share,
    name_drop_char,
    name_add_suffix,
    name_add_country,
});

impl WorldConfig {
    /// Same world with every noise source switched off: no measurement noise,
    /// no link-level price noise and no attrition.
    pub fn zero_noise(mut self) -> Self {
        self.noise_firm_year_sd = 0.0;
        self.noise_country_year_sd = 0.0;
        self.noise_idiosyncratic_sd = 0.0;
        self.link_price_sd = 0.0;
        self.attrition_hazard = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let counts = [
            ("n_firms", self.n_firms),
            ("n_suppliers", self.n_suppliers),
            ("n_products", self.n_products),
            ("n_sources", self.n_sources),
            ("n_years", self.n_years),
            ("n_sectors", self.n_sectors),
            ("max_links", self.max_links),
            ("max_products_per_supplier", self.max_products_per_supplier),
            ("max_export_products", self.max_export_products),
        ];
        for (name, v) in counts {
            if v < 1 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.n_advanced + self.n_emerging < 1 {
            return bad("need at least one export destination".into());
        }
        if self.n_products > 900_000 {
            return bad("at most 900000 six-digit products".into());
        }
        let sds = [
            ("z_log_sd", self.z_log_sd),
            ("xi_log_sd", self.xi_log_sd),
            ("price_innovation_sd", self.price_innovation_sd),
            ("link_premium_sd", self.link_premium_sd),
            ("link_price_sd", self.link_price_sd),
            ("noise_firm_year_sd", self.noise_firm_year_sd),
            ("noise_country_year_sd", self.noise_country_year_sd),
            ("noise_idiosyncratic_sd", self.noise_idiosyncratic_sd),
            ("fixed_cost_advanced", self.fixed_cost_advanced),
            ("fixed_cost_emerging", self.fixed_cost_emerging),
        ];
        for (name, v) in sds {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        let probs = [
            ("common_price_share", self.common_price_share),
            ("attrition_hazard", self.attrition_hazard),
            ("noise_persistence", self.noise_persistence),
            ("name_variant_share", self.name_variant_share),
            ("name_drop_char", self.name_drop_char),
            ("name_add_suffix", self.name_add_suffix),
            ("name_add_country", self.name_add_country),
        ];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.dirichlet_alpha.is_finite() && self.dirichlet_alpha > 0.0) {
            return bad("dirichlet_alpha must be positive".into());
        }
        if let Some(b) = self.import_elasticity {
            if !b.is_finite() {
                return bad("import_elasticity must be finite".into());
            }
        }
        Ok(())
    }
}
