use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::names::company_name;
use super::WorldConfig;
use crate::config::ConfigError;
use crate::corpus::{Classification, CountryInfo, ProductClass, Scheme};
use crate::model::{cost_elasticity, validate_params, Destination, IncomeGroup, ModelParams, ValidParams};
use crate::search::firm_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Supplier {
    pub id: String,
    /// Index into [`World::sources`].
    pub source: usize,
    pub products: Vec<usize>,
    pub name: String,
}

/// Log-price path of one (supplier, product, source) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceKey {
    pub supplier: usize,
    pub product: usize,
    /// One entry per simulated year.
    pub log_price: Vec<f64>,
}

/// A firm's purchasing slot at baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSlot {
    /// Index into [`World::keys`].
    pub key: usize,
    /// Dirichlet share of the firm's import quantity.
    pub weight: f64,
    /// Time-invariant log-price premium on this link.
    pub premium: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldFirm {
    pub id: String,
    pub z: f64,
    pub xi: f64,
    pub sector: String,
    pub slots: Vec<LinkSlot>,
    pub export_products: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub config: WorldConfig,
    /// Domestic line first, then advanced and emerging destinations.
    pub params: ValidParams<f64>,
    pub products: Vec<String>,
    pub sources: Vec<String>,
    pub countries: Vec<CountryInfo>,
    pub classifications: Vec<Classification>,
    pub suppliers: Vec<Supplier>,
    pub keys: Vec<PriceKey>,
    pub firms: Vec<WorldFirm>,
    /// Country-year measurement noise, indexed like `countries`.
    pub country_noise: Vec<Vec<f64>>,
}

impl World {
    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.config.n_years).map(move |t| self.config.first_year + t as i32)
    }

    pub fn country_index(&self, id: &str) -> Option<usize> {
        self.countries.iter().position(|c| c.country == id)
    }

    /// Export quantity elasticity to the cost index on destination `id`.
    pub fn export_elasticity(&self, id: &str) -> Option<f64> {
        self.params.destination(id).map(|d| cost_elasticity(&self.params, d))
    }

    /// Import quantity semi-elasticity to the cost index: the configured
    /// value, or the elasticity of input demand `(1-alpha) C x / c` on the
    /// domestic line.
    pub fn import_elasticity(&self) -> f64 {
        self.config.import_elasticity.unwrap_or_else(|| {
            let home = &self.params.destinations[0];
            cost_elasticity(&self.params, home) - self.params.alpha
        })
    }
}

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

/// Dirichlet draw via normalized gamma variates.
fn dirichlet(rng: &mut ChaCha8Rng, n: usize, alpha: f64) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..n).map(|_| g.sample(rng).max(f64::MIN_POSITIVE)).collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

fn hs6(i: usize) -> String {
    // Spread codes over the six-digit range; 7919 is coprime to 900000.
    format!("{:06}", 100_000 + (i * 7919) % 900_000)
}

/// Builds the deterministic part of a synthetic economy from `config.seed`.
pub fn generate_world(config: &WorldConfig) -> Result<World, ConfigError> {
    config.validate()?;
    let c = config;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let years = c.n_years;

    let products: Vec<String> = (0..c.n_products).map(hs6).collect();
    let sources: Vec<String> = (0..c.n_sources).map(|i| format!("S{:02}", i + 1)).collect();
    let mut countries: Vec<CountryInfo> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| CountryInfo {
            country: s.clone(),
            income_group: if i % 2 == 0 { IncomeGroup::Advanced } else { IncomeGroup::Emerging },
        })
        .collect();
    let mut dests = vec![Destination::domestic("HOME", c.zeta_domestic, c.income_domestic, 1.0)];
    for i in 0..c.n_advanced {
        let id = format!("A{:02}", i + 1);
        dests.push(Destination::new(
            id.clone(),
            c.zeta_advanced,
            c.income_advanced,
            1.0,
            c.fixed_cost_advanced,
            IncomeGroup::Advanced,
        ));
        countries.push(CountryInfo {
            country: id,
            income_group: IncomeGroup::Advanced,
        });
    }
    for i in 0..c.n_emerging {
        let id = format!("E{:02}", i + 1);
        dests.push(Destination::new(
            id.clone(),
            c.zeta_emerging,
            c.income_emerging,
            1.0,
            c.fixed_cost_emerging,
            IncomeGroup::Emerging,
        ));
        countries.push(CountryInfo {
            country: id,
            income_group: IncomeGroup::Emerging,
        });
    }
    let params = validate_params(ModelParams {
        rho: c.rho,
        alpha: c.alpha,
        wage: c.wage,
        quality_cost: c.quality_cost,
        discount: 0.9,
        destinations: dests,
    })
    .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let mut classifications = Vec::with_capacity(products.len() * 3);
    for p in &products {
        for scheme in Scheme::ALL {
            let u: f64 = rng.random();
            let class = if u < 0.6 {
                ProductClass::Differentiated
            } else if u < 0.85 {
                ProductClass::Reference
            } else {
                ProductClass::Homogeneous
            };
            classifications.push(Classification {
                product: p.clone(),
                scheme,
                class,
            });
        }
    }

    let mut seen_names = HashSet::new();
    let mut suppliers = Vec::with_capacity(c.n_suppliers);
    for i in 0..c.n_suppliers {
        let k = rng.random_range(1..=c.max_products_per_supplier.min(c.n_products));
        let mut prods: Vec<usize> = sample(&mut rng, c.n_products, k).into_vec();
        prods.sort_unstable();
        let name = loop {
            let n = company_name(&mut rng);
            let core = n.split(' ').next().unwrap_or("").to_string();
            if seen_names.insert(core) {
                break n;
            }
        };
        suppliers.push(Supplier {
            id: format!("SUP{:05}", i + 1),
            source: rng.random_range(0..c.n_sources),
            products: prods,
            name,
        });
    }

    // Innovations: a (product, source) component shared by all suppliers of
    // the pair plus a key-specific one, scaled to the configured total s.d.
    let common_sd = c.price_innovation_sd * c.common_price_share.sqrt();
    let own_sd = c.price_innovation_sd * (1.0 - c.common_price_share).sqrt();
    let mut common = vec![vec![0.0; years]; c.n_products * c.n_sources];
    for row in &mut common {
        for v in row.iter_mut().skip(1) {
            *v = normal(&mut rng, common_sd);
        }
    }
    let mut keys = Vec::new();
    for (s, sup) in suppliers.iter().enumerate() {
        for &p in &sup.products {
            let mut lp = Vec::with_capacity(years);
            let mut level = normal(&mut rng, 0.3);
            lp.push(level);
            for t in 1..years {
                level += common[p * c.n_sources + sup.source][t] + normal(&mut rng, own_sd);
                lp.push(level);
            }
            keys.push(PriceKey {
                supplier: s,
                product: p,
                log_price: lp,
            });
        }
    }

    let country_noise: Vec<Vec<f64>> = countries
        .iter()
        .map(|_| {
            let mut level = 0.0;
            (0..years)
                .map(|_| {
                    level = c.noise_persistence * level + normal(&mut rng, c.noise_country_year_sd);
                    level
                })
                .collect()
        })
        .collect();

    let firms = (0..c.n_firms)
        .map(|i| {
            let id = format!("FIRM{:05}", i + 1);
            let mut r = firm_rng(c.seed, &id);
            let z = normal(&mut r, c.z_log_sd).exp();
            let xi = normal(&mut r, c.xi_log_sd).exp();
            let n_links = r.random_range(1..=c.max_links.min(keys.len()));
            let chosen = sample(&mut r, keys.len(), n_links).into_vec();
            let weights = dirichlet(&mut r, n_links, c.dirichlet_alpha);
            let slots = chosen
                .into_iter()
                .zip(weights)
                .map(|(key, weight)| LinkSlot {
                    key,
                    weight,
                    premium: normal(&mut r, c.link_premium_sd),
                })
                .collect();
            let n_exp = r.random_range(1..=c.max_export_products.min(c.n_products));
            let mut export_products = sample(&mut r, c.n_products, n_exp).into_vec();
            export_products.sort_unstable();
            WorldFirm {
                id,
                z,
                xi,
                sector: format!("SEC{}", r.random_range(1..=c.n_sectors)),
                slots,
                export_products,
            }
        })
        .collect();

    Ok(World {
        config: c.clone(),
        params,
        products,
        sources,
        countries,
        classifications,
        suppliers,
        keys,
        firms,
        country_noise,
    })
}
