use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::names::{corrupt_name, CorruptionConfig};
use super::World;
use crate::corpus::{write_corpus, Corpus, CorpusError, Direction, Employment, TradeRecord};
use crate::model::{interior_solution, marginal_cost, solve_line_at, Firm};
use crate::search::firm_rng;

/// The firm's cost index in one year; `shock` is its growth from the year
/// before (zero in the first year).
#[derive(Debug, Clone, PartialEq)]
pub struct CostPoint {
    pub firm_id: String,
    pub year: i32,
    pub log_cost_index: f64,
    pub shock: f64,
}

/// One raw supplier spelling seen by an importer, with its true identity.
#[derive(Debug, Clone, PartialEq)]
pub struct NameRow {
    pub firm_id: String,
    pub supplier_raw: String,
    pub value: f64,
    pub supplier_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub corpus: Corpus,
    pub costs: Vec<CostPoint>,
    pub names: Vec<NameRow>,
}

const TRANSACTION_SALT: u64 = 0x7f4a_7c15_9e37_79b9;

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

struct FirmOutput {
    imports: Vec<TradeRecord>,
    exports: Vec<TradeRecord>,
    employment: Vec<Employment>,
    costs: Vec<CostPoint>,
    names: Vec<NameRow>,
}

/// Realizes the world year by year. Firms are independent and each uses its
/// own random stream, so the output does not depend on scheduling.
pub fn generate_transactions(world: &World) -> Generated {
    let per_firm: Vec<FirmOutput> = (0..world.firms.len()).into_par_iter().map(|i| simulate_firm(world, i)).collect();
    let mut corpus = Corpus {
        countries: world.countries.clone(),
        classifications: world.classifications.clone(),
        ..Corpus::default()
    };
    let mut employment = Vec::new();
    let mut costs = Vec::new();
    let mut names = Vec::new();
    for f in per_firm {
        corpus.imports.extend(f.imports);
        corpus.exports.extend(f.exports);
        employment.extend(f.employment);
        costs.extend(f.costs);
        names.extend(f.names);
    }
    corpus.employment = Some(employment);
    Generated { corpus, costs, names }
}

fn simulate_firm(world: &World, idx: usize) -> FirmOutput {
    let cfg = &world.config;
    let wf = &world.firms[idx];
    let params = &world.params;
    let mut rng = firm_rng(cfg.seed ^ TRANSACTION_SALT, &wf.id);
    let beta_m = world.import_elasticity();
    let n_sources = world.sources.len();

    let mut slots = wf.slots.clone();
    // Previous year's unit value and value by key.
    let mut prev: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let mut log_c = 0.0;
    let mut log_c0 = 0.0;
    let mut log_q0 = 0.0;
    let mut out = FirmOutput {
        imports: Vec::new(),
        exports: Vec::new(),
        employment: Vec::new(),
        costs: Vec::new(),
        names: Vec::new(),
    };
    let mut supplier_value: BTreeMap<usize, f64> = BTreeMap::new();
    let phi = cfg.noise_persistence;
    let mut firm_noise = 0.0;
    // Idiosyncratic noise state by link key and by (product, destination).
    let mut link_noise: BTreeMap<usize, f64> = BTreeMap::new();
    let mut export_noise: BTreeMap<(usize, usize), f64> = BTreeMap::new();

    for t in 0..cfg.n_years {
        let year = cfg.first_year + t as i32;
        if t > 0 && cfg.attrition_hazard > 0.0 {
            let held: Vec<usize> = slots.iter().map(|x| x.key).collect();
            for s in 0..slots.len() {
                if rng.random_bool(cfg.attrition_hazard) {
                    for _ in 0..100 {
                        let k = rng.random_range(0..world.keys.len());
                        if !held.contains(&k) && slots.iter().all(|x| x.key != k) {
                            slots[s].key = k;
                            slots[s].premium = normal(&mut rng, cfg.link_premium_sd);
                            break;
                        }
                    }
                }
            }
        }
        firm_noise = phi * firm_noise + normal(&mut rng, cfg.noise_firm_year_sd);
        let log_prices: Vec<f64> = slots
            .iter()
            .map(|s| world.keys[s.key].log_price[t] + s.premium + normal(&mut rng, cfg.link_price_sd))
            .collect();

        let mut shock = 0.0;
        if t == 0 {
            log_c = slots.iter().zip(&log_prices).map(|(s, lp)| s.weight * lp).sum();
            log_c0 = log_c;
        } else {
            // Lagged value shares times own-link unit-value growth; links
            // without a price in both years contribute zero.
            let total: f64 = prev.values().map(|(_, v)| v).sum();
            for (s, lp) in slots.iter().zip(&log_prices) {
                if let Some((uv_prev, v_prev)) = prev.get(&s.key) {
                    shock += v_prev / total * (lp - uv_prev.ln());
                }
            }
            log_c += shock;
        }
        let c = log_c.exp();
        let firm = Firm::new(wf.id.clone(), wf.z, wf.xi, c);
        if t == 0 {
            let cost = marginal_cost(params, wf.z, c).expect("positive productivity");
            let mut x_total = 0.0;
            for d in &params.destinations {
                if solve_line_at(params, d, &firm, c).expect("validated").active {
                    x_total += interior_solution(params, d, &firm, c).expect("validated").quantity;
                }
            }
            log_q0 = ((1.0 - params.alpha) * cost * x_total / c).ln();
        }
        let log_q = log_q0 + beta_m * (log_c - log_c0);

        prev.clear();
        let mut next_link_noise = BTreeMap::new();
        for (s, lp) in slots.iter().zip(&log_prices) {
            let key = &world.keys[s.key];
            let sup = &world.suppliers[key.supplier];
            let own = link_noise.get(&s.key).map_or(0.0, |v| phi * v) + normal(&mut rng, cfg.noise_idiosyncratic_sd);
            next_link_noise.insert(s.key, own);
            let noise = firm_noise + world.country_noise[sup.source][t] + own;
            let quantity = s.weight * (log_q + noise).exp();
            let value = quantity * lp.exp();
            prev.insert(s.key, (value / quantity, value));
            *supplier_value.entry(key.supplier).or_default() += value;
            out.imports.push(TradeRecord {
                year,
                firm_id: wf.id.clone(),
                counterparty: Some(sup.id.clone()),
                product: world.products[key.product].clone(),
                country: world.sources[sup.source].clone(),
                value,
                quantity,
                direction: Direction::Import,
            });
        }

        link_noise = next_link_noise;

        let n_exp = wf.export_products.len() as f64;
        for (di, d) in params.destinations.iter().enumerate().skip(1) {
            let sol = solve_line_at(params, d, &firm, c).expect("validated");
            let country_noise = world.country_noise[n_sources + di - 1][t];
            for &p in &wf.export_products {
                // Drawn whether or not the line is active, so participation
                // does not shift later draws.
                let own = export_noise.entry((p, di)).or_insert(0.0);
                *own = phi * *own + normal(&mut rng, cfg.noise_idiosyncratic_sd);
                let noise = firm_noise + country_noise + *own;
                if !sol.active {
                    continue;
                }
                let quantity = sol.quantity / n_exp * noise.exp();
                out.exports.push(TradeRecord {
                    year,
                    firm_id: wf.id.clone(),
                    counterparty: None,
                    product: world.products[p].clone(),
                    country: d.id.clone(),
                    value: quantity * sol.price,
                    quantity,
                    direction: Direction::Export,
                });
            }
        }

        let size_noise = normal(&mut rng, 0.05);
        out.employment.push(Employment {
            year,
            firm_id: wf.id.clone(),
            sector: wf.sector.clone(),
            employment: (20.0 * wf.z.powf(1.5) * size_noise.exp()).round().max(1.0),
        });
        out.costs.push(CostPoint {
            firm_id: wf.id.clone(),
            year,
            log_cost_index: log_c,
            shock,
        });
    }

    let corruption = CorruptionConfig {
        drop_char: cfg.name_drop_char,
        add_suffix: cfg.name_add_suffix,
        add_country: cfg.name_add_country,
    };
    for (s, value) in supplier_value {
        let sup = &world.suppliers[s];
        let row = |raw: String, value: f64| NameRow {
            firm_id: wf.id.clone(),
            supplier_raw: raw,
            value,
            supplier_id: sup.id.clone(),
        };
        if rng.random_bool(cfg.name_variant_share) {
            let split = rng.random_range(0.2..0.8);
            out.names.push(row(sup.name.clone(), value * split));
            out.names.push(row(corrupt_name(&sup.name, &corruption, &mut rng), value * (1.0 - split)));
        } else {
            out.names.push(row(sup.name.clone(), value));
        }
    }
    out
}

/// Writes `supplier_names.csv` (`firm_id,supplier_raw,value_usd`) and the
/// answer key `supplier_names_truth.csv` (`firm_id,supplier_raw,supplier_id`).
pub fn write_names(rows: &[NameRow], dir: &Path) -> Result<(), CorpusError> {
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |source: std::io::Error| CorpusError::Io { path: p, source }
    };
    let names = dir.join("supplier_names.csv");
    let truth = dir.join("supplier_names_truth.csv");
    let mut a = csv::Writer::from_path(&names).map_err(|source| CorpusError::Csv {
        path: names.display().to_string(),
        source,
    })?;
    let mut b = csv::Writer::from_path(&truth).map_err(|source| CorpusError::Csv {
        path: truth.display().to_string(),
        source,
    })?;
    let wa = |w: &mut csv::Writer<_>, r: [&str; 3]| {
        w.write_record(r).map_err(|source| CorpusError::Csv {
            path: names.display().to_string(),
            source,
        })
    };
    wa(&mut a, ["firm_id", "supplier_raw", "value_usd"])?;
    wa(&mut b, ["firm_id", "supplier_raw", "supplier_id"])?;
    for r in rows {
        wa(&mut a, [&r.firm_id, &r.supplier_raw, &r.value.to_string()])?;
        wa(&mut b, [&r.firm_id, &r.supplier_raw, &r.supplier_id])?;
    }
    a.flush().map_err(io(&names))?;
    b.flush().map_err(io(&truth))?;
    Ok(())
}

/// Writes the true cost index path as `firm_id,year,log_cost_index,shock`.
pub fn write_costs<W: Write>(costs: &[CostPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["firm_id", "year", "log_cost_index", "shock"])?;
    for c in costs {
        w.write_record([
            c.firm_id.clone(),
            c.year.to_string(),
            c.log_cost_index.to_string(),
            c.shock.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the corpus plus the name files into `dir`.
pub fn write_generated(generated: &Generated, dir: &Path) -> Result<(), CorpusError> {
    write_corpus(&generated.corpus, dir)?;
    write_names(&generated.names, dir)
}
