use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use super::{FirmShock, ShockError, ShockVariant};
use crate::config::KvValue;
use crate::corpus::{Direction, TradeRecord};
use crate::numeric::CompensatedSum;

const NONE: u32 = u32::MAX;
/// `[firm, supplier, product, source]` as interned ids; `NONE` marks a
/// dimension the key does not use.
type Cell = [u32; 4];

/// Where import shares are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShareBase {
    /// Year `t - 1` for the year-`t` shock.
    #[default]
    Lagged,
    /// One base year for every shock after it.
    Fixed(i32),
}

impl KvValue for ShareBase {
    fn parse_kv(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "lagged" {
            return Ok(ShareBase::Lagged);
        }
        s.strip_prefix("fixed:")
            .and_then(|y| y.trim().parse().ok())
            .map(ShareBase::Fixed)
            .ok_or_else(|| format!("expected `lagged` or `fixed:<year>`, got `{s}`"))
    }

    fn render_kv(&self) -> String {
        match self {
            ShareBase::Lagged => "lagged".into(),
            ShareBase::Fixed(y) => format!("fixed:{y}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShockConfig {
    pub variants: Vec<ShockVariant>,
    pub base: ShareBase,
    /// Rest-of-world (product, source) prices used by the country-product
    /// variant instead of the customs unit values.
    pub world_prices: Option<Vec<PriceRow>>,
}

/// Identity of a price series. Leave-one-out rows carry the focal firm.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShockKey {
    pub firm: Option<String>,
    pub supplier: Option<String>,
    pub product: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceRow {
    pub key: ShockKey,
    pub year: i32,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRow {
    pub key: ShockKey,
    pub year: i32,
    /// `log p_t - log p_{t-1}`.
    pub shift: f64,
}

/// Result of one weighted sum of shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftShare {
    pub value: f64,
    pub n_links: usize,
    pub imputed_share: f64,
}

/// `Σ_k w_k Δlog p_k` with missing shifts counted as zero and their weight
/// reported in `imputed_share`.
pub fn shift_share<K>(weights: &[(K, f64)], mut shift: impl FnMut(&K) -> Option<f64>) -> ShiftShare {
    let mut value = CompensatedSum::new();
    let mut imputed = CompensatedSum::new();
    let mut n_links = 0;
    for (k, w) in weights {
        match shift(k) {
            Some(s) => {
                value.add(w * s);
                n_links += 1;
            }
            None => imputed.add(*w),
        }
    }
    ShiftShare {
        value: value.value(),
        n_links,
        imputed_share: imputed.value().clamp(0.0, 1.0),
    }
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn id(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.names.len() as u32;
        self.ids.insert(s.to_string(), i);
        self.names.push(s.to_string());
        i
    }

    fn get(&self, s: &str) -> Option<u32> {
        self.ids.get(s).copied()
    }

    fn name(&self, i: u32) -> Option<String> {
        (i != NONE).then(|| self.names[i as usize].clone())
    }
}

#[derive(Clone, Copy, Default)]
struct Flow {
    value: f64,
    quantity: f64,
}

impl Flow {
    fn price(self) -> f64 {
        self.value / self.quantity
    }
}

struct Engine {
    firms: Interner,
    suppliers: Interner,
    products: Interner,
    sources: Interner,
    links: BTreeMap<(Cell, i32), Flow>,
    supplier_cells: HashMap<(Cell, i32), (Flow, usize)>,
    country_cells: HashMap<(Cell, i32), Flow>,
    firm_years: BTreeMap<(u32, i32), Vec<(Cell, Flow)>>,
    world: Option<HashMap<(Cell, i32), f64>>,
    max_year: i32,
}

fn weight_cell(variant: ShockVariant, link: Cell) -> Cell {
    match variant {
        ShockVariant::SupplierFirm => link,
        ShockVariant::SupplierAverage | ShockVariant::SupplierLeaveOneOut => [NONE, link[1], link[2], link[3]],
        ShockVariant::CountryProduct => [NONE, NONE, link[2], link[3]],
    }
}

impl Engine {
    fn new(records: &[TradeRecord], world: Option<&[PriceRow]>) -> Result<Self, ShockError> {
        let mut e = Engine {
            firms: Interner::default(),
            suppliers: Interner::default(),
            products: Interner::default(),
            sources: Interner::default(),
            links: BTreeMap::new(),
            supplier_cells: HashMap::new(),
            country_cells: HashMap::new(),
            firm_years: BTreeMap::new(),
            world: None,
            max_year: i32::MIN,
        };
        // Interning follows sorted names so ids, and with them every
        // accumulation order, do not depend on record order.
        let mut rows: Vec<(&str, &str, &str, &str, i32, f64, f64)> = Vec::with_capacity(records.len());
        for r in records {
            if r.direction != Direction::Import {
                return Err(ShockError::NotImports);
            }
            let sup = r.counterparty.as_deref().ok_or(ShockError::NotImports)?;
            rows.push((&r.firm_id, sup, &r.product, &r.country, r.year, r.value, r.quantity));
        }
        rows.sort_by(|a, b| {
            (a.0, a.1, a.2, a.3, a.4)
                .cmp(&(b.0, b.1, b.2, b.3, b.4))
                .then(a.5.total_cmp(&b.5))
                .then(a.6.total_cmp(&b.6))
        });
        for (dim, int) in [&mut e.firms, &mut e.suppliers, &mut e.products, &mut e.sources].into_iter().enumerate() {
            let mut v: Vec<&str> = rows
                .iter()
                .map(|r| match dim {
                    0 => r.0,
                    1 => r.1,
                    2 => r.2,
                    _ => r.3,
                })
                .collect();
            v.sort_unstable();
            v.dedup();
            for s in v {
                int.id(s);
            }
        }
        if let Some(w) = world {
            for p in w {
                e.products.id(&p.key.product);
                e.sources.id(&p.key.source);
            }
        }

        let mut acc: BTreeMap<(Cell, i32), (CompensatedSum, CompensatedSum)> = BTreeMap::new();
        for (f, s, p, c, y, v, q) in &rows {
            let cell = [
                e.firms.get(f).expect("interned"),
                e.suppliers.get(s).expect("interned"),
                e.products.get(p).expect("interned"),
                e.sources.get(c).expect("interned"),
            ];
            let slot = acc.entry((cell, *y)).or_default();
            slot.0.add(*v);
            slot.1.add(*q);
            e.max_year = e.max_year.max(*y);
        }
        let mut sup_acc: BTreeMap<(Cell, i32), (CompensatedSum, CompensatedSum, usize)> = BTreeMap::new();
        let mut cp_acc: BTreeMap<(Cell, i32), (CompensatedSum, CompensatedSum)> = BTreeMap::new();
        for ((cell, y), (v, q)) in acc {
            let flow = Flow {
                value: v.value(),
                quantity: q.value(),
            };
            e.links.insert((cell, y), flow);
            e.firm_years.entry((cell[0], y)).or_default().push((cell, flow));
            let s = sup_acc.entry((weight_cell(ShockVariant::SupplierAverage, cell), y)).or_default();
            s.0.add(flow.value);
            s.1.add(flow.quantity);
            s.2 += 1;
            let c = cp_acc.entry((weight_cell(ShockVariant::CountryProduct, cell), y)).or_default();
            c.0.add(flow.value);
            c.1.add(flow.quantity);
        }
        e.supplier_cells = sup_acc
            .into_iter()
            .map(|(k, (v, q, n))| {
                (
                    k,
                    (
                        Flow {
                            value: v.value(),
                            quantity: q.value(),
                        },
                        n,
                    ),
                )
            })
            .collect();
        e.country_cells = cp_acc
            .into_iter()
            .map(|(k, (v, q))| {
                (
                    k,
                    Flow {
                        value: v.value(),
                        quantity: q.value(),
                    },
                )
            })
            .collect();
        if let Some(w) = world {
            let mut m = HashMap::new();
            for p in w {
                let cell = [NONE, NONE, e.products.id(&p.key.product), e.sources.id(&p.key.source)];
                m.insert((cell, p.year), p.price);
            }
            e.world = Some(m);
        }
        Ok(e)
    }

    fn key_of(&self, cell: Cell) -> ShockKey {
        ShockKey {
            firm: self.firms.name(cell[0]),
            supplier: self.suppliers.name(cell[1]),
            product: self.products.name(cell[2]).unwrap_or_default(),
            source: self.sources.name(cell[3]).unwrap_or_default(),
        }
    }

    /// Price of the variant's series for `firm` at `year`.
    fn price(&self, variant: ShockVariant, firm: u32, cell: Cell, year: i32) -> Option<f64> {
        let p = match variant {
            ShockVariant::SupplierFirm => self.links.get(&(cell, year))?.price(),
            ShockVariant::SupplierAverage => self.supplier_cells.get(&(cell, year))?.0.price(),
            ShockVariant::SupplierLeaveOneOut => {
                let (all, n) = *self.supplier_cells.get(&(cell, year))?;
                let own = self.links.get(&([firm, cell[1], cell[2], cell[3]], year));
                match own {
                    None => all.price(),
                    Some(_) if n < 2 => return None,
                    Some(o) => (all.value - o.value) / (all.quantity - o.quantity),
                }
            }
            ShockVariant::CountryProduct => match &self.world {
                Some(w) => *w.get(&(cell, year))?,
                None => self.country_cells.get(&(cell, year))?.price(),
            },
        };
        (p.is_finite() && p > 0.0).then_some(p)
    }

    fn shift(&self, variant: ShockVariant, firm: u32, cell: Cell, year: i32) -> Option<f64> {
        let now = self.price(variant, firm, cell, year)?;
        let before = self.price(variant, firm, cell, year - 1)?;
        Some(now.ln() - before.ln())
    }

    fn weights(&self, variant: ShockVariant, firm: u32, base: i32) -> Option<Vec<(Cell, f64)>> {
        let links = self.firm_years.get(&(firm, base))?;
        let mut by: BTreeMap<Cell, CompensatedSum> = BTreeMap::new();
        let mut total = CompensatedSum::new();
        for (cell, flow) in links {
            by.entry(weight_cell(variant, *cell)).or_default().add(flow.value);
            total.add(flow.value);
        }
        let total = total.value();
        Some(by.into_iter().map(|(k, v)| (k, v.value() / total)).collect())
    }

    fn shock(&self, variant: ShockVariant, firm: u32, base: i32, year: i32) -> Option<FirmShock> {
        let w = self.weights(variant, firm, base)?;
        let s = shift_share(&w, |cell| self.shift(variant, firm, *cell, year));
        Some(FirmShock {
            firm_id: self.firms.names[firm as usize].clone(),
            year,
            variant,
            value: s.value,
            n_links: s.n_links,
            imputed_share: s.imputed_share,
        })
    }
}

/// Unit values `Σ value / Σ quantity` of the variant's price series. For the
/// leave-one-out variant there is one row per buying firm, computed from the
/// other buyers only; cells with a single buyer produce no row.
pub fn unit_values(records: &[TradeRecord], variant: ShockVariant) -> Result<Vec<PriceRow>, ShockError> {
    let e = Engine::new(records, None)?;
    let mut out = Vec::new();
    match variant {
        ShockVariant::SupplierFirm => {
            for ((cell, y), f) in &e.links {
                out.push(PriceRow {
                    key: e.key_of(*cell),
                    year: *y,
                    price: f.price(),
                });
            }
        }
        ShockVariant::SupplierAverage | ShockVariant::CountryProduct => {
            let mut rows: Vec<(ShockKey, i32, f64)> = if variant == ShockVariant::SupplierAverage {
                e.supplier_cells.iter().map(|((c, y), (f, _))| (e.key_of(*c), *y, f.price())).collect()
            } else {
                e.country_cells.iter().map(|((c, y), f)| (e.key_of(*c), *y, f.price())).collect()
            };
            rows.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
            out.extend(rows.into_iter().map(|(key, year, price)| PriceRow { key, year, price }));
        }
        ShockVariant::SupplierLeaveOneOut => {
            for ((cell, y), _) in &e.links {
                let sc = weight_cell(variant, *cell);
                if let Some(price) = e.price(variant, cell[0], sc, *y) {
                    let mut key = e.key_of(sc);
                    key.firm = e.firms.name(cell[0]);
                    out.push(PriceRow { key, year: *y, price });
                }
            }
            out.sort_by(|a, b| (&a.key, a.year).cmp(&(&b.key, b.year)));
        }
    }
    Ok(out)
}

/// Year-on-year log differences; a key-year without the previous year's
/// price has no row.
pub fn price_shifts(prices: &[PriceRow]) -> Vec<ShiftRow> {
    let by: BTreeMap<(&ShockKey, i32), f64> = prices.iter().map(|p| ((&p.key, p.year), p.price)).collect();
    by.iter()
        .filter_map(|((k, y), p)| {
            let prev = by.get(&(*k, y - 1))?;
            Some(ShiftRow {
                key: (*k).clone(),
                year: *y,
                shift: p.ln() - prev.ln(),
            })
        })
        .collect()
}

fn base_year(base: ShareBase, year: i32) -> i32 {
    match base {
        ShareBase::Lagged => year - 1,
        ShareBase::Fixed(y) => y,
    }
}

/// Firm's import value shares by the variant's key in `year - 1`.
pub fn lagged_shares(
    records: &[TradeRecord],
    firm: &str,
    year: i32,
    variant: ShockVariant,
) -> Result<Vec<(ShockKey, f64)>, ShockError> {
    let e = Engine::new(records, None)?;
    let no_base = || ShockError::NoBaseYear {
        firm: firm.to_string(),
        year: year - 1,
    };
    let f = e.firms.get(firm).ok_or_else(no_base)?;
    let w = e.weights(variant, f, year - 1).ok_or_else(no_base)?;
    Ok(w.into_iter().map(|(c, s)| (e.key_of(c), s)).collect())
}

/// Shock of one firm-year with lagged shares.
pub fn firm_shock(records: &[TradeRecord], firm: &str, year: i32, variant: ShockVariant) -> Result<FirmShock, ShockError> {
    let e = Engine::new(records, None)?;
    let no_base = || ShockError::NoBaseYear {
        firm: firm.to_string(),
        year: year - 1,
    };
    let f = e.firms.get(firm).ok_or_else(no_base)?;
    e.shock(variant, f, year - 1, year).ok_or_else(no_base)
}

/// Base-year import shares of one firm for the shock of `year`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmShares {
    pub firm_id: String,
    pub year: i32,
    pub weights: Vec<(ShockKey, f64)>,
}

/// Share vectors for every firm-year that has a base year.
pub fn share_table(records: &[TradeRecord], variant: ShockVariant, base: ShareBase) -> Result<Vec<FirmShares>, ShockError> {
    let e = Engine::new(records, None)?;
    let mut out = Vec::new();
    for (f, name) in e.firms.names.iter().enumerate() {
        let min_year = e.firm_years.keys().map(|(_, y)| *y).min().unwrap_or(0);
        for year in (min_year + 1)..=e.max_year {
            let b = base_year(base, year);
            if b >= year {
                continue;
            }
            if let Some(w) = e.weights(variant, f as u32, b) {
                out.push(FirmShares {
                    firm_id: name.clone(),
                    year,
                    weights: w.into_iter().map(|(c, s)| (e.key_of(c), s)).collect(),
                });
            }
        }
    }
    Ok(out)
}

/// Shocks for every firm-year with a base year, each requested variant.
/// Output is sorted by firm, year and variant.
pub fn build_shocks(records: &[TradeRecord], config: &ShockConfig) -> Result<Vec<FirmShock>, ShockError> {
    let e = Engine::new(records, config.world_prices.as_deref())?;
    let mut variants = config.variants.clone();
    variants.sort();
    variants.dedup();
    let mut out = Vec::new();
    let mut firm_ids: Vec<u32> = e.firm_years.keys().map(|(f, _)| *f).collect();
    firm_ids.dedup();
    let min_year = e.firm_years.keys().map(|(_, y)| *y).min().unwrap_or(0);
    for f in firm_ids {
        for year in (min_year + 1)..=e.max_year {
            let base = base_year(config.base, year);
            if base >= year {
                continue;
            }
            for &v in &variants {
                if let Some(s) = e.shock(v, f, base, year) {
                    out.push(s);
                }
            }
        }
    }
    out.sort_by(|a, b| (&a.firm_id, a.year, a.variant).cmp(&(&b.firm_id, b.year, b.variant)));
    Ok(out)
}

/// Header: `firm_id,year,variant,value,n_links,imputed_share`.
pub fn write_shocks<W: Write>(shocks: &[FirmShock], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["firm_id", "year", "variant", "value", "n_links", "imputed_share"])?;
    for s in shocks {
        w.write_record([
            s.firm_id.clone(),
            s.year.to_string(),
            s.variant.to_string(),
            s.value.to_string(),
            s.n_links.to_string(),
            s.imputed_share.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn csv_rows<R: Read>(input: R, path: &str, want: &[&str]) -> Result<Vec<(u64, Vec<String>)>, ShockError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let invalid = |line: u64, message: String| ShockError::Invalid {
        path: path.to_string(),
        line,
        message,
    };
    let headers = rdr.headers().map_err(|e| invalid(1, e.to_string()))?.clone();
    let idx: Vec<usize> = want
        .iter()
        .map(|w| headers.iter().position(|h| h == *w).ok_or_else(|| invalid(1, format!("missing column `{w}`"))))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| invalid(0, e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        out.push((line, idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect()));
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(s: &str, path: &str, line: u64, what: &str) -> Result<T, ShockError> {
    s.parse().map_err(|_| ShockError::Invalid {
        path: path.to_string(),
        line,
        message: format!("bad {what} `{s}`"),
    })
}

pub fn read_shocks<R: Read>(input: R, path: &str) -> Result<Vec<FirmShock>, ShockError> {
    let rows = csv_rows(input, path, &["firm_id", "year", "variant", "value", "n_links", "imputed_share"])?;
    rows.into_iter()
        .map(|(line, r)| {
            Ok(FirmShock {
                firm_id: r[0].clone(),
                year: parse(&r[1], path, line, "year")?,
                variant: r[2].parse().map_err(|message| ShockError::Invalid {
                    path: path.to_string(),
                    line,
                    message,
                })?,
                value: parse(&r[3], path, line, "value")?,
                n_links: parse(&r[4], path, line, "n_links")?,
                imputed_share: parse(&r[5], path, line, "imputed_share")?,
            })
        })
        .collect()
}

/// Rest-of-world prices with header `product_hs6,source_country,year,price`.
pub fn read_world_prices<R: Read>(input: R, path: &str) -> Result<Vec<PriceRow>, ShockError> {
    let rows = csv_rows(input, path, &["product_hs6", "source_country", "year", "price"])?;
    rows.into_iter()
        .map(|(line, r)| {
            Ok(PriceRow {
                key: ShockKey {
                    firm: None,
                    supplier: None,
                    product: r[0].clone(),
                    source: r[1].clone(),
                },
                year: parse(&r[2], path, line, "year")?,
                price: parse(&r[3], path, line, "price")?,
            })
        })
        .collect()
}
