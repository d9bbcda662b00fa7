use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SearchError, SearchProblem, SupplierMarket, Threshold};
use crate::model::{Firm, ValidParams};
use crate::numeric::fnv1a64;
use crate::Scalar;

/// What happened to one firm in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchEvent<T> {
    pub searched: bool,
    pub draw: Option<T>,
    pub switched: bool,
    pub cost_paid: T,
}

/// One period of the search game: the firm decides on the basis of its
/// current supplier, pays `F` if it searches, then sees the draw and keeps
/// the better of the two suppliers.
pub fn step_period<T: Scalar, R: Rng + ?Sized>(
    params: &ValidParams<T>,
    market: &SupplierMarket<T>,
    firm: &Firm<T>,
    rng: &mut R,
) -> Result<(Firm<T>, SearchEvent<T>), SearchError> {
    SearchProblem::new(params, market).step(firm, rng)
}

impl<T: Scalar> SearchProblem<'_, T> {
    /// [`step_period`] reusing this problem's quadrature rule.
    pub fn step<R: Rng + ?Sized>(&self, firm: &Firm<T>, rng: &mut R) -> Result<(Firm<T>, SearchEvent<T>), SearchError> {
        let searched = self.should_search(firm, firm.c_current)?;
        Ok(apply_search(self.market, firm, searched, rng))
    }
}

fn apply_search<T: Scalar, R: Rng + ?Sized>(
    market: &SupplierMarket<T>,
    firm: &Firm<T>,
    searched: bool,
    rng: &mut R,
) -> (Firm<T>, SearchEvent<T>) {
    if !searched {
        let ev = SearchEvent {
            searched: false,
            draw: None,
            switched: false,
            cost_paid: T::zero(),
        };
        return (firm.clone(), ev);
    }
    let draw = market.sample(rng);
    let switched = draw < firm.c_current;
    let next = if switched { firm.with_supplier(draw) } else { firm.clone() };
    let ev = SearchEvent {
        searched: true,
        draw: Some(draw),
        switched,
        cost_paid: market.search_cost,
    };
    (next, ev)
}

/// Random stream owned by one firm: the global seed picks the key, the
/// firm id picks the stream, so results do not depend on iteration order.
pub fn firm_rng(seed: u64, firm_id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(firm_id.as_bytes()));
    rng
}

/// Size and seed of a simulated cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub n_firms: usize,
    pub horizon: u32,
    pub seed: u64,
    /// Bounds of the log-uniform draws of process productivity.
    pub z_range: (T, T),
    /// Bounds of the log-uniform draws of product productivity.
    pub xi_range: (T, T),
    pub heatmap_nz: usize,
    pub heatmap_nxi: usize,
    pub quad_nodes: usize,
}

impl<T: Scalar> Default for SimConfig<T> {
    fn default() -> Self {
        Self {
            n_firms: 1000,
            horizon: 200,
            seed: 1,
            z_range: (T::lit(0.2), T::lit(5.0)),
            xi_range: (T::lit(0.2), T::lit(5.0)),
            heatmap_nz: 100,
            heatmap_nxi: 100,
            quad_nodes: 64,
        }
    }
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::InvalidConfig(m));
        if self.n_firms < 1 {
            return bad("n_firms must be at least 1".into());
        }
        if self.horizon < 1 {
            return bad("horizon must be at least 1".into());
        }
        if self.quad_nodes < 1 {
            return bad("quad_nodes must be at least 1".into());
        }
        for (name, (lo, hi)) in [("z_range", self.z_range), ("xi_range", self.xi_range)] {
            if !(lo > T::zero() && hi >= lo && hi.is_finite()) {
                return bad(format!("{name} must satisfy 0 < low <= high"));
            }
        }
        Ok(())
    }

    /// Draws the cohort, every firm starting with the worst supplier.
    pub fn firms(&self, c_high: T) -> Vec<Firm<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let width = self.n_firms.to_string().len().max(6);
        let log_uniform = |rng: &mut ChaCha8Rng, (lo, hi): (T, T)| {
            let u: f64 = rng.random();
            (lo.ln() + (hi.ln() - lo.ln()) * T::lit(u)).exp()
        };
        (0..self.n_firms)
            .map(|i| {
                let z = log_uniform(&mut rng, self.z_range);
                let xi = log_uniform(&mut rng, self.xi_range);
                Firm::new(format!("F{:0width$}", i + 1), z, xi, c_high)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRow<T> {
    /// Index into [`Panel::firms`].
    pub firm: usize,
    pub period: u32,
    /// Supplier efficiency at the end of the period.
    pub c: T,
    pub searched: bool,
    pub switched: bool,
    pub search_cost: T,
    /// Total operating profit at `c`, search cost not deducted.
    pub profit: T,
    pub scope: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel<T> {
    /// Firms as they started (all at `c_high`).
    pub firms: Vec<Firm<T>>,
    pub thresholds: Vec<Threshold<T>>,
    pub destinations: Vec<String>,
    pub horizon: u32,
    /// Periods `1..=horizon` for each firm, firms in input order.
    pub rows: Vec<PanelRow<T>>,
}

impl<T: Scalar> Panel<T> {
    pub fn firm_rows(&self, i: usize) -> &[PanelRow<T>] {
        let t = self.horizon as usize;
        &self.rows[i * t..(i + 1) * t]
    }

    pub fn scope_label(&self, mask: u64) -> String {
        let ids: Vec<&str> = self
            .destinations
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, d)| d.as_str())
            .collect();
        ids.join("|")
    }

    /// Header: `firm_id,period,c,searched,switched,search_cost,profit,scope`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["firm_id", "period", "c", "searched", "switched", "search_cost", "profit", "scope"])?;
        for r in &self.rows {
            w.write_record([
                self.firms[r.firm].id.clone(),
                r.period.to_string(),
                r.c.to_string(),
                (r.searched as u8).to_string(),
                (r.switched as u8).to_string(),
                r.search_cost.to_string(),
                r.profit.to_string(),
                self.scope_label(r.scope),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Header: `firm_id,z,xi,threshold,c_final`; `threshold` is empty for
    /// firms that never search.
    pub fn write_firms_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["firm_id", "z", "xi", "threshold", "c_final"])?;
        for (i, f) in self.firms.iter().enumerate() {
            let last = self.firm_rows(i).last().map(|r| r.c).unwrap_or(f.c_current);
            w.write_record([
                f.id.clone(),
                f.z.to_string(),
                f.xi.to_string(),
                self.thresholds[i].value().map(|c| c.to_string()).unwrap_or_default(),
                last.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws the cohort described by `config` and simulates it.
pub fn simulate_panel<T: Scalar>(
    params: &ValidParams<T>,
    market: &SupplierMarket<T>,
    config: &SimConfig<T>,
) -> Result<Panel<T>, SearchError> {
    config.validate()?;
    simulate_firms(params, market, &config.firms(market.c_high), config)
}

/// Simulates the given firms for `config.horizon` periods. Every firm is
/// reset to `c_high` first.
///
/// Each firm's threshold is solved once; the period rule "search iff
/// `c >= c*`" is the same decision [`step_period`] takes, and the random
/// draws come from [`firm_rng`] in the same order.
pub fn simulate_firms<T: Scalar>(
    params: &ValidParams<T>,
    market: &SupplierMarket<T>,
    firms: &[Firm<T>],
    config: &SimConfig<T>,
) -> Result<Panel<T>, SearchError> {
    config.validate()?;
    let problem = SearchProblem::with_nodes(params, market, config.quad_nodes);
    let horizon = config.horizon;
    let firms: Vec<Firm<T>> = firms.iter().map(|f| f.with_supplier(market.c_high)).collect();

    let per_firm: Vec<(Threshold<T>, Vec<PanelRow<T>>)> = firms
        .par_iter()
        .enumerate()
        .map(|(idx, firm)| {
            let curve = problem.curve(firm)?;
            let threshold = problem.threshold_on_curve(&curve)?;
            let mut rng = firm_rng(config.seed, &firm.id);
            let mut current = firm.clone();
            let mut profit = curve.total(current.c_current);
            let mut scope = curve.scope_mask(current.c_current);
            let mut rows = Vec::with_capacity(horizon as usize);
            for period in 1..=horizon {
                let searched = threshold.searches_at(current.c_current);
                let (next, ev) = apply_search(market, &current, searched, &mut rng);
                if ev.switched {
                    profit = curve.total(next.c_current);
                    scope = curve.scope_mask(next.c_current);
                }
                current = next;
                rows.push(PanelRow {
                    firm: idx,
                    period,
                    c: current.c_current,
                    searched: ev.searched,
                    switched: ev.switched,
                    search_cost: ev.cost_paid,
                    profit,
                    scope,
                });
            }
            Ok((threshold, rows))
        })
        .collect::<Result<_, SearchError>>()?;

    let mut thresholds = Vec::with_capacity(firms.len());
    let mut rows = Vec::with_capacity(firms.len() * horizon as usize);
    for (t, r) in per_firm {
        thresholds.push(t);
        rows.extend(r);
    }
    Ok(Panel {
        firms,
        thresholds,
        destinations: params.destinations.iter().map(|d| d.id.clone()).collect(),
        horizon,
        rows,
    })
}
