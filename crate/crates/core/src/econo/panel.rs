use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use super::hdfe::dense_labels;
use super::spec::{CompiledRule, Outcome, RegressionSpec, Verdict};
use super::EconError;
use crate::corpus::Corpus;
use crate::numeric::CompensatedSum;
use crate::shocks::FirmShock;

/// Country-year numeric controls such as a log bilateral real exchange rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Covariates {
    pub names: Vec<String>,
    values: HashMap<(String, i32), Vec<f64>>,
}

impl Covariates {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            values: HashMap::new(),
        }
    }

    pub fn insert(&mut self, country: &str, year: i32, values: Vec<f64>) {
        assert_eq!(values.len(), self.names.len(), "one value per control");
        self.values.insert((country.to_string(), year), values);
    }

    pub fn get(&self, country: &str, year: i32) -> Option<&[f64]> {
        self.values.get(&(country.to_string(), year)).map(Vec::as_slice)
    }

    /// Header `country,year,<name>...`.
    pub fn read<R: Read>(input: R, path: &str) -> Result<Self, EconError> {
        let bad = |line: u64, message: String| EconError::Input {
            path: path.to_string(),
            line,
            message,
        };
        let mut r = csv::Reader::from_reader(input);
        let h = r.headers().map_err(|e| bad(1, e.to_string()))?.clone();
        if h.len() < 3 || &h[0] != "country" || &h[1] != "year" {
            return Err(bad(1, "expected header `country,year,<control>...`".into()));
        }
        let mut out = Covariates::new(h.iter().skip(2).map(str::to_string).collect());
        for (i, rec) in r.records().enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(|e| bad(line, e.to_string()))?;
            let year: i32 = rec[1].trim().parse().map_err(|_| bad(line, format!("bad year `{}`", &rec[1])))?;
            let vals: Vec<f64> = rec
                .iter()
                .skip(2)
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad(line, format!("bad number `{v}`"))))
                .collect::<Result<_, _>>()?;
            if vals.len() != out.names.len() || vals.iter().any(|v| !v.is_finite()) {
                return Err(bad(line, "wrong number of values or non-finite value".into()));
            }
            out.insert(&rec[0], year, vals);
        }
        Ok(out)
    }
}

/// Identity of a panel row: the cell and the shock year `t`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowKey {
    pub firm: String,
    pub product: String,
    pub country: String,
    pub year: i32,
}

/// Counts of candidate rows that did not make it into the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PanelDrops {
    pub missing_lag: usize,
    pub missing_outcome: usize,
    pub missing_shock: usize,
    pub missing_control: usize,
    pub partition: usize,
    /// Outside the partition for lack of a lookup entry.
    pub unknown: usize,
}

/// Outcome, regressors and labels of a regression sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RegPanel {
    pub y: Vec<f64>,
    /// Regressor names; the shock comes first.
    pub names: Vec<String>,
    /// Column-major regressors.
    pub x: Vec<Vec<f64>>,
    /// Cell and year labels.
    pub fe: Vec<Vec<u32>>,
    pub fe_names: Vec<String>,
    /// Firm and country labels.
    pub clusters: Vec<Vec<u32>>,
    pub rows: Vec<RowKey>,
    pub dropped: PanelDrops,
}

impl RegPanel {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Keeps the rows flagged true.
    pub fn retain(&mut self, keep: &[bool]) {
        fn filt<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| x.clone()).collect()
        }
        self.y = filt(&self.y, keep);
        self.x = self.x.iter().map(|c| filt(c, keep)).collect();
        self.fe = self.fe.iter().map(|c| filt(c, keep)).collect();
        self.clusters = self.clusters.iter().map(|c| filt(c, keep)).collect();
        self.rows = filt(&self.rows, keep);
    }
}

type Cell<'a> = (&'a str, &'a str, &'a str);

/// Yearly quantity by cell, summed over suppliers.
fn cell_quantities(corpus: &Corpus, imports: bool) -> BTreeMap<Cell<'_>, BTreeMap<i32, f64>> {
    let recs = if imports { &corpus.imports } else { &corpus.exports };
    let mut acc: BTreeMap<Cell<'_>, BTreeMap<i32, Vec<f64>>> = BTreeMap::new();
    for r in recs {
        acc.entry((&r.firm_id, &r.product, &r.country))
            .or_default()
            .entry(r.year)
            .or_default()
            .push(r.quantity);
    }
    acc.into_iter()
        .map(|(c, ys)| {
            let ys = ys
                .into_iter()
                .map(|(y, mut qs)| {
                    qs.sort_by(f64::total_cmp);
                    (y, qs.into_iter().collect::<CompensatedSum>().value())
                })
                .collect();
            (c, ys)
        })
        .collect()
}

/// Builds the regression sample: one row per cell and shock year `t` with
/// the outcome at `t + j` (quantities need the cell active in every year
/// from `t` to `t + j`), lags `t-1..t-L` of the log quantity, the shock
/// and its lags, and any controls. Rows missing a required value are
/// dropped and counted.
pub fn build_panel(
    corpus: &Corpus,
    shocks: &[FirmShock],
    spec: &RegressionSpec,
    covariates: Option<&Covariates>,
) -> Result<RegPanel, EconError> {
    spec.validate()?;
    let rule = CompiledRule::new(corpus, &spec.partition)?;
    let shock: HashMap<(&str, i32), f64> = shocks
        .iter()
        .filter(|s| s.variant == spec.variant)
        .map(|s| ((s.firm_id.as_str(), s.year), s.value))
        .collect();
    let cells = cell_quantities(corpus, spec.outcome.is_import());
    let (first, last) = corpus
        .years()
        .ok_or_else(|| EconError::EmptySample("corpus has no records".into()))?;
    let j = spec.horizon as i32;

    let mut names = vec!["shock".to_string()];
    names.extend((1..=spec.shock_lags).map(|l| format!("shock_lag{l}")));
    names.extend((1..=spec.outcome_lags).map(|l| format!("log_q_lag{l}")));
    if let Some(cov) = covariates {
        for n in &cov.names {
            names.push(n.clone());
            names.extend((1..=spec.control_lags).map(|l| format!("{n}_lag{l}")));
        }
    }
    let k = names.len();

    let mut y = Vec::new();
    let mut x: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut rows = Vec::new();
    let mut dropped = PanelDrops::default();
    for ((firm, product, country), series) in &cells {
        for t in first..=last {
            // Intensive rows exist where the outcome year is observed;
            // survival rows where the cell is active at t.
            let outcome = match spec.outcome {
                Outcome::ImportQuantity | Outcome::ExportQuantity => {
                    if t + j > last {
                        continue;
                    }
                    let Some(q) = series.get(&(t + j)) else { continue };
                    // The cell must trade in every year from t to t + j,
                    // which nests the samples of longer horizons.
                    if (t..t + j).any(|s| !series.contains_key(&s)) {
                        dropped.missing_outcome += 1;
                        continue;
                    }
                    q.ln()
                }
                Outcome::ExportSurvival => {
                    if !series.contains_key(&t) {
                        continue;
                    }
                    if t + j > last {
                        dropped.missing_outcome += 1;
                        continue;
                    }
                    if series.contains_key(&(t + j)) {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            let lags: Option<Vec<f64>> = (1..=spec.outcome_lags as i32).map(|l| series.get(&(t - l)).map(|q| q.ln())).collect();
            let Some(lags) = lags else {
                dropped.missing_lag += 1;
                continue;
            };
            let shocks: Option<Vec<f64>> = (0..=spec.shock_lags as i32).map(|l| shock.get(&(*firm, t - l)).copied()).collect();
            let Some(shocks) = shocks else {
                dropped.missing_shock += 1;
                continue;
            };
            let mut controls = Vec::new();
            if let Some(cov) = covariates {
                let mut ok = true;
                for (ci, _) in cov.names.iter().enumerate() {
                    for l in 0..=spec.control_lags as i32 {
                        match cov.get(country, t - l) {
                            Some(v) => controls.push(v[ci]),
                            None => ok = false,
                        }
                    }
                }
                if !ok {
                    dropped.missing_control += 1;
                    continue;
                }
            }
            match rule.verdict(firm, product, country, t) {
                Verdict::Keep => {}
                Verdict::Excluded => {
                    dropped.partition += 1;
                    continue;
                }
                Verdict::Unknown => {
                    dropped.unknown += 1;
                    continue;
                }
            }
            y.push(outcome);
            for (col, v) in x.iter_mut().zip(shocks.into_iter().chain(lags).chain(controls)) {
                col.push(v);
            }
            rows.push(RowKey {
                firm: firm.to_string(),
                product: product.to_string(),
                country: country.to_string(),
                year: t,
            });
        }
    }

    let cell_keys: Vec<(&str, &str, &str)> = rows.iter().map(|r| (r.firm.as_str(), r.product.as_str(), r.country.as_str())).collect();
    let years: Vec<i32> = rows.iter().map(|r| r.year).collect();
    let firms: Vec<&str> = rows.iter().map(|r| r.firm.as_str()).collect();
    let countries: Vec<&str> = rows.iter().map(|r| r.country.as_str()).collect();
    let fe = vec![dense_labels(&cell_keys).0, dense_labels(&years).0];
    let clusters = vec![dense_labels(&firms).0, dense_labels(&countries).0];
    Ok(RegPanel {
        y,
        names,
        x,
        fe,
        fe_names: vec!["cell".into(), "year".into()],
        clusters,
        rows,
        dropped,
    })
}
