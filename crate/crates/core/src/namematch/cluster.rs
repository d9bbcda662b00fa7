use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Deserialize;

use super::{bigram_multiset, clean_chars, high_similarity, score_bigrams, BigramFrequencies, NameError, NameLists, NameRecord, Thresholds};
use crate::numeric::CompensatedSum;

/// One row of the cleaning input.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct NameInput {
    pub firm_id: String,
    #[serde(rename = "supplier_raw")]
    pub raw: String,
    #[serde(rename = "value_usd")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CleanConfig {
    pub lists: NameLists,
    pub thresholds: Thresholds,
}

/// Cluster of one distinct `(firm, raw name)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRow {
    pub firm_id: String,
    pub raw: String,
    pub canonical: String,
    pub cluster_id: u64,
}

/// Matching name of a record. Names that normalize to nothing keep their
/// cleaned raw spelling so they stay apart from each other.
fn working_name(rec: &NameRecord) -> String {
    if rec.is_empty() {
        clean_chars(&rec.raw)
    } else {
        rec.working().to_string()
    }
}

struct FirmGroup<'a> {
    firm: &'a str,
    /// Distinct raw names with their working names.
    raws: Vec<(&'a str, String)>,
    values: HashMap<&'a str, Vec<f64>>,
}

fn group<'a>(inputs: &'a [NameInput], lists: &NameLists) -> Vec<FirmGroup<'a>> {
    let mut by: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for r in inputs {
        by.entry(&r.firm_id).or_default().entry(&r.raw).or_default().push(r.value);
    }
    by.into_par_iter()
        .map(|(firm, raws)| FirmGroup {
            firm,
            raws: raws.keys().map(|r| (*r, working_name(&NameRecord::new(r, lists)))).collect(),
            values: raws.into_iter().collect(),
        })
        .collect()
}

/// Connected components of the high-similarity graph over one firm's
/// working names, as `(canonical, members)`.
fn firm_clusters(names: &[(String, f64)], freq: &BigramFrequencies, t: &Thresholds) -> Vec<(String, Vec<usize>)> {
    let grams: Vec<_> = names.iter().map(|(n, _)| bigram_multiset(n)).collect();
    let mut uf = UnionFind::<usize>::new(names.len());
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            if high_similarity(score_bigrams(&grams[i], &grams[j], freq), t) {
                uf.union(i, j);
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..names.len() {
        comps.entry(uf.find(i)).or_default().push(i);
    }
    comps
        .into_values()
        .map(|m| {
            let best = *m
                .iter()
                .max_by(|&&a, &&b| names[a].1.total_cmp(&names[b].1).then(names[b].0.cmp(&names[a].0)))
                .expect("non-empty component");
            (names[best].0.clone(), m)
        })
        .collect()
}

/// Cleans supplier names within each importer. With `importers`
/// (firm id to firm name), suppliers resembling their importer take the
/// importer's name first. Output has one row per distinct `(firm, raw)`,
/// sorted, and does not depend on input order.
pub fn dedup_suppliers(
    inputs: &[NameInput],
    importers: Option<&HashMap<String, String>>,
    cfg: &CleanConfig,
) -> Vec<ClusterRow> {
    let mut groups = group(inputs, &cfg.lists);
    if let Some(imp) = importers {
        let freq = corpus_frequencies(&groups);
        for g in &mut groups {
            let Some(own) = imp.get(g.firm) else { continue };
            let rec = NameRecord::new(own, &cfg.lists);
            let own = working_name(&rec);
            let own_grams = bigram_multiset(&own);
            for (_, w) in &mut g.raws {
                if high_similarity(score_bigrams(&bigram_multiset(w), &own_grams, &freq), &cfg.thresholds) {
                    *w = own.clone();
                }
            }
        }
    }
    let freq = corpus_frequencies(&groups);

    let per_firm: Vec<Vec<(String, String, String)>> = groups
        .par_iter()
        .map(|g| {
            let mut totals: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for (raw, w) in &g.raws {
                totals.entry(w).or_default().extend(&g.values[raw]);
            }
            let nodes: Vec<(String, f64)> = totals
                .into_iter()
                .map(|(w, mut vs)| {
                    vs.sort_by(f64::total_cmp);
                    (w.to_string(), vs.into_iter().collect::<CompensatedSum>().value())
                })
                .collect();
            let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
            let mut canon = vec![String::new(); nodes.len()];
            for (c, members) in firm_clusters(&nodes, &freq, &cfg.thresholds) {
                for m in members {
                    canon[m] = c.clone();
                }
            }
            g.raws
                .iter()
                .map(|(raw, w)| (g.firm.to_string(), raw.to_string(), canon[index[w.as_str()]].clone()))
                .collect()
        })
        .collect();

    let mut rows: Vec<(String, String, String)> = per_firm.into_iter().flatten().collect();
    rows.sort();
    let mut ids: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for (f, _, c) in &rows {
        ids.insert((f, c), 0);
    }
    // Ids follow (firm, canonical) order, not first appearance.
    for (i, v) in ids.values_mut().enumerate() {
        *v = i as u64 + 1;
    }
    rows.iter()
        .map(|(f, r, c)| ClusterRow {
            firm_id: f.clone(),
            raw: r.clone(),
            canonical: c.clone(),
            cluster_id: ids[&(f.as_str(), c.as_str())],
        })
        .collect()
}

/// Frequencies over the distinct working names of every firm.
fn corpus_frequencies(groups: &[FirmGroup<'_>]) -> BigramFrequencies {
    let mut names: Vec<&str> = Vec::new();
    for g in groups {
        let mut own: Vec<&str> = g.raws.iter().map(|(_, w)| w.as_str()).collect();
        own.sort_unstable();
        own.dedup();
        names.extend(own);
    }
    BigramFrequencies::from_names(names)
}

fn csv_err(path: &str) -> impl Fn(csv::Error) -> NameError + '_ {
    move |e| NameError::Invalid {
        path: path.to_string(),
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    }
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, path: &str, want: &[&str]) -> Result<(), NameError> {
    let h = r.headers().map_err(csv_err(path))?;
    if h.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(NameError::Invalid {
            path: path.to_string(),
            line: 1,
            message: format!("expected header `{}`", want.join(",")),
        });
    }
    Ok(())
}

/// Header: `firm_id,supplier_raw,value_usd`.
pub fn read_name_inputs<R: Read>(input: R, path: &str) -> Result<Vec<NameInput>, NameError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, path, &["firm_id", "supplier_raw", "value_usd"])?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: NameInput = row.map_err(csv_err(path))?;
        if !row.value.is_finite() || row.value < 0.0 {
            return Err(NameError::Invalid {
                path: path.to_string(),
                line: out.len() as u64 + 2,
                message: format!("value_usd must be finite and non-negative, got {}", row.value),
            });
        }
        out.push(row);
    }
    Ok(out)
}

/// Header: `firm_id,firm_name`.
pub fn read_importer_names<R: Read>(input: R, path: &str) -> Result<HashMap<String, String>, NameError> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, path, &["firm_id", "firm_name"])?;
    let mut out = HashMap::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        out.insert(rec[0].to_string(), rec[1].to_string());
    }
    Ok(out)
}

pub fn read_name_file(path: &Path) -> Result<Vec<NameInput>, NameError> {
    let p = path.display().to_string();
    let f = std::fs::File::open(path).map_err(|e| NameError::Io {
        path: p.clone(),
        message: e.to_string(),
    })?;
    read_name_inputs(std::io::BufReader::new(f), &p)
}

/// Header: `firm_id,supplier_raw,supplier_canonical,cluster_id`.
pub fn write_clusters<W: Write>(rows: &[ClusterRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["firm_id", "supplier_raw", "supplier_canonical", "cluster_id"])?;
    for r in rows {
        w.write_record([r.firm_id.as_str(), &r.raw, &r.canonical, &r.cluster_id.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
