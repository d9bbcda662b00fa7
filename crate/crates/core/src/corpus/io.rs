use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Classification, Corpus, CorpusError, CountryInfo, Direction, Employment, TradeRecord};
use crate::model::IncomeGroup;

/// File names inside a corpus directory.
pub struct CorpusFiles;

impl CorpusFiles {
    pub const IMPORTS: &'static str = "imports.csv";
    pub const EXPORTS: &'static str = "exports.csv";
    pub const COUNTRIES: &'static str = "countries.csv";
    pub const CLASSIFICATIONS: &'static str = "classifications.csv";
    pub const EMPLOYMENT: &'static str = "employment.csv";
}

#[derive(Serialize, Deserialize)]
struct ImportRow<'a> {
    year: i32,
    firm_id: &'a str,
    supplier_id: &'a str,
    product_hs6: &'a str,
    source_country: &'a str,
    value_usd: f64,
    quantity: f64,
}

#[derive(Serialize, Deserialize)]
struct ExportRow<'a> {
    year: i32,
    firm_id: &'a str,
    product_hs6: &'a str,
    dest_country: &'a str,
    value_usd: f64,
    quantity: f64,
}

#[derive(Serialize, Deserialize)]
struct CountryRow<'a> {
    country: &'a str,
    income_group: &'a str,
}

#[derive(Serialize, Deserialize)]
struct ClassRow<'a> {
    product_hs6: &'a str,
    scheme: &'a str,
    class: &'a str,
}

#[derive(Serialize, Deserialize)]
struct EmploymentRow<'a> {
    year: i32,
    firm_id: &'a str,
    sector: &'a str,
    employment: f64,
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn write_rows<S: Serialize>(path: &Path, header: &[&str], rows: impl Iterator<Item = S>) -> Result<(), CorpusError> {
    let csv_err = |source| CorpusError::Csv {
        path: path_str(path),
        source,
    };
    let f = File::create(path).map_err(|source| CorpusError::Io {
        path: path_str(path),
        source,
    })?;
    // Header written by hand so empty tables still carry one.
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::with_capacity(1 << 20, f));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CorpusError::Io {
        path: path_str(path),
        source,
    })
}

/// Writes the corpus tables into `dir` (created if missing). The employment
/// file is written only when present.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: path_str(dir),
        source,
    })?;
    write_rows(
        &dir.join(CorpusFiles::IMPORTS),
        &["year", "firm_id", "supplier_id", "product_hs6", "source_country", "value_usd", "quantity"],
        corpus.imports.iter().map(|r| ImportRow {
            year: r.year,
            firm_id: &r.firm_id,
            supplier_id: r.counterparty.as_deref().unwrap_or(""),
            product_hs6: &r.product,
            source_country: &r.country,
            value_usd: r.value,
            quantity: r.quantity,
        }),
    )?;
    write_rows(
        &dir.join(CorpusFiles::EXPORTS),
        &["year", "firm_id", "product_hs6", "dest_country", "value_usd", "quantity"],
        corpus.exports.iter().map(|r| ExportRow {
            year: r.year,
            firm_id: &r.firm_id,
            product_hs6: &r.product,
            dest_country: &r.country,
            value_usd: r.value,
            quantity: r.quantity,
        }),
    )?;
    write_rows(
        &dir.join(CorpusFiles::COUNTRIES),
        &["country", "income_group"],
        corpus.countries.iter().map(|c| CountryRow {
            country: &c.country,
            income_group: c.income_group.as_str(),
        }),
    )?;
    write_rows(
        &dir.join(CorpusFiles::CLASSIFICATIONS),
        &["product_hs6", "scheme", "class"],
        corpus.classifications.iter().map(|c| ClassRow {
            product_hs6: &c.product,
            scheme: c.scheme.as_str(),
            class: c.class.as_str(),
        }),
    )?;
    if let Some(emp) = &corpus.employment {
        write_rows(
            &dir.join(CorpusFiles::EMPLOYMENT),
            &["year", "firm_id", "sector", "employment"],
            emp.iter().map(|e| EmploymentRow {
                year: e.year,
                firm_id: &e.firm_id,
                sector: &e.sector,
                employment: e.employment,
            }),
        )?;
    }
    Ok(())
}

fn read_rows<T, F>(path: &Path, mut f: F) -> Result<Vec<T>, CorpusError>
where
    F: for<'a> FnMut(&'a csv::StringRecord, &'a csv::StringRecord) -> Result<T, String>,
{
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path_str(path),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BufReader::with_capacity(1 << 20, file));
    let headers = rdr
        .headers()
        .map_err(|source| CorpusError::Csv {
            path: path_str(path),
            source,
        })?
        .clone();
    let mut out = Vec::new();
    let mut rec = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                out.push(f(&rec, &headers).map_err(|message| CorpusError::Invalid {
                    path: path_str(path),
                    line,
                    message,
                })?);
            }
            Err(source) => {
                return Err(CorpusError::Csv {
                    path: path_str(path),
                    source,
                })
            }
        }
    }
    Ok(out)
}

fn de<'a, T: Deserialize<'a>>(rec: &'a csv::StringRecord, headers: &'a csv::StringRecord) -> Result<T, String> {
    rec.deserialize(Some(headers)).map_err(|e| e.to_string())
}

fn checked(r: TradeRecord) -> Result<TradeRecord, String> {
    r.check()?;
    Ok(r)
}

pub fn read_imports(path: &Path) -> Result<Vec<TradeRecord>, CorpusError> {
    read_rows(path, |rec, h| {
        let r: ImportRow = de(rec, h)?;
        checked(TradeRecord {
            year: r.year,
            firm_id: r.firm_id.to_string(),
            counterparty: Some(r.supplier_id.to_string()),
            product: r.product_hs6.to_string(),
            country: r.source_country.to_string(),
            value: r.value_usd,
            quantity: r.quantity,
            direction: Direction::Import,
        })
    })
}

pub fn read_exports(path: &Path) -> Result<Vec<TradeRecord>, CorpusError> {
    read_rows(path, |rec, h| {
        let r: ExportRow = de(rec, h)?;
        checked(TradeRecord {
            year: r.year,
            firm_id: r.firm_id.to_string(),
            counterparty: None,
            product: r.product_hs6.to_string(),
            country: r.dest_country.to_string(),
            value: r.value_usd,
            quantity: r.quantity,
            direction: Direction::Export,
        })
    })
}

/// Reads a corpus directory. Missing `countries.csv`, `classifications.csv`
/// or `employment.csv` are treated as absent lookups.
pub fn read_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    let p = |name: &str| -> PathBuf { dir.join(name) };
    let countries = if p(CorpusFiles::COUNTRIES).exists() {
        read_rows(&p(CorpusFiles::COUNTRIES), |rec, h| {
            let r: CountryRow = de(rec, h)?;
            Ok(CountryInfo {
                country: r.country.to_string(),
                income_group: r.income_group.parse::<IncomeGroup>()?,
            })
        })?
    } else {
        Vec::new()
    };
    let classifications = if p(CorpusFiles::CLASSIFICATIONS).exists() {
        read_rows(&p(CorpusFiles::CLASSIFICATIONS), |rec, h| {
            let r: ClassRow = de(rec, h)?;
            Ok(Classification {
                product: r.product_hs6.to_string(),
                scheme: r.scheme.parse()?,
                class: r.class.parse()?,
            })
        })?
    } else {
        Vec::new()
    };
    let employment = if p(CorpusFiles::EMPLOYMENT).exists() {
        Some(read_rows(&p(CorpusFiles::EMPLOYMENT), |rec, h| {
            let r: EmploymentRow = de(rec, h)?;
            Ok(Employment {
                year: r.year,
                firm_id: r.firm_id.to_string(),
                sector: r.sector.to_string(),
                employment: r.employment,
            })
        })?)
    } else {
        None
    };
    Ok(Corpus {
        imports: read_imports(&p(CorpusFiles::IMPORTS))?,
        exports: read_exports(&p(CorpusFiles::EXPORTS))?,
        countries,
        classifications,
        employment,
    })
}
