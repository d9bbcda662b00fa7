use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use tradelab::config::{render, ConfigError, KvConfig, KvMap};
use tradelab::corpus::read_corpus;
use tradelab::datagen::{generate_transactions, generate_world, write_costs, write_generated, WorldConfig};
use tradelab::econo::{run_spec, Covariates, RegressionSpec};
use tradelab::model::{cost_elasticity, profit_elasticity, solve_line_at, validate_params, Firm, ValidParams};
use tradelab::namematch::{dedup_suppliers, read_importer_names, read_name_file, write_clusters, CleanConfig, NameLists, Thresholds};
use tradelab::search::{scope_heatmap, simulate_panel, threshold_heatmap, HeatmapGrid, SearchProblem};
use tradelab::shocks::{build_shocks, read_shocks, read_world_prices, shock_stats, write_shocks, ShockConfig};

use crate::settings::{EvalSettings, HeatmapSettings, MarketSettings, ModelSettings, ShockSettings, SimSettings};
use crate::{Command, Common};

pub enum Failure {
    /// Bad flags or configuration; nothing was written.
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(m: impl Into<String>) -> Failure {
    Failure::Usage(m.into())
}

/// Config file, then extra files such as a regression spec, then `--set`
/// overrides, then `--seed` for the seed key when the command has one.
fn load(common: &Common, extra: &[&Path], seed_key: Option<&str>) -> Result<KvMap, Failure> {
    let mut kv = match &common.config {
        Some(p) => KvMap::from_file(p)?,
        None => KvMap::new(),
    };
    for p in extra {
        let more = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
        for line in more.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                kv.set(line)?;
            }
        }
    }
    for s in &common.set {
        kv.set(s)?;
    }
    if let (Some(key), Some(seed)) = (seed_key, common.seed) {
        kv.insert(key, &seed.to_string());
    }
    Ok(kv)
}

/// Applies the settings structs, rejects leftovers and returns the resolved
/// configuration as `key = value` entries.
fn resolve(kv: &mut KvMap, parts: &mut [(&str, &mut dyn KvConfig)]) -> Result<Vec<(String, String)>, Failure> {
    let mut entries = Vec::new();
    for (prefix, cfg) in parts.iter_mut() {
        cfg.apply_kv(kv, prefix)?;
    }
    kv.finish()?;
    for (prefix, cfg) in parts.iter() {
        cfg.kv_entries(prefix, &mut entries);
    }
    Ok(entries)
}

fn prepare(common: &Common, entries: &[(String, String)]) -> Result<(), Failure> {
    if common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global()
            .map_err(|e| Failure::Runtime(anyhow!("thread pool: {e}")))?;
    }
    let text = render(entries);
    eprint!("# resolved configuration\n{text}");
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    fs::write(common.out.join("resolved.conf"), text).context("writing resolved.conf")?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let p = dir.join(name);
    Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
}

fn params(m: &ModelSettings) -> Result<ValidParams<f64>, Failure> {
    validate_params(m.0.clone()).map_err(|e| usage(e.to_string()))
}

pub fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::ModelEval { common } => model_eval(&common),
        Command::Heatmap { common } => heatmap(&common),
        Command::SearchSim { common } => search_sim(&common),
        Command::Gen { common } => gen(&common),
        Command::Shocks {
            common,
            corpus,
            world_prices,
        } => shocks(&common, &corpus, world_prices.as_deref()),
        Command::Regress {
            common,
            spec,
            corpus,
            shocks,
            covariates,
        } => regress(&common, &spec, &corpus, shocks.as_deref(), covariates.as_deref()),
        Command::CleanNames {
            common,
            input,
            importers,
            aliases,
            suffixes,
            countries,
        } => clean_names(&common, &input, importers, aliases, suffixes, countries),
    }
}

fn model_eval(common: &Common) -> Result<(), Failure> {
    let mut kv = load(common, &[], None)?;
    let (mut model, mut eval) = (ModelSettings::default(), EvalSettings::default());
    let entries = resolve(&mut kv, &mut [("model", &mut model), ("eval", &mut eval)])?;
    let p = params(&model)?;
    if [&eval.z, &eval.xi, &eval.c].iter().any(|l| l.0.iter().any(|v| !(*v > 0.0 && v.is_finite()))) {
        return Err(usage("eval.z, eval.xi and eval.c must be positive"));
    }
    prepare(common, &entries)?;

    let mut w = csv::Writer::from_writer(create(&common.out, "lines.csv")?);
    w.write_record(["z", "xi", "c", "destination", "active", "quality", "quantity", "price", "profit"])
        .context("lines.csv")?;
    for &z in &eval.z.0 {
        for &xi in &eval.xi.0 {
            for &c in &eval.c.0 {
                let firm = Firm::new("eval", z, xi, c);
                for d in &p.destinations {
                    let s = solve_line_at(&p, d, &firm, c).map_err(|e| anyhow!("{e}"))?;
                    w.write_record([
                        z.to_string(),
                        xi.to_string(),
                        c.to_string(),
                        d.id.clone(),
                        s.active.to_string(),
                        s.quality.to_string(),
                        s.quantity.to_string(),
                        s.price.to_string(),
                        s.profit.to_string(),
                    ])
                    .context("lines.csv")?;
                }
            }
        }
    }
    w.flush().context("lines.csv")?;

    let mut w = csv::Writer::from_writer(create(&common.out, "elasticities.csv")?);
    w.write_record(["destination", "zeta", "cost_elasticity", "profit_elasticity"])
        .context("elasticities.csv")?;
    for d in &p.destinations {
        w.write_record([
            d.id.clone(),
            d.zeta.to_string(),
            cost_elasticity(&p, d).to_string(),
            profit_elasticity(&p, d).to_string(),
        ])
        .context("elasticities.csv")?;
    }
    w.flush().context("elasticities.csv")?;
    Ok(())
}

fn heatmap(common: &Common) -> Result<(), Failure> {
    let mut kv = load(common, &[], None)?;
    let (mut model, mut market, mut hm) = (ModelSettings::default(), MarketSettings::default(), HeatmapSettings::default());
    let entries = resolve(&mut kv, &mut [("model", &mut model), ("market", &mut market), ("heatmap", &mut hm)])?;
    let p = params(&model)?;
    let m = market.build().map_err(usage)?;
    let ok = |lo: f64, hi: f64| lo > 0.0 && hi >= lo && hi.is_finite();
    if hm.nz < 1 || hm.nxi < 1 || !ok(hm.z_low, hm.z_high) || !ok(hm.xi_low, hm.xi_high) || !(hm.c > 0.0) || !(hm.c_shift > -1.0) {
        return Err(usage("heatmap grid needs nz, nxi >= 1, 0 < low <= high, c > 0 and c_shift > -1"));
    }
    prepare(common, &entries)?;

    let grid = HeatmapGrid::log_spaced(hm.nz, (hm.z_low, hm.z_high), hm.nxi, (hm.xi_low, hm.xi_high));
    for (name, c) in [("scope_heatmap.csv", hm.c), ("scope_heatmap_shifted.csv", hm.c * (1.0 + hm.c_shift))] {
        let map = scope_heatmap(&p, &grid, c).map_err(|e| anyhow!("{e}"))?;
        map.write_csv(create(&common.out, name)?).context(name.to_string())?;
    }
    if hm.thresholds {
        let problem = SearchProblem::with_nodes(&p, &m, hm.quad_nodes);
        let t = threshold_heatmap(&problem, &grid).map_err(|e| anyhow!("{e}"))?;
        t.write_csv(create(&common.out, "threshold_heatmap.csv")?)
            .context("threshold_heatmap.csv")?;
    }
    Ok(())
}

fn search_sim(common: &Common) -> Result<(), Failure> {
    let mut kv = load(common, &[], Some("sim.seed"))?;
    let (mut model, mut market, mut sim) = (ModelSettings::default(), MarketSettings::default(), SimSettings::default());
    let entries = resolve(&mut kv, &mut [("model", &mut model), ("market", &mut market), ("sim", &mut sim)])?;
    let p = params(&model)?;
    let m = market.build().map_err(usage)?;
    let cfg = sim.build();
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    prepare(common, &entries)?;

    let panel = simulate_panel(&p, &m, &cfg).map_err(|e| anyhow!("{e}"))?;
    panel.write_csv(create(&common.out, "panel.csv")?).context("panel.csv")?;
    panel.write_firms_csv(create(&common.out, "firms.csv")?).context("firms.csv")?;
    Ok(())
}

fn gen(common: &Common) -> Result<(), Failure> {
    let mut kv = load(common, &[], Some("gen.seed"))?;
    let mut cfg = WorldConfig::default();
    let entries = resolve(&mut kv, &mut [("gen", &mut cfg)])?;
    let world = generate_world(&cfg).map_err(|e| usage(e.to_string()))?;
    prepare(common, &entries)?;

    let g = generate_transactions(&world);
    write_generated(&g, &common.out).map_err(|e| anyhow!("{e}"))?;
    write_costs(&g.costs, create(&common.out, "costs.csv")?).context("costs.csv")?;
    // The true semi-elasticities the pipeline should recover.
    let mut w = create(&common.out, "truth.csv")?;
    writeln!(w, "outcome,country,elasticity").context("truth.csv")?;
    writeln!(w, "import_quantity,,{}", world.import_elasticity()).context("truth.csv")?;
    for d in world.params.destinations.iter().skip(1) {
        writeln!(w, "export_quantity,{},{}", d.id, cost_elasticity(&world.params, d)).context("truth.csv")?;
    }
    w.flush().context("truth.csv")?;
    Ok(())
}

fn shocks(common: &Common, corpus: &Path, world_prices: Option<&Path>) -> Result<(), Failure> {
    let mut kv = load(common, &[], None)?;
    let mut s = ShockSettings::default();
    let entries = resolve(&mut kv, &mut [("shocks", &mut s)])?;
    if s.variants.0.is_empty() {
        return Err(usage("shocks.variants is empty"));
    }
    let imports_path = corpus.join("imports.csv");
    let imports = tradelab::corpus::read_imports(&imports_path).map_err(|e| anyhow!("{e}"))?;
    let world = match world_prices {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Some(read_world_prices(f, &p.display().to_string()).map_err(|e| anyhow!("{e}"))?)
        }
        None => None,
    };
    prepare(common, &entries)?;

    let cfg = ShockConfig {
        variants: s.variants.0.clone(),
        base: s.base,
        world_prices: world,
    };
    let out = build_shocks(&imports, &cfg).map_err(|e| anyhow!("{e}"))?;
    write_shocks(&out, create(&common.out, "shocks.csv")?).context("shocks.csv")?;
    let mut w = create(&common.out, "shock_stats.csv")?;
    shock_stats(&out, s.drop_zero_loo).write_csv(&mut w).context("shock_stats.csv")?;
    w.flush().context("shock_stats.csv")?;
    Ok(())
}

fn regress(
    common: &Common,
    spec_path: &Path,
    corpus: &Path,
    shocks: Option<&Path>,
    covariates: Option<&Path>,
) -> Result<(), Failure> {
    let mut kv = load(common, &[spec_path], None)?;
    let mut spec = RegressionSpec::default();
    let entries = resolve(&mut kv, &mut [("regress", &mut spec)])?;
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let corpus = read_corpus(corpus).map_err(|e| anyhow!("{e}"))?;
    let shocks = match shocks {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            read_shocks(f, &p.display().to_string()).map_err(|e| anyhow!("{e}"))?
        }
        None => {
            let cfg = ShockConfig {
                variants: vec![spec.variant],
                ..ShockConfig::default()
            };
            build_shocks(&corpus.imports, &cfg).map_err(|e| anyhow!("{e}"))?
        }
    };
    let cov = match covariates {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Some(Covariates::read(f, &p.display().to_string()).map_err(|e| anyhow!("{e}"))?)
        }
        None => None,
    };
    prepare(common, &entries)?;

    let r = run_spec(&corpus, &shocks, &spec, cov.as_ref()).map_err(|e| anyhow!("{e}"))?;
    let mut w = create(&common.out, "regression.txt")?;
    r.write_text(&mut w).context("regression.txt")?;
    w.flush().context("regression.txt")?;
    r.write_csv(create(&common.out, "coefficients.csv")?)
        .context("coefficients.csv")?;
    Ok(())
}

fn clean_names(
    common: &Common,
    input: &Path,
    importers: Option<PathBuf>,
    aliases: Option<PathBuf>,
    suffixes: Option<PathBuf>,
    countries: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut kv = load(common, &[], None)?;
    let mut thresholds = Thresholds::default();
    let entries = resolve(&mut kv, &mut [("names", &mut thresholds)])?;

    let mut lists = NameLists::default();
    if let Some(p) = &aliases {
        lists.aliases = NameLists::read_aliases(p).map_err(|e| anyhow!("{e}"))?;
    }
    if let Some(p) = &suffixes {
        lists.suffixes = NameLists::read_tokens(p).map_err(|e| anyhow!("{e}"))?;
    }
    if let Some(p) = &countries {
        lists.countries = NameLists::read_tokens(p).map_err(|e| anyhow!("{e}"))?;
    }
    let names = read_name_file(input).map_err(|e| anyhow!("{e}"))?;
    let importer_names = match &importers {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Some(read_importer_names(f, &p.display().to_string()).map_err(|e| anyhow!("{e}"))?)
        }
        None => None,
    };
    prepare(common, &entries)?;

    let cfg = CleanConfig { lists, thresholds };
    let rows = dedup_suppliers(&names, importer_names.as_ref(), &cfg);
    write_clusters(&rows, create(&common.out, "clusters.csv")?).context("clusters.csv")?;
    Ok(())
}
