//! Acceptance run: one line per criterion, nonzero exit if any fails.
//! Criteria are checked in full even after an earlier one fails.

mod common;

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{random_line, rel, rng};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use tradelab::corpus::{Direction, TradeRecord};
use tradelab::datagen::names::{company_name, corrupt_name, CorruptionConfig};
use tradelab::datagen::{generate_transactions, generate_world, WorldConfig};
use tradelab::econo::*;
use tradelab::model::*;
use tradelab::namematch::*;
use tradelab::search::*;
use tradelab::shocks::*;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn gauss(r: &mut rand_chacha::ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

fn example() -> ValidParams<f64> {
    validate_params(ModelParams::two_destination_example()).unwrap()
}

fn closed_form() -> Check {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = 0.0_f64;
    let draws = 200;
    for _ in 0..draws {
        let (p, f) = random_line(&mut r, 0.85);
        let d = &p.destinations[0];
        let a = solve_line(&p, d, &f).map_err(|e| e.to_string())?;
        let b = brute_force_profit_max(&p, d, &f).map_err(|e| e.to_string())?;
        for (x, y) in [(a.quality, b.quality), (a.quantity, b.quantity), (a.price, b.price), (a.profit, b.profit)] {
            worst = worst.max(rel(x, y));
        }
    }
    let t = start.elapsed();
    ensure(worst <= 1e-6, format!("max relative gap {worst:.2e}"))?;
    ensure(t < Duration::from_secs(60), format!("took {t:?}"))?;
    Ok(format!("{draws} draws, max relative gap {worst:.1e}, {:.1}s", t.as_secs_f64()))
}

fn two_line(rho: f64, zeta: f64) -> ModelParams<f64> {
    ModelParams {
        rho,
        alpha: 0.5,
        wage: 1.0,
        quality_cost: 1.0,
        discount: 0.9,
        destinations: vec![
            Destination::domestic("D", 0.0, 10.0, 1.0),
            Destination::new("X", zeta, 10.0, 1.0, 0.0, IncomeGroup::Advanced),
        ],
    }
}

fn elasticities() -> Check {
    let mut r = rng(102);
    let h: f64 = 1e-5;
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let (p, f) = random_line(&mut r, 0.85);
        let d = &p.destinations[0];
        let c = f.c_current;
        let q = |c: f64| solve_line_at(&p, d, &f, c).map(|s| s.quantity).map_err(|e| e.to_string());
        let fd = (q(c * h.exp())?.ln() - q(c * (-h).exp())?.ln()) / (2.0 * h);
        let e = cost_elasticity(&p, d);
        worst = worst.max((fd - e).abs() / e.abs().max(1.0));
    }
    ensure(worst <= 1e-4, format!("finite-difference gap {worst:.2e}"))?;
    for rho in [1.5, 2.0, 3.0, 4.0] {
        let mut last = 0.0;
        for i in 0..20 {
            let zeta = i as f64 / 20.0 / (rho - 1.0);
            let raw = two_line(rho, zeta);
            let e = cost_elasticity(&raw, &raw.destinations[1]).abs();
            ensure(e > last, format!("|elasticity| not increasing at rho {rho}, zeta {zeta}"))?;
            last = e;
        }
    }
    Ok(format!("50 draws within {worst:.1e}, increasing in zeta on 4 grids"))
}

fn soc_straddle() -> Check {
    let mut r = rng(103);
    let mut accepted = 0;
    let n = 50;
    for i in 0..n {
        let rho = r.random_range(1.5..5.0);
        // (rho - 1) zeta on either side of one, away from the boundary itself
        let share = if i % 2 == 0 {
            r.random_range(0.3..0.95)
        } else {
            r.random_range(1.05..2.0)
        };
        let raw = two_line(rho, share / (rho - 1.0));
        let firm = Firm::new("f", r.random_range(0.5..2.0), r.random_range(0.5..2.0), r.random_range(0.5..2.0));
        let bounded = brute_force_profit_max(&raw, &raw.destinations[1], &firm).is_ok();
        let valid = validate_params(raw).is_ok();
        ensure(valid == bounded, format!("set {i}: validate {valid}, oracle bounded {bounded}"))?;
        accepted += valid as usize;
    }
    ensure(accepted > 0 && accepted < n, format!("{accepted}/{n} accepted, nothing straddles"))?;
    Ok(format!("{n} sets, {accepted} accepted, all agree with the oracle"))
}

fn thresholds_and_panel() -> Check {
    let p = example();
    let firm = Firm::new("a", 2.0, 2.0, 2.0);
    let mut worst = 0.0_f64;
    let mut prev = f64::NEG_INFINITY;
    let mut never = false;
    let mut found = 0;
    for i in 0..20 {
        let f = 0.01 * 2.5f64.powi(i);
        let m = SupplierMarket::uniform(0.5, 2.0, f).unwrap();
        match search_threshold(&p, &m, &firm).map_err(|e| e.to_string())? {
            Threshold::At { c, residual } => {
                ensure(!never, format!("search resumes at F = {f}"))?;
                ensure(c >= prev, format!("threshold falls at F = {f}"))?;
                worst = worst.max(residual.abs());
                prev = c;
                found += 1;
            }
            Threshold::NeverSearches => never = true,
        }
    }
    ensure(worst <= 1e-8, format!("residual {worst:.2e}"))?;
    ensure(found >= 2, "too few interior thresholds")?;

    let m = SupplierMarket::uniform(0.5, 2.0, 1.0).unwrap();
    let cfg = SimConfig {
        n_firms: 10_000,
        horizon: 200,
        seed: 104,
        ..SimConfig::default()
    };
    let start = Instant::now();
    let panel = simulate_panel(&p, &m, &cfg).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), format!("panel took {t:?}"))?;
    ensure(panel.rows.len() == 10_000 * 200, "wrong row count")?;
    let mut stuck = 0;
    for i in 0..panel.firms.len() {
        let rows = panel.firm_rows(i);
        let mut last = m.c_high;
        for row in rows {
            ensure(row.c <= last, format!("firm {i} efficiency rises"))?;
            last = row.c;
        }
        if let Threshold::NeverSearches = panel.thresholds[i] {
            stuck += 1;
            ensure(rows.iter().all(|r| r.c == m.c_high && !r.searched), format!("firm {i} never searches yet moves"))?;
        }
    }
    Ok(format!(
        "residual {worst:.1e}, c* non-decreasing in F over 20 points, 10^4 x 200 panel in {:.1}s ({stuck} never search)",
        t.as_secs_f64()
    ))
}

fn heatmap() -> Check {
    let p = example();
    let g = HeatmapGrid::log_spaced(100, (0.2, 5.0), 100, (0.2, 5.0));
    let base = scope_heatmap(&p, &g, 1.0).map_err(|e| e.to_string())?;
    let counts: Vec<usize> = [ScopeCategory::None, ScopeCategory::POnly, ScopeCategory::ROnly, ScopeCategory::Both]
        .iter()
        .map(|c| base.count(*c))
        .collect();
    ensure(counts.iter().all(|&c| c > 0), format!("region counts {counts:?}"))?;
    let worse = scope_heatmap(&p, &g, 1.5).map_err(|e| e.to_string())?;
    let mut strict = 0;
    for (a, b) in base.cells.iter().zip(&worse.cells) {
        ensure(b.serves_r() <= a.serves_r() && b.serves_p() <= a.serves_p(), "scope grows with c")?;
        strict += (a != b) as usize;
    }
    ensure(strict > 0, "no cell changes when c rises")?;
    Ok(format!(
        "none/P/R/both = {counts:?}, {strict} cells shrink at 1.5c"
    ))
}

fn shocks_for(imports: &[TradeRecord]) -> Vec<FirmShock> {
    let cfg = ShockConfig {
        variants: vec![ShockVariant::SupplierFirm],
        ..ShockConfig::default()
    };
    build_shocks(imports, &cfg).unwrap()
}

fn import_spec() -> RegressionSpec {
    RegressionSpec {
        outcome: Outcome::ImportQuantity,
        variant: ShockVariant::SupplierFirm,
        ..RegressionSpec::default()
    }
}

fn monte_carlo() -> Check {
    let w = generate_world(&WorldConfig::default().zero_noise()).map_err(|e| e.to_string())?;
    let g = generate_transactions(&w);
    let r = run_spec(&g.corpus, &shocks_for(&g.corpus.imports), &import_spec(), None).map_err(|e| e.to_string())?;
    let truth = w.import_elasticity();
    let gap = (r.shock() - truth).abs();
    ensure(gap < 1e-6, format!("zero-noise estimate {} vs {truth}", r.shock()))?;

    let reps = 200;
    let mut covered = 0;
    let mut slowest = Duration::ZERO;
    let mut sum = 0.0;
    for s in 0..reps {
        let start = Instant::now();
        let cfg = WorldConfig {
            seed: 5000 + s,
            ..WorldConfig::default()
        };
        let w = generate_world(&cfg).map_err(|e| e.to_string())?;
        let g = generate_transactions(&w);
        let r = run_spec(&g.corpus, &shocks_for(&g.corpus.imports), &import_spec(), None).map_err(|e| e.to_string())?;
        let (lo, hi) = r.ci95(0);
        covered += (lo <= truth && truth <= hi) as usize;
        sum += r.shock();
        slowest = slowest.max(start.elapsed());
    }
    let share = covered as f64 / reps as f64;
    let detail = format!(
        "zero-noise gap {gap:.1e}; coverage {covered}/{reps}, mean estimate {:.3} vs {truth}, slowest replication {:.2}s",
        sum / reps as f64,
        slowest.as_secs_f64()
    );
    ensure(slowest < Duration::from_secs(5), detail.clone())?;
    ensure(share >= 0.90, detail.clone())?;
    Ok(detail)
}

fn advanced_vs_emerging() -> Check {
    let reps = 100;
    let mut wins = 0;
    for s in 0..reps {
        let cfg = WorldConfig {
            seed: 7000 + s,
            ..WorldConfig::default()
        };
        let g = generate_transactions(&generate_world(&cfg).map_err(|e| e.to_string())?);
        let shocks = shocks_for(&g.corpus.imports);
        let mut spec = RegressionSpec {
            outcome: Outcome::ExportQuantity,
            variant: ShockVariant::SupplierFirm,
            ..RegressionSpec::default()
        };
        spec.partition.income_group = Some(IncomeGroup::Advanced);
        let adv = run_spec(&g.corpus, &shocks, &spec, None).map_err(|e| e.to_string())?;
        spec.partition.income_group = Some(IncomeGroup::Emerging);
        let em = run_spec(&g.corpus, &shocks, &spec, None).map_err(|e| e.to_string())?;
        wins += (adv.shock().abs() > em.shock().abs()) as usize;
    }
    ensure(wins >= 90, format!("|adv| > |em| in {wins}/{reps}"))?;
    Ok(format!("|adv| > |em| in {wins}/{reps}"))
}

fn sandwich(x: &DMatrix<f64>, e: &[f64], labels: &[u32]) -> DMatrix<f64> {
    let (n, k) = x.shape();
    let bread = (x.transpose() * x).try_inverse().unwrap();
    let ids: HashSet<u32> = labels.iter().copied().collect();
    let mut meat = DMatrix::zeros(k, k);
    for g in &ids {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == *g).collect();
        let xg = x.select_rows(rows.iter());
        let eg = DVector::from_iterator(rows.len(), rows.iter().map(|&i| e[i]));
        let s = xg.transpose() * eg;
        meat += &s * s.transpose();
    }
    let g = ids.len() as f64;
    let c = g / (g - 1.0) * (n as f64 - 1.0) / (n as f64 - k as f64);
    &bread * meat * &bread * c
}

fn econo_oracles() -> Check {
    let names: Vec<String> = vec!["x0".into(), "x1".into()];
    // within estimator against dummy-variable OLS
    let mut r = rng(108);
    let (n, g1, g2) = (1500, 120, 10);
    let a: Vec<u32> = (0..n).map(|i| if i < g1 { i as u32 } else { r.random_range(0..g1 as u32) }).collect();
    let b: Vec<u32> = (0..n).map(|i| if i < g2 { i as u32 } else { r.random_range(0..g2 as u32) }).collect();
    let ea: Vec<f64> = (0..g1).map(|_| gauss(&mut r)).collect();
    let eb: Vec<f64> = (0..g2).map(|_| gauss(&mut r)).collect();
    let x0: Vec<f64> = (0..n).map(|i| gauss(&mut r) + ea[a[i] as usize]).collect();
    let x1: Vec<f64> = (0..n).map(|i| gauss(&mut r) - eb[b[i] as usize]).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| 1.5 * x0[i] - 0.7 * x1[i] + 2.0 * ea[a[i] as usize] + eb[b[i] as usize] + 0.5 * gauss(&mut r))
        .collect();
    let dm = demean_hdfe(&[y.clone(), x0.clone(), x1.clone()], &[a.clone(), b.clone()], 1e-13, 10_000)
        .map_err(|e| e.to_string())?;
    let within = ols(&dm.columns[0], &dm.columns[1..], &names).map_err(|e| e.to_string())?;
    let full = DMatrix::from_fn(n, 2 + g1 + g2 - 1, |i, j| match j {
        0 => x0[i],
        1 => x1[i],
        j if j < 2 + g1 => (a[i] as usize == j - 2) as u8 as f64,
        j => (b[i] as usize == j - 2 - g1 + 1) as u8 as f64,
    });
    let dummy = full.svd(true, true).solve(&DVector::from_column_slice(&y), 1e-12).map_err(|e| e.to_string())?;
    let coef_gap = (0..2).map(|j| (within.coef[j] - dummy[j]).abs()).fold(0.0, f64::max);
    ensure(coef_gap < 1e-8, format!("within vs dummy OLS gap {coef_gap:.2e}"))?;

    // two-way clustering against three explicit sandwiches
    let n = 200;
    let ca: Vec<u32> = (0..n).map(|_| r.random_range(0..15)).collect();
    let cb: Vec<u32> = (0..n).map(|_| r.random_range(0..9)).collect();
    let ua: Vec<f64> = (0..15).map(|_| gauss(&mut r)).collect();
    let ub: Vec<f64> = (0..9).map(|_| gauss(&mut r)).collect();
    let x: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..n).map(|i| gauss(&mut r) + 0.5 * ua[ca[i] as usize]).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| x[0][i] - x[1][i] + ua[ca[i] as usize] + ub[cb[i] as usize] + gauss(&mut r))
        .collect();
    let fit = ols(&y, &x, &names).map_err(|e| e.to_string())?;
    let v = cluster2_vcov(&x, &fit.residuals, &fit.bread, &ca, &cb).map_err(|e| e.to_string())?;
    let xm = design(&x);
    let cab: Vec<u32> = ca.iter().zip(&cb).map(|(p, q)| p * 100 + q).collect();
    let brute = sandwich(&xm, &fit.residuals, &ca) + sandwich(&xm, &fit.residuals, &cb)
        - sandwich(&xm, &fit.residuals, &cab);
    let scale = brute.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let vgap = (&v.matrix - &brute).iter().fold(0.0_f64, |m, v| m.max(v.abs())) / scale;
    ensure(vgap < 1e-12, format!("two-way vcov relative gap {vgap:.2e}"))?;
    Ok(format!("within vs dummy OLS {coef_gap:.1e}, two-way vcov {vgap:.1e}"))
}

fn import(year: i32, firm: &str, sup: &str, v: f64, q: f64) -> TradeRecord {
    TradeRecord {
        year,
        firm_id: firm.into(),
        counterparty: Some(sup.into()),
        product: "p".into(),
        country: "X".into(),
        value: v,
        quantity: q,
        direction: Direction::Import,
    }
}

fn shift_share_algebra() -> Check {
    let cfg = WorldConfig {
        seed: 109,
        n_firms: 2100,
        n_years: 6,
        ..WorldConfig::default()
    };
    let records = generate_transactions(&generate_world(&cfg).map_err(|e| e.to_string())?).corpus.imports;
    let v = ShockVariant::SupplierFirm;
    let table = share_table(&records, v, ShareBase::Lagged).map_err(|e| e.to_string())?;
    ensure(table.len() >= 10_000, format!("only {} firm-years", table.len()))?;
    let shifts: HashMap<(ShockKey, i32), f64> = price_shifts(&unit_values(&records, v).map_err(|e| e.to_string())?)
        .into_iter()
        .map(|r| ((r.key, r.year), r.shift))
        .collect();
    let built: HashMap<(String, i32), f64> = shocks_for(&records)
        .into_iter()
        .map(|s| ((s.firm_id, s.year), s.value))
        .collect();
    let mut r = rng(110);
    let mut worst = 0.0_f64;
    for fs in &table {
        let sum: f64 = fs.weights.iter().map(|(_, w)| w).sum();
        worst = worst.max((sum - 1.0).abs());
        let get = |k: &ShockKey| shifts.get(&(k.clone(), fs.year)).copied();
        let base = shift_share(&fs.weights, get);
        worst = worst.max((base.value - built[&(fs.firm_id.clone(), fs.year)]).abs());
        let a: f64 = r.random_range(-3.0..3.0);
        let scaled = shift_share(&fs.weights, |k| get(k).map(|s| a * s));
        worst = worst.max((scaled.value - a * base.value).abs());
        let d: f64 = r.random_range(-0.5..0.5);
        let moved = shift_share(&fs.weights, |k| get(k).map(|s| s + d));
        worst = worst.max((moved.value - base.value - d * (1.0 - base.imputed_share)).abs());
    }
    ensure(worst <= 1e-12, format!("algebra gap {worst:.2e}"))?;

    let lone = vec![import(2000, "A", "S1", 10.0, 2.0), import(2001, "A", "S1", 12.0, 2.0)];
    let s = firm_shock(&lone, "A", 2001, ShockVariant::SupplierLeaveOneOut).map_err(|e| e.to_string())?;
    ensure(
        s.value == 0.0 && s.imputed_share == 1.0 && s.n_links == 0,
        format!("single-buyer leave-one-out gave {s:?}"),
    )?;
    Ok(format!("{} firm-years within {worst:.1e}, single-buyer leave-one-out is an imputed zero", table.len()))
}

fn corrupted_names(seed: u64) -> (Vec<NameInput>, HashMap<(String, String), usize>) {
    let mut r = rng(seed);
    let cfg = CorruptionConfig::default();
    let mut seen = HashSet::new();
    let mut inputs = Vec::new();
    let mut truth = HashMap::new();
    let mut src = 0;
    while src < 1000 {
        let name = company_name(&mut r);
        if !seen.insert(name.split(' ').next().unwrap().to_string()) {
            continue;
        }
        let firm = format!("IMP{:03}", src % 100);
        let variant = corrupt_name(&name, &cfg, &mut r);
        for raw in [&name, &variant] {
            if truth.insert((firm.clone(), raw.clone()), src).is_none() {
                inputs.push(NameInput {
                    firm_id: firm.clone(),
                    raw: raw.clone(),
                    value: r.random_range(1.0..1e6),
                });
            }
        }
        src += 1;
    }
    (inputs, truth)
}

fn names() -> Check {
    let freq = BigramFrequencies::from_names(["FORD", "FORD MOTOR"]);
    let ford = similscore("FORD", "FORD MOTOR", &freq).simple;
    ensure(ford == 6.0 / 11.0, format!("FORD vs FORD MOTOR scored {ford}"))?;
    let t = Thresholds::default();
    let s = |simple, logw| SimilarityScore { simple, logw };
    ensure(
        high_similarity(s(0.70, 0.70), &t) && high_similarity(s(0.85, 0.40), &t) && !high_similarity(s(0.85, 0.30), &t),
        "threshold rule examples",
    )?;

    let (inputs, truth) = corrupted_names(111);
    let cfg = CleanConfig::default();
    let rows = dedup_suppliers(&inputs, None, &cfg);
    let cluster: HashMap<(String, String), u64> =
        rows.iter().map(|r| ((r.firm_id.clone(), r.raw.clone()), r.cluster_id)).collect();
    let mut per_source: HashMap<usize, HashSet<u64>> = HashMap::new();
    for (k, src) in &truth {
        per_source.entry(*src).or_default().insert(cluster[k]);
    }
    let recall = per_source.values().filter(|s| s.len() == 1).count() as f64 / 1000.0;
    ensure(recall >= 0.95, format!("recall {recall:.3}"))?;
    let mut r = rng(112);
    for _ in 0..10 {
        let mut shuffled = inputs.clone();
        shuffled.shuffle(&mut r);
        ensure(dedup_suppliers(&shuffled, None, &cfg) == rows, "clusters depend on input order")?;
    }
    Ok(format!("FORD 6/11, threshold examples, recall {recall:.3}, order invariant"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("closed-form line solution matches the numerical oracle", closed_form),
        ("cost elasticity matches finite differences and rises with quality taste", elasticities),
        ("parameter validation agrees with the oracle's boundedness", soc_straddle),
        ("search thresholds and the simulated panel", thresholds_and_panel),
        ("two-destination scope heatmap", heatmap),
        ("import elasticity recovery and confidence interval coverage", monte_carlo),
        ("advanced-market exports respond more than emerging ones", advanced_vs_emerging),
        ("fixed-effect regression and two-way clustering oracles", econo_oracles),
        ("shift-share shock algebra", shift_share_algebra),
        ("supplier name matching", names),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {label}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {label}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
