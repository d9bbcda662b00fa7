use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tradelab::corpus::{Classification, Corpus, CountryInfo, Direction, ProductClass, Scheme, TradeRecord};
use tradelab::datagen::{generate_transactions, generate_world, Generated, WorldConfig};
use tradelab::econo::*;
use tradelab::model::IncomeGroup;
use tradelab::shocks::{build_shocks, FirmShock, ShockConfig, ShockVariant};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("x{i}")).collect()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(f64::MIN_POSITIVE)
}

/// Two unbalanced fixed effects with group effects built into `y`.
struct FeInstance {
    y: Vec<f64>,
    x: Vec<Vec<f64>>,
    fe: Vec<Vec<u32>>,
    groups: [usize; 2],
}

fn fe_instance(n: usize, g1: usize, g2: usize, seed: u64) -> FeInstance {
    let mut r = rng(seed);
    let a: Vec<u32> = (0..n).map(|i| if i < g1 { i as u32 } else { r.random_range(0..g1 as u32) }).collect();
    let b: Vec<u32> = (0..n).map(|i| if i < g2 { i as u32 } else { r.random_range(0..g2 as u32) }).collect();
    let ea: Vec<f64> = (0..g1).map(|_| gauss(&mut r)).collect();
    let eb: Vec<f64> = (0..g2).map(|_| gauss(&mut r)).collect();
    let x1: Vec<f64> = (0..n).map(|i| gauss(&mut r) + ea[a[i] as usize]).collect();
    let x2: Vec<f64> = (0..n).map(|i| gauss(&mut r) - eb[b[i] as usize]).collect();
    let y = (0..n)
        .map(|i| 1.5 * x1[i] - 0.7 * x2[i] + 2.0 * ea[a[i] as usize] + eb[b[i] as usize] + 0.5 * gauss(&mut r))
        .collect();
    FeInstance {
        y,
        x: vec![x1, x2],
        fe: vec![a, b],
        groups: [g1, g2],
    }
}

/// Dummy matrix for both fixed effects, dropping the first level of the
/// second to keep full rank.
fn dummies(inst: &FeInstance) -> DMatrix<f64> {
    let n = inst.y.len();
    let [g1, g2] = inst.groups;
    DMatrix::from_fn(n, g1 + g2 - 1, |i, j| {
        if j < g1 {
            (inst.fe[0][i] as usize == j) as u8 as f64
        } else {
            (inst.fe[1][i] as usize == j - g1 + 1) as u8 as f64
        }
    })
}

fn lstsq(a: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    a.clone().svd(true, true).solve(y, 1e-12).unwrap()
}

#[test]
fn within_coefficients_equal_dummy_variable_ols() {
    for (n, g1, g2, seed) in [(2000, 150, 12, 1), (800, 60, 30, 2), (300, 40, 5, 3)] {
        let inst = fe_instance(n, g1, g2, seed);
        let mut cols = vec![inst.y.clone()];
        cols.extend(inst.x.iter().cloned());
        let dm = demean_hdfe(&cols, &inst.fe, 1e-13, 10_000).unwrap();
        let fit = ols(&dm.columns[0], &dm.columns[1..], &names(2)).unwrap();

        let d = dummies(&inst);
        let mut full = DMatrix::zeros(n, 2 + d.ncols());
        for i in 0..n {
            full[(i, 0)] = inst.x[0][i];
            full[(i, 1)] = inst.x[1][i];
        }
        full.columns_mut(2, d.ncols()).copy_from(&d);
        let b = lstsq(&full, &DVector::from_column_slice(&inst.y));
        for j in 0..2 {
            assert!((fit.coef[j] - b[j]).abs() < 1e-8, "n {n}: {} vs {}", fit.coef[j], b[j]);
        }
    }
}

#[test]
fn two_way_demeaning_is_dummy_residualization() {
    let inst = fe_instance(500, 45, 8, 4);
    let dm = demean_hdfe(&[inst.y.clone()], &inst.fe, 1e-13, 10_000).unwrap();
    let d = dummies(&inst);
    let yv = DVector::from_column_slice(&inst.y);
    let resid = &yv - &d * lstsq(&d, &yv);
    for i in 0..inst.y.len() {
        assert!((dm.columns[0][i] - resid[i]).abs() < 1e-8);
    }
    // Every group mean of the result is zero.
    for (f, g) in inst.fe.iter().zip(inst.groups) {
        let mut sums = vec![(0.0, 0usize); g];
        for (i, &l) in f.iter().enumerate() {
            sums[l as usize].0 += dm.columns[0][i];
            sums[l as usize].1 += 1;
        }
        assert!(sums.iter().all(|(s, c)| (s / *c as f64).abs() <= 1e-8));
    }
}

#[test]
fn one_fixed_effect_is_plain_group_demeaning() {
    let inst = fe_instance(400, 30, 1, 5);
    let dm = demean_hdfe(&[inst.y.clone()], &inst.fe[..1], 1e-10, 10_000).unwrap();
    assert_eq!(dm.iterations, 1);
    let mut sums = vec![(0.0, 0.0); 30];
    for (i, &l) in inst.fe[0].iter().enumerate() {
        sums[l as usize].0 += inst.y[i];
        sums[l as usize].1 += 1.0;
    }
    for (i, &l) in inst.fe[0].iter().enumerate() {
        let (s, c) = sums[l as usize];
        assert!((dm.columns[0][i] - (inst.y[i] - s / c)).abs() < 1e-12);
    }
}

#[test]
fn demeaning_reports_non_convergence() {
    let inst = fe_instance(600, 50, 10, 6);
    match demean_hdfe(&[inst.y.clone()], &inst.fe, 1e-14, 1) {
        Err(EconError::NoConvergence { iterations, max_change }) => {
            assert_eq!(iterations, 1);
            assert!(max_change > 1e-14);
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn singleton_groups_are_dropped_until_none_remain() {
    // Row 3 is alone in cell 2; removing it leaves year 1 with one row.
    let cell = vec![0, 0, 1, 2, 1];
    let year = vec![0, 0, 1, 1, 0];
    let keep = drop_singletons(&[cell, year]);
    assert_eq!(keep, vec![true, true, false, false, false]);
}

fn ols_instance(n: usize, seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut r = rng(seed);
    let x: Vec<Vec<f64>> = (0..3).map(|j| (0..n).map(|_| gauss(&mut r) + j as f64).collect()).collect();
    let y = (0..n).map(|i| 0.3 * x[0][i] - 1.2 * x[1][i] + 2.0 * x[2][i] + gauss(&mut r)).collect();
    (y, x)
}

#[test]
fn ols_matches_normal_equations() {
    let (y, x) = ols_instance(100, 7);
    let fit = ols(&y, &x, &names(3)).unwrap();
    let xm = design(&x);
    let inv = (xm.transpose() * &xm).try_inverse().unwrap();
    let b = &inv * xm.transpose() * DVector::from_column_slice(&y);
    for j in 0..3 {
        assert!((fit.coef[j] - b[j]).abs() < 1e-10);
    }
    assert!(rel_diff(&fit.bread, &inv) < 1e-10);
    let e = DVector::from_column_slice(&y) - &xm * &b;
    for i in 0..100 {
        assert!((fit.residuals[i] - e[i]).abs() < 1e-10);
    }
}

#[test]
fn ols_is_invariant_to_column_order() {
    let (y, x) = ols_instance(150, 8);
    let fit = ols(&y, &x, &names(3)).unwrap();
    let order = [2, 0, 1];
    let xp: Vec<Vec<f64>> = order.iter().map(|&j| x[j].clone()).collect();
    let np: Vec<String> = order.iter().map(|&j| format!("x{j}")).collect();
    let fp = ols(&y, &xp, &np).unwrap();
    for (pos, &j) in order.iter().enumerate() {
        assert!((fp.coef[pos] - fit.coef[j]).abs() < 1e-12);
        for (pos2, &j2) in order.iter().enumerate() {
            assert!((fp.bread[(pos, pos2)] - fit.bread[(j, j2)]).abs() < 1e-12);
        }
    }
}

#[test]
fn collinear_regressors_are_named() {
    let (y, mut x) = ols_instance(50, 9);
    let dup: Vec<f64> = x[0].iter().zip(&x[1]).map(|(a, b)| 2.0 * a - b).collect();
    x.push(dup);
    let n = vec!["a".to_string(), "b".into(), "c".into(), "d".into()];
    match ols(&y, &x, &n) {
        Err(EconError::RankDeficient { columns }) => assert_eq!(columns.len(), 1),
        other => panic!("expected RankDeficient, got {other:?}"),
    }
}

/// Textbook sandwich for one clustering, computed from explicit group
/// sub-matrices and an explicit inverse.
fn brute_sandwich(x: &DMatrix<f64>, e: &[f64], labels: &[u32]) -> DMatrix<f64> {
    let (n, k) = x.shape();
    let bread = (x.transpose() * x).try_inverse().unwrap();
    let mut ids: Vec<u32> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
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

fn vcov_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, DMatrix<f64>, Vec<u32>, Vec<u32>) {
    let n = 200;
    let mut r = rng(seed);
    let a: Vec<u32> = (0..n).map(|_| r.random_range(0..15)).collect();
    let b: Vec<u32> = (0..n).map(|_| r.random_range(0..9)).collect();
    let ua: Vec<f64> = (0..15).map(|_| gauss(&mut r)).collect();
    let ub: Vec<f64> = (0..9).map(|_| gauss(&mut r)).collect();
    let x: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..n).map(|i| gauss(&mut r) + 0.5 * ua[a[i] as usize]).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| x[0][i] - x[1][i] + ua[a[i] as usize] + ub[b[i] as usize] + gauss(&mut r))
        .collect();
    let fit = ols(&y, &x, &names(3)).unwrap();
    (x, fit.residuals, fit.bread, a, b)
}

#[test]
fn two_way_vcov_matches_brute_force() {
    let (x, e, bread, a, b) = vcov_instance(10);
    let v = cluster2_vcov(&x, &e, &bread, &a, &b).unwrap();
    let xm = design(&x);
    let ab: Vec<u32> = a.iter().zip(&b).map(|(p, q)| p * 100 + q).collect();
    let brute = brute_sandwich(&xm, &e, &a) + brute_sandwich(&xm, &e, &b) - brute_sandwich(&xm, &e, &ab);
    assert!(!v.repaired);
    assert_eq!(v.groups[..2], [15, 9]);
    assert!(rel_diff(&v.matrix, &brute) < 1e-12, "{}", rel_diff(&v.matrix, &brute));
}

#[test]
fn singleton_clusters_give_the_robust_sandwich() {
    let (x, e, bread, _, _) = vcov_instance(11);
    let own: Vec<u32> = (0..e.len() as u32).collect();
    let v = cluster2_vcov(&x, &e, &bread, &own, &own).unwrap();
    let hc = hc1_vcov(&x, &e, &bread);
    assert!(rel_diff(&v.matrix, &hc) < 1e-12);
    let other: Vec<u32> = own.iter().rev().copied().collect();
    let v2 = cluster2_vcov(&x, &e, &bread, &own, &other).unwrap();
    assert!(rel_diff(&v2.matrix, &hc) < 1e-12);
}

#[test]
fn equal_dimensions_give_one_way_clustering() {
    let (x, e, bread, a, _) = vcov_instance(12);
    let v = cluster2_vcov(&x, &e, &bread, &a, &a).unwrap();
    let (one, g) = cluster_vcov(&x, &e, &bread, &a).unwrap();
    assert_eq!(g, 15);
    assert!(rel_diff(&v.matrix, &one) < 1e-12);
}

#[test]
fn one_cluster_is_degenerate() {
    let (x, e, bread, _, _) = vcov_instance(13);
    let one = vec![0u32; e.len()];
    assert!(matches!(
        cluster_vcov(&x, &e, &bread, &one),
        Err(EconError::DegenerateClusters { groups: 1 })
    ));
}

fn world(seed: u64, zero_noise: bool) -> Generated {
    let mut c = WorldConfig {
        seed,
        ..WorldConfig::default()
    };
    if zero_noise {
        c = c.zero_noise();
    }
    generate_transactions(&generate_world(&c).unwrap())
}

fn shocks_for(corpus: &Corpus, variant: ShockVariant) -> Vec<FirmShock> {
    let cfg = ShockConfig {
        variants: vec![variant],
        ..ShockConfig::default()
    };
    build_shocks(&corpus.imports, &cfg).unwrap()
}

fn firm_spec(outcome: Outcome, horizon: usize) -> RegressionSpec {
    RegressionSpec {
        outcome,
        horizon,
        variant: ShockVariant::SupplierFirm,
        ..RegressionSpec::default()
    }
}

#[test]
fn zero_noise_import_regression_recovers_the_dgp_elasticity() {
    let cfg = WorldConfig::default().zero_noise();
    let w = generate_world(&cfg).unwrap();
    let g = generate_transactions(&w);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let r = run_spec(&g.corpus, &shocks, &firm_spec(Outcome::ImportQuantity, 0), None).unwrap();
    assert!(r.converged);
    assert!(r.n_obs > 1000);
    assert!((r.shock() - w.import_elasticity()).abs() < 1e-6, "{} vs {}", r.shock(), w.import_elasticity());
}

#[test]
fn fixed_effect_constants_leave_the_shock_unchanged() {
    let g = world(21, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let spec = firm_spec(Outcome::ExportQuantity, 0);
    let panel = build_panel(&g.corpus, &shocks, &spec, None).unwrap();
    let fit = |y: &[f64]| {
        let mut cols = vec![y.to_vec()];
        cols.extend(panel.x.iter().cloned());
        let dm = demean_hdfe(&cols, &panel.fe, 1e-12, 10_000).unwrap();
        ols(&dm.columns[0], &dm.columns[1..], &panel.names).unwrap().coef[0]
    };
    let base = fit(&panel.y);
    let mut r = rng(22);
    for f in &panel.fe {
        let g = *f.iter().max().unwrap() as usize + 1;
        let add: Vec<f64> = (0..g).map(|_| r.random_range(-50.0..50.0)).collect();
        let y: Vec<f64> = panel.y.iter().zip(f).map(|(y, l)| y + add[*l as usize]).collect();
        assert!((fit(&y) - base).abs() < 1e-8);
    }
}

fn export(year: i32, firm: &str, prod: &str, dest: &str, q: f64) -> TradeRecord {
    TradeRecord {
        year,
        firm_id: firm.into(),
        counterparty: None,
        product: prod.into(),
        country: dest.into(),
        value: 2.0 * q,
        quantity: q,
        direction: Direction::Export,
    }
}

fn const_shocks(firms: &[&str], years: std::ops::RangeInclusive<i32>) -> Vec<FirmShock> {
    let mut out = Vec::new();
    for f in firms {
        for y in years.clone() {
            out.push(FirmShock {
                firm_id: f.to_string(),
                year: y,
                variant: ShockVariant::SupplierFirm,
                value: 0.01 * y as f64,
                n_links: 1,
                imputed_share: 0.0,
            });
        }
    }
    out
}

#[test]
fn survival_outcome_marks_continuing_cells() {
    // Cell A trades 2000-2002; cell B only in 2000 and 2002.
    let corpus = Corpus {
        exports: vec![
            export(2000, "F", "010101", "A", 1.0),
            export(2001, "F", "010101", "A", 1.0),
            export(2002, "F", "010101", "A", 1.0),
            export(2000, "F", "010101", "B", 1.0),
            export(2002, "F", "010101", "B", 1.0),
        ],
        ..Corpus::default()
    };
    let shocks = const_shocks(&["F"], 2000..=2002);
    let spec = RegressionSpec {
        outcome_lags: 0,
        ..firm_spec(Outcome::ExportSurvival, 1)
    };
    let p = build_panel(&corpus, &shocks, &spec, None).unwrap();
    let got: Vec<(String, i32, f64)> = p.rows.iter().zip(&p.y).map(|(r, y)| (r.country.clone(), r.year, *y)).collect();
    assert_eq!(
        got,
        vec![
            ("A".to_string(), 2000, 1.0),
            ("A".to_string(), 2001, 1.0),
            ("B".to_string(), 2000, 0.0),
        ]
    );
    let spec2 = RegressionSpec { horizon: 2, ..spec };
    let p2 = build_panel(&corpus, &shocks, &spec2, None).unwrap();
    assert_eq!(p2.y, vec![1.0, 1.0]);
}

#[test]
fn survival_needs_a_positive_horizon() {
    let spec = firm_spec(Outcome::ExportSurvival, 0);
    assert!(matches!(spec.validate(), Err(EconError::Spec(_))));
}

#[test]
fn row_counts_shrink_with_the_horizon() {
    let g = world(31, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    for (outcome, horizons) in [
        (Outcome::ImportQuantity, 0..=2),
        (Outcome::ExportQuantity, 0..=2),
        (Outcome::ExportSurvival, 1..=2),
    ] {
        let counts: Vec<usize> = horizons
            .map(|j| build_panel(&g.corpus, &shocks, &firm_spec(outcome, j), None).unwrap().len())
            .collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{outcome}: {counts:?}");
        assert!(counts.last().unwrap() < counts.first().unwrap());
    }
}

#[test]
fn class_partitions_cover_the_classified_rows() {
    let mut g = world(41, false);
    // One import under a code no scheme knows about.
    let mut stray = g.corpus.imports[0].clone();
    stray.product = "999999".into();
    g.corpus.imports.push(stray);
    let classified = |p: &str| {
        g.corpus
            .classifications
            .iter()
            .any(|c| c.scheme == Scheme::RauchLib && c.product == p)
    };
    let n_classified = g.corpus.imports.iter().chain(&g.corpus.exports).filter(|r| classified(&r.product)).count();
    let rule = |classes: &str| PartitionRule {
        scheme: Some(Scheme::RauchLib),
        classes: Some(classes.parse().unwrap()),
        ..PartitionRule::default()
    };
    let d = partition(&g.corpus, &rule("differentiated")).unwrap();
    let nd = partition(&g.corpus, &rule("reference,homogeneous")).unwrap();
    let kept = |p: &PartitionOutcome| p.corpus.imports.len() + p.corpus.exports.len();
    assert_eq!(kept(&d) + kept(&nd), n_classified);
    assert!(kept(&d) > 0 && kept(&nd) > 0);
    assert_eq!(d.unknown, 1);
    assert_eq!(nd.unknown, 1);
    assert_eq!(d.excluded, kept(&nd));
}

#[test]
fn income_partition_matches_a_recount() {
    let g = world(42, false);
    let group: std::collections::HashMap<&str, IncomeGroup> =
        g.corpus.countries.iter().map(|c| (c.country.as_str(), c.income_group)).collect();
    for ig in [IncomeGroup::Advanced, IncomeGroup::Emerging] {
        let rule = PartitionRule {
            income_group: Some(ig),
            ..PartitionRule::default()
        };
        let p = partition(&g.corpus, &rule).unwrap();
        let recount: Vec<&TradeRecord> = g.corpus.exports.iter().filter(|r| group.get(r.country.as_str()) == Some(&ig)).collect();
        assert_eq!(p.corpus.exports.len(), recount.len());
        let v: f64 = p.corpus.exports.iter().map(|r| r.value).sum();
        let w: f64 = recount.iter().map(|r| r.value).sum();
        assert!((v - w).abs() <= 1e-9 * w);
    }
}

#[test]
fn partitions_need_their_lookup_tables() {
    let g = world(43, false);
    let bare = Corpus {
        countries: Vec::new(),
        classifications: Vec::new(),
        employment: None,
        ..g.corpus.clone()
    };
    let rules = [
        PartitionRule {
            income_group: Some(IncomeGroup::Advanced),
            ..PartitionRule::default()
        },
        PartitionRule {
            scheme: Some(Scheme::Bernini),
            classes: Some("homogeneous".parse().unwrap()),
            ..PartitionRule::default()
        },
        PartitionRule {
            firm_size: Some(SizeSide::Above),
            ..PartitionRule::default()
        },
    ];
    for r in &rules {
        assert!(matches!(partition(&bare, r), Err(EconError::MissingLookup(_))));
    }
}

#[test]
fn unknown_countries_are_counted_not_kept() {
    let g = world(44, false);
    let mut c = g.corpus.clone();
    let dropped = c.countries.remove(0).country;
    let n_missing = c.imports.iter().filter(|r| r.country == dropped).count();
    let rule = PartitionRule {
        income_group: Some(IncomeGroup::Emerging),
        ..PartitionRule::default()
    };
    let p = partition(&c, &rule).unwrap();
    assert_eq!(p.unknown, n_missing + c.exports.iter().filter(|r| r.country == dropped).count());
    assert!(p.corpus.imports.iter().all(|r| r.country != dropped));
}

#[test]
fn firm_size_halves_partition_the_firms() {
    let g = world(45, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let all = build_panel(&g.corpus, &shocks, &firm_spec(Outcome::ImportQuantity, 0), None).unwrap();
    let side = |s: SizeSide| {
        let mut spec = firm_spec(Outcome::ImportQuantity, 0);
        spec.partition.firm_size = Some(s);
        build_panel(&g.corpus, &shocks, &spec, None).unwrap()
    };
    let (above, below) = (side(SizeSide::Above), side(SizeSide::Below));
    assert_eq!(above.len() + below.len() + above.dropped.unknown, all.len());
    assert!(above.len() > 0 && below.len() > 0);
    assert!(above.len() < below.len(), "firms above the mean are the minority");
}

#[test]
fn controls_enter_with_their_lags() {
    let g = world(46, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let mut cov = Covariates::new(vec!["rer".into()]);
    let mut r = rng(47);
    for c in &g.corpus.countries {
        for y in 2003..=2010 {
            cov.insert(&c.country, y, vec![r.random_range(-0.2..0.2)]);
        }
    }
    let spec = firm_spec(Outcome::ExportQuantity, 0);
    let p = build_panel(&g.corpus, &shocks, &spec, Some(&cov)).unwrap();
    assert_eq!(&p.names[p.names.len() - 3..], ["rer", "rer_lag1", "rer_lag2"]);
    // Lags reach before the first year for the earliest rows.
    let without = build_panel(&g.corpus, &shocks, &spec, None).unwrap();
    assert_eq!(p.len() + p.dropped.missing_control, without.len());
    let res = run_spec(&g.corpus, &shocks, &spec, Some(&cov)).unwrap();
    assert_eq!(res.names.len(), 6);
}

#[test]
fn covariates_read_from_csv() {
    let text = "country,year,rer,gdp\nAR,2003,0.1,2\nAR,2004,-0.2,3\n";
    let c = Covariates::read(text.as_bytes(), "cov.csv").unwrap();
    assert_eq!(c.names, vec!["rer", "gdp"]);
    assert_eq!(c.get("AR", 2004), Some(&[-0.2, 3.0][..]));
    let bad = "country,year,rer\nAR,x,1\n";
    match Covariates::read(bad.as_bytes(), "cov.csv") {
        Err(EconError::Input { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn clustered_errors_exceed_robust_ones_on_noisy_corpora() {
    let mut wider = 0;
    let reps = 100;
    for s in 0..reps {
        let g = world(1000 + s, false);
        let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
        let r = run_spec(&g.corpus, &shocks, &firm_spec(Outcome::ImportQuantity, 0), None).unwrap();
        if r.shock_se() > r.hc1_se(0) {
            wider += 1;
        }
    }
    assert!(wider >= 95, "clustered > robust in {wider}/{reps}");
}

#[test]
fn survival_results_carry_the_sanity_flag() {
    let g = world(51, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let r = run_spec(&g.corpus, &shocks, &firm_spec(Outcome::ExportSurvival, 1), None).unwrap();
    assert_eq!(r.lpm_in_band, Some(true));
    let q = run_spec(&g.corpus, &shocks, &firm_spec(Outcome::ExportQuantity, 1), None).unwrap();
    assert_eq!(q.lpm_in_band, None);
}

#[test]
fn result_tables_list_every_coefficient() {
    let g = world(52, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let r = run_spec(&g.corpus, &shocks, &firm_spec(Outcome::ExportQuantity, 0), None).unwrap();
    let mut text = Vec::new();
    r.write_text(&mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    assert!(text.contains("regress.outcome = export_quantity"));
    assert!(text.contains(&format!("observations = {}", r.n_obs)));
    for n in &r.names {
        assert!(text.contains(n.as_str()));
    }
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "name,estimate,se_cluster,t,se_hc1");
    assert_eq!(lines.len(), r.names.len() + 1);
    let (lo, hi) = r.ci95(0);
    assert!(lo < r.shock() && r.shock() < hi);
}

#[test]
fn row_order_of_the_corpus_does_not_matter() {
    let g = world(53, false);
    let shocks = shocks_for(&g.corpus, ShockVariant::SupplierFirm);
    let spec = firm_spec(Outcome::ImportQuantity, 0);
    let a = run_spec(&g.corpus, &shocks, &spec, None).unwrap();
    let mut c = g.corpus.clone();
    c.imports.shuffle(&mut rng(54));
    let mut s = shocks.clone();
    s.shuffle(&mut rng(55));
    let b = run_spec(&c, &s, &spec, None).unwrap();
    assert_eq!(a.coef, b.coef);
    assert_eq!(a.vcov, b.vcov);
}

#[test]
fn classification_and_country_tables_are_consistent() {
    let g = world(56, false);
    let cs: &[Classification] = &g.corpus.classifications;
    assert!(cs.iter().any(|c| c.class == ProductClass::Differentiated));
    let cs: &[CountryInfo] = &g.corpus.countries;
    assert!(cs.iter().any(|c| c.income_group == IncomeGroup::Advanced));
}
