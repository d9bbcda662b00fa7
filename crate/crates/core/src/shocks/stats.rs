use std::collections::BTreeMap;
use std::io::Write;

use super::{FirmShock, ShockVariant};
use crate::numeric::{correlation, mean, quantile_sorted, std_dev};

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: ShockVariant,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockStats {
    pub summaries: Vec<VariantSummary>,
    /// `(a, b, correlation, common firm-years)` for each pair, `a < b`.
    pub correlations: Vec<(ShockVariant, ShockVariant, f64, usize)>,
}

impl ShockStats {
    pub fn correlation(&self, a: ShockVariant, b: ShockVariant) -> Option<f64> {
        if a == b {
            return self.summaries.iter().any(|s| s.variant == a).then_some(1.0);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.correlations.iter().find(|c| c.0 == a && c.1 == b).map(|c| c.2)
    }

    /// Two CSV blocks: the per-variant summary table, a blank line, then
    /// the pairwise correlations.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "variant,n,mean,sd,p5,p25,p50,p75,p95")?;
        for s in &self.summaries {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.variant, s.n, s.mean, s.sd, s.p5, s.p25, s.p50, s.p75, s.p95
            )?;
        }
        writeln!(out)?;
        writeln!(out, "variant_a,variant_b,correlation,n_common")?;
        for (a, b, r, n) in &self.correlations {
            writeln!(out, "{a},{b},{r},{n}")?;
        }
        Ok(())
    }
}

/// Distribution of each variant and pairwise correlations on the firm-years
/// both variants cover. With `drop_zero_loo`, leave-one-out shocks exactly
/// equal to zero are left out.
pub fn shock_stats(shocks: &[FirmShock], drop_zero_loo: bool) -> ShockStats {
    let mut by: BTreeMap<ShockVariant, BTreeMap<(&str, i32), f64>> = BTreeMap::new();
    for s in shocks {
        if drop_zero_loo && s.variant == ShockVariant::SupplierLeaveOneOut && s.value == 0.0 {
            continue;
        }
        by.entry(s.variant).or_default().insert((&s.firm_id, s.year), s.value);
    }
    let summaries = by
        .iter()
        .map(|(v, m)| {
            let mut xs: Vec<f64> = m.values().copied().collect();
            xs.sort_by(f64::total_cmp);
            VariantSummary {
                variant: *v,
                n: xs.len(),
                mean: mean(&xs),
                sd: std_dev(&xs),
                p5: quantile_sorted(&xs, 0.05),
                p25: quantile_sorted(&xs, 0.25),
                p50: quantile_sorted(&xs, 0.50),
                p75: quantile_sorted(&xs, 0.75),
                p95: quantile_sorted(&xs, 0.95),
            }
        })
        .collect();
    let variants: Vec<ShockVariant> = by.keys().copied().collect();
    let mut correlations = Vec::new();
    for (i, a) in variants.iter().enumerate() {
        for b in &variants[i + 1..] {
            let (ma, mb) = (&by[a], &by[b]);
            let (xs, ys): (Vec<f64>, Vec<f64>) = ma.iter().filter_map(|(k, x)| mb.get(k).map(|y| (*x, *y))).unzip();
            correlations.push((*a, *b, correlation(&xs, &ys), xs.len()));
        }
    }
    ShockStats {
        summaries,
        correlations,
    }
}
