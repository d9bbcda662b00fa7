use std::io::Write;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::hdfe::{demean_hdfe, drop_singletons};
use super::ols::ols;
use super::panel::{build_panel, Covariates, PanelDrops};
use super::spec::{Outcome, RegressionSpec};
use super::vcov::{cluster2_vcov, cluster_vcov, hc1_vcov};
use super::EconError;
use crate::config::{render, KvConfig};
use crate::corpus::Corpus;
use crate::numeric::{mean, std_dev};
use crate::shocks::FirmShock;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub spec: RegressionSpec,
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    /// Clustered on the dimensions in `RegressionSpec::cluster`.
    pub vcov: DMatrix<f64>,
    pub hc1: DMatrix<f64>,
    pub n_obs: usize,
    pub n_singletons: usize,
    pub fe_groups: Vec<(String, usize)>,
    pub clusters: Vec<(String, usize)>,
    pub iterations: usize,
    /// Always true in a returned result: non-convergence is an error.
    pub converged: bool,
    pub vcov_repaired: bool,
    pub dropped: PanelDrops,
    /// Survival only: whether the mean outcome moved by one shock standard
    /// deviation stays in `[-0.5, 1.5]`.
    pub lpm_in_band: Option<bool>,
}

impl RegressionResult {
    pub fn se(&self, i: usize) -> f64 {
        self.vcov[(i, i)].max(0.0).sqrt()
    }

    pub fn hc1_se(&self, i: usize) -> f64 {
        self.hc1[(i, i)].max(0.0).sqrt()
    }

    pub fn t_stat(&self, i: usize) -> f64 {
        self.coef[i] / self.se(i)
    }

    pub fn shock(&self) -> f64 {
        self.coef[0]
    }

    pub fn shock_se(&self) -> f64 {
        self.se(0)
    }

    /// Two-sided 95% critical value of a t distribution with `G - 1`
    /// degrees of freedom, `G` the smallest cluster count.
    pub fn critical_value(&self) -> f64 {
        let g = self.clusters.iter().map(|(_, g)| *g).min().unwrap_or(2);
        let t = StudentsT::new(0.0, 1.0, (g.max(2) - 1) as f64).expect("positive degrees of freedom");
        t.inverse_cdf(0.975)
    }

    pub fn ci95(&self, i: usize) -> (f64, f64) {
        let h = self.critical_value() * self.se(i);
        (self.coef[i] - h, self.coef[i] + h)
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# specification")?;
        let mut entries = Vec::new();
        self.spec.kv_entries("regress", &mut entries);
        write!(out, "{}", render(&entries))?;
        writeln!(out, "# sample")?;
        writeln!(out, "observations = {}", self.n_obs)?;
        writeln!(out, "singletons_dropped = {}", self.n_singletons)?;
        let d = &self.dropped;
        writeln!(
            out,
            "dropped = missing_lag:{} missing_outcome:{} missing_shock:{} missing_control:{} partition:{} unknown:{}",
            d.missing_lag, d.missing_outcome, d.missing_shock, d.missing_control, d.partition, d.unknown
        )?;
        for (n, g) in &self.fe_groups {
            writeln!(out, "fe_groups.{n} = {g}")?;
        }
        for (n, g) in &self.clusters {
            writeln!(out, "clusters.{n} = {g}")?;
        }
        writeln!(out, "demeaning_iterations = {}", self.iterations)?;
        writeln!(out, "converged = {}", self.converged)?;
        writeln!(out, "vcov_repaired = {}", self.vcov_repaired)?;
        if let Some(b) = self.lpm_in_band {
            writeln!(out, "lpm_in_band = {b}")?;
        }
        writeln!(out, "# coefficients")?;
        writeln!(out, "{:<20} {:>14} {:>14} {:>10}", "name", "estimate", "se_cluster", "t")?;
        for (i, n) in self.names.iter().enumerate() {
            writeln!(out, "{:<20} {:>14.6} {:>14.6} {:>10.3}", n, self.coef[i], self.se(i), self.t_stat(i))?;
        }
        Ok(())
    }

    /// Header: `name,estimate,se_cluster,t,se_hc1`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "estimate", "se_cluster", "t", "se_hc1"])?;
        for (i, n) in self.names.iter().enumerate() {
            w.write_record([
                n.clone(),
                self.coef[i].to_string(),
                self.se(i).to_string(),
                self.t_stat(i).to_string(),
                self.hc1_se(i).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Panel, singleton pruning, within transformation, OLS and clustered
/// variance. The shock is the first coefficient.
pub fn run_spec(
    corpus: &Corpus,
    shocks: &[FirmShock],
    spec: &RegressionSpec,
    covariates: Option<&Covariates>,
) -> Result<RegressionResult, EconError> {
    let mut panel = build_panel(corpus, shocks, spec, covariates)?;
    let before = panel.len();
    if spec.drop_singletons {
        let keep = drop_singletons(&panel.fe);
        panel.retain(&keep);
    }
    let n_singletons = before - panel.len();
    let k = panel.names.len();
    if panel.len() <= k {
        return Err(EconError::EmptySample(format!("{} rows for {k} regressors", panel.len())));
    }

    let mut cols = Vec::with_capacity(k + 1);
    cols.push(panel.y.clone());
    cols.extend(panel.x.iter().cloned());
    let dm = demean_hdfe(&cols, &panel.fe, spec.tol, spec.max_iter)?;
    let mut it = dm.columns.into_iter();
    let yd = it.next().expect("outcome column");
    let xd: Vec<Vec<f64>> = it.collect();
    let fit = ols(&yd, &xd, &panel.names)?;

    let (firm, country) = (&panel.clusters[0], &panel.clusters[1]);
    let (vcov, repaired, clusters) = match (spec.cluster.firm, spec.cluster.country) {
        (true, true) => {
            let v = cluster2_vcov(&xd, &fit.residuals, &fit.bread, firm, country)?;
            let g = v.groups;
            (v.matrix, v.repaired, vec![("firm".to_string(), g[0]), ("country".to_string(), g[1])])
        }
        (true, false) => {
            let (v, g) = cluster_vcov(&xd, &fit.residuals, &fit.bread, firm)?;
            (v, false, vec![("firm".to_string(), g)])
        }
        _ => {
            let (v, g) = cluster_vcov(&xd, &fit.residuals, &fit.bread, country)?;
            (v, false, vec![("country".to_string(), g)])
        }
    };
    let hc1 = hc1_vcov(&xd, &fit.residuals, &fit.bread);

    let lpm_in_band = (spec.outcome == Outcome::ExportSurvival).then(|| {
        let ybar = mean(&panel.y);
        let move_by = fit.coef[0] * std_dev(&panel.x[0]);
        [ybar - move_by, ybar + move_by].iter().all(|p| (-0.5..=1.5).contains(p))
    });
    let fe_groups = panel
        .fe_names
        .iter()
        .zip(&panel.fe)
        .map(|(n, l)| {
            let mut u = l.clone();
            u.sort_unstable();
            u.dedup();
            (n.clone(), u.len())
        })
        .collect();

    Ok(RegressionResult {
        spec: spec.clone(),
        names: panel.names,
        coef: fit.coef,
        vcov,
        hc1,
        n_obs: panel.y.len(),
        n_singletons,
        fe_groups,
        clusters,
        iterations: dm.iterations,
        converged: true,
        vcov_repaired: repaired,
        dropped: panel.dropped,
        lpm_in_band,
    })
}
