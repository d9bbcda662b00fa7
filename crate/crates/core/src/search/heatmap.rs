use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use super::{SearchError, SearchProblem, Threshold};
use crate::model::{solve_line_at, Destination, Firm, IncomeGroup, ValidParams};
use crate::Scalar;

/// Log-spaced grid over process productivity `z` and product productivity `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid<T> {
    pub z: Vec<T>,
    pub xi: Vec<T>,
}

fn log_space<T: Scalar>(n: usize, lo: T, hi: T) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * T::lit(i as f64 / (n - 1) as f64)).exp())
        .collect()
}

impl<T: Scalar> HeatmapGrid<T> {
    pub fn log_spaced(nz: usize, z: (T, T), nxi: usize, xi: (T, T)) -> Self {
        Self {
            z: log_space(nz, z.0, z.1),
            xi: log_space(nxi, xi.0, xi.1),
        }
    }

    fn cells(&self) -> impl IndexedParallelIterator<Item = (T, T)> + '_ {
        let nxi = self.xi.len();
        (0..self.z.len() * nxi)
            .into_par_iter()
            .map(move |k| (self.z[k / nxi], self.xi[k % nxi]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScopeCategory {
    None,
    POnly,
    ROnly,
    Both,
}

impl ScopeCategory {
    pub fn from_flags(r: bool, p: bool) -> Self {
        match (r, p) {
            (false, false) => Self::None,
            (false, true) => Self::POnly,
            (true, false) => Self::ROnly,
            (true, true) => Self::Both,
        }
    }

    pub fn serves_r(self) -> bool {
        matches!(self, Self::ROnly | Self::Both)
    }

    pub fn serves_p(self) -> bool {
        matches!(self, Self::POnly | Self::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::POnly => "P-only",
            Self::ROnly => "R-only",
            Self::Both => "both",
        }
    }
}

impl fmt::Display for ScopeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Export scope over a `(z, xi)` grid at a fixed supplier efficiency.
/// Cell `(i, j)` sits at `z[i]`, `xi[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScopeHeatmap<T> {
    pub grid: HeatmapGrid<T>,
    pub c: T,
    pub r_id: String,
    pub p_id: String,
    pub cells: Vec<ScopeCategory>,
}

impl<T: Scalar> ScopeHeatmap<T> {
    pub fn get(&self, i: usize, j: usize) -> ScopeCategory {
        self.cells[i * self.grid.xi.len() + j]
    }

    pub fn count(&self, cat: ScopeCategory) -> usize {
        self.cells.iter().filter(|c| **c == cat).count()
    }

    /// Header: `z,xi,c,scope`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "xi", "c", "scope"])?;
        for (i, z) in self.grid.z.iter().enumerate() {
            for (j, xi) in self.grid.xi.iter().enumerate() {
                w.write_record([z.to_string(), xi.to_string(), self.c.to_string(), self.get(i, j).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn export_pair<T: Scalar>(params: &ValidParams<T>) -> Result<(&Destination<T>, &Destination<T>), SearchError> {
    let pick = |g: IncomeGroup| {
        let found: Vec<_> = params.destinations.iter().filter(|d| d.income_group == g).collect();
        match found.as_slice() {
            [d] => Ok(*d),
            _ => Err(SearchError::Destinations(format!("found {} {g} destinations", found.len()))),
        }
    };
    Ok((pick(IncomeGroup::Advanced)?, pick(IncomeGroup::Emerging)?))
}

/// Classifies every grid cell by which of the advanced (`R`) and emerging
/// (`P`) destinations it serves at supplier efficiency `c`.
pub fn scope_heatmap<T: Scalar>(
    params: &ValidParams<T>,
    grid: &HeatmapGrid<T>,
    c: T,
) -> Result<ScopeHeatmap<T>, SearchError> {
    let (r, p) = export_pair(params)?;
    let cells = grid
        .cells()
        .map(|(z, xi)| {
            let firm = Firm::new("", z, xi, c);
            let on_r = solve_line_at(params, r, &firm, c)?.active;
            let on_p = solve_line_at(params, p, &firm, c)?.active;
            Ok(ScopeCategory::from_flags(on_r, on_p))
        })
        .collect::<Result<_, SearchError>>()?;
    Ok(ScopeHeatmap {
        grid: grid.clone(),
        c,
        r_id: r.id.clone(),
        p_id: p.id.clone(),
        cells,
    })
}

/// Search threshold for every grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdHeatmap<T> {
    pub grid: HeatmapGrid<T>,
    pub cells: Vec<Threshold<T>>,
}

impl<T: Scalar> ThresholdHeatmap<T> {
    pub fn get(&self, i: usize, j: usize) -> Threshold<T> {
        self.cells[i * self.grid.xi.len() + j]
    }

    /// Header: `z,xi,threshold,never_searches`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "xi", "threshold", "never_searches"])?;
        for (i, z) in self.grid.z.iter().enumerate() {
            for (j, xi) in self.grid.xi.iter().enumerate() {
                let t = self.get(i, j);
                w.write_record([
                    z.to_string(),
                    xi.to_string(),
                    t.value().map(|c| c.to_string()).unwrap_or_default(),
                    (t == Threshold::NeverSearches).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn threshold_heatmap<T: Scalar>(
    problem: &SearchProblem<'_, T>,
    grid: &HeatmapGrid<T>,
) -> Result<ThresholdHeatmap<T>, SearchError> {
    let c_high = problem.market.c_high;
    let cells = grid
        .cells()
        .map(|(z, xi)| problem.search_threshold(&Firm::new("", z, xi, c_high)))
        .collect::<Result<_, SearchError>>()?;
    Ok(ThresholdHeatmap {
        grid: grid.clone(),
        cells,
    })
}
