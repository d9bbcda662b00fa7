use nalgebra::{DMatrix, DVector};

use super::EconError;
use crate::numeric::CompensatedSum;

/// Relative size of a pivot below which a column counts as dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `(X'X)^{-1}`.
    pub bread: DMatrix<f64>,
}

/// Column-major regressors as an `n × k` matrix.
pub fn design(x: &[Vec<f64>]) -> DMatrix<f64> {
    let n = x.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, x.len(), |i, j| x[j][i])
}

/// Least squares by column-pivoted QR. Columns left over once the pivots
/// fall below `1e-10` of the largest are reported by name.
pub fn ols(y: &[f64], x: &[Vec<f64>], names: &[String]) -> Result<OlsFit, EconError> {
    let k = x.len();
    let n = y.len();
    if k == 0 || x.iter().any(|c| c.len() != n) || names.len() != k {
        return Err(EconError::Spec("regressor columns and names must match the outcome".into()));
    }
    if n < k {
        return Err(EconError::RankDeficient { columns: names.to_vec() });
    }
    let xm = design(x);
    let qr = xm.col_piv_qr();
    let r = qr.r();
    let mut order = DMatrix::from_fn(1, k, |_, j| j as f64);
    qr.p().permute_columns(&mut order);
    let order: Vec<usize> = order.iter().map(|v| *v as usize).collect();

    let top = r[(0, 0)].abs();
    let rank = (0..k).take_while(|&j| top > 0.0 && r[(j, j)].abs() > RANK_TOL * top).count();
    if rank < k {
        let mut cols: Vec<String> = order[rank..].iter().map(|&j| names[j].clone()).collect();
        cols.sort();
        return Err(EconError::RankDeficient { columns: cols });
    }

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| EconError::RankDeficient { columns: names.to_vec() })?;
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let b_perm = &r_inv * qty;
    let mut beta = vec![0.0; k];
    for (i, &j) in order.iter().enumerate() {
        beta[j] = b_perm[i];
    }
    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let fit: CompensatedSum = (0..k).map(|j| x[j][i] * beta[j]).collect();
            y[i] - fit.value()
        })
        .collect();

    let a = &r_inv * r_inv.transpose();
    let mut bread = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            bread[(order[i], order[j])] = a[(i, j)];
        }
    }
    Ok(OlsFit {
        coef: beta,
        residuals,
        bread,
    })
}
