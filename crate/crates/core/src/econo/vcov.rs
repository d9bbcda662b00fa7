use nalgebra::{DMatrix, SymmetricEigen};

use super::hdfe::dense_labels;
use super::EconError;
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq)]
pub struct Vcov {
    pub matrix: DMatrix<f64>,
    /// Negative eigenvalues were set to zero.
    pub repaired: bool,
    /// Cluster counts of the first, second and intersected dimension.
    pub groups: [usize; 3],
}

/// `Σ_g s_g s_g'` with `s_g = Σ_{i∈g} x_i e_i`.
fn meat(x: &[Vec<f64>], e: &[f64], labels: &[u32], g: usize) -> DMatrix<f64> {
    let k = x.len();
    let mut s = vec![vec![CompensatedSum::new(); k]; g];
    for (i, &l) in labels.iter().enumerate() {
        for j in 0..k {
            s[l as usize][j].add(x[j][i] * e[i]);
        }
    }
    let mut m = DMatrix::zeros(k, k);
    for sg in &s {
        let v: Vec<f64> = sg.iter().map(CompensatedSum::value).collect();
        for a in 0..k {
            for b in 0..k {
                m[(a, b)] += v[a] * v[b];
            }
        }
    }
    m
}

/// One-way cluster-robust sandwich with factor `G/(G-1) (N-1)/(N-K)`.
pub fn cluster_vcov(x: &[Vec<f64>], e: &[f64], bread: &DMatrix<f64>, labels: &[u32]) -> Result<(DMatrix<f64>, usize), EconError> {
    let (dense, g) = dense_labels(labels);
    if g < 2 {
        return Err(EconError::DegenerateClusters { groups: g });
    }
    let n = e.len() as f64;
    let k = x.len() as f64;
    let factor = g as f64 / (g as f64 - 1.0) * (n - 1.0) / (n - k);
    Ok((bread * meat(x, e, &dense, g) * bread * factor, g))
}

/// Heteroskedasticity-robust sandwich with factor `N/(N-K)`.
pub fn hc1_vcov(x: &[Vec<f64>], e: &[f64], bread: &DMatrix<f64>) -> DMatrix<f64> {
    let n = e.len();
    let labels: Vec<u32> = (0..n as u32).collect();
    let factor = n as f64 / (n as f64 - x.len() as f64);
    bread * meat(x, e, &labels, n) * bread * factor
}

/// `V_A + V_B − V_{A∩B}`, each term with its own cluster count in the
/// finite-sample factor. Negative eigenvalues are truncated to zero.
pub fn cluster2_vcov(x: &[Vec<f64>], e: &[f64], bread: &DMatrix<f64>, a: &[u32], b: &[u32]) -> Result<Vcov, EconError> {
    let (va, ga) = cluster_vcov(x, e, bread, a)?;
    let (vb, gb) = cluster_vcov(x, e, bread, b)?;
    let pairs: Vec<(u32, u32)> = a.iter().copied().zip(b.iter().copied()).collect();
    let (ab, _) = dense_labels(&pairs);
    let (vab, gab) = cluster_vcov(x, e, bread, &ab)?;
    let v = va + vb - vab;
    let (matrix, repaired) = psd_repair(v);
    Ok(Vcov {
        matrix,
        repaired,
        groups: [ga, gb, gab],
    })
}

fn psd_repair(v: DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let sym = (&v + v.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return (sym, false);
    }
    let mut eig = eig;
    for l in eig.eigenvalues.iter_mut() {
        *l = l.max(0.0);
    }
    (eig.recompose(), true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_dimensions_give_one_way() {
        let x = vec![vec![1.0, -1.0, 2.0, 0.5, -0.3, 1.2]];
        let e = vec![0.1, -0.2, 0.05, 0.3, -0.1, 0.02];
        let bread = DMatrix::from_element(1, 1, 1.0 / x[0].iter().map(|v| v * v).sum::<f64>());
        let l = vec![0, 0, 1, 1, 2, 2];
        let two = cluster2_vcov(&x, &e, &bread, &l, &l).unwrap();
        let (one, _) = cluster_vcov(&x, &e, &bread, &l).unwrap();
        assert!((two.matrix[(0, 0)] - one[(0, 0)]).abs() <= 1e-15 * one[(0, 0)].abs().max(1e-300));
    }

    #[test]
    fn one_cluster_is_degenerate() {
        let x = vec![vec![1.0, 2.0]];
        let bread = DMatrix::from_element(1, 1, 0.2);
        assert!(matches!(
            cluster_vcov(&x, &[0.1, 0.2], &bread, &[4, 4]),
            Err(EconError::DegenerateClusters { groups: 1 })
        ));
    }
}
