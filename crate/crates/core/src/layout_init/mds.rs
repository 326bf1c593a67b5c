//! Classical multidimensional scaling via symmetric Jacobi eigen-decomposition.

use crate::geometry::Point;
use crate::similarity::SimilarityMatrix;

use super::ProjectedPositions;

const JACOBI_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues and column eigenvectors (`vecs[row][col]`) of a symmetric matrix.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * norm.max(1.0);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}

/// Classical MDS on the dissimilarities `1 − s`.
pub fn mds_project(matrix: &SimilarityMatrix) -> ProjectedPositions {
    let n = matrix.len();
    let node_ids = matrix.node_ids.clone();
    if n <= 1 {
        return ProjectedPositions { node_ids, points: vec![Point::ORIGIN; n] };
    }
    let d2 = |i: usize, j: usize| {
        if i == j {
            0.0
        } else {
            let d = 1.0 - matrix.values[i][j];
            d * d
        }
    };
    let row_mean: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d2(i, j)).sum::<f64>() / n as f64).collect();
    let total = row_mean.iter().sum::<f64>() / n as f64;
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| -0.5 * (d2(i, j) - row_mean[i] - row_mean[j] + total)).collect())
        .collect();
    let (vals, vecs) = jacobi_eigen(&b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]).then(x.cmp(&y)));
    let mut coords = [vec![0.0; n], vec![0.0; n]];
    for (axis, &k) in order.iter().take(2).enumerate() {
        if vals[k] <= 1e-12 {
            continue;
        }
        let mut col: Vec<f64> = (0..n).map(|i| vecs[i][k]).collect();
        // fix the sign: largest-magnitude component positive
        let big = (0..n).fold(0, |best, i| if col[i].abs() > col[best].abs() + 1e-12 { i } else { best });
        if col[big] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        let s = vals[k].sqrt();
        coords[axis] = col.iter().map(|x| x * s).collect();
    }
    let points = (0..n).map(|i| Point::new(coords[0][i], coords[1][i])).collect();
    ProjectedPositions { node_ids, points }
}
