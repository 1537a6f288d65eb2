//! Weighted ridge least squares for small dense designs.
//!
//! Solves `(ΦᵀWΦ + λI)θ = ΦᵀWb` by Cholesky. A failed factorisation is
//! retried once with `ε` added to the diagonal; if that also fails the
//! system is solved with an eigen-decomposition pseudo-inverse.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Cholesky,
    JitteredCholesky,
    PseudoInverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlsFit {
    pub coef: Vec<f64>,
    /// `Σ w (φθ − b)² / Σ w`.
    pub residual: f64,
    pub weight_sum: f64,
    /// `λ‖θ‖² / Σ w`, the ridge contribution on the normalised scale.
    pub ridge_term: f64,
    pub method: SolveMethod,
}

/// Normal matrix `ΦᵀWΦ` (row-major `p×p`) and `ΦᵀWb`.
pub fn normal_equations(design: &[f64], ncols: usize, targets: &[f64], weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = ncols;
    let mut a = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for (row, (&b, &w)) in design.chunks_exact(p).zip(targets.iter().zip(weights)) {
        if w == 0.0 {
            continue;
        }
        for i in 0..p {
            let wi = w * row[i];
            rhs[i] += wi * b;
            for j in i..p {
                a[i * p + j] += wi * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            a[i * p + j] = a[j * p + i];
        }
    }
    (a, rhs)
}

/// In-place lower Cholesky factor; `None` if a pivot is not safely positive.
pub fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let scale = (0..p).map(|i| a[i * p + i].abs()).fold(0.0, f64::max);
    let tol = scale * 1e-13;
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if !(d > tol) || !d.is_finite() {
            return None;
        }
        let ljj = sqrt(d);
        l[j * p + j] = ljj;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / ljj;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], p: usize, rhs: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; p];
    for i in 0..p {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[i * p + k] * y[k];
        }
        y[i] = s / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in i + 1..p {
            s -= l[k * p + i] * x[k];
        }
        x[i] = s / l[i * p + i];
    }
    x
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
/// Returns eigenvalues and column-major eigenvectors (`v[k*p + i]` is
/// component `i` of eigenvector `k`).
pub fn symmetric_eigen(a: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * p + j] * m[i * p + j])
            .sum();
        let diag: f64 = (0..p).map(|i| m[i * p + i] * m[i * p + i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for q in 0..p {
            for r in q + 1..p {
                let apq = m[q * p + r];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[r * p + r] - m[q * p + q]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..p {
                    let mkq = m[k * p + q];
                    let mkr = m[k * p + r];
                    m[k * p + q] = c * mkq - s * mkr;
                    m[k * p + r] = s * mkq + c * mkr;
                }
                for k in 0..p {
                    let mqk = m[q * p + k];
                    let mrk = m[r * p + k];
                    m[q * p + k] = c * mqk - s * mrk;
                    m[r * p + k] = s * mqk + c * mrk;
                }
                for k in 0..p {
                    let vkq = v[q * p + k];
                    let vkr = v[r * p + k];
                    v[q * p + k] = c * vkq - s * vkr;
                    v[r * p + k] = s * vkq + c * vkr;
                }
            }
        }
    }
    ((0..p).map(|i| m[i * p + i]).collect(), v)
}

/// Minimum-norm solution of `A x = rhs` for symmetric positive
/// semidefinite `A`.
pub fn pinv_solve(a: &[f64], p: usize, rhs: &[f64]) -> Vec<f64> {
    let (vals, vecs) = symmetric_eigen(a, p);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = top * 1e-12 * p as f64;
    let mut x = vec![0.0; p];
    for k in 0..p {
        if vals[k] > tol {
            let vk = &vecs[k * p..(k + 1) * p];
            let proj: f64 = vk.iter().zip(rhs).map(|(a, b)| a * b).sum::<f64>() / vals[k];
            for i in 0..p {
                x[i] += proj * vk[i];
            }
        }
    }
    x
}

/// Weighted residual sum `Σ w (φθ − b)²` (not normalised).
pub fn weighted_sse(design: &[f64], ncols: usize, targets: &[f64], weights: &[f64], coef: &[f64]) -> f64 {
    design
        .chunks_exact(ncols)
        .zip(targets.iter().zip(weights))
        .map(|(row, (&b, &w))| {
            let e: f64 = row.iter().zip(coef).map(|(x, c)| x * c).sum::<f64>() - b;
            w * e * e
        })
        .sum()
}

pub fn ridge_wls_solve(
    design: &[f64],
    ncols: usize,
    targets: &[f64],
    weights: &[f64],
    lambda: f64,
    eps: f64,
) -> Result<WlsFit> {
    if ncols == 0 || design.len() != ncols * targets.len() || targets.len() != weights.len() {
        return Err(Error::Shape("design, targets and weights are inconsistent".into()));
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::Config("weights must be finite and nonnegative".into()));
    }
    let weight_sum: f64 = weights.iter().sum();
    if !(weight_sum > 0.0) {
        return Err(Error::Unobservable("total weight is zero".into()));
    }
    let p = ncols;
    let (mut a, rhs) = normal_equations(design, p, targets, weights);
    for i in 0..p {
        a[i * p + i] += lambda;
    }
    let (coef, method) = if let Some(l) = cholesky(&a, p) {
        (cholesky_solve(&l, p, &rhs), SolveMethod::Cholesky)
    } else {
        let mut aj = a.clone();
        for i in 0..p {
            aj[i * p + i] += eps;
        }
        match cholesky(&aj, p) {
            Some(l) => (cholesky_solve(&l, p, &rhs), SolveMethod::JitteredCholesky),
            None => (pinv_solve(&a, p, &rhs), SolveMethod::PseudoInverse),
        }
    };
    let sse = weighted_sse(design, p, targets, weights, &coef);
    let norm2: f64 = coef.iter().map(|c| c * c).sum();
    Ok(WlsFit {
        residual: sse / weight_sum,
        ridge_term: lambda * norm2 / weight_sum,
        weight_sum,
        coef,
        method,
    })
}

/// Minimum-norm unpenalised weighted least squares.
pub fn least_squares(design: &[f64], ncols: usize, targets: &[f64], weights: &[f64]) -> Vec<f64> {
    let (a, rhs) = normal_equations(design, ncols, targets, weights);
    pinv_solve(&a, ncols, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn consistent_system_is_recovered_exactly() {
        let theta = [0.3, -1.2, 2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut design = Vec::new();
        let mut b = Vec::new();
        let mut w = Vec::new();
        for _ in 0..50 {
            let row = [uniform(&mut rng) * 4.0 - 2.0, uniform(&mut rng) * 4.0 - 2.0, 1.0];
            b.push(row.iter().zip(&theta).map(|(a, c)| a * c).sum());
            design.extend_from_slice(&row);
            w.push(uniform(&mut rng) + 0.1);
        }
        let fit = ridge_wls_solve(&design, 3, &b, &w, 0.0, 1e-8).unwrap();
        assert!(fit.residual <= 1e-12);
        for (a, c) in fit.coef.iter().zip(&theta) {
            assert!((a - c).abs() < 1e-9);
        }
        assert_eq!(fit.method, SolveMethod::Cholesky);
    }

    #[test]
    fn ridge_residual_is_bounded_by_penalty() {
        let theta = [1.0, 2.0];
        let design = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let b: Vec<f64> = design.chunks(2).map(|r| r[0] * theta[0] + r[1] * theta[1]).collect();
        let w = [1.0, 1.0, 1.0];
        let lam = 1e-3;
        let fit = ridge_wls_solve(&design, 2, &b, &w, lam, 1e-8).unwrap();
        let bound = lam * (theta[0] * theta[0] + theta[1] * theta[1]) / 3.0;
        assert!(fit.residual <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn rank_deficient_falls_back() {
        // two identical columns
        let design = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        let b = [2.0, 4.0, 6.0];
        let w = [1.0, 1.0, 1.0];
        let fit = ridge_wls_solve(&design, 2, &b, &w, 0.0, 1e-8).unwrap();
        assert_ne!(fit.method, SolveMethod::Cholesky);
        assert!(fit.residual < 1e-6);
        let ls = least_squares(&design, 2, &b, &w);
        assert!((ls[0] - 1.0).abs() < 1e-9 && (ls[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_weight_is_unobservable() {
        let r = ridge_wls_solve(&[1.0, 2.0], 1, &[1.0, 2.0], &[0.0, 0.0], 0.0, 1e-8);
        assert!(matches!(r, Err(Error::Unobservable(_))));
    }

    #[test]
    fn jacobi_diagonalises() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        for k in 0..3 {
            let v = &vecs[k * 3..k * 3 + 3];
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * v[j]).sum();
                assert!((av - vals[k] * v[i]).abs() < 1e-12);
            }
        }
    }
}
