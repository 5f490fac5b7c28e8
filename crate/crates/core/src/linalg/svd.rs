use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};
use crate::{Error, Result};

/// Default relative tolerance for rank decisions and consistency checks in
/// [`solve_min_norm`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

const MAX_JACOBI_SWEEPS: usize = 80;

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
/// Only the Hermitian part of the input is used.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.require_square()?;
    let mut h = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let total = h.norm_fro();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * total * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = h[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Rotate the phase out of a_pq: scale row/column q.
                let ph = apq / mag;
                for k in 0..n {
                    h[(q, k)] *= ph;
                    h[(k, q)] *= ph.conj();
                }
                let app = h[(p, p)].re;
                let aqq = h[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let hkp = h[(k, p)];
                    let hkq = h[(k, q)];
                    h[(k, p)] = hkp * c - hkq * s;
                    h[(k, q)] = hkp * s + hkq * c;
                }
                for k in 0..n {
                    let hpk = h[(p, k)];
                    let hqk = h[(q, k)];
                    h[(p, k)] = hpk * c - hqk * s;
                    h[(q, k)] = hpk * s + hqk * c;
                }
                h[(p, q)] = ZERO;
                h[(q, p)] = ZERO;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Spectral norm: square root of the largest eigenvalue of `AᴴA`.
pub fn opnorm2(a: &ComplexMatrix) -> f64 {
    if !a.is_finite() {
        return f64::INFINITY;
    }
    if a.rows() == 1 && a.cols() == 1 {
        return a[(0, 0)].norm();
    }
    let gram = &a.adjoint() * a;
    let ev = hermitian_eigenvalues(&gram).expect("Gram matrix is square");
    ev.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Thin singular value decomposition `A = U Σ Vᴴ`, columns unsorted.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided Jacobi SVD. Works on the columns of `A` directly, so small
/// singular values keep full relative accuracy.
pub fn svd(a: &ComplexMatrix) -> Svd {
    let (r, c) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(c);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha: f64 = (0..r).map(|i| w[(i, p)].norm_sqr()).sum();
                let beta: f64 = (0..r).map(|i| w[(i, q)].norm_sqr()).sum();
                let gamma: Complex64 = (0..r).map(|i| w[(i, p)].conj() * w[(i, q)]).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = (gamma / g).conj();
                for i in 0..r {
                    w[(i, q)] *= ph;
                }
                for i in 0..c {
                    v[(i, q)] *= ph;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..r {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    w[(i, p)] = x * cs - y * sn;
                    w[(i, q)] = x * sn + y * cs;
                }
                for i in 0..c {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * cs - y * sn;
                    v[(i, q)] = x * sn + y * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..c)
        .map(|j| (0..r).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let u = ComplexMatrix::from_fn(r, c, |i, j| if sigma[j] > 0.0 { w[(i, j)] / sigma[j] } else { ZERO });
    Svd { u, sigma, v }
}

/// Minimal-norm least-squares solution of `A x = b` together with the
/// residual norm `‖A x − b‖`. Singular values below `rank_tol · σ_max` are
/// treated as zero.
pub fn lstsq(a: &ComplexMatrix, b: &[Complex64], rank_tol: f64) -> Result<(Vec<Complex64>, f64)> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for {} rows",
            b.len(),
            a.rows()
        )));
    }
    let dec = svd(a);
    let smax = dec.sigma.iter().copied().fold(0.0, f64::max);
    let mut x = vec![ZERO; a.cols()];
    for (k, &s) in dec.sigma.iter().enumerate() {
        if s <= rank_tol * smax || s == 0.0 {
            continue;
        }
        let coef: Complex64 = (0..a.rows()).map(|i| dec.u[(i, k)].conj() * b[i]).sum::<Complex64>() / s;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += dec.v[(j, k)] * coef;
        }
    }
    let ax = a.mul_vec(&x);
    let res = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    Ok((x, res))
}

/// Minimal-norm solution of a system expected to be consistent.
///
/// If the residual exceeds `rank_tol · ‖b‖` the system is reported as
/// [`Error::Inconsistent`].
pub fn solve_min_norm(a: &ComplexMatrix, b: &[Complex64], rank_tol: f64) -> Result<Vec<Complex64>> {
    let (x, res) = lstsq(a, b, rank_tol)?;
    let bnorm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if res > rank_tol * bnorm {
        return Err(Error::Inconsistent { residual: res / bnorm });
    }
    Ok(x)
}
