use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, ZERO};
use crate::{Error, Result};

/// Eigenvalues of a square matrix together with a per-eigenvalue flag telling
/// whether the QR iteration deflated it cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub converged: Vec<bool>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Smallest real part over the spectrum.
    pub fn min_re(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalue nearest to `target`.
    pub fn nearest(&self, target: Complex64) -> Complex64 {
        *self
            .eigenvalues
            .iter()
            .min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm()))
            .expect("spectrum is never empty")
    }
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a square matrix. Fails with [`Error::IterationLimit`] if the
/// shifted QR iteration does not deflate every eigenvalue.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Spectrum> {
    let spec = eigenvalues_partial(a)?;
    if spec.all_converged() {
        Ok(spec)
    } else {
        Err(Error::IterationLimit {
            iterations: MAX_SWEEPS_PER_EIGENVALUE * a.rows(),
        })
    }
}

/// Like [`eigenvalues`] but returns the undeflated diagonal entries with a
/// `false` flag instead of failing.
pub fn eigenvalues_partial(a: &ComplexMatrix) -> Result<Spectrum> {
    let n = a.require_square()?;
    match n {
        1 => Ok(Spectrum {
            eigenvalues: vec![a[(0, 0)]],
            converged: vec![true],
        }),
        2 => Ok(Spectrum {
            eigenvalues: eig2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]).to_vec(),
            converged: vec![true; 2],
        }),
        _ => Ok(hessenberg_qr(hessenberg(a))),
    }
}

/// Closed-form eigenvalues of `[[a, b], [c, d]]`. The larger root is formed
/// first and the smaller recovered from the determinant.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 2] {
    let mean = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let (p, q) = (mean + disc, mean - disc);
    let big = if p.norm() >= q.norm() { p } else { q };
    if big == ZERO {
        return [ZERO, ZERO];
    }
    let det = a * d - b * c;
    [big, det / big]
}

/// Householder reduction to upper Hessenberg form (eigenvalues only, the
/// transformation is not accumulated).
fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * s * 2.0;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vi)| h[(i, k + 1 + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Givens rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let r = x.norm().hypot(y.norm());
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    (ax / r, (x / ax) * y.conj() / r)
}

/// Explicitly shifted QR on a Hessenberg matrix with Wilkinson shifts and
/// deflation of negligible subdiagonal entries.
fn hessenberg_qr(mut h: ComplexMatrix) -> Spectrum {
    let n = h.rows();
    let eps = f64::EPSILON;
    let hnorm = h.norm_fro().max(f64::MIN_POSITIVE);
    let mut eig = vec![ZERO; n];
    let mut converged = vec![true; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * n;

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let scale = if diag == 0.0 { hnorm } else { diag };
            if sub <= eps * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo + 1 == hi {
            let pair = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eig[lo] = pair[0];
            eig[hi] = pair[1];
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iter = 0;
            continue;
        }
        total += 1;
        if total > budget {
            for i in 0..=hi {
                eig[i] = h[(i, i)];
                converged[i] = false;
            }
            break;
        }
        iter += 1;

        let mu = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 1.5
        } else {
            let [e1, e2] = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let d = h[(hi, hi)];
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            rots.push((c, s));
        }
        for (t, &(c, s)) in rots.iter().enumerate() {
            let k = lo + t;
            for i in lo..=(k + 1).min(hi) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Spectrum {
        eigenvalues: eig,
        converged,
    }
}
