//! Finite-volume schemes with piecewise polynomial reconstruction of even
//! degree `p = 2s`.
//!
//! Cell `j` carries the average `u_j`. The polynomial `p_j` has the same
//! averages as `u` on the cells `j−s..=j+s`, and the semi-discrete update is
//! `u_j' + (p_j(x_{j+1}) − p_{j−1}(x_j))/h_{j+1/2} = 0`.

use crate::linalg::solve_real;
use crate::{Error, Result};

/// Weights `w` such that the reconstruction over cells `center−s..=center+s`
/// evaluated at the right edge of `center` equals `Σ w_k u_{center+k}`.
///
/// `steps` holds every cell width the stencil needs; `center` indexes into it.
/// The polynomial is expanded in `y = (x − x_center)/scale`.
fn right_edge_weights(steps: &[f64], center: usize, s: usize, scale: f64) -> Result<Vec<f64>> {
    let n = 2 * s + 1;
    // Left edge of each stencil cell relative to the left edge of `center`.
    let mut edges = vec![0.0; n + 1];
    let first = center - s;
    let mut acc = -steps[first..center].iter().sum::<f64>();
    for (k, e) in edges.iter_mut().enumerate() {
        *e = acc / scale;
        if k < n {
            acc += steps[first + k];
        }
    }
    // Moment matrix: row k = cell average of y^d over cell first+k.
    let mut moments = vec![0.0; n * n];
    for k in 0..n {
        let (a, b) = (edges[k], edges[k + 1]);
        let mut pa = a;
        let mut pb = b;
        for d in 0..n {
            moments[k * n + d] = (pb - pa) / ((d + 1) as f64 * (b - a));
            pa *= a;
            pb *= b;
        }
    }
    // value = e^T c with c = M^{-1} u, so the weights solve M^T w = e.
    let y_right = steps[center] / scale;
    let mut e = vec![0.0; n];
    let mut p = 1.0;
    for ed in e.iter_mut() {
        *ed = p;
        p *= y_right;
    }
    let mut mt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            mt[i * n + j] = moments[j * n + i];
        }
    }
    solve_real(&mt, &e).ok_or(Error::SingularStencil)
}

/// Coefficients `a_{−S..=S}` of the degree-`p` finite-volume scheme with
/// `S = p/2 + 1`, for local steps `(h_{j−S+1/2}, …, h_{j+S−1/2})`.
pub(crate) fn coefficients(p: usize, steps: &[f64]) -> Result<Vec<f64>> {
    let s = p / 2;
    let half = s + 1;
    debug_assert_eq!(steps.len(), 2 * half);
    let scale = steps.iter().sum::<f64>() / steps.len() as f64;
    // steps[i] is the width of cell j − half + i, so cell j sits at index half.
    let j = half;
    let plus = right_edge_weights(steps, j, s, scale)?;
    let minus = right_edge_weights(steps, j - 1, s, scale)?;
    let h = steps[j];
    let mut a = vec![0.0; 2 * half + 1];
    // Offset k ↦ index k + half.
    for (t, w) in plus.iter().enumerate() {
        let k = t as isize - s as isize;
        a[(k + half as isize) as usize] += w / h;
    }
    for (t, w) in minus.iter().enumerate() {
        let k = t as isize - s as isize - 1;
        a[(k + half as isize) as usize] -= w / h;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_constant_is_upwind() {
        let a = coefficients(0, &[0.7, 1.3]).unwrap();
        assert!((a[0] + 1.0 / 1.3).abs() < 1e-15);
        assert!((a[1] - 1.0 / 1.3).abs() < 1e-15);
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn quadratic_reconstruction_reproduces_parabola_edges() {
        // Averages of x^2 over cells of a non-uniform stencil; the edge value
        // of the reconstruction must be exact.
        let steps = [0.5, 1.2, 0.8];
        let edges = [-0.5, 0.0, 1.2, 2.0];
        let avg = |a: f64, b: f64| (b * b * b - a * a * a) / (3.0 * (b - a));
        let u: Vec<f64> = (0..3).map(|k| avg(edges[k], edges[k + 1])).collect();
        let w = right_edge_weights(&steps, 1, 1, 1.0).unwrap();
        let val: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((val - 1.44).abs() < 1e-14, "{val}");
    }
}
