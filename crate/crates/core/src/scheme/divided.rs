//! Node-centred schemes built from divided differences (R3 and R5).
//!
//! `u_j' + (F_{j+1/2} − F_{j−1/2}) / ((h_{j+1/2} + h_{j−1/2})/2) = 0` with
//! `F_{i+1/2} = u_i + (h_{i+1/2}/2) Σ_t β_t (u_{i+t+1} − u_{i+t}) / h_{i+t+1/2}`.

/// `(t, β_t)` pairs of the R3 flux.
pub(crate) const R3_FLUX: [(isize, f64); 2] = [(0, 2.0 / 3.0), (-1, 1.0 / 3.0)];

/// `(t, β_t)` pairs of the R5 flux.
pub(crate) const R5_FLUX: [(isize, f64); 4] = [(1, -1.0 / 10.0), (0, 4.0 / 5.0), (-1, 11.0 / 30.0), (-2, -1.0 / 15.0)];

/// Coefficients `a_{−S..=S}` for local steps `(h_{j−S+1/2}, …, h_{j+S−1/2})`.
pub(crate) fn coefficients(flux: &[(isize, f64)], half_width: usize, steps: &[f64]) -> Vec<f64> {
    let s = half_width as isize;
    debug_assert_eq!(steps.len(), 2 * half_width);
    let step = |d: isize| steps[(d + s) as usize];
    let mut a = vec![0.0; 2 * half_width + 1];
    let mut add_flux = |i: isize, sign: f64| {
        a[(i + s) as usize] += sign;
        let half_h = 0.5 * step(i);
        for &(t, beta) in flux {
            let c = sign * half_h * beta / step(i + t);
            a[(i + t + 1 + s) as usize] += c;
            a[(i + t + s) as usize] -= c;
        }
    };
    add_flux(0, 1.0);
    add_flux(-1, -1.0);
    let denom = 0.5 * (step(0) + step(-1));
    for v in &mut a {
        *v /= denom;
    }
    a
}
