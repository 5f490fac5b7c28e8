use num_complex::Complex64;

use super::ComplexMatrix;
use crate::Result;

// Padé degrees and the 1-norm bounds below which each one is accurate to
// double precision without scaling.
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3 to 13, chosen from the 1-norm.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    if n == 1 {
        let mut m = ComplexMatrix::zeros(1, 1);
        m[(0, 0)] = a[(0, 0)].exp();
        return Ok(m);
    }
    let norm = a.norm1();
    for &(deg, theta) in &THETA[..4] {
        if norm <= theta {
            return Ok(pade(a, deg));
        }
    }
    let theta13 = THETA[4].1;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(2f64.powi(-s));
    let mut r = pade(&scaled, 13);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade(a: &ComplexMatrix, deg: usize) -> ComplexMatrix {
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let a2 = a * a;
    let (u, v) = match deg {
        3 => odd_even(a, &id, &[&a2], &B3),
        5 => {
            let a4 = &a2 * &a2;
            odd_even(a, &id, &[&a2, &a4], &B5)
        }
        7 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            odd_even(a, &id, &[&a2, &a4, &a6], &B7)
        }
        9 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let a8 = &a6 * &a2;
            odd_even(a, &id, &[&a2, &a4, &a6, &a8], &B9)
        }
        _ => {
            let b = &B13;
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let lin = |c: [f64; 3]| -> ComplexMatrix {
                let t = &a6.scale_real(c[0]) + &a4.scale_real(c[1]);
                &t + &a2.scale_real(c[2])
            };
            let inner_u = &a6 * &lin([b[13], b[11], b[9]]);
            let tail_u =
                &(&a6.scale_real(b[7]) + &a4.scale_real(b[5])) + &(&a2.scale_real(b[3]) + &id.scale_real(b[1]));
            let u = a * &(&inner_u + &tail_u);
            let inner_v = &a6 * &lin([b[12], b[10], b[8]]);
            let tail_v =
                &(&a6.scale_real(b[6]) + &a4.scale_real(b[4])) + &(&a2.scale_real(b[2]) + &id.scale_real(b[0]));
            (u, &inner_v + &tail_v)
        }
    };
    let p = &v + &u;
    let q = &v - &u;
    q.solve(&p).unwrap_or_else(|| {
        // Only reachable for non-finite input; propagate NaN.
        ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(f64::NAN, f64::NAN))
    })
}

/// Builds `U = A Σ b_{2k+1} A^{2k}` and `V = Σ b_{2k} A^{2k}` from the even
/// powers `[A², A⁴, …]`.
fn odd_even(
    a: &ComplexMatrix,
    id: &ComplexMatrix,
    powers: &[&ComplexMatrix],
    b: &[f64],
) -> (ComplexMatrix, ComplexMatrix) {
    let mut u_inner = id.scale_real(b[1]);
    let mut v = id.scale_real(b[0]);
    for (k, p) in powers.iter().enumerate() {
        u_inner = &u_inner + &p.scale_real(b[2 * k + 3]);
        v = &v + &p.scale_real(b[2 * k + 2]);
    }
    (a * &u_inner, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_gives_identity() {
        let e = expm(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert!((&e - &ComplexMatrix::identity(3)).max_abs() == 0.0);
    }

    #[test]
    fn diagonal_exponentiates_entrywise() {
        for scale in [1e-3, 0.7, 3.0, 40.0] {
            let d = [c(scale, 0.0), c(-scale, 0.5 * scale)];
            let e = expm(&ComplexMatrix::diag(&d)).unwrap();
            for (i, z) in d.iter().enumerate() {
                let rel = (e[(i, i)] - z.exp()).norm() / z.exp().norm();
                assert!(rel < 1e-13, "scale {scale}: rel {rel}");
            }
            assert!(e[(0, 1)].norm() == 0.0 && e[(1, 0)].norm() == 0.0);
        }
    }

    #[test]
    fn nilpotent_series_terminates() {
        let n = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = expm(&n).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!((&e - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let t = 2.5;
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, -t], vec![t, 0.0]]).unwrap();
        let e = expm(&a).unwrap();
        let r = ComplexMatrix::from_real_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        assert!((&e - &r).max_abs() < 1e-14);
    }

    #[test]
    fn matches_taylor_series_on_dense_matrix() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| c((i as f64 - j as f64) * 0.3, 0.1 * (i + 2 * j) as f64));
        let e = expm(&a).unwrap();
        let mut term = ComplexMatrix::identity(4);
        let mut sum = term.clone();
        for k in 1..60 {
            term = (&term * &a).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        assert!((&e - &sum).max_abs() / sum.max_abs() < 1e-13);
    }

    #[test]
    fn non_square_is_rejected() {
        assert_eq!(
            expm(&ComplexMatrix::zeros(1, 2)).unwrap_err(),
            Error::NonSquare { rows: 1, cols: 2 }
        );
    }
}
