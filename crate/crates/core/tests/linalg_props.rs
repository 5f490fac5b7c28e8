use fvspectra::block::fourier_basis;
use fvspectra::linalg::{eigenvalues, expm, opnorm2, solve_min_norm, ComplexMatrix};
use fvspectra::Complex64;
use proptest::prelude::*;

fn unit_disk() -> impl Strategy<Value = Complex64> {
    (0.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn square(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(unit_disk(), n * n).prop_map(move |d| ComplexMatrix::new(n, n, d).unwrap())
    })
}

/// Determinant by plain elimination, kept independent of the crate's solvers.
fn det(a: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))
            .unwrap();
        if m[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        d *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigenvalues_match_trace_and_determinant(a in square(8)) {
        let ev = eigenvalues(&a).unwrap();
        let sum: Complex64 = ev.eigenvalues.iter().sum();
        prop_assert!((sum - a.trace()).norm() < 1e-9);
        let prod: Complex64 = ev.eigenvalues.iter().product();
        let d = det(&a);
        prop_assert!((prod - d).norm() <= 1e-8 * d.norm().max(1e-3), "{prod} vs {d}");
    }

    #[test]
    fn expm_inverse(a in square(6), s in 0.0f64..10.0) {
        let a = a.scale_real(s / a.norm_fro().max(1e-12));
        let p = &expm(&a).unwrap() * &expm(&a.scale_real(-1.0)).unwrap();
        prop_assert!((&p - &ComplexMatrix::identity(a.rows())).max_abs() < 1e-9);
    }

    #[test]
    fn opnorm_is_unitarily_invariant(m in 1usize..6, seed in prop::collection::vec(unit_disk(), 36), phi in -3.0f64..3.0, psi in -3.0f64..3.0) {
        let a = ComplexMatrix::new(m, m, seed[..m * m].to_vec()).unwrap();
        let u = fourier_basis(m, phi);
        let v = fourier_basis(m, psi);
        let b = &(&u * &a) * &v;
        prop_assert!((opnorm2(&b) - opnorm2(&a)).abs() < 1e-10);
    }

    #[test]
    fn min_norm_solution_is_shortest(cols in prop::collection::vec(unit_disk(), 6), x in prop::collection::vec(unit_disk(), 3), t in unit_disk()) {
        // Rank 2 in a 3x3 system: third column is the sum of the first two.
        let c: Vec<Complex64> = (0..3).map(|i| cols[i] + cols[i + 3]).collect();
        let a = ComplexMatrix::from_rows(&[
            vec![cols[0], cols[3], c[0]],
            vec![cols[1], cols[4], c[1]],
            vec![cols[2], cols[5], c[2]],
        ])
        .unwrap();
        let b = a.mul_vec(&x);
        let y = solve_min_norm(&a, &b, 1e-8).unwrap();
        let r = a.mul_vec(&y);
        prop_assert!(r.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-8));
        let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let null = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let shifted: Vec<Complex64> = y.iter().zip(&null).map(|(a, n)| a + t * n).collect();
        prop_assert!(norm(&shifted) >= norm(&y) - 1e-10);
    }
}
