//! Linear semi-discrete schemes `u_j' + Σ_k a_k(local steps) u_{j+k} = 0`.
//!
//! A [`Scheme`] maps the `2S` local steps `(h_{j−S+1/2}, …, h_{j+S−1/2})` of
//! row `j` to the `2S+1` coefficients `(a_{−S}, …, a_S)`.

mod divided;
mod fv;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{lstsq, ComplexMatrix};
use crate::mesh::Weights;
use crate::{Error, Result};

/// How a scheme's unknowns relate to the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingKind {
    /// `u_j ≈ (1/h_{j+1/2}) ∫ v` over cell `[x_j, x_{j+1}]`.
    CellAverage,
    /// `u_j ≈ v(x_j)`.
    PointValue,
}

impl MappingKind {
    /// Weights under which the scheme conserves mass.
    pub fn conservation_weights(self) -> Weights {
        match self {
            MappingKind::CellAverage => Weights::Cell,
            MappingKind::PointValue => Weights::Node,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Finite volumes with reconstruction of even degree `p`.
    FvPolynomial {
        p: usize,
    },
    R3,
    R5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme {
    kind: SchemeKind,
}

impl Scheme {
    pub fn fv_polynomial(p: usize) -> Result<Self> {
        if p % 2 != 0 {
            return Err(Error::OddP(p));
        }
        Ok(Self {
            kind: SchemeKind::FvPolynomial { p },
        })
    }

    pub fn r3() -> Self {
        Self { kind: SchemeKind::R3 }
    }

    pub fn r5() -> Self {
        Self { kind: SchemeKind::R5 }
    }

    /// Parses `"fv0"`, `"fv2"`, `"fv4"`, …, `"r3"` or `"r5"`.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "r3" => Ok(Self::r3()),
            "r5" => Ok(Self::r5()),
            _ => {
                let p = lower
                    .strip_prefix("fv")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::UnknownScheme(name.to_string()))?;
                Self::fv_polynomial(p)
            }
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            SchemeKind::FvPolynomial { p } => format!("fv{p}"),
            SchemeKind::R3 => "r3".into(),
            SchemeKind::R5 => "r5".into(),
        }
    }

    /// Stencil half-width `S`.
    pub fn half_width(&self) -> usize {
        match self.kind {
            SchemeKind::FvPolynomial { p } => p / 2 + 1,
            SchemeKind::R3 => 2,
            SchemeKind::R5 => 3,
        }
    }

    pub fn mapping_kind(&self) -> MappingKind {
        match self.kind {
            SchemeKind::FvPolynomial { .. } => MappingKind::CellAverage,
            SchemeKind::R3 | SchemeKind::R5 => MappingKind::PointValue,
        }
    }

    /// All built-in schemes are differences of numerical fluxes.
    pub fn flux_form(&self) -> bool {
        true
    }

    /// Order of accuracy on uniform meshes.
    pub fn uniform_order(&self) -> usize {
        match self.kind {
            SchemeKind::FvPolynomial { p } => p + 1,
            SchemeKind::R3 => 3,
            SchemeKind::R5 => 5,
        }
    }

    /// Coefficients `(a_{−S}, …, a_S)` for the local steps
    /// `(h_{j−S+1/2}, …, h_{j+S−1/2})`.
    pub fn coefficients(&self, steps: &[f64]) -> Result<Vec<f64>> {
        let s = self.half_width();
        if steps.len() != 2 * s {
            return Err(Error::DimensionMismatch(format!(
                "{} needs {} local steps, got {}",
                self.name(),
                2 * s,
                steps.len()
            )));
        }
        if let Some((index, &value)) = steps.iter().enumerate().find(|(_, h)| !(**h > 0.0) || !h.is_finite()) {
            return Err(Error::NonPositiveStep { index, value });
        }
        match self.kind {
            SchemeKind::FvPolynomial { p } => fv::coefficients(p, steps),
            SchemeKind::R3 => Ok(divided::coefficients(&divided::R3_FLUX, s, steps)),
            SchemeKind::R5 => Ok(divided::coefficients(&divided::R5_FLUX, s, steps)),
        }
    }

    pub fn uniform_symbol(&self) -> UniformSymbol {
        let a = self
            .coefficients(&vec![1.0; 2 * self.half_width()])
            .expect("unit steps are admissible");
        UniformSymbol::from_coefficients(a)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Coefficients `å_k = a_k(1, …, 1)` and `λ̊(φ) = Σ å_k e^{iφk}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSymbol {
    coefficients: Vec<f64>,
}

/// Outcome of the positivity scan of `Re λ̊` on `(0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipativityCheck {
    pub strictly_dissipative: bool,
    pub worst_phi: f64,
    pub min_re: f64,
}

/// Polynomial fit radius and sampling used for small-φ expansions.
const FIT_RADIUS: f64 = 0.1;
const DISSIPATION_THRESHOLD: f64 = 1e-9;
const DISSIPATION_MAX_POWER: usize = 12;

impl UniformSymbol {
    /// Builds the symbol from `(å_{−S}, …, å_S)`; the length must be odd.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        assert!(coefficients.len() % 2 == 1, "need 2S+1 coefficients");
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn half_width(&self) -> usize {
        self.coefficients.len() / 2
    }

    /// `(k, å_k)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let s = self.half_width() as isize;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &a)| (i as isize - s, a))
    }

    pub fn evaluate(&self, phi: f64) -> Complex64 {
        self.terms()
            .map(|(k, a)| Complex64::from_polar(a, phi * k as f64))
            .sum()
    }

    /// `Re λ̊(φ) = −2 Σ å_k sin²(kφ/2)`, free of cancellation near 0.
    pub fn re_part(&self, phi: f64) -> f64 {
        -2.0 * self
            .terms()
            .map(|(k, a)| {
                let s = (0.5 * k as f64 * phi).sin();
                a * s * s
            })
            .sum::<f64>()
    }

    /// `(Σ å_k, Σ k å_k)`, which should be `(0, 1)`.
    pub fn consistency(&self) -> (f64, f64) {
        let sum = self.coefficients.iter().sum();
        let first = self.terms().map(|(k, a)| k as f64 * a).sum();
        (sum, first)
    }

    /// Even Taylor coefficients `(d_0, d_2, d_4, …)` of `Re λ̊` fitted on
    /// Chebyshev nodes in `[−0.1, 0.1]`.
    pub fn re_even_coefficients(&self) -> Vec<f64> {
        let terms = DISSIPATION_MAX_POWER / 2 + 1;
        let nodes = chebyshev_nodes(4 * terms, FIT_RADIUS);
        let mut rows = Vec::with_capacity(nodes.len() * terms);
        let mut rhs = Vec::with_capacity(nodes.len());
        for &phi in &nodes {
            let t2 = (phi / FIT_RADIUS).powi(2);
            let mut p = 1.0;
            for _ in 0..terms {
                rows.push(Complex64::new(p, 0.0));
                p *= t2;
            }
            rhs.push(Complex64::new(self.re_part(phi), 0.0));
        }
        let a = ComplexMatrix::new(nodes.len(), terms, rows).expect("finite design matrix");
        let (c, _) = lstsq(&a, &rhs, 1e-14).expect("conformable");
        c.iter()
            .enumerate()
            .map(|(n, z)| z.re / FIT_RADIUS.powi(2 * n as i32))
            .collect()
    }

    /// Odd `ϰ` with `Re λ̊(φ) = cφ^{ϰ+1} + O(φ^{ϰ+2})`.
    pub fn dissipation_order(&self) -> Result<usize> {
        let c = self.re_even_coefficients();
        c.iter()
            .enumerate()
            .skip(1)
            .find(|(_, v)| v.abs() > DISSIPATION_THRESHOLD)
            .map(|(n, _)| 2 * n - 1)
            .ok_or_else(|| Error::NoDissipation(format!("{:?}", self.coefficients)))
    }

    /// Scans `Re λ̊` at `φ = 2πk/grid`, `k = 1..grid`.
    pub fn strict_dissipativity_check(&self, grid: usize) -> Result<DissipativityCheck> {
        if grid < 64 {
            return Err(Error::BadArgument(format!("grid {grid} < 64")));
        }
        let (worst_phi, min_re) = (1..grid)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / grid as f64;
                (phi, self.re_part(phi))
            })
            .fold((f64::NAN, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        Ok(DissipativityCheck {
            strictly_dissipative: min_re > 0.0,
            worst_phi,
            min_re,
        })
    }
}

/// Observed constant `K` in `Re λ̊(φ) = K sin^{2s+2}(φ/2)` for the
/// finite-volume scheme with `p = 2s`, measured at `φ = π`.
pub fn fv_dissipation_constant(s: usize) -> Result<f64> {
    let sym = Scheme::fv_polynomial(2 * s)?.uniform_symbol();
    Ok(sym.re_part(PI))
}

/// `c_s = s!(s+1)!/(2s+2)!`, the leading truncation constant of the uniform
/// finite-volume scheme.
pub fn fv_truncation_constant(s: usize) -> f64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    fact(s) * fact(s + 1) / fact(2 * s + 2)
}

/// Chebyshev points of the first kind scaled to `[−r, r]`.
pub(crate) fn chebyshev_nodes(n: usize, r: f64) -> Vec<f64> {
    (0..n)
        .map(|k| r * ((2 * k + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn names_round_trip() {
        for name in ["fv0", "fv2", "fv4", "fv6", "r3", "r5"] {
            assert_eq!(Scheme::by_name(name).unwrap().name(), name);
        }
        assert_eq!(Scheme::by_name("fv3").unwrap_err(), Error::OddP(3));
        assert!(matches!(Scheme::by_name("weno"), Err(Error::UnknownScheme(_))));
    }

    #[test]
    fn wrong_step_count_is_rejected() {
        assert!(Scheme::r3().coefficients(&[1.0; 3]).is_err());
        assert!(matches!(
            Scheme::r3().coefficients(&[1.0, 1.0, -1.0, 1.0]),
            Err(Error::NonPositiveStep { index: 2, .. })
        ));
    }

    #[test]
    fn uniform_upwind() {
        let a = Scheme::fv_polynomial(0).unwrap().uniform_symbol();
        assert!(close(a.coefficients(), &[-1.0, 1.0, 0.0], 1e-15));
    }

    #[test]
    fn uniform_third_order() {
        let want = [1.0 / 6.0, -1.0, 0.5, 1.0 / 3.0, 0.0];
        let fv2 = Scheme::fv_polynomial(2).unwrap().uniform_symbol();
        let r3 = Scheme::r3().uniform_symbol();
        assert!(close(fv2.coefficients(), &want, 1e-14), "{:?}", fv2.coefficients());
        assert!(close(r3.coefficients(), &want, 1e-14), "{:?}", r3.coefficients());
    }

    #[test]
    fn uniform_fifth_order() {
        let want: Vec<f64> = [-2.0, 15.0, -60.0, 20.0, 30.0, -3.0, 0.0]
            .iter()
            .map(|v| v / 60.0)
            .collect();
        let r5 = Scheme::r5().uniform_symbol();
        assert!(close(r5.coefficients(), &want, 1e-14), "{:?}", r5.coefficients());
        // The p=4 finite-volume scheme shares the uniform stencil.
        let fv4 = Scheme::fv_polynomial(4).unwrap().uniform_symbol();
        assert!(close(fv4.coefficients(), &want, 1e-13), "{:?}", fv4.coefficients());
    }

    #[test]
    fn symbol_at_pi() {
        let fv2 = Scheme::fv_polynomial(2).unwrap().uniform_symbol();
        assert!((fv2.evaluate(PI) - Complex64::new(4.0 / 3.0, 0.0)).norm() < 1e-14);
        let r5 = Scheme::r5().uniform_symbol();
        assert!((r5.evaluate(PI) - Complex64::new(16.0 / 15.0, 0.0)).norm() < 1e-14);
        for s in [Scheme::r3(), Scheme::r5(), Scheme::fv_polynomial(4).unwrap()] {
            assert!(s.uniform_symbol().evaluate(0.0).norm() < 1e-14);
        }
    }

    #[test]
    fn dissipation_orders() {
        let order = |s: Scheme| s.uniform_symbol().dissipation_order().unwrap();
        assert_eq!(order(Scheme::fv_polynomial(0).unwrap()), 1);
        assert_eq!(order(Scheme::fv_polynomial(2).unwrap()), 3);
        assert_eq!(order(Scheme::fv_polynomial(4).unwrap()), 5);
        assert_eq!(order(Scheme::r3()), 3);
        assert_eq!(order(Scheme::r5()), 5);
    }

    #[test]
    fn central_scheme_is_not_dissipative() {
        let c = UniformSymbol::from_coefficients(vec![-0.5, 0.0, 0.5]);
        assert!(matches!(c.dissipation_order(), Err(Error::NoDissipation(_))));
        let check = c.strict_dissipativity_check(64).unwrap();
        assert!(!check.strictly_dissipative);
    }

    #[test]
    fn fv_schemes_are_strictly_dissipative() {
        for p in [0, 2, 4, 6] {
            let check = Scheme::fv_polynomial(p)
                .unwrap()
                .uniform_symbol()
                .strict_dissipativity_check(256)
                .unwrap();
            assert!(check.strictly_dissipative, "p={p}: {check:?}");
        }
        assert!(Scheme::r3().uniform_symbol().strict_dissipativity_check(10).is_err());
    }

    #[test]
    fn fv_real_part_is_a_power_of_sine() {
        // Oracle: evaluate the plain Fourier sum and divide by sin^{2s+2}.
        for s in 0..4 {
            let sym = Scheme::fv_polynomial(2 * s).unwrap().uniform_symbol();
            let brute = |phi: f64| -> f64 { sym.terms().map(|(k, a)| a * (phi * k as f64).cos()).sum() };
            let k = fv_dissipation_constant(s).unwrap();
            // The cosine sum cancels near 0, so it is only trusted away from it.
            for i in 5..=45 {
                let phi = 2.0 * PI * i as f64 / 50.0;
                let ratio = brute(phi) / (0.5 * phi).sin().powi(2 * s as i32 + 2);
                assert!((ratio - k).abs() < 1e-10 * k, "s={s} phi={phi}: {ratio} vs {k}");
            }
            let lo = if s < 3 { 10 } else { 25 };
            for i in lo..200 - lo {
                let phi = 2.0 * PI * i as f64 / 200.0;
                let ratio = sym.re_part(phi) / (0.5 * phi).sin().powi(2 * s as i32 + 2);
                assert!((ratio - k).abs() < 1e-10 * k, "s={s} phi={phi}: {ratio} vs {k}");
            }
            // The observed constant is 2^{2s+2} c_s.
            let c = fv_truncation_constant(s);
            assert!((k - 4f64.powi(s as i32 + 1) * c).abs() < 1e-13, "s={s}: {k}");
        }
    }

    #[test]
    fn consistency_of_uniform_symbols() {
        for s in [
            Scheme::r3(),
            Scheme::r5(),
            Scheme::fv_polynomial(2).unwrap(),
            Scheme::fv_polynomial(6).unwrap(),
        ] {
            let (sum, first) = s.uniform_symbol().consistency();
            assert!(sum.abs() < 1e-12 && (first - 1.0).abs() < 1e-12, "{s}: {sum} {first}");
        }
    }
}
