//! Eigenvalue branches of the block symbol, amplification bounds and
//! stability verdicts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truncation::exactness_report;
use crate::block::BlockSymbol;
use crate::linalg::{eigenvalues, expm, lstsq, opnorm2, ComplexMatrix};
use crate::mesh::MeshStructure;
use crate::scheme::{chebyshev_nodes, Scheme};
use crate::{Error, Result};

/// Radius of the interval on which `λ₀` is sampled for Taylor fits.
pub const TAYLOR_RADIUS: f64 = 0.1;
/// Extra polynomial degrees absorbing the tail of the series in a fit.
const TAYLOR_EXTRA_DEGREE: usize = 6;
/// Largest Taylor order available from [`lambda0_taylor`].
pub const MAX_TAYLOR_ORDER: usize = 8;
/// Coefficients below this are treated as zero when judging signs.
pub const TAYLOR_ZERO: f64 = 1e-8;
/// Real parts below `−SCAN_TOL` count as growth.
pub const SCAN_TOL: f64 = 1e-9;
const BRANCH_TOL: f64 = 1e-10;
const UNBOUNDED: f64 = 1e6;
const NU_MIN: f64 = 1e-2;

/// Eigenvalue of `L(γ, φ)` nearest to `iφ`.
pub fn lambda0_branch(bs: &BlockSymbol, phi: f64) -> Result<Complex64> {
    let spec = eigenvalues(&bs.symbol(phi))?;
    let target = Complex64::new(0.0, phi);
    let mut dist: Vec<(f64, Complex64)> = spec.eigenvalues.iter().map(|z| ((z - target).norm(), *z)).collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    if dist.len() > 1 && (dist[1].0 - dist[0].0).abs() <= BRANCH_TOL {
        return Err(Error::BranchAmbiguity { phi });
    }
    Ok(dist[0].1)
}

/// Eigenvalues of `L(γ, 0)` other than the physical zero, by increasing
/// real part.
pub fn nonphysical_at_zero(bs: &BlockSymbol) -> Result<Vec<Complex64>> {
    let spec = eigenvalues(&bs.symbol(0.0))?;
    let mut ev = spec.eigenvalues;
    let zero = ev
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .expect("non-empty spectrum");
    ev.remove(zero);
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// Coefficients `c_1..c_order` of `λ₀(φ) = Σ c_n φ^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorFit {
    pub coefficients: Vec<Complex64>,
    /// Root-mean-square misfit of the sampled branch.
    pub residual: f64,
    /// Degree of the fitted polynomial.
    pub degree: usize,
}

impl TaylorFit {
    /// `c_n`, `n ≥ 1`.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients[n - 1]
    }
}

/// Least-squares fit of the physical branch on Chebyshev nodes in
/// `[−0.1, 0.1]`, without constant term.
pub fn lambda0_taylor(bs: &BlockSymbol, order: usize) -> Result<TaylorFit> {
    if order == 0 || order > MAX_TAYLOR_ORDER {
        return Err(Error::BadArgument(format!(
            "order {order} outside 1..={MAX_TAYLOR_ORDER}"
        )));
    }
    let degree = order + TAYLOR_EXTRA_DEGREE;
    let count = (2 * order + 6).max(2 * degree + 2);
    let nodes = chebyshev_nodes(count, TAYLOR_RADIUS);
    let samples: Vec<Complex64> = nodes
        .par_iter()
        .map(|&phi| lambda0_branch(bs, phi))
        .collect::<Result<_>>()?;
    let mut design = Vec::with_capacity(count * degree);
    for &phi in &nodes {
        let t = phi / TAYLOR_RADIUS;
        let mut p = t;
        for _ in 0..degree {
            design.push(Complex64::new(p, 0.0));
            p *= t;
        }
    }
    let a = ComplexMatrix::new(count, degree, design)?;
    let (x, res) = lstsq(&a, &samples, 1e-15)?;
    let coefficients = x
        .iter()
        .take(order)
        .enumerate()
        .map(|(i, z)| z / TAYLOR_RADIUS.powi(i as i32 + 1))
        .collect();
    Ok(TaylorFit {
        coefficients,
        residual: res / (count as f64).sqrt(),
        degree,
    })
}

/// Scan frequencies: a uniform grid on `[0, 2π/m)` plus `10^{−k}`,
/// `k = 1..=4`, sorted.
pub fn scan_frequencies(m: usize, grid: usize) -> Vec<f64> {
    let width = 2.0 * PI / m as f64;
    let mut phis: Vec<f64> = (0..grid).map(|k| width * k as f64 / grid as f64).collect();
    phis.extend((1..=4).map(|k| 10f64.powi(-k)));
    phis.sort_by(f64::total_cmp);
    phis.dedup();
    phis
}

/// Minimum real part of the spectrum over the scan frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub min_re: f64,
    pub phi_worst: f64,
}

pub fn eigen_scan(bs: &BlockSymbol, grid: usize) -> Result<SpectrumScan> {
    let phis = scan_frequencies(bs.period(), grid);
    let mins: Vec<f64> = phis
        .par_iter()
        .map(|&phi| Ok(eigenvalues(&bs.symbol(phi))?.min_re()))
        .collect::<Result<_>>()?;
    let (i, &min_re) = mins
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    Ok(SpectrumScan {
        min_re,
        phi_worst: phis[i],
    })
}

/// `G = max ‖exp(−νL(γ, φ))‖` over the sampled `(φ, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Amplification {
    Bounded {
        value: f64,
        phi: f64,
        nu: f64,
    },
    /// A sampled norm exceeded `10⁶` or overflowed.
    Unbounded {
        phi: f64,
        nu: f64,
        norm: f64,
    },
}

impl Amplification {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Amplification::Bounded { .. })
    }
}

pub fn amplification(bs: &BlockSymbol, phi_grid: usize, nu_grid: usize) -> Result<Amplification> {
    if phi_grid < 32 || nu_grid < 32 {
        return Err(Error::BadArgument("amplification grids need at least 32 points".into()));
    }
    let phis = scan_frequencies(bs.period(), phi_grid);
    let per_phi: Vec<Amplification> = phis
        .par_iter()
        .map(|&phi| {
            let l = bs.symbol(phi);
            let min_re = eigenvalues(&l)?.min_re();
            let nu_max = 50.0 / min_re.max(1e-6);
            let ratio = (nu_max / NU_MIN).ln();
            let minus_l = l.scale_real(-1.0);
            let mut best = Amplification::Bounded {
                value: 0.0,
                phi,
                nu: NU_MIN,
            };
            for k in 0..nu_grid {
                let nu = NU_MIN * (ratio * k as f64 / (nu_grid - 1) as f64).exp();
                let norm = opnorm2(&expm(&minus_l.scale_real(nu))?);
                if !norm.is_finite() || norm > UNBOUNDED {
                    return Ok(Amplification::Unbounded { phi, nu, norm });
                }
                if let Amplification::Bounded { value, .. } = best {
                    if norm > value {
                        best = Amplification::Bounded { value: norm, phi, nu };
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    if let Some(u) = per_phi.iter().find(|a| !a.is_bounded()) {
        return Ok(*u);
    }
    Ok(per_phi
        .into_iter()
        .fold(None, |acc: Option<Amplification>, a| match (acc, a) {
            (Some(Amplification::Bounded { value: v0, .. }), Amplification::Bounded { value: v1, .. }) if v1 <= v0 => {
                acc
            }
            _ => Some(a),
        })
        .expect("non-empty grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    /// No sign of growth, but the leading dissipative coefficient vanishes.
    Marginal,
}

/// Evidence attached to an unstable verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    NegativeEigenvalue { phi: f64, re: f64 },
    NegativeTaylorCoefficient { power: usize, value: f64 },
    Unbounded { phi: f64, nu: f64, norm: f64 },
}

/// Dissipation order against the exactness reached with a corrected mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremCondition {
    pub kappa: Option<usize>,
    pub q: Option<usize>,
    /// `q ≥ ϰ − 1`.
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityOptions {
    pub phi_grid: usize,
    pub nu_grid: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            phi_grid: 512,
            nu_grid: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub scheme: String,
    pub gamma: MeshStructure,
    pub verdict: Verdict,
    pub min_re_eig: f64,
    pub phi_worst: f64,
    /// `c_1..c_5` of the physical branch.
    pub lambda0_taylor: Vec<Complex64>,
    pub taylor_residual: f64,
    /// Non-physical eigenvalue of `L(γ, 0)` nearest the imaginary axis.
    pub lambda_star_0: Option<Complex64>,
    pub amplification: Amplification,
    pub theorem_condition: TheoremCondition,
    pub witness: Option<Witness>,
}

struct Classification {
    verdict: Verdict,
    witness: Option<Witness>,
    scan: SpectrumScan,
    fit: TaylorFit,
    amplification: Amplification,
}

fn classify(bs: &BlockSymbol, kappa: Option<usize>, opts: &StabilityOptions) -> Result<Classification> {
    let scan = eigen_scan(bs, opts.phi_grid)?;
    let top = kappa.map_or(MAX_TAYLOR_ORDER, |k| (k + 1).min(MAX_TAYLOR_ORDER));
    let fit = lambda0_taylor(bs, top.max(5))?;
    let amp = amplification(bs, opts.phi_grid, opts.nu_grid)?;
    let leading = (2..=top)
        .step_by(2)
        .map(|n| (n, fit.coefficient(n).re))
        .find(|(_, v)| v.abs() > TAYLOR_ZERO);
    let (verdict, witness) = if let Some((power, value)) = leading.filter(|(_, v)| *v < 0.0) {
        (
            Verdict::Unstable,
            Some(Witness::NegativeTaylorCoefficient { power, value }),
        )
    } else if scan.min_re < -SCAN_TOL {
        (
            Verdict::Unstable,
            Some(Witness::NegativeEigenvalue {
                phi: scan.phi_worst,
                re: scan.min_re,
            }),
        )
    } else if let Amplification::Unbounded { phi, nu, norm } = amp {
        (Verdict::Unstable, Some(Witness::Unbounded { phi, nu, norm }))
    } else if leading.is_none() {
        (Verdict::Marginal, None)
    } else {
        (Verdict::Stable, None)
    };
    Ok(Classification {
        verdict,
        witness,
        scan,
        fit,
        amplification: amp,
    })
}

/// Stability of `scheme` on meshes with structure `gamma`.
pub fn stability_verdict(scheme: &Scheme, gamma: &MeshStructure, opts: &StabilityOptions) -> Result<StabilityReport> {
    let bs = BlockSymbol::new(scheme, gamma)?;
    let kappa = scheme.uniform_symbol().dissipation_order().ok();
    let c = classify(&bs, kappa, opts)?;
    let exact = exactness_report(scheme, gamma, scheme.uniform_order() + 1)?;
    let theorem_condition = TheoremCondition {
        kappa,
        q: exact.q1,
        satisfied: matches!((kappa, exact.q1), (Some(k), Some(q)) if q + 1 >= k),
    };
    Ok(StabilityReport {
        scheme: scheme.name(),
        gamma: gamma.clone(),
        verdict: c.verdict,
        min_re_eig: c.scan.min_re,
        phi_worst: c.scan.phi_worst,
        lambda0_taylor: c.fit.coefficients.iter().take(5).copied().collect(),
        taylor_residual: c.fit.residual,
        lambda_star_0: nonphysical_at_zero(&bs)?.first().copied(),
        amplification: c.amplification,
        theorem_condition,
        witness: c.witness,
    })
}

/// Largest `ξ ∈ [0, 0.99]` for which the alternating mesh is not judged
/// unstable, located by bisection to width `tol`.
pub fn max_stable_xi(scheme: &Scheme, tol: f64, opts: &StabilityOptions) -> Result<f64> {
    if !(tol >= 1e-4) {
        return Err(Error::BadArgument(format!("tolerance {tol} below 1e-4")));
    }
    let kappa = scheme.uniform_symbol().dissipation_order().ok();
    let unstable = |xi: f64| -> Result<bool> {
        let bs = BlockSymbol::new(scheme, &MeshStructure::alternating(xi)?)?;
        Ok(classify(&bs, kappa, opts)?.verdict == Verdict::Unstable)
    };
    let (mut lo, mut hi) = (0.0, 0.99);
    if !unstable(hi)? {
        return Ok(hi);
    }
    if unstable(lo)? {
        return Ok(0.0);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if unstable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alt(scheme: Scheme, xi: f64) -> BlockSymbol {
        BlockSymbol::new(&scheme, &MeshStructure::alternating(xi).unwrap()).unwrap()
    }

    #[test]
    fn uniform_branch_is_the_uniform_symbol() {
        let scheme = Scheme::r3();
        let bs = alt(scheme, 0.0);
        let sym = scheme.uniform_symbol();
        for phi in [0.01, 0.2, 0.45] {
            assert!((lambda0_branch(&bs, phi).unwrap() - sym.evaluate(phi)).norm() < 1e-10);
        }
    }

    #[test]
    fn nonphysical_limits() {
        let xi: f64 = 0.5;
        let fv2 = nonphysical_at_zero(&alt(Scheme::fv_polynomial(2).unwrap(), xi)).unwrap();
        assert!((fv2[0] - Complex64::new(12.0 / (9.0 - xi * xi), 0.0)).norm() < 1e-12);
        let r5 = nonphysical_at_zero(&alt(Scheme::r5(), 0.4)).unwrap();
        assert!((r5[0] - Complex64::new(16.0 / (15.0 * 0.84), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn taylor_order_bounds() {
        let bs = alt(Scheme::r3(), 0.2);
        assert!(lambda0_taylor(&bs, 0).is_err());
        assert!(lambda0_taylor(&bs, MAX_TAYLOR_ORDER + 1).is_err());
    }

    #[test]
    fn first_coefficient_is_i() {
        let bs = alt(Scheme::fv_polynomial(4).unwrap(), 0.3);
        let fit = lambda0_taylor(&bs, 4).unwrap();
        assert!((fit.coefficient(1) - Complex64::new(0.0, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn uniform_amplification_is_one() {
        let bs = alt(Scheme::fv_polynomial(2).unwrap(), 0.0);
        match amplification(&bs, 64, 32).unwrap() {
            Amplification::Bounded { value, .. } => assert!((value - 1.0).abs() < 1e-9, "{value}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_grids_are_rejected() {
        let bs = alt(Scheme::r3(), 0.2);
        assert!(amplification(&bs, 16, 64).is_err());
    }

    #[test]
    fn scan_includes_low_frequencies() {
        let phis = scan_frequencies(2, 512);
        assert!(phis.contains(&1e-4) && phis.contains(&0.0));
        assert!(phis.iter().all(|&p| p < PI));
    }
}
